#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "tbme/dataio.hpp"
#include "tbme/error.hpp"
#include "tbme/evidence.hpp"
#include "tbme/likelihood.hpp"

using namespace tbme;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

std::vector<std::string> data_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("load a small dataset") {
  test::TempDir dir;
  write_text(dir.path() / "ensemble_predictions.csv",
             "realization,t1,t2,t3,t4,t5\n"
             "1,-0.1,-0.2,-0.3,-0.4,-0.5\n"
             "2,-0.2,-0.2,-0.2,-0.2,-0.2\n"
             "3,-0.5,-0.4,-0.3,-0.2,-0.1\n");
  write_text(dir.path() / "observations.csv",
             "t,value,sigma\n1,-0.1,0.01\n2,-0.2,0.01\n3,-0.3,0.01\n4,-0.3,0.02\n5,-0.2,0.01\n");
  const auto [ens, obs] = io::load_dataset(dir.path() / "ensemble_predictions.csv",
                                           dir.path() / "observations.csv");
  CHECK(ens.n_mc() == 3);
  CHECK(ens.n_steps() == 5);
  CHECK(obs.size() == 5);
  CHECK(obs.sigma[3] == 0.02);
  CHECK(ens.predictions(2, 0) == -0.5);

  // Scalar override replaces the column.
  const auto [e2, o2] = io::load_dataset(dir.path() / "ensemble_predictions.csv",
                                         dir.path() / "observations.csv", 0.5);
  CHECK(o2.sigma == std::vector<double>(5, 0.5));

  write_text(dir.path() / "short.csv", "t,value\n1,0\n2,0\n3,0\n4,0\n");
  try {
    (void)io::load_dataset(dir.path() / "ensemble_predictions.csv",
                           dir.path() / "short.csv", 0.01);
    FAIL("expected a length mismatch");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("length mismatch") != std::string::npos);
    CHECK(e.row() == 5u);
  }
  CHECK_THROWS_AS(io::load_observations(dir.path() / "short.csv"), ValidationError);
}

TEST_CASE("malformed files report row and column") {
  test::TempDir dir;
  write_text(dir.path() / "p.csv", "realization,t1,t2\n1,0.1,0.2\n2,0.3,abc\n");
  try {
    (void)io::load_ensemble(dir.path() / "p.csv");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(e.row() == 3u);
    CHECK(e.column() == 3u);
    CHECK(std::string(e.what()).find("row 3, column 3") != std::string::npos);
  }
  write_text(dir.path() / "nan.csv", "realization,t1,t2\n1,0.1,nan\n");
  CHECK_THROWS_AS(io::load_ensemble(dir.path() / "nan.csv"), ValidationError);
  write_text(dir.path() / "hdr.csv", "realization,t1,t3\n1,0.1,0.2\n");
  CHECK_THROWS_AS(io::load_ensemble(dir.path() / "hdr.csv"), ValidationError);
  write_text(dir.path() / "o.csv", "t,value,sigma\n1,0.1,0.01\n2,0.1,0\n");
  try {
    (void)io::load_observations(dir.path() / "o.csv");
    FAIL("expected sigma error");
  } catch (const ValidationError& e) {
    CHECK(e.row() == 3u);
  }
  CHECK_THROWS_AS(io::load_ensemble(dir.path() / "missing.csv"), IoError);
}

TEST_CASE("ensemble, observations and forcing round-trip exactly") {
  test::TempDir dir;
  PredictionEnsemble e = test::random_ensemble(25, 40, 123);
  e.predictions(3, 7) = 1e-300;
  e.predictions(4, 8) = -123456.789012345678;
  io::save_ensemble(e, dir.path());
  const PredictionEnsemble back =
      io::load_ensemble(dir.path() / io::kPredictionsFile, dir.path() / io::kParametersFile,
                        dir.path() / io::kBoundsFile);
  CHECK(back.predictions == e.predictions);
  CHECK(back.parameters == e.parameters);
  CHECK(back.parameter_names == e.parameter_names);
  REQUIRE(back.parameter_bounds.size() == 2);
  CHECK(back.parameter_bounds[1].upper == 1.0);

  const ObservationSeries obs = make_observations({-0.1, -0.2, -0.30000000000000004}, 0.0009);
  io::save_observations(obs, dir.path() / "obs.csv");
  const ObservationSeries obs_back = io::load_observations(dir.path() / "obs.csv");
  CHECK(obs_back.values == obs.values);
  CHECK(obs_back.sigma == obs.sigma);
  CHECK(obs_back.times == obs.times);
}

TEST_CASE("output files: curve, bands and report") {
  test::TempDir dir;
  const PredictionEnsemble e = test::random_ensemble(10, 200, 4);
  std::vector<double> data(e.predictions.row(0).begin(), e.predictions.row(0).end());
  const LogLikTable t = gauss_log_terms(e.predictions, data, std::vector<double>(200, 0.1));
  const TbmeCurve curve = tbme_curve(t, 5);
  REQUIRE(curve.n_windows() == 196);

  ReferenceBands bands;
  bands.tau = 5;
  bands.window_ends = curve.window_ends;
  bands.n_replicates = 77;
  bands.seed = 18446744073709551615ull;
  bands.n_mc = 10;
  bands.min_ess_observed = 1.2345678901234567;
  for (std::size_t k = 0; k < 196; ++k) {
    QuantileRecord q{};
    for (std::size_t j = 0; j < kQuantileCount; ++j) q[j] = -1.0 / 3.0 + 0.1 * j + 1e-9 * k;
    bands.quantiles.push_back(q);
  }
  DetectionReport report;
  report.tau = 5;
  report.window_ends = curve.window_ends;
  report.verdicts.assign(196, Verdict::inside);
  report.window_states.assign(196, State::I);

  const auto written = io::save_outputs(curve, bands, report, dir.path());
  CHECK(written.size() == 3);

  const auto lines = data_lines(dir.path() / "tbme_tau5.csv");
  REQUIRE(lines.size() == 197);
  CHECK(lines[0] == "t_end,log_tbme,ess");
  const TbmeCurve cback = io::read_curve(dir.path() / "tbme_tau5.csv");
  CHECK(cback.log_tbme == curve.log_tbme);
  CHECK(cback.ess == curve.ess);
  CHECK(cback.window_ends == curve.window_ends);
  CHECK(cback.tau == 5);

  CHECK(data_lines(dir.path() / "reference_tau5.csv")[0] ==
        "t_end,min,q010,q025,q160,q500,q840,q975,q990,max");
  const ReferenceBands bback = io::read_bands(dir.path() / "reference_tau5.csv");
  CHECK(bback.quantiles == bands.quantiles);
  CHECK(bback.seed == bands.seed);
  CHECK(bback.n_replicates == 77);
  CHECK(bback.min_ess_observed == bands.min_ess_observed);

  const auto j = nlohmann::json::parse(io::read_file(dir.path() / "detection_tau5.json"));
  CHECK(j.at("signals").is_array());
  CHECK(j.at("signals").empty());
  CHECK(j.at("alpha_quantile") == "q025");
  CHECK(j.at("verdicts").size() == 196);
  const DetectionReport rback = io::read_report(dir.path() / "detection_tau5.json");
  CHECK(rback.verdicts == report.verdicts);
  CHECK(rback.signals.empty());
}

TEST_CASE("report with signals round-trips") {
  test::TempDir dir;
  DetectionReport r;
  r.tau = 3;
  r.alpha = QuantileLevel::q010;
  std::vector<Verdict> v(12, Verdict::inside);
  v[2] = v[3] = Verdict::below_quantile;
  v[5] = Verdict::below_minimum;
  for (std::size_t k = 0; k < 12; ++k) r.window_ends.push_back(3 + k);
  r.verdicts = v;
  r.signals = segment_signals(v, 3);
  r.episodes = group_episodes(r.signals, 3);
  r.window_states.assign(12, State::I);
  for (auto& s : r.signals) s.states.assign(s.length, State::II);
  io::write_report(r, dir.path() / "d.json");
  const DetectionReport back = io::read_report(dir.path() / "d.json");
  REQUIRE(back.signals.size() == 2);
  CHECK(back.alpha == QuantileLevel::q010);
  CHECK(back.signals[1].severity == Verdict::below_minimum);
  CHECK(back.signals[0].length == 2);
  CHECK(back.signals[0].states == r.signals[0].states);
  REQUIRE(back.episodes.size() == 1);
  CHECK(back.episodes[0].length == r.episodes[0].length);
  const auto j = nlohmann::json::parse(io::read_file(dir.path() / "d.json"));
  CHECK(j["signals"][0].contains("L_e_estimate"));
  CHECK(j["episodes"][0]["L_s"] == 4);
}

TEST_CASE("bands file with crossing quantiles is rejected") {
  test::TempDir dir;
  write_text(dir.path() / "r.csv",
             "t_end,min,q010,q025,q160,q500,q840,q975,q990,max\n"
             "5,0,1,2,3,4,5,6,7,8\n6,0,1,2,3,9,5,6,7,8\n");
  CHECK_THROWS_AS(io::read_bands(dir.path() / "r.csv"), ValidationError);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, -1.0 / 3.0, 1e-308, 6.02214076e23, -0.0}) {
    CHECK(std::strtod(io::format_double(x).c_str(), nullptr) == x);
  }
}

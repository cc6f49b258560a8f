#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "tbme/dataio.hpp"
#include "tbme/error.hpp"
#include "tbme/pipeline.hpp"
#include "tbme/synthlab.hpp"

using namespace tbme;
namespace fs = std::filesystem;

namespace {

// Writes a small base case once per process and returns its directory.
const fs::path& small_case_dir() {
  static test::TempDir dir;
  static const bool ready = [] {
    CaseConfig cfg;
    cfg.n_mc = 120;
    cfg.horizon = 60;
    io::save_case(build_case(CaseId::base, cfg), dir.path());
    return true;
  }();
  (void)ready;
  return dir.path();
}

RunConfig small_run(const fs::path& out) {
  RunConfig c;
  c.ensemble_path = small_case_dir() / io::kPredictionsFile;
  c.observations_path = small_case_dir() / io::kObservationsFile;
  c.n_replicates = 40;
  c.seed = 5;
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_CASE("snapshot windows cover the five phases") {
  const auto w = snapshot_windows(82, 95, 110, 20, 200);
  CHECK(w == std::vector<std::size_t>{81, 88, 95, 103, 111});
  // Clamped at the series edges, duplicates collapse.
  const auto edge = snapshot_windows(20, 20, 200, 20, 200);
  CHECK(edge.front() == 20);
  CHECK(edge.back() == 200);
}

TEST_CASE("single tau run writes one output set") {
  test::TempDir out;
  RunConfig c = small_run(out.path());
  c.tau_list = {5};
  const RunManifest m = run_pipeline(c);
  CHECK(m.ok());
  REQUIRE(m.outcomes.size() == 1);
  CHECK(m.outcomes[0].ok);
  CHECK(fs::exists(out.path() / "tbme_tau5.csv"));
  CHECK(fs::exists(out.path() / "reference_tau5.csv"));
  CHECK(fs::exists(out.path() / "detection_tau5.json"));
  CHECK(fs::exists(out.path() / "manifest.json"));
  const auto j = nlohmann::json::parse(io::read_file(out.path() / "manifest.json"));
  CHECK(j.at("version") == kVersion);
  CHECK(j.at("config").at("seed") == 5);
  CHECK(j.at("files").size() == m.files.size());
  for (const auto& f : m.files) {
    CHECK(f.sha256.size() == 64);
    CHECK(sha256_hex(out.path() / f.path) == f.sha256);
  }
}

TEST_CASE("four window sizes, rerun and worker count give identical bytes") {
  test::TempDir a, b;
  RunConfig c = small_run(a.path());
  c.workers = 1;
  const RunManifest ma = run_pipeline(c);
  CHECK(ma.ok());
  for (std::size_t tau : {5, 10, 15, 20}) {
    CHECK(fs::exists(a.path() / io::curve_file_name(tau)));
    CHECK(fs::exists(a.path() / io::reference_file_name(tau)));
    CHECK(fs::exists(a.path() / io::detection_file_name(tau)));
  }
  c.out_dir = b.path();
  c.workers = 3;
  const RunManifest mb = run_pipeline(c);
  REQUIRE(ma.files.size() == mb.files.size());
  for (std::size_t k = 0; k < ma.files.size(); ++k) {
    CHECK(ma.files[k].path == mb.files[k].path);
    CHECK(ma.files[k].sha256 == mb.files[k].sha256);
  }
}

TEST_CASE("sha256 of a known string") {
  test::TempDir d;
  std::ofstream(d.path() / "abc.txt") << "abc";
  CHECK(sha256_hex(d.path() / "abc.txt") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("run config file") {
  test::TempDir d;
  std::ofstream(d.path() / "run.json")
      << R"({"tau": [10, 20], "sigma": 0.002, "replicates": 300, "seed": 9,
             "alpha": "q010", "ensemble": "data/ens.csv", "observations": "data/obs.csv",
             "out": "results"})";
  const RunConfig c = load_run_config(d.path() / "run.json");
  CHECK(c.tau_list == std::vector<std::size_t>{10, 20});
  CHECK(c.sigma == 0.002);
  CHECK(c.n_replicates == 300);
  CHECK(c.seed == 9);
  CHECK(c.alpha == QuantileLevel::q010);
  CHECK(c.ensemble_path == d.path() / "data/ens.csv");
  CHECK(c.out_dir == d.path() / "results");
  const auto j = nlohmann::json::parse(run_config_json(c));
  CHECK(j.at("tau").size() == 2);
  CHECK_FALSE(j.contains("workers"));

  std::ofstream(d.path() / "bad.json") << R"({"alpha": "q999"})";
  CHECK_THROWS_AS(load_run_config(d.path() / "bad.json"), ValidationError);
  CHECK_THROWS_AS(load_run_config(d.path() / "none.json"), IoError);
}

TEST_CASE("invalid window size is rejected before any output") {
  test::TempDir out;
  RunConfig c = small_run(out.path());
  c.tau_list = {5, 61};
  CHECK_THROWS_AS(run_pipeline(c), ValidationError);
  CHECK_FALSE(fs::exists(out.path() / "tbme_tau5.csv"));
}

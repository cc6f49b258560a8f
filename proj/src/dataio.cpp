#include "tbme/dataio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "tbme/error.hpp"

namespace tbme::io {

using nlohmann::json;

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based file line of each row
  std::vector<std::string> comments;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      table.comments.emplace_back(trim(view.substr(1)));
      continue;
    }
    if (table.header.empty()) {
      table.header = split(view);
      continue;
    }
    table.rows.push_back(split(view));
    table.lines.push_back(number);
    if (table.rows.back().size() != table.header.size()) {
      throw ValidationError(path.filename().string() + ": expected " +
                                std::to_string(table.header.size()) +
                                " fields, found " +
                                std::to_string(table.rows.back().size()),
                            number);
    }
  }
  if (table.header.empty()) {
    throw ValidationError(path.filename().string() + ": missing header");
  }
  return table;
}

double parse_double(const std::string& field, const fs::path& path,
                    std::size_t line, std::size_t column) {
  double value = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(path.filename().string() + ": cannot parse '" + field +
                              "' as a number",
                          line, column);
  }
  if (!std::isfinite(value)) {
    throw ValidationError(path.filename().string() + ": non-finite value", line,
                          column);
  }
  return value;
}

long long parse_integer(const std::string& field, const fs::path& path,
                        std::size_t line, std::size_t column) {
  long long value = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(path.filename().string() + ": cannot parse '" + field +
                              "' as an integer",
                          line, column);
  }
  return value;
}

void expect_header(const CsvTable& table, const std::vector<std::string>& want,
                   const fs::path& path) {
  if (table.header != want) {
    std::string expected;
    for (const auto& w : want) expected += (expected.empty() ? "" : ",") + w;
    throw ValidationError(path.filename().string() + ": header must be '" +
                              expected + "'",
                          1);
  }
}

fs::path ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string());
  }
  return path;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  ensure_parent(path);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PredictionEnsemble load_ensemble(const fs::path& predictions_path,
                                 const std::optional<fs::path>& parameters_path,
                                 const std::optional<fs::path>& bounds_path) {
  const CsvTable pred = read_csv(predictions_path);
  if (pred.header.size() < 2 || pred.header.front() != "realization") {
    throw ValidationError(predictions_path.filename().string() +
                              ": header must be 'realization,t1,...,tNo'",
                          1);
  }
  const std::size_t n_o = pred.header.size() - 1;
  for (std::size_t t = 0; t < n_o; ++t) {
    if (pred.header[t + 1] != "t" + std::to_string(t + 1)) {
      throw ValidationError(predictions_path.filename().string() +
                                ": expected column 't" + std::to_string(t + 1) +
                                "'",
                            1, t + 2);
    }
  }
  PredictionEnsemble ens;
  ens.predictions = Matrix(pred.rows.size(), n_o);
  std::vector<long long> ids(pred.rows.size());
  for (std::size_t i = 0; i < pred.rows.size(); ++i) {
    ids[i] = parse_integer(pred.rows[i][0], predictions_path, pred.lines[i], 1);
    for (std::size_t t = 0; t < n_o; ++t) {
      ens.predictions(i, t) =
          parse_double(pred.rows[i][t + 1], predictions_path, pred.lines[i], t + 2);
    }
  }

  if (parameters_path) {
    const CsvTable par = read_csv(*parameters_path);
    if (par.header.empty() || par.header.front() != "realization") {
      throw ValidationError(parameters_path->filename().string() +
                                ": header must start with 'realization'",
                            1);
    }
    ens.parameter_names.assign(par.header.begin() + 1, par.header.end());
    if (par.rows.size() != pred.rows.size()) {
      throw ValidationError(parameters_path->filename().string() + ": " +
                            std::to_string(par.rows.size()) +
                            " rows, predictions have " +
                            std::to_string(pred.rows.size()));
    }
    ens.parameters = Matrix(par.rows.size(), ens.parameter_names.size());
    for (std::size_t i = 0; i < par.rows.size(); ++i) {
      if (parse_integer(par.rows[i][0], *parameters_path, par.lines[i], 1) != ids[i]) {
        throw ValidationError(parameters_path->filename().string() +
                                  ": realization id does not match predictions",
                              par.lines[i], 1);
      }
      for (std::size_t k = 0; k < ens.parameter_names.size(); ++k) {
        ens.parameters(i, k) =
            parse_double(par.rows[i][k + 1], *parameters_path, par.lines[i], k + 2);
      }
    }
  }

  if (bounds_path) {
    json j;
    try {
      j = json::parse(read_file(*bounds_path));
    } catch (const json::exception& e) {
      throw ValidationError(bounds_path->filename().string() + ": " + e.what());
    }
    for (std::size_t k = 0; k < ens.parameter_names.size(); ++k) {
      const auto& name = ens.parameter_names[k];
      if (!j.contains(name) || !j[name].is_array() || j[name].size() != 2) {
        throw ValidationError(bounds_path->filename().string() +
                              ": missing [lo, hi] for '" + name + "'");
      }
      ens.parameter_bounds.push_back({j[name][0].get<double>(), j[name][1].get<double>()});
    }
  }
  ens.validate();
  return ens;
}

ObservationSeries load_observations(const fs::path& path,
                                    std::optional<double> sigma) {
  const CsvTable table = read_csv(path);
  const bool has_sigma = table.header.size() == 3;
  if (has_sigma) {
    expect_header(table, {"t", "value", "sigma"}, path);
  } else {
    expect_header(table, {"t", "value"}, path);
  }
  if (!has_sigma && !sigma) {
    throw ValidationError(path.filename().string() +
                          ": no sigma column; pass sigma explicitly");
  }
  if (sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) {
    throw ValidationError("sigma must be finite and > 0");
  }
  ObservationSeries obs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    obs.times.push_back(
        static_cast<int>(parse_integer(row[0], path, table.lines[r], 1)));
    obs.values.push_back(parse_double(row[1], path, table.lines[r], 2));
    double s = sigma.value_or(0.0);
    if (!sigma) {
      s = parse_double(row[2], path, table.lines[r], 3);
      if (!(s > 0.0)) {
        throw ValidationError(path.filename().string() + ": sigma must be > 0",
                              table.lines[r], 3);
      }
    }
    obs.sigma.push_back(s);
  }
  for (std::size_t t = 1; t < obs.times.size(); ++t) {
    if (obs.times[t] != obs.times[t - 1] + 1) {
      throw ValidationError(path.filename().string() +
                                ": times must increase with unit spacing",
                            table.lines[t], 1);
    }
  }
  obs.validate();
  return obs;
}

ForcingSeries load_forcing(const fs::path& path) {
  const CsvTable table = read_csv(path);
  expect_header(table, {"t", "precip", "pet"}, path);
  ForcingSeries f;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    f.times.push_back(static_cast<int>(parse_integer(row[0], path, table.lines[r], 1)));
    const double p = parse_double(row[1], path, table.lines[r], 2);
    const double e = parse_double(row[2], path, table.lines[r], 3);
    if (p < 0.0) {
      throw ValidationError(path.filename().string() + ": negative precipitation",
                            table.lines[r], 2);
    }
    if (e < 0.0) {
      throw ValidationError(path.filename().string() + ": negative pet",
                            table.lines[r], 3);
    }
    f.precipitation.push_back(p);
    f.potential_evaporation.push_back(e);
  }
  f.validate();
  return f;
}

std::pair<PredictionEnsemble, ObservationSeries> load_dataset(
    const fs::path& ensemble_path, const fs::path& observations_path,
    std::optional<double> sigma) {
  const fs::path dir = ensemble_path.parent_path();
  std::optional<fs::path> params;
  std::optional<fs::path> bounds;
  if (fs::exists(dir / kParametersFile)) params = dir / kParametersFile;
  if (params && fs::exists(dir / kBoundsFile)) bounds = dir / kBoundsFile;
  PredictionEnsemble ens = load_ensemble(ensemble_path, params, bounds);
  ObservationSeries obs = load_observations(observations_path, sigma);
  if (obs.size() != ens.n_steps()) {
    throw ValidationError("length mismatch: observations have " +
                          std::to_string(obs.size()) +
                          " steps, predictions have " +
                          std::to_string(ens.n_steps()) + " columns",
                          std::min(obs.size(), ens.n_steps()) + 1);
  }
  return {std::move(ens), std::move(obs)};
}

std::vector<fs::path> save_ensemble(const PredictionEnsemble& ensemble,
                                    const fs::path& dir) {
  std::vector<fs::path> written;
  {
    std::string text = "realization";
    for (std::size_t t = 0; t < ensemble.n_steps(); ++t) {
      text += ",t" + std::to_string(t + 1);
    }
    text += '\n';
    for (std::size_t i = 0; i < ensemble.n_mc(); ++i) {
      text += std::to_string(i + 1);
      for (double v : ensemble.predictions.row(i)) text += "," + format_double(v);
      text += '\n';
    }
    write_file_atomic(dir / kPredictionsFile, text);
    written.push_back(dir / kPredictionsFile);
  }
  if (ensemble.n_params() > 0) {
    std::string text = "realization";
    for (const auto& name : ensemble.parameter_names) text += "," + name;
    text += '\n';
    for (std::size_t i = 0; i < ensemble.n_mc(); ++i) {
      text += std::to_string(i + 1);
      for (double v : ensemble.parameters.row(i)) text += "," + format_double(v);
      text += '\n';
    }
    write_file_atomic(dir / kParametersFile, text);
    written.push_back(dir / kParametersFile);
  }
  if (!ensemble.parameter_bounds.empty()) {
    // Bounds are emitted as raw text to keep 17-digit round-trip formatting.
    std::string text = "{\n";
    for (std::size_t k = 0; k < ensemble.n_params(); ++k) {
      text += "  " + json(ensemble.parameter_names[k]).dump() + ": [" +
              format_double(ensemble.parameter_bounds[k].lower) + ", " +
              format_double(ensemble.parameter_bounds[k].upper) + "]";
      text += k + 1 < ensemble.n_params() ? ",\n" : "\n";
    }
    text += "}\n";
    write_file_atomic(dir / kBoundsFile, text);
    written.push_back(dir / kBoundsFile);
  }
  return written;
}

fs::path save_observations(const ObservationSeries& obs, const fs::path& path) {
  std::string text = "t,value,sigma\n";
  for (std::size_t t = 0; t < obs.size(); ++t) {
    text += std::to_string(obs.times[t]) + "," + format_double(obs.values[t]) +
            "," + format_double(obs.sigma[t]) + "\n";
  }
  write_file_atomic(path, text);
  return path;
}

fs::path save_forcing(const ForcingSeries& forcing, const fs::path& path) {
  std::string text = "t,precip,pet\n";
  for (std::size_t t = 0; t < forcing.size(); ++t) {
    text += std::to_string(forcing.times[t]) + "," +
            format_double(forcing.precipitation[t]) + "," +
            format_double(forcing.potential_evaporation[t]) + "\n";
  }
  write_file_atomic(path, text);
  return path;
}

std::string curve_file_name(std::size_t tau) {
  return "tbme_tau" + std::to_string(tau) + ".csv";
}
std::string reference_file_name(std::size_t tau) {
  return "reference_tau" + std::to_string(tau) + ".csv";
}
std::string detection_file_name(std::size_t tau) {
  return "detection_tau" + std::to_string(tau) + ".json";
}

fs::path write_curve(const TbmeCurve& curve, const fs::path& path) {
  std::string text = "# tau=" + std::to_string(curve.tau) +
                     " n_mc=" + std::to_string(curve.n_mc_used) + "\n";
  text += "t_end,log_tbme,ess\n";
  for (std::size_t k = 0; k < curve.n_windows(); ++k) {
    text += std::to_string(curve.window_ends[k]) + "," +
            format_double(curve.log_tbme[k]) + "," + format_double(curve.ess[k]) +
            "\n";
  }
  write_file_atomic(path, text);
  return path;
}

namespace {

// Parses "key=value" tokens from a comment line.
std::vector<std::pair<std::string, std::string>> parse_meta(
    const std::vector<std::string>& comments) {
  std::vector<std::pair<std::string, std::string>> meta;
  for (const auto& c : comments) {
    std::istringstream ss(c);
    std::string token;
    while (ss >> token) {
      const auto eq = token.find('=');
      if (eq != std::string::npos) {
        meta.emplace_back(token.substr(0, eq), token.substr(eq + 1));
      }
    }
  }
  return meta;
}

std::optional<std::string> meta_value(
    const std::vector<std::pair<std::string, std::string>>& meta,
    const std::string& key) {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

}  // namespace

TbmeCurve read_curve(const fs::path& path) {
  const CsvTable table = read_csv(path);
  expect_header(table, {"t_end", "log_tbme", "ess"}, path);
  TbmeCurve curve;
  const auto meta = parse_meta(table.comments);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    curve.window_ends.push_back(
        static_cast<std::size_t>(parse_integer(row[0], path, table.lines[r], 1)));
    curve.log_tbme.push_back(parse_double(row[1], path, table.lines[r], 2));
    curve.ess.push_back(parse_double(row[2], path, table.lines[r], 3));
  }
  if (const auto tau = meta_value(meta, "tau")) {
    curve.tau = std::stoul(*tau);
  } else if (!curve.window_ends.empty()) {
    curve.tau = curve.window_ends.front();
  }
  if (const auto n = meta_value(meta, "n_mc")) curve.n_mc_used = std::stoul(*n);
  return curve;
}

fs::path write_bands(const ReferenceBands& bands, const fs::path& path) {
  std::string text = "# tau=" + std::to_string(bands.tau) +
                     " seed=" + std::to_string(bands.seed) +
                     " n_replicates=" + std::to_string(bands.n_replicates) +
                     " n_mc=" + std::to_string(bands.n_mc) +
                     " min_ess_observed=" + format_double(bands.min_ess_observed) +
                     " perturbed=" + (bands.perturbed ? "1" : "0") + "\n";
  text += "t_end";
  for (auto label : kQuantileLabels) text += "," + std::string(label);
  text += '\n';
  for (std::size_t k = 0; k < bands.n_windows(); ++k) {
    text += std::to_string(bands.window_ends[k]);
    for (double q : bands.quantiles[k]) text += "," + format_double(q);
    text += '\n';
  }
  write_file_atomic(path, text);
  return path;
}

ReferenceBands read_bands(const fs::path& path) {
  const CsvTable table = read_csv(path);
  std::vector<std::string> want = {"t_end"};
  for (auto label : kQuantileLabels) want.emplace_back(label);
  expect_header(table, want, path);
  ReferenceBands bands;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    bands.window_ends.push_back(
        static_cast<std::size_t>(parse_integer(row[0], path, table.lines[r], 1)));
    QuantileRecord rec{};
    for (std::size_t q = 0; q < kQuantileCount; ++q) {
      rec[q] = parse_double(row[q + 1], path, table.lines[r], q + 2);
      if (q > 0 && rec[q] < rec[q - 1]) {
        throw ValidationError(path.filename().string() +
                                  ": quantiles must be non-decreasing",
                              table.lines[r], q + 2);
      }
    }
    bands.quantiles.push_back(rec);
  }
  const auto meta = parse_meta(table.comments);
  auto number = [&](const char* key, auto fallback) {
    const auto v = meta_value(meta, key);
    return v ? std::stoull(*v) : static_cast<unsigned long long>(fallback);
  };
  bands.tau = number("tau", bands.window_ends.empty() ? 0 : bands.window_ends.front());
  bands.seed = number("seed", 0);
  bands.n_replicates = number("n_replicates", 0);
  bands.n_mc = number("n_mc", 0);
  bands.perturbed = number("perturbed", 0) != 0;
  if (const auto v = meta_value(meta, "min_ess_observed")) {
    bands.min_ess_observed = std::stod(*v);
  }
  return bands;
}

fs::path write_report(const DetectionReport& report, const fs::path& path) {
  json j;
  j["tau"] = report.tau;
  j["alpha_quantile"] = std::string(quantile_label(report.alpha));
  j["window_ends"] = report.window_ends;
  json verdicts = json::array();
  for (auto v : report.verdicts) verdicts.push_back(std::string(verdict_name(v)));
  j["verdicts"] = verdicts;
  json states = json::array();
  for (auto s : report.window_states) states.push_back(std::string(state_name(s)));
  j["window_states"] = states;
  json signals = json::array();
  for (const auto& s : report.signals) {
    json sj;
    sj["onset"] = s.onset_window_end;
    sj["offset"] = s.offset_window_end;
    sj["L_s"] = s.length;
    sj["L_e_estimate"] = s.residual_length;
    sj["severity"] = std::string(verdict_name(s.severity));
    json st = json::array();
    for (auto x : s.states) st.push_back(std::string(state_name(x)));
    sj["states"] = st;
    signals.push_back(sj);
  }
  j["signals"] = signals;
  json episodes = json::array();
  for (const auto& e : report.episodes) {
    episodes.push_back({{"onset", e.onset_window_end},
                        {"offset", e.offset_window_end},
                        {"L_s", e.length},
                        {"L_e_estimate", e.residual_length},
                        {"signals", {e.first_signal, e.last_signal}}});
  }
  j["episodes"] = episodes;
  write_file_atomic(path, json_text(j));
  return path;
}

DetectionReport read_report(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.filename().string() + ": " + e.what());
  }
  DetectionReport report;
  try {
    report.tau = j.at("tau").get<std::size_t>();
    report.alpha = parse_quantile_level(j.at("alpha_quantile").get<std::string>());
    if (j.contains("window_ends")) {
      report.window_ends = j["window_ends"].get<std::vector<std::size_t>>();
    }
    for (const auto& v : j.at("verdicts")) {
      report.verdicts.push_back(parse_verdict(v.get<std::string>()));
    }
    if (j.contains("window_states")) {
      for (const auto& s : j["window_states"]) {
        report.window_states.push_back(parse_state(s.get<std::string>()));
      }
    }
    for (const auto& sj : j.at("signals")) {
      Signal s;
      s.onset_window_end = sj.at("onset").get<std::size_t>();
      s.offset_window_end = sj.at("offset").get<std::size_t>();
      s.length = sj.at("L_s").get<std::size_t>();
      s.residual_length = sj.at("L_e_estimate").get<std::size_t>();
      s.severity = parse_verdict(sj.at("severity").get<std::string>());
      for (const auto& x : sj.at("states")) {
        s.states.push_back(parse_state(x.get<std::string>()));
      }
      report.signals.push_back(std::move(s));
    }
    // Episodes are derived data; rebuild rather than trust the file.
    report.episodes = group_episodes(report.signals, report.tau);
  } catch (const json::exception& e) {
    throw ValidationError(path.filename().string() + ": " + e.what());
  }
  return report;
}

fs::path write_posterior(const PosteriorSnapshot& snapshot,
                         const PredictionEnsemble& ensemble,
                         const fs::path& path) {
  std::string text = "# window_end=" + std::to_string(snapshot.window_end) +
                     " tau=" + std::to_string(snapshot.tau) +
                     " ess=" + format_double(snapshot.ess) +
                     " map_index=" + std::to_string(snapshot.map_index + 1) + "\n";
  text += "parameter,kind,x,y\n";
  const double map_weight = snapshot.weights.empty()
                                ? 0.0
                                : snapshot.weights[snapshot.map_index];
  for (const auto& m : snapshot.marginals) {
    for (std::size_t g = 0; g < m.grid.size(); ++g) {
      text += m.name + ",density," + format_double(m.grid[g]) + "," +
              format_double(m.density[g]) + "\n";
    }
    text += m.name + ",q025," + format_double(m.q025) + ",0.025\n";
    text += m.name + ",q500," + format_double(m.q500) + ",0.5\n";
    text += m.name + ",q975," + format_double(m.q975) + ",0.975\n";
    text += m.name + ",map_value," + format_double(m.map_value) + "," +
            format_double(map_weight) + "\n";
    if (m.point_mass) text += m.name + ",point_mass," + format_double(m.q500) + ",1\n";
  }
  (void)ensemble;
  write_file_atomic(path, text);
  return path;
}

fs::path write_curve_bands(const CurveBands& bands, const fs::path& path) {
  std::string text =
      "h,theta_q025,theta_q500,theta_q975,K_q025,K_q500,K_q975,theta_map,K_map\n";
  for (std::size_t k = 0; k < bands.h.size(); ++k) {
    const auto& t = bands.theta[k];
    const auto& c = bands.conductivity[k];
    text += format_double(bands.h[k]) + "," + format_double(t[1]) + "," +
            format_double(t[2]) + "," + format_double(t[3]) + "," +
            format_double(c[1]) + "," + format_double(c[2]) + "," +
            format_double(c[3]) + "," + format_double(bands.theta_map[k]) + "," +
            format_double(bands.conductivity_map[k]) + "\n";
  }
  write_file_atomic(path, text);
  return path;
}

std::vector<fs::path> save_outputs(const TbmeCurve& curve,
                                   const ReferenceBands& bands,
                                   const DetectionReport& report,
                                   const fs::path& out_dir) {
  return {write_curve(curve, out_dir / curve_file_name(curve.tau)),
          write_bands(bands, out_dir / reference_file_name(bands.tau)),
          write_report(report, out_dir / detection_file_name(report.tau))};
}

std::vector<fs::path> save_case(const CaseBundle& bundle, const fs::path& dir) {
  std::vector<fs::path> written = save_ensemble(bundle.ensemble, dir);
  written.push_back(save_observations(bundle.observations, dir / kObservationsFile));
  written.push_back(save_forcing(bundle.forcing, dir / kForcingFile));

  json truth;
  truth["case"] = std::string(case_name(bundle.id));
  json params = json::object();
  for (std::size_t k = 0; k < bundle.ensemble.parameter_names.size() &&
                          k < bundle.truth_row.size();
       ++k) {
    params[bundle.ensemble.parameter_names[k]] = bundle.truth_row[k];
  }
  params["w2"] = bundle.truth.w2;
  params["k_fast"] = bundle.truth.k_fast;
  params["initial_fraction"] = bundle.truth.initial_fraction;
  truth["parameters"] = params;
  json periods = json::array();
  for (const auto& p : bundle.injection.structural_periods) {
    periods.push_back({p.first, p.last});
  }
  truth["injection"] = {{"structural_periods", periods},
                        {"forcing_removal_days", bundle.injection.forcing_removal_days}};
  json residual = json::array();
  for (const auto& p : bundle.residual_periods) residual.push_back({p.first, p.last});
  truth["residual_periods"] = residual;
  truth["selection_statistic"] = bundle.selection_statistic;
  truth["resampled_draws"] = bundle.resampled;
  write_file_atomic(dir / "truth.json", json_text(truth));
  written.push_back(dir / "truth.json");
  return written;
}

}  // namespace tbme::io

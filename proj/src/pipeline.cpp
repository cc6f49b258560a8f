#include "tbme/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include <openssl/evp.h>

#include "json.hpp"
#include "tbme/dataio.hpp"
#include "tbme/error.hpp"
#include "tbme/parallel.hpp"

namespace tbme {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json config_to_json(const RunConfig& c) {
  json j;
  j["tau"] = c.tau_list;
  j["sigma"] = c.sigma ? json(*c.sigma) : json(nullptr);
  j["replicates"] = c.n_replicates;
  j["seed"] = c.seed;
  j["alpha"] = std::string(quantile_label(c.alpha));
  j["min_ess"] = c.min_ess ? json(*c.min_ess) : json(nullptr);
  j["perturb"] = c.perturb_reference;
  j["excursion"] = c.excursion;
  j["ensemble"] = c.ensemble_path.generic_string();
  j["observations"] = c.observations_path.generic_string();
  j["out"] = c.out_dir.generic_string();
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("tau")) c.tau_list = j["tau"].get<std::vector<std::size_t>>();
    if (j.contains("sigma") && !j["sigma"].is_null()) c.sigma = j["sigma"].get<double>();
    if (j.contains("replicates")) c.n_replicates = j["replicates"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("alpha")) c.alpha = parse_quantile_level(j["alpha"].get<std::string>());
    if (j.contains("min_ess") && !j["min_ess"].is_null()) {
      c.min_ess = j["min_ess"].get<double>();
    }
    if (j.contains("perturb")) c.perturb_reference = j["perturb"].get<bool>();
    if (j.contains("excursion")) c.excursion = j["excursion"].get<bool>();
    if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
    if (j.contains("ensemble")) c.ensemble_path = j["ensemble"].get<std::string>();
    if (j.contains("observations")) {
      c.observations_path = j["observations"].get<std::string>();
    }
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("run config: ") + e.what());
  }
  return c;
}

void validate_config(const RunConfig& c, std::size_t n_steps) {
  if (c.tau_list.empty()) throw ValidationError("tau list is empty");
  for (std::size_t tau : c.tau_list) {
    if (tau < 1 || tau > n_steps) {
      throw ValidationError("tau=" + std::to_string(tau) + " outside 1.." +
                            std::to_string(n_steps));
    }
  }
  if (c.n_replicates < 2) throw ValidationError("replicates must be >= 2");
}

std::size_t trough_of(const TbmeCurve& curve, const Signal& s) {
  const std::size_t base = curve.window_ends.front();
  std::size_t best = s.onset_window_end;
  for (std::size_t j = s.onset_window_end; j <= s.offset_window_end; ++j) {
    if (curve.log_tbme[j - base] < curve.log_tbme[best - base]) best = j;
  }
  return best;
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.filename().string() + ": " + e.what());
  }
  RunConfig c = config_from_json(j);
  // Relative input/output paths are resolved against the config's directory.
  const fs::path dir = path.parent_path();
  auto resolve = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = dir / p;
  };
  resolve(c.ensemble_path);
  resolve(c.observations_path);
  resolve(c.out_dir);
  return c;
}

std::string run_config_json(const RunConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

bool RunManifest::ok() const {
  return std::all_of(outcomes.begin(), outcomes.end(),
                     [](const TauOutcome& o) { return o.ok; });
}

std::string sha256_hex(const fs::path& path) {
  const std::string content = io::read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw IoError("sha256 failed for " + path.string());
  }
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", digest[k]);
    hex += buf;
  }
  return hex;
}

std::vector<std::size_t> snapshot_windows(std::size_t onset,
                                          std::size_t trough,
                                          std::size_t offset, std::size_t tau,
                                          std::size_t n_steps) {
  std::set<std::size_t> picks;
  picks.insert(onset > tau ? onset - 1 : onset);
  picks.insert((onset + trough) / 2);
  picks.insert(trough);
  picks.insert((trough + offset + 1) / 2);
  picks.insert(offset < n_steps ? offset + 1 : offset);
  return {picks.begin(), picks.end()};
}

RunManifest run_pipeline(const RunConfig& config) {
  auto [ensemble, obs] =
      io::load_dataset(config.ensemble_path, config.observations_path, config.sigma);
  validate_config(config, ensemble.n_steps());

  const std::size_t workers = resolve_workers(config.workers);
  const std::size_t tau_workers = std::min(workers, config.tau_list.size());
  const std::size_t inner_workers = std::max<std::size_t>(1, workers / tau_workers);
  const LogLikTable table = gauss_log_terms(ensemble, obs, workers);
  const double floor = config.min_ess.value_or(default_ess_floor(ensemble.n_mc()));
  const bool has_mvg = ensemble.parameter_index("theta_s") &&
                       ensemble.parameter_index("alpha") &&
                       ensemble.parameter_index("n") &&
                       ensemble.parameter_index("K_sat") &&
                       ensemble.parameter_index("l");

  RunManifest manifest;
  manifest.config = config;
  manifest.outcomes.resize(config.tau_list.size());
  std::vector<std::vector<fs::path>> written(config.tau_list.size());

  parallel_for(config.tau_list.size(), tau_workers, [&](std::size_t idx) {
    const std::size_t tau = config.tau_list[idx];
    TauOutcome& outcome = manifest.outcomes[idx];
    outcome.tau = tau;
    try {
      const TbmeCurve curve = tbme_curve(table, tau, inner_workers);
      ReferenceOptions ropt;
      ropt.n_replicates = config.n_replicates;
      ropt.seed = config.seed;
      ropt.perturb = config.perturb_reference;
      ropt.workers = inner_workers;
      const ReferenceBands bands = sample_reference(ensemble, obs.sigma, tau, ropt);
      outcome.converged = check_convergence(bands, floor).passed;
      DetectionOptions dopt;
      dopt.alpha = config.alpha;
      dopt.excursion = config.excursion;
      const DetectionReport report = detect(curve, bands, dopt);
      outcome.n_signals = report.signals.size();

      auto files = io::save_outputs(curve, bands, report, config.out_dir);
      const fs::path post_dir = config.out_dir / ("posterior_tau" + std::to_string(tau));
      std::set<std::size_t> windows;
      for (const auto& s : report.signals) {
        for (std::size_t j : snapshot_windows(s.onset_window_end, trough_of(curve, s),
                                              s.offset_window_end, tau,
                                              ensemble.n_steps())) {
          windows.insert(j);
        }
      }
      for (std::size_t j : windows) {
        const PosteriorSnapshot snap = posterior_snapshot(table, ensemble, j, tau);
        files.push_back(io::write_posterior(
            snap, ensemble, post_dir / ("posterior_w" + std::to_string(j) + ".csv")));
        if (has_mvg) {
          const auto grid = default_head_grid();
          files.push_back(io::write_curve_bands(
              curve_bands(snap, ensemble, grid),
              post_dir / ("wrc_w" + std::to_string(j) + ".csv")));
        }
      }
      written[idx] = std::move(files);
      outcome.ok = true;
    } catch (const Error& e) {
      outcome.ok = false;
      outcome.exit_code = static_cast<int>(e.kind());
      outcome.error = "tau=" + std::to_string(tau) + ": " + e.what();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.exit_code = static_cast<int>(ErrorKind::numerical);
      outcome.error = "tau=" + std::to_string(tau) + ": " + e.what();
    }
  });

  std::map<std::string, fs::path> ordered;
  for (const auto& files : written) {
    for (const auto& f : files) {
      ordered.emplace(fs::relative(f, config.out_dir).generic_string(), f);
    }
  }
  for (const auto& [rel, full] : ordered) {
    manifest.files.push_back({rel, sha256_hex(full)});
  }

  json j;
  j["version"] = kVersion;
  j["config"] = config_to_json(config);
  j["ess_floor"] = floor;
  json outcomes = json::array();
  for (const auto& o : manifest.outcomes) {
    outcomes.push_back({{"tau", o.tau},
                        {"ok", o.ok},
                        {"error", o.error},
                        {"signals", o.n_signals},
                        {"converged", o.converged}});
  }
  j["outcomes"] = outcomes;
  json files = json::array();
  for (const auto& f : manifest.files) {
    files.push_back({{"path", f.path.generic_string()}, {"sha256", f.sha256}});
  }
  j["files"] = files;
  io::write_file_atomic(config.out_dir / "manifest.json", j.dump(2) + "\n");
  return manifest;
}

}  // namespace tbme

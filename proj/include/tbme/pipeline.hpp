#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tbme/reference.hpp"

namespace tbme {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::vector<std::size_t> tau_list = {5, 10, 15, 20};
  /// Scalar sigma; when unset the observations file must carry a column.
  std::optional<double> sigma;
  std::size_t n_replicates = 1000;
  std::uint64_t seed = 0;
  QuantileLevel alpha = QuantileLevel::q025;
  /// ESS floor for the reference; unset selects max(10, N_MC / 100).
  std::optional<double> min_ess;
  bool perturb_reference = false;
  bool excursion = false;
  std::size_t workers = 1;
  std::filesystem::path ensemble_path;
  std::filesystem::path observations_path;
  std::filesystem::path out_dir = "out";
};

RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_json(const RunConfig& config);

struct ManifestEntry {
  std::filesystem::path path;  // relative to out_dir
  std::string sha256;
};

struct TauOutcome {
  std::size_t tau = 0;
  bool ok = false;
  std::string error;
  int exit_code = 0;  // ErrorKind of the failure, 0 on success
  std::size_t n_signals = 0;
  bool converged = false;
};

struct RunManifest {
  RunConfig config;
  std::vector<TauOutcome> outcomes;
  std::vector<ManifestEntry> files;

  bool ok() const;
};

std::string sha256_hex(const std::filesystem::path& path);

/// Runs curve, reference, detection and posterior snapshots for every tau and
/// writes manifest.json into out_dir. A failing tau is recorded in the
/// manifest and does not affect the others.
RunManifest run_pipeline(const RunConfig& config);

/// Windows at which posterior snapshots are taken for one signal:
/// pre-onset, descending flank, interior, ascending flank, post-offset.
std::vector<std::size_t> snapshot_windows(std::size_t onset,
                                          std::size_t trough,
                                          std::size_t offset, std::size_t tau,
                                          std::size_t n_steps);

}  // namespace tbme

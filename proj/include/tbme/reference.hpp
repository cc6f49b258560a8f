#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tbme/matrix.hpp"
#include "tbme/records.hpp"

namespace tbme {

/// Quantile levels stored per reference window, in column order.
enum class QuantileLevel : std::size_t {
  min = 0,
  q010,
  q025,
  q160,
  q500,
  q840,
  q975,
  q990,
  max,
};

inline constexpr std::size_t kQuantileCount = 9;
inline constexpr std::array<double, kQuantileCount> kQuantileProbs = {
    0.0, 0.01, 0.025, 0.16, 0.5, 0.84, 0.975, 0.99, 1.0};
inline constexpr std::array<std::string_view, kQuantileCount> kQuantileLabels =
    {"min", "q010", "q025", "q160", "q500", "q840", "q975", "q990", "max"};

std::string_view quantile_label(QuantileLevel level);
/// Throws ValidationError for unknown labels.
QuantileLevel parse_quantile_level(std::string_view label);

using QuantileRecord = std::array<double, kQuantileCount>;

/// Sampling distribution of log-tBME under the hypothesis that the model
/// generated the data.
struct ReferenceBands {
  std::size_t tau = 0;
  std::vector<std::size_t> window_ends;
  std::vector<QuantileRecord> quantiles;
  std::size_t n_replicates = 0;
  std::uint64_t seed = 0;
  double min_ess_observed = 0.0;
  std::size_t n_mc = 0;
  bool perturbed = false;

  /// In-memory only: ESS per (replicate, window); empty after a file load.
  Matrix replicate_ess;
  /// In-memory only: ensemble member used as synthetic data per replicate.
  std::vector<std::size_t> replicate_members;

  std::size_t n_windows() const noexcept { return window_ends.size(); }
  double at(std::size_t window, QuantileLevel level) const {
    return quantiles[window][static_cast<std::size_t>(level)];
  }
};

struct ReferenceOptions {
  std::size_t n_replicates = 1000;
  std::uint64_t seed = 0;
  /// Add fresh Gaussian noise (per-step sigma) to the picked realization.
  bool perturb = false;
  std::size_t workers = 1;
};

/// Linear interpolation between order statistics of sorted data.
double empirical_quantile(std::span<const double> sorted, double p);

/// Member index used as synthetic data by each replicate: a seeded
/// permutation while replicates remain within N_MC, independent uniform
/// draws after that.
std::vector<std::size_t> replicate_schedule(std::size_t n_mc,
                                            std::size_t n_replicates,
                                            std::uint64_t seed);

ReferenceBands sample_reference(const PredictionEnsemble& ensemble,
                                std::span<const double> sigma, std::size_t tau,
                                const ReferenceOptions& options);

struct ConvergenceReport {
  bool passed = false;
  double floor = 0.0;
  double min_ess_observed = 0.0;
  /// (replicate, window) pairs with ESS below the floor; only available
  /// when the bands still carry their per-replicate ESS.
  std::vector<std::pair<std::size_t, std::size_t>> below_floor;
  std::string diagnostic;
};

ConvergenceReport check_convergence(const ReferenceBands& bands,
                                    double min_ess);

/// Desk-scale default ESS floor: max(10, N_MC / 100).
double default_ess_floor(std::size_t n_mc);

}  // namespace tbme

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tbme/likelihood.hpp"
#include "tbme/records.hpp"

namespace tbme {

/// Weighted marginal summary of one parameter.
struct Marginal {
  std::string name;
  double q025 = 0.0;
  double q500 = 0.0;
  double q975 = 0.0;
  double map_value = 0.0;
  /// True when the weighted sample has zero variance; grid/density are then
  /// empty and the posterior is the point mass at q500.
  bool point_mass = false;
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};

struct PosteriorSnapshot {
  std::size_t window_end = 0;
  std::size_t tau = 0;
  std::vector<double> weights;  // normalized, sums to 1
  double ess = 0.0;
  std::size_t map_index = 0;
  std::vector<Marginal> marginals;
};

/// Normalized weights, ESS and maximum-likelihood member of one window.
PosteriorSnapshot posterior_weights(const LogLikTable& table,
                                    std::size_t window_end, std::size_t tau);

/// posterior_weights plus per-parameter marginals over the prior bounds.
PosteriorSnapshot posterior_snapshot(const LogLikTable& table,
                                     const PredictionEnsemble& ensemble,
                                     std::size_t window_end, std::size_t tau,
                                     std::size_t grid_points = 256);

/// Weighted quantile using mid-point cumulative weights: sorted values are
/// placed at C_k - w_k / 2 and interpolated linearly; q outside the first or
/// last position clamps to the extreme value. Zero-weight samples are ignored.
double weighted_quantile(std::span<const double> values,
                         std::span<const double> weights, double q);

/// Silverman bandwidth 1.06 * sd_w * ESS^(-1/5). Throws NumericalError on
/// zero weighted variance.
double silverman_bandwidth(std::span<const double> values,
                           std::span<const double> weights);

/// Gaussian-kernel density of a weighted sample on `grid`. A non-positive
/// bandwidth selects silverman_bandwidth.
std::vector<double> weighted_kde(std::span<const double> values,
                                 std::span<const double> weights,
                                 std::span<const double> grid,
                                 double bandwidth = 0.0);

}  // namespace tbme

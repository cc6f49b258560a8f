#include "tbme/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "tbme/error.hpp"
#include "tbme/evidence.hpp"

namespace tbme {

PosteriorSnapshot posterior_weights(const LogLikTable& table,
                                    std::size_t window_end, std::size_t tau) {
  const auto ll = window_loglik(table, window_end, tau);
  const double lse = log_sum_exp(ll);

  PosteriorSnapshot snap;
  snap.window_end = window_end;
  snap.tau = tau;
  snap.weights.resize(ll.size());
  for (std::size_t i = 0; i < ll.size(); ++i) {
    snap.weights[i] = std::exp(ll[i] - lse);
    if (ll[i] > ll[snap.map_index]) snap.map_index = i;
  }
  // exp(l - lse) sums to 1 only up to rounding; renormalize exactly once.
  const double total = std::accumulate(snap.weights.begin(), snap.weights.end(), 0.0);
  for (double& w : snap.weights) w /= total;
  snap.ess = window_evidence(ll).ess;
  return snap;
}

PosteriorSnapshot posterior_snapshot(const LogLikTable& table,
                                     const PredictionEnsemble& ensemble,
                                     std::size_t window_end, std::size_t tau,
                                     std::size_t grid_points) {
  if (ensemble.n_mc() != table.n_mc()) {
    throw ValidationError("ensemble and likelihood table sizes differ");
  }
  PosteriorSnapshot snap = posterior_weights(table, window_end, tau);
  if (grid_points < 2) grid_points = 2;
  for (std::size_t p = 0; p < ensemble.n_params(); ++p) {
    std::vector<double> values(ensemble.n_mc());
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = ensemble.parameters(i, p);
    }
    Marginal m;
    m.name = ensemble.parameter_names[p];
    m.q025 = weighted_quantile(values, snap.weights, 0.025);
    m.q500 = weighted_quantile(values, snap.weights, 0.5);
    m.q975 = weighted_quantile(values, snap.weights, 0.975);
    m.map_value = values[snap.map_index];

    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (p < ensemble.parameter_bounds.size()) {
      lo = ensemble.parameter_bounds[p].lower;
      hi = ensemble.parameter_bounds[p].upper;
    }
    try {
      m.bandwidth = silverman_bandwidth(values, snap.weights);
    } catch (const NumericalError&) {
      m.point_mass = true;
    }
    if (!m.point_mass && hi > lo) {
      m.grid.resize(grid_points);
      for (std::size_t g = 0; g < grid_points; ++g) {
        m.grid[g] = lo + (hi - lo) * static_cast<double>(g) /
                             static_cast<double>(grid_points - 1);
      }
      m.density = weighted_kde(values, snap.weights, m.grid, m.bandwidth);
    }
    snap.marginals.push_back(std::move(m));
  }
  return snap;
}

double weighted_quantile(std::span<const double> values,
                         std::span<const double> weights, double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ValidationError("quantile level must lie in [0, 1]");
  }
  if (values.size() != weights.size() || values.empty()) {
    throw ValidationError("values and weights must be non-empty and equal length");
  }
  std::vector<std::size_t> order;
  order.reserve(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ValidationError("non-finite value", i + 1);
    if (weights[i] < 0.0) throw ValidationError("negative weight", i + 1);
    if (weights[i] > 0.0) {
      order.push_back(i);
      total += weights[i];
    }
  }
  if (order.empty()) throw ValidationError("all weights are zero");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  double cumulative = 0.0;
  double prev_pos = 0.0;
  double prev_val = values[order.front()];
  for (std::size_t r = 0; r < order.size(); ++r) {
    const double w = weights[order[r]] / total;
    const double pos = cumulative + 0.5 * w;
    const double val = values[order[r]];
    if (q <= pos) {
      if (r == 0) return val;
      return prev_val + (q - prev_pos) / (pos - prev_pos) * (val - prev_val);
    }
    cumulative += w;
    prev_pos = pos;
    prev_val = val;
  }
  return prev_val;
}

double silverman_bandwidth(std::span<const double> values,
                           std::span<const double> weights) {
  double total = 0.0;
  double mean = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += weights[i];
    mean += weights[i] * values[i];
    sum_sq += weights[i] * weights[i];
  }
  if (!(total > 0.0)) throw ValidationError("weights sum to zero");
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    var += weights[i] * d * d;
  }
  var /= total;
  const double scale = std::max(std::abs(mean), 1.0);
  if (!(var > 1e-28 * scale * scale)) {
    throw NumericalError("zero weighted variance: posterior is a point mass");
  }
  const double ess = total * total / sum_sq;
  return 1.06 * std::sqrt(var) * std::pow(ess, -0.2);
}

std::vector<double> weighted_kde(std::span<const double> values,
                                 std::span<const double> weights,
                                 std::span<const double> grid,
                                 double bandwidth) {
  if (values.size() != weights.size()) {
    throw ValidationError("values and weights differ in length");
  }
  // Also rejects point masses when an explicit bandwidth is supplied.
  const double silverman = silverman_bandwidth(values, weights);
  if (!(bandwidth > 0.0)) bandwidth = silverman;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi) * total);
  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (weights[i] == 0.0) continue;
      const double z = (grid[g] - values[i]) / bandwidth;
      acc += weights[i] * std::exp(-0.5 * z * z);
    }
    density[g] = acc * norm;
  }
  return density;
}

}  // namespace tbme

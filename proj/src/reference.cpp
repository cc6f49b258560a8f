#include "tbme/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "tbme/error.hpp"
#include "tbme/evidence.hpp"
#include "tbme/likelihood.hpp"
#include "tbme/parallel.hpp"
#include "tbme/rng.hpp"

namespace tbme {


std::string_view quantile_label(QuantileLevel level) {
  return kQuantileLabels[static_cast<std::size_t>(level)];
}

QuantileLevel parse_quantile_level(std::string_view label) {
  for (std::size_t k = 0; k < kQuantileCount; ++k) {
    if (kQuantileLabels[k] == label) return static_cast<QuantileLevel>(k);
  }
  throw ValidationError("unknown quantile label '" + std::string(label) +
                        "' (expected one of min,q010,q025,q160,q500,q840,"
                        "q975,q990,max)");
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<std::size_t> replicate_schedule(std::size_t n_mc,
                                            std::size_t n_replicates,
                                            std::uint64_t seed) {
  std::vector<std::size_t> perm(n_mc);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = substream(seed, std::numeric_limits<std::uint64_t>::max() - 1);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::size_t> members(n_replicates);
  for (std::size_t r = 0; r < n_replicates; ++r) {
    if (r < n_mc) {
      members[r] = perm[r];
    } else {
      auto draw = substream(seed, r);
      std::uniform_int_distribution<std::size_t> pick(0, n_mc - 1);
      members[r] = pick(draw);
    }
  }
  return members;
}

ReferenceBands sample_reference(const PredictionEnsemble& ensemble,
                                std::span<const double> sigma, std::size_t tau,
                                const ReferenceOptions& options) {
  const std::size_t n_mc = ensemble.n_mc();
  const std::size_t n_o = ensemble.n_steps();
  const std::size_t n_rep = options.n_replicates;
  if (n_rep < 2) throw ValidationError("n_replicates must be >= 2");
  if (n_mc < 3) throw ValidationError("reference needs N_MC >= 3");
  if (sigma.size() != n_o) {
    throw ValidationError("sigma length differs from prediction steps");
  }
  const std::size_t n_w = window_count(n_o, tau);
  if (n_w == 0) {
    throw ValidationError("tau=" + std::to_string(tau) + " outside 1.." +
                          std::to_string(n_o));
  }

  ReferenceBands bands;
  bands.tau = tau;
  bands.n_replicates = n_rep;
  bands.seed = options.seed;
  bands.n_mc = n_mc;
  bands.perturbed = options.perturb;
  bands.window_ends.resize(n_w);
  for (std::size_t k = 0; k < n_w; ++k) bands.window_ends[k] = tau + k;
  bands.replicate_members = replicate_schedule(n_mc, n_rep, options.seed);
  bands.replicate_ess = Matrix(n_rep, n_w);

  // N_w x n_rep so each window's sample is contiguous for sorting.
  Matrix samples(n_w, n_rep);
  parallel_for(n_rep, options.workers, [&](std::size_t r) {
    const std::size_t member = bands.replicate_members[r];
    std::vector<double> data(ensemble.predictions.row(member).begin(),
                             ensemble.predictions.row(member).end());
    if (options.perturb) {
      auto rng = substream(options.seed ^ 0x5eedULL, r);
      std::normal_distribution<double> noise(0.0, 1.0);
      for (std::size_t t = 0; t < n_o; ++t) data[t] += sigma[t] * noise(rng);
    }
    const LogLikTable table = gauss_log_terms(ensemble.predictions, data, sigma);
    std::vector<double> ll(n_mc);
    for (std::size_t k = 0; k < n_w; ++k) {
      window_loglik_into(table, tau + k, tau, ll);
      const WindowEvidence ev = window_evidence(ll, member);
      samples(k, r) = ev.log_mean;
      bands.replicate_ess(r, k) = ev.ess;
    }
  });

  bands.quantiles.resize(n_w);
  for (std::size_t k = 0; k < n_w; ++k) {
    auto column = samples.row(k);
    std::sort(column.begin(), column.end());
    for (std::size_t q = 0; q < kQuantileCount; ++q) {
      bands.quantiles[k][q] = empirical_quantile(column, kQuantileProbs[q]);
    }
  }
  const auto ess = bands.replicate_ess.data();
  bands.min_ess_observed = *std::min_element(ess.begin(), ess.end());
  return bands;
}

double default_ess_floor(std::size_t n_mc) {
  return std::max(10.0, static_cast<double>(n_mc) / 100.0);
}

ConvergenceReport check_convergence(const ReferenceBands& bands,
                                    double min_ess) {
  ConvergenceReport report;
  report.floor = min_ess;
  report.min_ess_observed = bands.min_ess_observed;
  const Matrix& ess = bands.replicate_ess;
  for (std::size_t r = 0; r < ess.rows(); ++r) {
    for (std::size_t k = 0; k < ess.cols(); ++k) {
      if (ess(r, k) < min_ess) report.below_floor.emplace_back(r, k);
    }
  }
  report.passed = bands.min_ess_observed >= min_ess;
  if (bands.n_mc > 0 && min_ess > static_cast<double>(bands.n_mc - 1)) {
    report.passed = false;
    report.diagnostic = "ESS floor " + std::to_string(min_ess) +
                        " exceeds the leave-one-out ensemble size " +
                        std::to_string(bands.n_mc - 1) +
                        "; the floor cannot be met";
  } else if (!report.passed) {
    report.diagnostic = "minimum ESS " +
                        std::to_string(bands.min_ess_observed) +
                        " below floor " + std::to_string(min_ess) + " in " +
                        std::to_string(report.below_floor.size()) +
                        " replicate-windows";
  }
  return report;
}

}  // namespace tbme

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tbme/likelihood.hpp"

namespace tbme {

/// Log-evidence over a sliding window of fixed size, one entry per window
/// end tau, tau+1, ..., N_o.
struct TbmeCurve {
  std::size_t tau = 0;
  std::vector<std::size_t> window_ends;
  std::vector<double> log_tbme;
  std::vector<double> ess;
  std::size_t n_mc_used = 0;

  std::size_t n_windows() const noexcept { return window_ends.size(); }
};

inline constexpr std::size_t no_exclusion =
    std::numeric_limits<std::size_t>::max();

/// log(sum(exp(v))) with a max shift, summed in ascending index order.
/// Throws NumericalError if v is empty or every entry is -inf.
double log_sum_exp(std::span<const double> v);

/// Importance-sampling effective sample size 1 / sum(w_hat^2) of the
/// normalized likelihood weights.
double ess_of(std::span<const double> loglik);

/// Log of the Monte Carlo mean likelihood and the ESS of one window.
struct WindowEvidence {
  double log_mean = 0.0;
  double ess = 0.0;
};

/// Evaluates one window, optionally leaving out member `skip`; the mean is
/// then taken over the remaining N - 1 members.
WindowEvidence window_evidence(std::span<const double> loglik,
                               std::size_t skip = no_exclusion);

TbmeCurve tbme_curve(const LogLikTable& table, std::size_t tau,
                     std::size_t workers = 1);

/// Number of windows of size tau in a series of n_steps.
constexpr std::size_t window_count(std::size_t n_steps, std::size_t tau) {
  return tau == 0 || tau > n_steps ? 0 : n_steps - tau + 1;
}

}  // namespace tbme

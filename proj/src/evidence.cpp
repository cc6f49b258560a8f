#include "tbme/evidence.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tbme/error.hpp"
#include "tbme/parallel.hpp"

namespace tbme {

namespace {

double max_finite(std::span<const double> v, std::size_t skip) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == skip) continue;
    if (std::isnan(v[i])) throw NumericalError("NaN log-likelihood");
    if (v[i] > hi) hi = v[i];
  }
  if (hi == -std::numeric_limits<double>::infinity()) {
    throw NumericalError("all log-likelihoods are -inf (check sigma)");
  }
  if (hi == std::numeric_limits<double>::infinity()) {
    throw NumericalError("+inf log-likelihood");
  }
  return hi;
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw NumericalError("log_sum_exp of an empty vector");
  const double hi = max_finite(v, no_exclusion);
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

WindowEvidence window_evidence(std::span<const double> loglik,
                               std::size_t skip) {
  const std::size_t used = loglik.size() - (skip < loglik.size() ? 1 : 0);
  if (used == 0) throw NumericalError("window evidence over no members");
  const double hi = max_finite(loglik, skip);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < loglik.size(); ++i) {
    if (i == skip) continue;
    const double w = std::exp(loglik[i] - hi);
    sum += w;
    sum_sq += w * w;
  }
  return {hi + std::log(sum) - std::log(static_cast<double>(used)),
          sum * sum / sum_sq};
}

double ess_of(std::span<const double> loglik) {
  if (loglik.empty()) throw NumericalError("ESS of an empty vector");
  return window_evidence(loglik).ess;
}

TbmeCurve tbme_curve(const LogLikTable& table, std::size_t tau,
                     std::size_t workers) {
  const std::size_t n_w = window_count(table.n_steps(), tau);
  if (n_w == 0) {
    throw ValidationError("tau=" + std::to_string(tau) + " outside 1.." +
                          std::to_string(table.n_steps()));
  }
  TbmeCurve curve;
  curve.tau = tau;
  curve.n_mc_used = table.n_mc();
  curve.window_ends.resize(n_w);
  curve.log_tbme.resize(n_w);
  curve.ess.resize(n_w);
  parallel_for(n_w, workers, [&](std::size_t k) {
    const std::size_t end = tau + k;
    const auto ll = window_loglik(table, end, tau);
    const auto ev = window_evidence(ll);
    curve.window_ends[k] = end;
    curve.log_tbme[k] = ev.log_mean;
    curve.ess[k] = ev.ess;
  });
  return curve;
}

}  // namespace tbme

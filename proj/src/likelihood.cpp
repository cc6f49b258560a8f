#include "tbme/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tbme/error.hpp"
#include "tbme/parallel.hpp"

namespace tbme {

double gauss_log_term(double observed, double predicted, double sigma) {
  const double r = (observed - predicted) / sigma;
  return -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) - 0.5 * r * r;
}

LogLikTable gauss_log_terms(const Matrix& predictions,
                            std::span<const double> data,
                            std::span<const double> sigma,
                            std::size_t workers) {
  const std::size_t n_mc = predictions.rows();
  const std::size_t n_o = predictions.cols();
  if (data.size() != n_o || sigma.size() != n_o) {
    throw ValidationError("data/sigma length (" + std::to_string(data.size()) +
                          "/" + std::to_string(sigma.size()) +
                          ") differs from prediction steps (" +
                          std::to_string(n_o) + ")");
  }
  std::vector<double> norm(n_o);
  std::vector<double> inv_var(n_o);
  for (std::size_t t = 0; t < n_o; ++t) {
    if (!(sigma[t] > 0.0) || !std::isfinite(sigma[t])) {
      throw ValidationError("sigma must be finite and > 0", t + 1);
    }
    norm[t] = -0.5 * std::log(2.0 * std::numbers::pi * sigma[t] * sigma[t]);
    inv_var[t] = 1.0 / (sigma[t] * sigma[t]);
  }

  LogLikTable table{Matrix(n_mc, n_o), Matrix(n_mc, n_o + 1),
                    std::vector<double>(sigma.begin(), sigma.end())};
  parallel_for(n_mc, workers, [&](std::size_t i) {
    auto y = predictions.row(i);
    auto g = table.terms.row(i);
    auto G = table.prefix.row(i);
    double acc = 0.0;
    G[0] = 0.0;
    for (std::size_t t = 0; t < n_o; ++t) {
      const double r = data[t] - y[t];
      const double term = norm[t] - 0.5 * r * r * inv_var[t];
      if (!std::isfinite(term)) {
        throw NumericalError("non-finite log-likelihood term at realization " +
                             std::to_string(i + 1) + ", step " +
                             std::to_string(t + 1));
      }
      g[t] = term;
      acc += term;
      G[t + 1] = acc;
    }
  });
  return table;
}

LogLikTable gauss_log_terms(const PredictionEnsemble& ensemble,
                            const ObservationSeries& obs,
                            std::size_t workers) {
  if (obs.size() != ensemble.n_steps()) {
    throw ValidationError("observations have " + std::to_string(obs.size()) +
                          " steps, predictions have " +
                          std::to_string(ensemble.n_steps()));
  }
  return gauss_log_terms(ensemble.predictions, obs.values, obs.sigma, workers);
}

void window_loglik_into(const LogLikTable& table, std::size_t window_end,
                        std::size_t tau, std::span<double> out) {
  if (tau < 1 || window_end < tau || window_end > table.n_steps()) {
    throw ValidationError("window (end=" + std::to_string(window_end) +
                          ", tau=" + std::to_string(tau) +
                          ") outside 1.." + std::to_string(table.n_steps()));
  }
  const std::size_t begin = window_end - tau;
  for (std::size_t i = 0; i < table.n_mc(); ++i) {
    out[i] = table.prefix(i, window_end) - table.prefix(i, begin);
  }
}

std::vector<double> window_loglik(const LogLikTable& table,
                                  std::size_t window_end, std::size_t tau) {
  std::vector<double> out(table.n_mc());
  window_loglik_into(table, window_end, tau, out);
  return out;
}

}  // namespace tbme

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tbme/matrix.hpp"
#include "tbme/records.hpp"

namespace tbme {

/// Per-realization, per-step Gaussian log-likelihood contributions and their
/// running sums. prefix(i, t) holds the sum of terms(i, 0..t-1), so the
/// log-likelihood of any contiguous window is one subtraction.
struct LogLikTable {
  Matrix terms;   // N_MC x N_o
  Matrix prefix;  // N_MC x (N_o + 1), prefix(i, 0) == 0
  std::vector<double> sigma_used;

  std::size_t n_mc() const noexcept { return terms.rows(); }
  std::size_t n_steps() const noexcept { return terms.cols(); }
};

/// Log density of a single Gaussian observation.
double gauss_log_term(double observed, double predicted, double sigma);

/// Builds the table for `data` (length N_o) against every row of
/// `predictions`, with per-step standard deviations `sigma`.
LogLikTable gauss_log_terms(const Matrix& predictions,
                            std::span<const double> data,
                            std::span<const double> sigma,
                            std::size_t workers = 1);

LogLikTable gauss_log_terms(const PredictionEnsemble& ensemble,
                            const ObservationSeries& obs,
                            std::size_t workers = 1);

/// Log-likelihood of every realization for the window of `tau` steps ending
/// at 1-based step `window_end`.
std::vector<double> window_loglik(const LogLikTable& table,
                                  std::size_t window_end, std::size_t tau);

/// Same as window_loglik, writing into `out` (size N_MC).
void window_loglik_into(const LogLikTable& table, std::size_t window_end,
                        std::size_t tau, std::span<double> out);

}  // namespace tbme

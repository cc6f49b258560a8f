#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tbme/matrix.hpp"

namespace tbme {

/// Observed series on a daily grid. `sigma` always holds one entry per step;
/// a scalar sigma is broadcast on construction.
struct ObservationSeries {
  std::vector<int> times;
  std::vector<double> values;
  std::vector<double> sigma;

  std::size_t size() const noexcept { return values.size(); }

  /// Throws ValidationError (1-based row = step) on the first violation.
  void validate() const;
};

struct ParameterBound {
  double lower = 0.0;
  double upper = 0.0;
};

/// Monte Carlo prediction ensemble: one row per realization.
struct PredictionEnsemble {
  Matrix predictions;  // N_MC x N_o
  Matrix parameters;   // N_MC x P (P may be 0)
  std::vector<std::string> parameter_names;
  std::vector<ParameterBound> parameter_bounds;

  std::size_t n_mc() const noexcept { return predictions.rows(); }
  std::size_t n_steps() const noexcept { return predictions.cols(); }
  std::size_t n_params() const noexcept { return parameter_names.size(); }

  /// Column index of a named parameter, if present.
  std::optional<std::size_t> parameter_index(const std::string& name) const;

  void validate() const;
};

struct ForcingSeries {
  std::vector<int> times;
  std::vector<double> precipitation;          // cm/day
  std::vector<double> potential_evaporation;  // cm/day

  std::size_t size() const noexcept { return precipitation.size(); }

  void validate() const;
};

/// Builds an observation series on days 1..N with scalar sigma.
ObservationSeries make_observations(std::vector<double> values, double sigma);

}  // namespace tbme

#include "tbme/records.hpp"

#include <cmath>

#include "tbme/error.hpp"

namespace tbme {

void ObservationSeries::validate() const {
  const std::size_t n = values.size();
  if (times.size() != n || sigma.size() != n) {
    throw ValidationError("observation columns have unequal lengths (t=" +
                          std::to_string(times.size()) + ", value=" +
                          std::to_string(n) + ", sigma=" +
                          std::to_string(sigma.size()) + ")");
  }
  if (n < 2) throw ValidationError("need at least 2 observations");
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0 && times[t] != times[t - 1] + 1) {
      throw ValidationError("times must increase with unit spacing", t + 1, 1);
    }
    if (!std::isfinite(values[t])) {
      throw ValidationError("non-finite observation", t + 1, 2);
    }
    if (!std::isfinite(sigma[t]) || sigma[t] <= 0.0) {
      throw ValidationError("sigma must be finite and > 0", t + 1, 3);
    }
  }
}

std::optional<std::size_t> PredictionEnsemble::parameter_index(
    const std::string& name) const {
  for (std::size_t k = 0; k < parameter_names.size(); ++k) {
    if (parameter_names[k] == name) return k;
  }
  return std::nullopt;
}

void PredictionEnsemble::validate() const {
  if (n_mc() < 2) throw ValidationError("ensemble needs at least 2 members");
  if (n_steps() < 1) throw ValidationError("ensemble has no time steps");
  for (std::size_t i = 0; i < n_mc(); ++i) {
    for (std::size_t t = 0; t < n_steps(); ++t) {
      if (!std::isfinite(predictions(i, t))) {
        throw ValidationError("non-finite prediction", i + 1, t + 1);
      }
    }
  }
  if (parameters.empty() && parameter_names.empty()) return;
  if (parameters.rows() != n_mc()) {
    throw ValidationError("parameter rows (" +
                          std::to_string(parameters.rows()) +
                          ") differ from prediction rows (" +
                          std::to_string(n_mc()) + ")");
  }
  if (parameters.cols() != parameter_names.size()) {
    throw ValidationError("parameter columns do not match parameter names");
  }
  if (!parameter_bounds.empty() &&
      parameter_bounds.size() != parameter_names.size()) {
    throw ValidationError("bounds do not cover every parameter");
  }
  for (std::size_t i = 0; i < parameters.rows(); ++i) {
    for (std::size_t k = 0; k < parameters.cols(); ++k) {
      const double v = parameters(i, k);
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite parameter", i + 1, k + 1);
      }
      if (!parameter_bounds.empty() &&
          (v < parameter_bounds[k].lower || v > parameter_bounds[k].upper)) {
        throw ValidationError("parameter '" + parameter_names[k] +
                                  "' outside its bounds",
                              i + 1, k + 1);
      }
    }
  }
}

void ForcingSeries::validate() const {
  const std::size_t n = precipitation.size();
  if (times.size() != n || potential_evaporation.size() != n) {
    throw ValidationError("forcing columns have unequal lengths");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0 && times[t] != times[t - 1] + 1) {
      throw ValidationError("times must increase with unit spacing", t + 1, 1);
    }
    if (!std::isfinite(precipitation[t]) || precipitation[t] < 0.0) {
      throw ValidationError("precipitation must be finite and >= 0", t + 1, 2);
    }
    if (!std::isfinite(potential_evaporation[t]) ||
        potential_evaporation[t] < 0.0) {
      throw ValidationError("pet must be finite and >= 0", t + 1, 3);
    }
  }
}

ObservationSeries make_observations(std::vector<double> values, double sigma) {
  ObservationSeries obs;
  obs.times.resize(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    obs.times[t] = static_cast<int>(t + 1);
  }
  obs.sigma.assign(values.size(), sigma);
  obs.values = std::move(values);
  return obs;
}

}  // namespace tbme

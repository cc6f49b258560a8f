#include "tbme/soilfuncs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tbme/error.hpp"

namespace tbme {

void MvgParams::validate() const {
  if (!(theta_r >= 0.0 && theta_r < theta_s && theta_s <= 1.0)) {
    throw ValidationError("MVG requires 0 <= theta_r < theta_s <= 1");
  }
  if (!(n > 1.0)) throw ValidationError("MVG requires n > 1");
  if (!(alpha > 0.0)) throw ValidationError("MVG requires alpha > 0");
  if (!(K_sat > 0.0)) throw ValidationError("MVG requires K_sat > 0");
  if (!(h_s <= 0.0)) throw ValidationError("MVG requires h_s <= 0");
}

void DurnerParams::validate() const {
  if (subsystems.empty()) throw ValidationError("Durner model needs subsystems");
  if (!(theta_r >= 0.0 && theta_r < theta_s && theta_s <= 1.0)) {
    throw ValidationError("Durner requires 0 <= theta_r < theta_s <= 1");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < subsystems.size(); ++k) {
    const auto& s = subsystems[k];
    if (!(s.w > 0.0 && s.w <= 1.0)) {
      throw ValidationError("Durner weight w_" + std::to_string(k + 1) +
                            " must lie in (0, 1]");
    }
    if (!(s.alpha > 0.0) || !(s.n > 1.0)) {
      throw ValidationError("Durner subsystem " + std::to_string(k + 1) +
                            " needs alpha > 0 and n > 1");
    }
    sum += s.w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("Durner weights sum to " + std::to_string(sum) +
                          ", expected 1");
  }
}

namespace {

// Shared by the MVG and Durner paths so a single Durner subsystem reproduces
// MVG bit for bit.
double vg_term(double h, double alpha, double n) {
  const double m = 1.0 - 1.0 / n;
  return 1.0 / std::pow(1.0 + std::pow(alpha * std::abs(h), n), m);
}

}  // namespace

double mvg_saturation(double h, const MvgParams& p) {
  if (h >= p.h_s) return 1.0;
  return vg_term(h, p.alpha, p.n);
}

double mvg_theta(double h, const MvgParams& p) {
  if (h >= p.h_s) return p.theta_s;
  // Clamp: theta_r + (theta_s - theta_r) * S can round one ulp past theta_s.
  return std::min(p.theta_r + (p.theta_s - p.theta_r) * mvg_saturation(h, p), p.theta_s);
}

double mualem_conductivity(double saturation, const MvgParams& p) {
  if (saturation >= 1.0) return p.K_sat;
  if (saturation <= 0.0) return 0.0;
  const double m = p.m();
  const double inner = 1.0 - std::pow(1.0 - std::pow(saturation, 1.0 / m), m);
  return p.K_sat * std::pow(saturation, p.l) * inner * inner;
}

double mvg_conductivity(double h, const MvgParams& p) {
  return mualem_conductivity(mvg_saturation(h, p), p);
}

double mvg_head(double saturation, const MvgParams& p) {
  if (saturation >= 1.0) return p.h_s;
  const double s = std::max(saturation, 1e-300);
  const double h =
      -std::pow(std::pow(s, -1.0 / p.m()) - 1.0, 1.0 / p.n) / p.alpha;
  return std::min(h, p.h_s);
}

double durner_saturation(double h, const DurnerParams& p) {
  p.validate();
  if (h >= p.h_s) return 1.0;
  double sat = 0.0;
  for (const auto& s : p.subsystems) sat += s.w * vg_term(h, s.alpha, s.n);
  return sat;
}

double durner_theta(double h, const DurnerParams& p) {
  const double sat = durner_saturation(h, p);
  if (h >= p.h_s) return p.theta_s;
  return std::min(p.theta_r + (p.theta_s - p.theta_r) * sat, p.theta_s);
}

MvgParams mvg_from_ensemble(const PredictionEnsemble& ensemble, std::size_t i) {
  auto column = [&](const char* name) {
    const auto k = ensemble.parameter_index(name);
    if (!k) {
      throw ValidationError(std::string("ensemble lacks MVG parameter column '") +
                            name + "'");
    }
    return ensemble.parameters(i, *k);
  };
  MvgParams p;
  p.theta_s = column("theta_s");
  p.alpha = column("alpha");
  p.n = column("n");
  p.K_sat = column("K_sat");
  p.l = column("l");
  if (const auto k = ensemble.parameter_index("theta_r")) {
    p.theta_r = ensemble.parameters(i, *k);
  }
  return p;
}

CurveBands curve_bands(const PosteriorSnapshot& snapshot,
                       const PredictionEnsemble& ensemble,
                       std::span<const double> h_grid) {
  const std::size_t n_mc = ensemble.n_mc();
  if (snapshot.weights.size() != n_mc) {
    throw ValidationError("snapshot weights do not match the ensemble size");
  }
  std::vector<MvgParams> params(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) params[i] = mvg_from_ensemble(ensemble, i);

  CurveBands bands;
  bands.h.assign(h_grid.begin(), h_grid.end());
  std::vector<double> theta(n_mc);
  std::vector<double> cond(n_mc);
  for (double h : h_grid) {
    for (std::size_t i = 0; i < n_mc; ++i) {
      theta[i] = mvg_theta(h, params[i]);
      cond[i] = mvg_conductivity(h, params[i]);
    }
    std::array<double, 5> tq{};
    std::array<double, 5> kq{};
    for (std::size_t q = 0; q < kCurveBandProbs.size(); ++q) {
      tq[q] = weighted_quantile(theta, snapshot.weights, kCurveBandProbs[q]);
      kq[q] = weighted_quantile(cond, snapshot.weights, kCurveBandProbs[q]);
    }
    bands.theta.push_back(tq);
    bands.conductivity.push_back(kq);
    bands.theta_map.push_back(theta[snapshot.map_index]);
    bands.conductivity_map.push_back(cond[snapshot.map_index]);
  }
  return bands;
}

std::vector<double> default_head_grid(std::size_t points, double h_min,
                                      double h_max) {
  std::vector<double> grid(points);
  const double a = std::log10(h_max);
  const double b = std::log10(h_min);
  for (std::size_t k = 0; k < points; ++k) {
    const double f = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    grid[k] = -std::pow(10.0, a + (b - a) * f);
  }
  return grid;
}

}  // namespace tbme

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tbme/posterior.hpp"
#include "tbme/records.hpp"

namespace tbme {

/// Mualem-van Genuchten parameters, SI-style units: heads in m, alpha in 1/m.
struct MvgParams {
  double theta_r = 0.0;
  double theta_s = 0.5;
  double alpha = 1.0;
  double n = 2.0;
  double K_sat = 1.0;
  double l = 0.5;
  double h_s = -0.02;  // air-entry head

  double m() const noexcept { return 1.0 - 1.0 / n; }
  void validate() const;
};

struct PoreSubsystem {
  double w = 1.0;
  double alpha = 1.0;
  double n = 2.0;
};

/// Multi-modal retention: weighted sum of van Genuchten subsystems.
struct DurnerParams {
  std::vector<PoreSubsystem> subsystems;
  double theta_r = 0.0;
  double theta_s = 0.5;
  double K_sat = 1.0;
  double l = 0.5;
  double h_s = -0.02;

  void validate() const;
};

/// Effective saturation of the MVG retention curve (1 at or above h_s).
double mvg_saturation(double h, const MvgParams& p);
double mvg_theta(double h, const MvgParams& p);
/// Mualem conductivity for a given effective saturation in [0, 1].
double mualem_conductivity(double saturation, const MvgParams& p);
double mvg_conductivity(double h, const MvgParams& p);
/// Inverse retention: head at effective saturation, clamped at h_s.
double mvg_head(double saturation, const MvgParams& p);

double durner_saturation(double h, const DurnerParams& p);
double durner_theta(double h, const DurnerParams& p);

/// Weighted bands of theta(h) and K(h) across the ensemble.
struct CurveBands {
  std::vector<double> h;
  // columns: q005, q025, q500, q975, q995
  std::vector<std::array<double, 5>> theta;
  std::vector<std::array<double, 5>> conductivity;
  std::vector<double> theta_map;
  std::vector<double> conductivity_map;
};

inline constexpr std::array<double, 5> kCurveBandProbs = {0.005, 0.025, 0.5,
                                                          0.975, 0.995};

/// Reads MVG parameters of ensemble member i. Requires columns theta_s,
/// alpha, n, K_sat, l; theta_r defaults to 0 when absent.
MvgParams mvg_from_ensemble(const PredictionEnsemble& ensemble, std::size_t i);

CurveBands curve_bands(const PosteriorSnapshot& snapshot,
                       const PredictionEnsemble& ensemble,
                       std::span<const double> h_grid);

/// Log-spaced grid of negative heads from -h_max to -h_min (m).
std::vector<double> default_head_grid(std::size_t points = 100,
                                      double h_min = 0.01, double h_max = 100.0);

}  // namespace tbme

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tbme/records.hpp"
#include "tbme/soilfuncs.hpp"

namespace tbme {

/// Lumped two-store soil model. The matrix store S drains nonlinearly and
/// evaporates; during structural-error periods a fraction w2 of the rain
/// bypasses into a fast macropore store F that releases into S at rate
/// k_fast. The observed head is the MVG inverse of (S + F) / S_max.
struct ToyModelParams {
  double S_max = 10.0;   // cm
  double c_rec = 3.0;    // recession exponent
  double K_out = 1.0;    // cm/day
  double e_frac = 0.7;   // evaporation efficiency
  MvgParams mvg;
  double w2 = 0.0;       // fast-bypass fraction, 0 = single porosity
  double k_fast = 0.2;   // 1/day
  double initial_fraction = 0.5;  // S(0) / S_max

  void validate() const;
};

struct DayInterval {
  int first = 0;
  int last = 0;  // inclusive
  int length() const noexcept { return last - first + 1; }
  bool contains(int day) const noexcept { return day >= first && day <= last; }
  friend bool operator==(const DayInterval&, const DayInterval&) = default;
};

struct ErrorInjection {
  std::vector<DayInterval> structural_periods;
  std::vector<int> forcing_removal_days;

  bool structural_on(int day) const;
  bool rain_removed(int day) const;
  /// First day touched by any injection, or nullopt if empty.
  std::optional<int> first_day() const;
  void validate(int horizon) const;
};

inline constexpr int kSubstepsPerDay = 24;
inline constexpr double kSaturationFloor = 1e-6;

/// Daily end-of-day state of a toy run.
struct ToyTrace {
  std::vector<double> head;     // m
  std::vector<double> matrix;   // S, cm
  std::vector<double> fast;     // F, cm
  double total_inflow = 0.0;    // cm
  double total_outflow = 0.0;   // cm (evaporation + drainage)
  double initial_storage = 0.0;
  bool clamped = false;         // a store hit 0 or S_max
};

/// Without an injection, w2 acts every day; with one, only inside its
/// structural periods.
ToyTrace simulate_toy_trace(const ToyModelParams& params,
                            const ForcingSeries& forcing,
                            const ErrorInjection* injection = nullptr);

std::vector<double> simulate_toy(const ToyModelParams& params,
                                 const ForcingSeries& forcing,
                                 const ErrorInjection* injection = nullptr);

/// Named uniform prior box. Collapsed bounds (lower == upper) fix a value.
struct ParameterSpace {
  std::vector<std::string> names;
  std::vector<ParameterBound> bounds;
};

/// Desk-scale prior. Only e_frac, alpha and n vary: with 2,000 members a
/// wider space leaves the ensemble edges so sparse that the reference
/// minimum becomes unreachable. theta_s, K_sat and l do not influence the
/// head output; the store constants are pinned at mid-range values.
ParameterSpace default_parameter_space();

/// Maps a parameter row onto toy parameters; unknown names are ignored,
/// missing ones keep their defaults.
ToyModelParams toy_from_row(const std::vector<std::string>& names,
                            std::span<const double> row);

struct PriorSample {
  PredictionEnsemble ensemble;
  std::size_t resampled = 0;  // draws rejected for non-finite output
};

PriorSample sample_prior_ensemble(const ParameterSpace& space, std::size_t n,
                                  const ForcingSeries& forcing,
                                  std::uint64_t seed, std::size_t workers = 1);

/// Seeded synthetic daily forcing: dry spells and rain pulses, with rain
/// guaranteed on the days the standard error cases act upon.
ForcingSeries default_forcing(int horizon = 200, std::uint64_t seed = 20);

enum class CaseId { base, structural, forcing, superimposed };
std::string_view case_name(CaseId id);
CaseId parse_case(std::string_view name);

struct CaseConfig {
  int horizon = 200;
  std::size_t n_mc = 2000;
  std::uint64_t seed = 7;
  double sigma = 0.01;  // m
  ParameterSpace space = default_parameter_space();
  std::optional<ForcingSeries> forcing;
  double w2_structural = 0.85;
  double w2_superimposed = 0.4;
  double k_fast = 0.08;
  std::size_t workers = 1;
};

/// Standard injection layout of each case on a 200-day horizon.
ErrorInjection case_injection(CaseId id, int horizon = 200);

struct CaseBundle {
  CaseId id = CaseId::base;
  PredictionEnsemble ensemble;
  ObservationSeries observations;
  ForcingSeries forcing;
  ToyModelParams truth;
  std::vector<double> truth_row;
  ErrorInjection injection;
  std::vector<double> clean;  // truth output without injection
  std::vector<DayInterval> residual_periods;
  double selection_statistic = 0.0;
  std::size_t resampled = 0;
};

/// Minus the mean squared robust z-score (median / IQR per step) of each
/// member. Larger means closer to the bulk of the ensemble.
std::vector<double> typicality(const PredictionEnsemble& ensemble);

CaseBundle build_case(CaseId id, const CaseConfig& config);

/// Maximal runs of days where |observed - clean| exceeds threshold.
std::vector<DayInterval> residual_periods(std::span<const double> observed,
                                          std::span<const double> clean,
                                          double threshold);

/// Adds `magnitude` to values on days first..first+length-1 (1-based).
ObservationSeries add_step_residual(ObservationSeries obs, int first,
                                    int length, double magnitude);

}  // namespace tbme

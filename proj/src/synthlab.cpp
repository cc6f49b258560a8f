#include "tbme/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "tbme/error.hpp"
#include "tbme/evidence.hpp"
#include "tbme/parallel.hpp"
#include "tbme/reference.hpp"
#include "tbme/rng.hpp"

namespace tbme {

namespace {

constexpr std::size_t kMaxRedraws = 100;

// Days, on the 200-day layout, that carry rain in the default forcing so
// every standard injection has something to act on.
constexpr int kPlantedRainDays[] = {31, 33, 36, 37, 38, 39, 40, 44, 45,
                                    81, 82, 84, 86, 89, 90, 161, 163, 164,
                                    165, 166, 167, 168, 169, 170};

int scale_day(int day, int horizon) {
  if (horizon == 200) return day;
  const int scaled = static_cast<int>(std::lround(day * horizon / 200.0));
  return std::clamp(scaled, 1, horizon);
}

}  // namespace

void ToyModelParams::validate() const {
  if (!(S_max > 0.0)) throw ValidationError("toy model needs S_max > 0");
  if (!(K_out >= 0.0)) throw ValidationError("toy model needs K_out >= 0");
  if (!(c_rec > 0.0)) throw ValidationError("toy model needs c_rec > 0");
  if (!(e_frac >= 0.0 && e_frac <= 1.0)) {
    throw ValidationError("toy model needs e_frac in [0, 1]");
  }
  if (!(w2 >= 0.0 && w2 < 1.0)) throw ValidationError("toy model needs w2 in [0, 1)");
  if (!(k_fast >= 0.0 && k_fast < kSubstepsPerDay)) {
    throw ValidationError("toy model needs 0 <= k_fast < substeps per day");
  }
  if (!(initial_fraction >= 0.0 && initial_fraction <= 1.0)) {
    throw ValidationError("toy model needs initial_fraction in [0, 1]");
  }
  if (!(mvg.alpha > 0.0) || !(mvg.n > 1.0)) {
    throw ValidationError("toy model head mapping needs alpha > 0 and n > 1");
  }
}

bool ErrorInjection::structural_on(int day) const {
  return std::any_of(structural_periods.begin(), structural_periods.end(),
                     [day](const DayInterval& p) { return p.contains(day); });
}

bool ErrorInjection::rain_removed(int day) const {
  return std::find(forcing_removal_days.begin(), forcing_removal_days.end(),
                   day) != forcing_removal_days.end();
}

std::optional<int> ErrorInjection::first_day() const {
  std::optional<int> first;
  for (const auto& p : structural_periods) {
    if (!first || p.first < *first) first = p.first;
  }
  for (int d : forcing_removal_days) {
    if (!first || d < *first) first = d;
  }
  return first;
}

void ErrorInjection::validate(int horizon) const {
  auto periods = structural_periods;
  std::sort(periods.begin(), periods.end(),
            [](const DayInterval& a, const DayInterval& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < periods.size(); ++k) {
    if (periods[k].first < 1 || periods[k].last > horizon ||
        periods[k].last < periods[k].first) {
      throw ValidationError("structural period outside the horizon");
    }
    if (k > 0 && periods[k].first <= periods[k - 1].last) {
      throw ValidationError("structural periods overlap");
    }
  }
  auto days = forcing_removal_days;
  std::sort(days.begin(), days.end());
  for (std::size_t k = 0; k < days.size(); ++k) {
    if (days[k] < 1 || days[k] > horizon) {
      throw ValidationError("forcing removal day outside the horizon");
    }
    if (k > 0 && days[k] == days[k - 1]) {
      throw ValidationError("duplicate forcing removal day");
    }
  }
}

ToyTrace simulate_toy_trace(const ToyModelParams& params,
                            const ForcingSeries& forcing,
                            const ErrorInjection* injection) {
  params.validate();
  const std::size_t n = forcing.size();
  const double dt = 1.0 / kSubstepsPerDay;

  ToyTrace trace;
  trace.head.resize(n);
  trace.matrix.resize(n);
  trace.fast.resize(n);
  double S = params.initial_fraction * params.S_max;
  double F = 0.0;
  trace.initial_storage = S;

  for (std::size_t t = 0; t < n; ++t) {
    const int day = forcing.times[t];
    const bool removed = injection != nullptr && injection->rain_removed(day);
    const double P = removed ? 0.0 : forcing.precipitation[t];
    const double pet = forcing.potential_evaporation[t];
    const double w2 = injection == nullptr
                          ? params.w2
                          : (injection->structural_on(day) ? params.w2 : 0.0);
    for (int sub = 0; sub < kSubstepsPerDay; ++sub) {
      const double s = S / params.S_max;
      const double evap = params.e_frac * pet * s;
      const double drain = params.K_out * std::pow(s, params.c_rec);
      const double release = params.k_fast * F;
      S += dt * (P * (1.0 - w2) - evap - drain + release);
      F += dt * (P * w2 - release);
      trace.total_inflow += dt * P;
      trace.total_outflow += dt * (evap + drain);
      // Clamping spills or withholds water; book it as outflow so the
      // balance still closes.
      if (S < 0.0) {
        trace.total_outflow += S;
        S = 0.0;
        trace.clamped = true;
      } else if (S > params.S_max) {
        trace.total_outflow += S - params.S_max;
        S = params.S_max;
        trace.clamped = true;
      }
      if (F > params.S_max) {
        trace.total_outflow += F - params.S_max;
        F = params.S_max;
        trace.clamped = true;
      }
    }
    if (!std::isfinite(S) || !std::isfinite(F)) {
      throw NumericalError("toy model state became non-finite on day " +
                           std::to_string(day));
    }
    const double sat =
        std::clamp((S + F) / params.S_max, kSaturationFloor, 1.0);
    trace.matrix[t] = S;
    trace.fast[t] = F;
    trace.head[t] = mvg_head(sat, params.mvg);
  }
  return trace;
}

std::vector<double> simulate_toy(const ToyModelParams& params,
                                 const ForcingSeries& forcing,
                                 const ErrorInjection* injection) {
  return simulate_toy_trace(params, forcing, injection).head;
}

ParameterSpace default_parameter_space() {
  return {{"S_max", "c_rec", "K_out", "e_frac", "alpha", "n", "theta_s",
           "K_sat", "l"},
          {{10.0, 10.0},
           {3.5, 3.5},
           {1.15, 1.15},
           {0.4, 1.0},
           {2.0, 12.0},
           {1.6, 3.5},
           {0.5455, 0.5455},
           {0.0009, 0.0009},
           {0.1945, 0.1945}}};
}

ToyModelParams toy_from_row(const std::vector<std::string>& names,
                            std::span<const double> row) {
  ToyModelParams p;
  for (std::size_t k = 0; k < names.size() && k < row.size(); ++k) {
    const std::string& name = names[k];
    const double v = row[k];
    if (name == "S_max") p.S_max = v;
    else if (name == "c_rec") p.c_rec = v;
    else if (name == "K_out") p.K_out = v;
    else if (name == "e_frac") p.e_frac = v;
    else if (name == "alpha") p.mvg.alpha = v;
    else if (name == "n") p.mvg.n = v;
    else if (name == "theta_s") p.mvg.theta_s = v;
    else if (name == "theta_r") p.mvg.theta_r = v;
    else if (name == "K_sat") p.mvg.K_sat = v;
    else if (name == "l") p.mvg.l = v;
    else if (name == "w2") p.w2 = v;
    else if (name == "k_fast") p.k_fast = v;
    else if (name == "initial_fraction") p.initial_fraction = v;
  }
  return p;
}

PriorSample sample_prior_ensemble(const ParameterSpace& space, std::size_t n,
                                  const ForcingSeries& forcing,
                                  std::uint64_t seed, std::size_t workers) {
  if (n < 2) throw ValidationError("prior ensemble needs n >= 2");
  if (space.names.size() != space.bounds.size()) {
    throw ValidationError("parameter names and bounds differ in length");
  }
  for (const auto& b : space.bounds) {
    if (!(b.lower <= b.upper)) throw ValidationError("parameter bound lower > upper");
  }
  forcing.validate();
  const std::size_t p = space.names.size();

  PriorSample out;
  out.ensemble.predictions = Matrix(n, forcing.size());
  out.ensemble.parameters = Matrix(n, p);
  out.ensemble.parameter_names = space.names;
  out.ensemble.parameter_bounds = space.bounds;
  std::vector<std::size_t> redraws(n, 0);

  parallel_for(n, workers, [&](std::size_t i) {
    auto rng = substream(seed, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto row = out.ensemble.parameters.row(i);
    for (std::size_t attempt = 0;; ++attempt) {
      for (std::size_t k = 0; k < p; ++k) {
        const auto& b = space.bounds[k];
        row[k] = b.lower == b.upper ? b.lower
                                    : b.lower + (b.upper - b.lower) * unit(rng);
      }
      ToyModelParams params = toy_from_row(space.names, row);
      params.w2 = 0.0;
      try {
        const auto head = simulate_toy(params, forcing);
        if (std::all_of(head.begin(), head.end(),
                        [](double h) { return std::isfinite(h); })) {
          std::copy(head.begin(), head.end(),
                    out.ensemble.predictions.row(i).begin());
          return;
        }
      } catch (const NumericalError&) {
      }
      ++redraws[i];
      if (attempt + 1 >= kMaxRedraws) {
        throw NumericalError("prior member " + std::to_string(i + 1) +
                             " unstable after " + std::to_string(kMaxRedraws) +
                             " draws");
      }
    }
  });
  out.resampled = std::accumulate(redraws.begin(), redraws.end(), std::size_t{0});
  return out;
}

ForcingSeries default_forcing(int horizon, std::uint64_t seed) {
  if (horizon < 2) throw ValidationError("forcing horizon must be >= 2");
  ForcingSeries f;
  f.times.resize(horizon);
  f.precipitation.assign(horizon, 0.0);
  f.potential_evaporation.resize(horizon);

  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> depth(1.0 / 0.8);
  bool wet = false;
  for (int t = 0; t < horizon; ++t) {
    f.times[t] = t + 1;
    const double season = std::sin(std::numbers::pi * (t + 1) / horizon);
    f.potential_evaporation[t] = 0.1 + 0.25 * season;
    // Two-state weather chain: wet days cluster into spells.
    wet = unit(rng) < (wet ? 0.55 : 0.18);
    const double amount = depth(rng);
    if (wet) f.precipitation[t] = std::min(amount, 3.0);
  }
  for (int day : kPlantedRainDays) {
    const int d = scale_day(day, horizon);
    f.precipitation[d - 1] = std::max(f.precipitation[d - 1], 0.6 + 0.6 * unit(rng));
  }
  return f;
}

std::string_view case_name(CaseId id) {
  switch (id) {
    case CaseId::base: return "base";
    case CaseId::structural: return "structural";
    case CaseId::forcing: return "forcing";
    case CaseId::superimposed: return "superimposed";
  }
  return "base";
}

CaseId parse_case(std::string_view name) {
  if (name == "base" || name == "0") return CaseId::base;
  if (name == "structural" || name == "1") return CaseId::structural;
  if (name == "forcing" || name == "2") return CaseId::forcing;
  if (name == "superimposed" || name == "3") return CaseId::superimposed;
  throw ValidationError("unknown case '" + std::string(name) +
                        "' (expected base, structural, forcing, superimposed)");
}

ErrorInjection case_injection(CaseId id, int horizon) {
  ErrorInjection inj;
  auto period = [&](int a, int b) {
    return DayInterval{scale_day(a, horizon), scale_day(b, horizon)};
  };
  auto days = [&](std::initializer_list<int> list) {
    std::vector<int> out;
    for (int d : list) {
      const int s = scale_day(d, horizon);
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
  };
  switch (id) {
    case CaseId::base:
      break;
    case CaseId::structural:
      inj.structural_periods = {period(31, 40), period(81, 90), period(161, 170)};
      break;
    case CaseId::forcing:
      inj.forcing_removal_days =
          days({36, 37, 38, 39, 40, 89, 90, 166, 167, 168, 169, 170});
      break;
    case CaseId::superimposed:
      inj.structural_periods = {period(31, 40), period(81, 90), period(161, 170)};
      inj.forcing_removal_days = days({44, 45, 81, 82, 84, 161, 163, 164, 165});
      break;
  }
  return inj;
}

std::vector<double> typicality(const PredictionEnsemble& ensemble) {
  const std::size_t n_mc = ensemble.n_mc();
  const std::size_t n_o = ensemble.n_steps();
  if (n_mc < 2) throw ValidationError("typicality needs N_MC >= 2");
  std::vector<double> center(n_o), scale(n_o), column(n_mc);
  for (std::size_t t = 0; t < n_o; ++t) {
    for (std::size_t i = 0; i < n_mc; ++i) column[i] = ensemble.predictions(i, t);
    std::sort(column.begin(), column.end());
    center[t] = empirical_quantile(column, 0.5);
    scale[t] = empirical_quantile(column, 0.75) - empirical_quantile(column, 0.25);
  }
  std::vector<double> out(n_mc, 0.0);
  std::size_t used = 0;
  for (std::size_t t = 0; t < n_o; ++t) {
    if (!(scale[t] > 0.0)) continue;  // all members agree; carries no information
    ++used;
    for (std::size_t i = 0; i < n_mc; ++i) {
      const double z = (ensemble.predictions(i, t) - center[t]) / scale[t];
      out[i] -= z * z;
    }
  }
  if (used > 0) {
    for (double& v : out) v /= static_cast<double>(used);
  }
  return out;
}

std::vector<DayInterval> residual_periods(std::span<const double> observed,
                                          std::span<const double> clean,
                                          double threshold) {
  std::vector<DayInterval> periods;
  for (std::size_t t = 0; t < observed.size() && t < clean.size(); ++t) {
    if (std::abs(observed[t] - clean[t]) <= threshold) continue;
    const int day = static_cast<int>(t + 1);
    if (!periods.empty() && periods.back().last + 1 == day) {
      periods.back().last = day;
    } else {
      periods.push_back({day, day});
    }
  }
  return periods;
}

ObservationSeries add_step_residual(ObservationSeries obs, int first,
                                    int length, double magnitude) {
  for (int d = first; d < first + length; ++d) {
    if (d < 1 || d > static_cast<int>(obs.size())) {
      throw ValidationError("step residual outside the series");
    }
    obs.values[d - 1] += magnitude;
  }
  return obs;
}

CaseBundle build_case(CaseId id, const CaseConfig& config) {
  if (config.n_mc < 3) throw ValidationError("case ensemble needs n_mc >= 3");
  if (!(config.sigma > 0.0)) throw ValidationError("case sigma must be > 0");
  CaseBundle bundle;
  bundle.id = id;
  bundle.forcing =
      config.forcing ? *config.forcing : default_forcing(config.horizon);
  bundle.forcing.validate();
  const int horizon = static_cast<int>(bundle.forcing.size());

  // One extra member is drawn and held out as the truth.
  PriorSample prior = sample_prior_ensemble(config.space, config.n_mc + 1,
                                            bundle.forcing, config.seed,
                                            config.workers);
  bundle.resampled = prior.resampled;
  const PredictionEnsemble& full = prior.ensemble;
  const std::vector<double> stat = typicality(full);

  std::size_t truth_index = 0;
  if (id == CaseId::superimposed) {
    std::vector<std::size_t> order(stat.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return stat[a] < stat[b]; });
    truth_index = order[static_cast<std::size_t>(0.05 * (order.size() - 1))];
  } else {
    truth_index = static_cast<std::size_t>(
        std::max_element(stat.begin(), stat.end()) - stat.begin());
  }
  bundle.selection_statistic = stat[truth_index];

  const std::size_t p = full.n_params();
  bundle.ensemble.predictions = Matrix(config.n_mc, horizon);
  bundle.ensemble.parameters = Matrix(config.n_mc, p);
  bundle.ensemble.parameter_names = full.parameter_names;
  bundle.ensemble.parameter_bounds = full.parameter_bounds;
  for (std::size_t i = 0, dst = 0; i < full.n_mc(); ++i) {
    if (i == truth_index) continue;
    std::copy(full.predictions.row(i).begin(), full.predictions.row(i).end(),
              bundle.ensemble.predictions.row(dst).begin());
    std::copy(full.parameters.row(i).begin(), full.parameters.row(i).end(),
              bundle.ensemble.parameters.row(dst).begin());
    ++dst;
  }

  bundle.truth_row.assign(full.parameters.row(truth_index).begin(),
                          full.parameters.row(truth_index).end());
  bundle.truth = toy_from_row(full.parameter_names, bundle.truth_row);
  bundle.truth.k_fast = config.k_fast;
  if (id == CaseId::structural) bundle.truth.w2 = config.w2_structural;
  if (id == CaseId::superimposed) bundle.truth.w2 = config.w2_superimposed;
  bundle.injection = case_injection(id, horizon);
  bundle.injection.validate(horizon);

  bundle.clean.assign(full.predictions.row(truth_index).begin(),
                      full.predictions.row(truth_index).end());
  std::vector<double> observed =
      id == CaseId::base
          ? bundle.clean
          : simulate_toy(bundle.truth, bundle.forcing, &bundle.injection);
  bundle.residual_periods = residual_periods(observed, bundle.clean, config.sigma);
  bundle.observations = make_observations(std::move(observed), config.sigma);
  return bundle;
}

}  // namespace tbme

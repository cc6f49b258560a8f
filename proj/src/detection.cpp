#include "tbme/detection.hpp"

#include <algorithm>
#include <string>

#include "tbme/error.hpp"

namespace tbme {

namespace {

constexpr std::string_view kVerdictNames[] = {"inside", "below_quantile",
                                              "below_minimum"};
constexpr std::string_view kStateNames[] = {"I", "II", "III", "III*", "IV"};

// Fraction of a stretch's depth within which windows count as its floor.
constexpr double kPlateauTolerance = 0.1;
constexpr std::size_t kMinPlateau = 3;
constexpr std::size_t kMinReentry = 2;

void check_grid(const TbmeCurve& curve, const ReferenceBands& bands) {
  if (curve.tau != bands.tau) {
    throw ValidationError("curve tau " + std::to_string(curve.tau) +
                          " differs from reference tau " +
                          std::to_string(bands.tau));
  }
  if (curve.window_ends != bands.window_ends ||
      bands.quantiles.size() != bands.window_ends.size()) {
    throw ValidationError("curve and reference window grids differ");
  }
}

struct Stretch {
  std::size_t begin = 0;  // window index, inclusive
  std::size_t end = 0;    // inclusive
};

// Floor of a flagged stretch: argmin, widened to the contiguous plateau of
// windows within kPlateauTolerance of the stretch depth.
struct Floor {
  std::size_t first = 0;
  std::size_t last = 0;
  bool plateau = false;
};

Floor find_floor(const TbmeCurve& curve, const ReferenceBands& bands,
                 QuantileLevel alpha, const Stretch& s) {
  std::size_t arg = s.begin;
  double depth = 0.0;
  for (std::size_t k = s.begin; k <= s.end; ++k) {
    if (curve.log_tbme[k] < curve.log_tbme[arg]) arg = k;
    depth = std::max(depth, bands.at(k, alpha) - curve.log_tbme[k]);
  }
  const double cutoff = curve.log_tbme[arg] + kPlateauTolerance * depth;
  Floor f{arg, arg, false};
  while (f.first > s.begin && curve.log_tbme[f.first - 1] <= cutoff) --f.first;
  while (f.last < s.end && curve.log_tbme[f.last + 1] <= cutoff) ++f.last;
  f.plateau = f.last - f.first + 1 >= kMinPlateau;
  if (!f.plateau) f.first = f.last = arg;
  return f;
}

}  // namespace

std::string_view verdict_name(Verdict v) {
  return kVerdictNames[static_cast<int>(v)];
}

std::string_view state_name(State s) { return kStateNames[static_cast<int>(s)]; }

Verdict parse_verdict(std::string_view name) {
  for (int k = 0; k < 3; ++k) {
    if (kVerdictNames[k] == name) return static_cast<Verdict>(k);
  }
  throw ValidationError("unknown verdict '" + std::string(name) + "'");
}

State parse_state(std::string_view name) {
  for (int k = 0; k < 5; ++k) {
    if (kStateNames[k] == name) return static_cast<State>(k);
  }
  throw ValidationError("unknown state '" + std::string(name) + "'");
}

std::vector<Verdict> test_windows(const TbmeCurve& curve,
                                  const ReferenceBands& bands,
                                  QuantileLevel alpha) {
  check_grid(curve, bands);
  std::vector<Verdict> verdicts(curve.n_windows(), Verdict::inside);
  for (std::size_t k = 0; k < verdicts.size(); ++k) {
    const double v = curve.log_tbme[k];
    if (v < bands.at(k, QuantileLevel::min)) {
      verdicts[k] = Verdict::below_minimum;
    } else if (v < bands.at(k, alpha)) {
      verdicts[k] = Verdict::below_quantile;
    }
  }
  return verdicts;
}

std::vector<Signal> segment_signals(const std::vector<Verdict>& verdicts,
                                    std::size_t tau, std::size_t first_end) {
  if (first_end == 0) first_end = tau;
  std::vector<Signal> signals;
  std::size_t k = 0;
  while (k < verdicts.size()) {
    if (verdicts[k] == Verdict::inside) {
      ++k;
      continue;
    }
    Signal s;
    s.onset_window_end = first_end + k;
    while (k < verdicts.size() && verdicts[k] != Verdict::inside) {
      if (verdicts[k] == Verdict::below_minimum) {
        s.severity = Verdict::below_minimum;
      }
      ++k;
    }
    s.offset_window_end = first_end + k - 1;
    s.length = s.offset_window_end - s.onset_window_end + 1;
    s.residual_length = s.length > tau ? s.length - tau : 0;
    signals.push_back(std::move(s));
  }
  return signals;
}

std::vector<State> classify_states(const TbmeCurve& curve,
                                   const ReferenceBands& bands,
                                   const Signal& signal, QuantileLevel alpha) {
  check_grid(curve, bands);
  if (curve.n_windows() == 0 ||
      signal.onset_window_end < curve.window_ends.front() ||
      signal.offset_window_end > curve.window_ends.back() ||
      signal.offset_window_end < signal.onset_window_end) {
    throw ValidationError("signal outside the curve's window range");
  }
  const std::size_t first = signal.onset_window_end - curve.window_ends.front();
  const std::size_t last = signal.offset_window_end - curve.window_ends.front();
  const std::size_t n = last - first + 1;

  std::vector<Stretch> stretches;
  for (std::size_t k = first; k <= last; ++k) {
    if (curve.log_tbme[k] >= bands.at(k, alpha)) continue;
    if (!stretches.empty() && stretches.back().end + 1 == k) {
      stretches.back().end = k;
    } else {
      stretches.push_back({k, k});
    }
  }

  std::vector<State> states(n, State::III);
  if (stretches.empty()) {
    std::fill(states.begin(), states.end(), State::I);
    return states;
  }
  auto at = [&](std::size_t k) -> State& { return states[k - first]; };

  // Windows above the threshold: leading/trailing ones are outside the
  // episode proper; interior re-entries of >= kMinReentry windows are III*.
  for (std::size_t k = first; k < stretches.front().begin; ++k) at(k) = State::I;
  for (std::size_t k = stretches.back().end + 1; k <= last; ++k) at(k) = State::I;
  for (std::size_t s = 0; s + 1 < stretches.size(); ++s) {
    const std::size_t gap_begin = stretches[s].end + 1;
    const std::size_t gap_end = stretches[s + 1].begin;  // exclusive
    const State label =
        gap_end - gap_begin >= kMinReentry ? State::III_star : State::III;
    for (std::size_t k = gap_begin; k < gap_end; ++k) at(k) = label;
  }

  const Stretch& head = stretches.front();
  const Stretch& tail = stretches.back();
  const Floor head_floor = find_floor(curve, bands, alpha, head);
  const Floor tail_floor = find_floor(curve, bands, alpha, tail);

  if (stretches.size() == 1) {
    for (std::size_t k = head.begin; k <= head.end; ++k) {
      if (head_floor.plateau) {
        at(k) = k < head_floor.first  ? State::II
                : k > head_floor.last ? State::IV
                                      : State::III;
      } else {
        at(k) = k <= head_floor.first ? State::II : State::IV;
      }
    }
    return states;
  }

  // Descending flank of the first stretch, ascending flank of the last;
  // everything in between stays III unless it is a re-entry gap.
  const std::size_t descend_end =
      head_floor.plateau ? head_floor.first : head_floor.first + 1;
  for (std::size_t k = head.begin; k < descend_end; ++k) at(k) = State::II;
  const std::size_t ascend_begin = tail_floor.last + 1;
  for (std::size_t k = ascend_begin; k <= tail.end; ++k) at(k) = State::IV;
  return states;
}

std::vector<Episode> group_episodes(const std::vector<Signal>& signals,
                                    std::size_t tau) {
  std::vector<Episode> episodes;
  std::size_t s = 0;
  while (s < signals.size()) {
    std::size_t e = s;
    while (e + 1 < signals.size() &&
           signals[e + 1].onset_window_end - signals[e].offset_window_end - 1 < tau) {
      ++e;
    }
    Episode ep;
    ep.onset_window_end = signals[s].onset_window_end;
    ep.offset_window_end = signals[e].offset_window_end;
    ep.length = ep.offset_window_end - ep.onset_window_end + 1;
    ep.residual_length = ep.length > tau ? ep.length - tau : 0;
    ep.first_signal = s;
    ep.last_signal = e;
    episodes.push_back(ep);
    s = e + 1;
  }
  return episodes;
}

std::vector<State> annotate_states(const TbmeCurve& curve,
                                   const ReferenceBands& bands,
                                   const std::vector<Signal>& signals,
                                   QuantileLevel alpha) {
  std::vector<State> states(curve.n_windows(), State::I);
  if (signals.empty()) return states;
  const std::size_t base = curve.window_ends.front();
  for (const Episode& ep : group_episodes(signals, curve.tau)) {
    Signal span;
    span.onset_window_end = ep.onset_window_end;
    span.offset_window_end = ep.offset_window_end;
    const auto part = classify_states(curve, bands, span, alpha);
    std::copy(part.begin(), part.end(),
              states.begin() + static_cast<std::ptrdiff_t>(
                                   ep.onset_window_end - base));
  }
  return states;
}

DetectionReport detect(const TbmeCurve& curve, const ReferenceBands& bands,
                       const DetectionOptions& options) {
  DetectionReport report;
  report.tau = curve.tau;
  report.alpha = options.alpha;
  report.window_ends = curve.window_ends;
  report.verdicts = test_windows(curve, bands, options.alpha);
  report.signals = segment_signals(report.verdicts, curve.tau,
                                   curve.window_ends.empty()
                                       ? curve.tau
                                       : curve.window_ends.front());

  if (options.excursion && !report.signals.empty()) {
    const std::size_t base = curve.window_ends.front();
    auto below_q160 = [&](std::size_t k) {
      return curve.log_tbme[k] < bands.at(k, QuantileLevel::q160);
    };
    auto& sig = report.signals;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      std::size_t lo = sig[s].onset_window_end - base;
      std::size_t hi = sig[s].offset_window_end - base;
      const std::size_t lo_limit =
          s == 0 ? 0 : sig[s - 1].offset_window_end - base + 1;
      const std::size_t hi_limit =
          s + 1 == sig.size() ? curve.n_windows() - 1
                              : sig[s + 1].onset_window_end - base - 1;
      while (lo > lo_limit && below_q160(lo - 1)) --lo;
      while (hi < hi_limit && below_q160(hi + 1)) ++hi;
      sig[s].onset_window_end = base + lo;
      sig[s].offset_window_end = base + hi;
      sig[s].length = hi - lo + 1;
      sig[s].residual_length =
          sig[s].length > curve.tau ? sig[s].length - curve.tau : 0;
    }
  }

  report.episodes = group_episodes(report.signals, curve.tau);
  report.window_states =
      annotate_states(curve, bands, report.signals, options.alpha);
  const std::size_t base = curve.window_ends.empty() ? 0 : curve.window_ends.front();
  for (auto& sig : report.signals) {
    sig.states.assign(
        report.window_states.begin() +
            static_cast<std::ptrdiff_t>(sig.onset_window_end - base),
        report.window_states.begin() +
            static_cast<std::ptrdiff_t>(sig.offset_window_end - base + 1));
  }
  return report;
}

}  // namespace tbme

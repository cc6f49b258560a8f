#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "tbme/evidence.hpp"
#include "tbme/reference.hpp"

namespace tbme {

enum class Verdict { inside, below_quantile, below_minimum };

/// Phases of the curve as the window crosses a residual period.
enum class State { I, II, III, III_star, IV };

std::string_view verdict_name(Verdict v);
std::string_view state_name(State s);
Verdict parse_verdict(std::string_view name);
State parse_state(std::string_view name);

struct Signal {
  std::size_t onset_window_end = 0;   // first flagged window end (day)
  std::size_t offset_window_end = 0;  // last flagged window end (day)
  std::size_t length = 0;             // L_s in days
  std::size_t residual_length = 0;    // L_e estimate = max(L_s - tau, 0)
  Verdict severity = Verdict::below_quantile;
  std::vector<State> states;  // one per window in [onset, offset]
};

/// Signals separated by fewer than tau inside windows, taken as one pass of
/// the window over a residual period (the gaps are compensation re-entries).
struct Episode {
  std::size_t onset_window_end = 0;
  std::size_t offset_window_end = 0;
  std::size_t length = 0;           // days from first to last flagged window
  std::size_t residual_length = 0;  // max(length - tau, 0)
  std::size_t first_signal = 0;     // index range into the signal list
  std::size_t last_signal = 0;
};

struct DetectionReport {
  std::size_t tau = 0;
  QuantileLevel alpha = QuantileLevel::q025;
  std::vector<std::size_t> window_ends;
  std::vector<Verdict> verdicts;
  std::vector<Signal> signals;
  std::vector<Episode> episodes;
  /// One state per window; I outside every signal episode.
  std::vector<State> window_states;
};

struct DetectionOptions {
  QuantileLevel alpha = QuantileLevel::q025;
  /// Extend each flagged run outward while the curve stays below q160.
  bool excursion = false;
};

/// One-sided test of every window against the reference bands.
std::vector<Verdict> test_windows(const TbmeCurve& curve,
                                  const ReferenceBands& bands,
                                  QuantileLevel alpha);

/// Maximal runs of non-inside verdicts. Window k ends on day first_end + k;
/// by default first_end = tau.
std::vector<Signal> segment_signals(const std::vector<Verdict>& verdicts,
                                    std::size_t tau, std::size_t first_end = 0);

std::vector<Episode> group_episodes(const std::vector<Signal>& signals,
                                    std::size_t tau);

/// State annotation for the windows onset..offset of `signal`. The range may
/// span several flagged stretches (an episode); windows that climb back above
/// the alpha quantile for at least two consecutive windows between flagged
/// stretches are III*.
std::vector<State> classify_states(const TbmeCurve& curve,
                                   const ReferenceBands& bands,
                                   const Signal& signal,
                                   QuantileLevel alpha = QuantileLevel::q025);

/// Full per-window annotation: signals separated by fewer than tau inside
/// windows are grouped into one episode and classified together.
std::vector<State> annotate_states(const TbmeCurve& curve,
                                   const ReferenceBands& bands,
                                   const std::vector<Signal>& signals,
                                   QuantileLevel alpha = QuantileLevel::q025);

/// test_windows + segment_signals + annotate_states.
DetectionReport detect(const TbmeCurve& curve, const ReferenceBands& bands,
                       const DetectionOptions& options = {});

}  // namespace tbme

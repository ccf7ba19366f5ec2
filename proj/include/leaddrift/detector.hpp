#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "leaddrift/sim.hpp"

namespace leaddrift {

// EMA with alpha = 2/(W+1). The first sample initializes the average
// directly (S_0 = s_0), so the smoothed series stays inside the range of
// the raw scores seen so far.
struct EmaState {
  double alpha = 1.0;
  double value = 0.0;
  bool initialized = false;

  explicit EmaState(int window);
  static EmaState from_alpha(double alpha);

 private:
  EmaState() = default;
};

double ema_update(EmaState& state, double score);  // rejects non-finite input
std::vector<double> ema_series(std::span<const double> raw, int window);

enum class AlertKind { rising_edge };

struct AlertEvent {
  std::int64_t t = 0;
  double smoothed = 0.0;
  AlertKind kind = AlertKind::rising_edge;
};

// Rising-edge alerts on an already-smoothed series: an event fires when the
// series reaches tau from below (or at the very first sample if it starts at
// or above tau) and re-arms only after dropping back below tau.
std::vector<AlertEvent> detect_crossings(std::span<const double> smoothed,
                                         std::span<const std::int64_t> t_index,
                                         double tau);

// Smooth-then-detect over raw per-minute scores.
std::vector<AlertEvent> stream_detect(std::span<const double> raw_scores,
                                      std::span<const std::int64_t> t_index,
                                      double tau, int window);

struct EpisodeOutcome {
  std::size_t episode_index = 0;  // into the annotation list
  bool detected = false;
  std::int64_t t_alert = -1;  // valid iff detected
  double lead_time_min = 0.0;
};

struct EpisodeScore {
  std::vector<EpisodeOutcome> outcomes;  // failure episodes in [eval_lo, eval_hi)
  int fp_count = 0;
};

// Attributes each event either to a failure episode (any event inside its
// [t_start, t_end] window; events after t_fail count as detected with zero
// lead) or to the false-positive tally. Benign high-load windows do not
// shield events: an alert there is a false positive. Outcomes are produced
// for episodes whose t_fail lies in [eval_lo, eval_hi).
EpisodeScore score_episodes(std::span<const AlertEvent> events,
                            std::span<const EpisodeAnnotation> episodes,
                            std::int64_t eval_lo = INT64_MIN,
                            std::int64_t eval_hi = INT64_MAX);

double fp_per_day(int fp_count, std::int64_t minutes);

}  // namespace leaddrift

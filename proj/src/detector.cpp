#include "leaddrift/detector.hpp"

#include <cmath>

#include "leaddrift/errors.hpp"

namespace leaddrift {

EmaState::EmaState(int window) {
  if (window < 1) throw ConfigError("EMA window must be >= 1");
  alpha = 2.0 / (window + 1);
}

EmaState EmaState::from_alpha(double a) {
  if (!(a > 0.0) || a > 1.0) throw ConfigError("EMA alpha must be in (0, 1]");
  EmaState s;
  s.alpha = a;
  return s;
}

double ema_update(EmaState& state, double score) {
  if (!std::isfinite(score)) throw DataError("non-finite score fed to EMA");
  if (!state.initialized) {
    state.value = score;
    state.initialized = true;
  } else {
    state.value = state.alpha * score + (1.0 - state.alpha) * state.value;
  }
  return state.value;
}

std::vector<double> ema_series(std::span<const double> raw, int window) {
  EmaState state(window);
  std::vector<double> out;
  out.reserve(raw.size());
  for (const double s : raw) out.push_back(ema_update(state, s));
  return out;
}

std::vector<AlertEvent> detect_crossings(std::span<const double> smoothed,
                                         std::span<const std::int64_t> t_index,
                                         double tau) {
  if (smoothed.size() != t_index.size())
    throw DataError("score/time index size mismatch");
  if (!std::isfinite(tau)) throw ConfigError("threshold must be finite");
  std::vector<AlertEvent> events;
  bool armed = true;  // below tau (or stream start)
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    if (smoothed[i] >= tau) {
      if (armed) events.push_back({t_index[i], smoothed[i]});
      armed = false;
    } else {
      armed = true;
    }
  }
  return events;
}

std::vector<AlertEvent> stream_detect(std::span<const double> raw_scores,
                                      std::span<const std::int64_t> t_index,
                                      double tau, int window) {
  const std::vector<double> smoothed = ema_series(raw_scores, window);
  return detect_crossings(smoothed, t_index, tau);
}

EpisodeScore score_episodes(std::span<const AlertEvent> events,
                            std::span<const EpisodeAnnotation> episodes,
                            std::int64_t eval_lo, std::int64_t eval_hi) {
  EpisodeScore result;

  // Earliest event per failure episode; every event lands in exactly one
  // bucket (some episode window, or the FP tally).
  std::vector<std::int64_t> first_alert(episodes.size(), -1);
  for (const AlertEvent& ev : events) {
    bool hit = false;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      const EpisodeAnnotation& e = episodes[i];
      if (!e.has_fail()) continue;
      if (ev.t >= e.t_start && ev.t <= e.t_end) {
        if (first_alert[i] < 0) first_alert[i] = ev.t;
        hit = true;
        break;
      }
    }
    if (!hit) ++result.fp_count;
  }

  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const EpisodeAnnotation& e = episodes[i];
    if (!e.has_fail() || e.t_fail < eval_lo || e.t_fail >= eval_hi) continue;
    EpisodeOutcome out;
    out.episode_index = i;
    if (first_alert[i] >= 0) {
      out.detected = true;
      out.t_alert = first_alert[i];
      out.lead_time_min =
          std::max(static_cast<double>(e.t_fail - out.t_alert), 0.0);
    }
    result.outcomes.push_back(out);
  }
  return result;
}

double fp_per_day(int fp_count, std::int64_t minutes) {
  if (minutes <= 0) throw ConfigError("evaluated duration must be positive");
  return static_cast<double>(fp_count) /
         (static_cast<double>(minutes) / 1440.0);
}

}  // namespace leaddrift

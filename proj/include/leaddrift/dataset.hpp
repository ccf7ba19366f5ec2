#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "leaddrift/sim.hpp"

namespace leaddrift {

inline constexpr int kNumFeatures = 7;
inline constexpr int kNumRawKpis = 5;

// Fixed feature order; the model, explainer, and baselines all index by it.
inline constexpr std::array<const char*, kNumFeatures> kFeatureNames = {
    "cpu_pct", "ram_pct",   "storage_pct",    "net_conn",
    "serv_resp", "cpu_delta", "serv_resp_delta"};

using FeatureRow = std::array<double, kNumFeatures>;

// Rows aligned with a global minute index. Rows from different contiguous
// segments may be concatenated; delta features never cross a segment edge.
struct FeatureMatrix {
  std::vector<FeatureRow> rows;
  std::vector<std::int64_t> t;

  std::size_t size() const { return rows.size(); }
};

// Half-open block [lo, hi) of trace minutes.
struct Segment {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

// Builds the 7-feature rows for the given segments, in order. cpu_delta and
// serv_resp_delta are first-order differences computed within each segment;
// the first row of a segment gets delta 0.
FeatureMatrix featurize(const TelemetryTrace& trace,
                        std::span<const Segment> segments);

// y_t = 1 iff some imbalance failure time lands in [t, t+horizon].
std::vector<std::uint8_t> assign_labels(
    std::span<const std::int64_t> t_index,
    std::span<const EpisodeAnnotation> episodes, std::int64_t horizon);

struct LabeledDataset {
  FeatureMatrix X;
  std::vector<std::uint8_t> y;
  std::int64_t horizon = 0;
};

LabeledDataset build_dataset(const TelemetryTrace& trace,
                             std::span<const Segment> segments,
                             std::span<const EpisodeAnnotation> episodes,
                             std::int64_t horizon);

// Contiguous-block k-fold plan over [0, n_minutes). Blocks are disjoint and
// cover the trace; row shuffling would leak across the time axis.
struct SplitPlan {
  int k = 0;
  std::vector<Segment> fold_blocks;
};

SplitPlan make_split_plan(std::int64_t n_minutes, int k);
std::vector<Segment> train_segments(const SplitPlan& plan, int fold);

struct Standardizer {
  std::array<double, kNumFeatures> mean{};
  std::array<double, kNumFeatures> std{};
};

// Per-column mean/std over the given rows; std is floored at 1e-8 so a
// constant column standardizes to zero instead of dividing by zero.
Standardizer fit_standardizer(const FeatureMatrix& train);
FeatureRow standardize_row(const FeatureRow& row, const Standardizer& stats);
FeatureMatrix apply_standardizer(const FeatureMatrix& raw,
                                 const Standardizer& stats);

// Cache format: feature columns + y + t, one row per minute.
void export_dataset_csv(const LabeledDataset& ds, const std::string& path);

}  // namespace leaddrift

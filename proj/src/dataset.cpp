#include "leaddrift/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "leaddrift/errors.hpp"

namespace leaddrift {

namespace {
constexpr double kStdFloor = 1e-8;
}

FeatureMatrix featurize(const TelemetryTrace& trace,
                        std::span<const Segment> segments) {
  const std::int64_t n = trace.n_minutes();
  FeatureMatrix out;
  for (const Segment& seg : segments) {
    if (seg.lo < 0 || seg.hi > n || seg.lo >= seg.hi)
      throw ConfigError("segment out of range or empty");
    for (std::int64_t t = seg.lo; t < seg.hi; ++t) {
      const KpiSample& s = trace.samples[static_cast<std::size_t>(t)];
      FeatureRow row{s.cpu_pct, s.ram_pct, s.storage_pct,
                     s.net_conn, s.serv_resp, 0.0, 0.0};
      if (t > seg.lo) {
        const KpiSample& prev = trace.samples[static_cast<std::size_t>(t - 1)];
        row[5] = s.cpu_pct - prev.cpu_pct;
        row[6] = s.serv_resp - prev.serv_resp;
      }
      out.rows.push_back(row);
      out.t.push_back(t);
    }
  }
  return out;
}

std::vector<std::uint8_t> assign_labels(
    std::span<const std::int64_t> t_index,
    std::span<const EpisodeAnnotation> episodes, std::int64_t horizon) {
  if (horizon < 1) throw ConfigError("label horizon must be >= 1");
  std::vector<std::int64_t> fails;
  for (const EpisodeAnnotation& e : episodes)
    if (e.has_fail()) fails.push_back(e.t_fail);
  std::sort(fails.begin(), fails.end());

  std::vector<std::uint8_t> y(t_index.size(), 0);
  for (std::size_t i = 0; i < t_index.size(); ++i) {
    const std::int64_t t = t_index[i];
    // Any failure in [t, t + horizon]?
    const auto it = std::lower_bound(fails.begin(), fails.end(), t);
    if (it != fails.end() && *it <= t + horizon) y[i] = 1;
  }
  return y;
}

LabeledDataset build_dataset(const TelemetryTrace& trace,
                             std::span<const Segment> segments,
                             std::span<const EpisodeAnnotation> episodes,
                             std::int64_t horizon) {
  LabeledDataset ds;
  ds.X = featurize(trace, segments);
  ds.y = assign_labels(ds.X.t, episodes, horizon);
  ds.horizon = horizon;
  return ds;
}

SplitPlan make_split_plan(std::int64_t n_minutes, int k) {
  if (k < 2) throw ConfigError("fold count must be >= 2");
  if (n_minutes / k < 2) throw ConfigError("fold blocks smaller than 2 rows");
  SplitPlan plan;
  plan.k = k;
  for (int f = 0; f < k; ++f) {
    Segment seg;
    seg.lo = n_minutes * f / k;
    seg.hi = n_minutes * (f + 1) / k;
    plan.fold_blocks.push_back(seg);
  }
  return plan;
}

std::vector<Segment> train_segments(const SplitPlan& plan, int fold) {
  if (fold < 0 || fold >= plan.k) throw ConfigError("fold index out of range");
  std::vector<Segment> segs;
  for (int f = 0; f < plan.k; ++f)
    if (f != fold) segs.push_back(plan.fold_blocks[static_cast<std::size_t>(f)]);
  // Adjacent surviving blocks are merged so a delta only resets where the
  // held-out block actually cuts the timeline.
  std::vector<Segment> merged;
  for (const Segment& s : segs) {
    if (!merged.empty() && merged.back().hi == s.lo)
      merged.back().hi = s.hi;
    else
      merged.push_back(s);
  }
  return merged;
}

Standardizer fit_standardizer(const FeatureMatrix& train) {
  if (train.rows.empty()) throw DataError("cannot fit standardizer on empty data");
  Standardizer stats;
  const double n = static_cast<double>(train.rows.size());
  for (int f = 0; f < kNumFeatures; ++f) {
    double sum = 0.0;
    for (const FeatureRow& r : train.rows) sum += r[static_cast<std::size_t>(f)];
    const double mean = sum / n;
    double sq = 0.0;
    for (const FeatureRow& r : train.rows) {
      const double d = r[static_cast<std::size_t>(f)] - mean;
      sq += d * d;
    }
    stats.mean[static_cast<std::size_t>(f)] = mean;
    stats.std[static_cast<std::size_t>(f)] =
        std::max(std::sqrt(sq / n), kStdFloor);
  }
  return stats;
}

FeatureRow standardize_row(const FeatureRow& row, const Standardizer& stats) {
  FeatureRow out;
  for (int f = 0; f < kNumFeatures; ++f) {
    const auto i = static_cast<std::size_t>(f);
    out[i] = (row[i] - stats.mean[i]) / stats.std[i];
  }
  return out;
}

FeatureMatrix apply_standardizer(const FeatureMatrix& raw,
                                 const Standardizer& stats) {
  FeatureMatrix out;
  out.t = raw.t;
  out.rows.reserve(raw.rows.size());
  for (const FeatureRow& r : raw.rows) out.rows.push_back(standardize_row(r, stats));
  return out;
}

void export_dataset_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open dataset file for writing: " + path);
  out << "t";
  for (const char* name : kFeatureNames) out << ',' << name;
  out << ",y\n";
  char buf[64];
  for (std::size_t i = 0; i < ds.X.size(); ++i) {
    out << ds.X.t[i];
    for (int f = 0; f < kNumFeatures; ++f) {
      std::snprintf(buf, sizeof(buf), ",%.6f",
                    ds.X.rows[i][static_cast<std::size_t>(f)]);
      out << buf;
    }
    out << ',' << static_cast<int>(ds.y[i]) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace leaddrift

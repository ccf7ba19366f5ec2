#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace leaddrift {

// One minute of collector-service telemetry. Percent KPIs live in [0,100],
// health fractions in [0,1]; values are quantized to 6 decimals at
// generation time so CSV round-trips are bit-exact.
struct KpiSample {
  std::int64_t t = 0;
  double cpu_pct = 0.0;
  double ram_pct = 0.0;
  double storage_pct = 0.0;
  double net_conn = 0.0;
  double serv_resp = 0.0;
};

// Minute-indexed trace; samples[t].t == t with no gaps.
struct TelemetryTrace {
  std::vector<KpiSample> samples;
  std::int64_t n_minutes() const {
    return static_cast<std::int64_t>(samples.size());
  }
};

enum class EpisodeKind { imbalance_failure, benign_high_load };

const char* to_string(EpisodeKind kind);
EpisodeKind episode_kind_from_string(const std::string& s);

// Ground truth for one injected event. The window [t_start, t_end] is
// inclusive; t_fail is set only for imbalance failures and satisfies
// t_start < t_fail <= t_end.
struct EpisodeAnnotation {
  EpisodeKind kind = EpisodeKind::imbalance_failure;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::int64_t t_fail = -1;
  bool has_fail() const { return kind == EpisodeKind::imbalance_failure; }
};

struct KpiNoise {
  double cpu = 3.0;
  double ram = 3.0;
  double storage = 0.5;
  double net = 0.01;
  double serv = 0.01;
};

struct GeneratorConfig {
  std::int64_t n_minutes = 0;
  std::uint64_t seed = 0;
  std::int64_t guard_band = 120;
  std::int64_t drift_duration_min = 90;
  std::int64_t drift_duration_max = 180;
  std::int64_t benign_duration_min = 60;
  std::int64_t benign_duration_max = 180;
  KpiNoise noise;

  void validate() const;  // throws ConfigError
};

// Episode list plus the generation metadata that goes into the JSON sidecar.
struct AnnotationSet {
  std::int64_t n_minutes = 0;
  std::uint64_t seed = 0;
  int shortfall = 0;  // episodes dropped after exhausting placement retries
  std::vector<EpisodeAnnotation> episodes;  // sorted by t_start
};

struct GenerationResult {
  TelemetryTrace trace;
  AnnotationSet annotations;
};

// Deterministic: identical config gives bit-identical output. Injects
// floor(n/1440) imbalance-failure episodes and floor(n/2880) benign
// high-load episodes at uniformly sampled starts, keeping a guard band
// between any two episode windows.
GenerationResult generate(const GeneratorConfig& config);

// CSV with header t,cpu_pct,ram_pct,storage_pct,net_conn,serv_resp and
// 6-decimal fixed-point floats.
void export_trace(const TelemetryTrace& trace, const std::string& path);
TelemetryTrace import_trace(const std::string& path);

void export_annotations(const AnnotationSet& annotations,
                        const std::string& path);
AnnotationSet import_annotations(const std::string& path);

}  // namespace leaddrift

#include "leaddrift/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leaddrift/errors.hpp"
#include "leaddrift/rng.hpp"

namespace leaddrift {

namespace {

using json = nlohmann::json;

constexpr std::int64_t kMinutesPerDay = 1440;
constexpr std::int64_t kOutageMinutes = 10;
constexpr int kPlacementRetries = 1000;

// Baseline and episode shaping parameters. The diurnal amplitudes keep the
// drift precursors subtle relative to the daily swing; the imbalance ramp
// pushes CPU up and RAM down over the drift window while the service
// integrity KPIs grow noisy and sag until the outage.
constexpr double kCpuBase = 45.0, kCpuAmp = 15.0;
constexpr double kRamBase = 55.0, kRamAmp = 10.0, kRamPhase = std::numbers::pi / 4.0;
constexpr double kStorageBase = 30.0, kStorageDrift = 40.0;
constexpr double kHealthBase = 0.99;
constexpr double kCpuRamp = 25.0;
constexpr double kRamDrop = 20.0;
constexpr double kIntegrityTrend = 0.15;
constexpr double kIntegritySigmaMax = 0.09;  // added on top of baseline noise
constexpr double kOutageLevel = 0.02;
constexpr double kBenignCpu = 20.0;
constexpr double kBenignRam = 15.0;
constexpr std::int64_t kBenignRampMinutes = 10;

double clip(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

// Snap to 6 decimals, the CSV precision, so export/import is lossless.
double quantize(double v) { return std::round(v * 1e6) / 1e6; }

struct Window {
  std::int64_t lo, hi;  // inclusive
};

bool far_enough(const Window& a, const Window& b, std::int64_t guard) {
  return a.hi + guard < b.lo || b.hi + guard < a.lo;
}

void check_episode(const EpisodeAnnotation& e) {
  if (e.t_start < 0 || e.t_start >= e.t_end)
    throw DataError("episode window invalid: t_start must precede t_end");
  if (e.has_fail() && (e.t_fail <= e.t_start || e.t_fail > e.t_end))
    throw DataError("episode t_fail must lie inside (t_start, t_end]");
}

bool place_episode(Rng& rng, std::int64_t n_minutes, std::int64_t length,
                   std::int64_t guard, const std::vector<Window>& taken,
                   std::int64_t* t_start) {
  const std::int64_t max_start = n_minutes - 1 - length;
  if (max_start < 0) return false;
  for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
    const std::int64_t start = rng.uniform_int(0, max_start);
    const Window cand{start, start + length};
    const bool ok = std::all_of(taken.begin(), taken.end(), [&](const Window& w) {
      return far_enough(cand, w, guard);
    });
    if (ok) {
      *t_start = start;
      return true;
    }
  }
  return false;
}

}  // namespace

const char* to_string(EpisodeKind kind) {
  return kind == EpisodeKind::imbalance_failure ? "imbalance_failure"
                                                : "benign_high_load";
}

EpisodeKind episode_kind_from_string(const std::string& s) {
  if (s == "imbalance_failure") return EpisodeKind::imbalance_failure;
  if (s == "benign_high_load") return EpisodeKind::benign_high_load;
  throw DataError("unknown episode kind: " + s);
}

void GeneratorConfig::validate() const {
  if (n_minutes < kMinutesPerDay)
    throw ConfigError("n_minutes must be >= 1440 (one simulated day)");
  if (drift_duration_min < 1 || drift_duration_min > drift_duration_max)
    throw ConfigError("drift duration range is empty or non-positive");
  if (benign_duration_min < 1 || benign_duration_min > benign_duration_max)
    throw ConfigError("benign duration range is empty or non-positive");
  if (guard_band < 0) throw ConfigError("guard_band must be >= 0");
  if (noise.cpu < 0 || noise.ram < 0 || noise.storage < 0 || noise.net < 0 ||
      noise.serv < 0)
    throw ConfigError("noise std must be >= 0");
}

GenerationResult generate(const GeneratorConfig& config) {
  config.validate();
  const std::int64_t n = config.n_minutes;
  Rng rng(config.seed);

  // Episode placement first; sample draws happen afterwards so the KPI
  // stream depends only on the final layout.
  const std::int64_t want_imbalance = n / kMinutesPerDay;
  const std::int64_t want_benign = n / (2 * kMinutesPerDay);
  std::vector<EpisodeAnnotation> episodes;
  std::vector<Window> taken;
  int shortfall = 0;

  for (std::int64_t i = 0; i < want_imbalance; ++i) {
    const std::int64_t drift =
        rng.uniform_int(config.drift_duration_min, config.drift_duration_max);
    std::int64_t t_start = 0;
    if (place_episode(rng, n, drift + kOutageMinutes, config.guard_band, taken,
                      &t_start)) {
      EpisodeAnnotation e;
      e.kind = EpisodeKind::imbalance_failure;
      e.t_start = t_start;
      e.t_fail = t_start + drift;
      e.t_end = e.t_fail + kOutageMinutes;
      taken.push_back({e.t_start, e.t_end});
      episodes.push_back(e);
    } else {
      ++shortfall;
    }
  }
  for (std::int64_t i = 0; i < want_benign; ++i) {
    const std::int64_t dur = rng.uniform_int(config.benign_duration_min,
                                             config.benign_duration_max);
    std::int64_t t_start = 0;
    if (place_episode(rng, n, dur, config.guard_band, taken, &t_start)) {
      EpisodeAnnotation e;
      e.kind = EpisodeKind::benign_high_load;
      e.t_start = t_start;
      e.t_end = t_start + dur;
      taken.push_back({e.t_start, e.t_end});
      episodes.push_back(e);
    } else {
      ++shortfall;
    }
  }
  std::sort(episodes.begin(), episodes.end(),
            [](const EpisodeAnnotation& a, const EpisodeAnnotation& b) {
              return a.t_start < b.t_start;
            });

  // Minute-by-episode lookup. Episodes are sparse and non-overlapping, so a
  // sorted scan with a moving cursor is enough.
  TelemetryTrace trace;
  trace.samples.resize(static_cast<std::size_t>(n));
  std::size_t cursor = 0;
  const double omega = 2.0 * std::numbers::pi / kMinutesPerDay;
  const double storage_slope = n > 1 ? kStorageDrift / static_cast<double>(n - 1) : 0.0;

  for (std::int64_t t = 0; t < n; ++t) {
    while (cursor < episodes.size() && episodes[cursor].t_end < t) ++cursor;

    double cpu = kCpuBase + kCpuAmp * std::sin(omega * t) +
                 rng.normal(0.0, config.noise.cpu);
    double ram = kRamBase + kRamAmp * std::sin(omega * t + kRamPhase) +
                 rng.normal(0.0, config.noise.ram);
    double storage = kStorageBase + storage_slope * t +
                     rng.normal(0.0, config.noise.storage);
    double net = kHealthBase + rng.normal(0.0, config.noise.net);
    double serv = kHealthBase + rng.normal(0.0, config.noise.serv);

    if (cursor < episodes.size() && t >= episodes[cursor].t_start) {
      const EpisodeAnnotation& e = episodes[cursor];
      if (e.kind == EpisodeKind::imbalance_failure) {
        if (t < e.t_fail) {
          const double p = static_cast<double>(t - e.t_start) /
                           static_cast<double>(e.t_fail - e.t_start);
          cpu += kCpuRamp * p;
          ram -= kRamDrop * p;
          net += -kIntegrityTrend * p + rng.normal(0.0, kIntegritySigmaMax * p);
          serv += -kIntegrityTrend * p + rng.normal(0.0, kIntegritySigmaMax * p);
        } else if (t < e.t_end) {
          // Outage: service integrity collapses until the restart at t_end.
          net = kOutageLevel + rng.normal(0.0, config.noise.net);
          serv = kOutageLevel + rng.normal(0.0, config.noise.serv);
        }
      } else {
        const double edge = static_cast<double>(
            std::min({t - e.t_start, e.t_end - t, kBenignRampMinutes}));
        const double r = edge / static_cast<double>(kBenignRampMinutes);
        cpu += kBenignCpu * r;
        ram += kBenignRam * r;
      }
    }

    KpiSample& s = trace.samples[static_cast<std::size_t>(t)];
    s.t = t;
    s.cpu_pct = quantize(clip(cpu, 0.0, 100.0));
    s.ram_pct = quantize(clip(ram, 0.0, 100.0));
    s.storage_pct = quantize(clip(storage, 0.0, 100.0));
    s.net_conn = quantize(clip(net, 0.0, 1.0));
    s.serv_resp = quantize(clip(serv, 0.0, 1.0));
  }

  GenerationResult result;
  result.trace = std::move(trace);
  result.annotations.n_minutes = n;
  result.annotations.seed = config.seed;
  result.annotations.shortfall = shortfall;
  result.annotations.episodes = std::move(episodes);
  return result;
}

void export_trace(const TelemetryTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open trace file for writing: " + path);
  out << "t,cpu_pct,ram_pct,storage_pct,net_conn,serv_resp\n";
  char line[160];
  for (const KpiSample& s : trace.samples) {
    std::snprintf(line, sizeof(line), "%lld,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<long long>(s.t), s.cpu_pct, s.ram_pct,
                  s.storage_pct, s.net_conn, s.serv_resp);
    out << line;
  }
  if (!out) throw DataError("write failed: " + path);
}

TelemetryTrace import_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,cpu_pct,ram_pct,storage_pct,net_conn,serv_resp")
    throw DataError("bad trace header in " + path);

  TelemetryTrace trace;
  std::int64_t expected_t = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    KpiSample s;
    double t_val = 0;
    double* fields[6] = {&t_val,      &s.cpu_pct,  &s.ram_pct,
                         &s.storage_pct, &s.net_conn, &s.serv_resp};
    std::size_t pos = 0;
    for (int f = 0; f < 6; ++f) {
      const std::size_t next = line.find(',', pos);
      const std::string tok = line.substr(
          pos, next == std::string::npos ? std::string::npos : next - pos);
      try {
        *fields[f] = std::stod(tok);
      } catch (const std::exception&) {
        throw DataError("bad numeric field in trace row " +
                        std::to_string(expected_t));
      }
      if (f < 5) {
        if (next == std::string::npos)
          throw DataError("short trace row " + std::to_string(expected_t));
        pos = next + 1;
      }
    }
    s.t = static_cast<std::int64_t>(t_val);
    if (s.t != expected_t)
      throw DataError("trace minutes must be contiguous from 0; got " +
                      std::to_string(s.t) + " at row " +
                      std::to_string(expected_t));
    ++expected_t;
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw DataError("trace file has no rows: " + path);
  return trace;
}

void export_annotations(const AnnotationSet& annotations,
                        const std::string& path) {
  json eps = json::array();
  for (const EpisodeAnnotation& e : annotations.episodes) {
    json je{{"kind", to_string(e.kind)},
            {"t_start", e.t_start},
            {"t_end", e.t_end}};
    if (e.has_fail())
      je["t_fail"] = e.t_fail;
    else
      je["t_fail"] = nullptr;
    eps.push_back(std::move(je));
  }
  const json doc{{"n_minutes", annotations.n_minutes},
                 {"seed", annotations.seed},
                 {"episodes", std::move(eps)},
                 {"shortfall", annotations.shortfall}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open annotation file for writing: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

AnnotationSet import_annotations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open annotation file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DataError("bad annotation JSON in " + path + ": " + e.what());
  }
  AnnotationSet set;
  try {
    set.n_minutes = doc.at("n_minutes").get<std::int64_t>();
    set.seed = doc.at("seed").get<std::uint64_t>();
    set.shortfall = doc.value("shortfall", 0);
    for (const json& je : doc.at("episodes")) {
      EpisodeAnnotation e;
      e.kind = episode_kind_from_string(je.at("kind").get<std::string>());
      e.t_start = je.at("t_start").get<std::int64_t>();
      e.t_end = je.at("t_end").get<std::int64_t>();
      if (je.contains("t_fail") && !je.at("t_fail").is_null())
        e.t_fail = je.at("t_fail").get<std::int64_t>();
      else if (e.has_fail())
        throw DataError("imbalance episode missing t_fail");
      check_episode(e);
      set.episodes.push_back(e);
    }
  } catch (const json::exception& e) {
    throw DataError("bad annotation schema in " + path + ": " + e.what());
  }
  return set;
}

}  // namespace leaddrift

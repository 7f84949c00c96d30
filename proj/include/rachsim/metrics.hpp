#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace rachsim {

inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Nearest-rank percentile of a sorted sample; NaN when empty.
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNan;
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return kNan;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

struct DelayStats {
  double mean_ms = kNan;
  double p50_ms = kNan;
  double p95_ms = kNan;
  double p99_ms = kNan;
};

inline DelayStats delay_stats(std::vector<double> samples_ms) {
  DelayStats d;
  if (samples_ms.empty()) return d;
  std::sort(samples_ms.begin(), samples_ms.end());
  d.mean_ms = mean(samples_ms);
  d.p50_ms = percentile(samples_ms, 0.50);
  d.p95_ms = percentile(samples_ms, 0.95);
  d.p99_ms = percentile(samples_ms, 0.99);
  return d;
}

/// Per-run aggregate results. Fields outside a run mode's scope stay NaN /
/// zero and are emitted as empty CSV cells. See the metrics dictionary in
/// the README for definitions.
struct MetricsReport {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::string mode;

  // population accounting
  std::int64_t n_total = 0;
  std::int64_t activated = 0;   // access procedures started
  std::int64_t succeeded = 0;   // procedures that completed Msg4
  std::int64_t failed = 0;      // retry budget exhausted
  std::int64_t censored = 0;    // still in progress at the horizon

  // access metrics
  double success_prob = kNan;       // succeeded / (succeeded + failed)
  double success_prob_low = kNan;   // per priority class
  double success_prob_high = kNan;
  double collision_prob = kNan;     // collided preamble-opportunity pairs / used pairs
  DelayStats delay;                 // over successful procedures
  double msg1_mean = kNan;
  std::vector<std::int64_t> msg1_hist;  // index k = devices with k+1 transmissions

  // energy (resolved devices only)
  double energy_mean_mj = kNan;
  double energy_p95_mj = kNan;
  double energy_total_mj = 0.0;

  // small-data delivery (connected / cobalt modes)
  std::int64_t requests = 0;
  std::int64_t delivered = 0;
  std::int64_t delivery_exhausted = 0;
  double signaling_per_delivery = kNan;
  double energy_per_delivery_mj = kNan;
  double delivery_p95_ms = kNan;
  double delivery_mean_ms = kNan;

  // analytic-compare mode (contention-slot abstraction)
  double slots = kNan;                // opportunities processed
  double tagged_success_rate = kNan;  // successes / (slots * U), hold mode
  double drain_slots = kNan;          // slot index at which the backlog emptied
  double mean_delay_slots = kNan;     // mean per-device success slot, drain mode

  // kernel accounting
  std::uint64_t events_scheduled = 0;
  std::uint64_t events_processed = 0;

  // effective configuration (every applied default echoed here)
  std::map<std::string, std::string> config_echo;

  // backlog trace from MeasurementTick events, when enabled
  std::vector<std::pair<std::uint64_t, std::int64_t>> backlog_series;
};

}  // namespace rachsim

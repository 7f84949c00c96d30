#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rachsim/cobalt.hpp"
#include "rachsim/energy.hpp"
#include "rachsim/errors.hpp"
#include "rachsim/prach.hpp"
#include "rachsim/strings.hpp"
#include "rachsim/traffic.hpp"

namespace rachsim {

enum class RunMode { NetworkEntry, Connected, Cobalt, AnalyticCompare };

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::NetworkEntry: return "network_entry";
    case RunMode::Connected: return "connected";
    case RunMode::Cobalt: return "cobalt";
    case RunMode::AnalyticCompare: return "analytic_compare";
  }
  return "?";
}

constexpr std::uint64_t kDrainMarginSf = 50000;  // auto-duration slack after the burst

/// One complete run description: populations, protocol and energy
/// configuration, mode and horizon.
struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::uint64_t duration_sf = 0;  // 0 = derived from the traffic span
  RunMode mode = RunMode::NetworkEntry;
  bool trace = false;
  std::uint64_t measure_period_sf = 0;  // 0 = no backlog trace ticks
  bool hold_backlog = false;            // analytic_compare: successes rejoin the backlog

  std::vector<PopulationSpec> populations;
  PrachConfig prach;
  EabConfig eab;
  PowerModel power;
  DrxConfig drx;
  std::optional<CobaltConfig> cobalt;
  FrameConfig frame;

  std::int64_t total_devices() const {
    std::int64_t n = 0;
    for (const auto& p : populations) n += p.count;
    return n;
  }

  /// Longest one-shot activation window across non-empty populations, in ms.
  double traffic_span_ms() const {
    double span = 0.0;
    for (const auto& p : populations) {
      if (p.count > 0 && is_one_shot(p.traffic)) span = std::max(span, p.traffic.span_ms);
    }
    return span;
  }

  /// Effective horizon after auto-derivation.
  std::uint64_t effective_duration_sf() const {
    if (duration_sf > 0) return duration_sf;
    return static_cast<std::uint64_t>(std::ceil(traffic_span_ms())) + kDrainMarginSf;
  }

  std::map<std::string, std::string> echo() const;
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ValidationError(key, "expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

inline int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ValidationError(key, "expected an integer, got '" + value + "'");
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ValidationError(key, "expected a number, got '" + value + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = to_lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError(key, "expected a boolean, got '" + value + "'");
}

}  // namespace detail

/// Ordered key=value view of a scenario or sweep file. Later occurrences of
/// a key override earlier ones, which is how sweep/CLI overrides are merged.
using KvMap = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment, blank lines are
/// skipped. Keys are lower-cased; a line without '=' is a ParseError.
inline KvMap parse_kv_text(const std::string& text) {
  KvMap kv;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, "expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = to_lower(trim(stripped.substr(0, eq)));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (value.empty()) throw ParseError(line_no, "empty value for key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

namespace detail {

/// Shorthand keys accepted for single-population scenarios.
inline std::string canonical_key(const std::string& key) {
  if (key == "n") return "population.0.n";
  if (key == "class") return "population.0.class";
  if (key == "law") return "population.0.traffic.law";
  if (key == "span_ms" || key == "alpha" || key == "beta" || key == "rate_per_s" ||
      key == "period_ms" || key == "jitter_ms") {
    return "population.0.traffic." + key;
  }
  return key;
}

inline TrafficLaw parse_law(const std::string& key, const std::string& value) {
  const std::string v = to_lower(value);
  if (v == "uniform") return TrafficLaw::Uniform;
  if (v == "beta") return TrafficLaw::Beta;
  if (v == "poisson") return TrafficLaw::Poisson;
  if (v == "periodic") return TrafficLaw::Periodic;
  throw ValidationError(key, "unknown traffic law '" + value + "'");
}

inline PriorityClass parse_class(const std::string& key, const std::string& value) {
  const std::string v = to_lower(value);
  if (v == "low") return PriorityClass::LowPriority;
  if (v == "high") return PriorityClass::HighPriority;
  throw ValidationError(key, "unknown priority class '" + value + "'");
}

inline RunMode parse_mode(const std::string& key, const std::string& value) {
  const std::string v = to_lower(value);
  if (v == "network_entry") return RunMode::NetworkEntry;
  if (v == "connected") return RunMode::Connected;
  if (v == "cobalt") return RunMode::Cobalt;
  if (v == "analytic_compare") return RunMode::AnalyticCompare;
  throw ValidationError(key, "unknown mode '" + value + "'");
}

}  // namespace detail

/// Builds and validates a Scenario from parsed key=value pairs, applying
/// documented defaults for everything absent.
inline Scenario build_scenario(const KvMap& raw_kv) {
  // canonicalize shorthand keys
  KvMap kv;
  for (const auto& [k, v] : raw_kv) kv[detail::canonical_key(k)] = v;

  Scenario sc;
  bool cobalt_enabled = kv.count("mode") && to_lower(kv.at("mode")) == "cobalt";
  CobaltConfig cobalt_cfg;

  int max_pop_index = -1;
  for (const auto& [key, value] : kv) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_u64;

    if (key == "name") { sc.name = value; continue; }
    if (key == "seed") { sc.seed = parse_u64(key, value); continue; }
    if (key == "duration_sf") { sc.duration_sf = parse_u64(key, value); continue; }
    if (key == "mode") { sc.mode = detail::parse_mode(key, value); continue; }
    if (key == "trace") { sc.trace = parse_bool(key, value); continue; }
    if (key == "measure_period_sf") { sc.measure_period_sf = parse_u64(key, value); continue; }
    if (key == "analytic.hold_backlog") { sc.hold_backlog = parse_bool(key, value); continue; }

    if (key.rfind("population.", 0) == 0) {
      const auto parts = split(key, '.');
      if (parts.size() < 3) throw ValidationError(key, "malformed population key");
      int idx = parse_int(key, parts[1]);
      if (idx < 0 || idx > 255) throw ValidationError(key, "population index out of range");
      if (idx >= static_cast<int>(sc.populations.size())) {
        sc.populations.resize(static_cast<std::size_t>(idx) + 1);
      }
      max_pop_index = std::max(max_pop_index, idx);
      auto& pop = sc.populations[static_cast<std::size_t>(idx)];
      const std::string field = key.substr(key.find('.', 11) + 1);
      if (field == "n") {
        pop.count = parse_int(key, value);
        if (pop.count < 0) throw ValidationError(key, "population size must be >= 0");
      } else if (field == "class") {
        pop.cls = detail::parse_class(key, value);
      } else if (field == "traffic.law") {
        pop.traffic.law = detail::parse_law(key, value);
      } else if (field == "traffic.span_ms") {
        pop.traffic.span_ms = parse_double(key, value);
        if (!(pop.traffic.span_ms > 0)) throw ValidationError(key, "span_ms must be > 0");
      } else if (field == "traffic.alpha") {
        pop.traffic.alpha = parse_double(key, value);
        if (!(pop.traffic.alpha > 0)) throw ValidationError(key, "alpha must be > 0");
      } else if (field == "traffic.beta") {
        pop.traffic.beta = parse_double(key, value);
        if (!(pop.traffic.beta > 0)) throw ValidationError(key, "beta must be > 0");
      } else if (field == "traffic.rate_per_s") {
        pop.traffic.rate_per_s = parse_double(key, value);
        if (!(pop.traffic.rate_per_s > 0)) throw ValidationError(key, "rate_per_s must be > 0");
      } else if (field == "traffic.period_ms") {
        pop.traffic.period_ms = parse_u64(key, value);
        if (pop.traffic.period_ms == 0) throw ValidationError(key, "period_ms must be > 0");
      } else if (field == "traffic.jitter_ms") {
        pop.traffic.jitter_ms = parse_u64(key, value);
      } else {
        throw ValidationError(key, "unknown configuration key");
      }
      continue;
    }

    if (key.rfind("prach.", 0) == 0) {
      auto& p = sc.prach;
      const std::string f = key.substr(6);
      if (f == "num_preambles") p.num_preambles = parse_int(key, value);
      else if (f == "period_sf") p.period_sf = parse_int(key, value);
      else if (f == "backoff_indicator_ms") p.backoff_indicator_ms = parse_int(key, value);
      else if (f == "pre_backoff_ms") p.pre_backoff_ms = parse_int(key, value);
      else if (f == "max_preamble_tx") p.max_preamble_tx = parse_int(key, value);
      else if (f == "rar_window_sf") p.rar_window_sf = parse_int(key, value);
      else if (f == "msg2_to_msg3_delay_sf") p.msg2_to_msg3_delay_sf = parse_int(key, value);
      else if (f == "msg4_delay_sf") p.msg4_delay_sf = parse_int(key, value);
      else if (f == "contention_resolution_timer_sf") p.contention_resolution_timer_sf = parse_int(key, value);
      else if (f == "power_ramping_step_db") p.power_ramping_step_db = parse_double(key, value);
      else if (f == "preamble_initial_power_dbm") p.preamble_initial_power_dbm = parse_double(key, value);
      else if (f == "detection_model") {
        const std::string v = to_lower(value);
        if (v == "ramping_exponential") p.detection_model = DetectionModel::RampingExponential;
        else if (v == "always_detected") p.detection_model = DetectionModel::AlwaysDetected;
        else throw ValidationError(key, "unknown detection model '" + value + "'");
      } else if (f == "collision_model") {
        const std::string v = to_lower(value);
        if (v == "collide_at_msg3") p.collision_model = CollisionModel::CollideAtMsg3;
        else if (v == "destroyed_at_msg1") p.collision_model = CollisionModel::DestroyedAtMsg1;
        else throw ValidationError(key, "unknown collision model '" + value + "'");
      } else if (f == "retx_mode") {
        const std::string v = to_lower(value);
        if (v == "off") p.retx_mode = RetxMode::Off;
        else if (v == "fixed") p.retx_mode = RetxMode::FixedP;
        else if (v == "broadcast") p.retx_mode = RetxMode::Broadcast;
        else if (v == "local") p.retx_mode = RetxMode::LocalStatic;
        else throw ValidationError(key, "unknown retx mode '" + value + "'");
      } else if (f == "msg1_retx_probability") {
        p.msg1_retx_probability = parse_double(key, value);
        if (!(p.msg1_retx_probability > 0.0 && p.msg1_retx_probability <= 1.0)) {
          throw ValidationError(key, "must be in (0, 1]");
        }
      } else if (f == "local_backlog_estimate") {
        p.local_backlog_estimate = parse_double(key, value);
        if (p.local_backlog_estimate < 0) throw ValidationError(key, "must be >= 0");
      } else if (f == "rar_grant_capacity") {
        if (to_lower(value) == "unlimited") p.rar_grant_capacity.reset();
        else {
          p.rar_grant_capacity = parse_int(key, value);
          if (*p.rar_grant_capacity < 1) throw ValidationError(key, "must be >= 1 or 'unlimited'");
        }
      } else if (f == "preamble_split") {
        p.preamble_split = parse_int(key, value);
      } else {
        throw ValidationError(key, "unknown configuration key");
      }
      continue;
    }

    if (key.rfind("eab.", 0) == 0) {
      auto& e = sc.eab;
      const std::string f = key.substr(4);
      if (f == "enabled") e.enabled = parse_bool(key, value);
      else if (f == "barring_factor") {
        e.barring_factor = parse_double(key, value);
        if (!(e.barring_factor >= 0.0 && e.barring_factor <= 1.0)) {
          throw ValidationError(key, "must be in [0, 1]");
        }
      } else if (f == "barring_time_ms") {
        e.barring_time_ms = parse_int(key, value);
        if (e.barring_time_ms < 1) throw ValidationError(key, "must be >= 1");
      } else if (f == "applies_to") {
        const std::string v = to_lower(value);
        e.applies_to_low = v.find("low") != std::string::npos;
        e.applies_to_high = v.find("high") != std::string::npos;
        if (v != "none" && !e.applies_to_low && !e.applies_to_high) {
          throw ValidationError(key, "expected none, low, high or low,high");
        }
      } else {
        throw ValidationError(key, "unknown configuration key");
      }
      continue;
    }

    if (key.rfind("power.", 0) == 0) {
      auto& pm = sc.power;
      const std::string f = key.substr(6);
      double* target = nullptr;
      if (f == "inactive_mw") target = &pm.inactive_mw;
      else if (f == "idle_mw") target = &pm.idle_mw;
      else if (f == "rx_mw") target = &pm.rx_mw;
      else if (f == "tx_base_mw") target = &pm.tx_base_mw;
      else if (f == "max_tx_power_dbm") target = &pm.max_tx_power_dbm;
      else throw ValidationError(key, "unknown configuration key");
      *target = parse_double(key, value);
      if (f != "max_tx_power_dbm" && *target < 0) throw ValidationError(key, "must be >= 0");
      continue;
    }

    if (key.rfind("drx.", 0) == 0) {
      auto& d = sc.drx;
      const std::string f = key.substr(4);
      if (f == "enabled") d.enabled = parse_bool(key, value);
      else if (f == "paging_cycle_ms") d.paging_cycle_ms = parse_u64(key, value);
      else if (f == "on_duration_ms") d.on_duration_ms = parse_u64(key, value);
      else if (f == "wakeup_overhead_mj") {
        d.wakeup_overhead_mj = parse_double(key, value);
        if (d.wakeup_overhead_mj < 0) throw ValidationError(key, "must be >= 0");
      } else throw ValidationError(key, "unknown configuration key");
      continue;
    }

    if (key.rfind("cobalt.", 0) == 0) {
      auto& c = cobalt_cfg;
      const std::string f = key.substr(7);
      if (f == "enabled") cobalt_enabled = parse_bool(key, value);
      else if (f == "region_rbs_per_tti") c.region_rbs_per_tti = parse_int(key, value);
      else if (f == "tti_period_sf") c.tti_period_sf = parse_int(key, value);
      else if (f == "max_retries") c.max_retries = parse_int(key, value);
      else if (f == "retry_backoff_ms") c.retry_backoff_ms = parse_int(key, value);
      else if (f == "payload_fits_one_rb") c.payload_fits_one_rb = parse_bool(key, value);
      else if (f == "fallback_to_rach") c.fallback_to_rach = parse_bool(key, value);
      else throw ValidationError(key, "unknown configuration key");
      continue;
    }

    if (key.rfind("frame.", 0) == 0) {
      auto& fr = sc.frame;
      const std::string f = key.substr(6);
      if (f == "bandwidth_rbs") fr.bandwidth_rbs = parse_int(key, value);
      else if (f == "pucch_edge_rbs") fr.pucch_edge_rbs = parse_int(key, value);
      else throw ValidationError(key, "unknown configuration key");
      continue;
    }

    throw ValidationError(key, "unknown configuration key");
  }

  if (sc.populations.empty()) sc.populations.push_back(PopulationSpec{});
  for (std::size_t i = 0; i < sc.populations.size(); ++i) {
    try {
      validate(sc.populations[i].traffic);
    } catch (const Error& e) {
      throw ValidationError("population." + std::to_string(i) + ".traffic", e.what());
    }
  }
  if (cobalt_enabled) sc.cobalt = cobalt_cfg;

  // cross-field checks
  try {
    validate(sc.prach);
  } catch (const Error& e) {
    throw ValidationError("prach", e.what());
  }
  try {
    validate(sc.eab);
  } catch (const Error& e) {
    throw ValidationError("eab", e.what());
  }
  try {
    validate(sc.drx);
  } catch (const Error& e) {
    throw ValidationError("drx", e.what());
  }
  if (sc.cobalt) {
    try {
      validate(*sc.cobalt);
      (void)build_frame_map(sc.frame, sc.prach, &*sc.cobalt);
    } catch (const Error& e) {
      throw ValidationError("cobalt", e.what());
    }
  }
  if (sc.mode == RunMode::Cobalt && !sc.cobalt) {
    throw ValidationError("cobalt.enabled", "mode=cobalt requires the COBALT region");
  }
  const double span = sc.traffic_span_ms();
  if (sc.duration_sf > 0 && static_cast<double>(sc.duration_sf) < span) {
    throw ValidationError("duration_sf", "horizon does not cover the traffic span of " +
                                             format_double(span) + " ms");
  }
  if (sc.duration_sf == 0) {
    bool recurring = false;
    for (const auto& p : sc.populations) recurring = recurring || !is_one_shot(p.traffic);
    if (recurring) {
      throw ValidationError("duration_sf", "recurring traffic laws need an explicit horizon");
    }
  }
  return sc;
}

inline Scenario parse_scenario(const std::string& text) { return build_scenario(parse_kv_text(text)); }

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

/// Canonical serialization of every effective parameter. Feeding this map
/// back through build_scenario reproduces the identical scenario, which is
/// the audit path for report headers.
inline std::map<std::string, std::string> Scenario::echo() const {
  std::map<std::string, std::string> kv;
  kv["name"] = name;
  kv["seed"] = std::to_string(seed);
  kv["duration_sf"] = std::to_string(effective_duration_sf());
  kv["mode"] = to_string(mode);
  kv["trace"] = trace ? "true" : "false";
  kv["measure_period_sf"] = std::to_string(measure_period_sf);
  kv["analytic.hold_backlog"] = hold_backlog ? "true" : "false";
  for (std::size_t i = 0; i < populations.size(); ++i) {
    const auto& p = populations[i];
    const std::string pre = "population." + std::to_string(i) + ".";
    kv[pre + "class"] = to_string(p.cls);
    kv[pre + "n"] = std::to_string(p.count);
    const char* law = p.traffic.law == TrafficLaw::Uniform    ? "uniform"
                      : p.traffic.law == TrafficLaw::Beta     ? "beta"
                      : p.traffic.law == TrafficLaw::Poisson  ? "poisson"
                                                              : "periodic";
    kv[pre + "traffic.law"] = law;
    kv[pre + "traffic.span_ms"] = format_double(p.traffic.span_ms);
    kv[pre + "traffic.alpha"] = format_double(p.traffic.alpha);
    kv[pre + "traffic.beta"] = format_double(p.traffic.beta);
    kv[pre + "traffic.rate_per_s"] = format_double(p.traffic.rate_per_s);
    kv[pre + "traffic.period_ms"] = std::to_string(p.traffic.period_ms);
    kv[pre + "traffic.jitter_ms"] = std::to_string(p.traffic.jitter_ms);
  }
  kv["prach.num_preambles"] = std::to_string(prach.num_preambles);
  kv["prach.period_sf"] = std::to_string(prach.period_sf);
  kv["prach.backoff_indicator_ms"] = std::to_string(prach.backoff_indicator_ms);
  kv["prach.pre_backoff_ms"] = std::to_string(prach.pre_backoff_ms);
  kv["prach.max_preamble_tx"] = std::to_string(prach.max_preamble_tx);
  kv["prach.rar_window_sf"] = std::to_string(prach.rar_window_sf);
  kv["prach.msg2_to_msg3_delay_sf"] = std::to_string(prach.msg2_to_msg3_delay_sf);
  kv["prach.msg4_delay_sf"] = std::to_string(prach.msg4_delay_sf);
  kv["prach.contention_resolution_timer_sf"] = std::to_string(prach.contention_resolution_timer_sf);
  kv["prach.power_ramping_step_db"] = format_double(prach.power_ramping_step_db);
  kv["prach.preamble_initial_power_dbm"] = format_double(prach.preamble_initial_power_dbm);
  kv["prach.detection_model"] = prach.detection_model == DetectionModel::RampingExponential
                                    ? "ramping_exponential"
                                    : "always_detected";
  kv["prach.collision_model"] = prach.collision_model == CollisionModel::CollideAtMsg3
                                    ? "collide_at_msg3"
                                    : "destroyed_at_msg1";
  kv["prach.retx_mode"] = prach.retx_mode == RetxMode::Off         ? "off"
                          : prach.retx_mode == RetxMode::FixedP    ? "fixed"
                          : prach.retx_mode == RetxMode::Broadcast ? "broadcast"
                                                                   : "local";
  kv["prach.msg1_retx_probability"] = format_double(prach.msg1_retx_probability);
  kv["prach.local_backlog_estimate"] = format_double(prach.local_backlog_estimate);
  kv["prach.rar_grant_capacity"] =
      prach.rar_grant_capacity ? std::to_string(*prach.rar_grant_capacity) : "unlimited";
  kv["prach.preamble_split"] = std::to_string(prach.preamble_split);
  kv["eab.enabled"] = eab.enabled ? "true" : "false";
  kv["eab.barring_factor"] = format_double(eab.barring_factor);
  kv["eab.barring_time_ms"] = std::to_string(eab.barring_time_ms);
  kv["eab.applies_to"] = eab.applies_to_low && eab.applies_to_high ? "low,high"
                         : eab.applies_to_low                      ? "low"
                         : eab.applies_to_high                     ? "high"
                                                                   : "none";
  kv["power.inactive_mw"] = format_double(power.inactive_mw);
  kv["power.idle_mw"] = format_double(power.idle_mw);
  kv["power.rx_mw"] = format_double(power.rx_mw);
  kv["power.tx_base_mw"] = format_double(power.tx_base_mw);
  kv["power.max_tx_power_dbm"] = format_double(power.max_tx_power_dbm);
  kv["drx.enabled"] = drx.enabled ? "true" : "false";
  kv["drx.paging_cycle_ms"] = std::to_string(drx.paging_cycle_ms);
  kv["drx.on_duration_ms"] = std::to_string(drx.on_duration_ms);
  kv["drx.wakeup_overhead_mj"] = format_double(drx.wakeup_overhead_mj);
  kv["cobalt.enabled"] = cobalt ? "true" : "false";
  if (cobalt) {
    kv["cobalt.region_rbs_per_tti"] = std::to_string(cobalt->region_rbs_per_tti);
    kv["cobalt.tti_period_sf"] = std::to_string(cobalt->tti_period_sf);
    kv["cobalt.max_retries"] = std::to_string(cobalt->max_retries);
    kv["cobalt.retry_backoff_ms"] = std::to_string(cobalt->retry_backoff_ms);
    kv["cobalt.payload_fits_one_rb"] = cobalt->payload_fits_one_rb ? "true" : "false";
    kv["cobalt.fallback_to_rach"] = cobalt->fallback_to_rach ? "true" : "false";
  }
  kv["frame.bandwidth_rbs"] = std::to_string(frame.bandwidth_rbs);
  kv["frame.pucch_edge_rbs"] = std::to_string(frame.pucch_edge_rbs);
  return kv;
}

}  // namespace rachsim

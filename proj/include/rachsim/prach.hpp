#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "rachsim/energy.hpp"
#include "rachsim/errors.hpp"
#include "rachsim/rng.hpp"
#include "rachsim/time.hpp"
#include "rachsim/traffic.hpp"

namespace rachsim {

enum class DetectionModel { RampingExponential, AlwaysDetected };
enum class CollisionModel { CollideAtMsg3, DestroyedAtMsg1 };

/// Msg1 transmission gating when a persistent-probability controller is on.
/// Off        - plain backoff-driven retries (standard LTE behaviour).
/// FixedP     - transmit with a fixed probability p each opportunity.
/// Broadcast  - eNB broadcasts p = min(1, M / current backlog).
/// LocalStatic- devices use min(1, M / U_est) with a static local estimate.
enum class RetxMode { Off, FixedP, Broadcast, LocalStatic };

/// All random-access parameters of the cell. Defaults follow the common
/// 3GPP evaluation setup for machine-type overload studies (54 contention
/// preambles, PRACH every 5 subframes, up to 10 preamble transmissions,
/// detection ramping 1 - e^-n); every field is overridable from a scenario.
struct PrachConfig {
  int num_preambles = 54;              // M
  int period_sf = 5;                   // subframes between RACH opportunities
  int backoff_indicator_ms = 20;       // BI: retry delay uniform in [0, BI]
  int pre_backoff_ms = 0;              // initial delay uniform in [0, pre_backoff]
  int max_preamble_tx = 10;
  int rar_window_sf = 5;
  int msg2_to_msg3_delay_sf = 5;
  int msg4_delay_sf = 4;               // eNB turnaround for the winner's Msg4
  int contention_resolution_timer_sf = 48;
  double power_ramping_step_db = 2.0;
  double preamble_initial_power_dbm = 10.0;
  DetectionModel detection_model = DetectionModel::RampingExponential;
  CollisionModel collision_model = CollisionModel::CollideAtMsg3;
  RetxMode retx_mode = RetxMode::Off;
  double msg1_retx_probability = 1.0;  // used by FixedP
  double local_backlog_estimate = 0.0; // LocalStatic; 0 = population size
  std::optional<int> rar_grant_capacity;  // per opportunity; nullopt = unlimited
  int preamble_split = 0;  // preambles [0, split) reserved for high priority
};

inline void validate(const PrachConfig& c) {
  if (c.num_preambles < 1) throw_error(ErrorKind::InvalidConfig, "num_preambles must be >= 1");
  if (c.period_sf < 1) throw_error(ErrorKind::InvalidConfig, "period_sf must be >= 1");
  if (c.backoff_indicator_ms < 0) throw_error(ErrorKind::InvalidConfig, "backoff_indicator_ms must be >= 0");
  if (c.pre_backoff_ms < 0) throw_error(ErrorKind::InvalidConfig, "pre_backoff_ms must be >= 0");
  if (c.max_preamble_tx < 1) throw_error(ErrorKind::InvalidConfig, "max_preamble_tx must be >= 1");
  if (c.rar_window_sf < 1) throw_error(ErrorKind::InvalidConfig, "rar_window_sf must be >= 1");
  if (c.msg2_to_msg3_delay_sf < 1) throw_error(ErrorKind::InvalidConfig, "msg2_to_msg3_delay_sf must be >= 1");
  if (c.msg4_delay_sf < 1) throw_error(ErrorKind::InvalidConfig, "msg4_delay_sf must be >= 1");
  if (c.contention_resolution_timer_sf < 1) {
    throw_error(ErrorKind::InvalidConfig, "contention_resolution_timer_sf must be >= 1");
  }
  if (c.power_ramping_step_db < 0.0) throw_error(ErrorKind::InvalidConfig, "power_ramping_step_db must be >= 0");
  if (c.retx_mode == RetxMode::FixedP &&
      !(c.msg1_retx_probability > 0.0 && c.msg1_retx_probability <= 1.0)) {
    throw_error(ErrorKind::InvalidConfig, "msg1_retx_probability must be in (0, 1]");
  }
  if (c.rar_grant_capacity && *c.rar_grant_capacity < 1) {
    throw_error(ErrorKind::InvalidConfig, "rar_grant_capacity must be >= 1");
  }
  if (c.preamble_split != 0 && (c.preamble_split < 1 || c.preamble_split >= c.num_preambles)) {
    throw_error(ErrorKind::InvalidConfig, "preamble_split must be 0 or in [1, num_preambles)");
  }
}

/// Enhanced-access-barring style admission gate applied to the first Msg1
/// of an access procedure.
struct EabConfig {
  bool enabled = false;
  double barring_factor = 0.5;  // probability an attempt is admitted
  int barring_time_ms = 4000;
  bool applies_to_low = true;
  bool applies_to_high = false;
};

inline void validate(const EabConfig& c) {
  if (!(c.barring_factor >= 0.0 && c.barring_factor <= 1.0)) {
    throw_error(ErrorKind::InvalidConfig, "barring_factor must be in [0, 1]");
  }
  if (c.barring_time_ms < 1) throw_error(ErrorKind::InvalidConfig, "barring_time_ms must be >= 1");
}

enum class DeviceState : std::uint8_t {
  Inactive,
  Barred,
  PreBackoff,
  AwaitingOpportunity,
  WaitingRar,
  SendingMsg3,
  WaitingMsg4,
  Succeeded,
  Failed,
};

inline const char* to_string(DeviceState s) {
  switch (s) {
    case DeviceState::Inactive: return "inactive";
    case DeviceState::Barred: return "barred";
    case DeviceState::PreBackoff: return "pre_backoff";
    case DeviceState::AwaitingOpportunity: return "awaiting_opportunity";
    case DeviceState::WaitingRar: return "waiting_rar";
    case DeviceState::SendingMsg3: return "sending_msg3";
    case DeviceState::WaitingMsg4: return "waiting_msg4";
    case DeviceState::Succeeded: return "succeeded";
    case DeviceState::Failed: return "failed";
  }
  return "?";
}

/// One M2M terminal: protocol state, attempt counters, energy ledger and
/// its private random stream.
struct Device {
  std::int32_t id = 0;
  PriorityClass cls = PriorityClass::LowPriority;
  DeviceState state = DeviceState::Inactive;
  int attempt_n = 0;        // Msg1 transmissions in the current procedure
  int chosen_preamble = -1; // valid in WaitingRar/SendingMsg3/WaitingMsg4
  bool collided = false;    // current preamble shared with another device
  std::optional<SimTime> backoff_until;
  SimTime activation_time;
  std::optional<SimTime> success_time;
  bool eab_cleared = false;
  bool eab_was_barred = false;

  int msg_count = 0;   // protocol messages in the current delivery
  int total_msg1 = 0;  // lifetime Msg1 count

  // small-data bookkeeping (connected / cobalt modes)
  bool has_pending_data = false;
  int cobalt_attempts = 0;
  std::int64_t deliveries = 0;
  SimTime request_time;
  double energy_at_request = 0.0;
  std::optional<SimTime> deferred_arrival;  // arrival that landed mid-procedure

  EnergyLedger ledger;
  SimTime accrued_until;       // energy accounted up to here
  RadioState bg_state = RadioState::Inactive;  // draw between protocol bursts

  RngStream rng;
};

struct EabDecision {
  bool admitted = true;
  int barred_for_ms = 0;
};

/// Admission gate for the first Msg1 of an access procedure. A barred device
/// re-draws after barring_time * (0.7 + 0.6u) ms, the standard ACB formula.
inline EabDecision eab_gate(const Device& device, const EabConfig& cfg, RngStream& stream) {
  const bool in_scope = cfg.enabled && ((device.cls == PriorityClass::LowPriority && cfg.applies_to_low) ||
                                        (device.cls == PriorityClass::HighPriority && cfg.applies_to_high));
  if (!in_scope) return {true, 0};
  if (stream.uniform_real() < cfg.barring_factor) return {true, 0};
  const double wait_ms = cfg.barring_time_ms * (0.7 + 0.6 * stream.uniform_real());
  return {false, static_cast<int>(std::llround(wait_ms))};
}

/// Uniform preamble choice over [lo, hi).
inline int select_preamble(int lo, int hi, RngStream& stream) {
  if (hi <= lo) throw_error(ErrorKind::ZeroRange, "empty preamble pool");
  return lo + static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(hi - lo)));
}

inline int select_preamble(int num_preambles, RngStream& stream) {
  return select_preamble(0, num_preambles, stream);
}

/// Preamble pool for a device class under optional pool partitioning.
inline std::pair<int, int> preamble_pool(const PrachConfig& cfg, PriorityClass cls) {
  if (cfg.preamble_split <= 0) return {0, cfg.num_preambles};
  if (cls == PriorityClass::HighPriority) return {0, cfg.preamble_split};
  return {cfg.preamble_split, cfg.num_preambles};
}

/// Msg1 transmit power after ramping, before the power-model cap.
inline double msg1_tx_power_dbm(const PrachConfig& cfg, int attempt_n) {
  return cfg.preamble_initial_power_dbm + (attempt_n - 1) * cfg.power_ramping_step_db;
}

/// Detection probability of a singleton preamble on its n-th transmission.
inline double detection_probability(const PrachConfig& cfg, int attempt_n) {
  if (cfg.detection_model == DetectionModel::AlwaysDetected) return 1.0;
  return 1.0 - std::exp(-static_cast<double>(attempt_n));
}

/// Persistent-probability gate: true means transmit at this opportunity.
inline bool msg1_retx_decision(const PrachConfig& cfg, RngStream& stream) {
  if (cfg.retx_mode != RetxMode::FixedP) {
    throw_error(ErrorKind::ModeNotEnabled, "msg1_retx_decision requires retx_mode=fixed");
  }
  return stream.uniform_real() < cfg.msg1_retx_probability;
}

struct Msg1Tx {
  std::int32_t device_id = -1;
  int preamble = 0;
  int attempt_n = 1;
};

enum class OpportunityOutcome { RarGranted, NotDetected, CollisionDestroyed };

struct OutcomeRec {
  OpportunityOutcome outcome = OpportunityOutcome::NotDetected;
  bool collided = false;
};

/// eNB side of one RACH opportunity. Singleton preambles are detected with
/// the configured ramping probability and granted a RAR subject to the grant
/// capacity (grants issued in preamble order; overflow behaves like a missed
/// detection). Preambles picked by two or more devices either all receive a
/// RAR (CollideAtMsg3 - the clash surfaces at contention resolution) or are
/// all destroyed on the spot (DestroyedAtMsg1).
inline std::vector<OutcomeRec> enb_process_opportunity(const std::vector<Msg1Tx>& transmissions,
                                                       const PrachConfig& cfg, RngStream& stream) {
  std::vector<int> occupancy(static_cast<std::size_t>(cfg.num_preambles), 0);
  std::vector<int> lone_attempt(static_cast<std::size_t>(cfg.num_preambles), 1);
  for (const auto& tx : transmissions) {
    if (tx.preamble < 0 || tx.preamble >= cfg.num_preambles) {
      throw_error(ErrorKind::InvalidPreamble, "preamble " + std::to_string(tx.preamble) +
                                                  " outside pool of " +
                                                  std::to_string(cfg.num_preambles));
    }
    ++occupancy[static_cast<std::size_t>(tx.preamble)];
    lone_attempt[static_cast<std::size_t>(tx.preamble)] = tx.attempt_n;
  }

  // Detection draws happen once per transmitted preamble, in preamble order,
  // so outcomes do not depend on the order devices were aggregated in.
  std::vector<std::int8_t> preamble_state(static_cast<std::size_t>(cfg.num_preambles), 0);
  int grants_left = cfg.rar_grant_capacity ? *cfg.rar_grant_capacity : -1;
  for (int pre = 0; pre < cfg.num_preambles; ++pre) {
    const int users = occupancy[static_cast<std::size_t>(pre)];
    if (users == 0) continue;
    if (users >= 2) {
      if (cfg.collision_model == CollisionModel::DestroyedAtMsg1) {
        preamble_state[static_cast<std::size_t>(pre)] = 3;  // destroyed
        continue;
      }
      if (grants_left == 0) {
        preamble_state[static_cast<std::size_t>(pre)] = 2;  // no grant slot
        continue;
      }
      if (grants_left > 0) --grants_left;
      preamble_state[static_cast<std::size_t>(pre)] = 1;  // granted, will collide at Msg3/Msg4
      continue;
    }
    // singleton: the lone transmitter's attempt number governs ramping gain
    bool detected = true;
    if (cfg.detection_model == DetectionModel::RampingExponential) {
      detected = stream.uniform_real() <
                 detection_probability(cfg, lone_attempt[static_cast<std::size_t>(pre)]);
    }
    if (!detected) {
      preamble_state[static_cast<std::size_t>(pre)] = 2;
      continue;
    }
    if (grants_left == 0) {
      preamble_state[static_cast<std::size_t>(pre)] = 2;
      continue;
    }
    if (grants_left > 0) --grants_left;
    preamble_state[static_cast<std::size_t>(pre)] = 1;
  }

  std::vector<OutcomeRec> out(transmissions.size());
  for (std::size_t i = 0; i < transmissions.size(); ++i) {
    const int pre = transmissions[i].preamble;
    const bool collided = occupancy[static_cast<std::size_t>(pre)] >= 2;
    switch (preamble_state[static_cast<std::size_t>(pre)]) {
      case 1: out[i] = {OpportunityOutcome::RarGranted, collided}; break;
      case 2: out[i] = {OpportunityOutcome::NotDetected, collided}; break;
      case 3: out[i] = {OpportunityOutcome::CollisionDestroyed, collided}; break;
      default: out[i] = {OpportunityOutcome::NotDetected, collided}; break;
    }
  }
  return out;
}

}  // namespace rachsim

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rachsim/errors.hpp"
#include "rachsim/time.hpp"

namespace rachsim {

enum class RadioState : std::uint8_t { Inactive = 0, Idle = 1, Rx = 2, Tx = 3 };

inline const char* to_string(RadioState s) {
  switch (s) {
    case RadioState::Inactive: return "inactive";
    case RadioState::Idle: return "idle";
    case RadioState::Rx: return "rx";
    case RadioState::Tx: return "tx";
  }
  return "?";
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

/// Four-level device power model. Transmit draw is a circuit baseline plus
/// the radiated power converted to mW, capped at max_tx_power_dbm.
/// Absolute numbers are illustrative defaults; result claims built on them
/// are ratio-based.
struct PowerModel {
  double inactive_mw = 0.01;  // deep sleep
  double idle_mw = 1.0;       // synchronized, not receiving
  double rx_mw = 50.0;
  double tx_base_mw = 50.0;
  double max_tx_power_dbm = 23.0;  // LTE UE power class 3

  double tx_total_mw(double tx_power_dbm) const {
    return tx_base_mw + dbm_to_mw(std::min(tx_power_dbm, max_tx_power_dbm));
  }

  double draw_mw(RadioState s, double tx_power_dbm = 0.0) const {
    switch (s) {
      case RadioState::Inactive: return inactive_mw;
      case RadioState::Idle: return idle_mw;
      case RadioState::Rx: return rx_mw;
      case RadioState::Tx: return tx_total_mw(tx_power_dbm);
    }
    return 0.0;
  }
};

/// Returns warning strings for suspicious (but accepted) configurations.
inline std::vector<std::string> power_model_warnings(const PowerModel& p) {
  std::vector<std::string> w;
  if (!(p.inactive_mw <= p.idle_mw && p.idle_mw <= p.rx_mw && p.rx_mw <= p.tx_base_mw)) {
    w.push_back("power levels are not ordered inactive <= idle <= rx <= tx_base");
  }
  return w;
}

/// Idle-mode DRX structure: the receiver wakes for on_duration_ms at the
/// start of every paging cycle and deep-sleeps in between.
struct DrxConfig {
  bool enabled = false;
  std::uint64_t paging_cycle_ms = 2560;
  std::uint64_t on_duration_ms = 40;
  double wakeup_overhead_mj = 0.0;  // per sleep->on transition
};

inline void validate(const DrxConfig& d) {
  if (d.paging_cycle_ms == 0) throw_error(ErrorKind::InvalidConfig, "paging_cycle_ms must be > 0");
  if (d.on_duration_ms == 0) throw_error(ErrorKind::InvalidConfig, "on_duration_ms must be > 0");
  if (d.on_duration_ms > d.paging_cycle_ms) {
    throw_error(ErrorKind::InvalidConfig, "on_duration_ms must not exceed paging_cycle_ms");
  }
}

struct EnergyTraceEntry {
  SimTime at;
  RadioState state;
  double duration_ms;
  double energy_mj;
};

/// Per-device energy ledger, milli-joules accumulated per radio state.
struct EnergyLedger {
  std::array<double, 4> by_state_mj{};
  double wakeup_mj = 0.0;
  bool tracing = false;
  std::vector<EnergyTraceEntry> trace;

  double total_mj() const {
    return by_state_mj[0] + by_state_mj[1] + by_state_mj[2] + by_state_mj[3] + wakeup_mj;
  }
};

/// Charges `duration_ms` spent in `state`; Tx uses the (ramped) power given.
inline void accrue(EnergyLedger& ledger, const PowerModel& power, RadioState state,
                   double duration_ms, double tx_power_dbm = 0.0, SimTime at = kRunStart) {
  if (duration_ms < 0.0) throw_error(ErrorKind::NegativeDuration, "accrue duration must be >= 0");
  if (duration_ms == 0.0) return;
  const double mj = power.draw_mw(state, tx_power_dbm) * duration_ms / 1000.0;
  ledger.by_state_mj[static_cast<std::size_t>(state)] += mj;
  if (ledger.tracing) ledger.trace.push_back({at, state, duration_ms, mj});
}

/// Closed-form idle-period energy over `horizon_ms` of DRX cycling:
/// full cycles cost on*rx + (cycle-on)*inactive + wakeup overhead, plus the
/// clipped partial cycle at the end. This mirrors exactly what the simulator
/// accrues for an idle device, so the two routes are comparable.
inline double idle_cycle_energy(const DrxConfig& drx, const PowerModel& power, double horizon_ms) {
  validate(drx);
  if (horizon_ms < static_cast<double>(drx.paging_cycle_ms)) {
    throw_error(ErrorKind::InvalidConfig, "horizon must cover at least one paging cycle");
  }
  const double cycle = static_cast<double>(drx.paging_cycle_ms);
  const double on = static_cast<double>(drx.on_duration_ms);
  const double full_cycles = std::floor(horizon_ms / cycle);
  const double per_cycle_mj =
      (on * power.rx_mw + (cycle - on) * power.inactive_mw) / 1000.0 + drx.wakeup_overhead_mj;
  double energy = full_cycles * per_cycle_mj;
  const double rem = horizon_ms - full_cycles * cycle;
  if (rem > 0.0) {
    const double rem_on = std::min(rem, on);
    energy += (rem_on * power.rx_mw + std::max(0.0, rem - on) * power.inactive_mw) / 1000.0;
    energy += drx.wakeup_overhead_mj;
  }
  return energy;
}

/// Days until a battery of battery_mj drains at the given daily burn.
inline double battery_lifetime_days(double daily_mj, double battery_mj) {
  if (!(daily_mj > 0.0)) throw_error(ErrorKind::ZeroConsumption, "daily energy must be > 0");
  if (!(battery_mj >= 0.0)) throw_error(ErrorKind::InvalidParameter, "battery capacity must be >= 0");
  return battery_mj / daily_mj;
}

}  // namespace rachsim

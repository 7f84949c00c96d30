#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rachsim/analytic.hpp"
#include "rachsim/cobalt.hpp"
#include "rachsim/events.hpp"
#include "rachsim/metrics.hpp"
#include "rachsim/prach.hpp"
#include "rachsim/scenario.hpp"

namespace rachsim {

/// Event-driven protocol simulator for one scenario. Strictly
/// single-threaded and deterministic: all randomness flows through the cell
/// stream (eNB detection draws) and one private stream per device, so runs
/// with the same (scenario, seed) replay bit-identically and adding devices
/// never perturbs existing ones.
class Simulator {
 public:
  explicit Simulator(Scenario sc) : sc_(std::move(sc)), cell_rng_(cell_stream(sc_.seed)) {
    validate(sc_.prach);
    validate(sc_.eab);
    validate(sc_.drx);
    if (sc_.cobalt) {
      validate(*sc_.cobalt);
      frame_map_ = build_frame_map(sc_.frame, sc_.prach, &*sc_.cobalt);
    }
    setup_devices();
  }

  /// Runs the whole configured horizon.
  MetricsReport run() { return run_until(SimTime{sc_.effective_duration_sf()}); }

  /// Processes every event with fire_time <= end and reports.
  MetricsReport run_until(SimTime end) {
    end_ = end;
    if (sc_.measure_period_sf > 0) queue_.schedule(EventKind::MeasurementTick, SimTime{0});
    while (!queue_.empty() && queue_.peek_time() <= end_) {
      const Event ev = queue_.pop();
      dispatch(ev);
    }
    return finalize();
  }

  void schedule(EventKind kind, SimTime t, std::int32_t device_id = -1) {
    queue_.schedule(kind, t, device_id);
  }

  /// Device-addressed state transitions; the run loop routes every
  /// device event through here.
  void advance_device(Device& dev, const Event& ev) {
    const SimTime now = ev.fire_time;
    switch (ev.kind) {
      case EventKind::DeviceActivation:
        on_activation(dev, now);
        return;
      case EventKind::BackoffExpiry:
        expect(dev, DeviceState::PreBackoff, ev);
        enter_waiting(dev, now);
        return;
      case EventKind::BarringExpiry:
        expect(dev, DeviceState::Barred, ev);
        enter_waiting(dev, now);
        return;
      case EventKind::RarDeadline:
        expect(dev, DeviceState::WaitingRar, ev);
        fail_or_backoff(dev, now);
        return;
      case EventKind::Msg3Tx:
        expect(dev, DeviceState::SendingMsg3, ev);
        on_msg3(dev, now);
        return;
      case EventKind::Msg4Deadline:
        expect(dev, DeviceState::WaitingMsg4, ev);
        on_msg4(dev, now);
        return;
      case EventKind::PagingOccasion:
        on_paging(dev, now);
        return;
      default:
        throw_error(ErrorKind::IllegalTransition, "cell event addressed to a device");
    }
  }

  const Scenario& scenario() const { return sc_; }
  const Device& device(std::size_t i) const { return devices_[i]; }
  std::size_t device_count() const { return devices_.size(); }
  std::int64_t backlog() const { return backlog_; }

 private:
  // -- setup ----------------------------------------------------------------

  void setup_devices() {
    const std::int64_t total = sc_.total_devices();
    devices_.reserve(static_cast<std::size_t>(total));
    device_population_.assign(static_cast<std::size_t>(total), 0);
    std::int32_t id = 0;
    for (const auto& pop : sc_.populations) {
      for (int i = 0; i < pop.count; ++i, ++id) {
        Device dev;
        dev.id = id;
        dev.cls = pop.cls;
        dev.rng = device_stream(sc_.seed, id);
        dev.ledger.tracing = sc_.trace;
        dev.bg_state = connected_like() && sc_.drx.enabled ? RadioState::Inactive : RadioState::Idle;
        devices_.push_back(std::move(dev));
      }
    }
    // activation / first-arrival schedule, one draw from each device's stream
    id = 0;
    for (std::size_t p = 0; p < sc_.populations.size(); ++p) {
      const auto& pop = sc_.populations[p];
      for (int i = 0; i < pop.count; ++i, ++id) {
        Device& dev = devices_[static_cast<std::size_t>(id)];
        SimTime at;
        if (is_one_shot(pop.traffic)) {
          double t_ms = 0.0;
          if (pop.traffic.law == TrafficLaw::Uniform) {
            t_ms = dev.rng.uniform_real() * pop.traffic.span_ms;
          } else {
            t_ms = sample_beta(pop.traffic.alpha, pop.traffic.beta, dev.rng) * pop.traffic.span_ms;
          }
          at = SimTime{static_cast<std::uint64_t>(std::floor(t_ms))};
        } else {
          at = next_data_arrival(pop.traffic, SimTime{0}, dev.rng);
        }
        queue_.schedule(EventKind::DeviceActivation, at, dev.id);
        device_population_[static_cast<std::size_t>(dev.id)] = p;
        if (connected_like() && sc_.drx.enabled) {
          queue_.schedule(EventKind::PagingOccasion, SimTime{0}, dev.id);
        }
      }
    }
  }

  bool connected_like() const {
    return sc_.mode == RunMode::Connected || sc_.mode == RunMode::Cobalt;
  }

  // -- event dispatch ---------------------------------------------------------

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::RachOpportunity:
        on_rach_opportunity(ev.fire_time);
        return;
      case EventKind::CobaltOpportunity:
        on_cobalt_tti(ev.fire_time);
        return;
      case EventKind::MeasurementTick:
        backlog_series_.emplace_back(ev.fire_time.sf, backlog_);
        if (ev.fire_time + sc_.measure_period_sf <= end_) {
          queue_.schedule(EventKind::MeasurementTick, ev.fire_time + sc_.measure_period_sf);
        }
        return;
      default:
        advance_device(devices_[static_cast<std::size_t>(ev.device_id)], ev);
        return;
    }
  }

  static void expect(const Device& dev, DeviceState st, const Event& ev) {
    if (dev.state != st) {
      throw_error(ErrorKind::IllegalTransition,
                  std::string("device ") + std::to_string(dev.id) + " got event " +
                      std::to_string(static_cast<int>(ev.kind)) + " in state " + to_string(dev.state));
    }
  }

  // -- energy accounting -------------------------------------------------------

  void accrue_bg(Device& dev, SimTime to) {
    if (to <= dev.accrued_until) return;  // already covered by a protocol burst
    accrue(dev.ledger, sc_.power, dev.bg_state, static_cast<double>(to - dev.accrued_until), 0.0,
           dev.accrued_until);
    dev.accrued_until = to;
  }

  void burst(Device& dev, SimTime from, std::uint64_t dur_sf, RadioState state,
             double tx_dbm = 0.0) {
    accrue_bg(dev, from);
    accrue(dev.ledger, sc_.power, state, static_cast<double>(dur_sf), tx_dbm, from);
    if (from + dur_sf > dev.accrued_until) dev.accrued_until = from + dur_sf;
  }

  // -- RACH opportunity geometry ------------------------------------------------

  std::uint64_t op_index(SimTime t) const { return t.sf / static_cast<std::uint64_t>(sc_.prach.period_sf); }

  /// Opportunities sit at multiples of the PRACH period; a device that gets
  /// ready during subframe t can first transmit at the next strictly later
  /// occasion.
  SimTime next_op_after(SimTime t) const {
    const auto period = static_cast<std::uint64_t>(sc_.prach.period_sf);
    return SimTime{(t.sf / period + 1) * period};
  }

  void register_for_op(Device& dev, SimTime op_time) {
    const std::uint64_t idx = op_index(op_time);
    rach_buckets_[idx].push_back(dev.id);
    if (scheduled_ops_.insert(idx).second) {
      queue_.schedule(EventKind::RachOpportunity, op_time);
    }
  }

  SimTime next_cobalt_tti_after(SimTime t) const {
    const auto period = static_cast<std::uint64_t>(sc_.cobalt->tti_period_sf);
    return SimTime{(t.sf / period + 1) * period};
  }

  void register_for_cobalt(Device& dev, SimTime tti_time) {
    const auto period = static_cast<std::uint64_t>(sc_.cobalt->tti_period_sf);
    const std::uint64_t idx = tti_time.sf / period;
    cobalt_buckets_[idx].push_back(dev.id);
    if (scheduled_ttis_.insert(idx).second) {
      queue_.schedule(EventKind::CobaltOpportunity, tti_time);
    }
  }

  // -- device lifecycle -----------------------------------------------------------

  void on_activation(Device& dev, SimTime now) {
    if (dev.state != DeviceState::Inactive) {
      // a new data request landed mid-procedure: queue it behind the current one
      if (connected_like()) {
        if (!dev.deferred_arrival) dev.deferred_arrival = now;
        return;
      }
      throw_error(ErrorKind::IllegalTransition, "activation of a non-inactive device");
    }
    if (sc_.mode == RunMode::NetworkEntry || sc_.mode == RunMode::AnalyticCompare) {
      // access energy is measured from the activation instant
      dev.accrued_until = now;
      dev.bg_state = RadioState::Idle;
      begin_access(dev, now);
      return;
    }
    // connected / cobalt: a small-data request arrives
    accrue_bg(dev, now);
    dev.bg_state = RadioState::Idle;
    dev.energy_at_request = dev.ledger.total_mj();
    dev.request_time = now;
    ++requests_;
    dev.has_pending_data = true;
    dev.msg_count = 0;
    if (sc_.mode == RunMode::Cobalt) {
      dev.cobalt_attempts = 0;
      dev.state = DeviceState::AwaitingOpportunity;
      register_for_cobalt(dev, next_cobalt_tti_after(now));
      return;
    }
    begin_access(dev, now);
  }

  void begin_access(Device& dev, SimTime now) {
    dev.activation_time = now;
    dev.attempt_n = 0;
    dev.chosen_preamble = -1;
    dev.collided = false;
    dev.eab_cleared = false;
    dev.backoff_until.reset();
    ++activated_;
    ++backlog_;
    if (sc_.prach.pre_backoff_ms > 0) {
      const std::uint64_t d =
          dev.rng.uniform_int(static_cast<std::uint64_t>(sc_.prach.pre_backoff_ms) + 1);
      dev.state = DeviceState::PreBackoff;
      queue_.schedule(EventKind::BackoffExpiry, now + d, dev.id);
      return;
    }
    enter_waiting(dev, now);
  }

  void enter_waiting(Device& dev, SimTime now) {
    dev.state = DeviceState::AwaitingOpportunity;
    const SimTime ready = dev.backoff_until && *dev.backoff_until > now ? *dev.backoff_until : now;
    register_for_op(dev, next_op_after(ready));
  }

  double effective_retx_probability() const {
    switch (sc_.prach.retx_mode) {
      case RetxMode::Off:
      case RetxMode::FixedP:
        return sc_.prach.msg1_retx_probability;
      case RetxMode::Broadcast:
        return std::min(1.0, static_cast<double>(sc_.prach.num_preambles) /
                                 static_cast<double>(std::max<std::int64_t>(backlog_, 1)));
      case RetxMode::LocalStatic: {
        const double est = sc_.prach.local_backlog_estimate > 0.0
                               ? sc_.prach.local_backlog_estimate
                               : static_cast<double>(sc_.total_devices());
        return std::min(1.0, static_cast<double>(sc_.prach.num_preambles) / std::max(est, 1.0));
      }
    }
    return 1.0;
  }

  void on_rach_opportunity(SimTime t) {
    const std::uint64_t idx = op_index(t);
    scheduled_ops_.erase(idx);
    auto it = rach_buckets_.find(idx);
    if (it == rach_buckets_.end()) return;
    std::vector<std::int32_t> bucket = std::move(it->second);
    rach_buckets_.erase(it);
    ++slots_processed_;

    std::vector<Msg1Tx> txs;
    txs.reserve(bucket.size());
    for (const std::int32_t id : bucket) {
      Device& dev = devices_[static_cast<std::size_t>(id)];
      assert(dev.state == DeviceState::AwaitingOpportunity);

      if (dev.attempt_n == 0 && !dev.eab_cleared) {
        const auto decision = eab_gate(dev, sc_.eab, dev.rng);
        if (!decision.admitted) {
          accrue_bg(dev, t);
          dev.state = DeviceState::Barred;
          queue_.schedule(EventKind::BarringExpiry,
                          t + static_cast<std::uint64_t>(decision.barred_for_ms), dev.id);
          continue;
        }
        dev.eab_cleared = true;
      }
      if (sc_.prach.retx_mode != RetxMode::Off) {
        if (dev.rng.uniform_real() >= effective_retx_probability()) {
          register_for_op(dev, next_op_after(t));  // silent deferral
          continue;
        }
      }
      ++dev.attempt_n;
      ++dev.total_msg1;
      ++dev.msg_count;
      const auto [lo, hi] = preamble_pool(sc_.prach, dev.cls);
      dev.chosen_preamble = select_preamble(lo, hi, dev.rng);
      burst(dev, t, 1, RadioState::Tx, msg1_tx_power_dbm(sc_.prach, dev.attempt_n));
      dev.state = DeviceState::WaitingRar;
      txs.push_back({dev.id, dev.chosen_preamble, dev.attempt_n});
    }
    if (txs.empty()) return;

    // collision bookkeeping: used vs. collided preamble-opportunity pairs
    occupancy_scratch_.assign(static_cast<std::size_t>(sc_.prach.num_preambles), 0);
    for (const auto& tx : txs) ++occupancy_scratch_[static_cast<std::size_t>(tx.preamble)];
    for (const int users : occupancy_scratch_) {
      if (users >= 1) ++used_pairs_;
      if (users >= 2) ++collided_pairs_;
    }

    const auto outcomes = enb_process_opportunity(txs, sc_.prach, cell_rng_);
    for (std::size_t i = 0; i < txs.size(); ++i) {
      Device& dev = devices_[static_cast<std::size_t>(txs[i].device_id)];
      const auto& out = outcomes[i];
      if (sc_.mode == RunMode::AnalyticCompare) {
        resolve_analytic_slot(dev, t, out);
        continue;
      }
      switch (out.outcome) {
        case OpportunityOutcome::RarGranted: {
          dev.collided = out.collided;
          ++dev.msg_count;  // Msg2
          burst(dev, t + 1, static_cast<std::uint64_t>(sc_.prach.rar_window_sf), RadioState::Rx);
          dev.state = DeviceState::SendingMsg3;
          const SimTime msg3_at = t + 1 + static_cast<std::uint64_t>(sc_.prach.rar_window_sf) +
                                  static_cast<std::uint64_t>(sc_.prach.msg2_to_msg3_delay_sf);
          queue_.schedule(EventKind::Msg3Tx, msg3_at, dev.id);
          break;
        }
        case OpportunityOutcome::NotDetected:
        case OpportunityOutcome::CollisionDestroyed: {
          // the device listens out the whole RAR window before giving up
          burst(dev, t + 1, static_cast<std::uint64_t>(sc_.prach.rar_window_sf), RadioState::Rx);
          queue_.schedule(EventKind::RarDeadline,
                          t + 1 + static_cast<std::uint64_t>(sc_.prach.rar_window_sf), dev.id);
          break;
        }
      }
    }
  }

  /// Analytic-comparable mode collapses Msg2..Msg4 into the slot itself:
  /// a lone preamble is an immediate success, anything else retries. This is
  /// exactly the multichannel contention abstraction the closed forms model.
  /// Slots are numbered by processed opportunities, first slot = 1.
  void resolve_analytic_slot(Device& dev, SimTime t, const OutcomeRec& out) {
    const bool success = out.outcome == OpportunityOutcome::RarGranted && !out.collided;
    if (success) {
      ++successes_;
      success_slot_sum_ += static_cast<double>(slots_processed_);
      if (sc_.hold_backlog) {
        dev.attempt_n = 0;
        dev.chosen_preamble = -1;
        dev.state = DeviceState::AwaitingOpportunity;
        register_for_op(dev, next_op_after(t));
        return;
      }
      dev.success_time = t + 1;
      record_success(dev, t + 1);
      drain_slot_ = static_cast<double>(slots_processed_);
      return;
    }
    dev.chosen_preamble = -1;
    if (!sc_.hold_backlog && dev.attempt_n >= sc_.prach.max_preamble_tx) {
      record_failure(dev, t + 1);
      return;
    }
    if (sc_.prach.backoff_indicator_ms > 0) {
      const std::uint64_t d =
          dev.rng.uniform_int(static_cast<std::uint64_t>(sc_.prach.backoff_indicator_ms) + 1);
      dev.backoff_until = t + d;
    } else {
      dev.backoff_until.reset();
    }
    dev.state = DeviceState::AwaitingOpportunity;
    enter_waiting(dev, t);
  }

  void on_msg3(Device& dev, SimTime now) {
    burst(dev, now, 1, RadioState::Tx, sc_.power.max_tx_power_dbm);
    ++dev.msg_count;  // Msg3
    dev.state = DeviceState::WaitingMsg4;
    const std::uint64_t wait = dev.collided
                                   ? static_cast<std::uint64_t>(sc_.prach.contention_resolution_timer_sf)
                                   : static_cast<std::uint64_t>(sc_.prach.msg4_delay_sf);
    queue_.schedule(EventKind::Msg4Deadline, now + 1 + wait, dev.id);
  }

  void on_msg4(Device& dev, SimTime now) {
    // the wait since Msg3 was spent listening for contention resolution
    if (now > dev.accrued_until) {
      accrue(dev.ledger, sc_.power, RadioState::Rx, static_cast<double>(now - dev.accrued_until),
             0.0, dev.accrued_until);
      dev.accrued_until = now;
    }
    if (dev.collided) {
      fail_or_backoff(dev, now);  // Msg4 never addressed this device
      return;
    }
    ++dev.msg_count;  // Msg4
    dev.success_time = now;
    record_success(dev, now);
  }

  void fail_or_backoff(Device& dev, SimTime now) {
    dev.chosen_preamble = -1;
    dev.collided = false;
    if (dev.attempt_n >= sc_.prach.max_preamble_tx) {
      record_failure(dev, now);
      return;
    }
    const std::uint64_t d =
        dev.rng.uniform_int(static_cast<std::uint64_t>(sc_.prach.backoff_indicator_ms) + 1);
    dev.backoff_until = now + d;
    dev.bg_state = RadioState::Idle;
    enter_waiting(dev, now);
  }

  void record_success(Device& dev, SimTime now) {
    dev.state = DeviceState::Succeeded;
    --backlog_;
    ++succeeded_;
    if (dev.cls == PriorityClass::HighPriority) ++succeeded_high_; else ++succeeded_low_;
    delays_ms_.push_back(static_cast<double>(now - dev.activation_time));
    note_msg1_count(dev.attempt_n);
    if (sc_.mode == RunMode::NetworkEntry || sc_.mode == RunMode::AnalyticCompare) {
      resolved_energies_.push_back(dev.ledger.total_mj());
      return;
    }
    complete_delivery_via_rach(dev, now);
  }

  /// Connected-mode epilogue after contention resolution: uplink grant, then
  /// the data transmission itself (one subframe each, collapsed inline).
  void complete_delivery_via_rach(Device& dev, SimTime now) {
    burst(dev, now + 1, 1, RadioState::Rx);  // uplink grant
    ++dev.msg_count;
    burst(dev, now + 2, 1, RadioState::Tx, sc_.power.max_tx_power_dbm);  // data
    ++dev.msg_count;
    const SimTime done = now + 3;
    if (done <= end_) {
      ++delivered_;
      ++dev.deliveries;
      delivery_latency_ms_.push_back(static_cast<double>(done - dev.request_time));
      delivery_energy_mj_.push_back(dev.ledger.total_mj() - dev.energy_at_request);
      delivery_msgs_.push_back(dev.msg_count);
    }
    return_to_idle(dev, done);
  }

  void record_failure(Device& dev, SimTime now) {
    dev.state = DeviceState::Failed;
    --backlog_;
    ++failed_;
    if (dev.cls == PriorityClass::HighPriority) ++failed_high_; else ++failed_low_;
    note_msg1_count(dev.attempt_n);
    if (sc_.mode == RunMode::NetworkEntry || sc_.mode == RunMode::AnalyticCompare) {
      resolved_energies_.push_back(dev.ledger.total_mj());
      return;
    }
    ++delivery_exhausted_;  // the pending payload is dropped
    return_to_idle(dev, now);
  }

  void return_to_idle(Device& dev, SimTime now) {
    dev.state = DeviceState::Inactive;
    dev.has_pending_data = false;
    dev.chosen_preamble = -1;
    dev.bg_state = sc_.drx.enabled ? RadioState::Inactive : RadioState::Idle;
    const auto& pop = sc_.populations[device_population_[static_cast<std::size_t>(dev.id)]];
    if (dev.deferred_arrival) {
      const SimTime queued = *dev.deferred_arrival;
      dev.deferred_arrival.reset();
      if (now + 1 <= end_) queue_.schedule(EventKind::DeviceActivation, now + 1, dev.id);
      (void)queued;
    } else if (!is_one_shot(pop.traffic)) {
      const SimTime next = next_data_arrival(pop.traffic, now, dev.rng);
      if (next <= end_) queue_.schedule(EventKind::DeviceActivation, next, dev.id);
    }
  }

  void note_msg1_count(int n) {
    if (n <= 0) return;
    if (static_cast<std::size_t>(n) > msg1_hist_.size()) msg1_hist_.resize(static_cast<std::size_t>(n), 0);
    ++msg1_hist_[static_cast<std::size_t>(n) - 1];
  }

  // -- DRX ------------------------------------------------------------------------

  void on_paging(Device& dev, SimTime now) {
    if (dev.state == DeviceState::Inactive && sc_.drx.enabled) {
      accrue_bg(dev, now);
      const SimTime rx_start = std::max(now, dev.accrued_until);
      const std::uint64_t full_on = sc_.drx.on_duration_ms;
      const std::uint64_t until = std::min((now + full_on).sf, end_.sf);
      if (until > rx_start.sf) {
        accrue(dev.ledger, sc_.power, RadioState::Rx, static_cast<double>(until - rx_start.sf), 0.0,
               rx_start);
        dev.accrued_until = SimTime{until};
        dev.ledger.wakeup_mj += sc_.drx.wakeup_overhead_mj;
      }
    }
    if (now + sc_.drx.paging_cycle_ms <= end_) {
      queue_.schedule(EventKind::PagingOccasion, now + sc_.drx.paging_cycle_ms, dev.id);
    }
  }

  // -- COBALT ------------------------------------------------------------------------

  void on_cobalt_tti(SimTime t) {
    const auto period = static_cast<std::uint64_t>(sc_.cobalt->tti_period_sf);
    const std::uint64_t idx = t.sf / period;
    scheduled_ttis_.erase(idx);
    auto it = cobalt_buckets_.find(idx);
    if (it == cobalt_buckets_.end()) return;
    std::vector<std::int32_t> bucket = std::move(it->second);
    cobalt_buckets_.erase(it);

    std::vector<std::int32_t> senders;
    std::vector<int> rbs;
    for (const std::int32_t id : bucket) {
      Device& dev = devices_[static_cast<std::size_t>(id)];
      assert(dev.state == DeviceState::AwaitingOpportunity);
      if (!dev.has_pending_data) {
        throw_error(ErrorKind::NoPendingData, "device in the COBALT region without a payload");
      }
      ++dev.cobalt_attempts;
      ++dev.msg_count;  // data transmission
      rbs.push_back(pick_contention_rb(*sc_.cobalt, dev.rng));
      burst(dev, t, 1, RadioState::Tx, sc_.power.max_tx_power_dbm);
      senders.push_back(id);
    }
    if (senders.empty()) return;
    const auto delivered = resolve_cobalt_tti(rbs, sc_.cobalt->region_rbs_per_tti);
    for (std::size_t i = 0; i < senders.size(); ++i) {
      Device& dev = devices_[static_cast<std::size_t>(senders[i])];
      if (delivered[i]) {
        burst(dev, t + 1, 1, RadioState::Rx);  // ack
        ++dev.msg_count;
        const SimTime done = t + 1;
        if (done <= end_) {
          ++delivered_;
          ++dev.deliveries;
          delivery_latency_ms_.push_back(static_cast<double>(done - dev.request_time));
          delivery_energy_mj_.push_back(dev.ledger.total_mj() - dev.energy_at_request);
          delivery_msgs_.push_back(dev.msg_count);
        }
        return_to_idle(dev, t + 2);
        continue;
      }
      // collided resource block; everyone in it retries the same way
      if (dev.cobalt_attempts - 1 >= sc_.cobalt->max_retries) {
        if (sc_.cobalt->fallback_to_rach) {
          begin_access(dev, t + 1);
          continue;
        }
        ++delivery_exhausted_;
        return_to_idle(dev, t + 1);
        continue;
      }
      const std::uint64_t d =
          dev.rng.uniform_int(static_cast<std::uint64_t>(sc_.cobalt->retry_backoff_ms) + 1);
      register_for_cobalt(dev, next_cobalt_tti_after(t + d));
    }
  }

  // -- finalization ---------------------------------------------------------------

  MetricsReport finalize() {
    MetricsReport rep;
    rep.scenario_name = sc_.name;
    rep.seed = sc_.seed;
    rep.mode = to_string(sc_.mode);
    rep.config_echo = sc_.echo();
    rep.n_total = sc_.total_devices();
    rep.activated = activated_;
    rep.succeeded = succeeded_;
    rep.failed = failed_;
    rep.censored = activated_ - succeeded_ - failed_;

    const std::int64_t resolved = succeeded_ + failed_;
    if (resolved > 0) {
      rep.success_prob = static_cast<double>(succeeded_) / static_cast<double>(resolved);
    }
    const std::int64_t res_low = succeeded_low_ + failed_low_;
    const std::int64_t res_high = succeeded_high_ + failed_high_;
    if (res_low > 0) rep.success_prob_low = static_cast<double>(succeeded_low_) / res_low;
    if (res_high > 0) rep.success_prob_high = static_cast<double>(succeeded_high_) / res_high;
    if (used_pairs_ > 0) {
      rep.collision_prob = static_cast<double>(collided_pairs_) / static_cast<double>(used_pairs_);
    }
    rep.delay = delay_stats(delays_ms_);
    if (!msg1_hist_.empty() && resolved > 0) {
      rep.msg1_hist = msg1_hist_;
      double acc = 0.0;
      for (std::size_t k = 0; k < msg1_hist_.size(); ++k) {
        acc += static_cast<double>(k + 1) * static_cast<double>(msg1_hist_[k]);
      }
      rep.msg1_mean = acc / static_cast<double>(resolved);
    }

    // energy: network entry reports per-procedure access energy over
    // resolved devices; connected-like modes report whole-horizon energy of
    // every device (idle and sleep included)
    if (sc_.mode == RunMode::NetworkEntry || sc_.mode == RunMode::AnalyticCompare) {
      std::vector<double> energies = resolved_energies_;
      double total = 0.0;
      for (const auto& dev : devices_) total += dev.ledger.total_mj();
      rep.energy_total_mj = total;
      if (!energies.empty()) {
        std::sort(energies.begin(), energies.end());
        rep.energy_mean_mj = mean(energies);
        rep.energy_p95_mj = percentile(energies, 0.95);
      }
    } else {
      std::vector<double> energies;
      energies.reserve(devices_.size());
      double total = 0.0;
      for (auto& dev : devices_) {
        if (dev.state == DeviceState::Inactive) accrue_bg(dev, end_);
        const double e = dev.ledger.total_mj();
        energies.push_back(e);
        total += e;
      }
      rep.energy_total_mj = total;
      if (!energies.empty()) {
        std::sort(energies.begin(), energies.end());
        rep.energy_mean_mj = mean(energies);
        rep.energy_p95_mj = percentile(energies, 0.95);
      }
    }

    rep.requests = requests_;
    rep.delivered = delivered_;
    rep.delivery_exhausted = delivery_exhausted_;
    if (!delivery_msgs_.empty()) {
      double acc = 0.0;
      for (int m : delivery_msgs_) acc += m;
      rep.signaling_per_delivery = acc / static_cast<double>(delivery_msgs_.size());
    }
    if (!delivery_energy_mj_.empty()) rep.energy_per_delivery_mj = mean(delivery_energy_mj_);
    if (!delivery_latency_ms_.empty()) {
      std::vector<double> lat = delivery_latency_ms_;
      std::sort(lat.begin(), lat.end());
      rep.delivery_p95_ms = percentile(lat, 0.95);
      rep.delivery_mean_ms = mean(lat);
    }

    if (sc_.mode == RunMode::AnalyticCompare) {
      rep.slots = static_cast<double>(slots_processed_);
      if (sc_.hold_backlog && slots_processed_ > 0 && sc_.total_devices() > 0) {
        rep.tagged_success_rate = static_cast<double>(successes_) /
                                  (static_cast<double>(slots_processed_) *
                                   static_cast<double>(sc_.total_devices()));
      }
      if (!sc_.hold_backlog) {
        if (backlog_ == 0 && activated_ > 0) rep.drain_slots = drain_slot_;
        if (succeeded_ > 0) rep.mean_delay_slots = success_slot_sum_ / static_cast<double>(succeeded_);
      }
    }

    rep.events_scheduled = queue_.scheduled_count();
    rep.events_processed = queue_.processed_count();
    rep.backlog_series = backlog_series_;
    return rep;
  }

  // -- state ---------------------------------------------------------------------

  Scenario sc_;
  EventQueue queue_;
  RngStream cell_rng_;
  std::vector<Device> devices_;
  std::vector<std::size_t> device_population_;
  std::optional<FrameMap> frame_map_;
  SimTime end_{0};

  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> rach_buckets_;
  std::unordered_set<std::uint64_t> scheduled_ops_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> cobalt_buckets_;
  std::unordered_set<std::uint64_t> scheduled_ttis_;
  std::vector<int> occupancy_scratch_;

  std::int64_t backlog_ = 0;
  std::int64_t activated_ = 0;
  std::int64_t succeeded_ = 0, failed_ = 0;
  std::int64_t succeeded_low_ = 0, failed_low_ = 0;
  std::int64_t succeeded_high_ = 0, failed_high_ = 0;
  std::int64_t used_pairs_ = 0, collided_pairs_ = 0;
  std::int64_t requests_ = 0, delivered_ = 0, delivery_exhausted_ = 0;
  std::uint64_t slots_processed_ = 0;
  std::int64_t successes_ = 0;
  double success_slot_sum_ = 0.0;
  double drain_slot_ = kNan;

  std::vector<double> delays_ms_;
  std::vector<double> resolved_energies_;
  std::vector<std::int64_t> msg1_hist_;
  std::vector<double> delivery_latency_ms_;
  std::vector<double> delivery_energy_mj_;
  std::vector<int> delivery_msgs_;
  std::vector<std::pair<std::uint64_t, std::int64_t>> backlog_series_;
};

/// One-call convenience wrapper.
inline MetricsReport run_scenario(const Scenario& sc) { return Simulator(sc).run(); }

}  // namespace rachsim

#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "rachsim/errors.hpp"
#include "rachsim/time.hpp"

namespace rachsim {

enum class EventKind : std::uint8_t {
  DeviceActivation,
  RachOpportunity,
  RarDeadline,
  Msg3Tx,
  Msg4Deadline,
  BackoffExpiry,
  BarringExpiry,
  PagingOccasion,
  CobaltOpportunity,
  MeasurementTick,
};

struct Event {
  SimTime fire_time;
  std::uint64_t sequence_no = 0;  // insertion order, assigned by the queue
  EventKind kind = EventKind::MeasurementTick;
  std::int32_t device_id = -1;  // -1 for cell-level events
};

/// Deterministic event queue with a subframe clock. Events dequeue in
/// (fire_time, sequence_no) lexicographic order; the clock never moves
/// backwards and scheduling into the past is rejected.
class EventQueue {
 public:
  void schedule(EventKind kind, SimTime fire_time, std::int32_t device_id = -1) {
    if (fire_time < clock_) {
      throw_error(ErrorKind::PastEvent, "event at sf " + std::to_string(fire_time.sf) +
                                            " scheduled while clock is at sf " +
                                            std::to_string(clock_.sf));
    }
    heap_.push(Event{fire_time, next_seq_++, kind, device_id});
    ++scheduled_;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

  /// Earliest pending fire time; queue must be non-empty.
  SimTime peek_time() const { return heap_.top().fire_time; }

  /// Removes the next event and advances the clock to its fire time.
  Event pop() {
    Event ev = heap_.top();
    heap_.pop();
    clock_ = ev.fire_time;
    ++processed_;
    return ev;
  }

  SimTime now() const { return clock_; }
  std::uint64_t scheduled_count() const { return scheduled_; }
  std::uint64_t processed_count() const { return processed_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_time != b.fire_time) return b.fire_time < a.fire_time;
      return b.sequence_no < a.sequence_no;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  SimTime clock_ = kRunStart;
  std::uint64_t next_seq_ = 0;
  std::uint64_t scheduled_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace rachsim

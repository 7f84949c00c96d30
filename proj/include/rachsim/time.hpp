#pragma once

#include <cassert>
#include <compare>
#include <cstdint>

namespace rachsim {

/// Simulation clock value in whole LTE subframes. One subframe is 1 ms,
/// so subframe counts and millisecond durations are interchangeable.
struct SimTime {
  std::uint64_t sf = 0;

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(std::uint64_t delta_sf) const { return SimTime{sf + delta_sf}; }

  SimTime& operator+=(std::uint64_t delta_sf) {
    sf += delta_sf;
    return *this;
  }

  /// Elapsed subframes since `earlier`. Caller guarantees ordering.
  constexpr std::uint64_t operator-(SimTime earlier) const {
    assert(sf >= earlier.sf);
    return sf - earlier.sf;
  }

  constexpr double ms() const { return static_cast<double>(sf); }
};

constexpr SimTime kRunStart{0};

}  // namespace rachsim

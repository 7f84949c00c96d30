#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rachsim/errors.hpp"
#include "rachsim/rng.hpp"
#include "rachsim/time.hpp"

namespace rachsim {

enum class TrafficLaw { Uniform, Beta, Poisson, Periodic };

enum class PriorityClass { LowPriority, HighPriority };

inline const char* to_string(PriorityClass c) {
  return c == PriorityClass::LowPriority ? "low" : "high";
}

/// Activation-time / inter-arrival law for one device population.
/// Uniform and Beta are one-shot activation bursts over [0, span_ms];
/// Poisson and Periodic describe recurring data arrivals.
struct TrafficModel {
  TrafficLaw law = TrafficLaw::Uniform;
  double span_ms = 60000.0;  // Uniform/Beta burst window
  double alpha = 3.0;        // Beta shape
  double beta = 4.0;         // Beta shape
  double rate_per_s = 1.0;   // Poisson
  std::uint64_t period_ms = 60000;  // Periodic
  std::uint64_t jitter_ms = 0;      // Periodic: extra delay uniform in [0, jitter]
};

struct PopulationSpec {
  PriorityClass cls = PriorityClass::LowPriority;
  int count = 0;
  TrafficModel traffic;
};

inline void validate(const TrafficModel& m) {
  switch (m.law) {
    case TrafficLaw::Uniform:
      if (!(m.span_ms > 0.0)) throw_error(ErrorKind::InvalidParameter, "uniform span_ms must be > 0");
      break;
    case TrafficLaw::Beta:
      if (!(m.span_ms > 0.0)) throw_error(ErrorKind::InvalidParameter, "beta span_ms must be > 0");
      if (!(m.alpha > 0.0) || !(m.beta > 0.0)) {
        throw_error(ErrorKind::InvalidParameter, "beta shapes must be > 0");
      }
      break;
    case TrafficLaw::Poisson:
      if (!(m.rate_per_s > 0.0)) throw_error(ErrorKind::InvalidParameter, "poisson rate_per_s must be > 0");
      break;
    case TrafficLaw::Periodic:
      if (m.period_ms == 0) throw_error(ErrorKind::InvalidParameter, "periodic period_ms must be > 0");
      break;
  }
}

/// One Beta(alpha, beta) variate on [0, 1].
inline double sample_beta(double alpha, double beta, RngStream& stream) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw_error(ErrorKind::InvalidParameter, "beta shapes must be > 0");
  }
  return stream.beta(alpha, beta);
}

/// Draws n activation instants from a one-shot law, quantized to subframes
/// by floor (activation never precedes the drawn instant), sorted ascending.
inline std::vector<SimTime> sample_activation_times(const TrafficModel& model, int n,
                                                    RngStream& stream) {
  validate(model);
  if (n < 0) throw_error(ErrorKind::InvalidParameter, "population size must be >= 0");
  std::vector<SimTime> times;
  times.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t_ms = 0.0;
    switch (model.law) {
      case TrafficLaw::Uniform:
        t_ms = stream.uniform_real() * model.span_ms;
        break;
      case TrafficLaw::Beta:
        t_ms = sample_beta(model.alpha, model.beta, stream) * model.span_ms;
        break;
      case TrafficLaw::Poisson:
        // open-loop arrival burst is not meaningful for Poisson/Periodic
        throw_error(ErrorKind::UnsupportedLaw, "poisson is a recurring-arrival law");
      case TrafficLaw::Periodic:
        throw_error(ErrorKind::UnsupportedLaw, "periodic is a recurring-arrival law");
    }
    times.push_back(SimTime{static_cast<std::uint64_t>(std::floor(t_ms))});
  }
  std::sort(times.begin(), times.end());
  return times;
}

/// Next data-arrival instant strictly after `now` for a recurring law.
inline SimTime next_data_arrival(const TrafficModel& model, SimTime now, RngStream& stream) {
  validate(model);
  switch (model.law) {
    case TrafficLaw::Poisson: {
      const double gap_ms = stream.exponential(model.rate_per_s / 1000.0);
      const auto gap_sf = static_cast<std::uint64_t>(std::ceil(gap_ms));
      return now + std::max<std::uint64_t>(gap_sf, 1);
    }
    case TrafficLaw::Periodic: {
      std::uint64_t gap = model.period_ms;
      if (model.jitter_ms > 0) gap += stream.uniform_int(model.jitter_ms + 1);
      return now + std::max<std::uint64_t>(gap, 1);
    }
    case TrafficLaw::Uniform:
    case TrafficLaw::Beta:
      break;
  }
  throw_error(ErrorKind::UnsupportedLaw, "one-shot activation laws have no inter-arrival time");
}

inline bool is_one_shot(const TrafficModel& m) {
  return m.law == TrafficLaw::Uniform || m.law == TrafficLaw::Beta;
}

}  // namespace rachsim

#pragma once

#include <cmath>
#include <cstdint>

#include "rachsim/errors.hpp"

namespace rachsim {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// Counter-free xoshiro256++ stream, derived from (seed, stream_id).
/// Identical (seed, stream_id) pairs replay identical draw sequences on any
/// platform; std::random distributions are deliberately not used because the
/// standard leaves their algorithms unspecified.
class RngStream {
 public:
  RngStream() : RngStream(1, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::uint64_t sm = seed;
    (void)detail::splitmix64(sm);
    sm ^= detail::rotl64(stream_id + 0x632BE59BD9B4E019ULL, 17) * 0xD1342543DE82EF95ULL;
    for (auto& word : state_) word = detail::splitmix64(sm);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;  // never all-zero
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /// Unbiased integer in [0, n). Lemire's multiply-shift rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw_error(ErrorKind::ZeroRange, "uniform_int requires n >= 1");
    while (true) {
      std::uint64_t x = next_u64();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= static_cast<std::uint64_t>(-n) % n) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform_real() < p; }

  /// Exponential with the given rate (per unit); mean 1/rate.
  double exponential(double rate) {
    if (rate <= 0.0) throw_error(ErrorKind::InvalidParameter, "exponential rate must be > 0");
    return -std::log1p(-uniform_real()) / rate;
  }

  /// Standard normal via Box-Muller (second deviate discarded to keep the
  /// draw count per call fixed).
  double normal() {
    double u1;
    do {
      u1 = uniform_real();
    } while (u1 <= 0.0);
    const double u2 = uniform_real();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape) {
    if (shape <= 0.0) throw_error(ErrorKind::InvalidParameter, "gamma shape must be > 0");
    if (shape < 1.0) {
      double u;
      do {
        u = uniform_real();
      } while (u <= 0.0);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_real();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Beta(a, b) on [0, 1] as Ga/(Ga+Gb).
  double beta(double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw_error(ErrorKind::InvalidParameter, "beta shapes must be > 0");
    const double ga = gamma(a);
    const double gb = gamma(b);
    const double sum = ga + gb;
    if (sum <= 0.0) return 0.5;  // double-underflow corner
    return ga / sum;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4];
};

/// Stream id convention: 0 is the cell/eNB stream, device i uses i + 1.
inline RngStream cell_stream(std::uint64_t seed) { return RngStream(seed, 0); }
inline RngStream device_stream(std::uint64_t seed, std::int64_t device_id) {
  return RngStream(seed, static_cast<std::uint64_t>(device_id) + 1);
}

}  // namespace rachsim

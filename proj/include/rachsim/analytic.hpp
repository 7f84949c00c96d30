#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "rachsim/errors.hpp"
#include "rachsim/metrics.hpp"

namespace rachsim {

/// Multichannel slotted-contention abstraction: U backlogged devices each
/// transmit with probability p per slot on one of M non-interfering channels
/// (preambles); a transmission succeeds iff its channel carried no other.
struct ContentionModel {
  int channels = 54;          // M
  int backlog = 0;            // U
  double retx_probability = 1.0;  // p
};

inline void validate(const ContentionModel& m) {
  if (m.channels < 1) throw_error(ErrorKind::InvalidParameter, "channels must be >= 1");
  if (m.backlog < 0) throw_error(ErrorKind::InvalidParameter, "backlog must be >= 0");
  if (!(m.retx_probability > 0.0 && m.retx_probability <= 1.0)) {
    throw_error(ErrorKind::InvalidParameter, "retx probability must be in (0, 1]");
  }
}

/// Per-slot success probability of one tagged backlogged device,
/// p (1 - p/M)^(U-1).
inline double slot_success_probability(const ContentionModel& m) {
  validate(m);
  if (m.backlog == 0) return 0.0;
  const double p = m.retx_probability;
  const double mm = static_cast<double>(m.channels);
  return p * std::exp(static_cast<double>(m.backlog - 1) * std::log1p(-p / mm));
}

/// Expected successes per slot, U p (1 - p/M)^(U-1).
inline double slot_throughput(const ContentionModel& m) {
  return static_cast<double>(m.backlog) * slot_success_probability(m);
}

/// Closed-form throughput-optimal retransmission probability, min(1, M/U).
inline double optimize_retx_probability(int channels, int backlog) {
  if (channels < 1 || backlog < 1) {
    throw_error(ErrorKind::InvalidParameter, "channels and backlog must be >= 1");
  }
  return std::min(1.0, static_cast<double>(channels) / static_cast<double>(backlog));
}

/// Grid-search argmax of the slot throughput over p in (0, 1].
/// The throughput is unimodal in p (single stationary point at M/U), so the
/// default coarse-then-fine scan returns the same point as a full scan at
/// `step` resolution.
inline double grid_search_retx_probability(int channels, int backlog, double step = 1e-4,
                                           bool two_stage = true) {
  if (channels < 1 || backlog < 1) {
    throw_error(ErrorKind::InvalidParameter, "channels and backlog must be >= 1");
  }
  auto value = [&](double p) {
    return slot_throughput(ContentionModel{channels, backlog, p});
  };
  auto scan = [&](double lo, double hi, double h) {
    double best_p = 0.0, best_v = -1.0;
    const auto k_lo = static_cast<long long>(std::ceil(lo / h - 1e-9));
    const auto k_hi = static_cast<long long>(std::floor(hi / h + 1e-9));
    for (long long k = std::max(1LL, k_lo); k <= k_hi; ++k) {
      const double p = static_cast<double>(k) * h;
      if (p > 1.0 + 1e-12) break;
      const double v = value(std::min(p, 1.0));
      if (v > best_v) {
        best_v = v;
        best_p = std::min(p, 1.0);
      }
    }
    return best_p;
  };
  if (!two_stage || step >= 1e-2) return scan(step, 1.0, step);
  const double coarse = scan(1e-2, 1.0, 1e-2);
  return scan(std::max(step, coarse - 2e-2), std::min(1.0, coarse + 2e-2), step);
}

namespace detail {

constexpr int kExactBacklogCap = 2000;
constexpr int kExactChannelCap = 128;

/// pmf[k][s] = P(exactly s channels carry exactly one ball | k balls thrown
/// uniformly into M channels), for k = 0..max_balls. Computed by evolving
/// the (singleton-count, multi-count) occupancy chain one ball at a time.
inline std::vector<std::vector<double>> singleton_count_pmf_table(int channels, int max_balls) {
  const int m = channels;
  const int dim = m + 1;
  std::vector<double> joint(static_cast<std::size_t>(dim) * dim, 0.0);
  std::vector<double> next(joint.size(), 0.0);
  auto idx = [dim](int s, int d) { return static_cast<std::size_t>(s) * dim + d; };

  joint[idx(0, 0)] = 1.0;
  std::vector<std::vector<double>> pmf(static_cast<std::size_t>(max_balls) + 1,
                                       std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  pmf[0][0] = 1.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (int k = 1; k <= max_balls; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s <= m; ++s) {
      for (int d = 0; d + s <= m; ++d) {
        const double mass = joint[idx(s, d)];
        if (mass == 0.0) continue;
        const double p_empty = static_cast<double>(m - s - d) * inv_m;
        const double p_single = static_cast<double>(s) * inv_m;
        const double p_multi = static_cast<double>(d) * inv_m;
        if (p_empty > 0.0) next[idx(s + 1, d)] += mass * p_empty;
        if (p_single > 0.0) next[idx(s - 1, d + 1)] += mass * p_single;
        if (p_multi > 0.0) next[idx(s, d)] += mass * p_multi;
      }
    }
    joint.swap(next);
    auto& row = pmf[static_cast<std::size_t>(k)];
    for (int s = 0; s <= m; ++s) {
      double acc = 0.0;
      for (int d = 0; d + s <= m; ++d) acc += joint[idx(s, d)];
      row[static_cast<std::size_t>(s)] = acc;
    }
  }
  return pmf;
}

/// log of Binomial(n, k) pmf at probability p.
inline double log_binom_pmf(int n, int k, double p) {
  if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(p) + (n - k) * std::log1p(-p);
}

}  // namespace detail

/// P(s successes in one slot | n backlogged devices), s = 0..min(n, M):
/// transmitters k ~ Binomial(n, p), successes = singleton channels among k.
inline std::vector<double> slot_success_pmf(int channels, int backlog, double p,
                                            const std::vector<std::vector<double>>& occ_pmf) {
  const int cap = std::min(backlog, channels);
  std::vector<double> out(static_cast<std::size_t>(cap) + 1, 0.0);
  if (backlog == 0) {
    out[0] = 1.0;
    return out;
  }
  if (p >= 1.0) {
    const auto& row = occ_pmf[static_cast<std::size_t>(backlog)];
    for (int s = 0; s <= cap; ++s) out[static_cast<std::size_t>(s)] = row[static_cast<std::size_t>(s)];
    return out;
  }
  const double mu = backlog * p;
  const double sigma = std::sqrt(std::max(backlog * p * (1.0 - p), 1.0));
  const int k_lo = std::max(0, static_cast<int>(std::floor(mu - 12.0 * sigma - 4.0)));
  const int k_hi = std::min(backlog, static_cast<int>(std::ceil(mu + 12.0 * sigma + 4.0)));
  for (int k = k_lo; k <= k_hi; ++k) {
    const double w = std::exp(detail::log_binom_pmf(backlog, k, p));
    if (w < 1e-18) continue;
    const auto& row = occ_pmf[static_cast<std::size_t>(k)];
    const int s_max = std::min(k, channels);
    for (int s = 0; s <= std::min(s_max, cap); ++s) {
      out[static_cast<std::size_t>(s)] += w * row[static_cast<std::size_t>(s)];
    }
  }
  // renormalize away the truncated binomial tail
  double tot = 0.0;
  for (double v : out) tot += v;
  if (tot > 0.0) {
    for (double& v : out) v /= tot;
  }
  return out;
}

/// Delay/drain summary of the closed-population contention model.
struct LatencyProfile {
  double mean_delay_slots = kNan;   // mean slot index (1-based) of a device's success
  double delay_p50_slots = kNan;
  double delay_p95_slots = kNan;
  double delay_p99_slots = kNan;
  double per_slot_success = kNan;   // tagged-device success probability at n = U
  double drain_mean_slots = kNan;   // absorption time of the backlog chain
  double drain_sd_slots = kNan;     // its standard deviation (single-run spread)
  double drain_p95_slots = kNan;
  bool diverged = false;            // chain cannot empty (P(0 successes) = 1 somewhere)
};

/// Exact absorbing-Markov analysis of draining U devices over M channels at
/// retransmission probability p. Backlog transitions n -> n - s with the
/// exact per-slot success-count law; means come from first-step recurrences
/// and quantiles from evolving the backlog distribution slot by slot.
inline LatencyProfile exact_drain_time(int channels, int backlog, double p) {
  validate(ContentionModel{channels, backlog, p});
  if (backlog > detail::kExactBacklogCap || channels > detail::kExactChannelCap) {
    throw_error(ErrorKind::InstanceTooLarge,
                "exact method capped at U <= " + std::to_string(detail::kExactBacklogCap) +
                    ", M <= " + std::to_string(detail::kExactChannelCap));
  }
  LatencyProfile prof;
  prof.per_slot_success = slot_success_probability(ContentionModel{channels, backlog, p});
  if (backlog == 0) {
    prof.mean_delay_slots = 0.0;
    prof.drain_mean_slots = 0.0;
    return prof;
  }

  const auto occ = detail::singleton_count_pmf_table(channels, backlog);
  std::vector<std::vector<double>> q(static_cast<std::size_t>(backlog) + 1);
  for (int n = 0; n <= backlog; ++n) q[static_cast<std::size_t>(n)] = slot_success_pmf(channels, n, p, occ);

  // first-step recurrences: T(n) slots to absorb (first and second moment)
  // and W(n) total device-slots
  std::vector<double> t_mean(static_cast<std::size_t>(backlog) + 1, 0.0);
  std::vector<double> t_sq(static_cast<std::size_t>(backlog) + 1, 0.0);
  std::vector<double> w_mean(static_cast<std::size_t>(backlog) + 1, 0.0);
  for (int n = 1; n <= backlog; ++n) {
    const auto& qn = q[static_cast<std::size_t>(n)];
    const double stay = qn[0];
    if (stay >= 1.0 - 1e-14) {
      prof.diverged = true;
      break;
    }
    double t_acc = 1.0;
    double w_acc = static_cast<double>(n);
    const int s_max = static_cast<int>(qn.size()) - 1;
    for (int s = 1; s <= s_max; ++s) {
      t_acc += qn[static_cast<std::size_t>(s)] * t_mean[static_cast<std::size_t>(n - s)];
      w_acc += qn[static_cast<std::size_t>(s)] * w_mean[static_cast<std::size_t>(n - s)];
    }
    t_mean[static_cast<std::size_t>(n)] = t_acc / (1.0 - stay);
    w_mean[static_cast<std::size_t>(n)] = w_acc / (1.0 - stay);
    // E[T_n^2] = E[(1 + T_{n-S})^2]; the s=0 term folds back into T2(n)
    double t2_acc = 1.0 + 2.0 * stay * t_mean[static_cast<std::size_t>(n)];
    for (int s = 1; s <= s_max; ++s) {
      t2_acc += qn[static_cast<std::size_t>(s)] *
                (2.0 * t_mean[static_cast<std::size_t>(n - s)] + t_sq[static_cast<std::size_t>(n - s)]);
    }
    t_sq[static_cast<std::size_t>(n)] = t2_acc / (1.0 - stay);
  }
  if (prof.diverged) return prof;
  prof.drain_mean_slots = t_mean[static_cast<std::size_t>(backlog)];
  const double var = t_sq[static_cast<std::size_t>(backlog)] -
                     prof.drain_mean_slots * prof.drain_mean_slots;
  prof.drain_sd_slots = std::sqrt(std::max(var, 0.0));
  prof.mean_delay_slots = w_mean[static_cast<std::size_t>(backlog)] / backlog;

  // slot-by-slot distribution for quantiles
  std::vector<double> pi(static_cast<std::size_t>(backlog) + 1, 0.0);
  std::vector<double> pi_next(pi.size(), 0.0);
  pi[static_cast<std::size_t>(backlog)] = 1.0;
  const double u = static_cast<double>(backlog);
  const long long slot_cap =
      std::max<long long>(10000, static_cast<long long>(200.0 * prof.drain_mean_slots) + 1000);
  double p50 = kNan, p95 = kNan, p99 = kNan, d95 = kNan;
  for (long long t = 1; t <= slot_cap; ++t) {
    std::fill(pi_next.begin(), pi_next.end(), 0.0);
    for (int n = 0; n <= backlog; ++n) {
      const double mass = pi[static_cast<std::size_t>(n)];
      if (mass < 1e-300) continue;
      if (n == 0) {
        pi_next[0] += mass;
        continue;
      }
      const auto& qn = q[static_cast<std::size_t>(n)];
      const int s_max = static_cast<int>(qn.size()) - 1;
      for (int s = 0; s <= s_max; ++s) {
        pi_next[static_cast<std::size_t>(n - s)] += mass * qn[static_cast<std::size_t>(s)];
      }
    }
    pi.swap(pi_next);
    double expected_backlog = 0.0;
    for (int n = 1; n <= backlog; ++n) expected_backlog += n * pi[static_cast<std::size_t>(n)];
    const double f_device = 1.0 - expected_backlog / u;  // fraction succeeded by slot t
    const double f_drain = pi[0];
    if (std::isnan(p50) && f_device >= 0.50) p50 = static_cast<double>(t);
    if (std::isnan(p95) && f_device >= 0.95) p95 = static_cast<double>(t);
    if (std::isnan(p99) && f_device >= 0.99) p99 = static_cast<double>(t);
    if (std::isnan(d95) && f_drain >= 0.95) d95 = static_cast<double>(t);
    if (f_drain >= 1.0 - 1e-10 && !std::isnan(p99)) break;
  }
  prof.delay_p50_slots = p50;
  prof.delay_p95_slots = p95;
  prof.delay_p99_slots = p99;
  prof.drain_p95_slots = d95;
  return prof;
}

// ---------------------------------------------------------------------------
// fluid / drift approximation
// ---------------------------------------------------------------------------

enum class RetxPolicy { Fixed, Adaptive };  // Adaptive: p = min(1, M/n)

struct FluidPoint {
  double t_slots = 0.0;
  double backlog = 0.0;
};

struct FluidResult {
  std::vector<FluidPoint> trajectory;  // sampled once per slot
  bool stable = true;
  bool diverged = false;
  double capacity_per_slot = kNan;     // sustainable throughput estimate
  double equilibrium_backlog = kNan;   // smallest drift root, when one exists
};

namespace detail {

inline double fluid_departure_rate(int channels, RetxPolicy policy, double fixed_p, double n) {
  if (n <= 0.0) return 0.0;
  const double m = static_cast<double>(channels);
  const double p = policy == RetxPolicy::Adaptive ? std::min(1.0, m / n) : fixed_p;
  const double survive = 1.0 - p / m;
  double rate;
  if (survive <= 0.0) {
    // p == M == 1: success only while a single (fractional) device remains
    rate = n <= 1.0 ? n * p : 0.0;
  } else {
    rate = n * p * std::exp((n - 1.0) * std::log(survive));
  }
  return std::min(rate, n);  // departures cannot exceed the backlog
}

}  // namespace detail

/// Sustainable-throughput estimate of the drift model. Fixed p: the peak of
/// the departure curve (it decays to zero afterwards). Adaptive p: the
/// large-backlog limit, numerically M/e with finite-M adjustments.
inline double fluid_capacity(int channels, RetxPolicy policy, double fixed_p = 1.0) {
  if (policy == RetxPolicy::Adaptive) {
    return detail::fluid_departure_rate(channels, policy, fixed_p, 1e7);
  }
  const double m = static_cast<double>(channels);
  const double n_peak = -1.0 / std::log1p(-fixed_p / m);  // 0 when p == M == 1
  return detail::fluid_departure_rate(channels, policy, fixed_p, std::max(1.0, n_peak));
}

/// Integrates dn/dt = lambda(t) - departure(n) with fixed-step RK4
/// (default 0.1 slot), sampling the trajectory once per slot.
template <typename ArrivalRateFn>
  requires std::is_invocable_r_v<double, ArrivalRateFn, double>
FluidResult fluid_drain_trajectory(int channels, ArrivalRateFn&& lambda_per_slot, double n0,
                                   RetxPolicy policy, double fixed_p, double horizon_slots,
                                   double step = 0.1) {
  if (channels < 1) throw_error(ErrorKind::InvalidParameter, "channels must be >= 1");
  if (n0 < 0.0) throw_error(ErrorKind::InvalidParameter, "initial backlog must be >= 0");
  if (!(step > 0.0) || !(horizon_slots > 0.0)) {
    throw_error(ErrorKind::InvalidParameter, "step and horizon must be > 0");
  }
  if (policy == RetxPolicy::Fixed && !(fixed_p > 0.0 && fixed_p <= 1.0)) {
    throw_error(ErrorKind::InvalidParameter, "fixed p must be in (0, 1]");
  }

  FluidResult res;
  res.capacity_per_slot = fluid_capacity(channels, policy, fixed_p);
  auto drift = [&](double t, double n) {
    return lambda_per_slot(t) - detail::fluid_departure_rate(channels, policy, fixed_p, std::max(n, 0.0));
  };
  const double blowup = std::max({1e9, 1e6 * n0, 1e6 * channels});
  double n = n0;
  double t = 0.0;
  res.trajectory.push_back({0.0, n0});
  const auto total_steps = static_cast<long long>(std::ceil(horizon_slots / step));
  const auto steps_per_slot = std::max<long long>(1, static_cast<long long>(std::llround(1.0 / step)));
  for (long long i = 1; i <= total_steps; ++i) {
    const double k1 = drift(t, n);
    const double k2 = drift(t + step / 2.0, n + step / 2.0 * k1);
    const double k3 = drift(t + step / 2.0, n + step / 2.0 * k2);
    const double k4 = drift(t + step, n + step * k3);
    n += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    n = std::max(n, 0.0);
    t = static_cast<double>(i) * step;
    if (!std::isfinite(n)) throw_error(ErrorKind::NonConvergence, "fluid integrator produced non-finite backlog");
    if (i % steps_per_slot == 0) res.trajectory.push_back({t, n});
    if (n > blowup) {
      res.diverged = true;
      res.trajectory.push_back({t, n});
      break;
    }
  }
  res.stable = !res.diverged && n <= std::max({10.0 * n0, 100.0 * channels, 1000.0});
  return res;
}

/// Convenience overload for a constant arrival rate; also reports the
/// equilibrium backlog (smallest drift root) when the rate is sustainable.
inline FluidResult fluid_drain_trajectory(int channels, double lambda_per_slot, double n0,
                                          RetxPolicy policy, double fixed_p, double horizon_slots,
                                          double step = 0.1) {
  auto res = fluid_drain_trajectory(
      channels, [lambda_per_slot](double) { return lambda_per_slot; }, n0, policy, fixed_p,
      horizon_slots, step);
  if (lambda_per_slot > 0.0 && lambda_per_slot < res.capacity_per_slot) {
    double lo = 0.0, hi = 1.0;
    while (detail::fluid_departure_rate(channels, policy, fixed_p, hi) < lambda_per_slot && hi < 1e9) {
      hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::fluid_departure_rate(channels, policy, fixed_p, mid) < lambda_per_slot) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    res.equilibrium_backlog = 0.5 * (lo + hi);
  } else if (lambda_per_slot == 0.0) {
    res.equilibrium_backlog = 0.0;
  }
  return res;
}

/// Largest sustainable constant arrival rate, found by bisecting on whether
/// a trajectory started from a large standing backlog keeps growing. The
/// backlog is "stable" for this purpose when it shrinks back below its
/// starting level within the probe horizon.
inline double stability_boundary(int channels, RetxPolicy policy, double fixed_p = 1.0,
                                 double rel_tol = 1e-3) {
  const double n0 = 20.0 * channels;
  const double horizon = 100000.0;
  auto grows = [&](double lambda) {
    auto res = fluid_drain_trajectory(channels, lambda, n0, policy, fixed_p, horizon, 0.5);
    if (res.diverged) return true;
    return res.trajectory.back().backlog >= n0;
  };
  double lo = 0.0;
  double hi = 2.0 * channels;
  for (int it = 0; it < 200 && (hi - lo) > rel_tol * std::max(hi, 1e-12); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (grows(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// analytic vs. simulation cross-validation
// ---------------------------------------------------------------------------

struct Deviation {
  std::string metric;
  double sim = kNan;
  double model = kNan;
  double deviation = kNan;  // |sim-model| in tolerance units (see unit)
  double tolerance = kNan;
  std::string unit;  // "stderr" or "relative"
  bool ok = true;
};

struct ComparisonReport {
  std::vector<Deviation> items;
  bool all_ok = true;
};

/// Checks a simulator report produced in the analytic-comparable mode
/// (contention-slot abstraction, destroyed-at-Msg1 collisions, always
/// detected, fixed persistent p) against the model. Refuses reports whose
/// configuration the contention model does not cover.
inline ComparisonReport compare_with_simulation(const ContentionModel& model,
                                                const MetricsReport& sim,
                                                double rel_tolerance = 0.05,
                                                double stderr_tolerance = 3.0) {
  validate(model);
  auto key = [&](const std::string& k) -> std::string {
    auto it = sim.config_echo.find(k);
    if (it == sim.config_echo.end()) {
      throw Error(ErrorKind::IncompatibleConfig, "report lacks config key " + k);
    }
    return it->second;
  };
  auto require = [&](const std::string& k, const std::string& expect) {
    const std::string got = key(k);
    if (got != expect) {
      throw Error(ErrorKind::IncompatibleConfig,
                  k + " must be " + expect + " for analytic comparison, got " + got);
    }
  };
  require("mode", "analytic_compare");
  require("prach.collision_model", "destroyed_at_msg1");
  require("prach.detection_model", "always_detected");
  require("prach.retx_mode", "fixed");
  require("prach.backoff_indicator_ms", "0");
  require("prach.num_preambles", std::to_string(model.channels));
  if (std::abs(std::stod(key("prach.msg1_retx_probability")) - model.retx_probability) > 1e-9) {
    throw Error(ErrorKind::IncompatibleConfig, "msg1_retx_probability differs from model p");
  }
  if (sim.n_total != model.backlog) {
    throw Error(ErrorKind::IncompatibleConfig, "population differs from model backlog");
  }

  ComparisonReport rep;
  auto push = [&](Deviation d) {
    rep.all_ok = rep.all_ok && d.ok;
    rep.items.push_back(std::move(d));
  };

  if (!std::isnan(sim.tagged_success_rate)) {
    const double q = slot_success_probability(model);
    const double trials = sim.slots * static_cast<double>(model.backlog);
    const double se = std::sqrt(std::max(q * (1.0 - q) / std::max(trials, 1.0), 1e-300));
    Deviation d;
    d.metric = "per_slot_success_probability";
    d.sim = sim.tagged_success_rate;
    d.model = q;
    d.deviation = std::abs(d.sim - d.model) / se;
    d.tolerance = stderr_tolerance;
    d.unit = "stderr";
    d.ok = d.deviation <= d.tolerance;
    push(d);
  }
  if (!std::isnan(sim.mean_delay_slots) || !std::isnan(sim.drain_slots)) {
    const auto prof = exact_drain_time(model.channels, model.backlog, model.retx_probability);
    if (!std::isnan(sim.mean_delay_slots)) {
      Deviation d;
      d.metric = "mean_delay_slots";
      d.sim = sim.mean_delay_slots;
      d.model = prof.mean_delay_slots;
      d.deviation = std::abs(d.sim - d.model) / std::max(std::abs(d.model), 1e-12);
      d.tolerance = rel_tolerance;
      d.unit = "relative";
      d.ok = d.deviation <= d.tolerance;
      push(d);
    }
    if (!std::isnan(sim.drain_slots)) {
      // one drain realization: gate on the chain's own standard deviation
      Deviation d;
      d.metric = "drain_slots";
      d.sim = sim.drain_slots;
      d.model = prof.drain_mean_slots;
      d.deviation = std::abs(d.sim - d.model) / std::max(prof.drain_sd_slots, 1e-12);
      d.tolerance = 4.0;
      d.unit = "stderr";
      d.ok = d.deviation <= d.tolerance;
      push(d);
    }
  }
  return rep;
}

}  // namespace rachsim

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rachsim/rng.hpp"
#include "rachsim/scenario.hpp"
#include "rachsim/simulator.hpp"
#include "rachsim/traffic.hpp"

using namespace rachsim;

namespace {

bool kind_is(const Error& e, ErrorKind k) { return e.kind() == k; }

/// Independent oracle: Simpson quadrature of the Beta(3,4) density
/// 60 x^2 (1-x)^3 over [lo, hi].
double beta34_mass(double lo, double hi) {
  auto f = [](double x) { return 60.0 * x * x * (1.0 - x) * (1.0 - x) * (1.0 - x); };
  const int n = 2000;  // even
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("uniform activations arrive evenly, law-of-large-numbers check", "[traffic][oracle]") {
  // one 60000-device draw has ~3% relative noise per one-second bin, so the
  // 5% bound is checked on the average over 50 independent populations
  constexpr int kReps = 50;
  constexpr int kDevices = 60000;
  TrafficModel model;
  model.law = TrafficLaw::Uniform;
  model.span_ms = 60000.0;
  std::vector<double> per_second(60, 0.0);
  for (int r = 0; r < kReps; ++r) {
    RngStream s(500 + r, 0);
    const auto times = sample_activation_times(model, kDevices, s);
    REQUIRE(times.size() == kDevices);
    REQUIRE(std::is_sorted(times.begin(), times.end()));
    for (const auto& t : times) {
      REQUIRE(t.sf < 60000);
      per_second[t.sf / 1000] += 1.0;
    }
  }
  for (int sec = 0; sec < 60; ++sec) {
    const double avg = per_second[sec] / kReps;
    CHECK(std::abs(avg - 1000.0) / 1000.0 < 0.05);
  }
}

TEST_CASE("beta(3,4) activation burst peaks near 4 s over a 10 s span", "[traffic][oracle]") {
  TrafficModel model;
  model.law = TrafficLaw::Beta;
  model.alpha = 3.0;
  model.beta = 4.0;
  model.span_ms = 10000.0;
  RngStream s(7, 0);
  constexpr int kDevices = 1'000'000;
  const auto times = sample_activation_times(model, kDevices, s);

  // 0.5 s histogram vs. quadrature of the density
  std::vector<double> counts(20, 0.0);
  for (const auto& t : times) counts[std::min<std::uint64_t>(t.sf / 500, 19)] += 1.0;
  int empirical_peak = 0;
  for (int b = 0; b < 20; ++b) {
    if (counts[b] > counts[empirical_peak]) empirical_peak = b;
    const double expected = beta34_mass(b * 0.05, (b + 1) * 0.05);
    if (expected > 0.02) {
      CHECK(std::abs(counts[b] / kDevices - expected) / expected < 0.03);
    }
  }
  // mode of Beta(3,4) is (a-1)/(a+b-2) = 0.4 of the span
  const double peak_center_ms = (empirical_peak + 0.5) * 500.0;
  CHECK(std::abs(peak_center_ms - 4000.0) <= 500.0);
}

TEST_CASE("an empty population produces no activations", "[traffic]") {
  TrafficModel model;
  RngStream s(1, 0);
  CHECK(sample_activation_times(model, 0, s).empty());
}

TEST_CASE("beta(1,1) is uniform: Kolmogorov-Smirnov on 1e5 draws", "[traffic][oracle]") {
  RngStream s(11, 0);
  constexpr int kN = 100'000;
  std::vector<double> xs(kN);
  for (auto& x : xs) x = sample_beta(1.0, 1.0, s);
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double f = xs[static_cast<std::size_t>(i)];
    d = std::max(d, std::abs(f - static_cast<double>(i) / kN));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / kN));
  }
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(kN)));  // 1% critical value
}

TEST_CASE("beta(3,4) sample moments match the analytic mean and variance", "[traffic][oracle]") {
  RngStream s(3, 0);
  constexpr int kN = 100'000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double x = sample_beta(3.0, 4.0, s);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / kN;
  const double var = sum2 / kN - mean * mean;
  CHECK(std::abs(mean - 3.0 / 7.0) < 0.01);
  const double analytic_var = 12.0 / (49.0 * 8.0);
  CHECK(std::abs(var - analytic_var) / analytic_var < 0.10);
}

TEST_CASE("periodic arrivals step by the period", "[traffic]") {
  TrafficModel model;
  model.law = TrafficLaw::Periodic;
  model.period_ms = 1000;
  model.jitter_ms = 0;
  RngStream s(1, 0);
  CHECK(next_data_arrival(model, SimTime{500}, s).sf == 1500);
}

TEST_CASE("poisson inter-arrival mean matches the exponential law", "[traffic][oracle]") {
  TrafficModel model;
  model.law = TrafficLaw::Poisson;
  model.rate_per_s = 1.0;
  RngStream s(5, 0);
  double acc = 0.0;
  constexpr int kN = 100'000;
  SimTime now{0};
  for (int i = 0; i < kN; ++i) {
    const SimTime next = next_data_arrival(model, now, s);
    REQUIRE(next > now);
    acc += static_cast<double>(next - now);
    now = next;
  }
  CHECK(std::abs(acc / kN - 1000.0) / 1000.0 < 0.02);
}

TEST_CASE("one-shot laws have no inter-arrival times", "[traffic]") {
  TrafficModel model;
  model.law = TrafficLaw::Uniform;
  RngStream s(1, 0);
  CHECK_THROWS_MATCHES(next_data_arrival(model, SimTime{0}, s), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return kind_is(e, ErrorKind::UnsupportedLaw); }));
}

TEST_CASE("invalid traffic parameters are rejected", "[traffic]") {
  RngStream s(1, 0);
  CHECK_THROWS_MATCHES(sample_beta(0.0, 1.0, s), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return kind_is(e, ErrorKind::InvalidParameter); }));
  TrafficModel bad;
  bad.law = TrafficLaw::Beta;
  bad.alpha = -1.0;
  CHECK_THROWS_MATCHES(sample_activation_times(bad, 10, s), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return kind_is(e, ErrorKind::InvalidParameter); }));
}

TEST_CASE("mixed-class populations activate every device, tagged by class", "[traffic]") {
  Scenario sc = parse_scenario(
      "name = mix\nseed = 3\nduration_sf = 60000\n"
      "population.0.class = low\npopulation.0.n = 200\n"
      "population.0.traffic.law = beta\npopulation.0.traffic.span_ms = 2000\n"
      "population.1.class = high\npopulation.1.n = 100\n"
      "population.1.traffic.law = uniform\npopulation.1.traffic.span_ms = 1000\n");
  auto rep = Simulator(sc).run();
  CHECK(rep.n_total == 300);
  CHECK(rep.activated == 300);
  CHECK(rep.succeeded + rep.failed + rep.censored == 300);
  // both classes resolved at this light load
  CHECK(rep.success_prob_low >= 0.0);
  CHECK(rep.success_prob_high >= 0.0);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "rachsim/analytic.hpp"
#include "rachsim/prach.hpp"
#include "rachsim/scenario.hpp"
#include "rachsim/simulator.hpp"

using namespace rachsim;

namespace {

Device make_device(int id, PriorityClass cls, std::uint64_t seed) {
  Device d;
  d.id = id;
  d.cls = cls;
  d.rng = device_stream(seed, id);
  return d;
}

}  // namespace

TEST_CASE("eab gate admits everyone when disabled or at factor 1", "[rach]") {
  RngStream s(1, 0);
  Device dev = make_device(0, PriorityClass::LowPriority, 1);
  EabConfig off;
  off.enabled = false;
  off.barring_factor = 0.0;
  for (int i = 0; i < 100; ++i) CHECK(eab_gate(dev, off, s).admitted);

  EabConfig open;
  open.enabled = true;
  open.barring_factor = 1.0;
  for (int i = 0; i < 100; ++i) CHECK(eab_gate(dev, open, s).admitted);
}

TEST_CASE("eab admission fraction matches the barring factor", "[rach][oracle]") {
  RngStream s(17, 0);
  Device dev = make_device(0, PriorityClass::LowPriority, 17);
  EabConfig cfg;
  cfg.enabled = true;
  cfg.barring_factor = 0.5;
  cfg.barring_time_ms = 4000;
  int admitted = 0;
  constexpr int kTrials = 100'000;
  for (int i = 0; i < kTrials; ++i) {
    const auto d = eab_gate(dev, cfg, s);
    if (d.admitted) {
      ++admitted;
    } else {
      // standard barring delay: barring_time * (0.7 + 0.6 u)
      CHECK(d.barred_for_ms >= 2800);
      CHECK(d.barred_for_ms <= 5200);
    }
  }
  CHECK(std::abs(admitted / static_cast<double>(kTrials) - 0.5) < 0.01);
}

TEST_CASE("high-priority devices are exempt from low-priority barring", "[rach]") {
  Scenario sc = parse_scenario(
      "seed = 5\nduration_sf = 30000\n"
      "population.0.class = low\npopulation.0.n = 5\n"
      "population.0.traffic.law = uniform\npopulation.0.traffic.span_ms = 1000\n"
      "population.1.class = high\npopulation.1.n = 5\n"
      "population.1.traffic.law = uniform\npopulation.1.traffic.span_ms = 1000\n"
      "eab.enabled = true\neab.barring_factor = 0\neab.barring_time_ms = 4000\n"
      "eab.applies_to = low\nprach.detection_model = always_detected\n");
  auto rep = Simulator(sc).run();
  CHECK(rep.success_prob_high == 1.0);
  CHECK(rep.censored == 5);  // barred forever, never resolved
}

TEST_CASE("select_preamble with a single preamble always picks it", "[rach]") {
  RngStream s(1, 0);
  for (int i = 0; i < 50; ++i) CHECK(select_preamble(1, s) == 0);
}

TEST_CASE("two devices pair on the same preamble at rate 1/M", "[rach][oracle]") {
  RngStream a(100, 1);
  RngStream b(100, 2);
  constexpr int kTrials = 100'000;
  int same = 0;
  for (int i = 0; i < kTrials; ++i) {
    if (select_preamble(54, a) == select_preamble(54, b)) ++same;
  }
  const double p = same / static_cast<double>(kTrials);
  const double expect = 1.0 / 54.0;
  const double se = std::sqrt(expect * (1.0 - expect) / kTrials);
  CHECK(std::abs(p - expect) < 4.0 * se);
}

TEST_CASE("singleton occupancy matches an independent Monte Carlo oracle", "[rach][oracle]") {
  // production path: 30 devices picking from 54 preambles
  constexpr int kTrials = 100'000;
  constexpr int kU = 30, kM = 54;
  RngStream s(9, 0);
  double prod_singletons = 0.0;
  std::vector<int> occ(kM);
  for (int t = 0; t < kTrials; ++t) {
    std::fill(occ.begin(), occ.end(), 0);
    for (int u = 0; u < kU; ++u) ++occ[select_preamble(kM, s)];
    for (int c : occ) prod_singletons += (c == 1) ? 1.0 : 0.0;
  }
  prod_singletons /= kTrials;

  // oracle: separate generator, separate counting code
  std::mt19937 gen(777);
  std::uniform_int_distribution<int> pick(0, kM - 1);
  double oracle_singletons = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    int counts[kM] = {};
    for (int u = 0; u < kU; ++u) ++counts[pick(gen)];
    for (int c : counts) oracle_singletons += (c == 1) ? 1.0 : 0.0;
  }
  oracle_singletons /= kTrials;

  CHECK(std::abs(prod_singletons - oracle_singletons) / oracle_singletons < 0.02);
}

TEST_CASE("a lone always-detected device is granted a RAR", "[rach]") {
  PrachConfig cfg;
  cfg.detection_model = DetectionModel::AlwaysDetected;
  RngStream cell(1, 0);
  const auto out = enb_process_opportunity({{0, 7, 1}}, cfg, cell);
  REQUIRE(out.size() == 1);
  CHECK(out[0].outcome == OpportunityOutcome::RarGranted);
  CHECK_FALSE(out[0].collided);
}

TEST_CASE("destroyed-at-Msg1 collisions destroy all colliders", "[rach]") {
  PrachConfig cfg;
  cfg.collision_model = CollisionModel::DestroyedAtMsg1;
  RngStream cell(1, 0);
  const auto out = enb_process_opportunity({{0, 3, 1}, {1, 3, 2}}, cfg, cell);
  REQUIRE(out.size() == 2);
  CHECK(out[0].outcome == OpportunityOutcome::CollisionDestroyed);
  CHECK(out[1].outcome == OpportunityOutcome::CollisionDestroyed);
  CHECK(out[0].collided);
  CHECK(out[1].collided);
}

TEST_CASE("collide-at-Msg3 grants RARs to every collider", "[rach]") {
  PrachConfig cfg;
  cfg.collision_model = CollisionModel::CollideAtMsg3;
  cfg.detection_model = DetectionModel::AlwaysDetected;
  RngStream cell(1, 0);
  const auto out = enb_process_opportunity({{0, 3, 1}, {1, 3, 1}, {2, 9, 1}}, cfg, cell);
  CHECK(out[0].outcome == OpportunityOutcome::RarGranted);
  CHECK(out[1].outcome == OpportunityOutcome::RarGranted);
  CHECK(out[2].outcome == OpportunityOutcome::RarGranted);
  CHECK(out[0].collided);
  CHECK(out[1].collided);
  CHECK_FALSE(out[2].collided);
}

TEST_CASE("preambles outside the pool are rejected", "[rach]") {
  PrachConfig cfg;
  RngStream cell(1, 0);
  CHECK_THROWS_MATCHES(enb_process_opportunity({{0, 54, 1}}, cfg, cell), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::InvalidPreamble;
                       }));
}

TEST_CASE("eNB singleton fraction at U=100, M=54 matches a brute-force oracle",
          "[rach][oracle]") {
  PrachConfig cfg;
  cfg.detection_model = DetectionModel::AlwaysDetected;
  cfg.collision_model = CollisionModel::CollideAtMsg3;
  RngStream cell(4, 0);
  RngStream picker(4, 1);
  constexpr int kOps = 10'000;
  constexpr int kU = 100;
  double singleton_frac = 0.0;
  std::vector<Msg1Tx> txs(kU);
  for (int t = 0; t < kOps; ++t) {
    for (int u = 0; u < kU; ++u) txs[u] = {u, select_preamble(54, picker), 1};
    const auto out = enb_process_opportunity(txs, cfg, cell);
    int singles = 0;
    for (const auto& o : out) {
      if (o.outcome == OpportunityOutcome::RarGranted && !o.collided) ++singles;
    }
    singleton_frac += static_cast<double>(singles) / kU;
  }
  singleton_frac /= kOps;

  std::mt19937 gen(4242);
  std::uniform_int_distribution<int> pick(0, 53);
  double oracle_frac = 0.0;
  for (int t = 0; t < kOps; ++t) {
    int counts[54] = {};
    int choice[kU];
    for (int u = 0; u < kU; ++u) {
      choice[u] = pick(gen);
      ++counts[choice[u]];
    }
    int singles = 0;
    for (int u = 0; u < kU; ++u) {
      if (counts[choice[u]] == 1) ++singles;
    }
    oracle_frac += static_cast<double>(singles) / kU;
  }
  oracle_frac /= kOps;

  CHECK(std::abs(singleton_frac - oracle_frac) / oracle_frac < 0.02);
}

TEST_CASE("rar grant capacity turns the overflow into missed detections", "[rach]") {
  PrachConfig cfg;
  cfg.detection_model = DetectionModel::AlwaysDetected;
  cfg.rar_grant_capacity = 2;
  RngStream cell(1, 0);
  const auto out = enb_process_opportunity({{0, 1, 1}, {1, 5, 1}, {2, 9, 1}}, cfg, cell);
  int granted = 0, missed = 0;
  for (const auto& o : out) {
    granted += o.outcome == OpportunityOutcome::RarGranted;
    missed += o.outcome == OpportunityOutcome::NotDetected;
  }
  CHECK(granted == 2);
  CHECK(missed == 1);
}

TEST_CASE("clean single-device access delay is the sum of the configured timers",
          "[rach][oracle]") {
  Scenario sc = parse_scenario(
      "seed = 2\nn = 1\nlaw = uniform\nspan_ms = 1\nduration_sf = 10000\n"
      "prach.detection_model = always_detected\n");
  auto rep = Simulator(sc).run();
  REQUIRE(rep.succeeded == 1);
  // activation at sf 0; Msg1 at the next PRACH occasion; then RAR window,
  // Msg2->Msg3 gap, the Msg3 subframe and the eNB Msg4 turnaround
  const auto& p = sc.prach;
  const double expected = p.period_sf + 1 + p.rar_window_sf + p.msg2_to_msg3_delay_sf + 1 +
                          p.msg4_delay_sf;
  CHECK(rep.delay.mean_ms == expected);
  CHECK(rep.delay.p99_ms == expected);
  CHECK(rep.msg1_mean == 1.0);
}

TEST_CASE("a forced collision with a single preamble transmission fails the device", "[rach]") {
  Scenario sc = parse_scenario(
      "seed = 3\nn = 2\nlaw = uniform\nspan_ms = 1\nduration_sf = 10000\n"
      "prach.num_preambles = 1\nprach.max_preamble_tx = 1\n"
      "prach.detection_model = always_detected\n");
  auto rep = Simulator(sc).run();
  CHECK(rep.failed == 2);
  CHECK(rep.succeeded == 0);
  REQUIRE(rep.msg1_hist.size() == 1);
  CHECK(rep.msg1_hist[0] == 2);  // exactly one transmission each
}

TEST_CASE("BI=0 retries at the immediately next opportunity (energy timeline check)",
          "[rach][oracle]") {
  Scenario sc = parse_scenario(
      "seed = 4\nn = 2\nlaw = uniform\nspan_ms = 1\nduration_sf = 10000\n"
      "prach.num_preambles = 1\nprach.max_preamble_tx = 2\n"
      "prach.backoff_indicator_ms = 0\n"
      "prach.collision_model = destroyed_at_msg1\n");
  Simulator sim(sc);
  auto rep = sim.run();
  CHECK(rep.failed == 2);

  // deterministic per-device timeline: idle [0,5), Msg1 [5,6), RAR listen
  // [6,11), timeout -> immediate retry at sf 15, Msg1 [15,16), RAR [16,21)
  const auto& pw = sc.power;
  const auto& pc = sc.prach;
  const double tx1 = pw.tx_total_mw(msg1_tx_power_dbm(pc, 1)) * 1.0 / 1000.0;
  const double tx2 = pw.tx_total_mw(msg1_tx_power_dbm(pc, 2)) * 1.0 / 1000.0;
  const double idle = pw.idle_mw * (5.0 + 4.0) / 1000.0;
  const double rx = pw.rx_mw * (5.0 + 5.0) / 1000.0;
  const double expected = tx1 + tx2 + idle + rx;
  CHECK(sim.device(0).ledger.total_mj() == Catch::Approx(expected).epsilon(1e-12));
  CHECK(sim.device(0).attempt_n == 2);
  CHECK(sim.device(0).state == DeviceState::Failed);
}

TEST_CASE("persistent-probability gate honors its mode and probability", "[rach][oracle]") {
  PrachConfig off;
  RngStream s(1, 0);
  CHECK_THROWS_MATCHES(msg1_retx_decision(off, s), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::ModeNotEnabled;
                       }));

  PrachConfig certain;
  certain.retx_mode = RetxMode::FixedP;
  certain.msg1_retx_probability = 1.0;
  for (int i = 0; i < 100; ++i) CHECK(msg1_retx_decision(certain, s));

  PrachConfig half;
  half.retx_mode = RetxMode::FixedP;
  half.msg1_retx_probability = 0.5;
  int yes = 0;
  constexpr int kTrials = 100'000;
  for (int i = 0; i < kTrials; ++i) yes += msg1_retx_decision(half, s) ? 1 : 0;
  CHECK(std::abs(yes / static_cast<double>(kTrials) - 0.5) < 0.01);

  // the M-over-U heuristic at M=5, U=10
  CHECK(optimize_retx_probability(5, 10) == 0.5);
}

TEST_CASE("population conservation holds at the horizon", "[rach]") {
  Scenario sc = parse_scenario(
      "seed = 6\nn = 2000\nlaw = beta\nspan_ms = 2000\nduration_sf = 8000\n");
  auto rep = Simulator(sc).run_until(SimTime{8000});
  CHECK(rep.activated <= 2000);
  CHECK(rep.succeeded + rep.failed + rep.censored == rep.activated);
  CHECK(rep.censored >= 0);
}

TEST_CASE("failed devices spent exactly the full preamble budget", "[rach]") {
  Scenario sc = parse_scenario(
      "seed = 8\nn = 3000\nlaw = beta\nspan_ms = 1000\nduration_sf = 60000\n");
  Simulator sim(sc);
  auto rep = sim.run();
  REQUIRE(rep.failed > 0);  // this load is far beyond capacity
  for (std::size_t i = 0; i < sim.device_count(); ++i) {
    const auto& dev = sim.device(i);
    if (dev.state == DeviceState::Failed) {
      CHECK(dev.attempt_n == sc.prach.max_preamble_tx);
    }
    CHECK(dev.attempt_n <= sc.prach.max_preamble_tx);
  }
  CHECK(static_cast<int>(rep.msg1_hist.size()) <= sc.prach.max_preamble_tx);
}

TEST_CASE("per-slot success probability matches the closed form (bridge invariant)",
          "[rach][oracle]") {
  // analytic-comparable mode with a held backlog of U devices
  Scenario sc = parse_scenario(
      "seed = 12\nmode = analytic_compare\nanalytic.hold_backlog = true\n"
      "n = 10\nlaw = uniform\nspan_ms = 1\nduration_sf = 20000\n"
      "prach.num_preambles = 5\nprach.period_sf = 1\nprach.backoff_indicator_ms = 0\n"
      "prach.max_preamble_tx = 1000000\nprach.detection_model = always_detected\n"
      "prach.collision_model = destroyed_at_msg1\n"
      "prach.retx_mode = fixed\nprach.msg1_retx_probability = 0.5\n");
  auto rep = Simulator(sc).run();
  const double q = slot_success_probability(ContentionModel{5, 10, 0.5});
  const double trials = rep.slots * 10.0;
  const double se = std::sqrt(q * (1.0 - q) / trials);
  REQUIRE(rep.slots > 15000.0);
  CHECK(std::abs(rep.tagged_success_rate - q) < 3.0 * se);
}

TEST_CASE("success probability never rises with population size", "[rach]") {
  // desk-scale grid: PRACH period x10, beta burst
  double prev = 1.1;
  for (const int n : {500, 1500, 3000, 4500}) {
    Scenario sc = parse_scenario(
        "seed = 21\nlaw = beta\nspan_ms = 10000\nduration_sf = 70000\n"
        "prach.period_sf = 50\nn = " + std::to_string(n) + "\n");
    const auto rep = Simulator(sc).run();
    CHECK(rep.success_prob <= prev + 0.005);  // small statistical slack
    prev = rep.success_prob;
  }
}

TEST_CASE("preamble pool partitioning keeps the classes out of each other's way", "[rach]") {
  PrachConfig cfg;
  cfg.num_preambles = 54;
  cfg.preamble_split = 10;
  const auto high = preamble_pool(cfg, PriorityClass::HighPriority);
  const auto low = preamble_pool(cfg, PriorityClass::LowPriority);
  CHECK(high.first == 0);
  CHECK(high.second == 10);
  CHECK(low.first == 10);
  CHECK(low.second == 54);
  RngStream s(1, 0);
  for (int i = 0; i < 200; ++i) {
    const int p = select_preamble(low.first, low.second, s);
    CHECK(p >= 10);
    CHECK(p < 54);
  }
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "rachsim/cobalt.hpp"
#include "rachsim/scenario.hpp"
#include "rachsim/simulator.hpp"

using namespace rachsim;

TEST_CASE("a map without a COBALT region is pure legacy", "[cobalt]") {
  FrameConfig frame;  // 25 RBs, 2+2 PUCCH
  PrachConfig prach;  // PRACH every 5 sf
  const FrameMap map = build_frame_map(frame, prach, nullptr);
  CHECK(map.window_sf == 5);
  CHECK(map.count(CellTag::PuschCobalt) == 0);
  CHECK(map.count(CellTag::Pucch) == 4u * 5);
  CHECK(map.count(CellTag::Prach) == 6);
  CHECK(map.count(CellTag::PuschH2H) == 125u - 20 - 6);
}

TEST_CASE("H2H cells are the exact remainder (exhaustive counting oracle)", "[cobalt][oracle]") {
  FrameConfig frame;
  PrachConfig prach;
  CobaltConfig cobalt;
  cobalt.region_rbs_per_tti = 4;
  cobalt.tti_period_sf = 1;
  const FrameMap map = build_frame_map(frame, prach, &cobalt, 5);

  // independent cell-by-cell count
  std::size_t pucch = 0, prach_cells = 0, cob = 0, h2h = 0;
  for (int sf = 0; sf < map.window_sf; ++sf) {
    for (int rb = 0; rb < map.bandwidth_rbs; ++rb) {
      switch (map.at(sf, rb)) {
        case CellTag::Pucch: ++pucch; break;
        case CellTag::Prach: ++prach_cells; break;
        case CellTag::PuschCobalt: ++cob; break;
        case CellTag::PuschH2H: ++h2h; break;
      }
    }
  }
  CHECK(pucch == 5u * 4);
  CHECK(prach_cells == 6);
  CHECK(cob == 5u * 4);
  CHECK(h2h == 125u - 20 - 6 - 20);
  // disjoint tags: the four groups account for every cell exactly once
  CHECK(pucch + prach_cells + cob + h2h == 125);
  CHECK(map.count(CellTag::PuschH2H) == h2h);
}

TEST_CASE("a region that cannot fit raises RegionOverflow", "[cobalt]") {
  FrameConfig frame;
  PrachConfig prach;
  CobaltConfig too_big;
  too_big.region_rbs_per_tti = 16;  // 2 + 6 + 16 + 2 > 25 on PRACH subframes
  too_big.tti_period_sf = 5;
  CHECK_THROWS_MATCHES(build_frame_map(frame, prach, &too_big), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::RegionOverflow;
                       }));
  CobaltConfig whole_band;
  whole_band.region_rbs_per_tti = 25;
  CHECK_THROWS_MATCHES(build_frame_map(frame, prach, &whole_band), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::RegionOverflow;
                       }));
}

TEST_CASE("a lone device delivers at the first COBALT opportunity", "[cobalt]") {
  Scenario sc = parse_scenario(
      "seed = 2\nmode = cobalt\nn = 1\nlaw = uniform\nspan_ms = 1\nduration_sf = 5000\n"
      "cobalt.region_rbs_per_tti = 4\ncobalt.tti_period_sf = 5\n");
  auto rep = Simulator(sc).run();
  CHECK(rep.delivered == 1);
  CHECK(rep.delivery_exhausted == 0);
  // activation at sf 0, first region occasion at sf 5, data received end of
  // that subframe
  CHECK(rep.delivery_mean_ms == 6.0);
  CHECK(rep.signaling_per_delivery == 2.0);  // data + ack
}

TEST_CASE("two devices in a one-RB region always collide, then exhaust", "[cobalt]") {
  // zero retry backoff keeps both devices on the same TTI forever
  Scenario sc = parse_scenario(
      "seed = 3\nmode = cobalt\nn = 2\nlaw = uniform\nspan_ms = 1\nduration_sf = 20000\n"
      "cobalt.region_rbs_per_tti = 1\ncobalt.tti_period_sf = 5\ncobalt.max_retries = 4\n"
      "cobalt.retry_backoff_ms = 0\n");
  Simulator sim(sc);
  auto rep = sim.run();
  CHECK(rep.delivered == 0);
  CHECK(rep.delivery_exhausted == 2);
  // 1 initial attempt + 4 retries each
  CHECK(sim.device(0).cobalt_attempts == 5);
  CHECK(sim.device(1).cobalt_attempts == 5);
}

TEST_CASE("collision outcomes are symmetric within a resource block", "[cobalt]") {
  const auto delivered = resolve_cobalt_tti({0, 0, 1, 2, 2, 2}, 4);
  CHECK_FALSE(delivered[0]);
  CHECK_FALSE(delivered[1]);
  CHECK(delivered[2]);  // lone occupant
  CHECK_FALSE(delivered[3]);
  CHECK_FALSE(delivered[4]);
  CHECK_FALSE(delivered[5]);
}

TEST_CASE("delivered count matches the balls-in-bins oracle at U=20, R=10", "[cobalt][oracle]") {
  constexpr int kTrials = 10'000;
  constexpr int kU = 20, kR = 10;
  CobaltConfig cfg;
  cfg.region_rbs_per_tti = kR;
  RngStream s(5, 0);
  double delivered_mean = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    std::vector<int> picks(kU);
    for (auto& rb : picks) rb = pick_contention_rb(cfg, s);
    const auto delivered = resolve_cobalt_tti(picks, kR);
    for (const bool d : delivered) delivered_mean += d ? 1.0 : 0.0;
  }
  delivered_mean /= kTrials;

  std::mt19937 gen(99);
  std::uniform_int_distribution<int> pick(0, kR - 1);
  double oracle_mean = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    int counts[kR] = {};
    int choice[kU];
    for (int u = 0; u < kU; ++u) {
      choice[u] = pick(gen);
      ++counts[choice[u]];
    }
    for (int u = 0; u < kU; ++u) oracle_mean += counts[choice[u]] == 1 ? 1.0 : 0.0;
  }
  oracle_mean /= kTrials;

  CHECK(std::abs(delivered_mean - oracle_mean) / oracle_mean < 0.02);
}

TEST_CASE("message enumeration: 6 legacy, 2 COBALT, plus one per collision", "[cobalt][oracle]") {
  CHECK(signaling_message_count(DeliveryPath::LegacyRach) == 6);
  CHECK(signaling_message_count(DeliveryPath::Cobalt) == 2);
  for (int k = 1; k <= 5; ++k) {
    CHECK(signaling_message_count(DeliveryPath::Cobalt, k) == 2 + k);
  }
}

TEST_CASE("simulated clean deliveries match the fixed enumeration", "[cobalt][oracle]") {
  // legacy path: one device, clean channel -> Msg1..Msg4 + grant + data
  Scenario legacy = parse_scenario(
      "seed = 2\nmode = connected\nn = 1\nlaw = uniform\nspan_ms = 1\nduration_sf = 10000\n"
      "prach.detection_model = always_detected\n");
  auto rep_legacy = Simulator(legacy).run();
  REQUIRE(rep_legacy.delivered == 1);
  CHECK(rep_legacy.signaling_per_delivery == signaling_message_count(DeliveryPath::LegacyRach));

  Scenario cob = parse_scenario(
      "seed = 2\nmode = cobalt\nn = 1\nlaw = uniform\nspan_ms = 1\nduration_sf = 10000\n");
  auto rep_cob = Simulator(cob).run();
  REQUIRE(rep_cob.delivered == 1);
  CHECK(rep_cob.signaling_per_delivery == signaling_message_count(DeliveryPath::Cobalt));
}

TEST_CASE("exhausted payloads can fall back to the legacy RACH path", "[cobalt]") {
  Scenario sc = parse_scenario(
      "seed = 7\nmode = cobalt\nn = 2\nlaw = uniform\nspan_ms = 1\nduration_sf = 60000\n"
      "cobalt.region_rbs_per_tti = 1\ncobalt.tti_period_sf = 5\ncobalt.max_retries = 3\n"
      "cobalt.retry_backoff_ms = 0\n"
      "cobalt.fallback_to_rach = true\nprach.detection_model = always_detected\n");
  auto rep = Simulator(sc).run();
  // both payloads exhaust the one-RB region, then deliver over PRACH
  CHECK(rep.delivered == 2);
  CHECK(rep.delivery_exhausted == 0);
  CHECK(rep.activated == 2);  // two legacy procedures ran
}

TEST_CASE("cobalt vs legacy at bounded load: fewer messages, less energy, faster",
          "[cobalt][oracle]") {
  // offered load: 400 devices over 10 s = 0.2 payloads per TTI on a 4-RB
  // region (0.05 per RB), well under the 0.5 bound
  const std::string traffic =
      "seed = 31\nn = 400\nlaw = uniform\nspan_ms = 10000\nduration_sf = 30000\n"
      "prach.detection_model = always_detected\n";
  Scenario legacy = parse_scenario(traffic + "mode = connected\n");
  Scenario cob = parse_scenario(traffic + "mode = cobalt\n");
  auto rep_legacy = Simulator(legacy).run();
  auto rep_cob = Simulator(cob).run();
  REQUIRE(rep_legacy.delivered > 380);
  REQUIRE(rep_cob.delivered > 380);
  CHECK(rep_cob.signaling_per_delivery < rep_legacy.signaling_per_delivery);
  CHECK(rep_cob.energy_per_delivery_mj < rep_legacy.energy_per_delivery_mj);
  CHECK(rep_cob.delivery_p95_ms <= rep_legacy.delivery_p95_ms);
}

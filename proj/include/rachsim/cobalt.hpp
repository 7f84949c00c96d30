#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "rachsim/errors.hpp"
#include "rachsim/prach.hpp"
#include "rachsim/rng.hpp"

namespace rachsim {

/// Contention-based small-data region: a block of PUSCH resource blocks
/// reserved every tti_period_sf subframes. A device with a pending payload
/// picks one RB uniformly; a lone pick is a delivery, a shared RB destroys
/// every transmission in it (no capture).
struct CobaltConfig {
  int region_rbs_per_tti = 4;
  int tti_period_sf = 5;
  int max_retries = 10;          // attempts beyond the first
  int retry_backoff_ms = 20;     // uniform in [0, retry_backoff]
  bool payload_fits_one_rb = true;
  bool fallback_to_rach = false; // exhausted payloads retry over legacy RACH
};

inline void validate(const CobaltConfig& c) {
  if (c.region_rbs_per_tti < 1) throw_error(ErrorKind::InvalidConfig, "region_rbs_per_tti must be >= 1");
  if (c.tti_period_sf < 1) throw_error(ErrorKind::InvalidConfig, "tti_period_sf must be >= 1");
  if (c.max_retries < 1) throw_error(ErrorKind::InvalidConfig, "max_retries must be >= 1");
  if (c.retry_backoff_ms < 0) throw_error(ErrorKind::InvalidConfig, "retry_backoff_ms must be >= 0");
  if (!c.payload_fits_one_rb) {
    throw_error(ErrorKind::InvalidConfig, "multi-RB payloads are not supported");
  }
}

enum class CellTag : std::uint8_t { PuschH2H = 0, Pucch = 1, Prach = 2, PuschCobalt = 3 };

struct FrameConfig {
  int bandwidth_rbs = 25;   // 5 MHz
  int pucch_edge_rbs = 2;   // control RBs at each band edge, every subframe
};

inline void validate(const FrameConfig& c) {
  if (c.bandwidth_rbs < 1) throw_error(ErrorKind::InvalidConfig, "bandwidth_rbs must be >= 1");
  if (c.pucch_edge_rbs < 0) throw_error(ErrorKind::InvalidConfig, "pucch_edge_rbs must be >= 0");
}

constexpr int kPrachRbWidth = 6;  // standard PRACH occasion width

/// Uplink grid over a window of subframes, each cell tagged with its owner.
struct FrameMap {
  int bandwidth_rbs = 0;
  int window_sf = 0;
  std::vector<CellTag> cells;  // row-major: subframe * bandwidth + rb

  CellTag at(int sf, int rb) const { return cells[static_cast<std::size_t>(sf) * bandwidth_rbs + rb]; }

  std::size_t count(CellTag tag) const {
    std::size_t n = 0;
    for (CellTag c : cells) n += (c == tag) ? 1 : 0;
    return n;
  }
};

/// Lays PUCCH on both band edges, PRACH (6 RBs next to the lower edge) on
/// every PRACH occasion, and the COBALT region below the upper edge on every
/// COBALT TTI; everything else stays H2H PUSCH. cobalt may be null.
inline FrameMap build_frame_map(const FrameConfig& frame, const PrachConfig& prach,
                                const CobaltConfig* cobalt, int window_sf = 0) {
  validate(frame);
  validate(prach);
  const int cobalt_rbs = cobalt ? cobalt->region_rbs_per_tti : 0;
  if (cobalt) validate(*cobalt);
  if (window_sf <= 0) {
    window_sf = prach.period_sf;
    if (cobalt) window_sf = static_cast<int>(std::lcm(prach.period_sf, cobalt->tti_period_sf));
  }

  const int bw = frame.bandwidth_rbs;
  if (2 * frame.pucch_edge_rbs > bw) {
    throw_error(ErrorKind::RegionOverflow, "PUCCH edges exceed the bandwidth");
  }
  if (frame.pucch_edge_rbs + kPrachRbWidth + frame.pucch_edge_rbs > bw) {
    throw_error(ErrorKind::RegionOverflow, "PRACH does not fit between the PUCCH edges");
  }
  // worst case: a subframe carrying PRACH and the COBALT region at once
  if (frame.pucch_edge_rbs + kPrachRbWidth + cobalt_rbs + frame.pucch_edge_rbs > bw) {
    throw_error(ErrorKind::RegionOverflow, "COBALT region does not fit next to PRACH");
  }

  FrameMap map;
  map.bandwidth_rbs = bw;
  map.window_sf = window_sf;
  map.cells.assign(static_cast<std::size_t>(bw) * window_sf, CellTag::PuschH2H);
  auto set = [&](int sf, int rb, CellTag tag) {
    map.cells[static_cast<std::size_t>(sf) * bw + rb] = tag;
  };
  for (int sf = 0; sf < window_sf; ++sf) {
    for (int rb = 0; rb < frame.pucch_edge_rbs; ++rb) {
      set(sf, rb, CellTag::Pucch);
      set(sf, bw - 1 - rb, CellTag::Pucch);
    }
    if (sf % prach.period_sf == 0) {
      for (int rb = 0; rb < kPrachRbWidth; ++rb) set(sf, frame.pucch_edge_rbs + rb, CellTag::Prach);
    }
    if (cobalt && sf % cobalt->tti_period_sf == 0) {
      for (int rb = 0; rb < cobalt_rbs; ++rb) {
        set(sf, bw - frame.pucch_edge_rbs - 1 - rb, CellTag::PuschCobalt);
      }
    }
  }
  return map;
}

enum class CobaltOutcome { Delivered, CollisionRetry, Exhausted };

/// Device-side RB pick for one COBALT TTI.
inline int pick_contention_rb(const CobaltConfig& cfg, RngStream& stream) {
  return static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(cfg.region_rbs_per_tti)));
}

/// Resolves one TTI: entry i delivered iff its RB was picked by nobody else.
inline std::vector<bool> resolve_cobalt_tti(const std::vector<int>& rb_choices, int region_rbs) {
  std::vector<int> occupancy(static_cast<std::size_t>(region_rbs), 0);
  for (int rb : rb_choices) {
    if (rb < 0 || rb >= region_rbs) throw_error(ErrorKind::InvalidParameter, "RB outside region");
    ++occupancy[static_cast<std::size_t>(rb)];
  }
  std::vector<bool> delivered(rb_choices.size());
  for (std::size_t i = 0; i < rb_choices.size(); ++i) {
    delivered[i] = occupancy[static_cast<std::size_t>(rb_choices[i])] == 1;
  }
  return delivered;
}

enum class DeliveryPath { LegacyRach, Cobalt };

/// Fixed message enumeration used throughout: a clean legacy delivery is
/// Msg1 + Msg2 + Msg3 + Msg4 + uplink grant + data = 6 messages, and each
/// collided legacy attempt wastes Msg1 + Msg2 + Msg3. A clean COBALT
/// delivery is data + ack = 2; every collision adds one extra data
/// transmission.
inline int signaling_message_count(DeliveryPath path, int collision_retries = 0) {
  if (collision_retries < 0) throw_error(ErrorKind::InvalidParameter, "retries must be >= 0");
  switch (path) {
    case DeliveryPath::LegacyRach: return 6 + 3 * collision_retries;
    case DeliveryPath::Cobalt: return 2 + collision_retries;
  }
  return 0;
}

}  // namespace rachsim

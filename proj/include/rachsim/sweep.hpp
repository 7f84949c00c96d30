#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "rachsim/errors.hpp"
#include "rachsim/metrics.hpp"
#include "rachsim/scenario.hpp"
#include "rachsim/simulator.hpp"

namespace rachsim {

struct SweepAxis {
  std::string key;                  // dotted scenario key
  std::vector<std::string> values;  // applied verbatim as overrides
};

/// Cross-product experiment over a base scenario: every axis combination is
/// run with `replicates` consecutive seeds starting at the base seed.
struct SweepSpec {
  KvMap base_kv;
  std::string base_name = "sweep";
  std::vector<SweepAxis> axes;
  int replicates = 1;
  std::size_t cap = 4096;

  std::size_t point_count() const {
    std::size_t n = 1;
    for (const auto& ax : axes) n *= ax.values.size();
    return n;
  }
  std::size_t run_count() const { return point_count() * static_cast<std::size_t>(replicates); }
};

/// Sweep file grammar: `base = <scenario path>` (relative to the sweep file),
/// `axis.<i>.key`, `axis.<i>.values` (comma list), `replicates`, `cap`.
/// Inline `set.<scenario key> = value` entries override the base scenario.
inline SweepSpec load_sweep(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open sweep file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const KvMap kv = parse_kv_text(buf.str());

  SweepSpec spec;
  std::vector<std::pair<int, SweepAxis>> axes;
  for (const auto& [key, value] : kv) {
    if (key == "base") {
      auto base_path = std::filesystem::path(path).parent_path() / value;
      std::ifstream base_in(base_path, std::ios::binary);
      if (!base_in) throw Error(ErrorKind::Io, "cannot open base scenario '" + base_path.string() + "'");
      std::ostringstream base_buf;
      base_buf << base_in.rdbuf();
      spec.base_kv = parse_kv_text(base_buf.str());
      continue;
    }
    if (key == "replicates") {
      spec.replicates = detail::parse_int(key, value);
      if (spec.replicates < 1) throw ValidationError(key, "must be >= 1");
      continue;
    }
    if (key == "cap") {
      spec.cap = detail::parse_u64(key, value);
      continue;
    }
    if (key.rfind("axis.", 0) == 0) {
      const auto parts = split(key, '.');
      if (parts.size() != 3) throw ValidationError(key, "expected axis.<i>.key or axis.<i>.values");
      const int idx = detail::parse_int(key, parts[1]);
      auto it = std::find_if(axes.begin(), axes.end(), [&](auto& a) { return a.first == idx; });
      if (it == axes.end()) {
        axes.push_back({idx, SweepAxis{}});
        it = axes.end() - 1;
      }
      if (parts[2] == "key") {
        it->second.key = to_lower(value);
      } else if (parts[2] == "values") {
        for (const auto& v : split(value, ',')) {
          const std::string t = trim(v);
          if (!t.empty()) it->second.values.push_back(t);
        }
      } else {
        throw ValidationError(key, "expected axis.<i>.key or axis.<i>.values");
      }
      continue;
    }
    if (key.rfind("set.", 0) == 0) {
      spec.base_kv[key.substr(4)] = value;
      continue;
    }
    throw ValidationError(key, "unknown sweep key");
  }
  std::sort(axes.begin(), axes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [idx, ax] : axes) {
    if (ax.key.empty()) throw ValidationError("axis." + std::to_string(idx) + ".key", "missing");
    if (ax.values.empty()) throw ValidationError("axis." + std::to_string(idx) + ".values", "missing");
    spec.axes.push_back(std::move(ax));
  }
  if (spec.base_kv.count("name")) spec.base_name = spec.base_kv.at("name");
  return spec;
}

/// Materializes the scenario of one grid point / replicate pair.
inline Scenario sweep_point_scenario(const SweepSpec& spec, std::size_t point, int replicate) {
  KvMap kv = spec.base_kv;
  std::string label;
  std::size_t rest = point;
  // last axis varies fastest
  std::vector<std::string> chosen(spec.axes.size());
  for (std::size_t a = spec.axes.size(); a-- > 0;) {
    const auto& ax = spec.axes[a];
    chosen[a] = ax.values[rest % ax.values.size()];
    rest /= ax.values.size();
  }
  for (std::size_t a = 0; a < spec.axes.size(); ++a) {
    kv[spec.axes[a].key] = chosen[a];
    if (!label.empty()) label += ",";
    label += spec.axes[a].key + "=" + chosen[a];
  }
  Scenario sc = build_scenario(kv);
  sc.seed += static_cast<std::uint64_t>(replicate);
  if (!label.empty()) sc.name += "[" + label + "]";
  return sc;
}

/// Runs the full grid; results come back grid-major, seed-minor regardless
/// of how many worker threads execute the points.
inline std::vector<MetricsReport> run_sweep(const SweepSpec& spec, int jobs = 1) {
  const std::size_t runs = spec.run_count();
  if (runs > spec.cap) {
    throw Error(ErrorKind::CapExceeded, "sweep would execute " + std::to_string(runs) +
                                            " runs, cap is " + std::to_string(spec.cap));
  }
  // validate every grid point before executing anything
  for (std::size_t p = 0; p < spec.point_count(); ++p) (void)sweep_point_scenario(spec, p, 0);

  std::vector<MetricsReport> results(runs);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= runs) return;
      const std::size_t point = i / static_cast<std::size_t>(spec.replicates);
      const int rep = static_cast<int>(i % static_cast<std::size_t>(spec.replicates));
      results[i] = Simulator(sweep_point_scenario(spec, point, rep)).run();
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

}  // namespace rachsim

// rachsim command line: simulate scenarios, run sweeps, and evaluate the
// multichannel contention model analytically.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rachsim/rachsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

/// Lowest-precedence seed source: used only when neither the scenario file
/// nor --seed provides one.
void apply_env_seed(rachsim::KvMap& kv) {
  if (kv.count("seed")) return;
  const char* env = std::getenv("RACHSIM_SEED");
  if (!env || !*env) return;
  kv["seed"] = env;
}

rachsim::KvMap load_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rachsim::Error(rachsim::ErrorKind::Io, "cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return rachsim::parse_kv_text(buf.str());
}

void apply_set_overrides(rachsim::KvMap& kv, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw rachsim::ValidationError("--set", "expected key=value, got '" + s + "'");
    }
    const std::string key = rachsim::to_lower(rachsim::trim(s.substr(0, eq)));
    const std::string value = rachsim::trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw rachsim::ValidationError("--set", "expected key=value, got '" + s + "'");
    }
    kv[key] = value;
  }
}

rachsim::MetricsReport analytic_report(const rachsim::ContentionModel& model, double slot_ms,
                                       const std::string& label) {
  const auto prof = rachsim::exact_drain_time(model.channels, model.backlog, model.retx_probability);
  rachsim::MetricsReport rep;
  rep.scenario_name = label;
  rep.mode = "analytic";
  rep.n_total = model.backlog;
  rep.activated = model.backlog;
  rep.succeeded = prof.diverged ? 0 : model.backlog;
  rep.failed = 0;
  rep.censored = prof.diverged ? model.backlog : 0;
  rep.success_prob = prof.diverged ? 0.0 : 1.0;
  rep.tagged_success_rate = prof.per_slot_success;
  rep.mean_delay_slots = prof.mean_delay_slots;
  rep.drain_slots = prof.drain_mean_slots;
  rep.delay.mean_ms = prof.mean_delay_slots * slot_ms;
  rep.delay.p50_ms = prof.delay_p50_slots * slot_ms;
  rep.delay.p95_ms = prof.delay_p95_slots * slot_ms;
  rep.delay.p99_ms = prof.delay_p99_slots * slot_ms;
  rep.config_echo = {
      {"analytic.channels", std::to_string(model.channels)},
      {"analytic.backlog", std::to_string(model.backlog)},
      {"analytic.retx_probability", rachsim::format_double(model.retx_probability)},
      {"analytic.slot_ms", rachsim::format_double(slot_ms)},
  };
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTE machine-type random-access simulator and contention analyzer"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run one scenario file");
  std::string sim_path, sim_out, sim_format = "csv";
  std::vector<std::string> sim_sets;
  std::int64_t sim_seed = -1;
  bool sim_trace = false;
  sim_cmd->add_option("scenario", sim_path, "scenario file")->required();
  sim_cmd->add_option("--seed", sim_seed, "override the seed");
  sim_cmd->add_option("--out", sim_out, "output path (default stdout)");
  sim_cmd->add_option("--format", sim_format, "csv or json");
  sim_cmd->add_flag("--trace", sim_trace, "record per-device energy traces");
  sim_cmd->add_option("--set", sim_sets, "override a scenario key, key=value")->take_all();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  std::string sweep_path, sweep_out, sweep_format = "csv";
  int sweep_jobs = 1;
  sweep_cmd->add_option("spec", sweep_path, "sweep spec file")->required();
  sweep_cmd->add_option("--out", sweep_out, "output path (default stdout)");
  sweep_cmd->add_option("--format", sweep_format, "csv or json");
  sweep_cmd->add_option("--jobs", sweep_jobs, "concurrent runs")->check(CLI::PositiveNumber);

  // analyze
  auto* an_cmd = app.add_subcommand("analyze", "exact contention-model analysis");
  int an_m = 54, an_u = 0;
  double an_p = -1.0, an_slot_ms = 1.0;
  std::string an_out, an_format = "csv";
  an_cmd->add_option("--M", an_m, "channels / preambles")->required();
  an_cmd->add_option("--U", an_u, "backlogged devices")->required();
  an_cmd->add_option("--p", an_p, "retransmission probability (default min(1, M/U))");
  an_cmd->add_option("--slot-ms", an_slot_ms, "milliseconds per contention slot");
  an_cmd->add_option("--out", an_out, "output path (default stdout)");
  an_cmd->add_option("--format", an_format, "csv or json");

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "throughput-optimal retransmission probability");
  int opt_m = 54, opt_u = 0;
  double opt_slot_ms = 1.0;
  std::string opt_out, opt_format = "csv";
  opt_cmd->add_option("--M", opt_m, "channels / preambles")->required();
  opt_cmd->add_option("--U", opt_u, "backlogged devices")->required();
  opt_cmd->add_option("--slot-ms", opt_slot_ms, "milliseconds per contention slot");
  opt_cmd->add_option("--out", opt_out, "emit the profile at p* (default: text summary)");
  opt_cmd->add_option("--format", opt_format, "csv or json");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "parse a scenario and echo the effective config");
  std::string val_path;
  val_cmd->add_option("scenario", val_path, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) {
      auto kv = load_kv_file(sim_path);
      apply_env_seed(kv);
      apply_set_overrides(kv, sim_sets);
      if (sim_seed >= 0) kv["seed"] = std::to_string(sim_seed);
      if (sim_trace) kv["trace"] = "true";
      const auto sc = rachsim::build_scenario(kv);
      const auto report = rachsim::Simulator(sc).run();
      rachsim::emit_report({report}, rachsim::parse_format(sim_format), sim_out, std::cout);
      return kExitOk;
    }
    if (*sweep_cmd) {
      auto spec = rachsim::load_sweep(sweep_path);
      apply_env_seed(spec.base_kv);
      const auto reports = rachsim::run_sweep(spec, sweep_jobs);
      std::vector<std::string> header;
      header.push_back("sweep.base = " + spec.base_name);
      for (std::size_t i = 0; i < spec.axes.size(); ++i) {
        std::string vals;
        for (std::size_t v = 0; v < spec.axes[i].values.size(); ++v) {
          if (v) vals += ",";
          vals += spec.axes[i].values[v];
        }
        header.push_back("sweep.axis." + std::to_string(i) + ".key = " + spec.axes[i].key);
        header.push_back("sweep.axis." + std::to_string(i) + ".values = " + vals);
      }
      header.push_back("sweep.replicates = " + std::to_string(spec.replicates));
      rachsim::emit_report(reports, rachsim::parse_format(sweep_format), sweep_out, std::cout, header);
      return kExitOk;
    }
    if (*an_cmd) {
      if (an_u < 1) throw rachsim::ValidationError("--U", "must be >= 1");
      const double p = an_p > 0.0 ? an_p : rachsim::optimize_retx_probability(an_m, an_u);
      rachsim::ContentionModel model{an_m, an_u, p};
      char label[96];
      std::snprintf(label, sizeof(label), "analytic[M=%d,U=%d,p=%s]", an_m, an_u,
                    rachsim::format_double(p).c_str());
      const auto rep = analytic_report(model, an_slot_ms, label);
      rachsim::emit_report({rep}, rachsim::parse_format(an_format), an_out, std::cout);
      return kExitOk;
    }
    if (*opt_cmd) {
      if (opt_u < 1) throw rachsim::ValidationError("--U", "must be >= 1");
      const double p_star = rachsim::optimize_retx_probability(opt_m, opt_u);
      const double p_grid = rachsim::grid_search_retx_probability(opt_m, opt_u);
      const double thr = rachsim::slot_throughput(rachsim::ContentionModel{opt_m, opt_u, p_star});
      if (opt_out.empty()) {
        std::cout << "M = " << opt_m << ", U = " << opt_u << "\n"
                  << "p* (closed form)  = " << rachsim::format_double(p_star) << "\n"
                  << "p* (grid search)  = " << rachsim::format_double(p_grid) << "\n"
                  << "throughput at p*  = " << rachsim::format_double(thr) << " successes/slot\n";
        return kExitOk;
      }
      rachsim::ContentionModel model{opt_m, opt_u, p_star};
      char label[96];
      std::snprintf(label, sizeof(label), "optimize[M=%d,U=%d,p*=%s]", opt_m, opt_u,
                    rachsim::format_double(p_star).c_str());
      const auto rep = analytic_report(model, opt_slot_ms, label);
      rachsim::emit_report({rep}, rachsim::parse_format(opt_format), opt_out, std::cout);
      return kExitOk;
    }
    if (*val_cmd) {
      auto kv = load_kv_file(val_path);
      apply_env_seed(kv);
      const auto sc = rachsim::build_scenario(kv);
      for (const auto& w : rachsim::power_model_warnings(sc.power)) {
        std::cerr << "warning: " << w << "\n";
      }
      for (const auto& [k, v] : sc.echo()) std::cout << k << " = " << v << "\n";
      return kExitOk;
    }
  } catch (const rachsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case rachsim::ErrorKind::Parse:
      case rachsim::ErrorKind::Validation:
      case rachsim::ErrorKind::InvalidConfig:
      case rachsim::ErrorKind::InvalidParameter:
      case rachsim::ErrorKind::RegionOverflow:
      case rachsim::ErrorKind::CapExceeded:
      case rachsim::ErrorKind::Io:
        return kExitConfig;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rachsim/errors.hpp"
#include "rachsim/metrics.hpp"
#include "rachsim/strings.hpp"

namespace rachsim {

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_format(const std::string& s) {
  const std::string v = to_lower(s);
  if (v == "csv") return ReportFormat::Csv;
  if (v == "json") return ReportFormat::Json;
  throw ValidationError("format", "expected csv or json, got '" + s + "'");
}

/// Pinned CSV column order; changing it is a schema break guarded by a
/// golden test. The metrics dictionary in the README documents each column.
inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "scenario", "seed", "mode",
      "n_total", "activated", "succeeded", "failed", "censored",
      "success_prob", "success_prob_low", "success_prob_high", "collision_prob",
      "delay_mean_ms", "delay_p50_ms", "delay_p95_ms", "delay_p99_ms",
      "msg1_mean", "msg1_hist",
      "energy_mean_mj", "energy_p95_mj", "energy_total_mj",
      "requests", "delivered", "delivery_exhausted",
      "signaling_per_delivery", "energy_per_delivery_mj",
      "delivery_mean_ms", "delivery_p95_ms",
      "slots", "tagged_success_rate", "drain_slots", "mean_delay_slots",
      "events_scheduled", "events_processed",
  };
  return cols;
}

namespace detail {

inline std::string msg1_hist_cell(const std::vector<std::int64_t>& hist) {
  std::string out;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(hist[i]);
  }
  return out;
}

inline std::vector<std::string> csv_row(const MetricsReport& r) {
  return {
      r.scenario_name,
      std::to_string(r.seed),
      r.mode,
      std::to_string(r.n_total),
      std::to_string(r.activated),
      std::to_string(r.succeeded),
      std::to_string(r.failed),
      std::to_string(r.censored),
      format_double(r.success_prob),
      format_double(r.success_prob_low),
      format_double(r.success_prob_high),
      format_double(r.collision_prob),
      format_double(r.delay.mean_ms),
      format_double(r.delay.p50_ms),
      format_double(r.delay.p95_ms),
      format_double(r.delay.p99_ms),
      format_double(r.msg1_mean),
      msg1_hist_cell(r.msg1_hist),
      format_double(r.energy_mean_mj),
      format_double(r.energy_p95_mj),
      format_double(r.energy_total_mj),
      std::to_string(r.requests),
      std::to_string(r.delivered),
      std::to_string(r.delivery_exhausted),
      format_double(r.signaling_per_delivery),
      format_double(r.energy_per_delivery_mj),
      format_double(r.delivery_mean_ms),
      format_double(r.delivery_p95_ms),
      format_double(r.slots),
      format_double(r.tagged_success_rate),
      format_double(r.drain_slots),
      format_double(r.mean_delay_slots),
      std::to_string(r.events_scheduled),
      std::to_string(r.events_processed),
  };
}

}  // namespace detail

/// CSV report: a `# key = value` header block echoing the first run's
/// effective configuration (plus any extra header lines the caller passes),
/// the column row, then one data row per run.
inline std::string to_csv(const std::vector<MetricsReport>& reports,
                          const std::vector<std::string>& extra_header = {}) {
  std::ostringstream out;
  out << "# rachsim-report 1\n";
  for (const auto& line : extra_header) out << "# " << line << "\n";
  if (!reports.empty()) {
    for (const auto& [k, v] : reports.front().config_echo) out << "# " << k << " = " << v << "\n";
  }
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : reports) {
    const auto row = detail::csv_row(r);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

inline nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["config"] = r.config_echo;
  nlohmann::ordered_json m;
  const auto& cols = csv_columns();
  const auto row = detail::csv_row(r);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string& cell = row[i];
    if (cols[i] == "scenario" || cols[i] == "mode" || cols[i] == "msg1_hist") {
      m[cols[i]] = cell;
      continue;
    }
    if (cell.empty()) {
      m[cols[i]] = nullptr;
      continue;
    }
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec == std::errc() && res.ptr == cell.data() + cell.size()) {
      m[cols[i]] = v;
    } else {
      m[cols[i]] = cell;
    }
  }
  j["metrics"] = m;
  if (!r.backlog_series.empty()) {
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (const auto& [sf, n] : r.backlog_series) series.push_back({sf, n});
    j["backlog_series"] = series;
  }
  return j;
}

inline std::string to_json(const std::vector<MetricsReport>& reports) {
  nlohmann::ordered_json j;
  j["schema"] = "rachsim-report/1";
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& r : reports) runs.push_back(report_to_json(r));
  j["runs"] = runs;
  return j.dump(2) + "\n";
}

inline std::string render_report(const std::vector<MetricsReport>& reports, ReportFormat fmt,
                                 const std::vector<std::string>& extra_header = {}) {
  return fmt == ReportFormat::Csv ? to_csv(reports, extra_header) : to_json(reports);
}

/// Writes to `path`, or to stdout when path is empty or "-".
inline void emit_report(const std::vector<MetricsReport>& reports, ReportFormat fmt,
                        const std::string& path, std::ostream& fallback,
                        const std::vector<std::string>& extra_header = {}) {
  const std::string payload = render_report(reports, fmt, extra_header);
  if (path.empty() || path == "-") {
    fallback << payload;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open output file '" + path + "'");
  out << payload;
  if (!out) throw Error(ErrorKind::Io, "failed writing output file '" + path + "'");
}

}  // namespace rachsim

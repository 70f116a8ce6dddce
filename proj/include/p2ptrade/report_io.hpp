#pragma once

// Run output files. Numbers are written with fixed precision so identical
// runs produce identical bytes.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "ledger_io.hpp"
#include "sim.hpp"

namespace p2ptrade {

inline constexpr const char* kIntervalHeader =
    "interval,mcp,cleared_price,grid_kw,pv_kw,battery_kw,ev_kw,load_kw,served_load_kw,dr,window,battery_soc,ev_soc,"
    "trade_kwh,trade_revenue,grid_cost,baseline_grid_kw,baseline_grid_cost,cum_trade_revenue,cum_grid_cost,"
    "cum_baseline_grid_cost,actions";

inline constexpr const char* kIterationHeader =
    "iteration,phase,offer,window_intervals,windows,battery_end_soc,ev_soc_at_deadline,newton_iterations,converged";

inline constexpr const char* kClearingHeader = "interval,price,volume_kwh,rejected,tx_ids";

inline void write_interval_rows(std::ostream& out, const std::vector<IntervalRow>& rows) {
  out << kIntervalHeader << '\n';
  for (const auto& r : rows)
    out << fmt::format("{},{:.6f},{:.6f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{},{},{:.9f},{:.9f},{:.6f},{:.9f},{:.9f},"
                       "{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{}\n",
                       r.interval, r.mcp, r.cleared_price, r.grid_kw, r.pv_kw, r.battery_kw, r.ev_kw, r.load_kw,
                       r.served_load_kw, r.dr ? 1 : 0, r.window ? 1 : 0, r.battery_soc, r.ev_soc, r.trade_kwh,
                       r.trade_revenue, r.grid_cost, r.baseline_grid_kw, r.baseline_grid_cost, r.cum_trade_revenue,
                       r.cum_grid_cost, r.cum_baseline_grid_cost, r.actions);
}

inline std::string windows_string(const std::vector<TradeWindow>& ws) {
  std::string s;
  for (const auto& w : ws) {
    if (!s.empty()) s += ' ';
    s += fmt::format("{}-{}", w.entry, w.exit);
  }
  return s;
}

inline void write_iteration_rows(std::ostream& out, const std::vector<IterationRow>& rows) {
  out << kIterationHeader << '\n';
  for (const auto& r : rows)
    out << fmt::format("{},{},{:.9f},{},{},{:.9f},{:.9f},{},{}\n", r.iteration, r.phase, r.offer,
                       total_window_length(r.windows), windows_string(r.windows), r.battery_end_soc,
                       r.ev_soc_at_deadline, r.newton_iterations, r.converged ? 1 : 0);
}

inline void write_clearing_rows(std::ostream& out, const std::vector<ClearingRow>& rows) {
  out << kClearingHeader << '\n';
  for (const auto& r : rows) {
    std::string ids;
    for (const auto& id : r.tx_ids) ids += (ids.empty() ? "" : ";") + id;
    out << fmt::format("{},{:.3f},{:.3f},{},{}\n", r.interval, r.price, r.volume_kwh, r.rejected, ids);
  }
}

inline nlohmann::ordered_json summary_json(const RunReport& report) {
  const auto& s = report.summary;
  auto num = [](double v) { return std::stod(fmt::format("{:.9f}", v)); };
  nlohmann::ordered_json j;
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["initial_offer"] = num(s.initial_offer);
  j["final_offer"] = num(s.final_offer);
  j["battery_end_soc"] = num(s.battery_end_soc);
  j["ev_soc_at_deadline"] = num(s.ev_soc_at_deadline);
  j["baseline_peak_kw"] = num(s.baseline_peak_kw);
  j["strategy_peak_kw"] = num(s.strategy_peak_kw);
  j["peak_reduction_pct"] = num(s.peak_reduction_pct);
  j["trade_revenue"] = num(s.trade_revenue);
  j["grid_cost"] = num(s.grid_cost);
  j["baseline_grid_cost"] = num(s.baseline_grid_cost);
  j["net_earnings"] = num(s.net_earnings);
  j["ledger_blocks"] = s.ledger_blocks;
  j["ledger_transactions"] = s.ledger_transactions;
  j["ledger_export"] = report.ledger_export_path;
  return j;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

/// Writes intervals.csv, iterations.csv, clearing.csv, ledger.jsonl and
/// summary.json into `dir`; with `plot_data`, also plot/{initial,final}.csv.
inline void write_report(const std::filesystem::path& dir, RunReport& report, bool plot_data) {
  std::filesystem::create_directories(dir);
  report.ledger_export_path = "ledger.jsonl";

  std::ostringstream intervals, iterations, clearing;
  write_interval_rows(intervals, report.rows);
  write_iteration_rows(iterations, report.iterations);
  write_clearing_rows(clearing, report.clearing);
  write_file(dir / "intervals.csv", intervals.str());
  write_file(dir / "iterations.csv", iterations.str());
  write_file(dir / "clearing.csv", clearing.str());
  write_file(dir / "ledger.jsonl", ledger_dump(report.ledger));
  write_file(dir / "summary.json", summary_json(report).dump(2) + "\n");

  if (plot_data) {
    std::filesystem::create_directories(dir / "plot");
    std::ostringstream initial, final_rows;
    write_interval_rows(initial, report.initial_rows);
    write_interval_rows(final_rows, report.rows);
    write_file(dir / "plot" / "initial.csv", initial.str());
    write_file(dir / "plot" / "final.csv", final_rows.str());
  }
}

}  // namespace p2ptrade

// p2ptrade: run a trading-day scenario or audit a ledger dump.
//
//   p2ptrade run <scenario> [--out DIR] [--seed N] [--max-iter N] [--emit-plot-data]
//   p2ptrade validate-ledger <ledger.jsonl>
//
// Exit codes: 0 converged / valid, 2 not converged / invalid chain, 1 error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "p2ptrade/ledger_io.hpp"
#include "p2ptrade/report_io.hpp"
#include "p2ptrade/scenario.hpp"
#include "p2ptrade/sim.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Peer-to-peer energy trading day simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  bool plot_data = false;
  auto* run_cmd = app.add_subcommand("run", "Optimize, dispatch and settle one scenario");
  run_cmd->add_option("scenario", scenario_path, "Scenario directory or JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--max-iter", max_iter, "Override strategy.max_iterations")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--emit-plot-data", plot_data, "Also write initial/final iteration plot tables");

  std::string ledger_path;
  auto* audit_cmd = app.add_subcommand("validate-ledger", "Recompute hashes of a ledger dump");
  audit_cmd->add_option("ledger", ledger_path, "Ledger dump (.jsonl)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      auto cfg = p2ptrade::load_scenario(scenario_path);
      auto report = p2ptrade::run(std::move(cfg), {seed, max_iter});
      p2ptrade::write_report(out_dir, report, plot_data);
      const auto& s = report.summary;
      std::cout << "scenario " << report.scenario << ": " << (s.converged ? "converged" : "NOT converged") << " after "
                << s.iterations << " iterations\n"
                << "  offer " << s.initial_offer << " -> " << s.final_offer << " $/kWh\n"
                << "  battery end SOC " << s.battery_end_soc << "%, EV SOC at deadline " << s.ev_soc_at_deadline << "%\n"
                << "  peak import " << s.baseline_peak_kw << " -> " << s.strategy_peak_kw << " kW ("
                << s.peak_reduction_pct << "% shaved)\n"
                << "  net earnings $" << s.net_earnings << ", " << s.ledger_transactions << " trades in "
                << s.ledger_blocks << " blocks\n"
                << "  outputs in " << out_dir << "\n";
      return s.converged ? 0 : 2;
    }
    if (*audit_cmd) {
      auto ledger = p2ptrade::read_ledger_file(ledger_path);
      auto chk = p2ptrade::check_chain(ledger);
      if (chk) {
        std::cout << "valid: " << ledger.size() << " blocks, " << ledger.transaction_count() << " transactions\n";
        return 0;
      }
      std::cout << "INVALID at height " << chk.first_bad_height.value_or(-1) << ": " << chk.reason << "\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

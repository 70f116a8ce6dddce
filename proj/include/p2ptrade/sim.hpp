#pragma once

// Day runner: forecast, baseline pass, offer optimization, then a settlement
// pass that clears window intervals through the market and records the
// endorsed trades on the ledger.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "forecast.hpp"
#include "ledger.hpp"
#include "ledger_io.hpp"
#include "market.hpp"
#include "scenario.hpp"
#include "strategy.hpp"

namespace p2ptrade {

struct IntervalRow {
  std::size_t interval = 0;
  double mcp = 0.0;
  double cleared_price = 0.0;  // 0 when nothing cleared
  double grid_kw = 0.0;
  double pv_kw = 0.0;
  double battery_kw = 0.0;
  double ev_kw = 0.0;
  double load_kw = 0.0;         // forecast household load
  double served_load_kw = 0.0;  // after demand response
  bool dr = false;
  bool window = false;
  double battery_soc = 0.0;  // after the interval
  double ev_soc = 0.0;
  std::string actions;
  double trade_kwh = 0.0;
  double trade_revenue = 0.0;
  double grid_cost = 0.0;
  double baseline_grid_kw = 0.0;
  double baseline_grid_cost = 0.0;
  double cum_trade_revenue = 0.0;
  double cum_grid_cost = 0.0;
  double cum_baseline_grid_cost = 0.0;
};

struct IterationRow {
  int iteration = 0;
  std::string phase;
  double offer = 0.0;
  std::vector<TradeWindow> windows;
  double battery_end_soc = 0.0;
  double ev_soc_at_deadline = 0.0;
  int newton_iterations = 0;
  bool converged = false;
};

struct ClearingRow {
  std::size_t interval = 0;
  double price = 0.0;
  double volume_kwh = 0.0;
  std::vector<std::string> tx_ids;
  std::size_t rejected = 0;
};

struct RunSummary {
  double baseline_peak_kw = 0.0;
  double strategy_peak_kw = 0.0;
  double peak_reduction_pct = 0.0;
  double trade_revenue = 0.0;
  double grid_cost = 0.0;
  double baseline_grid_cost = 0.0;
  double net_earnings = 0.0;
  double initial_offer = 0.0;
  double final_offer = 0.0;
  double battery_end_soc = 0.0;
  double ev_soc_at_deadline = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t ledger_blocks = 0;
  std::size_t ledger_transactions = 0;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  double interval_hours = 1.0;
  std::vector<IntervalRow> rows;          // final iteration
  std::vector<IntervalRow> initial_rows;  // first iteration, for plotting
  std::vector<IterationRow> iterations;
  std::vector<ClearingRow> clearing;
  RunSummary summary;
  Ledger ledger;
  std::string ledger_export_path;
};

/// Peak shaving and earnings, recomputed from the per-interval rows.
inline RunSummary summarize(const RunReport& report) {
  RunSummary s = report.summary;
  double base_peak = 0.0, strat_peak = 0.0, revenue = 0.0, cost = 0.0, base_cost = 0.0;
  for (const auto& r : report.rows) {
    base_peak = std::max(base_peak, r.baseline_grid_kw);
    strat_peak = std::max(strat_peak, r.grid_kw);
    revenue += r.trade_revenue;
    cost += r.grid_cost;
    base_cost += r.baseline_grid_cost;
  }
  s.baseline_peak_kw = base_peak;
  s.strategy_peak_kw = strat_peak;
  s.peak_reduction_pct = base_peak > 0.0 ? 100.0 * (base_peak - strat_peak) / base_peak : 0.0;
  s.trade_revenue = revenue;
  s.grid_cost = cost;
  s.baseline_grid_cost = base_cost;
  s.net_earnings = revenue - (cost - base_cost);
  return s;
}

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iterations;
};

namespace detail {

inline std::string run_nonce(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return fmt::format("{:08x}", static_cast<std::uint32_t>(rng() >> 32));
}

inline std::vector<IntervalRow> rows_for_day(const DayResult& day, const StrategyContext& ctx) {
  std::vector<IntervalRow> rows;
  for (std::size_t i = 0; i < day.actions.size(); ++i) {
    const auto& a = day.actions[i];
    IntervalRow r;
    r.interval = i;
    r.mcp = ctx.mcp.values[i];
    r.grid_kw = a.grid_kw;
    r.pv_kw = a.pv_kw;
    r.battery_kw = a.battery_kw;
    r.ev_kw = a.ev_kw;
    r.load_kw = a.load_kw;
    r.served_load_kw = a.served_load_kw;
    r.dr = a.has(ActionKind::DrReduce);
    r.window = day.in_window(i);
    r.battery_soc = day.battery_soc[i];
    r.ev_soc = day.ev_soc[i];
    r.actions = a.kinds_string();
    r.grid_cost = std::max(0.0, a.grid_kw) * ctx.dt_h * r.mcp;
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void accumulate(std::vector<IntervalRow>& rows) {
  double rev = 0.0, cost = 0.0, base = 0.0;
  for (auto& r : rows) {
    rev += r.trade_revenue;
    cost += r.grid_cost;
    base += r.baseline_grid_cost;
    r.cum_trade_revenue = rev;
    r.cum_grid_cost = cost;
    r.cum_baseline_grid_cost = base;
  }
}

}  // namespace detail

inline StrategyContext build_context(const ScenarioConfig& cfg, const Ledger& history) {
  StrategyContext ctx;
  ctx.mcp = LedgerMeanForecaster{}.estimate(history, cfg.fallback_mcp);
  ctx.load = estimate_load(cfg.base_load, cfg.user_inputs);
  ctx.pv = cfg.pv;
  ctx.battery = cfg.battery;
  ctx.ev = cfg.ev;
  ctx.dr = cfg.dr;
  ctx.dt_h = cfg.dt_h();
  ctx.params = cfg.strategy;
  return ctx;
}

/// Grid-only reference: no PV, storage or demand response; the EV charges
/// as early as it can.
inline std::vector<double> baseline_grid_kw(const StrategyContext& ctx) {
  const PriceSeries flat(std::vector<double>(ctx.horizon(), 0.0), ctx.dt_h);
  const auto ev = plan_ev_charging(flat, ctx.ev, ctx.dt_h).power_kw;
  std::vector<double> grid(ctx.horizon());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = ctx.load.values[i] + ev[i];
  return grid;
}

inline RunReport run(ScenarioConfig cfg, const RunOptions& opts = {}) {
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.max_iterations) cfg.strategy.max_iterations = *opts.max_iterations;
  cfg.validate();
  if (!ev_deadline_feasible(cfg.ev, cfg.dt_h()))
    throw InfeasibleError("EV cannot reach its end target before the deadline even charging at every available interval");
  {
    const auto plan = plan_ev_charging(cfg.fallback_mcp, cfg.ev, cfg.dt_h());
    if (plan.trip_shortfall_kwh > 0.0) throw InfeasibleError("EV cannot hold enough charge for its consumption events");
    try {
      ElectricVehicle ev = cfg.ev;
      for (std::size_t i = 0; i < plan.power_kw.size(); ++i) ev = step_ev(ev, plan.power_kw[i], cfg.dt_h(), i);
    } catch (const std::runtime_error& e) {
      throw InfeasibleError(std::string("EV charging plan cannot be driven: ") + e.what());
    }
  }

  Ledger ledger = cfg.history_ledger ? read_ledger_file(cfg.history_ledger->string()) : Ledger{};
  if (auto chk = check_chain(ledger); !chk)
    throw std::runtime_error("history ledger invalid at height " + std::to_string(chk.first_bad_height.value_or(-1)) +
                             ": " + chk.reason);

  const StrategyContext ctx = build_context(cfg, ledger);
  const auto baseline = baseline_grid_kw(ctx);
  const auto opt = optimize_offer(ctx);

  RunReport report;
  report.scenario = cfg.name;
  report.seed = cfg.seed;
  report.interval_hours = ctx.dt_h;
  for (const auto& rec : opt.iterations)
    report.iterations.push_back({rec.state.iteration, rec.phase, rec.state.offer, rec.state.windows,
                                 rec.state.battery_end_soc, rec.state.ev_end_soc, rec.newton_iterations,
                                 rec.state.converged});

  report.initial_rows = detail::rows_for_day(opt.initial_day, ctx);
  report.rows = detail::rows_for_day(opt.final_day, ctx);
  for (auto* rows : {&report.initial_rows, &report.rows})
    for (auto& r : *rows) {
      r.baseline_grid_kw = baseline[r.interval];
      r.baseline_grid_cost = std::max(0.0, baseline[r.interval]) * ctx.dt_h * r.mcp;
    }

  // Settlement: every window interval with PV surplus goes to the market.
  // Transaction ids carry a seed-derived nonce and the starting chain height so
  // that days appended to the same history never reuse an id.
  const std::string nonce =
      detail::run_nonce(cfg.seed) + "-h" + std::to_string(ledger.tip().header.height);
  const double final_offer = opt.final_day.offer;
  const auto& m = cfg.market;
  for (auto& row : report.rows) {
    const auto& a = opt.final_day.actions[row.interval];
    if (!row.window || !(a.trade_export_kw > 0.0)) continue;
    const auto interval = static_cast<std::int64_t>(row.interval);
    const auto tick = static_cast<std::int64_t>(std::llround(static_cast<double>(row.interval) * cfg.interval_seconds));

    std::vector<Order> bids, offers;
    offers.push_back(Order::make(m.prosumer_id, Side::Offer, final_offer, a.trade_export_kw * ctx.dt_h, interval, tick));
    offers.push_back(Order::unlimited(m.utility_id, Side::Offer, row.mcp, interval, tick));
    bids.push_back(Order::unlimited(m.utility_id, Side::Bid, m.feed_in_ratio * row.mcp, interval, tick));
    for (const auto& c : m.consumers)
      if (c.demand_kw > 0.0) bids.push_back(Order::make(c.peer_id, Side::Bid, c.bid_price_per_kwh, c.demand_kw * ctx.dt_h, interval, tick));
    // The utility never trades with itself: drop its offer when its own bid would cross it.
    if (bids.front().price_mills >= offers.back().price_mills) offers.pop_back();

    auto cleared = clear_interval(bids, offers, {nonce + "-", tick});
    if (cleared.matches.empty()) continue;

    std::vector<PeerView> views;
    for (const auto& peer : cfg.endorsement.peer_ids) {
      PeerView v{peer, {}};
      v.available_mkwh[m.prosumer_id] = offers.front().quantity_mkwh;
      v.available_mkwh[m.utility_id] = Order::kUnlimited;
      views.push_back(std::move(v));
    }
    auto settled = settle(cleared, ledger, views, cfg.endorsement, tick);
    ledger = std::move(settled.ledger);

    ClearingRow cr{row.interval, cleared.clearing_price(), 0.0, {}, settled.rejected.size()};
    for (const auto& tx : settled.accepted) {
      cr.volume_kwh += tx.energy_kwh();
      cr.tx_ids.push_back(tx.tx_id);
      if (tx.seller_id == m.prosumer_id) {
        row.trade_kwh += tx.energy_kwh();
        row.trade_revenue += tx.energy_kwh() * tx.price_per_kwh();
      }
    }
    if (!settled.accepted.empty()) row.cleared_price = cleared.clearing_price();
    report.clearing.push_back(std::move(cr));
  }
  detail::accumulate(report.rows);
  detail::accumulate(report.initial_rows);

  report.ledger = std::move(ledger);
  report.summary.initial_offer = opt.initial_offer;
  report.summary.final_offer = final_offer;
  report.summary.battery_end_soc = opt.final_day.battery_end_soc;
  report.summary.ev_soc_at_deadline = opt.final_day.ev_soc_at_deadline;
  report.summary.iterations = opt.refine_iterations();
  report.summary.converged = opt.converged;
  report.summary.ledger_blocks = report.ledger.size();
  report.summary.ledger_transactions = report.ledger.transaction_count();
  report.summary = summarize(report);
  return report;
}

}  // namespace p2ptrade

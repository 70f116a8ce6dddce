#pragma once

// Prosumer trading strategy: offer pricing, trade windows, per-interval
// dispatch, EV charge scheduling and the outer offer refinement loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "devices.hpp"
#include "errors.hpp"
#include "forecast.hpp"

namespace p2ptrade {

struct BidOffer {
  double price_per_kwh = 0.0;
  double quantity_kwh = 0.0;
  std::size_t interval_index = 0;
};

/// Inclusive run of intervals [entry, exit].
struct TradeWindow {
  std::size_t entry = 0;
  std::size_t exit = 0;

  std::size_t length() const { return exit - entry + 1; }
  bool contains(std::size_t i) const { return entry <= i && i <= exit; }
  friend bool operator==(const TradeWindow&, const TradeWindow&) = default;
};

inline double initial_offer(double avg_cost) {
  if (!(avg_cost >= 0.0)) throw std::invalid_argument("average cost must be non-negative");
  return avg_cost;
}

/// Maximal runs where cost > offer (strict), in ascending order.
inline std::vector<TradeWindow> find_trade_windows(const PriceSeries& usage_cost, double offer) {
  std::vector<TradeWindow> out;
  const auto& c = usage_cost.values;
  for (std::size_t i = 0; i < c.size();) {
    if (!(c[i] > offer)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < c.size() && c[j + 1] > offer) ++j;
    out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

inline std::vector<bool> window_mask(const std::vector<TradeWindow>& windows, std::size_t horizon) {
  std::vector<bool> mask(horizon, false);
  for (const auto& w : windows)
    for (std::size_t i = w.entry; i <= w.exit && i < horizon; ++i) mask[i] = true;
  return mask;
}

inline std::size_t total_window_length(const std::vector<TradeWindow>& windows) {
  std::size_t n = 0;
  for (const auto& w : windows) n += w.length();
  return n;
}

// ---------------------------------------------------------------------------
// Per-interval dispatch

enum class ActionKind : unsigned {
  GridSupply = 1u << 0,
  TradeDischarge = 1u << 1,
  DrReduce = 1u << 2,
  ChargeEv = 1u << 3,
  ChargeBattery = 1u << 4,
  Idle = 1u << 5,
};

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::GridSupply: return "GRID_SUPPLY";
    case ActionKind::TradeDischarge: return "TRADE_DISCHARGE";
    case ActionKind::DrReduce: return "DR_REDUCE";
    case ActionKind::ChargeEv: return "CHARGE_EV";
    case ActionKind::ChargeBattery: return "CHARGE_BATTERY";
    case ActionKind::Idle: return "IDLE";
  }
  return "?";
}

struct IntervalAction {
  unsigned kinds = 0;
  double load_kw = 0.0;          // forecast household load
  double served_load_kw = 0.0;   // after demand response
  double pv_kw = 0.0;
  double grid_kw = 0.0;          // + import, - export
  double battery_kw = 0.0;       // + charge, - discharge
  double ev_kw = 0.0;
  double trade_export_kw = 0.0;  // PV surplus offered to the market
  bool discharge_fallback = false;  // window interval that still needed grid supply

  bool has(ActionKind k) const { return (kinds & static_cast<unsigned>(k)) != 0; }
  void add(ActionKind k) { kinds |= static_cast<unsigned>(k); }

  double battery_charge_kw() const { return std::max(0.0, battery_kw); }
  double battery_discharge_kw() const { return std::max(0.0, -battery_kw); }

  /// pv + grid + discharge - (served + charge + ev); zero for a balanced action.
  double balance_error_kw() const {
    return pv_kw + grid_kw + battery_discharge_kw() - (served_load_kw + battery_charge_kw() + ev_kw);
  }

  std::string kinds_string() const {
    std::string s;
    for (auto k : {ActionKind::DrReduce, ActionKind::TradeDischarge, ActionKind::GridSupply, ActionKind::ChargeEv,
                   ActionKind::ChargeBattery, ActionKind::Idle})
      if (has(k)) {
        if (!s.empty()) s += '|';
        s += to_string(k);
      }
    return s;
  }
};

struct DeviceState {
  BatteryStorage battery;
  double pv_kw = 0.0;
  double load_kw = 0.0;
  DRProgram dr;
  double dt_h = 1.0;
  double trade_floor_soc = 60.0;  // battery may only trade down to this SOC
};

/// One interval of the trading decision tree. Inside a window with
/// mcp > offer the load is first curtailed by demand response, then PV and
/// the battery (down to the trading floor) cover what is left; any PV surplus
/// is offered for trade. Otherwise the grid supplies the load and PV surplus
/// charges the battery. A scheduled EV charge is always drawn from the grid.
inline IntervalAction decide_interval_action(double mcp_i, double offer, const DeviceState& s, bool in_window,
                                             double ev_charge_kw) {
  IntervalAction a;
  const bool trade = in_window && mcp_i > offer;
  a.load_kw = s.load_kw;
  a.served_load_kw = apply_dr(s.load_kw, s.dr, trade);
  a.pv_kw = s.pv_kw;
  if (trade && s.dr.reduction_fraction > 0.0 && s.load_kw > 0.0) a.add(ActionKind::DrReduce);

  const double net = a.served_load_kw - a.pv_kw;
  if (net > 0.0) {
    if (trade) {
      const double d = std::min(net, discharge_headroom_kw(s.battery, s.dt_h, s.trade_floor_soc));
      a.battery_kw = -d;
      if (d > 0.0) a.add(ActionKind::TradeDischarge);
      a.grid_kw = net - d;
      if (a.grid_kw > 0.0) a.discharge_fallback = true;
    } else {
      a.grid_kw = net;
    }
    if (a.grid_kw > 0.0) a.add(ActionKind::GridSupply);
  } else if (net < 0.0) {
    const double surplus = -net;
    if (trade) {
      a.trade_export_kw = surplus;
      a.grid_kw = -surplus;
      a.add(ActionKind::TradeDischarge);
    } else {
      const double c = std::min(surplus, charge_headroom_kw(s.battery, s.dt_h, s.battery.soc_max));
      a.battery_kw = c;
      if (c > 0.0) a.add(ActionKind::ChargeBattery);
      a.grid_kw = -(surplus - c);
    }
  }

  if (ev_charge_kw > 0.0) {
    a.ev_kw = ev_charge_kw;
    a.grid_kw += ev_charge_kw;
    a.add(ActionKind::ChargeEv);
  }
  if (a.kinds == 0) a.add(ActionKind::Idle);
  return a;
}

// ---------------------------------------------------------------------------
// EV charging

struct EvChargePlan {
  std::vector<double> power_kw;      // per interval
  double shortfall_kwh = 0.0;        // energy still missing at the deadline
  double trip_shortfall_kwh = 0.0;   // energy missing before a consumption event
};

/// Unchecked SOC arithmetic up to the deadline; bounds are left to step_ev.
inline double ev_soc_at_deadline(const ElectricVehicle& ev, const std::vector<double>& power_kw, double dt_h) {
  double soc = ev.soc;
  for (std::size_t i = 0; i < ev.deadline_interval; ++i) {
    if (i < power_kw.size() && power_kw[i] > 0.0)
      soc += detail::soc_delta(ev.capacity_kwh, power_kw[i], dt_h, ev.charge_efficiency);
    for (const auto& e : ev.consumption_events)
      if (e.interval == i) soc -= e.soc_drop;
  }
  return soc;
}

namespace detail {

/// SOC just before the consumption drop at `interval` (charging in that
/// interval happens first).
inline double ev_soc_before_drop(const ElectricVehicle& ev, const std::vector<double>& power_kw, double dt_h,
                                 std::size_t interval) {
  double soc = ev.soc;
  for (std::size_t i = 0; i <= interval; ++i) {
    if (i < power_kw.size() && power_kw[i] > 0.0)
      soc += soc_delta(ev.capacity_kwh, power_kw[i], dt_h, ev.charge_efficiency);
    if (i == interval) break;
    for (const auto& e : ev.consumption_events)
      if (e.interval == i) soc -= e.soc_drop;
  }
  return soc;
}

}  // namespace detail

/// Tops up the plan so every consumption event leaves the EV at or above
/// soc_min. Cheapest open intervals go first; blocked ones are used only when
/// nothing else can cover the trip.
inline void plan_trip_charging(EvChargePlan& plan, const PriceSeries& mcp, const ElectricVehicle& ev, double dt_h,
                               const std::vector<bool>& blocked) {
  constexpr double kMargin = 1e-9;  // SOC points kept above soc_min against rounding
  std::vector<std::size_t> event_intervals;
  for (const auto& e : ev.consumption_events) event_intervals.push_back(e.interval);
  std::sort(event_intervals.begin(), event_intervals.end());
  event_intervals.erase(std::unique(event_intervals.begin(), event_intervals.end()), event_intervals.end());

  const double kwh_per_point = ev.capacity_kwh / 100.0 / std::sqrt(ev.charge_efficiency);
  for (auto t : event_intervals) {
    double drop = 0.0;
    for (const auto& e : ev.consumption_events)
      if (e.interval == t) drop += e.soc_drop;
    double need_pts = ev.soc_min + drop + kMargin - detail::ev_soc_before_drop(ev, plan.power_kw, dt_h, t);
    if (need_pts <= 0.0) continue;

    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i <= t && i < mcp.size(); ++i)
      if (ev.available(i) && plan.power_kw[i] < ev.max_charge_kw) slots.push_back(i);
    std::stable_sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
      const bool ba = a < blocked.size() && blocked[a], bb = b < blocked.size() && blocked[b];
      return ba != bb ? !ba : mcp.values[a] < mcp.values[b];
    });
    for (auto i : slots) {
      if (need_pts <= 0.0) break;
      const double add = std::min(ev.max_charge_kw - plan.power_kw[i], need_pts * kwh_per_point / dt_h);
      plan.power_kw[i] += add;
      need_pts -= add * dt_h / kwh_per_point;
    }
    const double left = ev.soc_min + drop - detail::ev_soc_before_drop(ev, plan.power_kw, dt_h, t);
    if (left > 0.0) plan.trip_shortfall_kwh += left * kwh_per_point;
  }
}

/// Greedy fill of the cheapest usable intervals before the deadline; ties go
/// to the earlier interval. `blocked` marks intervals reserved for trading.
/// Consumption events are then covered by plan_trip_charging. Never throws on
/// a shortfall; it is reported instead.
inline EvChargePlan plan_ev_charging(const PriceSeries& mcp, const ElectricVehicle& ev, double dt_h,
                                     const std::vector<bool>& blocked = {}) {
  EvChargePlan plan;
  plan.power_kw.assign(mcp.size(), 0.0);
  double need = ev_energy_needed_kwh(ev);
  if (need <= 0.0) {
    plan_trip_charging(plan, mcp, ev, dt_h, blocked);
    return plan;
  }

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < std::min(ev.deadline_interval, mcp.size()); ++i)
    if (ev.available(i) && !(i < blocked.size() && blocked[i])) candidates.push_back(i);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return mcp.values[a] < mcp.values[b]; });

  std::optional<std::size_t> last;
  for (auto i : candidates) {
    if (need <= 0.0) break;
    const double p = std::min(ev.max_charge_kw, need / dt_h);
    plan.power_kw[i] = p;
    need -= p * dt_h;
    last = i;
  }

  // Rounding in the SOC update can leave the target a few ulps short; nudge
  // the partially used interval up, or spill into the next candidate.
  if (need <= 1e-9 && last) {
    std::size_t guard = 0;
    while (ev_soc_at_deadline(ev, plan.power_kw, dt_h) < ev.end_target_min && guard++ < 64) {
      auto& p = plan.power_kw[*last];
      if (p < ev.max_charge_kw) {
        p = std::min(ev.max_charge_kw, std::nextafter(p, ev.max_charge_kw) + 1e-12);
      } else {
        auto it = std::find_if(candidates.begin(), candidates.end(), [&](std::size_t c) { return plan.power_kw[c] == 0.0; });
        if (it == candidates.end()) break;
        plan.power_kw[*it] = 1e-9;
        last = *it;
      }
    }
    need = 0.0;
  }

  const double at_deadline = ev_soc_at_deadline(ev, plan.power_kw, dt_h);
  if (at_deadline < ev.end_target_min)
    plan.shortfall_kwh = (ev.end_target_min - at_deadline) / 100.0 * ev.capacity_kwh / std::sqrt(ev.charge_efficiency);
  plan_trip_charging(plan, mcp, ev, dt_h, blocked);
  return plan;
}

inline std::vector<double> schedule_ev_charging(const PriceSeries& mcp, const ElectricVehicle& ev, double dt_h,
                                                const std::vector<bool>& blocked = {}) {
  auto plan = plan_ev_charging(mcp, ev, dt_h, blocked);
  if (plan.shortfall_kwh > 0.0)
    throw InfeasibleError("EV cannot reach " + std::to_string(ev.end_target_min) + "% by interval " +
                          std::to_string(ev.deadline_interval));
  return plan.power_kw;
}

// ---------------------------------------------------------------------------
// Day simulation at a fixed offer

struct StrategyParams {
  double offer_reduction = 0.05;  // fractional cut when the battery is under-used
  double slack = 2.0;             // SOC points above the battery end target still accepted
  double tol = 0.5;               // Newton residual tolerance, SOC points
  int max_iterations = 50;
  std::optional<double> trade_floor_soc;  // defaults to the battery end target
};

/// Everything the strategy needs to replay a day.
struct StrategyContext {
  PriceSeries mcp;  // forecast, also the usage cost the windows are cut from
  LoadSeries load;  // forecast household load, excluding the EV
  PVArray pv;
  BatteryStorage battery;
  ElectricVehicle ev;
  DRProgram dr;
  double dt_h = 1.0;
  StrategyParams params;

  std::size_t horizon() const { return mcp.size(); }
  double trade_floor() const { return params.trade_floor_soc.value_or(battery.end_target_min); }
  double offer_max() const { return mcp.values.empty() ? 0.0 : *std::max_element(mcp.values.begin(), mcp.values.end()); }
};

struct DayResult {
  double offer = 0.0;
  std::vector<TradeWindow> windows;
  std::vector<double> ev_schedule_kw;
  double ev_shortfall_kwh = 0.0;
  std::vector<IntervalAction> actions;
  std::vector<double> battery_soc;  // after each interval
  std::vector<double> ev_soc;       // after each interval
  double battery_end_soc = 0.0;
  double ev_soc_at_deadline = 0.0;

  bool in_window(std::size_t i) const {
    return std::any_of(windows.begin(), windows.end(), [&](const TradeWindow& w) { return w.contains(i); });
  }
};

inline DayResult simulate_day(const StrategyContext& ctx, double offer) {
  DayResult d;
  d.offer = offer;
  const std::size_t n = ctx.horizon();
  d.windows = find_trade_windows(ctx.mcp, offer);
  const auto mask = window_mask(d.windows, n);

  auto plan = plan_ev_charging(ctx.mcp, ctx.ev, ctx.dt_h, mask);
  d.ev_schedule_kw = plan.power_kw;
  d.ev_shortfall_kwh = plan.shortfall_kwh;

  BatteryStorage battery = ctx.battery;
  ElectricVehicle ev = ctx.ev;
  d.ev_soc_at_deadline = ev.soc;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == ev.deadline_interval) d.ev_soc_at_deadline = ev.soc;
    DeviceState s{battery, pv_power(ctx.pv, i, ctx.dt_h), ctx.load.values[i], ctx.dr, ctx.dt_h, ctx.trade_floor()};
    auto a = decide_interval_action(ctx.mcp.values[i], offer, s, mask[i], d.ev_schedule_kw[i]);
    battery = step_battery(battery, a.battery_kw, ctx.dt_h);
    ev = step_ev(ev, a.ev_kw, ctx.dt_h, i);
    d.actions.push_back(a);
    d.battery_soc.push_back(battery.soc);
    d.ev_soc.push_back(ev.soc);
  }
  if (ctx.ev.deadline_interval >= n) d.ev_soc_at_deadline = ev.soc;
  d.battery_end_soc = battery.soc;
  return d;
}

struct SocError {
  double battery = 0.0;  // end SOC minus battery end target
  double ev = 0.0;       // SOC at deadline minus EV end target
};

inline SocError soc_end_error(double offer, const StrategyContext& ctx) {
  auto d = simulate_day(ctx, offer);
  return {d.battery_end_soc - ctx.battery.end_target_min, d.ev_soc_at_deadline - ctx.ev.end_target_min};
}

// ---------------------------------------------------------------------------
// Newton-Raphson offer solve

struct NewtonOptions {
  double tol = 0.5;
  int max_iter = 50;
  double lower = 0.0;  // offer search interval
  double upper = 1.0;
};

/// Bisection stops once the bracket is narrower than this ($/kWh).
inline constexpr double kBracketWidth = 1e-9;

struct NewtonResult {
  double offer = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool used_bisection = false;
};

/// Root of `residual(offer)` by Newton steps with a central-difference
/// derivative. Falls back to bisection on a sign-change bracket of
/// [lower, upper] when the derivative vanishes or a step leaves the bracket.
/// Returns the best iterate seen if the tolerance is never met.
template <class Residual>
NewtonResult newton_raphson_offer(double initial, Residual&& residual, const NewtonOptions& opt) {
  if (!(initial >= 0.0)) throw std::invalid_argument("initial offer must be non-negative");
  if (!(opt.lower <= opt.upper)) throw std::invalid_argument("empty offer search interval");

  double x = std::clamp(initial, opt.lower, opt.upper);
  double r = residual(x);
  NewtonResult best{x, r, 0, std::abs(r) <= opt.tol, false};
  if (best.converged) return best;
  auto consider = [&](double xv, double rv) {
    if (std::abs(rv) < std::abs(best.residual)) {
      best.offer = xv;
      best.residual = rv;
    }
  };

  // Bracket with residual signs differing (a zero endpoint counts as a sign change).
  double a = opt.lower, b = opt.upper;
  double ra = residual(a), rb = residual(b);
  consider(a, ra);
  consider(b, rb);
  bool bracketed = (ra <= 0.0 && rb >= 0.0) || (ra >= 0.0 && rb <= 0.0);
  auto narrow = [&](double xv, double rv) {
    if (!bracketed) return;
    if ((rv <= 0.0) == (ra <= 0.0)) {
      a = xv;
      ra = rv;
    } else {
      b = xv;
      rb = rv;
    }
  };
  narrow(x, r);

  bool used_bisection = false;
  int it = 0;
  for (it = 1; it <= opt.max_iter; ++it) {
    double deriv = 0.0;
    if (!used_bisection) {
      const double h = std::max(1e-4, 1e-3 * std::abs(x));
      const double xl = std::max(opt.lower, x - h), xh = std::min(opt.upper, x + h);
      if (xh > xl) deriv = (residual(xh) - residual(xl)) / (xh - xl);
    }

    double next = std::numeric_limits<double>::quiet_NaN();
    // After the first fallback the residual is known to be non-smooth; stay on bisection.
    if (std::abs(deriv) >= 1e-9 && !used_bisection) next = x - r / deriv;
    const bool outside = !(next >= opt.lower && next <= opt.upper) ||
                         (bracketed && !(next >= std::min(a, b) && next <= std::max(a, b)));
    if (outside) {
      if (bracketed) {
        next = 0.5 * (a + b);
        used_bisection = true;
      } else if (std::isfinite(next)) {
        next = std::clamp(next, opt.lower, opt.upper);
        if (next == x) break;
      } else {
        break;  // flat residual, nothing to bracket
      }
    }

    x = next;
    r = residual(x);
    consider(x, r);
    if (!used_bisection && std::abs(r) <= opt.tol) {
      best = {x, r, it, true, false};
      return best;
    }
    narrow(x, r);
    // Once bisecting, a flat residual can satisfy the tolerance over a whole
    // plateau; keep halving until the bracket collapses onto the jump.
    if (bracketed && std::abs(b - a) <= kBracketWidth) break;
  }
  if (used_bisection && bracketed) {
    // Prefer the bracket end with the smaller residual, the higher offer on ties.
    const bool take_b = std::abs(rb) < std::abs(ra) || (std::abs(rb) == std::abs(ra) && b > a);
    const double xe = take_b ? b : a, re = take_b ? rb : ra;
    if (std::abs(re) <= opt.tol || std::abs(re) <= std::abs(best.residual)) {
      best.offer = xe;
      best.residual = re;
    }
  }
  best.iterations = std::min(it, opt.max_iter);
  best.converged = std::abs(best.residual) <= opt.tol;
  best.used_bisection = used_bisection;
  return best;
}

// ---------------------------------------------------------------------------
// Outer refinement

struct IterationState {
  int iteration = 0;
  double offer = 0.0;
  double offer_floor = 0.0;  // raised when windows are shortened for the EV
  std::vector<TradeWindow> windows;
  double battery_end_soc = 0.0;
  double ev_end_soc = 0.0;
  bool converged = false;
  std::string remedy;  // what the last refine step changed
};

inline bool end_conditions_met(const StrategyContext& ctx, double battery_end, double ev_end) {
  const double target = ctx.battery.end_target_min;
  return battery_end >= target && battery_end <= target + ctx.params.slack && ev_end >= ctx.ev.end_target_min;
}

inline IterationState state_from_day(const StrategyContext& ctx, const DayResult& d, int iteration, double floor,
                                     std::string remedy = {}) {
  IterationState s;
  s.iteration = iteration;
  s.offer = d.offer;
  s.offer_floor = floor;
  s.windows = d.windows;
  s.battery_end_soc = d.battery_end_soc;
  s.ev_end_soc = d.ev_soc_at_deadline;
  s.converged = end_conditions_met(ctx, d.battery_end_soc, d.ev_soc_at_deadline);
  s.remedy = std::move(remedy);
  return s;
}

/// Smallest offer that removes the lowest-cost window intervals until the
/// charging capacity they free before the deadline covers the EV deficit.
inline std::optional<double> shortened_window_offer(const StrategyContext& ctx, const IterationState& s) {
  const double deficit_kwh =
      (ctx.ev.end_target_min - s.ev_end_soc) / 100.0 * ctx.ev.capacity_kwh / std::sqrt(ctx.ev.charge_efficiency);
  if (deficit_kwh <= 0.0) return std::nullopt;

  std::vector<std::size_t> in_window;
  for (const auto& w : s.windows)
    for (std::size_t i = w.entry; i <= w.exit; ++i) in_window.push_back(i);
  std::stable_sort(in_window.begin(), in_window.end(),
                   [&](std::size_t a, std::size_t b) { return ctx.mcp.values[a] < ctx.mcp.values[b]; });

  double freed = 0.0;
  for (auto i : in_window) {
    if (i < ctx.ev.deadline_interval && ctx.ev.available(i)) freed += ctx.ev.max_charge_kw * ctx.dt_h;
    if (freed >= deficit_kwh) return ctx.mcp.values[i];
  }
  return std::nullopt;
}

/// One refinement step. An EV shortfall shortens the windows (and pins the
/// offer floor there); otherwise an under-used battery lowers the offer by
/// `offer_reduction`, and a battery ending below target raises it.
inline IterationState refine(const IterationState& state, const StrategyContext& ctx, DayResult* day_out = nullptr) {
  if (state.converged) return state;
  if (state.iteration >= ctx.params.max_iterations)
    throw std::logic_error("refine called after the iteration limit");

  const double target = ctx.battery.end_target_min;
  double offer = state.offer;
  double floor = state.offer_floor;
  std::string remedy;

  if (state.ev_end_soc < ctx.ev.end_target_min) {
    if (auto raised = shortened_window_offer(ctx, state); raised && *raised > offer) {
      offer = *raised;
      floor = std::max(floor, offer);
      remedy = "shorten-windows";
    }
  }
  if (remedy.empty()) {
    if (state.battery_end_soc > target + ctx.params.slack) {
      offer = std::max(floor, offer * (1.0 - ctx.params.offer_reduction));
      remedy = "reduce-offer";
    } else if (state.battery_end_soc < target) {
      offer = std::min(ctx.offer_max(), offer / (1.0 - ctx.params.offer_reduction));
      remedy = "raise-offer";
    }
  }

  auto day = simulate_day(ctx, offer);
  auto next = state_from_day(ctx, day, state.iteration + 1, floor, remedy);
  if (day_out) *day_out = std::move(day);
  return next;
}

struct IterationRecord {
  IterationState state;
  std::string phase;  // initial | newton | refine
  int newton_iterations = 0;
};

struct OptimizationResult {
  std::vector<IterationRecord> iterations;
  DayResult initial_day;
  DayResult final_day;
  double initial_offer = 0.0;
  bool converged = false;

  int refine_iterations() const { return iterations.empty() ? 0 : iterations.back().state.iteration; }
};

/// First pass at the average consumption cost; then per outer iteration a
/// Newton solve on the battery end-SOC residual (bounded below by the EV
/// offer floor) followed by a refine step, until both end conditions hold.
inline OptimizationResult optimize_offer(const StrategyContext& ctx) {
  OptimizationResult out;
  out.initial_offer = initial_offer(average_consumption_cost(ctx.load, ctx.mcp));

  DayResult day = simulate_day(ctx, out.initial_offer);
  out.initial_day = day;
  IterationState state = state_from_day(ctx, day, 0, 0.0);
  out.iterations.push_back({state, "initial", 0});

  while (!state.converged && state.iteration < ctx.params.max_iterations) {
    const double target = ctx.battery.end_target_min;
    const bool battery_off = state.battery_end_soc < target || state.battery_end_soc > target + ctx.params.slack;
    if (battery_off) {
      NewtonOptions nopt{ctx.params.tol, ctx.params.max_iterations, state.offer_floor,
                         std::max(state.offer_floor, ctx.offer_max())};
      auto nr = newton_raphson_offer(std::max(state.offer, state.offer_floor),
                                     [&](double o) { return soc_end_error(o, ctx).battery; }, nopt);
      if (nr.offer != state.offer) {
        day = simulate_day(ctx, nr.offer);
        state = state_from_day(ctx, day, state.iteration + 1, state.offer_floor, "newton");
        out.iterations.push_back({state, "newton", nr.iterations});
        if (state.converged || state.iteration >= ctx.params.max_iterations) break;
      }
    }
    state = refine(state, ctx, &day);
    out.iterations.push_back({state, "refine", 0});
  }

  out.final_day = std::move(day);
  out.converged = state.converged;
  return out;
}

}  // namespace p2ptrade

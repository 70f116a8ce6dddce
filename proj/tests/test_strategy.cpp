#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "p2ptrade/errors.hpp"
#include "p2ptrade/sim.hpp"
#include "p2ptrade/strategy.hpp"
#include "random_scenario.hpp"
#include "support.hpp"

using namespace p2ptrade;

namespace {

StrategyContext table1_ctx() { return build_context(load_scenario(testsupport::table1_dir()), Ledger{}); }

std::vector<TradeWindow> brute_windows(const std::vector<double>& c, double offer) {
  std::vector<TradeWindow> out;
  bool open = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] > offer && !open) out.push_back({i, i}), open = true;
    if (c[i] > offer) out.back().exit = i;
    else open = false;
  }
  return out;
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> cents(0, 40);
  std::vector<double> v(n);
  for (auto& x : v) x = cents(rng) / 100.0;
  return v;
}

}  // namespace

TEST(InitialOffer, PassThrough) {
  EXPECT_EQ(initial_offer(0.20), 0.20);
  EXPECT_EQ(initial_offer(0.0), 0.0);
  EXPECT_THROW(initial_offer(-0.1), std::invalid_argument);
}

TEST(InitialOffer, Table1UsesAverageCost) {
  auto ctx = table1_ctx();
  const double avg = average_consumption_cost(ctx.load, ctx.mcp);
  EXPECT_EQ(initial_offer(avg), avg);
  EXPECT_EQ(optimize_offer(ctx).initial_offer, avg);
}

TEST(Windows, SingleRun) {
  EXPECT_EQ(find_trade_windows(PriceSeries({1, 3, 3, 1}), 2.0), (std::vector<TradeWindow>{{1, 2}}));
}

TEST(Windows, OfferAboveMaxIsEmpty) {
  EXPECT_TRUE(find_trade_windows(PriceSeries({1, 3, 3, 1}), 3.0).empty());
}

TEST(Windows, SeveralRuns) {
  EXPECT_EQ(find_trade_windows(PriceSeries({3, 1, 3, 3, 1, 3}), 2.0),
            (std::vector<TradeWindow>{{0, 0}, {2, 3}, {5, 5}}));
}

TEST(Windows, EqualityIsNotAWindow) {
  EXPECT_TRUE(find_trade_windows(PriceSeries({2, 2}), 2.0).empty());
}

TEST(Windows, CorrectAndMaximalOnRandomSeries) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = random_series(rng, 24);
    const double offer = random_series(rng, 1)[0];
    auto w = find_trade_windows(PriceSeries(c), offer);
    EXPECT_EQ(w, brute_windows(c, offer));
    auto mask = window_mask(w, c.size());
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(mask[i], c[i] > offer);
  }
}

TEST(Windows, LoweringOfferNeverShrinksUnion) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 0.4);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = random_series(rng, 24);
    double hi = u(rng), lo = u(rng);
    if (lo > hi) std::swap(lo, hi);
    auto m_hi = window_mask(find_trade_windows(PriceSeries(c), hi), 24);
    auto m_lo = window_mask(find_trade_windows(PriceSeries(c), lo), 24);
    for (std::size_t i = 0; i < 24; ++i)
      if (m_hi[i]) {
        EXPECT_TRUE(m_lo[i]);
      }
  }
}

namespace {

DeviceState state_at(double soc, double load_kw, double pv_kw = 0.0) {
  DeviceState s;
  s.battery.soc = soc;
  s.load_kw = load_kw;
  s.pv_kw = pv_kw;
  return s;
}

}  // namespace

TEST(Decide, WindowWithChargedBattery) {
  auto a = decide_interval_action(0.30, 0.20, state_at(90.0, 5.0), true, 0.0);
  EXPECT_TRUE(a.has(ActionKind::DrReduce));
  EXPECT_TRUE(a.has(ActionKind::TradeDischarge));
  EXPECT_FALSE(a.has(ActionKind::GridSupply));
  EXPECT_NEAR(a.served_load_kw, 4.5, 1e-12);
  EXPECT_NEAR(a.battery_discharge_kw(), 4.5, 1e-12);
  EXPECT_EQ(a.grid_kw, 0.0);
  EXPECT_EQ(a.kinds_string(), "DR_REDUCE|TRADE_DISCHARGE");
}

TEST(Decide, BelowOfferUsesGrid) {
  auto a = decide_interval_action(0.10, 0.20, state_at(90.0, 5.0), false, 0.0);
  EXPECT_EQ(a.kinds_string(), "GRID_SUPPLY");
  EXPECT_EQ(a.grid_kw, 5.0);
  EXPECT_EQ(a.served_load_kw, 5.0);
}

TEST(Decide, BatteryAtMinimumFallsBackToGrid) {
  auto a = decide_interval_action(0.30, 0.20, state_at(20.0, 5.0), true, 0.0);
  EXPECT_EQ(a.kinds_string(), "DR_REDUCE|GRID_SUPPLY");
  EXPECT_TRUE(a.discharge_fallback);
  EXPECT_NEAR(a.grid_kw, 4.5, 1e-12);
  EXPECT_EQ(a.battery_kw, 0.0);
}

TEST(Decide, TradeFloorStopsDischarge) {
  auto a = decide_interval_action(0.30, 0.20, state_at(61.0, 5.0), true, 0.0);
  EXPECT_NEAR(a.battery_discharge_kw(), 2.5, 1e-12);  // 1 point of 250 kWh
  EXPECT_NEAR(a.grid_kw, 2.0, 1e-12);
}

TEST(Decide, SurplusInWindowIsExported) {
  auto a = decide_interval_action(0.30, 0.20, state_at(70.0, 2.0, 6.0), true, 0.0);
  EXPECT_NEAR(a.trade_export_kw, 4.2, 1e-12);
  EXPECT_NEAR(a.grid_kw, -4.2, 1e-12);
  EXPECT_EQ(a.battery_kw, 0.0);
}

TEST(Decide, SurplusOutsideWindowCharges) {
  auto a = decide_interval_action(0.10, 0.20, state_at(70.0, 2.0, 6.0), false, 3.0);
  EXPECT_NEAR(a.battery_kw, 4.0, 1e-12);
  EXPECT_NEAR(a.grid_kw, 3.0, 1e-12);
  EXPECT_EQ(a.kinds_string(), "CHARGE_EV|CHARGE_BATTERY");
}

TEST(Decide, RandomStatesBalance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    auto s = state_at(20.0 + 75.0 * u(rng), 8.0 * u(rng), 9.0 * u(rng));
    s.battery.round_trip_efficiency = 0.8 + 0.2 * u(rng);
    auto a = decide_interval_action(0.4 * u(rng), 0.4 * u(rng), s, u(rng) < 0.5, u(rng) < 0.3 ? 7.2 * u(rng) : 0.0);
    ASSERT_NEAR(a.balance_error_kw(), 0.0, 1e-9);
    auto next = step_battery(s.battery, a.battery_kw, s.dt_h);
    ASSERT_GE(next.soc, s.battery.soc_min);
    ASSERT_LE(next.soc, s.battery.soc_max);
  }
}

namespace {

ElectricVehicle night_ev() {
  ElectricVehicle ev;  // 50% -> 80% of 80 kWh: 24 kWh
  ev.availability.assign(24, false);
  for (std::size_t i = 0; i < 6; ++i) ev.availability[i] = true;
  ev.max_charge_kw = 8.0;
  return ev;
}

/// Cheapest cost of delivering `need` kWh with at most `cap` per interval,
/// by enumerating every subset and filling the dearest member last.
double brute_min_cost(const std::vector<double>& price, const std::vector<std::size_t>& usable, double need, double cap) {
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << usable.size()); ++mask) {
    double cost = 0.0, dearest = 0.0, room = 0.0;
    for (std::size_t k = 0; k < usable.size(); ++k)
      if (mask & (1u << k)) {
        cost += price[usable[k]] * cap;
        dearest = std::max(dearest, price[usable[k]]);
        room += cap;
      }
    // Only subsets where every member but the dearest is filled completely.
    if (room + 1e-12 < need || room - need >= cap - 1e-12) continue;
    best = std::min(best, cost - (room - need) * dearest);
  }
  return best;
}

}  // namespace

TEST(EvSchedule, FlatPricesChargeEarliest) {
  auto p = schedule_ev_charging(PriceSeries(std::vector<double>(24, 0.1)), night_ev(), 1.0);
  EXPECT_EQ(p[0], 8.0);
  EXPECT_EQ(p[1], 8.0);
  EXPECT_NEAR(p[2], 8.0, 1e-9);
  for (std::size_t i = 3; i < 24; ++i) EXPECT_EQ(p[i], 0.0);
}

TEST(EvSchedule, ChoosesCheapestThree) {
  std::vector<double> price{0.30, 0.25, 0.05, 0.06, 0.07, 0.20};
  price.resize(24, 0.5);
  auto p = schedule_ev_charging(PriceSeries(price), night_ev(), 1.0);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_NEAR(p[i], (i >= 2 && i <= 4) ? 8.0 : 0.0, 1e-9) << i;
  double cost = 0.0;
  for (std::size_t i = 0; i < 24; ++i) cost += p[i] * price[i];
  EXPECT_NEAR(cost, brute_min_cost(price, {0, 1, 2, 3, 4, 5}, 24.0, 8.0), 1e-9);
}

TEST(EvSchedule, AlreadyAtTargetIsZero) {
  auto ev = night_ev();
  ev.soc = 80.0;
  auto p = schedule_ev_charging(PriceSeries(std::vector<double>(24, 0.1)), ev, 1.0);
  EXPECT_TRUE(std::all_of(p.begin(), p.end(), [](double x) { return x == 0.0; }));
}

TEST(EvSchedule, InfeasibleThrows) {
  auto ev = night_ev();
  ev.availability.assign(24, false);
  ev.availability[0] = ev.availability[1] = true;
  EXPECT_THROW(schedule_ev_charging(PriceSeries(std::vector<double>(24, 0.1)), ev, 1.0), InfeasibleError);
}

TEST(EvSchedule, MatchesSubsetOracleOnRandomPrices) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> soc(20.0, 79.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto price = random_series(rng, 24);
    auto ev = night_ev();
    ev.soc = soc(rng);
    auto p = schedule_ev_charging(PriceSeries(price), ev, 1.0);
    EXPECT_GE(ev_soc_at_deadline(ev, p, 1.0), 80.0);
    double cost = 0.0;
    for (std::size_t i = 0; i < 24; ++i) cost += p[i] * price[i];
    EXPECT_NEAR(cost, brute_min_cost(price, {0, 1, 2, 3, 4, 5}, ev_energy_needed_kwh(ev), 8.0), 1e-6);
  }
}

TEST(SocEndError, NoWindowsKeepsBatteryAboveTarget) {
  auto ctx = table1_ctx();
  auto d = simulate_day(ctx, 1e9);
  EXPECT_TRUE(d.windows.empty());
  for (const auto& a : d.actions) EXPECT_FALSE(a.has(ActionKind::TradeDischarge));
  EXPECT_GE(soc_end_error(1e9, ctx).battery, 0.0);
}

TEST(SocEndError, ZeroOfferMinimizesBatteryError) {
  auto ctx = table1_ctx();
  const double at_zero = soc_end_error(0.0, ctx).battery;
  for (double o = 0.0; o <= ctx.offer_max() + 1e-12; o += 0.001)
    EXPECT_LE(at_zero, soc_end_error(o, ctx).battery + 1e-9) << o;
}

TEST(SocEndError, Table1FirstPassMatchesReplay) {
  auto ctx = table1_ctx();
  const double offer = average_consumption_cost(ctx.load, ctx.mcp);
  auto d = simulate_day(ctx, offer);
  const std::size_t n = ctx.horizon();
  const auto& mcp = ctx.mcp.values;

  // Replay by hand: windows, EV plan, then battery arithmetic (efficiency 1).
  std::vector<bool> win(n);
  for (std::size_t i = 0; i < n; ++i) win[i] = mcp[i] > offer;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < ctx.ev.deadline_interval; ++i)
    if (ctx.ev.available(i) && !win[i]) slots.push_back(i);
  std::stable_sort(slots.begin(), slots.end(), [&](auto a, auto b) { return mcp[a] < mcp[b]; });
  std::vector<double> ev_kw(n, 0.0);
  double need = (ctx.ev.end_target_min - ctx.ev.soc) / 100.0 * ctx.ev.capacity_kwh;
  for (auto i : slots) {
    if (need <= 1e-12) break;
    ev_kw[i] = std::min(ctx.ev.max_charge_kw, need);
    need -= ev_kw[i];
  }
  const auto& b = ctx.battery;
  double soc = b.soc, ev_soc = ctx.ev.soc, ev_at_deadline = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == ctx.ev.deadline_interval) ev_at_deadline = ev_soc;
    const double pv = pv_power(ctx.pv, i);
    const double served = win[i] ? 0.9 * ctx.load.values[i] : ctx.load.values[i];
    const double net = served - pv;
    double batt = 0.0;
    if (win[i] && net > 0) batt = -std::min({net, b.max_discharge_kw, (soc - 60.0) / 100.0 * b.capacity_kwh});
    if (!win[i] && net < 0) batt = std::min({-net, b.max_charge_kw, (b.soc_max - soc) / 100.0 * b.capacity_kwh});
    soc += 100.0 * batt / b.capacity_kwh;
    ev_soc += 100.0 * ev_kw[i] / ctx.ev.capacity_kwh;
    for (const auto& e : ctx.ev.consumption_events)
      if (e.interval == i) ev_soc -= e.soc_drop;
    EXPECT_NEAR(d.battery_soc[i], soc, 1e-9) << i;
    EXPECT_NEAR(d.ev_soc[i], ev_soc, 1e-9) << i;
    EXPECT_NEAR(d.actions[i].battery_kw, batt, 1e-9) << i;
  }
  auto e = soc_end_error(offer, ctx);
  EXPECT_NEAR(e.battery, soc - 60.0, 1e-9);
  EXPECT_NEAR(e.ev, ev_at_deadline - 80.0, 1e-9);
}

TEST(Newton, AlreadyWithinToleranceReturnsInitial) {
  auto r = newton_raphson_offer(0.3, [](double) { return 0.1; }, {0.5, 50, 0.0, 1.0});
  EXPECT_EQ(r.offer, 0.3);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(r.converged);
}

TEST(Newton, LinearResidualOneStep) {
  auto r = newton_raphson_offer(0.1, [](double x) { return x - 0.25; }, {1e-6, 50, 0.0, 1.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.offer, 0.25, 1e-6);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_FALSE(r.used_bisection);
}

TEST(Newton, StepFunctionFallsBackToBisection) {
  auto step = [](double x) { return x < 0.4 ? -3.0 : 5.0; };
  auto r = newton_raphson_offer(0.1, step, {0.5, 100, 0.0, 1.0});
  EXPECT_TRUE(r.used_bisection);
  EXPECT_FALSE(r.converged);
  EXPECT_NEAR(r.offer, 0.4, 1e-6);
}

TEST(Newton, PlateauReturnsItsHighEdge) {
  auto f = [](double x) { return x <= 0.3 ? 0.0 : 4.0; };
  auto r = newton_raphson_offer(0.8, f, {0.5, 100, 0.0, 1.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.offer, 0.3, 1e-6);
  EXPECT_LE(r.offer, 0.3);
}

TEST(Newton, NoBracketFlaggedNonConverged) {
  auto r = newton_raphson_offer(0.2, [](double) { return 7.0; }, {0.5, 20, 0.0, 1.0});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.residual, 7.0);
}

TEST(Newton, Table1AgreesWithGridArgmin) {
  auto ctx = table1_ctx();
  auto res = [&](double o) { return soc_end_error(o, ctx).battery; };
  const double init = average_consumption_cost(ctx.load, ctx.mcp);
  auto r = newton_raphson_offer(init, res, {ctx.params.tol, ctx.params.max_iterations, 0.0, ctx.offer_max()});

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> grid;
  for (int k = 0; k * 0.001 <= ctx.offer_max() + 1e-12; ++k) {
    const double o = k * 0.001, e = std::abs(res(o));
    grid.push_back({o, e});
    best = std::min(best, e);
  }
  EXPECT_LE(std::abs(r.residual), best + ctx.params.tol);
  double nearest = std::numeric_limits<double>::infinity();
  for (auto [o, e] : grid)
    if (e <= best + ctx.params.tol) nearest = std::min(nearest, std::abs(o - r.offer));
  EXPECT_LE(nearest, 0.001 + 1e-12);
}

namespace {

// EV only reachable before interval 6; the first four hours are dear enough
// to be trade windows, which blocks half of the charging slots.
StrategyContext ev_shortfall_ctx() {
  StrategyContext ctx;
  std::vector<double> mcp(24, 0.10);
  mcp[0] = 0.30, mcp[1] = 0.31, mcp[2] = 0.32, mcp[3] = 0.33, mcp[4] = 0.05, mcp[5] = 0.05;
  ctx.mcp = PriceSeries(mcp);
  ctx.load = LoadSeries(std::vector<double>(24, 1.0));
  ctx.ev = night_ev();
  return ctx;
}

}  // namespace

TEST(Refine, ConvergedStateIsFixedPoint) {
  auto ctx = table1_ctx();
  IterationState s;
  s.offer = 0.2;
  s.battery_end_soc = 61.0;
  s.ev_end_soc = 80.0;
  s.converged = true;
  auto next = refine(s, ctx);
  EXPECT_EQ(next.offer, s.offer);
  EXPECT_EQ(next.iteration, s.iteration);
  EXPECT_TRUE(next.converged);
}

TEST(Refine, UnderUsedBatteryLowersOffer) {
  auto ctx = table1_ctx();
  IterationState s;
  s.offer = 0.2;
  s.battery_end_soc = 75.0;
  s.ev_end_soc = 85.0;
  auto next = refine(s, ctx);
  EXPECT_LT(next.offer, 0.2);
  EXPECT_NEAR(next.offer, 0.2 * 0.95, 1e-15);
  EXPECT_EQ(next.remedy, "reduce-offer");
  EXPECT_EQ(next.iteration, 1);
}

TEST(Refine, EvShortfallShortensWindows) {
  auto ctx = ev_shortfall_ctx();
  auto day = simulate_day(ctx, 0.2);
  auto s = state_from_day(ctx, day, 0, 0.0);
  ASSERT_NEAR(s.ev_end_soc, 70.0, 1e-9);
  ASSERT_EQ(total_window_length(s.windows), 4u);
  auto next = refine(s, ctx);
  EXPECT_EQ(next.remedy, "shorten-windows");
  EXPECT_LT(total_window_length(next.windows), 4u);
  EXPECT_GE(next.ev_end_soc, 80.0);
  EXPECT_EQ(next.offer_floor, next.offer);
  // Windows stay exactly {cost > offer}.
  EXPECT_EQ(next.windows, find_trade_windows(ctx.mcp, next.offer));
}

TEST(Refine, LimitReachedThrows) {
  auto ctx = table1_ctx();
  IterationState s;
  s.iteration = ctx.params.max_iterations;
  EXPECT_THROW(refine(s, ctx), std::logic_error);
}

TEST(Optimize, Table1MeetsEndConditions) {
  auto ctx = table1_ctx();
  auto r = optimize_offer(ctx);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.refine_iterations(), 50);
  EXPECT_GE(r.final_day.battery_end_soc, 60.0);
  EXPECT_LE(r.final_day.battery_end_soc, 62.0);
  EXPECT_GE(r.final_day.ev_soc_at_deadline, 80.0);
}

TEST(Optimize, MaxIterationsReportsNonConverged) {
  auto ctx = table1_ctx();
  ctx.params.max_iterations = 1;
  ctx.battery.soc = 95.0;  // far above target; one step cannot fix it
  ctx.params.offer_reduction = 0.01;
  auto r = optimize_offer(ctx);
  EXPECT_LE(r.refine_iterations(), 1);
  if (!r.converged) {
    EXPECT_FALSE(end_conditions_met(ctx, r.final_day.battery_end_soc, r.final_day.ev_soc_at_deadline));
  }
}

TEST(SimulateDay, RandomScenariosBalanceAndRespectBounds) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto cfg = testsupport::randomized_scenario(testsupport::table1_dir(), seed);
    auto ctx = build_context(cfg, Ledger{});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> offer(0.0, ctx.offer_max());
    for (int k = 0; k < 5; ++k) {
      auto d = simulate_day(ctx, offer(rng));
      for (std::size_t i = 0; i < d.actions.size(); ++i) {
        ASSERT_NEAR(d.actions[i].balance_error_kw(), 0.0, 1e-6) << seed << " @" << i;
        ASSERT_GE(d.battery_soc[i], ctx.battery.soc_min);
        ASSERT_LE(d.battery_soc[i], ctx.battery.soc_max);
        ASSERT_EQ(d.in_window(i), ctx.mcp.values[i] > d.offer);
      }
    }
  }
}

TEST(EvSchedule, ConsumptionEventIsCoveredBeforeItHappens) {
  ElectricVehicle ev;
  ev.soc = 80.0;
  ev.availability.assign(24, false);
  for (std::size_t i = 8; i <= 12; ++i) ev.availability[i] = true;
  ev.consumption_events.push_back({12, 70.0});  // needs 90% just before the drop
  std::vector<double> price(24, 0.2);
  price[9] = 0.05;
  auto plan = plan_ev_charging(PriceSeries(price), ev, 1.0);
  EXPECT_EQ(plan.trip_shortfall_kwh, 0.0);
  EXPECT_NEAR(plan.power_kw[9], 7.2, 1e-9);
  EXPECT_NEAR(plan.power_kw[8], 0.8, 1e-6);
  ElectricVehicle stepped = ev;
  for (std::size_t i = 0; i < 24; ++i) stepped = step_ev(stepped, plan.power_kw[i], 1.0, i);
  EXPECT_GE(stepped.soc, ev.soc_min);
}

TEST(EvSchedule, TripPrefersOpenIntervalsOverWindows) {
  ElectricVehicle ev;
  ev.soc = 80.0;
  ev.availability.assign(24, true);
  ev.consumption_events.push_back({10, 65.0});  // needs 5 points = 4 kWh
  std::vector<double> price(24, 0.30);
  price[7] = 0.01;
  std::vector<bool> blocked(24, false);
  blocked[7] = true;
  auto plan = plan_ev_charging(PriceSeries(price), ev, 1.0, blocked);
  EXPECT_EQ(plan.power_kw[7], 0.0);
  EXPECT_NEAR(plan.power_kw[0], 4.0, 1e-6);
  blocked[7] = false;
  EXPECT_NEAR(plan_ev_charging(PriceSeries(price), ev, 1.0, blocked).power_kw[7], 4.0, 1e-6);
}

TEST(EvSchedule, UncoverableTripReported) {
  ElectricVehicle ev;
  ev.soc = 80.0;
  ev.availability.assign(24, false);
  ev.consumption_events.push_back({5, 70.0});
  auto plan = plan_ev_charging(PriceSeries(std::vector<double>(24, 0.1)), ev, 1.0);
  EXPECT_GT(plan.trip_shortfall_kwh, 0.0);
  EXPECT_GT(plan.shortfall_kwh, 0.0);
}

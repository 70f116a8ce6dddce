#pragma once

// Storage, PV and demand-response models. Storage steps never clamp: a step
// that would break a rate limit or an SOC bound throws, so callers see the
// infeasibility.
//
// Sign convention: positive power charges storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace p2ptrade {

struct BatteryStorage {
  double capacity_kwh = 250.0;
  double soc = 60.0;  // percent
  double soc_min = 20.0;
  double soc_max = 95.0;
  double end_target_min = 60.0;
  double max_charge_kw = 10.0;
  double max_discharge_kw = 10.0;
  double round_trip_efficiency = 1.0;

  void validate() const {
    if (!(capacity_kwh > 0.0)) throw std::invalid_argument("battery capacity must be positive");
    if (!(0.0 <= soc_min && soc_min <= soc_max && soc_max <= 100.0))
      throw std::invalid_argument("battery SOC bounds must satisfy 0 <= min <= max <= 100");
    if (soc < soc_min || soc > soc_max) throw std::invalid_argument("battery SOC outside its bounds");
    if (end_target_min < soc_min || end_target_min > soc_max)
      throw std::invalid_argument("battery end target outside SOC bounds");
    if (!(max_charge_kw > 0.0) || !(max_discharge_kw > 0.0))
      throw std::invalid_argument("battery rate limits must be positive");
    if (!(round_trip_efficiency > 0.0 && round_trip_efficiency <= 1.0))
      throw std::invalid_argument("battery efficiency must be in (0, 1]");
  }
};

struct ConsumptionEvent {
  std::size_t interval = 0;
  double soc_drop = 0.0;  // percentage points
};

struct ElectricVehicle {
  double capacity_kwh = 80.0;
  double soc = 50.0;
  double soc_min = 20.0;
  double soc_max = 100.0;
  double end_target_min = 80.0;
  std::size_t deadline_interval = 6;
  std::vector<bool> availability;  // plugged in, per interval
  double max_charge_kw = 7.2;
  double charge_efficiency = 1.0;
  std::vector<ConsumptionEvent> consumption_events;

  bool available(std::size_t interval) const { return interval < availability.size() && availability[interval]; }

  void validate() const {
    if (!(capacity_kwh > 0.0)) throw std::invalid_argument("EV capacity must be positive");
    if (!(0.0 <= soc_min && soc_min <= soc_max && soc_max <= 100.0))
      throw std::invalid_argument("EV SOC bounds must satisfy 0 <= min <= max <= 100");
    if (soc < soc_min || soc > soc_max) throw std::invalid_argument("EV SOC outside its bounds");
    if (end_target_min < soc_min || end_target_min > soc_max)
      throw std::invalid_argument("EV end target outside SOC bounds");
    if (!(max_charge_kw > 0.0)) throw std::invalid_argument("EV charge rate must be positive");
    if (!(charge_efficiency > 0.0 && charge_efficiency <= 1.0))
      throw std::invalid_argument("EV efficiency must be in (0, 1]");
    for (const auto& e : consumption_events)
      if (!(e.soc_drop >= 0.0)) throw std::invalid_argument("EV consumption drop must be non-negative");
  }
};

/// Power lookup keyed by time of day in hours, linearly interpolated.
struct PVArray {
  std::vector<std::pair<double, double>> irradiance_to_power;  // (hour, kW per panel), sorted by hour
  int panel_count = 1;
};

struct DRProgram {
  double reduction_fraction = 0.10;
  double comfort_floor = 0.0;  // fraction of load that may never be curtailed

  void validate() const {
    if (!(comfort_floor >= 0.0 && comfort_floor <= 1.0))
      throw std::invalid_argument("DR comfort floor must be in [0, 1]");
    if (!(reduction_fraction >= 0.0 && reduction_fraction <= 1.0 - comfort_floor))
      throw std::invalid_argument("DR reduction must be in [0, 1 - comfort floor]");
  }
};

// ---------------------------------------------------------------------------

namespace detail {
inline double soc_delta(double capacity_kwh, double power_kw, double dt_h, double efficiency) {
  const double split = std::sqrt(efficiency);
  const double stored = power_kw >= 0.0 ? power_kw * dt_h * split : power_kw * dt_h / split;
  return 100.0 * stored / capacity_kwh;
}
}  // namespace detail

inline BatteryStorage step_battery(BatteryStorage b, double power_kw, double dt_h) {
  if (!std::isfinite(power_kw)) throw DeviceLimitError("battery power must be finite");
  if (power_kw > b.max_charge_kw) throw DeviceLimitError("battery charge rate exceeded");
  if (-power_kw > b.max_discharge_kw) throw DeviceLimitError("battery discharge rate exceeded");
  if (power_kw == 0.0) return b;

  const double next = b.soc + detail::soc_delta(b.capacity_kwh, power_kw, dt_h, b.round_trip_efficiency);
  if (next < b.soc_min || next > b.soc_max)
    throw SocBoundError("battery SOC would leave [" + std::to_string(b.soc_min) + ", " +
                        std::to_string(b.soc_max) + "]: " + std::to_string(next));
  b.soc = next;
  return b;
}

/// Largest charge power (kW) that stays within the rate limit and below
/// `ceiling` percent after one step.
inline double charge_headroom_kw(const BatteryStorage& b, double dt_h, double ceiling) {
  ceiling = std::min(ceiling, b.soc_max);
  if (b.soc >= ceiling) return 0.0;
  const double energy = (ceiling - b.soc) / 100.0 * b.capacity_kwh / std::sqrt(b.round_trip_efficiency);
  double p = std::min(b.max_charge_kw, energy / dt_h);
  while (p > 0.0 && b.soc + detail::soc_delta(b.capacity_kwh, p, dt_h, b.round_trip_efficiency) > ceiling)
    p = std::nextafter(p, 0.0);
  return p;
}

/// Largest discharge power (kW, positive) that stays within the rate limit
/// and at or above `floor` percent after one step.
inline double discharge_headroom_kw(const BatteryStorage& b, double dt_h, double floor) {
  floor = std::max(floor, b.soc_min);
  if (b.soc <= floor) return 0.0;
  const double energy = (b.soc - floor) / 100.0 * b.capacity_kwh * std::sqrt(b.round_trip_efficiency);
  double p = std::min(b.max_discharge_kw, energy / dt_h);
  while (p > 0.0 && b.soc + detail::soc_delta(b.capacity_kwh, -p, dt_h, b.round_trip_efficiency) < floor)
    p = std::nextafter(p, 0.0);
  return p;
}

inline ElectricVehicle step_ev(ElectricVehicle ev, double power_kw, double dt_h, std::size_t interval) {
  if (!std::isfinite(power_kw) || power_kw < 0.0) throw DeviceLimitError("EV power must be a finite charge");
  if (power_kw > ev.max_charge_kw) throw DeviceLimitError("EV charge rate exceeded");
  if (power_kw > 0.0 && !ev.available(interval))
    throw DeviceLimitError("EV is not plugged in at interval " + std::to_string(interval));

  if (power_kw > 0.0) {
    const double next = ev.soc + detail::soc_delta(ev.capacity_kwh, power_kw, dt_h, ev.charge_efficiency);
    if (next > ev.soc_max) throw SocBoundError("EV SOC would exceed its maximum: " + std::to_string(next));
    ev.soc = next;
  }
  for (const auto& e : ev.consumption_events) {
    if (e.interval != interval) continue;
    const double next = ev.soc - e.soc_drop;
    if (next < ev.soc_min) throw SocBoundError("EV consumption would drop SOC below its minimum");
    ev.soc = next;
  }
  return ev;
}

/// Energy (kWh drawn from the supply) needed before the deadline to reach the
/// end target, including consumption that happens before the deadline.
inline double ev_energy_needed_kwh(const ElectricVehicle& ev) {
  double drops = 0.0;
  for (const auto& e : ev.consumption_events)
    if (e.interval < ev.deadline_interval) drops += e.soc_drop;
  const double points = std::max(0.0, ev.end_target_min + drops - ev.soc);
  return points / 100.0 * ev.capacity_kwh / std::sqrt(ev.charge_efficiency);
}

inline bool ev_deadline_feasible(const ElectricVehicle& ev, double dt_h) {
  double deliverable = 0.0;
  for (std::size_t i = 0; i < ev.deadline_interval; ++i)
    if (ev.available(i)) deliverable += ev.max_charge_kw * dt_h;
  return deliverable >= ev_energy_needed_kwh(ev);
}

inline double pv_power_at(const PVArray& pv, double hour_of_day) {
  const auto& t = pv.irradiance_to_power;
  if (t.empty() || hour_of_day < t.front().first || hour_of_day > t.back().first) return 0.0;
  auto hi = std::lower_bound(t.begin(), t.end(), hour_of_day,
                             [](const auto& row, double h) { return row.first < h; });
  double per_panel;
  if (hi->first == hour_of_day) {
    per_panel = hi->second;
  } else {
    auto lo = std::prev(hi);
    const double w = (hour_of_day - lo->first) / (hi->first - lo->first);
    per_panel = lo->second + w * (hi->second - lo->second);
  }
  return std::max(0.0, per_panel) * pv.panel_count;
}

/// PV output for a market interval, sampled at the interval start.
inline double pv_power(const PVArray& pv, std::size_t interval, double dt_h = 1.0) {
  return pv_power_at(pv, std::fmod(static_cast<double>(interval) * dt_h, 24.0));
}

inline double apply_dr(double load_kw, const DRProgram& dr, bool triggered) {
  return triggered ? load_kw * (1.0 - dr.reduction_fraction) : load_kw;
}

}  // namespace p2ptrade

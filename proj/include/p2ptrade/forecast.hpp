#pragma once

// Day-ahead price and load estimates. The shipped forecaster averages cleared
// prices recorded on the ledger per market interval and falls back to a
// lookup table where no history exists.

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ledger.hpp"

namespace p2ptrade {

namespace detail {
inline void require_finite_nonneg(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || v[i] < 0.0)
      throw std::invalid_argument(std::string(what) + " value at interval " + std::to_string(i) +
                                  " must be finite and non-negative");
}
}  // namespace detail

/// Per-interval price in $/kWh.
struct PriceSeries {
  std::vector<double> values;
  double interval_hours = 1.0;

  PriceSeries() = default;
  PriceSeries(std::vector<double> v, double dt = 1.0) : values(std::move(v)), interval_hours(dt) {
    detail::require_finite_nonneg(values, "price");
    if (!(interval_hours > 0.0)) throw std::invalid_argument("interval length must be positive");
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values.at(i); }
  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

/// Per-interval average power in kW.
struct LoadSeries {
  std::vector<double> values;
  double interval_hours = 1.0;

  LoadSeries() = default;
  LoadSeries(std::vector<double> v, double dt = 1.0) : values(std::move(v)), interval_hours(dt) {
    detail::require_finite_nonneg(values, "load");
    if (!(interval_hours > 0.0)) throw std::invalid_argument("interval length must be positive");
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values.at(i); }
  friend bool operator==(const LoadSeries&, const LoadSeries&) = default;
};

/// A flexible household task queued by the prosumer: constant kW over the
/// inclusive interval range [first, last].
struct ScheduledTask {
  std::string name;
  std::size_t first_interval = 0;
  std::size_t last_interval = 0;
  double power_kw = 0.0;
};

struct UserDayAheadInputs {
  std::vector<ScheduledTask> scheduled_tasks;
  std::size_t ev_departure_interval = 0;
  double comfort_floor = 0.0;  // fraction of load that must always be served
};

/// Pluggable Step-1 price estimator.
class MarketPriceForecaster {
 public:
  virtual ~MarketPriceForecaster() = default;
  virtual PriceSeries estimate(const Ledger& history, const PriceSeries& fallback) const = 0;
};

inline PriceSeries estimate_mcp(const Ledger& ledger, const PriceSeries& fallback) {
  std::map<std::int64_t, std::pair<double, std::size_t>> acc;  // interval -> (sum, count)
  for (const auto& b : ledger.blocks())
    for (const auto& tx : b.transactions) {
      auto& [sum, n] = acc[tx.interval_index];
      sum += tx.price_per_kwh();
      ++n;
    }

  PriceSeries out = fallback;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    auto it = acc.find(static_cast<std::int64_t>(i));
    if (it != acc.end()) out.values[i] = it->second.first / static_cast<double>(it->second.second);
  }
  return out;
}

class LedgerMeanForecaster final : public MarketPriceForecaster {
 public:
  PriceSeries estimate(const Ledger& history, const PriceSeries& fallback) const override {
    return estimate_mcp(history, fallback);
  }
};

inline LoadSeries estimate_load(const LoadSeries& base, const UserDayAheadInputs& inputs) {
  LoadSeries out = base;
  for (const auto& task : inputs.scheduled_tasks) {
    if (task.first_interval > task.last_interval || task.last_interval >= base.size())
      throw std::out_of_range("scheduled task '" + task.name + "' lies outside the horizon");
    if (!std::isfinite(task.power_kw) || task.power_kw < 0.0)
      throw std::invalid_argument("scheduled task '" + task.name + "' has invalid power");
    for (std::size_t i = task.first_interval; i <= task.last_interval; ++i) out.values[i] += task.power_kw;
  }
  return out;
}

/// Energy-weighted mean price, sum(load*price*dt) / sum(load*dt).
inline double average_consumption_cost(const LoadSeries& load, const PriceSeries& mcp) {
  if (load.size() != mcp.size()) throw std::invalid_argument("load and price series differ in length");
  // Accumulated relative to the first price so a constant series comes back exactly.
  const double ref = load.size() ? mcp.values[0] : 0.0;
  double energy = 0.0, excess = 0.0;
  for (std::size_t i = 0; i < load.size(); ++i) {
    const double e = load.values[i] * load.interval_hours;
    energy += e;
    excess += e * (mcp.values[i] - ref);
  }
  if (!(energy > 0.0)) throw std::domain_error("average_consumption_cost: total energy is zero");
  return ref + excess / energy;
}

}  // namespace p2ptrade

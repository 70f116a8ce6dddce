#pragma once

// Scenario files: one JSON document plus two-column CSV lookup tables,
// referenced by relative path or given inline as [[x, y], ...] arrays.
// Schema: docs/FORMATS.md.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "devices.hpp"
#include "errors.hpp"
#include "forecast.hpp"
#include "ledger.hpp"
#include "strategy.hpp"

namespace p2ptrade {

struct ConsumerPeer {
  std::string peer_id;
  double bid_price_per_kwh = 0.0;
  double demand_kw = 0.0;
};

struct MarketSettings {
  std::string prosumer_id = "prosumer";
  std::string utility_id = "utility";
  double feed_in_ratio = 0.9;  // utility buys at this fraction of the tariff (the forecast MCP)
  std::vector<ConsumerPeer> consumers;
};

struct ScenarioConfig {
  std::string name;
  std::size_t horizon_intervals = 24;
  double interval_seconds = 3600.0;
  std::uint64_t seed = 0;

  PVArray pv;
  LoadSeries base_load;
  PriceSeries fallback_mcp;
  BatteryStorage battery;
  ElectricVehicle ev;
  DRProgram dr;
  UserDayAheadInputs user_inputs;
  StrategyParams strategy;
  MarketSettings market;
  EndorsementPolicy endorsement;
  std::optional<std::filesystem::path> history_ledger;

  double dt_h() const { return interval_seconds / 3600.0; }

  /// Cross-field checks; throws ScenarioError naming the field.
  void validate() const;
};

using Table = std::vector<std::pair<double, double>>;

/// Two-column CSV: optional header line, then `x,y` rows. Blank lines and
/// lines starting with '#' are skipped.
inline Table read_table_csv(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(field, "cannot open table " + path.string());
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ScenarioError(field, path.filename().string() + " line " + std::to_string(lineno) + ": expected two columns");
    try {
      const double x = std::stod(line.substr(0, comma));
      const double y = std::stod(line.substr(comma + 1));
      t.emplace_back(x, y);
      header_allowed = false;
    } catch (const std::exception&) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw ScenarioError(field, path.filename().string() + " line " + std::to_string(lineno) + ": not a number");
    }
  }
  return t;
}

namespace detail {

inline Table table_field(const nlohmann::json& tables, const char* key, const std::filesystem::path& base) {
  const std::string field = std::string("tables.") + key;
  if (!tables.contains(key) || tables.at(key).is_null()) throw ScenarioError(field, "missing table");
  const auto& v = tables.at(key);
  if (v.is_string()) return read_table_csv(base / v.get<std::string>(), field);
  if (v.is_array()) {
    Table t;
    for (const auto& row : v) {
      if (!row.is_array() || row.size() != 2) throw ScenarioError(field, "inline rows must be [x, y] pairs");
      t.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    return t;
  }
  throw ScenarioError(field, "must be a CSV path or an inline array");
}

/// Interval-keyed table -> dense series; keys must be exactly 0..n-1.
inline std::vector<double> dense_series(const Table& t, std::size_t n, const std::string& field) {
  if (t.size() != n)
    throw ScenarioError(field, "has " + std::to_string(t.size()) + " rows but the horizon is " + std::to_string(n) +
                                   " intervals");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i].first != static_cast<double>(i))
      throw ScenarioError(field, "row " + std::to_string(i) + " is keyed " + std::to_string(t[i].first) +
                                     ", expected interval " + std::to_string(i));
    if (!(t[i].second >= 0.0)) throw ScenarioError(field, "negative value at interval " + std::to_string(i));
    v[i] = t[i].second;
  }
  return v;
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

template <class Fn>
void with_field(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(field, e.what());
  }
}

}  // namespace detail

inline void ScenarioConfig::validate() const {
  if (horizon_intervals == 0) throw ScenarioError("horizon.intervals", "must be positive");
  if (!(interval_seconds > 0.0)) throw ScenarioError("horizon.interval_seconds", "must be positive");
  if (base_load.size() != horizon_intervals) throw ScenarioError("tables.load", "does not cover the horizon");
  if (fallback_mcp.size() != horizon_intervals) throw ScenarioError("tables.mcp", "does not cover the horizon");
  if (pv.irradiance_to_power.empty()) throw ScenarioError("tables.solar", "table is empty");
  for (std::size_t i = 1; i < pv.irradiance_to_power.size(); ++i)
    if (!(pv.irradiance_to_power[i].first > pv.irradiance_to_power[i - 1].first))
      throw ScenarioError("tables.solar", "hours must be strictly increasing");
  if (pv.panel_count < 0) throw ScenarioError("pv.panel_count", "must be non-negative");
  detail::with_field("battery", [&] { battery.validate(); });
  detail::with_field("ev", [&] { ev.validate(); });
  if (ev.availability.size() != horizon_intervals) throw ScenarioError("ev.available", "does not cover the horizon");
  if (ev.deadline_interval > horizon_intervals) throw ScenarioError("ev.deadline_interval", "beyond the horizon");
  for (const auto& e : ev.consumption_events)
    if (e.interval >= horizon_intervals) throw ScenarioError("ev.consumption_events", "interval beyond the horizon");
  detail::with_field("dr", [&] { dr.validate(); });
  for (const auto& t : user_inputs.scheduled_tasks)
    if (t.first_interval > t.last_interval || t.last_interval >= horizon_intervals)
      throw ScenarioError("user_inputs.scheduled_tasks", "task '" + t.name + "' lies outside the horizon");
  if (!(strategy.offer_reduction > 0.0 && strategy.offer_reduction < 1.0))
    throw ScenarioError("strategy.offer_reduction", "must be in (0, 1)");
  if (!(strategy.slack >= 0.0)) throw ScenarioError("strategy.slack", "must be non-negative");
  if (!(strategy.tol > 0.0)) throw ScenarioError("strategy.tol", "must be positive");
  if (strategy.max_iterations < 1) throw ScenarioError("strategy.max_iterations", "must be at least 1");
  if (strategy.trade_floor_soc && (*strategy.trade_floor_soc < battery.soc_min || *strategy.trade_floor_soc > battery.soc_max))
    throw ScenarioError("strategy.trade_floor_soc", "outside the battery SOC bounds");
  if (!(market.feed_in_ratio >= 0.0 && market.feed_in_ratio < 1.0))
    throw ScenarioError("market.feed_in_ratio", "must be in [0, 1)");
  if (market.prosumer_id == market.utility_id) throw ScenarioError("market", "prosumer and utility ids collide");
  for (const auto& c : market.consumers)
    if (c.peer_id == market.prosumer_id || c.peer_id == market.utility_id || c.peer_id.empty())
      throw ScenarioError("market.consumers", "consumer id '" + c.peer_id + "' is empty or collides");
  detail::with_field("endorsement", [&] { endorsement.validate(); });
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  using detail::get_or;
  using detail::with_field;
  ScenarioConfig c;

  c.name = get_or<std::string>(j, "name", "scenario");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  with_field("horizon", [&] {
    const auto& h = j.at("horizon");
    c.horizon_intervals = h.at("intervals").get<std::size_t>();
    c.interval_seconds = get_or<double>(h, "interval_seconds", 3600.0);
  });
  const std::size_t n = c.horizon_intervals;

  if (!j.contains("tables")) throw ScenarioError("tables", "missing");
  const auto& tables = j.at("tables");
  auto solar = detail::table_field(tables, "solar", base_dir);
  auto load = detail::table_field(tables, "load", base_dir);
  auto mcp = detail::table_field(tables, "mcp", base_dir);
  c.pv.irradiance_to_power = std::move(solar);
  with_field("tables.load", [&] { c.base_load = LoadSeries(detail::dense_series(load, n, "tables.load"), c.dt_h()); });
  with_field("tables.mcp", [&] { c.fallback_mcp = PriceSeries(detail::dense_series(mcp, n, "tables.mcp"), c.dt_h()); });
  if (j.contains("pv")) with_field("pv.panel_count", [&] { c.pv.panel_count = j.at("pv").at("panel_count").get<int>(); });

  with_field("battery", [&] {
    const auto& b = j.at("battery");
    c.battery.capacity_kwh = b.at("capacity_kwh").get<double>();
    c.battery.soc = b.at("initial_soc").get<double>();
    c.battery.soc_min = get_or<double>(b, "soc_min", c.battery.soc_min);
    c.battery.soc_max = get_or<double>(b, "soc_max", c.battery.soc_max);
    c.battery.end_target_min = get_or<double>(b, "end_target_min", c.battery.end_target_min);
    c.battery.max_charge_kw = get_or<double>(b, "max_charge_kw", c.battery.max_charge_kw);
    c.battery.max_discharge_kw = get_or<double>(b, "max_discharge_kw", c.battery.max_discharge_kw);
    c.battery.round_trip_efficiency = get_or<double>(b, "round_trip_efficiency", c.battery.round_trip_efficiency);
  });

  with_field("ev", [&] {
    const auto& e = j.at("ev");
    c.ev.capacity_kwh = e.at("capacity_kwh").get<double>();
    c.ev.soc = e.at("initial_soc").get<double>();
    c.ev.soc_min = get_or<double>(e, "soc_min", c.ev.soc_min);
    c.ev.soc_max = get_or<double>(e, "soc_max", c.ev.soc_max);
    c.ev.end_target_min = get_or<double>(e, "end_target_min", c.ev.end_target_min);
    c.ev.deadline_interval = e.at("deadline_interval").get<std::size_t>();
    c.ev.max_charge_kw = get_or<double>(e, "max_charge_kw", c.ev.max_charge_kw);
    c.ev.charge_efficiency = get_or<double>(e, "charge_efficiency", c.ev.charge_efficiency);
    c.ev.availability.assign(n, false);
    for (const auto& range : e.at("available")) {
      auto first = range.at(0).get<std::size_t>(), last = range.at(1).get<std::size_t>();
      if (first > last || last >= n) throw ScenarioError("ev.available", "range outside the horizon");
      for (auto i = first; i <= last; ++i) c.ev.availability[i] = true;
    }
    if (e.contains("consumption_events"))
      for (const auto& ev : e.at("consumption_events"))
        c.ev.consumption_events.push_back({ev.at("interval").get<std::size_t>(), ev.at("soc_drop").get<double>()});
  });

  with_field("dr", [&] {
    const auto& d = j.at("dr");
    c.dr.reduction_fraction = d.at("reduction_fraction").get<double>();
    c.dr.comfort_floor = get_or<double>(d, "comfort_floor", 0.0);
  });

  with_field("user_inputs", [&] {
    c.user_inputs.ev_departure_interval = c.ev.deadline_interval;
    c.user_inputs.comfort_floor = c.dr.comfort_floor;
    if (!j.contains("user_inputs")) return;
    const auto& u = j.at("user_inputs");
    if (u.contains("scheduled_tasks"))
      for (const auto& t : u.at("scheduled_tasks"))
        c.user_inputs.scheduled_tasks.push_back({get_or<std::string>(t, "name", "task"), t.at("first").get<std::size_t>(),
                                                 t.at("last").get<std::size_t>(), t.at("kw").get<double>()});
  });

  with_field("strategy", [&] {
    if (!j.contains("strategy")) return;
    const auto& s = j.at("strategy");
    c.strategy.offer_reduction = get_or<double>(s, "offer_reduction", c.strategy.offer_reduction);
    c.strategy.slack = get_or<double>(s, "slack", c.strategy.slack);
    c.strategy.tol = get_or<double>(s, "tol", c.strategy.tol);
    c.strategy.max_iterations = get_or<int>(s, "max_iterations", c.strategy.max_iterations);
    if (s.contains("trade_floor_soc") && !s.at("trade_floor_soc").is_null())
      c.strategy.trade_floor_soc = s.at("trade_floor_soc").get<double>();
  });

  with_field("market", [&] {
    if (!j.contains("market")) return;
    const auto& m = j.at("market");
    c.market.prosumer_id = get_or<std::string>(m, "prosumer_id", c.market.prosumer_id);
    c.market.utility_id = get_or<std::string>(m, "utility_id", c.market.utility_id);
    c.market.feed_in_ratio = get_or<double>(m, "feed_in_ratio", c.market.feed_in_ratio);
    if (m.contains("consumers"))
      for (const auto& p : m.at("consumers"))
        c.market.consumers.push_back(
            {p.at("peer_id").get<std::string>(), p.at("bid_price").get<double>(), p.at("demand_kw").get<double>()});
  });

  with_field("endorsement", [&] {
    const auto& e = j.at("endorsement");
    c.endorsement.peer_ids = e.at("peers").get<std::vector<std::string>>();
    c.endorsement.quorum = e.at("quorum").get<std::size_t>();
  });

  if (j.contains("history_ledger") && !j.at("history_ledger").is_null())
    c.history_ledger = base_dir / j.at("history_ledger").get<std::string>();

  c.validate();
  return c;
}

/// Accepts a scenario JSON file, or a directory containing scenario.json.
inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(path)) file = path / "scenario.json";
  std::ifstream in(file);
  if (!in) throw ScenarioError("scenario", "cannot open " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("scenario", file.string() + ": " + e.what());
  }
  return parse_scenario(j, file.parent_path());
}

}  // namespace p2ptrade

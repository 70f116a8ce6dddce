#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace p2ptrade {

// Ledger quantities are fixed-point integers so digests are reproducible
// across languages: energy in milli-kWh, price in tenths of a cent per kWh.
inline constexpr double kMilliPerKwh = 1000.0;
inline constexpr double kMillsPerDollar = 1000.0;

inline std::int64_t to_milli_kwh(double kwh) {
  if (!std::isfinite(kwh)) throw std::invalid_argument("energy must be finite");
  return static_cast<std::int64_t>(std::llround(kwh * kMilliPerKwh));
}

inline std::int64_t to_mills(double dollars_per_kwh) {
  if (!std::isfinite(dollars_per_kwh)) throw std::invalid_argument("price must be finite");
  return static_cast<std::int64_t>(std::llround(dollars_per_kwh * kMillsPerDollar));
}

inline double from_milli_kwh(std::int64_t v) { return static_cast<double>(v) / kMilliPerKwh; }
inline double from_mills(std::int64_t v) { return static_cast<double>(v) / kMillsPerDollar; }

/// Market interval length in hours.
struct Hours {
  double value = 1.0;
};

}  // namespace p2ptrade

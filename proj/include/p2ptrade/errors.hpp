#pragma once

#include <stdexcept>
#include <string>

namespace p2ptrade {

/// Requested power exceeds a device rate limit or violates its availability.
class DeviceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A step would leave a storage device outside its SOC bounds.
class SocBoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The scenario cannot satisfy a hard constraint (e.g. the EV deadline).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file problem, tagged with the offending field.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace p2ptrade

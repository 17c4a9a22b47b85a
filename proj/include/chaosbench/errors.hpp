#pragma once

#include <stdexcept>
#include <string>

namespace chaosbench {

/// Precondition or shape violation in caller-supplied data.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state component became non-finite (or overflowed) during integration.
class DivergedTrajectory : public std::runtime_error {
 public:
  DivergedTrajectory(double time, const std::string& what)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Wall-clock or memory ceiling exceeded.
class ResourceExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chaosbench

#pragma once

#include <stdexcept>
#include <string>

namespace qlim {

// Argument outside the domain of an operation (negative time, t past horizon,
// negative composition argument, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two objects that must share a domain do not (horizons, grids, lengths).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A first-passage level is never exceeded on the available window.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Explicit stepping produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters fall outside the heavy-traffic regime an operation requires
// (e.g. lambda <= mu for an efficiency-driven closed form).
class RegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid user-facing configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An invariant that the simulator guarantees was violated.
class SimulatorBugError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qlim

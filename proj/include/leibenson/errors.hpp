#pragma once

#include <stdexcept>
#include <string>

namespace leibenson {

/// Input outside the admissible region of some formula (D <= 0, n <= p, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Quadrature could not produce a finite value (non-integrable endpoint,
/// refinement budget exhausted).
class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

/// An integral over the whole space diverges because of its tail.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation is well posed but degenerate: stalled time step, empty
/// probe family, zero gradient term, failed nonlinear solve.
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested time window is not covered by a trace.
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace leibenson

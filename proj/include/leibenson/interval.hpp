#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace leibenson {

/// Real interval with explicit endpoint flags. An empty interval is a normal
/// value; `unbounded_above` overrides `upper`.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_closed = false;
  bool upper_closed = false;
  bool unbounded_above = false;

  static Interval open(double lo, double hi) { return {lo, hi, false, false, false}; }
  static Interval closed_open(double lo, double hi) { return {lo, hi, true, false, false}; }
  static Interval open_ray(double lo) {
    return {lo, std::numeric_limits<double>::infinity(), false, false, true};
  }
  static Interval closed_ray(double lo) {
    return {lo, std::numeric_limits<double>::infinity(), true, false, true};
  }

  bool empty() const {
    if (unbounded_above) return false;
    if (lower < upper) return false;
    return !(lower == upper && lower_closed && upper_closed);
  }

  bool contains(double x) const {
    if (std::isnan(x)) return false;
    const bool above = lower_closed ? x >= lower : x > lower;
    if (!above) return false;
    if (unbounded_above) return true;
    return upper_closed ? x <= upper : x < upper;
  }

  /// Intersection with [0, inf): the exponents l are non-negative throughout.
  Interval clipped_at_zero() const {
    Interval out = *this;
    if (lower < 0.0) {
      out.lower = 0.0;
      out.lower_closed = true;
    }
    return out;
  }

  std::string to_string() const {
    if (empty()) return "(empty)";
    std::ostringstream os;
    os.precision(6);
    os << (lower_closed ? '[' : '(') << lower << ", ";
    if (unbounded_above) {
      os << "inf)";
    } else {
      os << upper << (upper_closed ? ']' : ')');
    }
    return os.str();
  }
};

}  // namespace leibenson

#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with graded subdivision toward
// r = 0 for integrable power singularities and doubling subdivision for long
// radial tails.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <vector>

#include "leibenson/errors.hpp"

namespace leibenson::quad {

struct Tolerance {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  long evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    kronrod += kKronrodWeights[j] * (f1[j] + f2[j]);
    abs_sum += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1[j] + f2[j]);
  }
  const double value = kronrod * half;
  double err = std::abs((kronrod - gauss) * half);
  // QUADPACK-style scaling of the raw difference, plus a rounding floor.
  const double mean = kronrod * 0.5;
  double asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  asc *= std::abs(half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  const double resabs = abs_sum * std::abs(half);
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(err, 50.0 * eps * resabs);
  return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive GK15 on a finite interval.
template <class F>
Result integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
  if (a == b) return {};
  std::priority_queue<detail::Panel> panels;
  auto first = detail::gk15(f, a, b);
  double total = first.value;
  double total_err = first.error;
  long evals = 15;
  panels.push(first);
  while (total_err > std::max(tol.abs_tol, tol.rel_tol * std::abs(total))) {
    if (static_cast<int>(panels.size()) >= tol.max_intervals) {
      std::ostringstream os;
      os << "adaptive quadrature on [" << a << ", " << b << "] did not reach tolerance (estimate "
         << total << ", error " << total_err << ")";
      throw QuadratureError(os.str());
    }
    const auto worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted at machine precision
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Recompute the sums from the panels to shed accumulated cancellation.
  double v = 0.0, e = 0.0;
  while (!panels.empty()) {
    v += panels.top().value;
    e += panels.top().error;
    panels.pop();
  }
  return {v, e, evals};
}

/// Integral over (0, b] of an integrand that may behave like r^e near the
/// origin with e > -1. The interval is cut at b 2^-k; once the panel sums decay
/// geometrically the remainder is summed in closed form. Passing the known
/// exponent makes the remainder exact for pure powers and allows an early
/// non-integrability verdict.
template <class F>
Result integrate_from_origin(F&& f, double b, std::optional<double> origin_exponent = std::nullopt,
                             const Tolerance& tol = {}) {
  if (origin_exponent && !(*origin_exponent > -1.0)) {
    std::ostringstream os;
    os << "integrand ~ r^" << *origin_exponent << " is not integrable at r = 0";
    throw QuadratureError(os.str());
  }
  // Panel ratio 2^-(e+1) expected from r^e near the origin; 0 when unknown.
  const bool predicted = origin_exponent.has_value();
  const double predicted_ratio = predicted ? std::pow(2.0, -(*origin_exponent + 1.0)) : 0.0;

  Tolerance piece_tol = tol;
  Result out;
  double hi = b;
  double prev_piece = 0.0;
  int settled = 0;
  int growing = 0;
  for (int level = 0; level < 1000 && hi > std::numeric_limits<double>::min() * 4; ++level) {
    const double lo = 0.5 * hi;
    piece_tol.abs_tol = std::max(tol.abs_tol * 1e-3, 0.0);
    const Result piece = integrate(f, lo, hi, piece_tol);
    out.value += piece.value;
    out.abs_error += piece.abs_error;
    out.evaluations += piece.evaluations;
    hi = lo;

    if (level >= 2) {
      if (piece.value == 0.0 && prev_piece == 0.0) return out;
      const double observed = prev_piece != 0.0 ? piece.value / prev_piece : 0.0;
      if (!predicted && observed >= 1.0) {
        if (++growing > 40) throw QuadratureError("integrand is not integrable at r = 0 (panel sums do not decay)");
      } else {
        growing = 0;
      }
      const double ratio = predicted ? predicted_ratio : observed;
      if (ratio >= 0.0 && ratio < 1.0) {
        const double remainder = piece.value * ratio / (1.0 - ratio);
        const bool small = std::abs(remainder) <= 0.1 * std::max(tol.abs_tol, tol.rel_tol * std::abs(out.value));
        const bool asymptotic =
            predicted && prev_piece != 0.0 && std::abs(observed / predicted_ratio - 1.0) < 1e-9;
        settled = asymptotic ? settled + 1 : 0;
        if (small || settled >= 3) {
          out.value += remainder;
          out.abs_error += small ? std::abs(remainder) : std::abs(remainder) * 1e-8;
          return out;
        }
      }
    }
    prev_piece = piece.value;
  }
  throw QuadratureError("graded quadrature toward r = 0 did not converge");
}

/// Integral over [a, b] with 0 <= a < b on a radial variable; handles an
/// origin singularity (a == 0) and long ranges by geometric subdivision.
template <class F>
Result integrate_radial(F&& f, double a, double b, std::optional<double> origin_exponent = std::nullopt,
                        const Tolerance& tol = {}) {
  if (!(b > a) || a < 0.0) {
    if (a == b) return {};
    throw QuadratureError("integrate_radial needs 0 <= a < b");
  }
  Result out;
  auto accumulate = [&out](const Result& r) {
    out.value += r.value;
    out.abs_error += r.abs_error;
    out.evaluations += r.evaluations;
  };
  double start = a;
  if (a == 0.0) {
    const double head = std::min(b, 1.0);
    accumulate(integrate_from_origin(f, head, origin_exponent, tol));
    start = head;
  }
  Tolerance chunk_tol = tol;
  chunk_tol.abs_tol = tol.abs_tol * 0.1;
  while (start < b) {
    const double stop = std::min(b, start > 0.0 ? 2.0 * start : b);
    accumulate(integrate(f, start, stop, chunk_tol));
    start = stop;
  }
  return out;
}

}  // namespace leibenson::quad

#pragma once

// Discrete counterparts of the quantities in the extinction argument: the
// energy Phi = int u^(sigma+D) rho dmu, the gradient term int |grad u^(sigma/p)|^p dmu,
// the Caccioppoli balance, the Hoelder step, a Sobolev-constant probe and the
// comparison ODE dPsi/dt = -c Psi^(sigma/(sigma+D)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "leibenson/errors.hpp"
#include "leibenson/geometry.hpp"
#include "leibenson/params.hpp"

namespace leibenson {

using RadialField = std::vector<double>;

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> Phi;
  std::vector<double> grad_term;
  std::vector<double> sup_u;
  std::vector<double> mass;
  std::vector<double> outflow;  ///< cumulative mass lost through the outer boundary
  std::vector<double> clamped;  ///< cumulative mass injected by the positivity projection
  double sigma = 0.0;
  double D = 0.0;

  std::size_t size() const { return times.size(); }
};

inline void check_field(const RadialGrid& grid, const RadialField& u) {
  if (u.size() != grid.size()) {
    std::ostringstream os;
    os << "field has " << u.size() << " values for a grid of " << grid.size() << " cells";
    throw DomainError(os.str());
  }
}

inline double energy_Phi(const RadialGrid& grid, const RadialField& u, double sigma, double D) {
  check_field(grid, u);
  if (!grid.has_density()) throw DomainError("grid carries no density rho");
  const double power = sigma + D;
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > 0.0) sum += std::pow(u[i], power) * grid.cell_rho[i] * grid.cell_measure[i];
  }
  return sum;
}

/// rho-mu mass sum_i rho_i m_i u_i.
inline double discrete_mass(const RadialGrid& grid, const RadialField& u) {
  check_field(grid, u);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += grid.cell_rho[i] * grid.cell_measure[i] * u[i];
  return sum;
}

/// sum over interior faces of S_f h_f |(v_{i+1} - v_i)/h_f|^p, v = u^(sigma/p).
inline double grad_term(const RadialGrid& grid, const RadialField& u, double sigma, double p) {
  check_field(grid, u);
  const double a = sigma / p;
  double sum = 0.0;
  for (std::size_t f = 1; f < u.size(); ++f) {
    const double h = grid.face_spacing(f);
    const double dv = std::pow(u[f], a) - std::pow(u[f - 1], a);
    if (dv != 0.0) sum += grid.face_area[f] * h * std::pow(std::abs(dv) / h, p);
  }
  return sum;
}

namespace detail {

inline void require_window(const EnergyTrace& trace, double t1, double t2) {
  if (trace.size() < 2) throw RangeError("trace has fewer than 2 samples");
  if (!(t1 < t2)) throw RangeError("need t1 < t2");
  if (t1 < trace.times.front() || t2 > trace.times.back()) {
    std::ostringstream os;
    os << "[" << t1 << ", " << t2 << "] is not covered by the trace [" << trace.times.front() << ", "
       << trace.times.back() << "]";
    throw RangeError(os.str());
  }
}

inline double interpolate(const std::vector<double>& ts, const std::vector<double>& ys, double t) {
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  if (it == ts.begin()) return ys.front();
  if (it == ts.end()) return ys.back();
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
  return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}

}  // namespace detail

struct CaccioppoliResult {
  double lhs = 0.0;  ///< Phi(t2) - Phi(t1) + c1 int_t1^t2 grad_term
  double Phi_t1 = 0.0;
  double tol_ineq = 0.0;
  bool passed = false;
};

/// Discrete Caccioppoli balance on [t1, t2]: linear interpolation of the
/// recorded samples, trapezoidal rule in time.
inline CaccioppoliResult caccioppoli_check(const EnergyTrace& trace, double c1, double t1, double t2,
                                           double tol_ineq = 1e-2) {
  detail::require_window(trace, t1, t2);
  const auto& ts = trace.times;
  std::vector<double> knots{t1};
  for (double t : ts) {
    if (t > t1 && t < t2) knots.push_back(t);
  }
  knots.push_back(t2);
  double integral = 0.0;
  double prev = detail::interpolate(ts, trace.grad_term, t1);
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double cur = detail::interpolate(ts, trace.grad_term, knots[k]);
    integral += 0.5 * (prev + cur) * (knots[k] - knots[k - 1]);
    prev = cur;
  }
  CaccioppoliResult r;
  r.Phi_t1 = detail::interpolate(ts, trace.Phi, t1);
  r.lhs = detail::interpolate(ts, trace.Phi, t2) - r.Phi_t1 + c1 * integral;
  r.tol_ineq = tol_ineq;
  r.passed = r.lhs <= tol_ineq * r.Phi_t1;
  return r;
}

struct HoelderResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double norm = 0.0;  ///< discrete || rho/omega ||_{L^theta(omega dmu)}
  bool passed = false;
};

/// Discrete || rho/omega ||_{L^theta(omega dmu)} from the cell averages; theta = inf gives the max.
inline double discrete_density_norm(const RadialGrid& grid, double theta) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ratio = grid.cell_rho[i] / grid.cell_omega[i];
    if (std::isinf(theta)) {
      acc = std::max(acc, ratio);
    } else {
      acc += std::pow(ratio, theta) * grid.cell_omega[i] * grid.cell_measure[i];
    }
  }
  return std::isinf(theta) ? acc : std::pow(acc, 1.0 / theta);
}

/// Phi <= (int v^(p kappa) omega dmu)^((sigma+D)/(sigma kappa)) || rho/omega ||, v = u^(sigma/p).
/// theta must be the Hoelder conjugate of sigma kappa/(sigma+D); when that ratio is 1 the
/// sup form is used.
inline HoelderResult hoelder_step_check(const RadialGrid& grid, const RadialField& u, double sigma, double D,
                                        double theta, double kappa) {
  check_field(grid, u);
  const double ratio = sigma * kappa / (sigma + D);
  constexpr double eps = 1e-12;
  if (ratio < 1.0 - eps) throw DomainError("sigma kappa < sigma + D: no Hoelder pairing exists");
  const bool sup_form = std::abs(ratio - 1.0) <= eps;
  const double expected = sup_form ? kInf : ratio / (ratio - 1.0);
  if (sup_form != std::isinf(theta) || (!sup_form && std::abs(theta / expected - 1.0) > 1e-9)) {
    std::ostringstream os;
    os << "theta = " << theta << " is not conjugate to sigma kappa/(sigma+D) (expected " << expected << ")";
    throw DomainError(os.str());
  }
  HoelderResult r;
  r.lhs = energy_Phi(grid, u, sigma, D);
  double moment = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > 0.0) moment += std::pow(u[i], sigma * kappa) * grid.cell_omega[i] * grid.cell_measure[i];
  }
  r.norm = discrete_density_norm(grid, theta);
  r.rhs = std::pow(moment, 1.0 / ratio) * r.norm;
  r.passed = r.lhs <= r.rhs * (1.0 + 1e-8);
  return r;
}

/// Bump (1 - (r/R)^2)_+^k.
struct BumpProfile {
  double R = 1.0;
  int k = 1;
  double operator()(double r) const {
    const double s = 1.0 - (r / R) * (r / R);
    return s > 0.0 ? std::pow(s, k) : 0.0;
  }
};

inline std::vector<BumpProfile> default_bump_family(double R_max) {
  std::vector<BumpProfile> family;
  for (int j = 1; j <= 5; ++j) {
    for (int k = 1; k <= 4; ++k) family.push_back({R_max * std::pow(2.0, -j), k});
  }
  return family;
}

/// (sum v^(p kappa) omega m)^(1/kappa) / sum_f S_f h_f |dv/h_f|^p for one cell field v.
inline double sobolev_ratio(const RadialGrid& grid, const RadialField& v, double p, double kappa) {
  check_field(grid, v);
  double lhs = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    lhs += std::pow(std::abs(v[i]), p * kappa) * grid.cell_omega[i] * grid.cell_measure[i];
  }
  double rhs = 0.0;
  for (std::size_t f = 1; f < v.size(); ++f) {
    const double h = grid.face_spacing(f);
    rhs += grid.face_area[f] * h * std::pow(std::abs(v[f] - v[f - 1]) / h, p);
  }
  if (!(rhs > 0.0)) throw DegenerateError("test profile has zero gradient term");
  return std::pow(lhs, 1.0 / kappa) / rhs;
}

struct SobolevProbeResult {
  double C_lower = 0.0;
  BumpProfile best;
  std::size_t evaluated = 0;
};

/// Largest Sobolev quotient over the family: a lower bound for the constant C.
inline SobolevProbeResult sobolev_probe(const RadialGrid& grid, double p, double kappa,
                                        const std::vector<BumpProfile>& family) {
  if (family.empty()) throw DegenerateError("empty test family");
  SobolevProbeResult out;
  RadialField v(grid.size());
  for (const auto& bump : family) {
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = bump(grid.centers[i]);
    const double q = sobolev_ratio(grid, v, p, kappa);
    if (q > out.C_lower) {
      out.C_lower = q;
      out.best = bump;
    }
    ++out.evaluated;
  }
  return out;
}

/// Psi(t) = (Phi0^(D/(sigma+D)) - D/(sigma+D) c t)_+^((sigma+D)/D).
inline double comparison_Psi(double Phi0, double c, double sigma, double D, double t) {
  const double s = sigma + D;
  const double y = std::pow(Phi0, D / s) - D / s * c * t;
  return y > 0.0 ? std::pow(y, s / D) : 0.0;
}

struct OdeVerdict {
  double c = 0.0;
  double worst_ratio = 0.0;  ///< max Phi(t_i) / Psi(t_i) over samples with Psi > 0
  bool passed = false;
};

inline void require_samples(const EnergyTrace& trace) {
  if (trace.size() < 3) throw RangeError("ode comparison needs at least 3 trace samples");
}

/// Checks Phi(t_i) <= Psi(t_i) (1 + 1e-6) with Psi started from the first sample.
inline OdeVerdict ode_verify(const EnergyTrace& trace, double c) {
  require_samples(trace);
  if (!(c > 0.0)) throw DomainError("comparison constant c must be > 0");
  OdeVerdict v;
  v.c = c;
  v.passed = true;
  const double t0 = trace.times.front();
  const double Phi0 = trace.Phi.front();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double psi = comparison_Psi(Phi0, c, trace.sigma, trace.D, trace.times[i] - t0);
    const double phi = trace.Phi[i];
    if (psi > 0.0) v.worst_ratio = std::max(v.worst_ratio, phi / psi);
    if (phi > psi * (1.0 + 1e-6) + std::numeric_limits<double>::min()) v.passed = false;
  }
  return v;
}

/// Largest c with d/dt Phi^(D/(sigma+D)) <= -D/(sigma+D) c between every pair of consecutive samples.
inline double ode_fit(const EnergyTrace& trace) {
  require_samples(trace);
  const double s = trace.sigma + trace.D;
  const double e = trace.D / s;
  double c = kInf;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace.Phi[i - 1] <= 0.0) break;
    const double dy = std::pow(trace.Phi[i], e) - std::pow(trace.Phi[i - 1], e);
    const double dt = trace.times[i] - trace.times[i - 1];
    c = std::min(c, -dy / (dt * e));
  }
  if (std::isinf(c)) throw RangeError("trace starts at zero energy");
  return c;
}

}  // namespace leibenson

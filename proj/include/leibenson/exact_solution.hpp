#pragma once

// Self-similar solution on R^n with rho = |x|^-l:
//   u = (T-t)^((n-l)/kappa_l) [C + K |x|^((p-l)/(p-1)) (T-t)^((p-l)/((p-1) kappa_l))]^(-(p-1)/D),
//   K = kappa_l^(-1/(p-1)) D / ((p-l) q),
// extended by zero for t >= T.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "leibenson/errors.hpp"
#include "leibenson/geometry.hpp"
#include "leibenson/params.hpp"
#include "leibenson/quadrature.hpp"

namespace leibenson {

class BarenblattProfile {
 public:
  BarenblattProfile(int n, double p, double q, double l, double C = 1.0, double T = 1.0)
      : n_(n), p_(p), q_(q), l_(l), C_(C), T_(T) {
    Exponents e;
    e.n = n;
    e.p = p;
    e.q = q;
    e.validate();
    D_ = e.D();
    l_star_ = leibenson::l_star(e);
    if (!(l > l_star_ && l < p)) {
      std::ostringstream os;
      os << "l = " << l << " lies outside (l*, p) = (" << l_star_ << ", " << p << ")";
      throw DomainError(os.str());
    }
    if (!(C > 0.0)) throw DomainError("profile constant C must be > 0");
    if (!(T > 0.0)) throw DomainError("extinction time T must be > 0");
    kappa_l_ = (1.0 - D_) * (l - l_star_);
    K_ = std::pow(kappa_l_, -1.0 / (p - 1.0)) * D_ / ((p - l) * q);
  }

  int n() const { return n_; }
  double p() const { return p_; }
  double q() const { return q_; }
  double l() const { return l_; }
  double C() const { return C_; }
  double T() const { return T_; }
  double D() const { return D_; }
  double l_star() const { return l_star_; }
  double kappa_l() const { return kappa_l_; }
  double bracket_coefficient() const { return K_; }

  double time_exponent() const { return (n_ - l_) / kappa_l_; }
  double radial_exponent() const { return (p_ - l_) / (p_ - 1.0); }
  double bracket_time_exponent() const { return radial_exponent() / kappa_l_; }
  double outer_exponent() const { return -(p_ - 1.0) / D_; }
  /// u ~ r^far_field_exponent as r -> inf for t < T.
  double far_field_exponent() const { return radial_exponent() * outer_exponent(); }

  /// The self-similar variable r^gamma (T-t)^beta the bracket depends on.
  double similarity_variable(double r, double t) const {
    return std::pow(r, radial_exponent()) * std::pow(T_ - t, bracket_time_exponent());
  }

  double eval(double r, double t) const {
    if (t >= T_) return 0.0;
    const double tau = T_ - t;
    const double bracket = C_ + K_ * std::pow(r, radial_exponent()) * std::pow(tau, bracket_time_exponent());
    return std::pow(tau, time_exponent()) * std::pow(bracket, outer_exponent());
  }

  double operator()(double r, double t) const { return eval(r, t); }

 private:
  int n_;
  double p_, q_, l_, C_, T_;
  double D_ = 0.0, l_star_ = 0.0, kappa_l_ = 0.0, K_ = 0.0;
};

/// rho(r) du/dt - r^(1-n) d/dr (r^(n-1) |d(u^q)/dr|^(p-2) d(u^q)/dr) by centred differences.
/// The time derivative is taken from `time_profile` and the flux from `space_profile`,
/// so that a perturbed pair can serve as a negative control.
inline double pde_residual(const BarenblattProfile& time_profile, const BarenblattProfile& space_profile,
                           double r, double t, double h_r, double h_t) {
  if (!(h_r > 0.0 && h_t > 0.0)) throw DomainError("difference steps must be > 0");
  if (!(r - h_r > 0.0)) throw DomainError("radial stencil reaches r = 0");
  const double T = std::min(time_profile.T(), space_profile.T());
  if (t - h_t >= std::max(time_profile.T(), space_profile.T())) return 0.0;
  if (t + h_t >= T) throw DomainError("time stencil straddles the extinction time");

  const BarenblattProfile& s = space_profile;
  const double n = s.n(), p = s.p(), q = s.q();
  auto w = [&](double x) { return std::pow(s.eval(x, t), q); };
  auto flux = [&](double x) {
    const double g = (w(x + 0.5 * h_r) - w(x - 0.5 * h_r)) / h_r;
    const double mag = g == 0.0 ? 0.0 : std::pow(std::abs(g), p - 2.0) * g;
    return std::pow(x, n - 1.0) * mag;
  };
  const double divergence = std::pow(r, 1.0 - n) * (flux(r + 0.5 * h_r) - flux(r - 0.5 * h_r)) / h_r;
  const double dudt = (time_profile.eval(r, t + h_t) - time_profile.eval(r, t - h_t)) / (2.0 * h_t);
  return std::pow(r, -time_profile.l()) * dudt - divergence;
}

inline double pde_residual(const BarenblattProfile& prof, double r, double t, double h_r, double h_t) {
  return pde_residual(prof, prof, r, t, h_r, h_t);
}

struct ResidualPoint {
  double r = 0.0;
  double t = 0.0;
  std::vector<double> residuals;  ///< one per step size, steps halving
  double order = 0.0;             ///< min over consecutive pairs of log2(|R(h)| / |R(h/2)|)
  bool zero_region = false;       ///< whole stencil at or past T
  bool straddles = false;         ///< stencil crosses T; not evaluated
};

struct ResidualStudy {
  std::vector<double> steps;
  std::vector<ResidualPoint> points;
  std::size_t evaluated = 0;
  std::size_t passing = 0;

  double pass_fraction() const {
    return evaluated == 0 ? 1.0 : static_cast<double>(passing) / static_cast<double>(evaluated);
  }
};

/// Residual convergence over a lattice with h_r = h_t = h for each h in `steps`.
inline ResidualStudy residual_convergence(const BarenblattProfile& prof, const std::vector<double>& r_values,
                                          const std::vector<double>& t_values, const std::vector<double>& steps,
                                          double min_order = 1.0) {
  if (steps.size() < 2) throw DomainError("a convergence study needs at least two step sizes");
  ResidualStudy study;
  study.steps = steps;
  for (double t : t_values) {
    for (double r : r_values) {
      ResidualPoint pt;
      pt.r = r;
      pt.t = t;
      const double h_max = *std::max_element(steps.begin(), steps.end());
      if (t - h_max >= prof.T()) {
        pt.zero_region = true;
        study.points.push_back(pt);
        continue;
      }
      try {
        for (double h : steps) pt.residuals.push_back(pde_residual(prof, r, t, h, h));
      } catch (const DomainError&) {
        pt.straddles = true;
        pt.residuals.clear();
        study.points.push_back(pt);
        continue;
      }
      pt.order = kInf;
      for (std::size_t k = 1; k < pt.residuals.size(); ++k) {
        const double a = std::abs(pt.residuals[k - 1]), b = std::abs(pt.residuals[k]);
        const double ratio = std::log2(a / b) / std::log2(steps[k - 1] / steps[k]);
        pt.order = std::min(pt.order, b == 0.0 ? kInf : ratio);
      }
      ++study.evaluated;
      if (pt.order >= min_order) ++study.passing;
      study.points.push_back(pt);
    }
  }
  return study;
}

inline std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

struct ExactEnergy {
  double value = 0.0;
  double tail_exponent = 0.0;  ///< integrand ~ r^tail_exponent at infinity
  double tail_bound = 0.0;     ///< upper bound for the part beyond R_max
};

/// Phi(t) = int_0^R_max u^(sigma+D) r^-l nu_{n-1} r^(n-1) dr, with a certified bound on the tail.
inline ExactEnergy energy_Phi_exact(const BarenblattProfile& prof, double sigma, double t, double R_max) {
  if (!(R_max > 0.0)) throw DomainError("R_max must be > 0");
  const double power = sigma + prof.D();
  const double n = prof.n(), l = prof.l();
  ExactEnergy out;
  out.tail_exponent = power * prof.far_field_exponent() - l + n - 1.0;
  if (!(out.tail_exponent < -1.0)) {
    std::ostringstream os;
    os << "u^" << power << " rho is not integrable: integrand ~ r^" << out.tail_exponent << " at infinity";
    throw DivergenceError(os.str());
  }
  if (t >= prof.T()) return out;

  const double nu = unit_sphere_measure(prof.n());
  auto integrand = [&](double r) { return std::pow(prof.eval(r, t), power) * std::pow(r, n - 1.0 - l) * nu; };
  quad::Tolerance tol;
  tol.abs_tol = 0.0;
  tol.rel_tol = 1e-11;
  out.value = quad::integrate_radial(integrand, 0.0, R_max, n - 1.0 - l, tol).value;

  // u <= tau^a (K r^gamma tau^b)^(-(p-1)/D) bounds the integrand by a pure power.
  const double tau = prof.T() - t;
  const double scale = std::pow(tau, prof.time_exponent()) *
                       std::pow(prof.bracket_coefficient() * std::pow(tau, prof.bracket_time_exponent()),
                                prof.outer_exponent());
  const double e = out.tail_exponent;
  out.tail_bound = nu * std::pow(scale, power) * std::pow(R_max, e + 1.0) / (-e - 1.0);
  return out;
}

/// rho-mu weighted cell averages of the profile at time t on `grid`.
inline std::vector<double> cell_averages(const BarenblattProfile& prof, const WeightedModel& model,
                                         const RadialGrid& grid, double t) {
  std::vector<double> u(grid.size(), 0.0);
  if (t >= prof.T()) return u;
  const Density& rho = model.density();
  const double origin = model.area_exponent_origin() + rho.origin_exponent();
  quad::Tolerance tol;
  tol.abs_tol = 0.0;
  tol.rel_tol = 1e-11;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto weight = [&](double r) { return rho(r) * model.area(r); };
    auto moment = [&](double r) { return prof.eval(r, t) * rho(r) * model.area(r); };
    double num, den;
    if (i == 0) {
      num = quad::integrate_from_origin(moment, grid.faces[1], origin, tol).value;
      den = quad::integrate_from_origin(weight, grid.faces[1], origin, tol).value;
    } else {
      num = quad::integrate(moment, grid.faces[i], grid.faces[i + 1], tol).value;
      den = quad::integrate(weight, grid.faces[i], grid.faces[i + 1], tol).value;
    }
    u[i] = num / den;
  }
  return u;
}

}  // namespace leibenson

#pragma once

// Radially symmetric weighted models (M, mu) described by their area function
// S_mu(r), a Sobolev weight omega(r) and a density rho(r), all in the
// Riemannian polar radius r. dmu = S_mu(r) dr dnu.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "leibenson/errors.hpp"
#include "leibenson/params.hpp"
#include "leibenson/quadrature.hpp"

namespace leibenson {

/// Measure of the unit sphere S^{n-1}.
inline double unit_sphere_measure(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Radial density rho(r). `cored_power` is (core^2 + r^2)^(-l/2): bounded at the
/// origin and ~ r^-l at infinity.
struct Density {
  enum class Kind { zero, constant, power, cored_power };

  Kind kind = Kind::constant;
  double l = 0.0;
  double scale = 1.0;
  double core = 1.0;

  static Density zero() { return {Kind::zero, 0.0, 0.0, 1.0}; }
  static Density constant(double value = 1.0) { return {Kind::constant, 0.0, value, 1.0}; }
  static Density power(double l) {
    if (!(l >= 0.0)) throw DomainError("density exponent l must be >= 0");
    return {Kind::power, l, 1.0, 1.0};
  }
  static Density cored_power(double l, double core = 1.0) {
    if (!(l >= 0.0)) throw DomainError("density exponent l must be >= 0");
    if (!(core > 0.0)) throw DomainError("density core radius must be > 0");
    return {Kind::cored_power, l, 1.0, core};
  }

  bool is_zero() const { return kind == Kind::zero || scale == 0.0; }

  double operator()(double r) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::constant: return scale;
      case Kind::power: return scale * std::pow(r, -l);
      case Kind::cored_power: return scale * std::pow(core * core + r * r, -0.5 * l);
    }
    return 0.0;
  }

  double origin_exponent() const { return kind == Kind::power ? -l : 0.0; }
  double tail_exponent() const {
    return (kind == Kind::power || kind == Kind::cored_power) ? -l : 0.0;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::zero: os << "rho = 0"; break;
      case Kind::constant: os << "rho = " << scale; break;
      case Kind::power: os << "rho = r^-" << l; break;
      case Kind::cored_power: os << "rho = (" << core << "^2 + r^2)^(-" << l << "/2)"; break;
    }
    return os.str();
  }
};

enum class Family { euclidean, conformal, ch_polynomial, ricci_polynomial };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::euclidean: return "euclidean";
    case Family::conformal: return "conformal";
    case Family::ch_polynomial: return "ch_polynomial";
    case Family::ricci_polynomial: return "ricci_polynomial";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "euclidean") return Family::euclidean;
  if (s == "conformal") return Family::conformal;
  if (s == "ch_polynomial") return Family::ch_polynomial;
  if (s == "ricci_polynomial") return Family::ricci_polynomial;
  throw DomainError("unknown model family '" + std::string(s) + "'");
}

struct ModelParams {
  int n = 3;
  double p = 2.0;
  double l = 0.0;      ///< conformal exponent, a(R) ~ c R^-l
  double c = 1.0;      ///< conformal constant
  double alpha = 0.0;  ///< volume growth exponent, V(r) = r^alpha
  double R0 = 1.0;     ///< conformal smoothing radius (Euclidean coordinate)
};

class WeightedModel {
 public:
  static WeightedModel euclidean(int n, double p) {
    WeightedModel m(Family::euclidean, n, p);
    m.sphere_ = unit_sphere_measure(n);
    return m;
  }

  /// g = a(R) g_eucl, dmu = a^(p/2) dx with a(R) = c R^-l for R >= R0. Inside R0
  /// the factor is c R0^-l phi(R/R0)^2 with phi an even quartic fixed by C^1
  /// matching at R0 and by int_0^1 phi = 1/(1 - l/2), which makes
  /// r(R) = sqrt(c) R^(1-l/2) / (1-l/2) exact for every R >= R0.
  static WeightedModel conformal(int n, double p, double l, double c, double R0 = 1.0) {
    WeightedModel m(Family::conformal, n, p);
    if (!(l >= 0.0 && l < 2.0)) throw DomainError("conformal exponent l must lie in [0, 2)");
    if (!(c > 0.0)) throw DomainError("conformal constant c must be > 0");
    if (!(R0 > 0.0)) throw DomainError("smoothing radius R0 must be > 0");
    m.params_.l = l;
    m.params_.c = c;
    m.params_.R0 = R0;
    m.sphere_ = unit_sphere_measure(n);
    const double s = 0.5 * l;
    m.cap_c_ = 5.0 * s * (2.0 + s) / (8.0 * (1.0 - s));
    m.cap_b_ = -0.5 * s - 2.0 * m.cap_c_;
    m.cap_a_ = 1.0 + 0.5 * s + m.cap_c_;
    return m;
  }

  static WeightedModel ch_polynomial(int n, double p, double alpha) {
    WeightedModel m(Family::ch_polynomial, n, p);
    if (!(alpha > 0.0)) throw DomainError("volume exponent alpha must be > 0");
    m.params_.alpha = alpha;
    return m;
  }

  static WeightedModel ricci_polynomial(int n, double p, double alpha) {
    WeightedModel m(Family::ricci_polynomial, n, p);
    if (!(alpha > 2.0)) throw DomainError("reverse volume doubling needs alpha > 2");
    m.params_.alpha = alpha;
    return m;
  }

  WeightedModel with_density(Density rho) const {
    WeightedModel m = *this;
    m.density_ = rho;
    return m;
  }

  Family family() const { return family_; }
  std::string_view name() const { return to_string(family_); }
  const ModelParams& params() const { return params_; }
  double kappa() const { return kappa_; }

  bool has_density() const { return density_.has_value(); }
  const Density& density() const {
    if (!density_) throw DomainError("density rho has not been set on this model");
    return *density_;
  }
  double rho(double r) const { return density()(r); }

  /// Area function S_mu(r).
  double area(double r) const {
    const int n = params_.n;
    switch (family_) {
      case Family::euclidean: return sphere_ * std::pow(r, n - 1);
      case Family::conformal: {
        const double R = euclidean_radius(r);
        return sphere_ * std::pow(conformal_factor(R), 0.5 * (params_.p - 1.0)) * std::pow(R, n - 1);
      }
      case Family::ch_polynomial:
      case Family::ricci_polynomial: return params_.alpha * std::pow(r, params_.alpha - 1.0);
    }
    return 0.0;
  }

  /// Sobolev weight omega(r).
  double omega(double r) const {
    switch (family_) {
      case Family::euclidean:
      case Family::ch_polynomial: return 1.0;
      case Family::conformal: return std::pow(conformal_factor(euclidean_radius(r)), -0.5 * params_.p);
      case Family::ricci_polynomial: return std::pow(r, ricci_omega_exponent());
    }
    return 1.0;
  }

  /// mu(B_r) = int_0^r S_mu.
  double volume(double r) const {
    switch (family_) {
      case Family::euclidean: return sphere_ * std::pow(r, params_.n) / params_.n;
      case Family::ch_polynomial:
      case Family::ricci_polynomial: return std::pow(r, params_.alpha);
      case Family::conformal: break;
    }
    if (r <= 0.0) return 0.0;
    return quad::integrate_radial([this](double x) { return area(x); }, 0.0, r, area_exponent_origin())
        .value;
  }

  double area_exponent_origin() const {
    if (family_ == Family::ch_polynomial || family_ == Family::ricci_polynomial) return params_.alpha - 1.0;
    return params_.n - 1.0;
  }
  double area_exponent_infinity() const {
    const double n = params_.n, p = params_.p, l = params_.l;
    switch (family_) {
      case Family::euclidean: return n - 1.0;
      case Family::conformal: return l * (n - p) / (2.0 - l) + n - 1.0;
      case Family::ch_polynomial:
      case Family::ricci_polynomial: return params_.alpha - 1.0;
    }
    return 0.0;
  }
  double omega_exponent_origin() const {
    return family_ == Family::ricci_polynomial ? ricci_omega_exponent() : 0.0;
  }
  double omega_exponent_infinity() const {
    switch (family_) {
      case Family::conformal: return params_.p * params_.l / (2.0 - params_.l);
      case Family::ricci_polynomial: return ricci_omega_exponent();
      default: return 0.0;
    }
  }

  // ---- conformal geometry; the identity map for the other families ----

  /// a(R).
  double conformal_factor(double R) const {
    if (family_ != Family::conformal) return 1.0;
    const double R0 = params_.R0;
    if (R >= R0) return params_.c * std::pow(R, -params_.l);
    const double x = R / R0;
    const double phi = cap_a_ + x * x * (cap_b_ + cap_c_ * x * x);
    return params_.c * std::pow(R0, -params_.l) * phi * phi;
  }

  /// Riemannian radius r(R) = int_0^R sqrt(a).
  double radius_of(double R) const {
    if (family_ != Family::conformal) return R;
    const double s = 0.5 * params_.l;
    const double R0 = params_.R0;
    const double sqc = std::sqrt(params_.c);
    if (R >= R0) return sqc * std::pow(R, 1.0 - s) / (1.0 - s);
    const double x = R / R0;
    const double x2 = x * x;
    const double primitive = x * (cap_a_ + x2 * (cap_b_ / 3.0 + cap_c_ * x2 / 5.0));
    return sqc * std::pow(R0, 1.0 - s) * primitive;
  }

  /// Inverse of radius_of: closed form beyond the smoothing radius, bisection inside.
  double euclidean_radius(double r) const {
    if (family_ != Family::conformal) return r;
    if (r <= 0.0) return 0.0;
    const double s = 0.5 * params_.l;
    if (r >= smoothing_radius()) return std::pow((1.0 - s) * r / std::sqrt(params_.c), 1.0 / (1.0 - s));
    double lo = 0.0, hi = params_.R0;
    while (hi - lo > 1e-13 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (radius_of(mid) < r) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  /// Riemannian radius beyond which the conformal factor is exactly c R^-l.
  double smoothing_radius() const {
    if (family_ != Family::conformal) return 0.0;
    const double s = 0.5 * params_.l;
    return std::sqrt(params_.c) * std::pow(params_.R0, 1.0 - s) / (1.0 - s);
  }

 private:
  WeightedModel(Family f, int n, double p) : family_(f) {
    if (n < 2) throw DomainError("dimension n must be >= 2");
    if (!(p > 1.0)) throw DomainError("p must be > 1");
    params_.n = n;
    params_.p = p;
    kappa_ = sobolev_kappa(n, p);
  }

  double ricci_omega_exponent() const {
    return params_.alpha * (kappa_ - 1.0) - kappa_ * params_.p;
  }

  Family family_;
  ModelParams params_;
  double kappa_ = 0.0;
  double sphere_ = 1.0;
  double cap_a_ = 1.0, cap_b_ = 0.0, cap_c_ = 0.0;
  std::optional<Density> density_;
};

inline WeightedModel build_euclidean(int n, double p) { return WeightedModel::euclidean(n, p); }
inline WeightedModel build_conformal(int n, double p, double l, double c, double R0 = 1.0) {
  return WeightedModel::conformal(n, p, l, c, R0);
}
inline WeightedModel build_ch_polynomial(int n, double p, double alpha) {
  return WeightedModel::ch_polynomial(n, p, alpha);
}
inline WeightedModel build_ricci_polynomial(int n, double p, double alpha) {
  return WeightedModel::ricci_polynomial(n, p, alpha);
}

/// Cell-centred radial grid on [0, R_max] with faces R_max (j/N)^grading.
/// Cell data are mu-averages: cell_measure = int S_mu, cell_rho = int rho S_mu / cell_measure,
/// cell_omega = int omega S_mu / cell_measure.
struct RadialGrid {
  double R_max = 0.0;
  double grading = 1.0;
  std::vector<double> faces;
  std::vector<double> centers;
  std::vector<double> widths;
  std::vector<double> face_area;
  std::vector<double> cell_measure;
  std::vector<double> cell_rho;  ///< empty when the model carries no density
  std::vector<double> cell_omega;

  std::size_t size() const { return centers.size(); }

  /// Distance between the centres on either side of face f (1 <= f <= N). The
  /// outer face uses a ghost cell mirrored at distance width/2 beyond R_max.
  double face_spacing(std::size_t f) const {
    if (f >= size()) return widths.back();
    return centers[f] - centers[f - 1];
  }

  bool has_density() const { return !cell_rho.empty(); }
};

inline RadialGrid make_grid(const WeightedModel& model, double R_max, std::size_t cells, double grading = 1.0) {
  if (!(R_max > 0.0)) throw DomainError("R_max must be > 0");
  if (cells < 3) throw DomainError("a radial grid needs at least 3 cells");
  if (!(grading >= 1.0)) throw DomainError("grid grading exponent must be >= 1");

  RadialGrid g;
  g.R_max = R_max;
  g.grading = grading;
  const std::size_t N = cells;
  g.faces.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    g.faces[j] = R_max * std::pow(static_cast<double>(j) / static_cast<double>(N), grading);
  }
  g.faces[N] = R_max;
  g.centers.resize(N);
  g.widths.resize(N);
  g.face_area.resize(N + 1);
  g.cell_measure.resize(N);
  g.cell_omega.resize(N);
  const bool with_rho = model.has_density();
  if (with_rho) g.cell_rho.resize(N);

  for (std::size_t j = 0; j <= N; ++j) g.face_area[j] = j == 0 ? 0.0 : model.area(g.faces[j]);

  const double s0 = model.area_exponent_origin();
  const double w0 = model.omega_exponent_origin();
  quad::Tolerance tol;
  tol.abs_tol = 0.0;
  tol.rel_tol = 1e-12;
  auto cell_integral = [&](auto&& f, std::size_t i, double origin_exponent) {
    if (i == 0) return quad::integrate_from_origin(f, g.faces[1], origin_exponent, tol).value;
    return quad::integrate(f, g.faces[i], g.faces[i + 1], tol).value;
  };

  for (std::size_t i = 0; i < N; ++i) {
    g.centers[i] = 0.5 * (g.faces[i] + g.faces[i + 1]);
    g.widths[i] = g.faces[i + 1] - g.faces[i];
    const double m = cell_integral([&](double r) { return model.area(r); }, i, s0);
    if (!(m > 0.0)) throw DomainError("non-positive cell measure");
    g.cell_measure[i] = m;
    g.cell_omega[i] = cell_integral([&](double r) { return model.omega(r) * model.area(r); }, i, s0 + w0) / m;
    if (with_rho) {
      const Density& rho = model.density();
      if (rho.is_zero()) {
        g.cell_rho[i] = 0.0;
      } else {
        g.cell_rho[i] =
            cell_integral([&](double r) { return rho(r) * model.area(r); }, i, s0 + rho.origin_exponent()) / m;
      }
    }
  }
  return g;
}

struct FinitenessReport {
  double theta = 0.0;
  double R_probe = 0.0;
  double integral = 0.0;        ///< int_0^R (rho/omega)^theta omega S_mu dr, or sup rho/omega for theta = inf
  double norm = 0.0;            ///< integral^(1/theta), or the sup
  double tail_exponent = 0.0;   ///< integrand ~ r^e at infinity (of rho/omega when theta = inf)
  double origin_exponent = 0.0;
  bool finite = false;
};

/// Weighted finiteness quantity || rho / omega ||_{L^theta(omega dmu)} truncated at R_probe,
/// with the analytic tail exponent deciding the verdict on all of M.
inline FinitenessReport finiteness_norm(const WeightedModel& m, double theta, double R_probe) {
  if (!(theta > 1.0)) throw DomainError("theta must be > 1 (or infinite)");
  if (!(R_probe > 0.0)) throw DomainError("R_probe must be > 0");
  const Density& rho = m.density();
  FinitenessReport rep;
  rep.theta = theta;
  rep.R_probe = R_probe;

  const double rho0 = rho.origin_exponent(), rho_inf = rho.tail_exponent();
  const double w0 = m.omega_exponent_origin(), w_inf = m.omega_exponent_infinity();
  const double s0 = m.area_exponent_origin(), s_inf = m.area_exponent_infinity();

  if (std::isinf(theta)) {
    rep.tail_exponent = rho_inf - w_inf;
    rep.origin_exponent = rho0 - w0;
    if (rho.is_zero()) {
      rep.finite = true;
      return rep;
    }
    if (rep.origin_exponent < 0.0) {
      rep.integral = rep.norm = kInf;
      rep.finite = false;
      return rep;
    }
    double sup = 0.0;
    constexpr int samples = 4000;
    const double lo = R_probe * 1e-8;
    for (int k = 0; k <= samples; ++k) {
      const double r = lo * std::pow(R_probe / lo, static_cast<double>(k) / samples);
      sup = std::max(sup, rho(r) / m.omega(r));
    }
    rep.integral = rep.norm = sup;
    rep.finite = rep.tail_exponent <= 0.0;
    return rep;
  }

  rep.tail_exponent = theta * (rho_inf - w_inf) + w_inf + s_inf;
  rep.origin_exponent = theta * (rho0 - w0) + w0 + s0;
  if (rho.is_zero()) {
    rep.finite = true;
    return rep;
  }
  if (!(rep.origin_exponent > -1.0)) {
    std::ostringstream os;
    os << "(rho/omega)^theta omega S_mu ~ r^" << rep.origin_exponent << " is not integrable at r = 0";
    throw QuadratureError(os.str());
  }
  auto integrand = [&](double r) {
    const double w = m.omega(r);
    return std::pow(rho(r) / w, theta) * w * m.area(r);
  };
  quad::Tolerance tol;
  tol.abs_tol = 1e-10;
  tol.rel_tol = 1e-10;
  rep.integral = quad::integrate_radial(integrand, 0.0, R_probe, rep.origin_exponent, tol).value;
  rep.norm = std::pow(rep.integral, 1.0 / theta);
  rep.finite = rep.tail_exponent < -1.0;
  return rep;
}

/// Log-log slope of the finiteness integrand (of rho/omega when theta = inf) between r1 and r2.
inline double fitted_tail_slope(const WeightedModel& m, double theta, double r1, double r2) {
  auto f = [&](double r) {
    const double w = m.omega(r);
    if (std::isinf(theta)) return m.rho(r) / w;
    return std::pow(m.rho(r) / w, theta) * w * m.area(r);
  };
  return std::log(f(r2) / f(r1)) / std::log(r2 / r1);
}

}  // namespace leibenson

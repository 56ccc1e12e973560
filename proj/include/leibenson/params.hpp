#pragma once

// Exponent algebra of the weighted Leibenson equation rho * du/dt = Delta_p(u^q):
// fast-diffusion defect D, Sobolev exponent, the admissible energy exponent
// sigma, the Hoelder index theta and the admissible ranges of the density
// exponent l for each geometric regime.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "leibenson/errors.hpp"
#include "leibenson/interval.hpp"

namespace leibenson {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// The tuple (n, p, q, zeta, sigma). sigma is optional and defaults to sigma_min.
struct Exponents {
  int n = 3;
  double p = 2.0;
  double q = 0.5;
  double zeta = 2.0;
  std::optional<double> sigma;

  double D() const { return 1.0 - q * (p - 1.0); }

  void validate() const {
    if (n < 2) throw DomainError("dimension n must be >= 2");
    if (!(p > 1.0)) throw DomainError("p must be > 1");
    if (!(q > 0.0)) throw DomainError("q must be > 0");
    if (!(zeta > 1.0)) throw DomainError("zeta must be > 1");
    if (!(D() > 0.0)) {
      std::ostringstream os;
      os << "fast-diffusion condition violated: D = 1 - q(p-1) = " << D() << " <= 0";
      throw DomainError(os.str());
    }
    if (!(static_cast<double>(n) > p)) throw DomainError("n > p required for kappa = n/(n-p)");
  }
};

struct DerivedConstants {
  double D = 0.0;
  double kappa = 0.0;
  double sigma_min = 0.0;
  double sigma = 0.0;  ///< the sigma theta and c1 were evaluated at
  double theta = 0.0;
  double theta_max = 0.0;
  double theta_opt = 0.0;
  bool theta_opt_conjectural = true;  ///< always set; theta_opt is not a proven bound
  double l_star = 0.0;
  std::optional<double> kappa_l;  ///< only when l was supplied
  double c1 = 0.0;
};

inline double sobolev_kappa(int n, double p) {
  if (!(static_cast<double>(n) > p)) throw DomainError("n > p required for kappa = n/(n-p)");
  return static_cast<double>(n) / (static_cast<double>(n) - p);
}

/// theta(sigma) = kappa / (kappa - 1 - D/sigma); +inf once sigma (kappa-1) <= D.
inline double theta_for_sigma(double kappa, double D, double sigma) {
  const double lhs = sigma * (kappa - 1.0);
  if (lhs <= D * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) return kInf;
  return kappa / ((kappa - 1.0) - D / sigma);
}

inline double sigma_min(const Exponents& e, double kappa) {
  const double D = e.D();
  return std::max({e.p, e.p * e.q, e.zeta - D, D / (kappa - 1.0)});
}

inline double caccioppoli_c1(double sigma, double D, double p, double q) {
  return (sigma + D) * (sigma + D - 1.0) * std::pow(2.0, -p) * std::pow(q, p - 1.0) *
         std::pow(sigma, -p) * std::pow(p, p);
}

inline double l_star(const Exponents& e) {
  const double D = e.D();
  return (e.p - e.n * D) / (1.0 - D);
}

inline DerivedConstants derive(const Exponents& e, std::optional<double> l = std::nullopt) {
  e.validate();
  DerivedConstants out;
  out.D = e.D();
  out.kappa = sobolev_kappa(e.n, e.p);
  const double D = out.D;
  const double kappa = out.kappa;

  const double sobolev_term = D / (kappa - 1.0);
  const double caccioppoli_term = std::max({e.p, e.p * e.q, e.zeta - D});
  out.sigma_min = std::max(caccioppoli_term, sobolev_term);
  // theta_max is infinite exactly when the Sobolev term attains the maximum.
  out.theta_max = sobolev_term >= caccioppoli_term ? kInf : theta_for_sigma(kappa, D, out.sigma_min);

  out.sigma = e.sigma.value_or(out.sigma_min);
  if (out.sigma < out.sigma_min) {
    std::ostringstream os;
    os << "sigma = " << out.sigma << " is below sigma_min = " << out.sigma_min;
    throw DomainError(os.str());
  }
  out.theta = out.sigma == out.sigma_min ? out.theta_max : theta_for_sigma(kappa, D, out.sigma);

  out.theta_opt = kappa >= 1.0 / (1.0 - D) ? kappa / (kappa - 1.0 - D / (e.zeta - D)) : kInf;
  out.theta_opt_conjectural = true;

  out.l_star = l_star(e);
  if (l) out.kappa_l = (1.0 - D) * (*l - out.l_star);
  out.c1 = caccioppoli_c1(out.sigma, D, e.p, e.q);
  return out;
}

/// Which branch of the closed-form theta_max table (kappa = n/(n-p)) applies.
enum class ThetaMaxCase { sigma_pq = 1, sigma_p = 2, sigma_zeta = 3, unbounded = 4 };

struct ThetaMaxCaseResult {
  ThetaMaxCase which = ThetaMaxCase::unbounded;
  std::string label;
  double theta_max = kInf;
};

/// Closed-form theta_max for kappa = n/(n-p): theta_max = n / (p - D(n-p)/s)
/// with s the attained energy term, or +inf when p <= D(n-p)/s.
inline ThetaMaxCaseResult theta_max_cases(const Exponents& e) {
  e.validate();
  const double n = e.n;
  const double p = e.p;
  const double q = e.q;
  const double zeta = e.zeta;
  const double D = e.D();
  const double defect = D * (n - p);

  auto branch = [&](double s) { return p > defect / s; };
  auto value = [&](double s) { return n / (p - defect / s); };

  if (q >= std::max(zeta - 1.0, 1.0) && branch(p * q)) {
    return {ThetaMaxCase::sigma_pq, "q >= max(zeta-1, 1)", value(p * q)};
  }
  const double pivot = (p + 1.0 - zeta) / (p - 1.0);
  if (q <= std::min(1.0, pivot) && branch(p)) {
    return {ThetaMaxCase::sigma_p, "q <= min(1, (p+1-zeta)/(p-1))", value(p)};
  }
  if (pivot <= q && q <= zeta - 1.0 && branch(zeta - D)) {
    return {ThetaMaxCase::sigma_zeta, "(p+1-zeta)/(p-1) <= q <= zeta-1", value(zeta - D)};
  }
  return {ThetaMaxCase::unbounded, "else (theta_max = inf)", kInf};
}

/// Geometric regimes that constrain the density exponent l in rho ~ r^-l.
enum class LRegime {
  exact_rn,         ///< self-similar solution on R^n: l* < l < p
  conformal,        ///< conformally changed R^n with unweighted equation (rho = 1)
  cartan_hadamard,  ///< V(r) ~ r^alpha, omega = 1
  ricci,            ///< non-negative Ricci, reverse doubling, omega = V^(kappa-1)/r^(kappa p)
  rn_optimal        ///< known sharp range on R^n
};

inline std::string_view to_string(LRegime r) {
  switch (r) {
    case LRegime::exact_rn: return "exact-rn";
    case LRegime::conformal: return "conformal";
    case LRegime::cartan_hadamard: return "cartan-hadamard";
    case LRegime::ricci: return "ricci";
    case LRegime::rn_optimal: return "rn-optimal";
  }
  return "?";
}

inline LRegime parse_regime(std::string_view s) {
  if (s == "exact-rn") return LRegime::exact_rn;
  if (s == "conformal") return LRegime::conformal;
  if (s == "cartan-hadamard") return LRegime::cartan_hadamard;
  if (s == "ricci") return LRegime::ricci;
  if (s == "rn-optimal") return LRegime::rn_optimal;
  throw DomainError("unknown regime '" + std::string(s) + "'");
}

inline Interval admissible_l_range(const Exponents& e, LRegime regime,
                                   std::optional<double> alpha = std::nullopt) {
  const DerivedConstants dc = derive(e);
  const double n = e.n;
  const double p = e.p;
  const double theta_max = dc.theta_max;
  const double kappa = dc.kappa;

  switch (regime) {
    case LRegime::exact_rn: {
      // rho = |x|^-l with l >= 0
      const Interval raw = Interval::open(dc.l_star, p);
      return raw.clipped_at_zero();
    }
    case LRegime::conformal:
      if (std::isinf(theta_max)) return Interval::closed_open(0.0, 2.0);
      return Interval::open(2.0 * n / (p * theta_max), 2.0);
    case LRegime::cartan_hadamard:
      if (!alpha || !(*alpha > 0.0)) throw DomainError("cartan-hadamard regime needs alpha > 0");
      if (std::isinf(theta_max)) return Interval::closed_ray(0.0);
      return Interval::open_ray(*alpha / theta_max).clipped_at_zero();
    case LRegime::ricci: {
      if (!alpha || !(*alpha > 2.0)) throw DomainError("ricci regime needs alpha > 2");
      const double a = *alpha;
      if (std::isinf(theta_max)) return Interval::closed_ray(kappa * p - a * (kappa - 1.0)).clipped_at_zero();
      const double lo = a - kappa * (theta_max - 1.0) * (a - p) / theta_max;
      return Interval::open_ray(lo).clipped_at_zero();
    }
    case LRegime::rn_optimal:
      if (p >= n * dc.D) return Interval::open_ray(dc.l_star);
      return Interval::closed_ray(0.0);
  }
  throw DomainError("unhandled regime");
}

/// Extinction-time bound from the comparison ODE dPsi/dt = -c Psi^(sigma/(sigma+D)),
/// with c = c1 * C^(-sigma/(sigma+D)).
inline double extinction_time_bound(double Phi0, double c1, double C_sobolev, double sigma, double D) {
  if (!(c1 > 0.0)) throw DomainError("c1 must be positive");
  if (!(C_sobolev > 0.0)) throw DomainError("Sobolev constant must be positive");
  if (!(D > 0.0 && D < 1.0)) throw DomainError("D must lie in (0, 1)");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (!(Phi0 >= 0.0)) throw DomainError("initial energy must be non-negative");
  const double s = sigma + D;
  const double c = c1 * std::pow(C_sobolev, -sigma / s);
  return s / (c * D) * std::pow(Phi0, D / s);
}

}  // namespace leibenson

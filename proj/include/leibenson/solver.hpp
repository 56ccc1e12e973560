#pragma once

// Conservative radial finite-volume scheme for rho du/dt = Delta_p u^q on a
// weighted model. Face fluxes F_f = S_mu(r_f) |g|^(p-2) g, g = (w_{i+1} - w_i)/h_f,
// w = u^q; cell update rho_i m_i du_i/dt = F_{i+1/2} - F_{i-1/2}.
// Two time integrators share the fluxes: forward Euler under stable_dt, and
// backward Euler solved by projected Newton on a tridiagonal Jacobian.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include "leibenson/diagnostics.hpp"
#include "leibenson/errors.hpp"
#include "leibenson/geometry.hpp"
#include "leibenson/params.hpp"

namespace leibenson {

enum class OuterBC { dirichlet_zero, neumann_zero, dirichlet_data };
enum class Scheme { explicit_euler, implicit_euler };

inline std::string_view to_string(OuterBC bc) {
  switch (bc) {
    case OuterBC::dirichlet_zero: return "dirichlet_zero";
    case OuterBC::neumann_zero: return "neumann_zero";
    case OuterBC::dirichlet_data: return "dirichlet_data";
  }
  return "?";
}

inline OuterBC parse_outer_bc(std::string_view s) {
  if (s == "dirichlet_zero") return OuterBC::dirichlet_zero;
  if (s == "neumann_zero") return OuterBC::neumann_zero;
  if (s == "dirichlet_data") return OuterBC::dirichlet_data;
  throw DomainError("unknown outer boundary condition '" + std::string(s) + "'");
}

inline std::string_view to_string(Scheme s) { return s == Scheme::explicit_euler ? "explicit" : "implicit"; }

inline Scheme parse_scheme(std::string_view s) {
  if (s == "explicit") return Scheme::explicit_euler;
  if (s == "implicit") return Scheme::implicit_euler;
  throw DomainError("unknown time scheme '" + std::string(s) + "'");
}

struct SolverConfig {
  WeightedModel model = WeightedModel::euclidean(3, 2.0);
  RadialGrid grid;
  double p = 2.0;
  double q = 0.5;
  double cfl = 0.4;
  double t_max = 1.0;
  double ext_tol = 1e-10;
  double floor_eps = 1e-12;
  OuterBC outer_bc = OuterBC::dirichlet_zero;
  /// Ghost-cell value u(R_max + h/2, t) for OuterBC::dirichlet_data.
  std::function<double(double)> outer_value;
  Scheme scheme = Scheme::implicit_euler;
  double record_every = 0.0;       ///< 0 records t_max/200
  double max_rel_change = 0.05;    ///< implicit step control
  std::optional<double> sigma;     ///< energy exponent for the trace; defaults to sigma_min
  double zeta = 2.0;
  std::size_t max_steps = 50'000'000;

  double D() const { return 1.0 - q * (p - 1.0); }

  void validate() const {
    if (!(p > 1.0)) throw DomainError("p must be > 1");
    if (!(q > 0.0)) throw DomainError("q must be > 0");
    if (!(D() > 0.0)) throw DomainError("fast-diffusion condition D = 1 - q(p-1) > 0 violated");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError("cfl must lie in (0, 1]");
    if (!(ext_tol > 0.0)) throw DomainError("ext_tol must be > 0");
    if (!(floor_eps > 0.0)) throw DomainError("floor_eps must be > 0");
    if (!(t_max >= 0.0)) throw DomainError("t_max must be >= 0");
    if (!(record_every >= 0.0)) throw DomainError("record_every must be >= 0");
    if (!(max_rel_change > 0.0)) throw DomainError("max_rel_change must be > 0");
    if (grid.size() < 3 || grid.face_area.size() != grid.size() + 1) throw DomainError("malformed grid");
    if (!grid.has_density()) throw DomainError("grid carries no density rho");
    for (double r : grid.cell_rho) {
      if (!(r > 0.0)) throw DomainError("solver needs a positive density rho");
    }
    if (outer_bc == OuterBC::dirichlet_data && !outer_value) {
      throw DomainError("dirichlet_data boundary needs an outer_value function");
    }
  }
};

struct State {
  double t = 0.0;
  RadialField u;
};

struct StepResult {
  State next;
  double dt = 0.0;
  double outflow = 0.0;  ///< mass leaving through the outer face during the step
  double clamped = 0.0;  ///< mass injected by the positivity projection
  std::size_t clamp_events = 0;
  int newton_iterations = 0;
};

namespace detail {

inline double ghost_value(const SolverConfig& cfg, double t) {
  switch (cfg.outer_bc) {
    case OuterBC::dirichlet_zero: return 0.0;
    case OuterBC::dirichlet_data: return std::max(0.0, cfg.outer_value(t));
    case OuterBC::neumann_zero: return 0.0;
  }
  return 0.0;
}

// |g|^(p-2) g with value 0 at g = 0.
inline double signed_power(double g, double p) {
  if (g == 0.0) return 0.0;
  return std::pow(std::abs(g), p - 2.0) * g;
}

inline void check_state(const SolverConfig& cfg, const RadialField& u) {
  check_field(cfg.grid, u);
  for (double x : u) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("field values must be finite and non-negative");
  }
}

}  // namespace detail

/// Face fluxes F_0 .. F_N; F_0 = 0 by symmetry.
inline std::vector<double> flux_faces(const SolverConfig& cfg, const RadialField& u, double t = 0.0) {
  detail::check_state(cfg, u);
  const auto& g = cfg.grid;
  const std::size_t N = g.size();
  std::vector<double> F(N + 1, 0.0);
  for (std::size_t f = 1; f < N; ++f) {
    const double grad = (std::pow(u[f], cfg.q) - std::pow(u[f - 1], cfg.q)) / g.face_spacing(f);
    F[f] = g.face_area[f] * detail::signed_power(grad, cfg.p);
  }
  if (cfg.outer_bc != OuterBC::neumann_zero) {
    const double ghost = std::pow(detail::ghost_value(cfg, t), cfg.q);
    const double grad = (ghost - std::pow(u[N - 1], cfg.q)) / g.face_spacing(N);
    F[N] = g.face_area[N] * detail::signed_power(grad, cfg.p);
  }
  return F;
}

/// Largest forward-Euler step keeping every cell update a convex combination
/// for the face-linearised diffusivities, times cfl, capped by t_max - t.
inline double stable_dt(const SolverConfig& cfg, const RadialField& u, double t = 0.0) {
  detail::check_state(cfg, u);
  const auto& g = cfg.grid;
  const std::size_t N = g.size();
  const double p = cfg.p, q = cfg.q, eps = cfg.floor_eps;

  auto tangent = [&](double x) { return q * std::pow(std::max(x, eps), q - 1.0); };
  // Linearised diffusivity of face f between values a (inner) and b (outer).
  auto diffusivity = [&](std::size_t f, double a, double b, bool b_real) {
    if (a == 0.0 && b == 0.0) return 0.0;
    const double wa = std::pow(a, q), wb = std::pow(b, q);
    const double grad = std::abs(wb - wa) / g.face_spacing(f);
    double slope = tangent(a);
    if (b_real) slope = std::max(slope, tangent(b));
    if (a != b) slope = std::max(slope, std::abs(wb - wa) / std::abs(b - a));
    const double gp = p >= 2.0 ? std::pow(grad, p - 2.0) : std::pow(std::max(grad, eps), p - 2.0);
    return std::max(1.0, p - 1.0) * gp * slope;
  };

  std::vector<double> rate(N, 0.0);
  for (std::size_t f = 1; f < N; ++f) {
    const double a = diffusivity(f, u[f - 1], u[f], true);
    const double k = g.face_area[f] * a / g.face_spacing(f);
    rate[f - 1] += k;
    rate[f] += k;
  }
  if (cfg.outer_bc != OuterBC::neumann_zero) {
    const double a = diffusivity(N, u[N - 1], detail::ghost_value(cfg, t), false);
    rate[N - 1] += g.face_area[N] * a / g.face_spacing(N);
  }

  const double horizon = std::max(0.0, cfg.t_max - t);
  double dt = kInf;
  for (std::size_t i = 0; i < N; ++i) {
    if (rate[i] > 0.0) dt = std::min(dt, g.cell_rho[i] * g.cell_measure[i] / rate[i]);
  }
  if (std::isinf(dt)) {
    const double sup = *std::max_element(u.begin(), u.end());
    if (sup > cfg.ext_tol && cfg.outer_bc == OuterBC::dirichlet_zero) {
      throw DegenerateError("every face diffusivity vanishes above the extinction threshold");
    }
    return horizon;
  }
  return std::min(cfg.cfl * dt, horizon);
}

/// Forward-Euler update with a prescribed dt, followed by clamping at 0.
inline StepResult step_with_dt(const SolverConfig& cfg, const State& s, double dt) {
  const auto F = flux_faces(cfg, s.u, s.t);
  const auto& g = cfg.grid;
  const std::size_t N = g.size();
  StepResult r;
  r.dt = dt;
  r.next.t = s.t + dt;
  r.next.u.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double weight = g.cell_rho[i] * g.cell_measure[i];
    double v = s.u[i] + dt * (F[i + 1] - F[i]) / weight;
    if (v < 0.0) {
      r.clamped += -v * weight;
      ++r.clamp_events;
      v = 0.0;
    }
    r.next.u[i] = v;
  }
  r.outflow = -F[N] * dt;
  return r;
}

inline StepResult step(const SolverConfig& cfg, const State& s) {
  const double dt = stable_dt(cfg, s.u, s.t);
  return step_with_dt(cfg, s, dt);
}

/// Backward-Euler step. The unknown is z with u = z^(1/q), w = z when q < 1 and
/// u = z, w = z^q otherwise, so that both maps have bounded derivatives at 0.
/// Returns nullopt when Newton does not converge.
inline std::optional<StepResult> step_implicit(const SolverConfig& cfg, const State& s, double dt) {
  detail::check_state(cfg, s.u);
  const auto& g = cfg.grid;
  const std::size_t N = g.size();
  const double p = cfg.p, q = cfg.q, eps = cfg.floor_eps;
  const bool w_unknown = q < 1.0;
  const double a_exp = w_unknown ? 1.0 / q : 1.0;
  const double b_exp = w_unknown ? 1.0 : q;
  const double t1 = s.t + dt;
  const bool outer_open = cfg.outer_bc != OuterBC::neumann_zero;
  const double w_ghost = outer_open ? std::pow(detail::ghost_value(cfg, t1), q) : 0.0;

  auto U = [&](double z) { return a_exp == 1.0 ? z : std::pow(z, a_exp); };
  auto W = [&](double z) { return b_exp == 1.0 ? z : std::pow(z, b_exp); };
  auto dU = [&](double z) { return a_exp == 1.0 ? 1.0 : a_exp * std::pow(std::max(z, eps), a_exp - 1.0); };
  auto dW = [&](double z) { return b_exp == 1.0 ? 1.0 : b_exp * std::pow(std::max(z, eps), b_exp - 1.0); };
  auto dphi = [&](double grad) {
    const double m = std::abs(grad);
    if (p >= 2.0) return (p - 1.0) * std::pow(m, p - 2.0);
    return (p - 1.0) * std::pow(std::max(m, eps), p - 2.0);
  };

  std::vector<double> z(N), weight(N), F(N + 1), G(N), lower(N), diag(N), upper(N), delta(N);
  for (std::size_t i = 0; i < N; ++i) {
    z[i] = w_unknown ? std::pow(s.u[i], q) : s.u[i];
    weight[i] = g.cell_rho[i] * g.cell_measure[i];
  }

  auto fluxes = [&](const std::vector<double>& zz) {
    F[0] = 0.0;
    for (std::size_t f = 1; f < N; ++f) {
      F[f] = g.face_area[f] * detail::signed_power((W(zz[f]) - W(zz[f - 1])) / g.face_spacing(f), p);
    }
    F[N] = outer_open ? g.face_area[N] * detail::signed_power((w_ghost - W(zz[N - 1])) / g.face_spacing(N), p)
                      : 0.0;
  };
  auto residual = [&](const std::vector<double>& zz) {
    fluxes(zz);
    double norm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      G[i] = weight[i] * (U(zz[i]) - s.u[i]) - dt * (F[i + 1] - F[i]);
      norm = std::max(norm, std::abs(G[i]));
    }
    return norm;
  };

  constexpr int max_iterations = 60;
  bool converged = false;
  int it = 0;
  for (; it < max_iterations; ++it) {
    residual(z);
    std::fill(lower.begin(), lower.end(), 0.0);
    std::fill(upper.begin(), upper.end(), 0.0);
    for (std::size_t i = 0; i < N; ++i) diag[i] = weight[i] * dU(z[i]);
    for (std::size_t f = 1; f < N; ++f) {
      const double h = g.face_spacing(f);
      const double k = dt * g.face_area[f] * dphi((W(z[f]) - W(z[f - 1])) / h) / h;
      // G_{f-1} contains -dt F_f, G_f contains +dt F_f.
      diag[f - 1] += k * dW(z[f - 1]);
      upper[f - 1] -= k * dW(z[f]);
      diag[f] += k * dW(z[f]);
      lower[f] -= k * dW(z[f - 1]);
    }
    if (outer_open) {
      const double h = g.face_spacing(N);
      diag[N - 1] += dt * g.face_area[N] * dphi((w_ghost - W(z[N - 1])) / h) / h * dW(z[N - 1]);
    }
    // Thomas algorithm for J delta = G.
    std::vector<double> c(N), d(N);
    c[0] = upper[0] / diag[0];
    d[0] = G[0] / diag[0];
    for (std::size_t i = 1; i < N; ++i) {
      const double m = diag[i] - lower[i] * c[i - 1];
      c[i] = upper[i] / m;
      d[i] = (G[i] - lower[i] * d[i - 1]) / m;
    }
    delta[N - 1] = d[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) delta[i] = d[i] - c[i] * delta[i + 1];

    double zmax = 0.0, change = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double zn = std::max(z[i] - delta[i], 0.0);
      if (!std::isfinite(zn)) return std::nullopt;
      change = std::max(change, std::abs(zn - z[i]));
      z[i] = zn;
      zmax = std::max(zmax, zn);
    }
    if (change <= 1e-13 * zmax || zmax == 0.0) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) return std::nullopt;

  residual(z);
  StepResult r;
  r.dt = dt;
  r.newton_iterations = it;
  r.next.t = t1;
  r.next.u.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    r.next.u[i] = U(z[i]);
    r.clamped += G[i];
    if (z[i] == 0.0 && G[i] > 0.0) ++r.clamp_events;
  }
  r.outflow = -F[N] * dt;
  return r;
}

struct RunResult {
  EnergyTrace trace;
  std::optional<double> extinction_time;
  State final_state;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t clamp_events = 0;
  double max_Phi_increase = 0.0;  ///< largest single-step increase of Phi
  double max_sup_increase = 0.0;  ///< largest single-step increase of sup u
  double mass_defect = 0.0;       ///< |mass + outflow - clamped - mass(0)| at the end
};

using RecordObserver = std::function<void(const State&)>;

/// Integrates from u0 until sup u < ext_tol or t = t_max. Samples are recorded
/// at every multiple of record_every (hit exactly) and at the final state.
inline RunResult run(const SolverConfig& cfg, const RadialField& u0, const RecordObserver& on_record = {}) {
  cfg.validate();
  detail::check_state(cfg, u0);
  const auto& grid = cfg.grid;
  const int n = cfg.model.params().n;

  RunResult out;
  EnergyTrace& tr = out.trace;
  if (cfg.sigma) {
    tr.sigma = *cfg.sigma;
  } else {
    Exponents e;
    e.n = n;
    e.p = cfg.p;
    e.q = cfg.q;
    e.zeta = cfg.zeta;
    tr.sigma = derive(e).sigma_min;
  }
  tr.D = cfg.D();
  const double record_every = cfg.record_every > 0.0 ? cfg.record_every : cfg.t_max / 200.0;

  double outflow = 0.0, clamped = 0.0;
  const double mass0 = discrete_mass(grid, u0);
  auto sup_of = [](const RadialField& u) { return *std::max_element(u.begin(), u.end()); };
  auto record = [&](const State& s) {
    tr.times.push_back(s.t);
    tr.Phi.push_back(energy_Phi(grid, s.u, tr.sigma, tr.D));
    tr.grad_term.push_back(grad_term(grid, s.u, tr.sigma, cfg.p));
    tr.sup_u.push_back(sup_of(s.u));
    tr.mass.push_back(discrete_mass(grid, s.u));
    tr.outflow.push_back(outflow);
    tr.clamped.push_back(clamped);
    if (on_record) on_record(s);
  };

  State s{0.0, u0};
  record(s);
  auto finish = [&]() {
    out.final_state = s;
    out.mass_defect = std::abs(discrete_mass(grid, s.u) + outflow - clamped - mass0);
  };
  if (sup_of(s.u) < cfg.ext_tol) {
    out.extinction_time = 0.0;
    finish();
    return out;
  }

  std::size_t next_record = 1;
  double Phi_prev = tr.Phi.back();
  double sup_prev = tr.sup_u.back();
  double dt_try = std::min(record_every, cfg.t_max) * 1e-3;

  while (s.t < cfg.t_max) {
    if (out.steps >= cfg.max_steps) throw DegenerateError("step budget exhausted before t_max");
    const double t_record = static_cast<double>(next_record) * record_every;
    const double limit = std::min(t_record, cfg.t_max) - s.t;
    bool hits_record = false;

    StepResult r;
    if (cfg.scheme == Scheme::explicit_euler) {
      double dt = stable_dt(cfg, s.u, s.t);
      if (dt >= limit) {
        dt = limit;
        hits_record = true;
      }
      r = step_with_dt(cfg, s, dt);
    } else {
      for (;;) {
        double dt = dt_try;
        hits_record = dt >= limit;
        if (hits_record) dt = limit;
        auto attempt = step_implicit(cfg, s, dt);
        if (!attempt) {
          ++out.rejected_steps;
          dt_try = 0.25 * dt;
          continue;
        }
        const double sup = std::max(sup_of(s.u), sup_of(attempt->next.u));
        const double floor = 1e-6 * sup;
        double change = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const double scale = std::max({s.u[i], attempt->next.u[i], floor});
          change = std::max(change, std::abs(attempt->next.u[i] - s.u[i]) / scale);
        }
        if (change > 2.0 * cfg.max_rel_change && dt > 1e-14 * std::max(1.0, s.t)) {
          ++out.rejected_steps;
          dt_try = dt * std::max(0.1, 0.9 * cfg.max_rel_change / change);
          continue;
        }
        const double grow = change > 0.0 ? 0.9 * cfg.max_rel_change / change : 2.0;
        const double next = dt * std::clamp(grow, 0.2, 2.0);
        // Keep the controller's estimate when the step was shortened to land on a record.
        dt_try = hits_record ? std::max(dt_try, next) : next;
        r = std::move(*attempt);
        break;
      }
    }

    if (hits_record) r.next.t = std::min(t_record, cfg.t_max);
    outflow += r.outflow;
    clamped += r.clamped;
    out.clamp_events += r.clamp_events;
    ++out.steps;
    s = std::move(r.next);

    const double Phi_now = energy_Phi(grid, s.u, tr.sigma, tr.D);
    const double sup_now = sup_of(s.u);
    out.max_Phi_increase = std::max(out.max_Phi_increase, Phi_now - Phi_prev);
    out.max_sup_increase = std::max(out.max_sup_increase, sup_now - sup_prev);
    Phi_prev = Phi_now;
    sup_prev = sup_now;

    if (sup_now < cfg.ext_tol) {
      out.extinction_time = s.t;
      record(s);
      break;
    }
    if (hits_record) {
      record(s);
      if (s.t >= t_record) ++next_record;
    }
  }
  if (!out.extinction_time && tr.times.back() != s.t) record(s);
  finish();
  return out;
}

}  // namespace leibenson

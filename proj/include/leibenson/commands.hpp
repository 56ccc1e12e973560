#pragma once

// Command implementations behind the `leibenson` executable. Each returns an
// exit code: 0 ok, 1 input error, 2 negative verdict, 3 no extinction by t_max.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "leibenson/config.hpp"
#include "leibenson/diagnostics.hpp"
#include "leibenson/exact_solution.hpp"
#include "leibenson/geometry.hpp"
#include "leibenson/params.hpp"
#include "leibenson/solver.hpp"

namespace leibenson {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNegative = 2, kExitNoExtinction = 3 };

struct CaccioppoliSweep {
  std::size_t pairs = 0;
  std::size_t passed = 0;
  double worst_relative = -kInf;  ///< max lhs / Phi(t1)
};

/// Twenty windows [t1, t1 + t_end/2] with t1 = t_end k/40 spread over the trace.
inline CaccioppoliSweep caccioppoli_sweep(const EnergyTrace& trace, double c1, double tol_ineq = 1e-2,
                                          std::size_t count = 20) {
  CaccioppoliSweep out;
  const double t0 = trace.times.front(), t_end = trace.times.back();
  const double span = t_end - t0;
  if (trace.size() < 2 || !(span > 0.0)) return out;
  for (std::size_t k = 0; k < count; ++k) {
    const double t1 = t0 + span * static_cast<double>(k) / (2.0 * count);
    const double t2 = t1 + 0.5 * span;
    const auto r = caccioppoli_check(trace, c1, t1, t2, tol_ineq);
    ++out.pairs;
    if (r.passed) ++out.passed;
    if (r.Phi_t1 > 0.0) out.worst_relative = std::max(out.worst_relative, r.lhs / r.Phi_t1);
  }
  return out;
}

inline std::string output_path(const std::string& path) {
  namespace fs = std::filesystem;
  const char* dir = std::getenv("LEIBENSON_OUTPUT_DIR");
  fs::path p(path);
  if (dir && *dir && p.is_relative()) p = fs::path(dir) / p;
  return p.string();
}

inline void write_trace_csv(std::ostream& os, const EnergyTrace& tr) {
  os << "t,sup_u,Phi,grad_term,mass,outflow,clamped\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << tr.times[i] << ',' << tr.sup_u[i] << ',' << tr.Phi[i] << ',' << tr.grad_term[i] << ',' << tr.mass[i]
       << ',' << tr.outflow[i] << ',' << tr.clamped[i] << '\n';
  }
}

namespace cmd_detail {

inline std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const QuadratureError& e) {
    err << "error: quadrature failed: " << e.what() << "\n";
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const DegenerateError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const RangeError& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInput;
}

}  // namespace cmd_detail

inline int cmd_params(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using cmd_detail::num;
  return cmd_detail::guarded(err, [&]() {
    validate(cfg);
    const Exponents e = exponents_of(cfg);
    const DerivedConstants dc = derive(e, cfg.l);
    const ThetaMaxCaseResult tc = theta_max_cases(e);
    const LRegime regime = parse_regime(cfg.regime);
    const Interval range = admissible_l_range(e, regime, cfg.alpha);

    out << "n = " << e.n << ", p = " << num(e.p) << ", q = " << num(e.q) << ", zeta = " << num(e.zeta) << "\n";
    out << "D           = " << num(dc.D) << "\n";
    out << "kappa       = " << num(dc.kappa) << "\n";
    out << "sigma_min   = " << num(dc.sigma_min) << "\n";
    out << "sigma       = " << num(dc.sigma) << "\n";
    out << "theta       = " << num(dc.theta) << "\n";
    out << "theta_max   = " << num(dc.theta_max) << "  [case " << static_cast<int>(tc.which) << ": " << tc.label
        << "]\n";
    out << "theta_opt   = " << num(dc.theta_opt) << "  (conjectural)\n";
    out << "l_star      = " << num(dc.l_star) << "\n";
    if (dc.kappa_l) out << "kappa_l     = " << num(*dc.kappa_l) << "\n";
    out << "c1          = " << num(dc.c1) << "\n";
    out << "l range [" << to_string(regime) << "] = " << range.to_string() << "\n";
    if (!cfg.l) return kExitOk;
    const bool ok = range.contains(*cfg.l);
    out << "l = " << num(*cfg.l) << (ok ? " is admissible" : " is NOT admissible") << "\n";
    return ok ? kExitOk : kExitNegative;
  });
}

inline int cmd_verify_exact(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using cmd_detail::num;
  return cmd_detail::guarded(err, [&]() {
    validate(cfg);
    if (!cfg.l) throw ConfigError("verify-exact needs l");
    const BarenblattProfile prof(cfg.n, cfg.p, cfg.q, *cfg.l, cfg.C, cfg.T);
    const std::vector<double> steps{1e-2, 5e-3, 2.5e-3};
    const auto study = residual_convergence(prof, linspace(0.2, 5.0, 20), linspace(0.05, 0.9, 10), steps);

    out << "profile n = " << prof.n() << ", p = " << num(prof.p()) << ", q = " << num(prof.q())
        << ", l = " << num(prof.l()) << ", C = " << num(prof.C()) << ", T = " << num(prof.T()) << "\n";
    out << "bracket coefficient K = " << num(prof.bracket_coefficient()) << ", kappa_l = " << num(prof.kappa_l())
        << "\n";
    out << std::left << std::setw(12) << "h" << std::setw(16) << "max |R|" << "median |R|\n";
    for (std::size_t k = 0; k < steps.size(); ++k) {
      std::vector<double> mags;
      for (const auto& pt : study.points) {
        if (!pt.residuals.empty()) mags.push_back(std::abs(pt.residuals[k]));
      }
      std::sort(mags.begin(), mags.end());
      const double mx = mags.empty() ? 0.0 : mags.back();
      const double med = mags.empty() ? 0.0 : mags[mags.size() / 2];
      out << std::setw(12) << num(steps[k]) << std::setw(16) << num(mx) << num(med) << "\n";
    }
    out << std::right;
    std::size_t zero = 0, straddle = 0;
    for (const auto& pt : study.points) {
      zero += pt.zero_region;
      straddle += pt.straddles;
    }
    out << "points: " << study.points.size() << " (evaluated " << study.evaluated << ", identically-zero region "
        << zero << ", stencil across T " << straddle << ")\n";
    for (const auto& pt : study.points) {
      if (!pt.residuals.empty() && pt.order < 1.0) {
        out << "  order " << num(pt.order) << " at (r, t) = (" << num(pt.r) << ", " << num(pt.t) << ")\n";
      }
    }
    const double frac = study.pass_fraction();
    out << "order >= 1 at " << study.passing << "/" << study.evaluated << " points (" << num(100.0 * frac)
        << "%)\n";
    return frac >= 0.95 ? kExitOk : kExitNegative;
  });
}

inline int cmd_finiteness(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using cmd_detail::num;
  return cmd_detail::guarded(err, [&]() {
    validate(cfg);
    const WeightedModel model = model_of(cfg);
    const double theta = cfg.theta ? *cfg.theta : derive(exponents_of(cfg)).theta_max;
    const FinitenessReport rep = finiteness_norm(model, theta, cfg.R_probe);
    out << "model " << model.name() << ", " << model.density().describe() << ", theta = " << num(theta) << "\n";
    if (std::isinf(theta)) {
      out << "sup rho/omega on (0, " << num(cfg.R_probe) << "] = " << num(rep.norm) << "\n";
    } else {
      out << "integral to R_probe = " << num(cfg.R_probe) << ": " << num(rep.integral) << "  (norm "
          << num(rep.norm) << ")\n";
    }
    out << "tail exponent = " << num(rep.tail_exponent) << "\n";
    if (!model.density().is_zero()) {
      const double r1 = 10.0 * cfg.R_probe, r2 = 100.0 * cfg.R_probe;
      out << "fitted slope on [" << num(r1) << ", " << num(r2)
          << "] = " << num(fitted_tail_slope(model, theta, r1, r2)) << "\n";
    }
    out << "verdict: " << (rep.finite ? "finite" : "infinite") << "\n";
    return rep.finite ? kExitOk : kExitNegative;
  });
}

inline int cmd_sobolev_probe(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using cmd_detail::num;
  return cmd_detail::guarded(err, [&]() {
    validate(cfg);
    const WeightedModel model = model_of(cfg);
    const RadialGrid grid = make_grid(model, cfg.R_max, static_cast<std::size_t>(cfg.cells), cfg.grading);
    const auto res = sobolev_probe(grid, cfg.p, model.kappa(), default_bump_family(cfg.R_max));
    out << "model " << model.name() << ", kappa = " << num(model.kappa()) << ", cells = " << cfg.cells
        << ", R_max = " << num(cfg.R_max) << "\n";
    out << "profiles evaluated = " << res.evaluated << "\n";
    out << "C_lower = " << num(res.C_lower) << "  (lower bound for the Sobolev constant)\n";
    out << "maximiser: (1 - (r/R)^2)_+^k with R = " << num(res.best.R) << ", k = " << res.best.k << "\n";
    return kExitOk;
  });
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using cmd_detail::num;
  return cmd_detail::guarded(err, [&]() {
    validate(cfg);
    const WeightedModel model = model_of(cfg);
    if (model.density().is_zero()) throw ConfigError("simulate needs a positive density");

    SolverConfig sc;
    sc.model = model;
    sc.grid = make_grid(model, cfg.R_max, static_cast<std::size_t>(cfg.cells), cfg.grading);
    sc.p = cfg.p;
    sc.q = cfg.q;
    sc.cfl = cfg.cfl;
    sc.t_max = cfg.t_max;
    sc.ext_tol = cfg.ext_tol;
    sc.floor_eps = cfg.floor_eps;
    sc.outer_bc = parse_outer_bc(cfg.outer_bc);
    sc.scheme = parse_scheme(cfg.scheme);
    sc.record_every = cfg.record_every;
    sc.max_rel_change = cfg.max_rel_change;
    sc.sigma = cfg.sigma;
    sc.zeta = cfg.zeta;

    RadialField u0(sc.grid.size(), 0.0);
    std::optional<BarenblattProfile> prof;
    if (cfg.initial == "barenblatt") {
      if (model.family() != Family::euclidean || !cfg.l) {
        throw ConfigError("barenblatt initial data needs family = euclidean and l");
      }
      if (model.density().kind != Density::Kind::power) {
        throw ConfigError("barenblatt initial data needs density = power");
      }
      prof.emplace(cfg.n, cfg.p, cfg.q, *cfg.l, cfg.C, cfg.T);
      u0 = cell_averages(*prof, model, sc.grid, 0.0);
      if (sc.outer_bc == OuterBC::dirichlet_data) {
        const double r_ghost = cfg.R_max + 0.5 * sc.grid.widths.back();
        const BarenblattProfile pr = *prof;
        sc.outer_value = [pr, r_ghost](double t) { return pr.eval(r_ghost, t); };
      }
    } else if (cfg.initial == "bump") {
      const BumpProfile bump{0.5 * cfg.R_max, 2};
      for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = bump(sc.grid.centers[i]);
    }
    if (sc.outer_bc == OuterBC::dirichlet_data && !sc.outer_value) {
      throw ConfigError("outer_bc = dirichlet_data is only available with barenblatt initial data");
    }

    const RunResult res = run(sc, u0);
    const EnergyTrace& tr = res.trace;
    const std::string path = output_path(cfg.out_path);
    {
      std::ofstream csv(path);
      if (!csv) throw ConfigError("cannot write trace to '" + path + "'");
      write_trace_csv(csv, tr);
    }

    const double c1 = caccioppoli_c1(tr.sigma, tr.D, cfg.p, cfg.q);
    out << "trace written to " << path << " (" << tr.size() << " rows)\n";
    out << "scheme " << to_string(sc.scheme) << ", outer_bc " << to_string(sc.outer_bc) << ", cells "
        << sc.grid.size() << ", R_max " << num(cfg.R_max) << "\n";
    out << "sigma = " << num(tr.sigma) << ", D = " << num(tr.D) << ", c1 = " << num(c1) << "\n";
    out << "steps = " << res.steps << " (rejected " << res.rejected_steps << ")\n";
    if (res.extinction_time) {
      out << "extinction_time = " << num(*res.extinction_time) << "\n";
    } else {
      out << "extinction_time = none (t_max = " << num(cfg.t_max) << " reached)\n";
    }
    if (prof) out << "exact extinction time T = " << num(prof->T()) << "\n";
    out << "Phi(0) = " << num(tr.Phi.front()) << ", max single-step Phi increase = " << num(res.max_Phi_increase)
        << "\n";
    out << "outflow = " << num(tr.outflow.back()) << ", clamped = " << num(tr.clamped.back())
        << ", mass defect = " << num(res.mass_defect) << "\n";
    if (tr.size() >= 3 && tr.Phi.front() > 0.0) {
      const double c_star = ode_fit(tr);
      out << "fitted c* = " << num(c_star);
      if (c_star > 0.0) out << ", Phi <= Psi: " << (ode_verify(tr, c_star).passed ? "yes" : "no");
      out << "\n";
      const auto sweep = caccioppoli_sweep(tr, c1);
      out << "caccioppoli: " << sweep.passed << "/" << sweep.pairs
          << " windows pass, worst lhs/Phi(t1) = " << num(sweep.worst_relative) << "\n";
    }
    if (cfg.probe_C && tr.Phi.front() > 0.0) {
      const double T_pred = extinction_time_bound(tr.Phi.front(), c1, *cfg.probe_C, tr.sigma, tr.D);
      out << "extinction time bound with C = " << num(*cfg.probe_C) << ": " << num(T_pred)
          << "  (lower-bound prediction)\n";
    }
    return res.extinction_time ? kExitOk : kExitNoExtinction;
  });
}

}  // namespace leibenson

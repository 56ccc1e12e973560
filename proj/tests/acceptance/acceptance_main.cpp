// Acceptance criteria: one PASS/FAIL line each; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "leibenson/commands.hpp"

namespace lb = leibenson;

namespace {

// Tolerances and budgets.
constexpr double kGoldenRel = 1e-12;
constexpr int kRandomTuples = 10000;
constexpr double kParamsBudget = 1.0;
constexpr double kResidualPassFraction = 0.95;
constexpr double kResidualBudget = 10.0;
constexpr double kExtinctionBand = 0.10;
constexpr double kL1Limit = 0.05;
constexpr double kL1Horizon = 0.9;
constexpr double kRunBudget = 300.0;
constexpr double kPhiStepTol = 1e-12;
constexpr double kCaccioppoliTol = 1e-2;
constexpr std::size_t kCaccioppoliPairs = 20;
constexpr double kPsiRel = 1e-8;
constexpr double kSlopeRel = 0.05;
constexpr double kFinitenessBudget = 1.0;
constexpr int kHoelderFields = 1000;
constexpr double kHoelderRounding = 1e-8;
constexpr double kConformalRel = 1e-12;
constexpr double kAreaSlopeRel = 0.02;

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  std::printf("%s criterion %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool rel_close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void criterion_params() {
  const auto t0 = std::chrono::steady_clock::now();
  lb::Exponents e;
  e.n = 3;
  e.p = 2.0;
  e.q = 0.5;
  e.zeta = 1.5;
  e.sigma = 2.0;
  const auto dc = lb::derive(e);
  bool ok = rel_close(dc.D, 0.5, kGoldenRel) && rel_close(dc.kappa, 3.0, kGoldenRel) &&
            rel_close(dc.sigma_min, 2.0, kGoldenRel) && rel_close(dc.theta, 12.0 / 7.0, kGoldenRel) &&
            rel_close(dc.theta_max, 12.0 / 7.0, kGoldenRel) && rel_close(dc.theta_opt, 2.0, kGoldenRel) &&
            dc.theta_opt_conjectural && rel_close(dc.l_star, 1.0, kGoldenRel) &&
            rel_close(dc.c1, 15.0 / 32.0, kGoldenRel);
  const bool golden = ok;

  std::mt19937_64 rng(20261016);
  std::uniform_int_distribution<int> n_dist(2, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int k = 0; k < kRandomTuples; ++k) {
    lb::Exponents r;
    r.n = n_dist(rng);
    r.p = 1.0 + (r.n - 1.0) * (0.02 + 0.96 * u(rng));
    r.q = (0.02 + 0.96 * u(rng)) / (r.p - 1.0);
    r.zeta = 1.0 + 3.0 * (0.01 + 0.99 * u(rng));
    const double a = lb::derive(r).theta_max;
    const double b = lb::theta_max_cases(r).theta_max;
    if (!rel_close(a, b, kGoldenRel)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  ok = ok && mismatches == 0 && secs < kParamsBudget;
  report("1 (parameter golden suite)", ok,
         std::string("golden ") + (golden ? "ok" : "mismatch") + ", theta_max_cases mismatches " +
             std::to_string(mismatches) + "/" + std::to_string(kRandomTuples) + ", " + fmt(secs) + " s");
}

void criterion_residual() {
  const auto t0 = std::chrono::steady_clock::now();
  const lb::BarenblattProfile prof(3, 2.0, 0.5, 1.5, 1.0, 1.0);
  const auto study = lb::residual_convergence(prof, lb::linspace(0.2, 5.0, 20), lb::linspace(0.05, 0.9, 10),
                                              {1e-2, 5e-3, 2.5e-3});
  const double secs = seconds_since(t0);
  const bool ok = study.points.size() == 200 && study.pass_fraction() >= kResidualPassFraction &&
                  secs < kResidualBudget;
  report("2 (exact-solution residual)", ok,
         "order >= 1 at " + std::to_string(study.passing) + "/" + std::to_string(study.evaluated) + " points, " +
             fmt(secs) + " s");
}

struct TrackedRun {
  lb::RunResult result;
  double max_l1 = 0.0;
  double seconds = 0.0;
};

TrackedRun barenblatt_run(lb::OuterBC bc) {
  const lb::BarenblattProfile prof(3, 2.0, 0.5, 1.5, 1.0, 1.0);
  lb::SolverConfig sc;
  sc.model = lb::build_euclidean(3, 2.0).with_density(lb::Density::power(1.5));
  sc.grid = lb::make_grid(sc.model, 20.0, 2000, 2.0);
  sc.p = 2.0;
  sc.q = 0.5;
  sc.t_max = 1.5;
  sc.outer_bc = bc;
  sc.record_every = 0.005;
  if (bc == lb::OuterBC::dirichlet_data) {
    const double r_ghost = 20.0 + 0.5 * sc.grid.widths.back();
    sc.outer_value = [prof, r_ghost](double t) { return prof.eval(r_ghost, t); };
  }
  const auto& g = sc.grid;
  const auto u0 = lb::cell_averages(prof, sc.model, g, 0.0);

  TrackedRun out;
  auto observe = [&](const lb::State& s) {
    if (s.t > kL1Horizon + 1e-12) return;
    const auto ref = lb::cell_averages(prof, sc.model, g, s.t);
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double w = g.cell_rho[i] * g.cell_measure[i];
      err += std::abs(s.u[i] - ref[i]) * w;
      norm += ref[i] * w;
    }
    if (norm > 0.0) out.max_l1 = std::max(out.max_l1, err / norm);
  };
  const auto t0 = std::chrono::steady_clock::now();
  out.result = lb::run(sc, u0, observe);
  out.seconds = seconds_since(t0);
  return out;
}

std::string run_detail(const TrackedRun& r) {
  const auto& ext = r.result.extinction_time;
  const auto& tr = r.result.trace;
  return "extinction at " + (ext ? fmt(*ext) : std::string("none")) + " vs T = 1, max relative L1 error " +
         fmt(r.max_l1) + " on t <= 0.9, clamped mass " + fmt(tr.clamped.back() / tr.mass.front()) +
         " of initial, " + fmt(r.seconds) + " s";
}

bool extinction_ok(const TrackedRun& r) {
  const auto& ext = r.result.extinction_time;
  return ext && std::abs(*ext - 1.0) <= kExtinctionBand && r.max_l1 < kL1Limit && r.seconds < kRunBudget;
}

void criterion_energy(const lb::EnergyTrace& tr, const lb::RunResult& res) {
  const double phi0 = tr.Phi.front();
  const bool mono = res.max_Phi_increase <= kPhiStepTol * phi0;
  const auto sweep = lb::caccioppoli_sweep(tr, 15.0 / 32.0, kCaccioppoliTol, kCaccioppoliPairs);
  const bool ok = mono && sweep.pairs == kCaccioppoliPairs && sweep.passed == sweep.pairs;
  report("4 (energy monotonicity and Caccioppoli)", ok,
         "max step increase " + fmt(res.max_Phi_increase / phi0) + " Phi(0), Caccioppoli " +
             std::to_string(sweep.passed) + "/" + std::to_string(sweep.pairs) + " windows");
}

double rk4_psi(double Phi0, double c, double sigma, double D, double t, int steps) {
  const double e = sigma / (sigma + D);
  auto f = [&](double y) { return y > 0.0 ? -c * std::pow(y, e) : 0.0; };
  double y = Phi0;
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

void criterion_comparison(const lb::EnergyTrace& tr) {
  const double c = lb::ode_fit(tr);
  const auto verdict = lb::ode_verify(tr, c);
  const double phi0 = tr.Phi.front(), s = tr.sigma + tr.D;
  const double t_ext = std::pow(phi0, tr.D / s) * s / (tr.D * c);
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double t = t_ext * k / 10.0;
    const double closed = lb::comparison_Psi(phi0, c, tr.sigma, tr.D, t);
    const double ode = rk4_psi(phi0, c, tr.sigma, tr.D, t, 20000);
    worst = std::max(worst, std::abs(closed - ode) / closed);
  }
  const bool ok = c > 0.0 && verdict.passed && worst <= kPsiRel;
  report("5 (differential inequality and comparison)", ok,
         "c* = " + fmt(c) + ", max Phi/Psi = " + fmt(verdict.worst_ratio) + ", Psi vs RK4 rel " + fmt(worst));
}

void criterion_finiteness() {
  const double theta = 12.0 / 7.0;
  bool ok = true;
  std::string detail;
  for (double l : {1.9, 1.5}) {
    if (!detail.empty()) detail += "; ";
    lb::RunConfig cfg;
    cfg.family = "ch_polynomial";
    cfg.alpha = 3.0;
    cfg.l = l;
    cfg.theta = theta;
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream out, err;
    const int code = lb::cmd_finiteness(cfg, out, err);
    const double secs = seconds_since(t0);
    const bool expect_finite = l > 7.0 / 4.0;
    const auto model = lb::model_of(cfg);
    const auto rep = lb::finiteness_norm(model, theta, cfg.R_probe);
    const double slope = lb::fitted_tail_slope(model, theta, 1e4, 1e6);
    const bool slope_ok = std::abs(slope - rep.tail_exponent) <= kSlopeRel * std::abs(rep.tail_exponent);
    const int want = expect_finite ? lb::kExitOk : lb::kExitNegative;
    ok = ok && code == want && rep.finite == expect_finite && slope_ok && secs < kFinitenessBudget;
    detail += "l = " + fmt(l) + ": exit " + std::to_string(code) + ", tail " + fmt(rep.tail_exponent) +
              ", fitted " + fmt(slope) + ", " + fmt(secs) + " s";
  }
  report("6 (finiteness verdicts)", ok, detail);
}

void criterion_hoelder() {
  const auto m = lb::build_euclidean(3, 2.0).with_density(lb::Density::power(1.5));
  const auto g = lb::make_grid(m, 20.0, 64);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  int passed = 0;
  double worst = 0.0;
  for (int k = 0; k < kHoelderFields; ++k) {
    lb::RadialField u(64);
    const double power = 1.0 + 4.0 * d(rng);
    for (auto& x : u) x = d(rng) < 0.1 ? 0.0 : std::pow(d(rng), power);
    const auto r = lb::hoelder_step_check(g, u, 2.0, 0.5, 12.0 / 7.0, 3.0);
    if (r.rhs > 0.0) worst = std::max(worst, r.lhs / r.rhs);
    if (r.lhs <= r.rhs * (1.0 + kHoelderRounding)) ++passed;
  }
  report("7 (discrete Hoelder)", passed == kHoelderFields,
         std::to_string(passed) + "/" + std::to_string(kHoelderFields) + " fields, worst lhs/rhs " + fmt(worst));
}

void criterion_conformal() {
  const auto conf = lb::build_conformal(3, 2.0, 0.0, 1.0);
  const auto eucl = lb::build_euclidean(3, 2.0);
  const double r0 = conf.smoothing_radius();
  double worst = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double r = r0 * std::pow(1e4, k / 200.0) * (1.0 + 1e-9);
    worst = std::max(worst, std::abs(conf.area(r) - eucl.area(r)) / eucl.area(r));
  }
  const auto c15 = lb::build_conformal(3, 2.0, 1.5, 1.0);
  const double slope = std::log(c15.area(1e4) / c15.area(1e2)) / std::log(100.0);
  const double want = 1.5 * (3.0 - 2.0) / (2.0 - 1.5) + 3.0 - 1.0;
  const bool ok = worst <= kConformalRel && std::abs(slope - want) <= kAreaSlopeRel * want;
  report("8 (conformal model consistency)", ok,
         "l = 0 max rel diff " + fmt(worst) + " beyond r = " + fmt(r0) + ", l = 1.5 slope " + fmt(slope) +
             " vs " + fmt(want));
}

}  // namespace

int main() {
  try {
    criterion_params();
    criterion_residual();
    const TrackedRun zero = barenblatt_run(lb::OuterBC::dirichlet_zero);
    report("3 (extinction tracking, dirichlet_zero)", extinction_ok(zero), run_detail(zero));
    criterion_energy(zero.result.trace, zero.result);
    criterion_comparison(zero.result.trace);
    criterion_finiteness();
    criterion_hoelder();
    criterion_conformal();
    // Supplementary: same run with the exact far field imposed at R_max.
    const TrackedRun data = barenblatt_run(lb::OuterBC::dirichlet_data);
    report("3b (extinction tracking, dirichlet_data, supplementary)", extinction_ok(data), run_detail(data));
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

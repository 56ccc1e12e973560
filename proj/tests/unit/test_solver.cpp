#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "leibenson/exact_solution.hpp"
#include "leibenson/solver.hpp"

namespace lb = leibenson;

namespace {

constexpr double kPi = std::numbers::pi;

lb::SolverConfig three_cell_config(lb::OuterBC bc = lb::OuterBC::dirichlet_zero) {
  lb::SolverConfig cfg;
  cfg.model = lb::build_euclidean(3, 2.0).with_density(lb::Density::constant());
  cfg.grid = lb::make_grid(cfg.model, 3.0, 3);
  cfg.p = 2.0;
  cfg.q = 0.5;
  cfg.outer_bc = bc;
  cfg.t_max = 10.0;
  return cfg;
}

lb::SolverConfig small_config(double p, double q, lb::OuterBC bc, std::size_t cells = 16) {
  lb::SolverConfig cfg;
  cfg.model = lb::build_euclidean(3, p).with_density(lb::Density::cored_power(1.0));
  cfg.grid = lb::make_grid(cfg.model, 4.0, cells);
  cfg.p = p;
  cfg.q = q;
  cfg.outer_bc = bc;
  cfg.t_max = 100.0;
  return cfg;
}

lb::RadialField random_field(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  lb::RadialField u(n);
  for (auto& x : u) x = d(rng);
  return u;
}

}  // namespace

// u = (1, 0.25, 0) on faces 0,1,2,3 of a unit-spaced grid: w = (1, 0.5, 0).
TEST(Flux, ThreeCellGolden) {
  const auto cfg = three_cell_config();
  const auto F = lb::flux_faces(cfg, {1.0, 0.25, 0.0});
  ASSERT_EQ(F.size(), 4u);
  EXPECT_EQ(F[0], 0.0);
  EXPECT_NEAR(F[1], -2.0 * kPi, 1e-13);
  EXPECT_NEAR(F[2], -8.0 * kPi, 1e-13);
  EXPECT_EQ(F[3], 0.0);
  const auto F2 = lb::flux_faces(cfg, {1.0, 0.25, 0.25});
  // ghost w = 0 one unit beyond the last centre: S(3) (0 - 0.5)/1
  EXPECT_NEAR(F2[3], -36.0 * kPi * 0.5, 1e-12);
}

TEST(Flux, ConstantAndZeroStates) {
  const auto cfg = three_cell_config(lb::OuterBC::neumann_zero);
  for (double x : lb::flux_faces(cfg, {0.3, 0.3, 0.3})) EXPECT_EQ(x, 0.0);
  for (double x : lb::flux_faces(three_cell_config(), {0.0, 0.0, 0.0})) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(lb::flux_faces(cfg, {0.3, -0.1, 0.3}), lb::DomainError);
}

TEST(Step, ThreeCellGolden) {
  const auto cfg = three_cell_config();
  const auto r = lb::step_with_dt(cfg, {0.0, {1.0, 0.25, 0.0}}, 0.01);
  // m = 4 pi/3 (1, 7, 19)
  EXPECT_NEAR(r.next.u[0], 1.0 - 0.015, 1e-14);
  EXPECT_NEAR(r.next.u[1], 0.25 - 0.01 * 18.0 / 28.0, 1e-14);
  EXPECT_NEAR(r.next.u[2], 0.01 * 24.0 / 76.0, 1e-14);
  EXPECT_DOUBLE_EQ(r.next.t, 0.01);
  EXPECT_EQ(r.clamp_events, 0u);
}

TEST(Step, FixedPoints) {
  const auto cfg = three_cell_config(lb::OuterBC::neumann_zero);
  const auto a = lb::step(cfg, {0.0, {0.0, 0.0, 0.0}});
  for (double x : a.next.u) EXPECT_EQ(x, 0.0);
  const auto b = lb::step(cfg, {0.0, {0.7, 0.7, 0.7}});
  for (double x : b.next.u) EXPECT_DOUBLE_EQ(x, 0.7);
}

TEST(StableDt, ZeroStateUsesRemainingHorizon) {
  const auto cfg = three_cell_config();
  EXPECT_DOUBLE_EQ(lb::stable_dt(cfg, {0.0, 0.0, 0.0}, 4.0), 6.0);
}

TEST(StableDt, QuadraticInSpacing) {
  auto coarse = small_config(2.0, 0.5, lb::OuterBC::neumann_zero, 20);
  coarse.model = lb::build_euclidean(3, 2.0).with_density(lb::Density::constant());
  coarse.grid = lb::make_grid(coarse.model, 4.0, 20);
  auto fine = coarse;
  fine.grid = lb::make_grid(fine.model, 4.0, 40);
  const double a = lb::stable_dt(coarse, lb::RadialField(20, 1.0));
  const double b = lb::stable_dt(fine, lb::RadialField(40, 1.0));
  EXPECT_NEAR(b / a, 0.25, 1e-10);
}

TEST(StableDt, GrowsLikeTwoToTheDUnderDoubling) {
  std::mt19937_64 rng(3);
  for (auto [p, q] : {std::pair{2.0, 0.5}, std::pair{2.5, 0.4}, std::pair{1.5, 1.2}}) {
    const auto cfg = small_config(p, q, lb::OuterBC::dirichlet_zero);
    const double D = 1.0 - q * (p - 1.0);
    for (int k = 0; k < 20; ++k) {
      auto u = random_field(rng, cfg.grid.size(), 0.1, 1.0);
      std::sort(u.rbegin(), u.rend());
      for (std::size_t i = 1; i < u.size(); ++i) u[i] = std::min(u[i], u[i - 1] * 0.97);
      auto u2 = u;
      for (auto& x : u2) x *= 2.0;
      EXPECT_NEAR(lb::stable_dt(cfg, u2) / lb::stable_dt(cfg, u), std::pow(2.0, D), 1e-9) << p << " " << q;
    }
  }
}

// Comparison holds for the explicit scheme with p = 2 away from the degeneracy
// floor; for p != 2 the face diffusivity is not monotone along the segment.
TEST(ExplicitScheme, ComparisonUnderSharedSteps) {
  std::mt19937_64 rng(5);
  for (auto bc : {lb::OuterBC::dirichlet_zero, lb::OuterBC::neumann_zero}) {
    const auto cfg = small_config(2.0, 0.5, bc, 12);
    for (int trial = 0; trial < 100; ++trial) {
      auto u = random_field(rng, 12, 1e-3, 1.0);
      auto v = u;
      std::uniform_real_distribution<double> bump(0.0, 0.5);
      for (auto& x : v) x += bump(rng);
      lb::State su{0.0, u}, sv{0.0, v};
      for (int s = 0; s < 30; ++s) {
        const double dt = std::min(lb::stable_dt(cfg, su.u, su.t), lb::stable_dt(cfg, sv.u, sv.t));
        su = lb::step_with_dt(cfg, su, dt).next;
        sv = lb::step_with_dt(cfg, sv, dt).next;
        for (std::size_t i = 0; i < 12; ++i) ASSERT_LE(su.u[i], sv.u[i] * (1 + 1e-14)) << trial << " " << s;
        if (*std::min_element(su.u.begin(), su.u.end()) < 1e-6) break;
      }
    }
  }
}

TEST(ExplicitScheme, SupNonIncreasing) {
  std::mt19937_64 rng(9);
  for (auto bc : {lb::OuterBC::dirichlet_zero, lb::OuterBC::neumann_zero}) {
    for (auto [p, q] : {std::pair{2.0, 0.5}, std::pair{2.5, 0.4}}) {
      const auto cfg = small_config(p, q, bc);
      lb::State s{0.0, random_field(rng, cfg.grid.size(), 1e-2, 1.0)};
      double sup = *std::max_element(s.u.begin(), s.u.end());
      for (int k = 0; k < 200; ++k) {
        s = lb::step(cfg, s).next;
        const double now = *std::max_element(s.u.begin(), s.u.end());
        ASSERT_LE(now, sup * (1 + 1e-14));
        sup = now;
      }
    }
  }
}

TEST(ExplicitScheme, ClampingIsAccounted) {
  const auto cfg = three_cell_config();
  const lb::State s{0.0, {1.0, 0.25, 0.01}};
  const auto r = lb::step_with_dt(cfg, s, 5.0);
  EXPECT_GT(r.clamp_events, 0u);
  const double before = lb::discrete_mass(cfg.grid, s.u);
  const double after = lb::discrete_mass(cfg.grid, r.next.u);
  EXPECT_NEAR(after + r.outflow - r.clamped, before, 1e-12 * before);
}

TEST(ImplicitScheme, SolvesBackwardEulerSystem) {
  const auto cfg = small_config(2.0, 0.5, lb::OuterBC::dirichlet_zero);
  std::mt19937_64 rng(13);
  const lb::State s{0.0, random_field(rng, cfg.grid.size(), 0.0, 1.0)};
  const auto r = lb::step_implicit(cfg, s, 0.05);
  ASSERT_TRUE(r.has_value());
  const auto F = lb::flux_faces(cfg, r->next.u, r->next.t);
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double w = cfg.grid.cell_rho[i] * cfg.grid.cell_measure[i];
    if (r->next.u[i] > 0.0) {
      EXPECT_NEAR(w * (r->next.u[i] - s.u[i]), 0.05 * (F[i + 1] - F[i]), 1e-10 * w);
    }
  }
}

TEST(ImplicitScheme, PropertiesAlongRuns) {
  std::mt19937_64 rng(17);
  for (auto [p, q] : {std::pair{2.0, 0.5}, std::pair{2.5, 0.4}, std::pair{1.6, 1.1}}) {
    auto cfg = small_config(p, q, lb::OuterBC::dirichlet_zero, 40);
    cfg.t_max = 50.0;
    cfg.record_every = 0.5;
    const auto u0 = random_field(rng, cfg.grid.size(), 0.0, 1.0);
    const auto res = lb::run(cfg, u0);
    ASSERT_TRUE(res.extinction_time.has_value()) << p << " " << q;
    EXPECT_LE(res.max_Phi_increase, 1e-12 * res.trace.Phi.front());
    EXPECT_LE(res.max_sup_increase, 1e-12);
    EXPECT_LE(res.mass_defect, 1e-10 * res.trace.mass.front());
  }
}

TEST(Run, ZeroDataIsExtinctAtStart) {
  auto cfg = small_config(2.0, 0.5, lb::OuterBC::dirichlet_zero);
  const auto res = lb::run(cfg, lb::RadialField(cfg.grid.size(), 0.0));
  ASSERT_TRUE(res.extinction_time.has_value());
  EXPECT_EQ(*res.extinction_time, 0.0);
}

TEST(Run, ZeroHorizonKeepsInitialSampleOnly) {
  auto cfg = small_config(2.0, 0.5, lb::OuterBC::dirichlet_zero);
  cfg.t_max = 0.0;
  const auto res = lb::run(cfg, lb::RadialField(cfg.grid.size(), 0.5));
  EXPECT_FALSE(res.extinction_time.has_value());
  EXPECT_EQ(res.trace.size(), 1u);
}

TEST(Run, RecordsOnTheRecordingGrid) {
  auto cfg = small_config(2.0, 0.5, lb::OuterBC::dirichlet_zero);
  cfg.t_max = 0.3;
  cfg.record_every = 0.1;
  const auto res = lb::run(cfg, lb::RadialField(cfg.grid.size(), 0.5));
  ASSERT_EQ(res.trace.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(res.trace.times[k], 0.1 * k, 1e-15);
}

TEST(Run, ExplicitAndImplicitAgreeOnSmallGrid) {
  auto cfg = small_config(2.0, 0.5, lb::OuterBC::dirichlet_zero, 24);
  cfg.t_max = 100.0;
  cfg.record_every = 1.0;
  std::vector<double> u0(cfg.grid.size());
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = lb::BumpProfile{3.0, 2}(cfg.grid.centers[i]);
  cfg.max_rel_change = 0.005;
  const auto imp = lb::run(cfg, u0);
  cfg.scheme = lb::Scheme::explicit_euler;
  const auto exp = lb::run(cfg, u0);
  ASSERT_TRUE(imp.extinction_time && exp.extinction_time);
  EXPECT_NEAR(*imp.extinction_time / *exp.extinction_time, 1.0, 0.03);
  EXPECT_LE(exp.mass_defect, 1e-10 * exp.trace.mass.front());
}

TEST(Run, RefinementReducesTrackingError) {
  const lb::BarenblattProfile prof(3, 2.0, 0.5, 1.5);
  std::vector<double> errors;
  for (std::size_t cells : {100u, 200u, 400u}) {
    lb::SolverConfig cfg;
    cfg.model = lb::build_euclidean(3, 2.0).with_density(lb::Density::power(1.5));
    cfg.grid = lb::make_grid(cfg.model, 20.0, cells, 2.0);
    cfg.t_max = 0.5;
    cfg.record_every = 0.5;
    cfg.max_rel_change = 0.05 * 100.0 / static_cast<double>(cells);
    cfg.outer_bc = lb::OuterBC::dirichlet_data;
    const double r_ghost = 20.0 + 0.5 * cfg.grid.widths.back();
    cfg.outer_value = [&](double t) { return prof.eval(r_ghost, t); };
    const auto res = lb::run(cfg, lb::cell_averages(prof, cfg.model, cfg.grid, 0.0));
    const auto exact = lb::cell_averages(prof, cfg.model, cfg.grid, 0.5);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double w = cfg.grid.cell_rho[i] * cfg.grid.cell_measure[i];
      num += w * std::abs(res.final_state.u[i] - exact[i]);
      den += w * exact[i];
    }
    errors.push_back(num / den);
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    EXPECT_GE(std::log2(errors[k - 1] / errors[k]), 0.5) << errors[k - 1] << " -> " << errors[k];
  }
}

TEST(Config, Validation) {
  auto cfg = small_config(2.0, 0.5, lb::OuterBC::dirichlet_zero);
  cfg.cfl = 0.0;
  EXPECT_THROW(cfg.validate(), lb::DomainError);
  cfg = small_config(2.0, 0.5, lb::OuterBC::dirichlet_data);
  EXPECT_THROW(cfg.validate(), lb::DomainError);
  cfg = small_config(2.0, 1.0, lb::OuterBC::dirichlet_zero);
  EXPECT_THROW(cfg.validate(), lb::DomainError);
  EXPECT_EQ(lb::parse_outer_bc("neumann_zero"), lb::OuterBC::neumann_zero);
  EXPECT_THROW(lb::parse_scheme("rk4"), lb::DomainError);
}

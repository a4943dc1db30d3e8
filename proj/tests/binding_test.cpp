#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "twobody/binding.hpp"
#include "twobody/dynamics.hpp"

namespace twobody {
namespace {

const double kSqrt2 = std::sqrt(2.0);

TwoBodyConfig config(double s, double m1 = 1.0, double c = 1.0) {
  TwoBodyConfig cfg;
  cfg.m1_inf = m1;
  cfg.s = s;
  cfg.c = c;
  return cfg;
}

// Checks every BindingState invariant against independent expressions.
void expect_invariants(const BindingState& st, const TwoBodyConfig& cfg, double tol) {
  const double M = cfg.m1_inf, s = cfg.s, c2 = cfg.c * cfg.c;
  EXPECT_GE(st.f1, 0.0);
  EXPECT_LE(st.f1, 1.0);
  EXPECT_GE(st.v1_sq, 0.0);
  EXPECT_LE(st.v1_sq, c2);
  EXPECT_NEAR(st.v2_sq, st.v1_sq / (s * s), tol * c2);
  EXPECT_NEAR(st.m1 + st.m2, (1.0 + s) * M - st.eb / c2, tol * M);
  EXPECT_NEAR(M * M * st.v1_sq, s * M * s * M * st.v2_sq, tol * M * M * c2);
  EXPECT_NEAR(M - st.m1, st.f1 * st.eb / c2, tol * M);
  EXPECT_NEAR(s * M - st.m2, (1.0 - st.f1) * st.eb / c2, tol * M);
  // branch: sqrt(1-b^2) in [0,1], sqrt(s^2-b^2) in [sqrt(s^2-1), s]
  const double b2 = st.v1_sq / c2;
  EXPECT_NEAR(st.m1 * st.m1, M * M * (1.0 - b2), tol * M * M);
  EXPECT_NEAR(st.m2 * st.m2, M * M * (s * s - b2), tol * M * M);
  EXPECT_GE(st.m2 / M, std::sqrt(s * s - 1.0) - tol);
}

TEST(CriticalEnergy, KnownValues) {
  EXPECT_NEAR(critical_binding_energy(config(kSqrt2)), kSqrt2, 1e-15);
  EXPECT_DOUBLE_EQ(critical_binding_energy(config(1.0)), 2.0);
  EXPECT_NEAR(critical_binding_energy(config(2.0)), 3.0 - std::sqrt(3.0), 1e-15);
  // approaches m1_inf c^2 (1 + 1/(2s)) for large s
  EXPECT_NEAR(critical_binding_energy(config(1e6)), 1.0 + 0.5e-6, 1e-12);
  EXPECT_NEAR(critical_binding_energy(config(3.0, 2.0, 2.0)), 8.0 * (4.0 - std::sqrt(8.0)), 1e-13);
}

TEST(SolveState, CriticalValues) {
  const auto cfg = config(kSqrt2);
  const BindingState st = solve_state(kSqrt2, cfg);
  EXPECT_NEAR(st.m1, 0.0, 1e-12);
  EXPECT_NEAR(st.m2, 1.0, 1e-12);
  EXPECT_NEAR(st.f1, 1.0 / kSqrt2, 1e-12);
  EXPECT_NEAR(st.v1_sq, 1.0, 1e-12);
  EXPECT_NEAR(v1_squared(critical_binding_energy(cfg), cfg), 1.0, 1e-12);
  for (double s : {1.0, 1.5, 3.0, 17.0}) {
    const auto c = config(s);
    const BindingState crit = solve_state(critical_binding_energy(c), c);
    EXPECT_NEAR(crit.m1, 0.0, c.tol_abs);
    EXPECT_NEAR(crit.m2, std::sqrt(s * s - 1.0), 1e-12);
    EXPECT_NEAR(crit.f1, 1.0 / (1.0 + s - std::sqrt(s * s - 1.0)), 1e-12);
  }
}

TEST(SolveState, HalfUnitAgainstBisection) {
  const auto cfg = config(kSqrt2);
  const double b2 = oracle::beta_sq_by_bisection(0.5, cfg);
  EXPECT_NEAR(b2, 0.515719145, 1e-9);
  const BindingState st = solve_state(0.5, cfg);
  EXPECT_NEAR(st.v1_sq, b2, 1e-12);
  EXPECT_NEAR(st.m1, std::sqrt(1.0 - b2), 1e-12);
  EXPECT_NEAR(st.m2, std::sqrt(2.0 - b2), 1e-12);
  EXPECT_NEAR(st.m1, 0.695903, 1e-6);
  EXPECT_NEAR(st.m2, 1.218311, 1e-6);
  EXPECT_NEAR(st.f1, 0.608194, 1e-6);
  const auto [r1, r2] = oracle::system_residuals(0.5, st.f1, st.v1_sq, cfg);
  EXPECT_LT(std::abs(r1), 1e-12);
  EXPECT_LT(std::abs(r2), 1e-12);
}

TEST(SolveState, AtRest) {
  const auto cfg = config(kSqrt2);
  const BindingState st = solve_state(0.0, cfg);
  EXPECT_EQ(st.v1_sq, 0.0);
  EXPECT_DOUBLE_EQ(st.m1, 1.0);
  EXPECT_DOUBLE_EQ(st.m2, kSqrt2);
  EXPECT_DOUBLE_EQ(st.f1, kSqrt2 / (1.0 + kSqrt2));
  EXPECT_EQ(v1_squared(0.0, cfg), 0.0);
}

TEST(SolveState, EqualMassesShareEvenly) {
  const auto cfg = config(1.0);
  for (double eb = 0.0; eb <= 2.0; eb += 0.125) EXPECT_NEAR(solve_state(eb, cfg).f1, 0.5, 1e-12) << eb;
}

TEST(SolveState, RandomStatesSatisfySystem) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> sdist(1.0, 20.0), unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = config(sdist(rng));
    const double ec = critical_binding_energy(cfg);
    double eb = unit(rng) * ec;
    if (eb == 0.0) eb = 0.5 * ec;
    const BindingState st = solve_state(eb, cfg);
    const auto [r1, r2] = oracle::system_residuals(eb, st.f1, st.v1_sq, cfg);
    EXPECT_LT(std::abs(r1), 1e-10);
    EXPECT_LT(std::abs(r2), 1e-10);
    expect_invariants(st, cfg, 1e-10);
    EXPECT_NEAR(st.v1_sq, oracle::beta_sq_by_bisection(eb, cfg), 1e-10);
  }
}

TEST(SolveState, InvariantsWithUnits) {
  const auto cfg = config(3.5, 2.5, 3.0);
  const double ec = critical_binding_energy(cfg);
  for (int i = 0; i <= 40; ++i) {
    const BindingState st = solve_state(ec * i / 40.0, cfg);
    expect_invariants(st, cfg, 1e-10);
  }
}

TEST(SolveState, MassesDecreaseStrictly) {
  for (double s : {1.0, kSqrt2, 5.0}) {
    const auto cfg = config(s);
    const double ec = critical_binding_energy(cfg);
    BindingState prev = solve_state(0.0, cfg);
    for (int i = 1; i <= 500; ++i) {
      const BindingState st = solve_state(ec * i / 500.0, cfg);
      EXPECT_LT(st.m1, prev.m1);
      EXPECT_LT(st.m2, prev.m2);
      prev = st;
    }
  }
}

TEST(SolveState, GammaFromSpeedMatchesMassRatio) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> sdist(1.0, 20.0), unit(0.0, 0.999);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = config(sdist(rng));
    const BindingState st = solve_state(unit(rng) * critical_binding_energy(cfg), cfg);
    const double g1 = sta::lorentz_gamma(std::sqrt(st.v1_sq), cfg.c);
    const double g2 = sta::lorentz_gamma(std::sqrt(st.v2_sq), cfg.c);
    EXPECT_NEAR(g1, cfg.m1_inf / st.m1, 1e-10 * g1);
    EXPECT_NEAR(g2, cfg.m2_inf() / st.m2, 1e-10 * g2);
    EXPECT_NEAR(st.gamma1, g1, 1e-10 * g1);
  }
}

TEST(V1Squared, CelestialLimit) {
  const auto cfg = config(1e6);
  for (int i = 0; i <= 100; ++i) {
    const double eb = i / 100.0;
    EXPECT_LT(std::abs(v1_squared(eb, cfg) - v1_squared_celestial(eb, 1.0, 1.0)), 1e-5) << eb;
  }
  EXPECT_EQ(v1_squared_celestial(0.0, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(v1_squared_celestial(4.0, 1.0, 2.0), 4.0);
  EXPECT_THROW(v1_squared_celestial(1.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(v1_squared_celestial(-0.1, 1.0, 1.0), DomainError);
}

TEST(SolveState, RejectsOutOfRange) {
  const auto cfg = config(kSqrt2);
  EXPECT_THROW(solve_state(-1e-3, cfg), DomainError);
  EXPECT_THROW(solve_state(kSqrt2 + 1e-6, cfg), DomainError);
  EXPECT_THROW(v1_squared(2.0, cfg), DomainError);
  // within tol_abs of the boundary the value is clamped
  EXPECT_EQ(solve_state(-1e-14, cfg).eb, 0.0);
  EXPECT_THROW(solve_state(0.5, config(0.5)), DomainError);
  EXPECT_THROW(critical_binding_energy(config(2.0, -1.0)), DomainError);
  try {
    solve_state(3.0, cfg);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("1.41421356"), std::string::npos) << e.what();
  }
}

TEST(BodyBindingEnergy, RestAndBoosted) {
  const auto u = sta::FourVector::time_axis();
  EXPECT_EQ(body_binding_energy(u, u, u), 0.0);
  const auto v = sta::Rotor::boost({{0.0, 1.0, 0.0}}, std::atanh(0.6)).apply(u);
  const auto p = 0.8 * v;  // m = m_inf/gamma with m_inf = 1
  EXPECT_NEAR(body_binding_energy(p, u, v), 0.2, 1e-15);
  EXPECT_THROW(body_binding_energy(p, 2.0 * u, v), DomainError);
}

TEST(BodyBindingEnergy, SumsToStateEnergy) {
  for (double s : {1.0, kSqrt2, 4.0}) {
    const auto cfg = config(s);
    const double ec = critical_binding_energy(cfg);
    for (double frac : {0.1, 0.4, 0.7, 0.95}) {
      const BindingState st = solve_state(frac * ec, cfg);
      const auto [p1, p2] = four_momenta(st, cfg);
      const auto u = sta::FourVector::time_axis();
      const auto v1 = (1.0 / std::sqrt(sta::dot(p1, p1))) * p1;
      const auto v2 = (1.0 / std::sqrt(sta::dot(p2, p2))) * p2;
      EXPECT_NEAR(body_binding_energy(p1, u, v1) + body_binding_energy(p2, u, v2), st.eb, 1e-10);
      EXPECT_NEAR(body_binding_energy(p1, u, v1), st.f1 * st.eb, 1e-10);
    }
  }
}

TEST(FourMomenta, ConserveEnergyAndMomentum) {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> sdist(1.0, 20.0), unit(0.0, 0.999);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cfg = config(sdist(rng));
    const BindingState st = solve_state(unit(rng) * critical_binding_energy(cfg), cfg);
    const auto [p1, p2] = four_momenta(st, cfg, oracle::random_direction(rng));
    const std::vector<sta::FourVector> p{p1, p2};
    const std::vector<double> m{cfg.m1_inf, cfg.m2_inf()};
    const auto res = sta::check_system_conservation(p, sta::FourVector::time_axis(), m, cfg.c);
    EXPECT_LT(std::abs(res.energy), 1e-10);
    EXPECT_LT(res.momentum.norm(), 1e-10);
    EXPECT_NEAR(std::sqrt(sta::dot(p1, p1)), st.m1, 1e-10);
    EXPECT_NEAR(std::sqrt(sta::dot(p2, p2)), st.m2, 1e-10);
  }
}

TEST(PowerIdentity, AtRest) {
  const PowerBalance pb = binding_power_identity(BindingState{}, 0.0, 0.0);
  EXPECT_EQ(pb.lhs, 0.0);
  EXPECT_EQ(pb.rhs, 0.0);
}

TEST(PowerIdentity, ClosedFormTrajectories) {
  TwoBodyConfig eq = config(1.0);
  for (double r = 0.05; r < 20.0; r *= 1.3) {
    const BindingState st = equal_mass_state(r, eq);
    const double force = newton_force(st.m1, st.m2, r, eq.G);
    // slope of the closed form, differentiated by hand
    const double den = eq.G + 2.0 * r;
    const double slope = -4.0 * eq.G / (den * den);
    const double dr_dt = -2.0 * std::sqrt(st.v1_sq);
    const PowerBalance pb = binding_power_identity(st, force, dr_dt, slope);
    EXPECT_NEAR(pb.lhs, pb.rhs, 1e-8) << r;
  }
  TwoBodyConfig cel = config(1e4);
  for (double r = 1e3; r < 1e6; r *= 1.5) {
    const BindingState st = celestial_state(r, cel);
    const double force = newton_force(st.m1, st.m2, r, cel.G);
    const double x = cel.s / r;
    const double slope = -std::exp(-x) * cel.s / (r * r);
    const double dr_dt = -(std::sqrt(st.v1_sq) + std::sqrt(st.v2_sq));
    const PowerBalance pb = binding_power_identity(st, force, dr_dt, slope);
    EXPECT_NEAR(pb.lhs, pb.rhs, 1e-8) << r;
  }
}

TEST(PrintedForms, ReproduceTheDocumentedDiscrepancy) {
  const auto cfg = config(kSqrt2);
  EXPECT_NEAR(printed::m2(0.0, cfg), -kSqrt2, 1e-15);
  EXPECT_NEAR(printed::m1(0.0, cfg), 1.0 + 2.0 * kSqrt2, 1e-14);
  EXPECT_GT(std::abs(printed::f1(1e-8, cfg)), 1e6);
  for (double eb : {0.1, 0.7, 1.3}) EXPECT_NEAR(printed::m2(eb, cfg), -solve_state(eb, cfg).m2, 1e-12);
}

}  // namespace
}  // namespace twobody

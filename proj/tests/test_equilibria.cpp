#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hcvrd/hcvrd.hpp"
#include "oracles.hpp"

using namespace hcvrd;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST(UninfectedEquilibrium, Values) {
  const auto e = uninfected_equilibrium(oracle::set1());
  EXPECT_DOUBLE_EQ(e.H, 10.0);
  EXPECT_EQ(e.I, 0.0);
  EXPECT_EQ(e.V, 0.0);
}

TEST(Psi, EndpointValues) {
  const auto p = oracle::set2();
  EXPECT_NEAR(psi(p, 0.0), -(p.alpha + p.rho) * p.mu, 1e-15);
  EXPECT_GT(psi(p, 10.0), 0.0);
  EXPECT_LT(psi(oracle::set1(), 10.0), 0.0);
}

TEST(Psi, RejectsArgumentsOutsideRange) {
  const auto p = oracle::set2();
  EXPECT_THROW(psi(p, -1e-9), DomainError);
  EXPECT_THROW(psi(p, 10.0 + 1e-9), DomainError);
}

TEST(Psi, StrictlyIncreasingWhenYieldPositive) {
  std::mt19937_64 rng(23);
  int checked = 0;
  while (checked < 50) {
    const auto p = oracle::draw_params(rng);
    if (net_yield(p) <= 0.0) continue;
    ++checked;
    const double L = carrying_level(p);
    double prev = psi(p, 0.0);
    for (int j = 1; j <= 1000; ++j) {
      const double v = psi(p, L * j / 1000.0);
      ASSERT_GT(v, prev - 1e-12 * std::abs(prev));
      prev = v;
    }
  }
}

TEST(InfectedEquilibrium, SetTwoMatchesIndependentSolvers) {
  const auto p = oracle::set2();
  const auto e = infected_equilibrium(p);
  ASSERT_TRUE(e.has_value());
  const auto o = oracle::estar(p);
  EXPECT_LT(rel(e->H, o.H), 1e-9);
  EXPECT_LT(rel(e->I, o.I), 1e-9);
  EXPECT_LT(rel(e->V, o.V), 1e-9);
  EXPECT_LT(rel(e->H, oracle::kSet2Estar.H), 1e-9);
  EXPECT_LT(rel(e->I, oracle::kSet2Estar.I), 1e-9);
  EXPECT_LT(rel(e->V, oracle::kSet2Estar.V), 1e-9);
  EXPECT_NEAR(e->I, (50.0 - 5.0 * e->H) / 0.05, 1e-9 * e->I);
  EXPECT_NEAR(e->V, 0.94 * e->I / 2.0, 1e-9 * e->V);
}

TEST(InfectedEquilibrium, QuotedStateIsNotAFixedPointOfSetTwo) {
  // The state (5, 500, 235) is quoted for set two; its residual is far from zero.
  const auto p = oracle::set2();
  const auto f = reaction(p, {5.0, 500.0, 235.0});
  EXPECT_GT(sup_norm(f), 1.0);
  EXPECT_NEAR(incidence(p, 5.0, 235.0), 6.8031, 1e-3);
}

TEST(InfectedEquilibrium, AbsentForSetOne) {
  EXPECT_FALSE(infected_equilibrium(oracle::set1()).has_value());
  const auto r = analyze_equilibria(oracle::set1());
  EXPECT_FALSE(r.exists_Estar);
  EXPECT_EQ(r.reason, AbsenceReason::r0_not_above_one);
}

TEST(InfectedEquilibrium, ExistsExactlyWhenR0AboveOne) {
  std::mt19937_64 rng(29);
  int with = 0, without = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto p = oracle::draw_params(rng);
    const double R0 = basic_reproduction_number(p);
    if (std::abs(R0 - 1.0) < 1e-6) continue;
    const auto r = analyze_equilibria(p);
    ASSERT_EQ(r.exists_Estar, R0 > 1.0) << "R0=" << R0;
    if (!r.exists_Estar) {
      ++without;
      continue;
    }
    ++with;
    const auto& e = *r.Estar;
    EXPECT_GT(e.H, 0.0);
    EXPECT_LT(e.H, carrying_level(p));
    EXPECT_GT(e.I, 0.0);
    EXPECT_GT(e.V, 0.0);
    const double scale = residual_scale(p, e);
    EXPECT_LE(r.reaction_residual, 1e-9 * scale);
    EXPECT_NEAR(e.I, (p.lambda - p.d * e.H) / p.alpha, 1e-9 * e.I);
    EXPECT_NEAR(p.mu * e.V, net_yield(p) * e.I, 1e-9 * p.mu * e.V);
    EXPECT_NEAR(incidence(p, e.H, e.V), (p.alpha + p.rho) * e.I, 1e-9 * scale);
  }
  EXPECT_GT(with, 50);
  EXPECT_GT(without, 50);
}

TEST(InfectedEquilibrium, AbsentAtExactlyUnitR0) {
  auto p = oracle::set1();
  p.beta = oracle::critical_beta(p);
  // psi(Lambda) rounds to a value within the bisection noise; no positive state appears.
  const auto r = analyze_equilibria(p);
  if (r.exists_Estar) EXPECT_LT(std::abs(r.Estar->I), 1e-6);
  else EXPECT_EQ(r.reason, AbsenceReason::r0_not_above_one);
}

TEST(Bisection, ReportsResidualAndIterations) {
  const auto r = bisect_psi(oracle::set2());
  EXPECT_GT(r.iterations, 10);
  EXPECT_LE(r.residual, 1e-9);
}

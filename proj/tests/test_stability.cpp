#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hcvrd/hcvrd.hpp"
#include "oracles.hpp"

using namespace hcvrd;

namespace {

Eigen::Matrix3d mode_matrix(const ModelParams& p, const PointState& e, double mu_l) {
  Eigen::Matrix3d J = oracle::fd_jacobian(p, e);
  J(0, 0) -= mu_l * p.D1;
  J(1, 1) -= mu_l * p.D2;
  J(2, 2) -= mu_l * p.D3;
  return J;
}

void expect_same_roots(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b,
                       double tol) {
  ASSERT_EQ(a.size(), b.size());
  a = oracle::sorted(Eigen::Map<Eigen::VectorXcd>(a.data(), static_cast<Eigen::Index>(a.size())));
  b = oracle::sorted(Eigen::Map<Eigen::VectorXcd>(b.data(), static_cast<Eigen::Index>(b.size())));
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_LT(std::abs(a[i] - b[i]), tol * std::max(1.0, std::abs(b[i])))
        << "root " << i << ": " << a[i] << " vs " << b[i];
}

}  // namespace

TEST(Spectrum, NeumannEigenvalues) {
  const auto s = neumann_spectrum(1.0, 3);
  ASSERT_EQ(s.eigenvalues.size(), 3u);
  EXPECT_EQ(s.eigenvalues[0], 0.0);
  EXPECT_NEAR(s.eigenvalues[1], std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_NEAR(s.eigenvalues[2], 4 * std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_NEAR(neumann_spectrum(2.0, 2).eigenvalues[1], std::numbers::pi * std::numbers::pi / 4, 1e-12);
  EXPECT_THROW(neumann_spectrum(0.0, 3), DomainError);
  EXPECT_THROW(neumann_spectrum(1.0, 0), DomainError);
}

TEST(RouthHurwitz, HandExamples) {
  EXPECT_TRUE(routh_hurwitz_cubic(6, 11, 6));   // roots -1, -2, -3
  EXPECT_FALSE(routh_hurwitz_cubic(1, 1, 2));
  EXPECT_TRUE(routh_hurwitz_cubic(3, 3, 1));    // triple root -1
  EXPECT_FALSE(routh_hurwitz_cubic(0, 1, 0));   // roots 0, +-i
  EXPECT_FALSE(routh_hurwitz_cubic(2, 1, 2));   // roots -2, +-i: boundary
}

TEST(RouthHurwitz, AgreesWithCompanionRoots) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  int agree = 0;
  for (int n = 0; n < 2000; ++n) {
    const double a2 = u(rng), a1 = u(rng), a0 = u(rng);
    const auto roots = oracle::monic_roots({a0, a1, a2});
    double max_re = -1e300;
    for (auto r : roots) max_re = std::max(max_re, r.real());
    if (std::abs(max_re) < 1e-8) continue;
    ASSERT_EQ(routh_hurwitz_cubic(a2, a1, a0), max_re < 0.0) << a2 << ' ' << a1 << ' ' << a0;
    ++agree;
  }
  EXPECT_GT(agree, 1900);
}

TEST(E0Characteristic, SignFollowsR0AtModeOne) {
  EXPECT_EQ(e0_characteristic(oracle::set1(), 0.0).verdict, Verdict::stable);
  EXPECT_EQ(e0_characteristic(oracle::set2(), 0.0).verdict, Verdict::unstable);
  EXPECT_NEAR(e0_characteristic(oracle::set2(), 0.0).c_coef, -1.00795488, 1e-8);

  std::mt19937_64 rng(37);
  for (int n = 0; n < 1000; ++n) {
    const auto p = oracle::draw_params(rng);
    const double R0 = basic_reproduction_number(p);
    const auto m = e0_characteristic(p, 0.0);
    if (std::abs(R0 - 1.0) < 1e-9) continue;
    const double L = p.lambda / p.d, den = p.alpha0 + p.alpha1 * L;
    const double K = (p.alpha + p.rho) * (p.mu * den + p.u * (1 - p.eta) * p.beta * L) / den;
    EXPECT_NEAR(m.c_coef, K * (1 - R0), 1e-12 * m.c_scale + 1e-12 * K);
    EXPECT_EQ(m.verdict == Verdict::stable, R0 < 1.0);
  }
}

TEST(E0Characteristic, MarginalAtUnitR0) {
  auto p = oracle::set1();
  p.beta = oracle::critical_beta(p);
  EXPECT_EQ(e0_characteristic(p, 0.0).verdict, Verdict::marginal);
  EXPECT_EQ(e0_characteristic(p, std::numbers::pi * std::numbers::pi).verdict, Verdict::stable);
}

TEST(E0Characteristic, CoefficientsGrowWithMode) {
  std::mt19937_64 rng(41);
  for (int n = 0; n < 200; ++n) {
    const auto p = oracle::draw_params(rng);
    const auto s = neumann_spectrum(1.0, 32);
    double pb = -1e300, pc = -1e300;
    for (double mu_l : s.eigenvalues) {
      const auto m = e0_characteristic(p, mu_l);
      EXPECT_GE(m.b_coef, pb);
      EXPECT_GE(m.c_coef, pc - 1e-12 * m.c_scale);
      pb = m.b_coef;
      pc = m.c_coef;
    }
  }
}

TEST(E0Characteristic, RootsMatchJacobianEigenvalues) {
  for (const auto& p : {oracle::set1(), oracle::set2()}) {
    const auto e0 = uninfected_equilibrium(p);
    for (double mu_l : neumann_spectrum(1.0, 4).eigenvalues) {
      const auto m = e0_characteristic(p, mu_l);
      auto roots = oracle::monic_roots({m.c_coef, m.b_coef});
      roots.push_back(m.lambda0_root);
      expect_same_roots(roots, oracle::eigenvalues(mode_matrix(p, e0, mu_l)), 1e-8);
    }
  }
}

TEST(EStarCharacteristic, RootsMatchJacobianEigenvalues) {
  std::mt19937_64 rng(43);
  std::vector<ModelParams> cases{oracle::set2()};
  while (cases.size() < 30) {
    const auto p = oracle::draw_params(rng);
    if (basic_reproduction_number(p) > 1.05) cases.push_back(p);
  }
  for (const auto& p : cases) {
    const auto e = *infected_equilibrium(p);
    for (double mu_l : neumann_spectrum(1.0, 3).eigenvalues) {
      const auto m = estar_characteristic(p, e, mu_l);
      expect_same_roots(oracle::monic_roots({m.a0, m.a1, m.a2}),
                        oracle::eigenvalues(mode_matrix(p, e, mu_l)), 1e-7);
    }
  }
}

TEST(EStarCharacteristic, SetTwoEigenvaluesAtHomogeneousMode) {
  const auto p = oracle::set2();
  const auto m = estar_characteristic(p, *infected_equilibrium(p), 0.0);
  EXPECT_TRUE(m.routh_ok);
  EXPECT_NEAR(m.a2, 5.0909 + 0.0526 + 2.0211, 1e-3);
  expect_same_roots(oracle::monic_roots({m.a0, m.a1, m.a2}),
                    {{-5.0909, 0}, {-2.0211, 0}, {-0.0526, 0}}, 1e-3);
}

TEST(EStarCharacteristic, ShortenedCoefficientsMissCrossTerms) {
  const auto p = oracle::set2();
  const auto e = *infected_equilibrium(p);
  const auto m = estar_characteristic(p, e, 0.0);
  const auto eig = oracle::eigenvalues(mode_matrix(p, e, 0.0));
  const auto short_roots = oracle::monic_roots({m.a0_short, m.a1_short, m.a2});
  double gap = 0.0;
  for (std::size_t i = 0; i < 3; ++i) gap = std::max(gap, std::abs(short_roots[i] - eig[i]));
  EXPECT_GT(gap, 1e-5);
  EXPECT_NEAR(m.a1 - m.a1_short, -p.rho * m.a_lin - p.u * m.a_lin * m.b_lin, 1e-12);
  EXPECT_TRUE(m.routh_ok_short);
}

TEST(Classify, ReferenceSets) {
  const auto spec = neumann_spectrum(1.0, 64);
  const auto r1 = classify(oracle::set1(), spec, analyze_equilibria(oracle::set1()));
  EXPECT_EQ(r1.e0_verdict, Verdict::stable);
  EXPECT_EQ(r1.e0_first_unstable_mode, 0u);
  EXPECT_FALSE(r1.estar_verdict.has_value());
  EXPECT_FALSE(r1.e0_global_condition);  // tau0 ~ 2

  const auto r2 = classify(oracle::set2(), spec, analyze_equilibria(oracle::set2()));
  EXPECT_EQ(r2.e0_verdict, Verdict::unstable);
  EXPECT_EQ(r2.e0_first_unstable_mode, 1u);
  ASSERT_TRUE(r2.estar_verdict.has_value());
  EXPECT_EQ(*r2.estar_verdict, Verdict::stable);
  EXPECT_TRUE(r2.estar_weak_condition);
  EXPECT_FALSE(r2.estar_global_condition);  // u = 1
  EXPECT_THROW(classify(oracle::set2(), ModeSpectrum{}, analyze_equilibria(oracle::set2())),
               DomainError);
}

TEST(Classify, StabilityCsvRows) {
  const auto spec = neumann_spectrum(1.0, 8);
  std::ostringstream os;
  write_stability_csv(os, classify(oracle::set2(), spec, analyze_equilibria(oracle::set2())));
  std::istringstream is(os.str());
  std::string line;
  int rows = 0, e0 = 0;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("equilibrium,mode,mu_l", 0), 0u);
  while (std::getline(is, line)) {
    ++rows;
    if (line.rfind("E0,", 0) == 0) ++e0;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 16);
  }
  EXPECT_EQ(rows, 16);
  EXPECT_EQ(e0, 8);
}

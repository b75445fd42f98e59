#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mhdblow/test_function.hpp"

using namespace mhdblow;

namespace {

// ∫_{S²} e^{ω·x} dω = 2π ∫_{-1}^{1} e^{Rμ} dμ, composite Simpson in μ.
double sphere_mean_simpson(double R, int n = 20000) {
  const double h = 2.0 / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double mu = -1.0 + k * h;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * std::exp(R * mu);
  }
  return 2.0 * pi * s * h / 3.0;
}

// ∫_{S²} e^{ω·x} ω dω = (x/R)·2π ∫ μ e^{Rμ} dμ.
double sphere_first_moment_simpson(double R, int n = 20000) {
  const double h = 2.0 / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double mu = -1.0 + k * h;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * mu * std::exp(R * mu);
  }
  return 2.0 * pi * s * h / 3.0;
}

}  // namespace

TEST(EvalProfile, OriginIsSphereArea) {
  const auto p = eval_profile(0.0);
  EXPECT_DOUBLE_EQ(p.F, 4.0 * pi);
  EXPECT_EQ(p.F_R, 0.0);
  EXPECT_NEAR(p.F_RR, 4.0 * pi / 3.0, 1e-15);
}

TEST(EvalProfile, UnitRadiusMatchesIndependentQuadrature) {
  const double oracle = sphere_mean_simpson(1.0);
  EXPECT_NEAR(eval_profile(1.0).F, oracle, 1e-12 * oracle);
  EXPECT_NEAR(eval_profile(1.0).F, 4.0 * pi * std::sinh(1.0), 1e-13);
  EXPECT_NEAR(eval_profile(1.0).F, 14.76801, 1e-5);
}

TEST(EvalProfile, RadialOdeAtTwo) {
  const auto p = eval_profile(2.0);
  EXPECT_LE(std::abs(p.F_RR + 2.0 * p.F_R / 2.0 - p.F), 1e-12 * p.F);
}

TEST(EvalProfile, RejectsBadRadius) {
  EXPECT_THROW(eval_profile(-1e-3), DomainError);
  EXPECT_THROW(eval_profile(NAN), DomainError);
  EXPECT_THROW(eval_profile(INFINITY), DomainError);
}

TEST(EvalProfile, SeriesBranchJoinsClosedForm) {
  // Series evaluated at the switch radius against the closed form there.
  const auto s = detail::sinhc_series(0.5);
  const auto b = eval_profile(0.5);
  EXPECT_NEAR(four_pi * s.g, b.F, 1e-14 * b.F);
  EXPECT_NEAR(four_pi * s.dg, b.F_R, 1e-13 * b.F_R);
  EXPECT_NEAR(four_pi * s.d2g, b.F_RR, 1e-13 * b.F_RR);
}

TEST(EvalProfile, LogSpacedResidualPositivityConvexity) {
  for (int k = 0; k < 1000; ++k) {
    const double R = 1e-3 * std::pow(5e4, k / 999.0);
    const auto p = eval_profile(R);
    EXPECT_LE(std::abs(p.F_RR + 2.0 * p.F_R / R - p.F), 1e-9 * std::max(1.0, p.F)) << R;
    EXPECT_GT(p.F, 0.0);
    EXPECT_GT(p.F_RR, 0.0);
  }
}

TEST(EvalProfile, FiniteDifferencesConvergeAtSecondOrder) {
  for (double R : {0.3, 1.0, 3.0}) {
    const auto p = eval_profile(R);
    double e1[3], e2[3];
    const double hs[3] = {1e-2, 5e-3, 2.5e-3};
    for (int k = 0; k < 3; ++k) {
      const double h = hs[k];
      const double fp = eval_profile(R + h).F, fm = eval_profile(R - h).F;
      e1[k] = std::abs((fp - fm) / (2 * h) - p.F_R);
      e2[k] = std::abs((fp - 2 * p.F + fm) / (h * h) - p.F_RR);
    }
    for (int k = 0; k < 2; ++k) {
      EXPECT_GT(std::log2(e1[k] / e1[k + 1]), 1.9) << R;
      EXPECT_GT(std::log2(e2[k] / e2[k + 1]), 1.9) << R;
    }
  }
}

TEST(QuadOracle, OriginGivesWeightSum) {
  EXPECT_NEAR(quad_F_oracle({0, 0, 0}, 2, 4), 4.0 * pi, 1e-14);
  EXPECT_NEAR(quad_F_oracle({0, 0, 0}, 64, 128), 4.0 * pi, 1e-13);
}

TEST(QuadOracle, MatchesClosedForm) {
  const double F5 = eval_profile(5.0).F;
  EXPECT_NEAR(quad_F_oracle({0, 0, 5}, 64, 128), F5, 1e-10 * F5);
  for (double R : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    const double F = eval_profile(R).F;
    EXPECT_NEAR(quad_F_oracle({R * 0.6, 0.0, R * 0.8}, 64, 128), F, 1e-10 * F) << R;
  }
}

TEST(QuadOracle, RotationInvariant) {
  const double a = quad_F_oracle({3, 4, 0}, 64, 128), b = quad_F_oracle({0, 0, 5}, 64, 128);
  EXPECT_NEAR(a, b, 1e-10 * b);
}

TEST(QuadOracle, RejectsTooFewNodes) {
  EXPECT_THROW(quad_F_oracle({1, 0, 0}, 1, 8), ConfigError);
  EXPECT_THROW(quad_F_oracle({1, 0, 0}, 8, 3), ConfigError);
}

TEST(GradF, OriginIsZero) {
  const Vec3 g = grad_F({0, 0, 0});
  EXPECT_EQ(g.x, 0.0);
  EXPECT_EQ(g.y, 0.0);
  EXPECT_EQ(g.z, 0.0);
}

TEST(GradF, OnAxis) {
  const Vec3 g = grad_F({0, 0, 2});
  EXPECT_EQ(g.x, 0.0);
  EXPECT_EQ(g.y, 0.0);
  EXPECT_NEAR(g.z, eval_profile(2.0).F_R, 1e-14 * g.z);
}

TEST(GradF, MatchesVectorQuadrature) {
  const Vec3 x{1, 1, 1};
  const Vec3 g = grad_F(x), q = quad_grad_F_oracle(x, 64, 128);
  EXPECT_NEAR(g.x, q.x, 1e-9);
  EXPECT_NEAR(g.y, q.y, 1e-9);
  EXPECT_NEAR(g.z, q.z, 1e-9);
  const double R = std::sqrt(3.0), m = sphere_first_moment_simpson(R) / R;
  EXPECT_NEAR(g.x, m, 1e-9);
}

TEST(GradF, RadialComponentIsFRTimesROverR) {
  const double r = 0.8, z = -0.6, R = 1.0;
  const Vec3 g = grad_F({r, 0.0, z});
  EXPECT_NEAR(g.x, eval_profile(R).F_R * r / R, 1e-14);
}

TEST(AsymptoticRatio, LargeRadiusExactValue) {
  // The exact value at R = 50 is 2π(1 − e^{−100})(51/50), not 2π.
  EXPECT_NEAR(asymptotic_ratio(50.0), 2.0 * pi * 51.0 / 50.0, 1e-12);
  EXPECT_NEAR(asymptotic_ratio(1e8), 2.0 * pi, 1e-6);
}

TEST(AsymptoticRatio, SmallRadius) {
  const double R = 0.01;
  const double direct = 4.0 * pi * std::sinh(R) / R * (1.0 + R) * std::exp(-R);
  EXPECT_NEAR(asymptotic_ratio(R), direct, 1e-13);
  EXPECT_NEAR(asymptotic_ratio(R), 12.56, 1e-2);
}

TEST(AsymptoticRatio, BracketIsPositive) {
  const auto [lo, hi] = asymptotic_bracket();
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(lo, hi);
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(std::log(0.01), std::log(50.0));
  for (int k = 0; k < 200; ++k) {
    const double v = asymptotic_ratio(std::exp(u(rng)));
    EXPECT_GE(v, lo * (1 - 1e-12));
    EXPECT_LE(v, hi * (1 + 1e-12));
  }
}

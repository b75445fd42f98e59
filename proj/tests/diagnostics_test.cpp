#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mhdblow/diagnostics.hpp"
#include "mhdblow/run.hpp"

using namespace mhdblow;

namespace {

const EosParams kEos = EosParams::normalized(2.0);

FieldState background(const Grid2D& g, const EosParams& eos = kEos) {
  FieldState s(g, prim_to_cons(background_state(eos)));
  apply_boundaries(s, eos);
  return s;
}

// Sets ρ = 1 + a·b(|x − (0, z0)|/L) with b the cos² bump.
void add_density_bump(FieldState& s, double a, double z0, double L) {
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(s.grid.nz); ++j)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(s.grid.nr); ++i) {
      const double b = bump(BumpFamily::cos2, std::hypot(s.grid.r(i), s.grid.z(j) - z0), L);
      auto& c = s.at(i, j);
      const double S = c.rhoS / c.rho;
      c.rho += a * b;
      c.rhoS = c.rho * S;
    }
}

std::vector<FunctionalSample> samples_at(std::initializer_list<double> ts) {
  std::vector<FunctionalSample> v;
  for (double t : ts) v.push_back({t, t * t, 2 * t, 0, 0});
  return v;
}

}  // namespace

TEST(Functionals, BackgroundIsZero) {
  const auto s = background(Grid2D::make(32, 64, 2, 2));
  const auto f = compute_XY(s);
  EXPECT_EQ(f.X, 0.0);
  EXPECT_EQ(f.Y, 0.0);
  const FunctionalQuadrature q(s.grid);
  EXPECT_EQ(magnetic_term(s, kEos, q), 0.0);
  EXPECT_EQ(quadratic_term(s, q), 0.0);
}

TEST(Functionals, XOfDensityBumpMatchesRefinedQuadrature) {
  const double eps = 0.01;
  double x[2];
  for (int k = 0; k < 2; ++k) {
    const std::size_t n = 200u << k;
    auto s = background(Grid2D::make(n, 2 * n, 1.0, 1.0));
    add_density_bump(s, eps, 0.0, 1.0);
    x[k] = compute_XY(s).X;
    EXPECT_EQ(compute_XY(s).Y, 0.0);
  }
  // 4πε∫ b F R² dR with Gauss–Legendre on 64 nodes per unit subinterval of 20
  const auto gl = gauss_legendre(64);
  double oracle = 0.0;
  for (int m = 0; m < 20; ++m) {
    const auto rule = mapped(gl, m / 20.0, (m + 1) / 20.0);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double R = rule.nodes[k];
      oracle += rule.weights[k] * bump(BumpFamily::cos2, R, 1.0) * 4 * pi * std::sinh(R) / R * R * R;
    }
  }
  oracle *= 4 * pi * eps;
  EXPECT_NEAR(x[1] + (x[1] - x[0]) / 3.0, oracle, 1e-6 * oracle);
}

TEST(Functionals, RadialOutflowGivesPositiveY) {
  auto s = background(Grid2D::make(32, 64, 2, 2));
  for (std::ptrdiff_t j = 0; j < 64; ++j)
    for (std::ptrdiff_t i = 0; i < 32; ++i) s.at(i, j).mr = 0.01 * bump(BumpFamily::cos2, std::hypot(s.grid.r(i), s.grid.z(j)), 1.0);
  EXPECT_GT(compute_XY(s).Y, 0.0);
}

TEST(Functionals, XIsAdditiveOverDisjointSupports) {
  const auto g = Grid2D::make(64, 128, 3, 3);
  auto a = background(g), b = background(g), ab = background(g);
  add_density_bump(a, 0.02, -1.2, 0.8);
  add_density_bump(b, -0.03, 1.1, 0.7);
  add_density_bump(ab, 0.02, -1.2, 0.8);
  add_density_bump(ab, -0.03, 1.1, 0.7);
  const double xa = compute_XY(a).X, xb = compute_XY(b).X, xab = compute_XY(ab).X;
  EXPECT_NEAR(xab, xa + xb, 1e-12 * (std::abs(xa) + std::abs(xb)));
}

TEST(DXY, BackgroundResidualIsZero) {
  std::vector<FunctionalSample> v(5);
  for (int k = 0; k < 5; ++k) v[k].t = 0.1 * k;
  const auto r = check_dXY(v, 0.0);
  EXPECT_EQ(r.margin, 0.0);
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(DXY, ExactForQuadratics) {
  // X = t², Y = 2t: the centered difference is exact.
  const auto r = check_dXY(samples_at({0.9, 1.0, 1.1}), 1e-12);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_NEAR(r.lhs, 2.0, 1e-12);
}

TEST(DXY, NonUniformOrShuffledRejected) {
  EXPECT_THROW(check_dXY(samples_at({0.0, 0.2, 0.1})), ConfigError);
  EXPECT_THROW(check_dXY(samples_at({0.0, 0.1, 0.3})), ConfigError);
  EXPECT_THROW(check_dXY(samples_at({0.0, 0.1})), ConfigError);
}

TEST(DXY, ResidualQuartersUnderHalving) {
  SimulationConfig c;
  c.grid = Grid2D::make(80, 160, 5.0, 5.0);
  c.initial.epsilon = 0.01;
  c.numerics.t_end = 1.2;
  c.numerics.fixed_dt = 0.0125;
  c.diagnostics.cadence = 0.025;
  const auto r = run(c);
  ASSERT_EQ(r.status, RunStatus::ok);
  const auto conv = dXY_convergence(r.samples(), 0.8, 0.4);
  // Differencing out the Δ-independent spatial floor leaves the Δ² stencil error.
  const double ratio = std::abs(conv.residuals[0] - conv.residuals[1]) /
                        std::abs(conv.residuals[1] - conv.residuals[2]);
  EXPECT_NEAR(ratio, 4.0, 0.4);
  EXPECT_GE(conv.order_floor_removed, 1.9);
}

TEST(EntropySupportMass, BackgroundPassesWithZeroMargins) {
  const auto s = background(Grid2D::make(16, 32, 2, 2));
  const FunctionalQuadrature q(s.grid);
  const auto r = check_entropy_support_mass(s, kEos, q, 0.0);
  EXPECT_EQ(r.entropy.margin, 0.0);
  EXPECT_EQ(r.mass.margin, 0.0);
  EXPECT_EQ(r.support.rhs, 0.0);
  for (const auto* x : {&r.entropy, &r.support, &r.mass}) EXPECT_EQ(x->verdict, Verdict::pass);
}

TEST(EntropySupportMass, ZeroEntropyPerturbationKeepsMinimum) {
  SimulationConfig c;
  c.eos = EosParams::normalized(2.0, 0.25);
  c.grid = Grid2D::make(32, 64, 2.5, 2.5);
  c.initial.epsilon = 0.05;
  c.initial.amp.S = 0.0;
  c.numerics.t_end = 0.5;
  c.diagnostics.cadence = 0.1;
  const auto r = run(c);
  for (const auto& row : r.series) EXPECT_NEAR(row.min_S, 0.25, 1e-10);
}

TEST(EntropySupportMass, InjectedEntropyDeficitFails) {
  auto s = background(Grid2D::make(16, 32, 2, 2));
  s.at(4, 10).rhoS = -1e-6;
  const FunctionalQuadrature q(s.grid);
  const auto r = check_entropy_support_mass(s, kEos, q, 0.0);
  EXPECT_EQ(r.entropy.verdict, Verdict::fail);
  EXPECT_EQ(r.entropy.check, "entropy_min");
}

TEST(Pressure, UniformDensityHasZeroMargin) {
  const auto s = background(Grid2D::make(8, 8, 1, 1));
  const auto r = check_pressure_inequality(s, kEos);
  EXPECT_EQ(r.margin, 0.0);
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(Pressure, GammaTwoEqualityCase) {
  for (double Sbar : {0.0, 0.4}) {
    const auto eos = EosParams::normalized(2.0, Sbar);
    auto s = background(Grid2D::make(8, 8, 1, 1), eos);
    for (auto& c : s.cells) c = prim_to_cons({1.5, 0, 0, Sbar, 0});
    const auto r = check_pressure_inequality(s, eos);
    EXPECT_NEAR(r.margin, 0.0, 1e-15);
    EXPECT_NEAR(r.rhs, eos.A * std::exp(Sbar) * 0.25, 1e-15);
    EXPECT_EQ(r.verdict, Verdict::pass);
  }
}

TEST(Pressure, HigherEntropyGivesPositiveMargin) {
  auto s = background(Grid2D::make(8, 8, 1, 1));
  for (auto& c : s.cells) c = prim_to_cons({1.5, 0, 0, 0.3, 0});
  const auto r = check_pressure_inequality(s, kEos);
  // (2.25 e^{0.3} − 1)/2 − 0.5 − 0.125 for A = 1/2
  EXPECT_NEAR(r.margin, 0.5 * 2.25 * std::exp(0.3) - 0.5 - 0.5 - 0.125, 1e-14);
  EXPECT_GT(r.margin, 0.0);
}

TEST(Pressure, NotApplicableBelowTwoAndSandwichAboveTwo) {
  const auto e15 = EosParams::normalized(1.5);
  EXPECT_EQ(check_pressure_inequality(background(Grid2D::make(8, 8, 1, 1), e15), e15).verdict,
            Verdict::not_applicable);
  const auto e3 = EosParams::normalized(3.0);
  EXPECT_NEAR(pressure_coefficient(e3), e3.A * 2.0, 1e-12);
  auto s = background(Grid2D::make(8, 8, 1, 1), e3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  for (auto& c : s.cells) c = prim_to_cons({u(rng), 0, 0, 0, 0});
  EXPECT_EQ(check_pressure_inequality(s, e3).verdict, Verdict::pass);
}

TEST(Magnetic, NonnegativeOnRandomFields) {
  auto s = background(Grid2D::make(32, 64, 2, 2));
  const FunctionalQuadrature q(s.grid);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    for (auto& c : s.cells) c.btheta = n(rng);
    const double m = magnetic_term(s, kEos, q);
    EXPECT_GE(m, 0.0);
    FunctionalSample f;
    f.magnetic = m;
    EXPECT_EQ(check_magnetic_nonnegative(f).verdict, Verdict::pass);
  }
}

TEST(DY1, CheckAndBudget) {
  std::vector<FunctionalSample> v(3);
  for (int k = 0; k < 3; ++k) {
    v[k].t = 0.1 * k;
    v[k].Y = 1.0 + 2.0 * v[k].t;  // Y' = 2
    v[k].X = 1.0;
    v[k].quadratic = 1.0;
    v[k].magnetic = 0.25;
  }
  const auto r = check_dY1(v, 0.5, 0.0);
  EXPECT_NEAR(r.lhs, 2.0, 1e-14);
  EXPECT_NEAR(r.rhs, 1.75, 1e-14);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_EQ(check_dY1(v, 1.0, 0.5).verdict, Verdict::pass);  // margin −0.25
  EXPECT_EQ(check_dY1(v, 1.0, 0.1).verdict, Verdict::fail);

  const auto b = ToleranceBudget::measure(0.3, 0.2, 0.1, 1.0, 1.0 + 0.75 * 0.04, 0.2);
  EXPECT_NEAR(b.c2, 2.0, 1e-12);
  EXPECT_NEAR(b.c1, 1.0, 1e-12);
  EXPECT_NEAR(b.at(0.2, 0.1), 2.0 * (0.04 + 0.2), 1e-12);
  EXPECT_LT(b.at(0.1, 0.1), b.at(0.2, 0.1));
}

TEST(Hoelder, BackgroundIsZeroLeqZero) {
  const auto s = background(Grid2D::make(16, 32, 2, 2));
  const auto h = check_hoelder_bound(s, FunctionalQuadrature(s.grid));
  EXPECT_EQ(h.report.lhs, 0.0);
  EXPECT_EQ(h.report.rhs, 0.0);
  EXPECT_EQ(h.report.verdict, Verdict::pass);
}

TEST(Hoelder, CauchySchwarzOnRandomStates) {
  const auto g = Grid2D::make(32, 64, 2, 2);
  const FunctionalQuadrature q(g);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = background(g);
    for (std::ptrdiff_t j = 0; j < 64; ++j)
      for (std::ptrdiff_t i = 0; i < 32; ++i)
        if (std::hypot(g.r(i), g.z(j)) <= 1.0) s.at(i, j).rho = 1.0 + u(rng);
    EXPECT_GE(check_hoelder_bound(s, q).report.margin, 0.0);
  }
}

TEST(Hoelder, BallIntegralClosedFormAndGrowthBracket) {
  // 4π ∫_0^a F R² dR by Simpson
  auto simpson = [](double a) {
    const int n = 20000;
    const double h = a / n;
    double s = 0;
    for (int k = 0; k <= n; ++k) {
      const double R = k * h, w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
      s += w * (R == 0 ? 0.0 : 4 * pi * std::sinh(R) * R);
    }
    return 4 * pi * s * h / 3;
  };
  for (double a : {1.0, 2.0, 3.0, 5.0})
    EXPECT_NEAR(ball_integral_exact(a), simpson(a), 1e-9 * simpson(a));
  const auto ratio = [](double t) { return ball_integral_exact(t + 1) / ((1 + t) * std::exp(t)); };
  const double r1 = ratio(1), r2 = ratio(2), r4 = ratio(4);
  EXPECT_TRUE(std::isfinite(r2));
  EXPECT_LE(std::max({r1, r2, r4}) / std::min({r1, r2, r4}), 10.0);

  auto s = background(Grid2D::make(128, 256, 4, 4));
  s.time = 2.0;
  const auto h = check_hoelder_bound(s, FunctionalQuadrature(s.grid));
  EXPECT_NEAR(h.ball_ratio, h.exact_ball_ratio, 0.01 * h.exact_ball_ratio);
}

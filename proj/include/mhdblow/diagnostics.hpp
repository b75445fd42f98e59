#pragma once
// Blow-up functionals X, Y and the identity/inequality checks evaluated on solver states.
// All integrals use the midpoint rule with weight 2π r_i dr dz and a fixed summation order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mhdblow/common.hpp"
#include "mhdblow/mhd_model.hpp"
#include "mhdblow/ode_lab.hpp"
#include "mhdblow/solver.hpp"
#include "mhdblow/test_function.hpp"

namespace mhdblow {

enum class Verdict { pass, fail, not_applicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "n/a";
  }
  return "unknown";
}

struct InequalityReport {
  std::string check;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs − rhs
  double tolerance_used = 0.0;
  Verdict verdict = Verdict::not_applicable;
};

/// lhs ≥ rhs up to tol.
inline InequalityReport make_report(std::string check, double t, double lhs, double rhs,
                                    double tol) {
  InequalityReport r{std::move(check), t, lhs, rhs, lhs - rhs, tol, Verdict::fail};
  r.verdict = r.margin >= -tol ? Verdict::pass : Verdict::fail;
  return r;
}

inline InequalityReport not_applicable(std::string check, double t) {
  InequalityReport r;
  r.check = std::move(check);
  r.t = t;
  return r;
}

/// Per-cell quadrature weights and test-function values for one grid.
class FunctionalQuadrature {
 public:
  explicit FunctionalQuadrature(const Grid2D& g) : grid_(g) {
    const std::size_t n = g.nr * g.nz;
    weight_.resize(n), R_.resize(n), F_.resize(n), FRR_.resize(n), FRoR_.resize(n);
    for (std::size_t j = 0; j < g.nz; ++j)
      for (std::size_t i = 0; i < g.nr; ++i) {
        const auto ii = static_cast<std::ptrdiff_t>(i), jj = static_cast<std::ptrdiff_t>(j);
        const std::size_t k = j * g.nr + i;
        const double r = g.r(ii), z = g.z(jj);
        const auto p = eval_profile(std::hypot(r, z));
        weight_[k] = 2.0 * pi * r * g.dr * g.dz;
        R_[k] = p.R;
        F_[k] = p.F;
        FRR_[k] = p.F_RR;
        FRoR_[k] = p.F_R_over_R;
      }
  }

  const Grid2D& grid() const { return grid_; }
  double weight(std::size_t k) const { return weight_[k]; }
  double R(std::size_t k) const { return R_[k]; }
  double F(std::size_t k) const { return F_[k]; }
  double F_RR(std::size_t k) const { return FRR_[k]; }
  double F_R_over_R(std::size_t k) const { return FRoR_[k]; }

  /// Σ_k w_k g(k, q_k) over interior cells in z-major order.
  template <class G>
  double sum(const FieldState& s, G&& g) const {
    require_same_grid(s);
    CompensatedSum acc;
    for (std::size_t j = 0; j < grid_.nz; ++j)
      for (std::size_t i = 0; i < grid_.nr; ++i) {
        const std::size_t k = j * grid_.nr + i;
        acc.add(weight_[k] *
                g(k, s.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j))));
      }
    return acc.value();
  }

  void require_same_grid(const FieldState& s) const {
    if (!(s.grid == grid_)) throw ConfigError("functional quadrature built for another grid");
  }

 private:
  Grid2D grid_;
  std::vector<double> weight_, R_, F_, FRR_, FRoR_;
};

struct FunctionalSample {
  double t = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double quadratic = 0.0;  // ∫(ρ−1)²F dx
  double magnetic = 0.0;   // (2μ)⁻¹∫(B^θ)²F_RR dx
  static constexpr const char* quad_rule = "midpoint over cells, weight 2*pi*r_i*dr*dz";
};

/// X = ∫F(ρ−1) dx and Y = ∫ρu·∇F dx with ∇F = F_R x/R.
inline FunctionalSample compute_XY(const FieldState& s, const FunctionalQuadrature& q) {
  FunctionalSample out;
  out.t = s.time;
  out.X = q.sum(s, [&](std::size_t k, const ConservedState& c) { return q.F(k) * (c.rho - 1.0); });
  const auto& g = q.grid();
  out.Y = q.sum(s, [&](std::size_t k, const ConservedState& c) {
    const double r = g.r(static_cast<std::ptrdiff_t>(k % g.nr));
    const double z = g.z(static_cast<std::ptrdiff_t>(k / g.nr));
    return q.F_R_over_R(k) * (c.mr * r + c.mz * z);
  });
  return out;
}

inline FunctionalSample compute_XY(const FieldState& s) {
  return compute_XY(s, FunctionalQuadrature(s.grid));
}

/// ∫(ρ−1)²F dx.
inline double quadratic_term(const FieldState& s, const FunctionalQuadrature& q) {
  return q.sum(s, [&](std::size_t k, const ConservedState& c) {
    const double d = c.rho - 1.0;
    return d * d * q.F(k);
  });
}

/// (2μ)⁻¹∫(B^θ)²F_RR dx; nonnegative since F_RR > 0.
inline double magnetic_term(const FieldState& s, const EosParams& eos,
                            const FunctionalQuadrature& q) {
  return q.sum(s, [&](std::size_t k, const ConservedState& c) {
           return c.btheta * c.btheta * q.F_RR(k);
         }) /
         (2.0 * eos.mu);
}

/// X, Y plus the quadratic and magnetic terms needed by the Y' inequality.
inline FunctionalSample compute_sample(const FieldState& s, const EosParams& eos,
                                       const FunctionalQuadrature& q) {
  auto out = compute_XY(s, q);
  out.quadratic = quadratic_term(s, q);
  out.magnetic = magnetic_term(s, eos, q);
  return out;
}

/// 2π∬(ρ−1) r dr dz.
inline double mass_perturbation(const FieldState& s, const FunctionalQuadrature& q) {
  return q.sum(s, [](std::size_t, const ConservedState& c) { return c.rho - 1.0; });
}

/// ∬B^θ dr dz.
inline double btheta_integral(const FieldState& s) {
  CompensatedSum acc;
  for (std::size_t j = 0; j < s.grid.nz; ++j)
    for (std::size_t i = 0; i < s.grid.nr; ++i)
      acc.add(s.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)).btheta);
  return acc.value() * s.grid.dr * s.grid.dz;
}

inline double min_entropy(const FieldState& s) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.grid.nz; ++j)
    for (std::size_t i = 0; i < s.grid.nr; ++i) {
      const auto& c = s.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j));
      m = std::min(m, c.rhoS / c.rho);
    }
  return m;
}

// ---------------------------------------------------------------------------
// Time-derivative checks on sample series

namespace detail {

inline double uniform_spacing(const std::vector<FunctionalSample>& s, const char* who) {
  if (s.size() < 3) throw ConfigError(std::string(who) + ": need at least 3 samples");
  const double d = s[1].t - s[0].t;
  if (!(d > 0.0)) throw ConfigError(std::string(who) + ": samples must be increasing in t");
  for (std::size_t k = 1; k < s.size(); ++k)
    if (std::abs((s[k].t - s[k - 1].t) - d) > 1e-9 * d)
      throw ConfigError(std::string(who) + ": sample spacing is not uniform");
  return d;
}

}  // namespace detail

/// dX/dt = Y at the middle sample: lhs is the centered difference of X, rhs is Y, and the
/// verdict requires |lhs − rhs| ≤ tol (margin is −|lhs − rhs|).
inline InequalityReport check_dXY(const std::vector<FunctionalSample>& s,
                                  double tol = std::numeric_limits<double>::infinity()) {
  const double d = detail::uniform_spacing(s, "check_dXY");
  const std::size_t m = s.size() / 2;
  const double dX = (s[m + 1].X - s[m - 1].X) / (2.0 * d);
  InequalityReport r;
  r.check = "dXdt_equals_Y";
  r.t = s[m].t;
  r.lhs = dX;
  r.rhs = s[m].Y;
  r.margin = -std::abs(dX - s[m].Y);
  r.tolerance_used = tol;
  r.verdict = r.margin >= -tol ? Verdict::pass : Verdict::fail;
  return r;
}

/// Residual (X_{k+1} − X_{k−1})/(2Δ) − Y_k at samples t_c − Δ, t_c, t_c + Δ picked from a
/// finer uniform series.
inline double dXY_residual(const std::vector<FunctionalSample>& s, double t_center,
                           double delta) {
  const double d = detail::uniform_spacing(s, "dXY_residual");
  const double km = (t_center - s[0].t) / d, kd = delta / d;
  const auto c = static_cast<std::ptrdiff_t>(std::llround(km));
  const auto o = static_cast<std::ptrdiff_t>(std::llround(kd));
  if (std::abs(km - static_cast<double>(c)) > 1e-6 || std::abs(kd - static_cast<double>(o)) > 1e-6 ||
      o < 1)
    throw ConfigError("dXY_residual: center and spacing must fall on the sample grid");
  if (c - o < 0 || c + o >= static_cast<std::ptrdiff_t>(s.size()))
    throw ConfigError("dXY_residual: stencil leaves the series");
  const auto& a = s[static_cast<std::size_t>(c - o)];
  const auto& b = s[static_cast<std::size_t>(c + o)];
  return (b.X - a.X) / (2.0 * delta) - s[static_cast<std::size_t>(c)].Y;
}

struct DxyConvergence {
  std::vector<double> deltas;
  std::vector<double> residuals;
  double raw_order = 0.0;            // log2(|r(Δ)|/|r(Δ/2)|) for the last pair
  double order_floor_removed = 0.0;  // log2(|r(Δ)−r(Δ/2)| / |r(Δ/2)−r(Δ/4)|)
  double floor_estimate = 0.0;       // Richardson limit of r as Δ → 0
};

/// Residuals of dX/dt = Y at spacings Δ, Δ/2, Δ/4. The time-stencil error scales like Δ²;
/// what remains as Δ → 0 is the Δ-independent spatial truncation of the run, which
/// differencing removes.
inline DxyConvergence dXY_convergence(const std::vector<FunctionalSample>& s, double t_center,
                                      double delta) {
  DxyConvergence c;
  for (int k = 0; k < 3; ++k) {
    const double d = delta / static_cast<double>(1 << k);
    c.deltas.push_back(d);
    c.residuals.push_back(dXY_residual(s, t_center, d));
  }
  const auto& r = c.residuals;
  c.raw_order = std::log2(std::abs(r[1]) / std::abs(r[2]));
  c.order_floor_removed = std::log2(std::abs(r[0] - r[1]) / std::abs(r[1] - r[2]));
  c.floor_estimate = r[2] - (r[1] - r[2]) / 3.0;
  return c;
}

/// Y' ≥ X + C∫(ρ−1)²F + (2μ)⁻¹∫(B^θ)²F_RR at the middle sample, with Y' by centered
/// difference.
inline InequalityReport check_dY1(const std::vector<FunctionalSample>& s, double C, double tol) {
  const double d = detail::uniform_spacing(s, "check_dY1");
  const std::size_t m = s.size() / 2;
  const double dY = (s[m + 1].Y - s[m - 1].Y) / (2.0 * d);
  return make_report("dY_lower_bound", s[m].t, dY,
                     s[m].X + C * s[m].quadratic + s[m].magnetic, tol);
}

/// Tolerance c₁Δ² + c₂h with constants read off two measurements: the margin at spacings h
/// and h/2 (first order in h), and Y' at differencing steps Δ and Δ/2 (second order in Δ).
struct ToleranceBudget {
  double c1 = 0.0;
  double c2 = 0.0;
  double safety = 2.0;

  static ToleranceBudget measure(double margin_h, double margin_h2, double h, double dY_delta,
                                 double dY_delta2, double delta, double safety = 2.0) {
    ToleranceBudget b;
    b.c2 = 2.0 * std::abs(margin_h - margin_h2) / h;
    b.c1 = std::abs(dY_delta - dY_delta2) / (0.75 * delta * delta);
    b.safety = safety;
    return b;
  }
  double at(double delta, double h) const { return safety * (c1 * delta * delta + c2 * h); }
};

// ---------------------------------------------------------------------------
// Pointwise and integral inequalities on a single state

struct EntropySupportMass {
  InequalityReport entropy;
  InequalityReport support;
  InequalityReport mass;
};

struct StructureTolerances {
  double entropy = 1e-8;
  double mass_relative = 1e-10;
  double support_threshold = 1e-12;
};

/// min S ≥ S̄; support radius ≤ t + 1 + 2h; mass perturbation equal to `reference_mass`
/// (relative drift, absolute when the reference vanishes).
inline EntropySupportMass check_entropy_support_mass(const FieldState& s, const EosParams& eos,
                                                     const FunctionalQuadrature& q,
                                                     double reference_mass,
                                                     const StructureTolerances& tol = {}) {
  EntropySupportMass out;
  out.entropy = make_report("entropy_min", s.time, min_entropy(s), eos.S_bar, tol.entropy);
  const double bound = s.time + 1.0 + 2.0 * s.grid.h();
  out.support = make_report("support_radius", s.time, bound,
                            support_radius(s, eos, tol.support_threshold), 0.0);
  const double m = mass_perturbation(s, q);
  const double scale = reference_mass == 0.0 ? 1.0 : std::abs(reference_mass);
  out.mass = make_report("mass_conservation", s.time, 0.0, std::abs(m - reference_mass) / scale,
                         tol.mass_relative);
  return out;
}

/// Relative drift of ∬B^θ dr dz against a reference value.
inline InequalityReport check_btheta_conservation(const FieldState& s, double reference,
                                                  double tol = 1e-10) {
  const double scale = reference == 0.0 ? 1.0 : std::abs(reference);
  return make_report("btheta_conservation", s.time, 0.0,
                     std::abs(btheta_integral(s) - reference) / scale, tol);
}

/// Coefficient C with p − p̄ − c̄²(ρ−1) ≥ C(ρ−1)² for S ≥ S̄, c̄² = ∂p/∂ρ(1, S̄):
/// A e^{S̄} for γ = 2 and A e^{S̄}·C̃ for γ > 2. Zero for γ < 2, where no such bound holds.
inline double pressure_coefficient(const EosParams& eos) {
  if (eos.gamma < 2.0) return 0.0;
  const double base = eos.A * std::exp(eos.S_bar);
  if (eos.gamma == 2.0) return base;
  return base * sandwich_constants(eos.gamma).C_tilde.value();
}

/// Pointwise min over cells of p − p̄ − c̄²(ρ−1) − C(ρ−1)²; with the normalized EOS c̄² = 1.
inline InequalityReport check_pressure_inequality(const FieldState& s, const EosParams& eos,
                                                  double tol = 1e-10) {
  if (eos.gamma < 2.0) return not_applicable("pressure_lower_bound", s.time);
  const double C = pressure_coefficient(eos);
  const double pbar = eos.p_bar();
  const double c2 = dp_drho(eos.rho_bar, eos.S_bar, eos);
  double worst = std::numeric_limits<double>::infinity();
  double w_lhs = 0.0, w_rhs = 0.0;
  for (std::size_t j = 0; j < s.grid.nz; ++j)
    for (std::size_t i = 0; i < s.grid.nr; ++i) {
      const auto& c = s.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j));
      const double d = c.rho - eos.rho_bar;
      const double lhs = pressure(c.rho, c.rhoS / c.rho, eos) - pbar - c2 * d;
      const double rhs = C * d * d;
      if (lhs - rhs < worst) worst = lhs - rhs, w_lhs = lhs, w_rhs = rhs;
    }
  return make_report("pressure_lower_bound", s.time, w_lhs, w_rhs, tol);
}

inline InequalityReport check_magnetic_nonnegative(const FunctionalSample& f) {
  return make_report("magnetic_nonnegative", f.t, f.magnetic, 0.0, 0.0);
}

/// ∫_{|x|≤a} F dx = 16π²(a cosh a − sinh a).
inline double ball_integral_exact(double a) {
  if (!(a >= 0.0)) throw DomainError("ball_integral_exact: need a >= 0");
  return 16.0 * pi * pi * (a * std::cosh(a) - std::sinh(a));
}

struct HoelderReport {
  InequalityReport report;
  double ball_integral = 0.0;   // midpoint sum of F over cells with R ≤ t+1
  double ball_ratio = 0.0;      // ball_integral / ((1+t)eᵗ)
  double exact_ball_ratio = 0.0;
};

/// X² ≤ ∫(ρ−1)²F dx · ∫_{|x|≤t+1}F dx. Discrete Cauchy–Schwarz in the weighted inner
/// product Σ w F(·)(·) makes this exact whenever ρ−1 vanishes outside the ball.
inline HoelderReport check_hoelder_bound(const FieldState& s, const FunctionalQuadrature& q) {
  HoelderReport out;
  const double t = s.time, a = t + 1.0;
  const auto xy = compute_XY(s, q);
  const double Q = quadratic_term(s, q);
  out.ball_integral =
      q.sum(s, [&](std::size_t k, const ConservedState&) { return q.R(k) <= a ? q.F(k) : 0.0; });
  out.report = make_report("hoelder_bound", t, Q * out.ball_integral, xy.X * xy.X, 0.0);
  const double growth = (1.0 + t) * std::exp(t);
  out.ball_ratio = out.ball_integral / growth;
  out.exact_ball_ratio = ball_integral_exact(a) / growth;
  return out;
}

}  // namespace mhdblow

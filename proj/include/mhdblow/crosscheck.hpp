#pragma once
// Cartesian finite-difference cross-check of the cylindrical vector-calculus formulas used
// to reduce the MHD system to (r, z). A field is lifted to R³, differentiated with centered
// differences, projected back onto (e^r, e^θ, e^z) and compared with the closed-form
// cylindrical expression of each operator (θ-derivatives vanish for axisymmetric fields).

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mhdblow/common.hpp"

namespace mhdblow {

/// A scalar function of (r, z) with its exact cylindrical partial derivatives.
struct ComponentJet {
  double v = 0.0, r = 0.0, z = 0.0, rr = 0.0, zz = 0.0;
};

/// Components are ordered (r, θ, z).
struct AxisymmetricSample {
  std::array<ComponentJet, 3> u;
  std::array<ComponentJet, 3> B;
  ComponentJet p;
};

/// Requirement on field descriptions accepted by the harness.
template <class F>
concept AxisymmetricFieldSpec = requires(const F& f, double r, double z) {
  { f.sample(r, z) } -> std::same_as<AxisymmetricSample>;
};

/// (a0 + a1 r + a2 z + a3 r z + a4 r²) · exp(-b r² - c (z - z0)²), with closed-form jets.
struct GaussianPolynomial {
  std::array<double, 5> a{};
  double b = 1.0, c = 1.0, z0 = 0.0;

  ComponentJet operator()(double r, double z) const {
    const double dz = z - z0;
    const double E = std::exp(-b * r * r - c * dz * dz);
    const double Er = -2.0 * b * r * E;
    const double Ez = -2.0 * c * dz * E;
    const double Err = (4.0 * b * b * r * r - 2.0 * b) * E;
    const double Ezz = (4.0 * c * c * dz * dz - 2.0 * c) * E;
    const double P = a[0] + a[1] * r + a[2] * z + a[3] * r * z + a[4] * r * r;
    const double Pr = a[1] + a[3] * z + 2.0 * a[4] * r;
    const double Pz = a[2] + a[3] * r;
    const double Prr = 2.0 * a[4];
    return {P * E, Pr * E + P * Er, Pz * E + P * Ez, Prr * E + 2.0 * Pr * Er + P * Err,
            2.0 * Pz * Ez + P * Ezz};
  }
};

/// Seven Gaussian-polynomial components; a zero component is represented by all-zero a.
struct GaussianAxisymmetricField {
  std::array<GaussianPolynomial, 3> u;
  std::array<GaussianPolynomial, 3> B;
  GaussianPolynomial p;

  AxisymmetricSample sample(double r, double z) const {
    AxisymmetricSample s;
    for (int k = 0; k < 3; ++k) {
      s.u[k] = u[k](r, z);
      s.B[k] = B[k](r, z);
    }
    s.p = p(r, z);
    return s;
  }

  /// Random smooth field; `reduced` zeroes u^θ, B^r, B^z to match the axisymmetric ansatz.
  static GaussianAxisymmetricField random(std::mt19937_64& rng, bool reduced = false) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0), width(0.5, 1.5), shift(-0.5, 0.5);
    auto draw = [&] {
      GaussianPolynomial g;
      for (auto& v : g.a) v = coef(rng);
      g.b = width(rng);
      g.c = width(rng);
      g.z0 = shift(rng);
      return g;
    };
    GaussianAxisymmetricField f;
    for (auto& g : f.u) g = draw();
    for (auto& g : f.B) g = draw();
    f.p = draw();
    if (reduced) {
      f.u[1] = GaussianPolynomial{};
      f.B[0] = GaussianPolynomial{};
      f.B[2] = GaussianPolynomial{};
    }
    return f;
  }
};

enum class CylOperator {
  grad_u,        // ∇u
  u_dot_grad_u,  // u·∇u
  grad_p,        // ∇p
  div_u,         // ∇·u
  laplacian_u,   // Δu
  curl_B,        // ∇×B
  curl_B_cross_B,  // (∇×B)×B
  u_cross_B,       // u×B
  curl_u_cross_B,  // ∇×(u×B)
};

inline constexpr std::array<CylOperator, 9> kAllCylOperators = {
    CylOperator::grad_u,  CylOperator::u_dot_grad_u,   CylOperator::grad_p,
    CylOperator::div_u,   CylOperator::laplacian_u,    CylOperator::curl_B,
    CylOperator::curl_B_cross_B, CylOperator::u_cross_B, CylOperator::curl_u_cross_B};

inline std::string to_string(CylOperator op) {
  switch (op) {
    case CylOperator::grad_u: return "grad_u";
    case CylOperator::u_dot_grad_u: return "u_dot_grad_u";
    case CylOperator::grad_p: return "grad_p";
    case CylOperator::div_u: return "div_u";
    case CylOperator::laplacian_u: return "laplacian_u";
    case CylOperator::curl_B: return "curl_B";
    case CylOperator::curl_B_cross_B: return "curl_B_cross_B";
    case CylOperator::u_cross_B: return "u_cross_B";
    case CylOperator::curl_u_cross_B: return "curl_u_cross_B";
  }
  return "?";
}

/// Operator values as flat component lists in the cylindrical frame (tensors row-major,
/// first index = component of u, second = derivative direction).
struct CylOperatorValues {
  std::array<double, 9> grad_u{};
  Vec3 u_dot_grad_u, grad_p;
  double div_u = 0.0;
  Vec3 laplacian_u, curl_B, curl_B_cross_B, u_cross_B, curl_u_cross_B;

  std::vector<double> components(CylOperator op) const {
    auto v3 = [](Vec3 a) { return std::vector<double>{a.x, a.y, a.z}; };
    switch (op) {
      case CylOperator::grad_u: return {grad_u.begin(), grad_u.end()};
      case CylOperator::u_dot_grad_u: return v3(u_dot_grad_u);
      case CylOperator::grad_p: return v3(grad_p);
      case CylOperator::div_u: return {div_u};
      case CylOperator::laplacian_u: return v3(laplacian_u);
      case CylOperator::curl_B: return v3(curl_B);
      case CylOperator::curl_B_cross_B: return v3(curl_B_cross_B);
      case CylOperator::u_cross_B: return v3(u_cross_B);
      case CylOperator::curl_u_cross_B: return v3(curl_u_cross_B);
    }
    return {};
  }
};

/// The cylindrical formulas with ∂_θ ≡ 0, written component by component.
inline CylOperatorValues cylindrical_formulas(const AxisymmetricSample& s, double r) {
  const auto& [ur, ut, uz] = s.u;
  const auto& [Br, Bt, Bz] = s.B;
  const double ir = 1.0 / r;
  CylOperatorValues o;

  // ∇u: ∂_r u^a e^a⊗e^r + (1/r)[-u^θ e^r⊗e^θ + u^r e^θ⊗e^θ] + ∂_z u^a e^a⊗e^z
  o.grad_u = {ur.r, -ut.v * ir, ur.z,   //
              ut.r, ur.v * ir, ut.z,    //
              uz.r, 0.0, uz.z};

  o.u_dot_grad_u = {ur.v * ur.r - ir * ut.v * ut.v + uz.v * ur.z,
                    ur.v * ut.r + ir * ut.v * ur.v + uz.v * ut.z,
                    ur.v * uz.r + uz.v * uz.z};

  o.grad_p = {s.p.r, 0.0, s.p.z};

  o.div_u = ir * ur.v + ur.r + uz.z;

  o.laplacian_u = {ur.rr + ir * ur.r - ir * ir * ur.v + ur.zz,
                   ut.rr + ir * ut.r - ir * ir * ut.v + ut.zz,
                   uz.rr + ir * uz.r + uz.zz};

  o.curl_B = {-Bt.z, Br.z - Bz.r, Bt.r + Bt.v * ir};

  o.curl_B_cross_B = {Br.z * Bz.v - Bz.r * Bz.v - Bt.r * Bt.v - Bt.v * Bt.v * ir,
                      Bt.z * Bz.v + Bt.r * Br.v + Br.v * Bt.v * ir,
                      -Bt.z * Bt.v - Br.z * Br.v + Bz.r * Br.v};

  o.u_cross_B = {ut.v * Bz.v - uz.v * Bt.v, uz.v * Br.v - ur.v * Bz.v,
                 ur.v * Bt.v - ut.v * Br.v};

  // V = u×B; the derivatives follow from the product rule.
  const double Vt = uz.v * Br.v - ur.v * Bz.v;
  const double Vt_r = uz.r * Br.v + uz.v * Br.r - ur.r * Bz.v - ur.v * Bz.r;
  const double Vt_z = uz.z * Br.v + uz.v * Br.z - ur.z * Bz.v - ur.v * Bz.z;
  const double Vr_z = ut.z * Bz.v + ut.v * Bz.z - uz.z * Bt.v - uz.v * Bt.z;
  const double Vz_r = ur.r * Bt.v + ur.v * Bt.r - ut.r * Br.v - ut.v * Br.r;
  o.curl_u_cross_B = {-Vt_z, Vr_z - Vz_r, Vt_r + ir * Vt};
  return o;
}

namespace detail {

struct CartesianFrame {
  double r, theta, z;
  Vec3 er, et, ez;
};

inline CartesianFrame frame_at(Vec3 x) {
  CartesianFrame f;
  f.r = std::hypot(x.x, x.y);
  f.theta = std::atan2(x.y, x.x);
  f.z = x.z;
  const double c = std::cos(f.theta), s = std::sin(f.theta);
  f.er = {c, s, 0.0};
  f.et = {-s, c, 0.0};
  f.ez = {0.0, 0.0, 1.0};
  return f;
}

struct LiftedValues {
  Vec3 u, B;
  double p;
};

template <AxisymmetricFieldSpec Field>
LiftedValues lift(const Field& field, Vec3 x) {
  const auto f = frame_at(x);
  const auto s = field.sample(f.r, f.z);
  LiftedValues out;
  out.u = s.u[0].v * f.er + s.u[1].v * f.et + s.u[2].v * f.ez;
  out.B = s.B[0].v * f.er + s.B[1].v * f.et + s.B[2].v * f.ez;
  out.p = s.p.v;
  return out;
}

inline Vec3 to_cyl(Vec3 a, const CartesianFrame& f) {
  return {dot(a, f.er), dot(a, f.et), dot(a, f.ez)};
}

}  // namespace detail

/// All operators evaluated from the Cartesian lift by centered differences of step h.
template <AxisymmetricFieldSpec Field>
CylOperatorValues cartesian_fd_operators(const Field& field, Vec3 x, double h) {
  using detail::lift;
  const auto f = detail::frame_at(x);
  const auto c = lift(field, x);
  const Vec3 e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  // Columns: ∂_j of u, B, p, u×B; plus second differences of u along each axis.
  Vec3 du[3], dB[3], duxB[3], d2u[3];
  double dp[3];
  for (int j = 0; j < 3; ++j) {
    const auto plus = lift(field, x + h * e[j]);
    const auto minus = lift(field, x - h * e[j]);
    const double inv2h = 1.0 / (2.0 * h);
    du[j] = inv2h * (plus.u - minus.u);
    dB[j] = inv2h * (plus.B - minus.B);
    dp[j] = inv2h * (plus.p - minus.p);
    duxB[j] = inv2h * (cross(plus.u, plus.B) - cross(minus.u, minus.B));
    d2u[j] = (1.0 / (h * h)) * (plus.u - 2.0 * c.u + minus.u);
  }
  auto jac_apply = [](const Vec3 cols[3], Vec3 v) {  // (∂_j a_i) v_j
    return v.x * cols[0] + v.y * cols[1] + v.z * cols[2];
  };
  auto curl = [](const Vec3 cols[3]) {
    return Vec3{cols[1].z - cols[2].y, cols[2].x - cols[0].z, cols[0].y - cols[1].x};
  };

  CylOperatorValues o;
  const Vec3 basis[3] = {f.er, f.et, f.ez};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) o.grad_u[3 * a + b] = dot(basis[a], jac_apply(du, basis[b]));
  o.u_dot_grad_u = detail::to_cyl(jac_apply(du, c.u), f);
  o.grad_p = detail::to_cyl(Vec3{dp[0], dp[1], dp[2]}, f);
  o.div_u = du[0].x + du[1].y + du[2].z;
  o.laplacian_u = detail::to_cyl(d2u[0] + d2u[1] + d2u[2], f);
  const Vec3 J = curl(dB);
  o.curl_B = detail::to_cyl(J, f);
  o.curl_B_cross_B = detail::to_cyl(cross(J, c.B), f);
  o.u_cross_B = detail::to_cyl(cross(c.u, c.B), f);
  o.curl_u_cross_B = detail::to_cyl(curl(duxB), f);
  return o;
}

struct OperatorDiscrepancy {
  CylOperator op;
  double max_abs = 0.0;  // max over components of |FD - formula|
};

struct CrosscheckReport {
  Vec3 point;
  double h = 0.0;
  std::vector<OperatorDiscrepancy> entries;

  double discrepancy(CylOperator op) const {
    for (const auto& e : entries)
      if (e.op == op) return e.max_abs;
    return 0.0;
  }
};

/// Evaluates every operator both ways at `point` and reports max component discrepancies.
template <AxisymmetricFieldSpec Field>
CrosscheckReport cartesian_crosscheck(const Field& field, Vec3 point, double h) {
  if (!(h > 0.0)) throw ConfigError("cartesian_crosscheck: step must be positive");
  const double r = std::hypot(point.x, point.y);
  if (!(r > 10.0 * h))
    throw AxisError("cartesian_crosscheck: point must satisfy cylindrical radius > 10 h");
  const auto fd = cartesian_fd_operators(field, point, h);
  const auto exact = cylindrical_formulas(field.sample(r, point.z), r);
  CrosscheckReport rep;
  rep.point = point;
  rep.h = h;
  for (const auto op : kAllCylOperators) {
    const auto a = fd.components(op), b = exact.components(op);
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    rep.entries.push_back({op, m});
  }
  return rep;
}

struct OperatorConvergence {
  CylOperator op;
  std::vector<double> discrepancies;  // one per step, in the order given
  double min_order = 0.0;             // smallest pairwise order
  bool exact = false;                 // every discrepancy at the rounding floor
};

/// Measures the pairwise convergence order of every operator over a decreasing step ladder.
/// Discrepancies below `floor` at every step mark an operator as exact (algebraic identities).
template <AxisymmetricFieldSpec Field>
std::vector<OperatorConvergence> crosscheck_orders(const Field& field, Vec3 point,
                                                   const std::vector<double>& steps,
                                                   double rounding_floor = 1e-12) {
  if (steps.size() < 2) throw ConfigError("crosscheck_orders: need at least two steps");
  std::vector<CrosscheckReport> reps;
  for (double h : steps) reps.push_back(cartesian_crosscheck(field, point, h));
  std::vector<OperatorConvergence> out;
  for (const auto op : kAllCylOperators) {
    OperatorConvergence c{op, {}, std::numeric_limits<double>::infinity(), true};
    for (const auto& rep : reps) {
      c.discrepancies.push_back(rep.discrepancy(op));
      if (rep.discrepancy(op) > rounding_floor) c.exact = false;
    }
    if (!c.exact) {
      for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
        const double ord = std::log(c.discrepancies[k] / c.discrepancies[k + 1]) /
                           std::log(steps[k] / steps[k + 1]);
        c.min_order = std::min(c.min_order, ord);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace mhdblow

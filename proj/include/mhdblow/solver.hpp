#pragma once
// Explicit finite-volume integrator for the reduced axisymmetric system on a uniform
// (r, z) grid with ghost cells.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mhdblow/common.hpp"
#include "mhdblow/mhd_model.hpp"
#include "mhdblow/parallel.hpp"
#include "mhdblow/test_function.hpp"

namespace mhdblow {

struct Grid2D {
  std::size_t nr = 0;
  std::size_t nz = 0;
  double dr = 0.0;
  double dz = 0.0;
  double r_max = 0.0;
  double z_half = 0.0;
  std::size_t ghost_width = 2;

  /// r ∈ (0, r_max] split into nr cells, z ∈ [−z_half, z_half] into nz cells.
  static Grid2D make(std::size_t nr, std::size_t nz, double r_max, double z_half,
                     std::size_t ghost_width = 2) {
    if (nr < 4 || nz < 4) throw ConfigError("grid needs at least 4 cells per direction");
    if (!(r_max > 0.0) || !(z_half > 0.0) || !std::isfinite(r_max) || !std::isfinite(z_half))
      throw ConfigError("grid extents must be positive and finite");
    if (ghost_width < 2) throw ConfigError("grid ghost_width must be >= 2");
    Grid2D g;
    g.nr = nr;
    g.nz = nz;
    g.r_max = r_max;
    g.z_half = z_half;
    g.dr = r_max / static_cast<double>(nr);
    g.dz = 2.0 * z_half / static_cast<double>(nz);
    g.ghost_width = ghost_width;
    return g;
  }

  double r(std::ptrdiff_t i) const { return (static_cast<double>(i) + 0.5) * dr; }
  double z(std::ptrdiff_t j) const { return -z_half + (static_cast<double>(j) + 0.5) * dz; }
  double h() const { return std::max(dr, dz); }
  std::size_t stride() const { return nr + 2 * ghost_width; }
  std::size_t total_cells() const { return stride() * (nz + 2 * ghost_width); }
  std::size_t index(std::ptrdiff_t i, std::ptrdiff_t j) const {
    const auto g = static_cast<std::ptrdiff_t>(ghost_width);
    return static_cast<std::size_t>((i + g) + (j + g) * static_cast<std::ptrdiff_t>(stride()));
  }
  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Conserved cells including ghosts, stored z-major (j outer).
struct FieldState {
  double time = 0.0;
  Grid2D grid;
  std::vector<ConservedState> cells;

  FieldState() = default;
  FieldState(const Grid2D& g, const ConservedState& fill)
      : grid(g), cells(g.total_cells(), fill) {}

  ConservedState& at(std::ptrdiff_t i, std::ptrdiff_t j) { return cells[grid.index(i, j)]; }
  const ConservedState& at(std::ptrdiff_t i, std::ptrdiff_t j) const {
    return cells[grid.index(i, j)];
  }
};

enum class Axis { r, z };
enum class Reconstruction { first_order, muscl_minmod };
enum class TimeIntegrator { euler, heun };
enum class RunStatus { ok, support_reached_boundary, blowup_candidate };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::support_reached_boundary: return "support_reached_boundary";
    case RunStatus::blowup_candidate: return "blowup_candidate";
  }
  return "unknown";
}

inline RunStatus worst(RunStatus a, RunStatus b) {
  return static_cast<int>(a) > static_cast<int>(b) ? a : b;
}

struct SchemeOptions {
  Reconstruction reconstruction = Reconstruction::first_order;
  TimeIntegrator integrator = TimeIntegrator::euler;
  unsigned threads = 1;
  // A cell within ghost_width of the outer boundary deviating from the background by more
  // than this counts as the support reaching the boundary.
  double boundary_threshold = 1e-10;
};

// ---------------------------------------------------------------------------
// Initial data

enum class BumpFamily { cos2, poly3 };

inline const char* to_string(BumpFamily b) { return b == BumpFamily::cos2 ? "cos2" : "poly3"; }

struct BumpAmplitudes {
  double rho = 1.0;
  double ur = 1.0;
  double uz = 1.0;
  double S = 1.0;
  double btheta = 1.0;
};

struct InitialDataSpec {
  double epsilon = 0.01;
  BumpFamily profile = BumpFamily::cos2;
  BumpAmplitudes amp;
  double support_radius = 1.0;

  void validate() const {
    if (!std::isfinite(epsilon) || epsilon < 0.0)
      throw ConfigError("initial.epsilon must be finite and >= 0");
    if (!(support_radius > 0.0) || support_radius > 1.0)
      throw ConfigError("initial.support_radius must lie in (0, 1]");
    for (double a : {amp.rho, amp.ur, amp.uz, amp.S, amp.btheta})
      if (!std::isfinite(a)) throw ConfigError("initial amplitudes must be finite");
    if (amp.S < 0.0) throw ConfigError("initial.amp_S must be >= 0 so that S(0,x) >= S_bar");
    if (epsilon * std::max(0.0, -amp.rho) >= 1.0 - kDensityFloor)
      throw ConfigError("initial density perturbation would make rho nonpositive");
  }
};

/// Bump value b(R) on [0, L); zero for R ≥ L. Both families are C¹ with b(0) = 1.
inline double bump(BumpFamily f, double R, double L) {
  if (R >= L) return 0.0;
  const double s = R / L;
  if (f == BumpFamily::cos2) {
    const double c = std::cos(0.5 * pi * s);
    return c * c;
  }
  const double q = 1.0 - s * s;
  return q * q * q;
}

/// Perturbation profile (ρ₀, u₀^r, u₀^z, S₀, B₀^θ) at (r, z), before scaling by ε.
inline PrimitiveState profile_at(const InitialDataSpec& spec, double r, double z) {
  const double L = spec.support_radius;
  const double b = bump(spec.profile, std::hypot(r, z), L);
  return {spec.amp.rho * b, spec.amp.ur * (r / L) * b, spec.amp.uz * (z / L) * b,
          spec.amp.S * b, spec.amp.btheta * (r / L) * b};
}

struct InitialDataReport {
  double X0 = 0.0;              // 2π∬F(ρ−1) r dr dz of the discrete state
  double density_term = 0.0;    // ∫ρ₀F dx
  double velocity_term = 0.0;   // ∫∇F·u₀ dx
  double hypothesis = 0.0;      // density_term + velocity_term
  bool hypothesis_holds = false;
  std::string warning;
};

struct InitialData {
  FieldState state;
  InitialDataReport report;
};

inline RunStatus apply_boundaries(FieldState& state, const EosParams& eos,
                                  double boundary_threshold = 1e-10);

/// Background plus ε times the profile, sampled at cell centers; the blow-up hypothesis
/// functional of the unscaled profile is evaluated with the same midpoint rule.
inline InitialData make_initial_data(const InitialDataSpec& spec, const Grid2D& grid,
                                     const EosParams& eos) {
  spec.validate();
  eos.validate();
  if (grid.r_max < spec.support_radius || grid.z_half < spec.support_radius)
    throw ConfigError("grid does not contain the initial support");
  const auto bg = background_state(eos);
  InitialData out{FieldState(grid, prim_to_cons(bg)), {}};
  CompensatedSum x0, dens, vel;
  const double eps = spec.epsilon;
  for (std::size_t j = 0; j < grid.nz; ++j) {
    const double z = grid.z(static_cast<std::ptrdiff_t>(j));
    for (std::size_t i = 0; i < grid.nr; ++i) {
      const double r = grid.r(static_cast<std::ptrdiff_t>(i));
      const auto prof = profile_at(spec, r, z);
      PrimitiveState w = bg;
      w.rho += eps * prof.rho;
      w.ur = eps * prof.ur;
      w.uz = eps * prof.uz;
      w.S += eps * prof.S;
      w.btheta = eps * prof.btheta;
      const auto ii = static_cast<std::ptrdiff_t>(i), jj = static_cast<std::ptrdiff_t>(j);
      out.state.at(ii, jj) = prim_to_cons(w);
      const double R = std::hypot(r, z);
      const auto fp = eval_profile(R);
      const double wgt = 2.0 * pi * r * grid.dr * grid.dz;
      x0.add(wgt * fp.F * (out.state.at(ii, jj).rho - eos.rho_bar));
      dens.add(wgt * fp.F * prof.rho);
      vel.add(wgt * fp.F_R_over_R * (prof.ur * r + prof.uz * z));
    }
  }
  auto& rep = out.report;
  rep.X0 = x0.value();
  rep.density_term = dens.value();
  rep.velocity_term = vel.value();
  rep.hypothesis = rep.density_term + rep.velocity_term;
  rep.hypothesis_holds = rep.hypothesis > 0.0;
  if (!rep.hypothesis_holds)
    rep.warning = "blow-up hypothesis fails: int rho0 F + int grad F . u0 = " +
                  std::to_string(rep.hypothesis) + " <= 0";
  apply_boundaries(out.state, eos);
  return out;
}

// ---------------------------------------------------------------------------
// Fluxes

using FluxVector = ConservedState;

namespace detail {

inline FluxVector flux_with_pressure(const PrimitiveState& w, double p, Axis dir,
                                     const EosParams& eos) {
  const double P = p + 0.5 * w.btheta * w.btheta / eos.mu;
  const double un = dir == Axis::r ? w.ur : w.uz;
  FluxVector f;
  f.rho = w.rho * un;
  f.mr = w.rho * w.ur * un + (dir == Axis::r ? P : 0.0);
  f.mz = w.rho * w.uz * un + (dir == Axis::z ? P : 0.0);
  f.rhoS = w.rho * w.S * un;
  f.btheta = w.btheta * un;
  return f;
}

inline double fast_speed(const PrimitiveState& w, double p, const EosParams& eos) {
  return std::sqrt((eos.gamma * p + w.btheta * w.btheta / eos.mu) / w.rho);
}

}  // namespace detail

inline FluxVector physical_flux(const PrimitiveState& w, Axis dir, const EosParams& eos) {
  return detail::flux_with_pressure(w, pressure(w.rho, w.S, eos), dir, eos);
}

/// Two-wave HLL flux with s_L = min(u_n) − max(fast), s_R = max(u_n) + max(fast).
inline FluxVector hll_flux(const PrimitiveState& left, const PrimitiveState& right, Axis dir,
                           const EosParams& eos) {
  const double pl = pressure(left.rho, left.S, eos);
  const auto fl = detail::flux_with_pressure(left, pl, dir, eos);
  if (left.rho == right.rho && left.ur == right.ur && left.uz == right.uz &&
      left.S == right.S && left.btheta == right.btheta)
    return fl;
  const double pr = pressure(right.rho, right.S, eos);
  const auto fr = detail::flux_with_pressure(right, pr, dir, eos);
  const double unl = dir == Axis::r ? left.ur : left.uz;
  const double unr = dir == Axis::r ? right.ur : right.uz;
  const double cmax =
      std::max(detail::fast_speed(left, pl, eos), detail::fast_speed(right, pr, eos));
  const double sl = std::min(unl, unr) - cmax;
  const double sr = std::max(unl, unr) + cmax;
  if (sl >= 0.0) return fl;
  if (sr <= 0.0) return fr;
  const auto ul = prim_to_cons(left), ur = prim_to_cons(right);
  const double inv = 1.0 / (sr - sl);
  FluxVector f;
  for (int k = 0; k < FluxVector::size; ++k)
    f[k] = (sr * fl[k] - sl * fr[k] + sl * sr * (ur[k] - ul[k])) * inv;
  return f;
}

// ---------------------------------------------------------------------------
// Boundaries

/// Axis ghosts mirror the first interior cells with parity (ρ, ρu^z, ρS even; ρu^r, B^θ
/// odd); every other ghost is the fixed background. Returns support_reached_boundary when a
/// cell within ghost_width of the far-field edges departs from the background.
inline RunStatus apply_boundaries(FieldState& state, const EosParams& eos,
                                  double boundary_threshold) {
  const auto& g = state.grid;
  const auto nr = static_cast<std::ptrdiff_t>(g.nr), nz = static_cast<std::ptrdiff_t>(g.nz);
  const auto gw = static_cast<std::ptrdiff_t>(g.ghost_width);
  const auto bg = prim_to_cons(background_state(eos));
  for (std::ptrdiff_t j = -gw; j < nz + gw; ++j) {
    const bool z_ghost = j < 0 || j >= nz;
    for (std::ptrdiff_t k = 1; k <= gw; ++k) {
      if (z_ghost) {
        state.at(-k, j) = bg;
      } else {
        ConservedState m = state.at(k - 1, j);
        m.mr = -m.mr;
        m.btheta = -m.btheta;
        state.at(-k, j) = m;
      }
      state.at(nr - 1 + k, j) = bg;
    }
    if (z_ghost)
      for (std::ptrdiff_t i = 0; i < nr; ++i) state.at(i, j) = bg;
  }

  auto departs = [&](const ConservedState& q) {
    for (int k = 0; k < ConservedState::size; ++k)
      if (!(std::abs(q[k] - bg[k]) <= boundary_threshold)) return true;
    return false;
  };
  for (std::ptrdiff_t j = 0; j < nz; ++j) {
    const bool z_edge = j < gw || j >= nz - gw;
    for (std::ptrdiff_t i = z_edge ? 0 : nr - gw; i < nr; ++i)
      if (departs(state.at(i, j))) return RunStatus::support_reached_boundary;
  }
  return RunStatus::ok;
}

// ---------------------------------------------------------------------------
// Time step

/// cfl · min over interior cells of min(dr, dz)/(fast + |u|).
inline double cfl_dt(const FieldState& state, double cfl, const EosParams& eos) {
  if (!(cfl > 0.0) || cfl > 1.0) throw ConfigError("cfl must lie in (0, 1]");
  const auto& g = state.grid;
  double smax = 0.0;
  for (std::size_t j = 0; j < g.nz; ++j)
    for (std::size_t i = 0; i < g.nr; ++i) {
      const auto w = cons_to_prim(
          state.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)));
      const double s = wave_speeds(w, eos).fast + std::hypot(w.ur, w.uz);
      if (!std::isfinite(s)) throw DomainError("cfl_dt: non-finite signal speed");
      smax = std::max(smax, s);
    }
  return cfl * std::min(g.dr, g.dz) / smax;
}

namespace detail {

using Prim5 = std::array<double, 5>;

inline Prim5 to_array(const PrimitiveState& w) { return {w.rho, w.ur, w.uz, w.S, w.btheta}; }
inline PrimitiveState to_prim(const Prim5& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

// Left/right face states between cells m (left) and p (right); mm and pp are the next
// cells outward, used only by MUSCL.
inline std::pair<PrimitiveState, PrimitiveState> face_states(const Prim5& mm, const Prim5& m,
                                                             const Prim5& p, const Prim5& pp,
                                                             Reconstruction rec) {
  if (rec == Reconstruction::first_order) return {to_prim(m), to_prim(p)};
  Prim5 l{}, r{};
  for (int k = 0; k < 5; ++k) {
    l[k] = m[k] + 0.5 * minmod(m[k] - mm[k], p[k] - m[k]);
    r[k] = p[k] - 0.5 * minmod(p[k] - m[k], pp[k] - p[k]);
  }
  return {to_prim(l), to_prim(r)};
}

}  // namespace detail

/// dU/dt on interior cells (z-major, no ghosts). Ghosts must already be filled.
///
/// Mass, ρu^z and ρS use r-weighted face fluxes, (r₊F₊ − r₋F₋)/(r_i dr). This is the planar
/// difference (F₊ − F₋)/dr plus the geometric source (F₊ + F₋)/(2 r_i), i.e. −ρu^r/r,
/// −ρu^ru^z/r and −ρSu^r/r with the source built from face fluxes, and it makes the
/// discrete 2π∑ρ r dr dz exactly conservative.
///
/// ρu^r: the cylindrical equation is
///   ∂_t(ρu^r) + r⁻¹∂_r(rρ(u^r)²) + ∂_z(ρu^ru^z) + ∂_r p + μ⁻¹[B∂_rB + B²/r] = 0.
/// With the planar flux ρ(u^r)² + P, P = p + B²/(2μ), the flux difference already holds
/// ∂_r p + μ⁻¹B∂_rB, since the isotropic part P·I contributes ∇P with no hoop term.
/// The remaining source is −ρ(u^r)²/r − B²/(μr); there is no extra −B²/(2μr).
///
/// B^θ: planar flux with no source; the axis face flux is zero because B^θ vanishes there.
inline std::vector<ConservedState> spatial_operator(const FieldState& s, const EosParams& eos,
                                                    const SchemeOptions& opt) {
  const auto& g = s.grid;
  const std::size_t nr = g.nr, nz = g.nz;
  const auto inr = static_cast<std::ptrdiff_t>(nr);

  std::vector<detail::Prim5> W(s.cells.size());
  const std::size_t rows = nz + 2 * g.ghost_width;
  parallel_for(rows, opt.threads, [&](std::size_t row) {
    const std::size_t base = row * g.stride();
    for (std::size_t k = 0; k < g.stride(); ++k)
      W[base + k] = detail::to_array(cons_to_prim(s.cells[base + k]));
  });
  auto Wat = [&](std::ptrdiff_t i, std::ptrdiff_t j) -> const detail::Prim5& {
    return W[g.index(i, j)];
  };

  // r-faces: (nr+1) per row, face i sits between cells i−1 and i.
  std::vector<FluxVector> Fr((nr + 1) * nz);
  parallel_for(nz, opt.threads, [&](std::size_t ju) {
    const auto j = static_cast<std::ptrdiff_t>(ju);
    for (std::ptrdiff_t i = 0; i <= inr; ++i) {
      const auto [l, r] = detail::face_states(Wat(i - 2, j), Wat(i - 1, j), Wat(i, j),
                                              Wat(i + 1, j), opt.reconstruction);
      auto f = hll_flux(l, r, Axis::r, eos);
      if (i == 0) f.btheta = 0.0;
      Fr[ju * (nr + 1) + static_cast<std::size_t>(i)] = f;
    }
  });
  // z-faces: (nz+1) rows of nr faces, face row j sits between rows j−1 and j.
  std::vector<FluxVector> Fz(nr * (nz + 1));
  parallel_for(nz + 1, opt.threads, [&](std::size_t ju) {
    const auto j = static_cast<std::ptrdiff_t>(ju);
    for (std::ptrdiff_t i = 0; i < inr; ++i) {
      const auto [l, r] = detail::face_states(Wat(i, j - 2), Wat(i, j - 1), Wat(i, j),
                                              Wat(i, j + 1), opt.reconstruction);
      Fz[ju * nr + static_cast<std::size_t>(i)] = hll_flux(l, r, Axis::z, eos);
    }
  });

  std::vector<ConservedState> dU(nr * nz);
  const double inv_dr = 1.0 / g.dr, inv_dz = 1.0 / g.dz, inv_mu = 1.0 / eos.mu;
  parallel_for(nz, opt.threads, [&](std::size_t ju) {
    for (std::size_t iu = 0; iu < nr; ++iu) {
      const auto i = static_cast<std::ptrdiff_t>(iu);
      const double rc = g.r(i), rm = static_cast<double>(iu) * g.dr, rp = rm + g.dr;
      const auto& fm = Fr[ju * (nr + 1) + iu];
      const auto& fp = Fr[ju * (nr + 1) + iu + 1];
      const auto& gm = Fz[ju * nr + iu];
      const auto& gp = Fz[(ju + 1) * nr + iu];
      ConservedState d;
      for (int k : {0, 2, 3})
        d[k] = -(rp * fp[k] - rm * fm[k]) * inv_dr / rc - (gp[k] - gm[k]) * inv_dz;
      const auto& w = Wat(i, static_cast<std::ptrdiff_t>(ju));
      d.mr = -(fp.mr - fm.mr) * inv_dr - (gp.mr - gm.mr) * inv_dz -
             (w[0] * w[1] * w[1] + w[4] * w[4] * inv_mu) / rc;
      d.btheta = -(fp.btheta - fm.btheta) * inv_dr - (gp.btheta - gm.btheta) * inv_dz;
      dU[ju * nr + iu] = d;
    }
  });
  return dU;
}

struct StepResult {
  FieldState state;
  RunStatus status = RunStatus::ok;
};

namespace detail {

inline bool all_finite(const FieldState& s) {
  for (std::size_t j = 0; j < s.grid.nz; ++j)
    for (std::size_t i = 0; i < s.grid.nr; ++i) {
      const auto& q = s.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j));
      for (int k = 0; k < ConservedState::size; ++k)
        if (!std::isfinite(q[k])) return false;
    }
  return true;
}

// out = a·x + b·(y + dt·dU) on interior cells.
inline void combine(FieldState& out, double a, const FieldState& x, double b,
                    const FieldState& y, double dt, const std::vector<ConservedState>& dU,
                    unsigned threads) {
  const std::size_t nr = out.grid.nr;
  parallel_for(out.grid.nz, threads, [&](std::size_t ju) {
    const auto j = static_cast<std::ptrdiff_t>(ju);
    for (std::size_t iu = 0; iu < nr; ++iu) {
      const auto i = static_cast<std::ptrdiff_t>(iu);
      const auto& d = dU[ju * nr + iu];
      auto& q = out.at(i, j);
      for (int k = 0; k < ConservedState::size; ++k) {
        const double stage = y.at(i, j)[k] + dt * d[k];
        q[k] = a == 0.0 ? stage : a * x.at(i, j)[k] + b * stage;
      }
    }
  });
}

}  // namespace detail

/// One explicit step of size dt. The input is not modified; the update is written to a
/// separate buffer.
inline StepResult step(const FieldState& state, double dt, const EosParams& eos,
                       const SchemeOptions& opt = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("step: dt must be positive");
  FieldState u0 = state;
  RunStatus status = apply_boundaries(u0, eos, opt.boundary_threshold);
  if (!detail::all_finite(u0)) return {u0, RunStatus::blowup_candidate};
  const double limit = cfl_dt(u0, 1.0, eos);
  if (dt > limit * (1.0 + 1e-12))
    throw ConfigError("step: dt " + std::to_string(dt) + " exceeds the CFL limit " +
                      std::to_string(limit));

  StepResult res{u0, status};
  const auto d0 = spatial_operator(u0, eos, opt);
  detail::combine(res.state, 0.0, u0, 1.0, u0, dt, d0, opt.threads);
  if (opt.integrator == TimeIntegrator::heun) {
    if (!detail::all_finite(res.state)) {
      res.status = RunStatus::blowup_candidate;
      return res;
    }
    FieldState u1 = res.state;
    res.status = worst(res.status, apply_boundaries(u1, eos, opt.boundary_threshold));
    const auto d1 = spatial_operator(u1, eos, opt);
    detail::combine(res.state, 0.5, u0, 0.5, u1, dt, d1, opt.threads);
  }
  res.state.time = state.time + dt;
  if (!detail::all_finite(res.state)) {
    res.status = RunStatus::blowup_candidate;
    return res;
  }
  res.status = worst(res.status, apply_boundaries(res.state, eos, opt.boundary_threshold));
  return res;
}

// ---------------------------------------------------------------------------
// State measurements used by the run loop and diagnostics

/// Largest entry of the discrete in-plane velocity gradient (centered differences) together
/// with the hoop strain u^r/r. Ghosts must be filled.
inline double max_velocity_gradient(const FieldState& s) {
  const auto& g = s.grid;
  double m = 0.0;
  auto vel = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
    const auto& q = s.at(i, j);
    return std::pair<double, double>{q.mr / q.rho, q.mz / q.rho};
  };
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(g.nz); ++j)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.nr); ++i) {
      const auto [ure, uze] = vel(i + 1, j);
      const auto [urw, uzw] = vel(i - 1, j);
      const auto [urn, uzn] = vel(i, j + 1);
      const auto [urs, uzs] = vel(i, j - 1);
      const auto [urc, uzc] = vel(i, j);
      (void)uzc;
      const double e[5] = {(ure - urw) / (2 * g.dr), (uze - uzw) / (2 * g.dr),
                           (urn - urs) / (2 * g.dz), (uzn - uzs) / (2 * g.dz), urc / g.r(i)};
      for (double v : e) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
      }
    }
  return m;
}

/// Largest R = √(r²+z²) over interior cells whose state differs from the background by more
/// than `threshold` in any component; 0 for the background.
inline double support_radius(const FieldState& s, const EosParams& eos,
                             double threshold = 1e-12) {
  const auto bg = prim_to_cons(background_state(eos));
  const auto& g = s.grid;
  double R = 0.0;
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(g.nz); ++j)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.nr); ++i) {
      const auto& q = s.at(i, j);
      for (int k = 0; k < ConservedState::size; ++k)
        if (!(std::abs(q[k] - bg[k]) <= threshold)) {
          R = std::max(R, std::hypot(g.r(i), g.z(j)));
          break;
        }
    }
  return R;
}

// ---------------------------------------------------------------------------
// Snapshots

inline constexpr char kSnapshotMagic[8] = {'M', 'H', 'D', 'B', 'L', 'O', 'W', '1'};

namespace detail {

template <class T>
void write_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace detail

/// Header "MHDBLOW1", u64 nr, nz, f64 dr, dz, time, then the five conserved planes
/// (ρ, ρu^r, ρu^z, ρS, B^θ), each nz rows of nr values.
inline void write_snapshot(const std::string& path, const FieldState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open snapshot for writing: " + path);
  os.write(kSnapshotMagic, 8);
  detail::write_le<std::uint64_t>(os, s.grid.nr);
  detail::write_le<std::uint64_t>(os, s.grid.nz);
  detail::write_le<double>(os, s.grid.dr);
  detail::write_le<double>(os, s.grid.dz);
  detail::write_le<double>(os, s.time);
  for (int k = 0; k < ConservedState::size; ++k)
    for (std::size_t j = 0; j < s.grid.nz; ++j)
      for (std::size_t i = 0; i < s.grid.nr; ++i)
        detail::write_le<double>(
            os, s.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j))[k]);
  if (!os) throw IoError("failed writing snapshot: " + path);
}

/// Reads a snapshot; r_max = nr·dr and z_half = nz·dz/2 are reconstructed. Ghost cells come
/// back zeroed and must be refilled with apply_boundaries.
inline FieldState read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open snapshot: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw IoError("not a snapshot file (bad magic): " + path);
  const auto nr = detail::read_le<std::uint64_t>(is);
  const auto nz = detail::read_le<std::uint64_t>(is);
  const double dr = detail::read_le<double>(is), dz = detail::read_le<double>(is);
  const double time = detail::read_le<double>(is);
  if (!is) throw IoError("truncated snapshot header: " + path);
  auto grid = Grid2D::make(nr, nz, dr * static_cast<double>(nr), 0.5 * dz * static_cast<double>(nz));
  FieldState s(grid, ConservedState{});
  s.time = time;
  for (int k = 0; k < ConservedState::size; ++k)
    for (std::size_t j = 0; j < nz; ++j)
      for (std::size_t i = 0; i < nr; ++i)
        s.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j))[k] =
            detail::read_le<double>(is);
  if (!is) throw IoError("truncated snapshot data: " + path);
  return s;
}

}  // namespace mhdblow

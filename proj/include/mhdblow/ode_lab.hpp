#pragma once
// Comparison ODEs for the blow-up functionals, the Orlicz nonlinearity Υ and the
// pressure-sandwich constants.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mhdblow/common.hpp"
#include "mhdblow/parallel.hpp"

namespace mhdblow {

// ---------------------------------------------------------------------------
// Υ and the sandwich constants

/// (1+a)^γ − 1 − γa for a ≥ −1, accurate for small |a|.
inline double binomial_gap(double a, double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) throw DomainError("binomial_gap: need gamma > 1");
  if (!(a >= -1.0)) throw DomainError("binomial_gap: need a >= -1");
  if (std::abs(a) < 0.01) {
    // Σ_{k≥2} C(γ,k) a^k; with |a| < 0.01, 12 terms reach rounding level.
    double term = gamma * (gamma - 1.0) / 2.0 * a * a;
    double sum = term;
    for (int k = 3; k <= 14; ++k) {
      term *= (gamma - (k - 1)) / k * a;
      sum += term;
    }
    return sum;
  }
  if (a == -1.0) return gamma - 1.0;
  return std::expm1(gamma * std::log1p(a)) - gamma * a;
}

/// Υ(x) = (|x|+1)^γ − 1 − γ|x|.
inline double upsilon(double x, double gamma) { return binomial_gap(std::abs(x), gamma); }

/// The sandwich ratio (ρ^γ − 1 − γ(ρ−1))/(ρ−1)²; its ρ → 1 limit is γ(γ−1)/2.
inline double sandwich_ratio(double rho, double gamma) {
  if (!(rho >= 0.0)) throw DomainError("sandwich_ratio: need rho >= 0");
  const double a = rho - 1.0;
  if (a == 0.0) return 0.5 * gamma * (gamma - 1.0);
  return binomial_gap(a, gamma) / (a * a);
}

struct SandwichResult {
  double gamma = 0.0;
  std::optional<double> C_tilde;       // inf of the ratio, for γ ≥ 2
  double argmin_rho = 0.0;             // where the infimum is attained (0 for the ρ → 0⁺ limit)
  std::optional<double> witness_rho;   // for γ < 2: a density where the ratio is small
  double witness_ratio = 0.0;
};

struct SandwichSearch {
  double rho_min = 1e-12;
  double rho_max = 1e6;
  std::size_t grid_points = 4000;
  double witness_level = 1e-2;
};

/// For γ ≥ 2 returns C̃ = inf_{0<ρ≤ρ_max} ratio(ρ) from a log-grid scan refined by golden
/// section, including the ρ → 0⁺ limit γ − 1. For 1 < γ < 2 the ratio decays like ρ^{γ−2}
/// and the result carries the largest-ρ witness instead.
inline SandwichResult sandwich_constants(double gamma, const SandwichSearch& cfg = {}) {
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw DomainError("sandwich_constants: need gamma > 1");
  if (!(cfg.rho_min > 0.0) || !(cfg.rho_max > cfg.rho_min) || cfg.grid_points < 3)
    throw ConfigError("sandwich_constants: bad search range");
  SandwichResult res;
  res.gamma = gamma;
  const double lo = std::log(cfg.rho_min), hi = std::log(cfg.rho_max);
  const double dl = (hi - lo) / static_cast<double>(cfg.grid_points - 1);
  auto at = [&](double l) { return sandwich_ratio(std::exp(l), gamma); };

  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cfg.grid_points; ++k) {
    const double v = at(lo + dl * static_cast<double>(k));
    if (v < best_val) best_val = v, best = k;
  }
  double best_l = lo + dl * static_cast<double>(best);

  // Golden section on [l_{k−1}, l_{k+1}] around the grid minimum.
  double a = lo + dl * static_cast<double>(best == 0 ? 0 : best - 1);
  double b = lo + dl * static_cast<double>(std::min(best + 1, cfg.grid_points - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = at(c), fd = at(d);
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - inv_phi * (b - a);
      fc = at(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + inv_phi * (b - a);
      fd = at(d);
    }
  }
  for (double l : {c, d})
    if (const double v = at(l); v < best_val) best_val = v, best_l = l;

  if (gamma >= 2.0) {
    const double limit0 = gamma - 1.0;  // ratio at ρ = 0
    if (limit0 <= best_val) {
      res.C_tilde = limit0;
      res.argmin_rho = 0.0;
    } else {
      res.C_tilde = best_val;
      res.argmin_rho = std::exp(best_l);
    }
    return res;
  }
  const double rw = cfg.rho_max;
  res.witness_rho = rw;
  res.witness_ratio = sandwich_ratio(rw, gamma);
  if (!(res.witness_ratio < cfg.witness_level)) res.witness_rho.reset();
  return res;
}

// ---------------------------------------------------------------------------
// Exponential integrator for q'' + c q' = f(t, q)

namespace detail {

/// φ_0..φ_4 at z ≤ 0, with φ_k(z) = Σ_j z^j/(j+k)!.
inline std::array<double, 5> phi_functions(double z) {
  std::array<double, 5> p{};
  if (std::abs(z) < 1.0) {
    for (int k = 0; k < 5; ++k) {
      double fact = 1.0;
      for (int m = 2; m <= k; ++m) fact *= m;
      double term = 1.0 / fact;
      double sum = 0.0;
      for (int j = 0; j < 30; ++j) {
        sum += term;
        term *= z / static_cast<double>(j + k + 1);
      }
      p[k] = sum;
    }
    return p;
  }
  p[0] = std::exp(z);
  p[1] = std::expm1(z) / z;
  double fact = 1.0;
  for (int k = 2; k < 5; ++k) {
    fact *= (k - 1);
    p[k] = (p[k - 1] - 1.0 / fact) / z;
  }
  return p;
}

using Vec2 = std::array<double, 2>;

// g(M)v for M = hL, L = [[0,1],[0,−c]], when g = φ_k: g(M) = φ_k(0) I + φ_{k+1}(−ch) M.
struct PhiOps {
  double h, c;
  std::array<double, 5> phi;  // at z = −c·h

  Vec2 apply(int k, Vec2 v) const {
    static constexpr double inv_fact[5] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
    const double s = phi[k + 1];
    return {inv_fact[k] * v[0] + s * h * v[1], inv_fact[k] * v[1] - s * c * h * v[1]};
  }
};

}  // namespace detail

using ForcingFn = std::function<double(double t, double q)>;

struct OdeControls {
  double rtol = 1e-10;
  double atol = 1e-14;
  double h_initial = 1e-3;
  double h_max = std::numeric_limits<double>::infinity();
  double horizon = 1e12;
  double blowup_threshold = 1e12;
  // A step below collapse_rel·max(1, t) counts as collapsed.
  double collapse_rel = 1e-14;
  std::size_t max_steps = 2'000'000;
  std::size_t store_every = 1;  // 0 keeps only the endpoints
};

enum class Termination { blowup, horizon, step_collapse };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::blowup: return "blow-up";
    case Termination::horizon: return "horizon";
    case Termination::step_collapse: return "step-collapse";
  }
  return "unknown";
}

struct OdeSample {
  double t, value, derivative;
};

struct OdeRun {
  std::vector<OdeSample> trajectory;
  std::optional<double> blowup_time;
  Termination terminated_reason = Termination::horizon;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// One ETDRK4 (Cox–Matthews) step of size h for y = (q, q'), y' = L y + (0, f(t, q)).
/// With c = 0 it is the classical fourth-order Runge–Kutta method.
inline detail::Vec2 etdrk4_step(const ForcingFn& f, double c, double t, detail::Vec2 y,
                                double h) {
  using detail::Vec2;
  const detail::PhiOps full{h, c, detail::phi_functions(-c * h)};
  const detail::PhiOps half{0.5 * h, c, detail::phi_functions(-0.5 * c * h)};
  auto N = [&](double tt, const Vec2& v) { return Vec2{0.0, f(tt, v[0])}; };
  auto axpy = [](Vec2 a, double s, Vec2 b) { return Vec2{a[0] + s * b[0], a[1] + s * b[1]}; };

  const Vec2 Ey = half.apply(0, y);  // e^{Lh/2} y
  const Vec2 Nu = N(t, y);
  const Vec2 a = axpy(Ey, 0.5 * h, half.apply(1, Nu));
  const Vec2 Na = N(t + 0.5 * h, a);
  const Vec2 b = axpy(Ey, 0.5 * h, half.apply(1, Na));
  const Vec2 Nb = N(t + 0.5 * h, b);
  const Vec2 Ea = half.apply(0, a);
  const Vec2 cc = axpy(Ea, 0.5 * h, half.apply(1, Vec2{0.0, 2.0 * Nb[1] - Nu[1]}));
  const Vec2 Nc = N(t + h, cc);

  // f1 = φ1 − 3φ2 + 4φ3, f2 = φ2 − 2φ3, f3 = −φ2 + 4φ3, all at hL.
  auto combo = [&](double w1, double w2, double w3, const Vec2& v) {
    const Vec2 p1 = full.apply(1, v), p2 = full.apply(2, v), p3 = full.apply(3, v);
    return Vec2{w1 * p1[0] + w2 * p2[0] + w3 * p3[0], w1 * p1[1] + w2 * p2[1] + w3 * p3[1]};
  };
  Vec2 out = full.apply(0, y);
  const Vec2 t1 = combo(1.0, -3.0, 4.0, Nu);
  const Vec2 t2 = combo(0.0, 1.0, -2.0, Vec2{0.0, Na[1] + Nb[1]});
  const Vec2 t3 = combo(0.0, -1.0, 4.0, Nc);
  for (int k = 0; k < 2; ++k) out[k] += h * (t1[k] + 2.0 * t2[k] + t3[k]);
  return out;
}

/// Fixed-step integration to t_end; used to measure the scheme's order.
inline detail::Vec2 integrate_fixed_step(const ForcingFn& f, double c, double t0,
                                         detail::Vec2 y, double t_end, std::size_t steps) {
  if (steps == 0 || !(t_end > t0)) throw ConfigError("integrate_fixed_step: bad interval");
  const double h = (t_end - t0) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k)
    y = etdrk4_step(f, c, t0 + h * static_cast<double>(k), y, h);
  return y;
}

/// Adaptive ETDRK4 with step-doubling error control. Blow-up is declared when |q| exceeds
/// the threshold and the accepted step has shrunk below collapse_rel·max(1, t). Time is
/// accumulated as an unevaluated pair (hi, lo) so steps far below ulp(t) still advance it;
/// long lifespans otherwise stall before the solution reaches the threshold.
inline OdeRun integrate_damped(const ForcingFn& f, double c, double t0, detail::Vec2 y,
                               const OdeControls& ctl) {
  using detail::Vec2;
  if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("damping must be >= 0");
  if (!(ctl.rtol > 0.0) || !(ctl.atol > 0.0) || !(ctl.horizon > t0) || !(ctl.h_initial > 0.0) ||
      !(ctl.collapse_rel > 0.0))
    throw ConfigError("ode controls: tolerances, initial step and horizon must be positive");
  OdeRun run;
  double t_hi = t0, t_lo = 0.0;
  double h = std::min(ctl.h_initial, ctl.h_max);
  run.trajectory.push_back({t0, y[0], y[1]});
  std::size_t since_store = 0;
  auto now = [&] { return t_hi + t_lo; };
  auto finish = [&](Termination why) {
    run.terminated_reason = why;
    if (why == Termination::blowup) run.blowup_time = now();
    if (run.trajectory.back().t != now()) run.trajectory.push_back({now(), y[0], y[1]});
    return run;
  };
  while (run.accepted_steps + run.rejected_steps < ctl.max_steps) {
    const double t = now();
    // Steps this small carry no information even with the compensated clock.
    if (h < 1e-30 * std::max(1.0, std::abs(t)))
      return finish(std::abs(y[0]) > ctl.blowup_threshold ? Termination::blowup
                                                           : Termination::step_collapse);
    h = std::min({h, ctl.h_max, (ctl.horizon - t_hi) - t_lo});
    const Vec2 big = etdrk4_step(f, c, t, y, h);
    const Vec2 mid = etdrk4_step(f, c, t, y, 0.5 * h);
    const Vec2 fine = etdrk4_step(f, c, t + 0.5 * h, mid, 0.5 * h);
    double err = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double scale = ctl.atol + ctl.rtol * std::max(std::abs(y[k]), std::abs(fine[k]));
      err = std::max(err, std::abs(fine[k] - big[k]) / (15.0 * scale));
    }
    if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    const double factor =
        err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err > 1.0) {
      ++run.rejected_steps;
      h *= factor;
      continue;
    }
    ++run.accepted_steps;
    const double h_taken = h;
    // TwoSum of t_hi and h, folding the rounding error into t_lo.
    const double s = t_hi + h, bb = s - t_hi;
    t_lo += (t_hi - (s - bb)) + (h - bb);
    t_hi = s;
    y = fine;
    if (ctl.store_every != 0 && ++since_store >= ctl.store_every) {
      run.trajectory.push_back({now(), y[0], y[1]});
      since_store = 0;
    }
    if (std::abs(y[0]) > ctl.blowup_threshold &&
        h_taken < ctl.collapse_rel * std::max(1.0, std::abs(now())))
      return finish(Termination::blowup);
    if (now() >= ctl.horizon) return finish(Termination::horizon);
    h = h_taken * factor;
  }
  return finish(Termination::step_collapse);
}

// ---------------------------------------------------------------------------
// Comparison systems

/// X'' = C X²/(eᵗ (t+R₀)^{(n−1)/2}) + X with X(0) = ε·X0, X'(0) = ε·Y0.
struct BlowupSystemParams {
  double C = 1.0;
  int n = 3;
  double R0 = 1.0;
  double X0 = 0.5;
  double Y0 = 0.5;
  double epsilon = 0.1;
  bool linearized = false;  // drop the quadratic term

  void validate() const {
    if (!(C > 0.0)) throw ConfigError("blow-up system: C must be > 0");
    if (n < 1 || n > 3) throw ConfigError("blow-up system: n must be 1, 2 or 3");
    if (!(R0 > 0.0)) throw ConfigError("blow-up system: R0 must be > 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
      throw ConfigError("blow-up system: epsilon must be finite and >= 0");
    if (epsilon > 0.0 && !(X0 + Y0 > 0.0))
      throw ConfigError("blow-up system: need X(0) + X'(0) > 0");
  }
};

/// Integrates the blow-up system in the variable Z = e^{−t}X, which satisfies
/// Z'' + 2Z' = C Z²/(t+R₀)^{(n−1)/2} (or Z'' + 2Z' = 0 when linearized). Trajectory values
/// are (Z, Z'); blow-up of X and of Z coincide in finite time, and the threshold applies to Z.
inline OdeRun integrate_blowup_system(const BlowupSystemParams& p, const OdeControls& ctl = {}) {
  p.validate();
  const double expo = 0.5 * (p.n - 1);
  ForcingFn f = [p, expo](double t, double z) {
    if (p.linearized) return 0.0;
    return p.C * z * z / std::pow(t + p.R0, expo);
  };
  // Z(0) = X(0), Z'(0) = X'(0) − X(0).
  const double z0 = p.epsilon * p.X0, zp0 = p.epsilon * (p.Y0 - p.X0);
  return integrate_damped(f, 2.0, 0.0, {z0, zp0}, ctl);
}

/// The same system in the original variable X, integrated without the exponential weight;
/// only usable while eᵗ stays representable.
inline OdeRun integrate_blowup_system_direct(const BlowupSystemParams& p,
                                             const OdeControls& ctl = {}) {
  p.validate();
  const double expo = 0.5 * (p.n - 1);
  ForcingFn f = [p, expo](double t, double x) {
    const double lin = x;
    if (p.linearized) return lin;
    return p.C * x * x * std::exp(-t) / std::pow(t + p.R0, expo) + lin;
  };
  return integrate_damped(f, 0.0, 0.0, {p.epsilon * p.X0, p.epsilon * p.Y0}, ctl);
}

/// I'' + damping·I' = κ (1+t)^{−λ} Υ(I; γ) with I(0) = ε, I'(0) = I0p.
struct OrliczParams {
  double gamma = 1.5;
  double lambda = 1.0;
  double alpha = 1.0;  // Υ(x) ~ γ(γ−1)x²/2 near 0
  double beta = 0.5;   // Υ(x) ~ x^γ at infinity, β = γ − 1
  double kappa = 1.0;
  double damping = 1.0;
  double epsilon = 0.1;
  double I0p = 0.0;

  static OrliczParams with_gamma(double gamma, double lambda) {
    OrliczParams p;
    p.gamma = gamma;
    p.lambda = lambda;
    p.beta = gamma - 1.0;
    return p;
  }

  void validate() const {
    if (!(gamma > 1.0) || !(gamma <= 2.0)) throw ConfigError("orlicz: gamma must be in (1, 2]");
    if (!(lambda >= 0.0) || !(lambda <= 1.0)) throw ConfigError("orlicz: lambda must be in [0, 1]");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("orlicz: alpha, beta must be > 0");
    if (!(kappa > 0.0)) throw ConfigError("orlicz: kappa must be > 0");
    if (!(damping >= 0.0)) throw ConfigError("orlicz: damping must be >= 0");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("orlicz: epsilon must be > 0");
    if (!(I0p >= 0.0)) throw ConfigError("orlicz: I0p must be >= 0");
  }
};

inline OdeRun integrate_orlicz_system(const OrliczParams& p, const OdeControls& ctl = {}) {
  p.validate();
  ForcingFn f = [p](double t, double i) {
    return p.kappa * std::pow(1.0 + t, -p.lambda) * upsilon(i, p.gamma);
  };
  return integrate_damped(f, p.damping, 0.0, {p.epsilon, p.I0p}, ctl);
}

// ---------------------------------------------------------------------------
// Lifespan sweeps

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("least_squares: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw ConfigError("least_squares: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return f;
}

enum class SweepSystem { blowup, orlicz };
enum class FitModel { power_law, exponential };  // log T vs log ε, or log T vs ε^{−α}

struct SweepParams {
  SweepSystem system = SweepSystem::blowup;
  BlowupSystemParams blowup;
  OrliczParams orlicz;
  OdeControls controls;
  unsigned threads = 1;
};

struct FitReport {
  FitModel model = FitModel::power_law;
  std::string description;
  std::vector<double> epsilons;
  std::vector<double> blowup_times;  // NaN where no blow-up was found
  std::vector<Termination> reasons;
  LinearFit fit;
  std::optional<double> expected_slope;
  bool all_blew_up = false;
  std::string warning;
};

inline FitModel fit_model_for(const SweepParams& p) {
  if (p.system == SweepSystem::blowup) return p.blowup.n == 3 ? FitModel::exponential : FitModel::power_law;
  return p.orlicz.lambda >= 1.0 ? FitModel::exponential : FitModel::power_law;
}

/// Integrates each ε and fits log T against log ε (power law) or against ε^{−α}.
inline FitReport lifespan_sweep_fit(const SweepParams& p, const std::vector<double>& epsilons) {
  if (epsilons.size() < 6) throw ConfigError("lifespan sweep needs at least 6 epsilon values");
  const auto [emin, emax] = std::minmax_element(epsilons.begin(), epsilons.end());
  if (!(*emin > 0.0) || *emax < 10.0 * *emin * (1.0 - 1e-12))
    throw ConfigError("lifespan sweep epsilons must be positive and span at least one decade");
  FitReport rep;
  rep.model = fit_model_for(p);
  rep.epsilons = epsilons;
  rep.blowup_times.assign(epsilons.size(), std::numeric_limits<double>::quiet_NaN());
  rep.reasons.assign(epsilons.size(), Termination::horizon);
  parallel_for(epsilons.size(), p.threads, [&](std::size_t k) {
    OdeRun run;
    if (p.system == SweepSystem::blowup) {
      auto q = p.blowup;
      q.epsilon = epsilons[k];
      run = integrate_blowup_system(q, p.controls);
    } else {
      auto q = p.orlicz;
      q.epsilon = epsilons[k];
      run = integrate_orlicz_system(q, p.controls);
    }
    rep.reasons[k] = run.terminated_reason;
    if (run.blowup_time) rep.blowup_times[k] = *run.blowup_time;
  });

  const double alpha = p.system == SweepSystem::orlicz ? p.orlicz.alpha : 1.0;
  if (p.system == SweepSystem::blowup) {
    rep.description = "blow-up system n=" + std::to_string(p.blowup.n);
    if (p.blowup.n == 1) rep.expected_slope = -1.0;
    if (p.blowup.n == 2) rep.expected_slope = -2.0;
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "orlicz system lambda=%g gamma=%g", p.orlicz.lambda,
                  p.orlicz.gamma);
    rep.description = buf;
    if (p.orlicz.lambda < 1.0) rep.expected_slope = -alpha / (1.0 - p.orlicz.lambda);
  }
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    const double T = rep.blowup_times[k];
    if (!std::isfinite(T)) continue;
    if (T <= 10.0 && rep.warning.empty())
      rep.warning = "some lifespans are <= 10; epsilon range is not in the small-data regime";
    xs.push_back(rep.model == FitModel::power_law ? std::log(epsilons[k])
                                                  : std::pow(epsilons[k], -alpha));
    ys.push_back(std::log(T));
  }
  rep.all_blew_up = xs.size() == epsilons.size();
  if (!rep.all_blew_up) rep.warning = "not every epsilon produced a blow-up";
  if (xs.size() >= 2) rep.fit = least_squares(xs, ys);
  return rep;
}

}  // namespace mhdblow

#pragma once
// Equation of state, primitive/conserved variables and the azimuthal-field Lorentz force
// of the reduced axisymmetric MHD system in (r, z).

#include <cmath>
#include <string>

#include "mhdblow/common.hpp"

namespace mhdblow {

/// Polytropic EOS p = A ρ^γ e^S plus the magnetic permeability.
struct EosParams {
  double gamma = 2.0;
  double S_bar = 0.0;
  double A = 0.5;
  double mu = 1.0;
  double rho_bar = 1.0;

  /// A = 1/(γ e^{S̄}) so that the background sound speed is exactly one.
  static EosParams normalized(double gamma, double S_bar = 0.0, double mu = 1.0) {
    EosParams e;
    e.gamma = gamma;
    e.S_bar = S_bar;
    e.mu = mu;
    e.A = 1.0 / (gamma * std::exp(S_bar));
    e.validate();
    return e;
  }

  /// Arbitrary A; intended for unit tests of the EOS itself.
  static EosParams raw(double gamma, double A, double S_bar = 0.0, double mu = 1.0) {
    EosParams e;
    e.gamma = gamma;
    e.A = A;
    e.S_bar = S_bar;
    e.mu = mu;
    e.validate();
    return e;
  }

  void validate() const {
    if (!(gamma > 1.0) || !std::isfinite(gamma)) throw DomainError("eos.gamma must satisfy gamma > 1");
    if (!(A > 0.0) || !std::isfinite(A)) throw DomainError("eos.A must be positive");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("eos.mu must be positive");
    if (!std::isfinite(S_bar)) throw DomainError("eos.S_bar must be finite");
  }

  /// Background pressure p̄ = p(ρ̄, S̄).
  double p_bar() const { return A * std::pow(rho_bar, gamma) * std::exp(S_bar); }
};

struct PrimitiveState {
  double rho = 1.0;
  double ur = 0.0;
  double uz = 0.0;
  double S = 0.0;
  double btheta = 0.0;
};

struct ConservedState {
  double rho = 1.0;
  double mr = 0.0;
  double mz = 0.0;
  double rhoS = 0.0;
  double btheta = 0.0;

  static constexpr int size = 5;
  double& operator[](int k) {
    switch (k) {
      case 0: return rho;
      case 1: return mr;
      case 2: return mz;
      case 3: return rhoS;
      default: return btheta;
    }
  }
  double operator[](int k) const { return const_cast<ConservedState&>(*this)[k]; }

  friend ConservedState operator+(ConservedState a, const ConservedState& b) {
    for (int k = 0; k < size; ++k) a[k] += b[k];
    return a;
  }
  friend ConservedState operator-(ConservedState a, const ConservedState& b) {
    for (int k = 0; k < size; ++k) a[k] -= b[k];
    return a;
  }
  friend ConservedState operator*(double s, ConservedState a) {
    for (int k = 0; k < size; ++k) a[k] *= s;
    return a;
  }
  friend bool operator==(const ConservedState&, const ConservedState&) = default;
};

/// Density below this value is treated as a loss of admissibility, never clipped.
inline constexpr double kDensityFloor = 1e-12;

inline void require_positive_density(double rho, const char* where) {
  if (!(rho > 0.0)) throw PositivityError(std::string(where) + ": density must be positive");
}

inline double pressure(double rho, double S, const EosParams& eos) {
  require_positive_density(rho, "pressure");
  return eos.A * std::pow(rho, eos.gamma) * std::exp(S);
}

/// ∂p/∂ρ at fixed S.
inline double dp_drho(double rho, double S, const EosParams& eos) {
  require_positive_density(rho, "dp_drho");
  return eos.gamma * eos.A * std::pow(rho, eos.gamma - 1.0) * std::exp(S);
}

/// ∂²p/∂ρ² at fixed S.
inline double d2p_drho2(double rho, double S, const EosParams& eos) {
  require_positive_density(rho, "d2p_drho2");
  return eos.gamma * (eos.gamma - 1.0) * eos.A * std::pow(rho, eos.gamma - 2.0) * std::exp(S);
}

/// Total (gas + magnetic) pressure p + (B^θ)²/(2μ).
inline double total_pressure(const PrimitiveState& w, const EosParams& eos) {
  return pressure(w.rho, w.S, eos) + 0.5 * w.btheta * w.btheta / eos.mu;
}

struct WaveSpeeds {
  double sound = 0.0;
  double alfven = 0.0;
  double fast = 0.0;
};

/// In-plane signal speeds for a purely azimuthal field: the fast speed is √(c² + v_A²).
inline WaveSpeeds wave_speeds(const PrimitiveState& w, const EosParams& eos) {
  require_positive_density(w.rho, "wave_speeds");
  WaveSpeeds s;
  const double c2 = eos.gamma * pressure(w.rho, w.S, eos) / w.rho;
  const double a2 = w.btheta * w.btheta / (eos.mu * w.rho);
  s.sound = std::sqrt(c2);
  s.alfven = std::sqrt(a2);
  s.fast = std::sqrt(c2 + a2);
  return s;
}

inline ConservedState prim_to_cons(const PrimitiveState& w) {
  require_positive_density(w.rho, "prim_to_cons");
  return {w.rho, w.rho * w.ur, w.rho * w.uz, w.rho * w.S, w.btheta};
}

inline PrimitiveState cons_to_prim(const ConservedState& q) {
  if (!(q.rho > kDensityFloor))
    throw PositivityError("cons_to_prim: density " + std::to_string(q.rho) +
                          " at or below the positivity floor");
  const double inv = 1.0 / q.rho;
  return {q.rho, q.mr * inv, q.mz * inv, q.rhoS * inv, q.btheta};
}

inline PrimitiveState background_state(const EosParams& eos) {
  return {eos.rho_bar, 0.0, 0.0, eos.S_bar, 0.0};
}

struct LorentzForce {
  double fr = 0.0;
  double fz = 0.0;
};

/// The magnetic term on the momentum equations for B = B^θ e^θ:
/// fr = μ⁻¹[B^θ ∂_r B^θ + (B^θ)²/r], fz = μ⁻¹ B^θ ∂_z B^θ, i.e. -μ⁻¹(∇×B)×B.
inline LorentzForce lorentz_force_axisym(double btheta, double d_r_btheta, double d_z_btheta,
                                         double r, double mu) {
  if (!(r > 0.0)) throw AxisError("lorentz_force_axisym: requires r > 0");
  const double inv_mu = 1.0 / mu;
  return {inv_mu * (btheta * d_r_btheta + btheta * btheta / r), inv_mu * btheta * d_z_btheta};
}

/// Same force assembled as μ⁻¹[∇((B^θ)²/2) + ((B^θ)²/r) e^r]: a gradient of a nonnegative
/// quantity plus a one-signed radial term.
inline LorentzForce lorentz_force_gradient_form(double btheta, double d_r_btheta,
                                                double d_z_btheta, double r, double mu) {
  if (!(r > 0.0)) throw AxisError("lorentz_force_gradient_form: requires r > 0");
  const double grad_r = btheta * d_r_btheta;  // ∂_r (B²/2)
  const double grad_z = btheta * d_z_btheta;  // ∂_z (B²/2)
  return {(grad_r + btheta * btheta / r) / mu, grad_z / mu};
}

}  // namespace mhdblow

#pragma once

// k-dependent factors of the decoherence integrand, in reduced units.
//
//   Gamma(t) = prefactor * Int_0^inf dk  S_D k^(D-1) w(k) e^{-k^2/2} coth(beta E/2) G_D(k ell)
//                                       * sin^2(E t / 2) / E^2
//
// with w = (|u_k| - |v_k|)^2 = eps_k / E_k and G_D the direction average of
// sin^2(k . L).

#include "becprobe/error.hpp"
#include "becprobe/units.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace becprobe {

inline double free_energy(double k) noexcept { return 0.5 * k * k; }

/// Bogoliubov energy E_k = sqrt(2 eps_k g n + eps_k^2).
inline double dispersion(double k, double gB_red, double n0_red) {
  const double mu = gB_red * n0_red;
  if (mu < 0.0) throw DomainError("dispersion: g_B n0 < 0 gives complex Bogoliubov energies");
  return k * std::sqrt(mu + 0.25 * k * k);
}

/// dE/dk, used to size quadrature panels against the phase E_k t.
inline double group_velocity(double k, double mu) noexcept {
  const double root = std::sqrt(mu + 0.25 * k * k);
  if (root == 0.0) return 0.0;
  return (mu + 0.5 * k * k) / root;
}

/// (|u_k| - |v_k|)^2 = eps_k / E_k. At k = 0 returns the limit (0 if interacting, 1 if free).
inline double bogoliubov_weight(double k, double gB_red, double n0_red) {
  const double mu = gB_red * n0_red;
  if (mu < 0.0) throw DomainError("bogoliubov_weight: g_B n0 < 0");
  if (k == 0.0) return mu > 0.0 ? 0.0 : 1.0;
  return 0.5 * k / std::sqrt(mu + 0.25 * k * k);
}

/// coth(beta E / 2); exactly 1 at beta = inf, +inf at beta E = 0.
inline double thermal_factor(double E, double beta_red) noexcept {
  if (std::isinf(beta_red)) return 1.0;
  const double x = beta_red * E;
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  if (x < 1e-4) return 2.0 / x + x / 6.0 - x * x * x / 360.0;
  if (x > 80.0) return 1.0;
  return 1.0 / std::tanh(0.5 * x);
}

namespace detail {
// Boost promotes double to long double by default, at about twice the cost.
using double_policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
} // namespace detail

/// Direction average of sin^2(k . L) at fixed |k| = k, |L| = ell.
inline double angular_geometry(double k, double ell, Dimension dim) {
  const double x = k * ell;
  switch (dim) {
  case Dimension::D1: {
    const double s = std::sin(x);
    return s * s;
  }
  case Dimension::D2: {
    if (x < 0.05) {
      const double x2 = x * x;
      return x2 * (0.5 - x2 * (1.0 / 8.0 - x2 * (1.0 / 72.0 - x2 / 1152.0)));
    }
    return 0.5 * (1.0 - boost::math::cyl_bessel_j(0, 2.0 * x, detail::double_policy()));
  }
  case Dimension::D3: {
    if (x < 0.05) {
      const double x2 = x * x;
      return x2 * (1.0 / 3.0 - x2 * (1.0 / 15.0 - x2 * (2.0 / 315.0 - x2 / 2835.0)));
    }
    return 0.5 * (1.0 - std::sin(2.0 * x) / (2.0 * x));
  }
  }
  return 0.0;
}

/// Surface measure of the k-shell: S_D k^(D-1) with S = 2, 2 pi, 4 pi.
inline double prefactor_density(double k, Dimension dim) noexcept {
  switch (dim) {
  case Dimension::D1: return 2.0;
  case Dimension::D2: return 2.0 * std::numbers::pi * k;
  case Dimension::D3: return 4.0 * std::numbers::pi * k * k;
  }
  return 0.0;
}

inline double gaussian_cutoff(double k) noexcept { return std::exp(-0.5 * k * k); }

struct ModeFactors {
  double k = 0.0;
  double eps_k = 0.0;
  double E_k = 0.0;
  double weight = 0.0;
  double thermal = 1.0;
  double cutoff = 1.0;
  double geometry = 0.0;
};

inline ModeFactors mode_factors(double k, const ReducedParams& p) {
  ModeFactors m;
  m.k = k;
  m.eps_k = free_energy(k);
  m.E_k = dispersion(k, p.gB_red, p.n0_red);
  m.weight = bogoliubov_weight(k, p.gB_red, p.n0_red);
  m.thermal = thermal_factor(m.E_k, p.beta_red);
  m.cutoff = gaussian_cutoff(k);
  m.geometry = angular_geometry(k, p.ell, p.dim);
  return m;
}

enum class IntegrandKind { gamma_factor, decay_rate };

/// Time-independent part S_D k^(D-1) w cutoff coth G, together with E_k.
struct SpectralWeight {
  double value;
  double energy;
};

inline SpectralWeight spectral_weight(double k, const ReducedParams& p) {
  const double mu = p.mu();
  const double root = std::sqrt(mu + 0.25 * k * k);
  const double E = k * root;
  const double w = 0.5 * k / root;
  const double v = prefactor_density(k, p.dim) * w * gaussian_cutoff(k) * thermal_factor(E, p.beta_red) *
                   angular_geometry(k, p.ell, p.dim);
  return {v, E};
}

/// Integrand of Gamma(t) (without the overall prefactor), or of its exact time
/// derivative gamma(t) for kind = decay_rate.
inline double assemble_integrand(double k, double t, const ReducedParams& p, IntegrandKind kind) {
  if (k == 0.0) return 0.0;
  const auto [v, E] = spectral_weight(k, p);
  if (kind == IntegrandKind::gamma_factor) {
    const double s = std::sin(0.5 * E * t) / E;
    return v * s * s;
  }
  return v * std::sin(E * t) / (2.0 * E);
}

} // namespace becprobe

#pragma once

// Physical parameters of the probe/condensate system and their reduction to
// the internal unit system: hbar = k_B = m_B = 1, lengths in units of the
// impurity wavefunction width tau. Energies are then measured in
// E_tau = hbar^2 / (m_B tau^2) and times in hbar / E_tau.

#include "becprobe/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace becprobe {

enum class Dimension { D1 = 1, D2 = 2, D3 = 3 };

constexpr int rank(Dimension d) noexcept { return static_cast<int>(d); }

constexpr std::string_view to_string(Dimension d) noexcept {
  switch (d) {
  case Dimension::D1: return "1D";
  case Dimension::D2: return "2D";
  case Dimension::D3: return "3D";
  }
  return "?";
}

inline std::optional<Dimension> dimension_from_int(long d) noexcept {
  if (d == 1) return Dimension::D1;
  if (d == 2) return Dimension::D2;
  if (d == 3) return Dimension::D3;
  return std::nullopt;
}

inline constexpr std::array<Dimension, 3> all_dimensions{Dimension::D1, Dimension::D2, Dimension::D3};

namespace si {
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double k_B = 1.380649e-23;       // J / K
inline constexpr double amu = 1.66053906660e-27;  // kg
inline constexpr double bohr = 5.29177210903e-11; // m
} // namespace si

/// Represents T = 0 in ReducedParams::beta_red.
inline constexpr double infinite_beta = std::numeric_limits<double>::infinity();

/// Laboratory description of one experiment, SI units throughout.
struct PhysicalConfig {
  double m_A = 0.0;  ///< impurity mass (kg)
  double m_B = 0.0;  ///< condensate boson mass (kg)
  double a_B = 0.0;  ///< boson-boson scattering length (m)
  double a_AB = 0.0; ///< impurity-boson scattering length (m), any sign
  /// Condensate density for each effective dimension; entry D-1 is in m^-D.
  /// Only the entry of the active dimension is required.
  std::array<double, 3> n0{};
  double tau = 0.0; ///< Gaussian width of the impurity in one well (m)
  double L = 0.0;   ///< separation of the two well minima (m)
  double T = 0.0;   ///< temperature (K)
  Dimension dim = Dimension::D3;
  std::optional<double> transverse_length_1d; ///< radial oscillator length for quasi-1D (m)
  std::optional<double> transverse_length_2d; ///< axial oscillator length for quasi-2D (m)
  /// Direct overrides of the reduced interaction and density (bypass the reduction).
  std::optional<double> gB_red_override;
  std::optional<double> n0_red_override;

  double density() const noexcept { return n0[static_cast<std::size_t>(rank(dim) - 1)]; }
  double& density() noexcept { return n0[static_cast<std::size_t>(rank(dim) - 1)]; }
};

/// The same system in reduced units; the only parameter object the kernels accept.
struct ReducedParams {
  double gB_red = 0.0;
  double gAB_red = 0.0;
  double n0_red = 0.0;
  double beta_red = infinite_beta;
  double ell = 0.0; ///< L / tau
  Dimension dim = Dimension::D3;
  double prefactor = 0.0; ///< 8 g_AB^2 n0 / (2 pi)^D

  /// Chemical potential g_B n0; the squared phonon speed.
  double mu() const noexcept { return gB_red * n0_red; }
  bool zero_temperature() const noexcept { return std::isinf(beta_red); }
};

inline double prefactor_for(double gAB_red, double n0_red, Dimension dim) {
  return 8.0 * gAB_red * gAB_red * n0_red / std::pow(2.0 * std::numbers::pi, rank(dim));
}

/// Builds a ReducedParams directly in reduced units, deriving the prefactor.
inline ReducedParams make_reduced(double gB_red, double gAB_red, double n0_red, double beta_red, double ell,
                                  Dimension dim) {
  return ReducedParams{gB_red, gAB_red, n0_red, beta_red, ell, dim, prefactor_for(gAB_red, n0_red, dim)};
}

struct Violation {
  std::string field;
  std::string message;
};

inline std::vector<Violation> validate(const PhysicalConfig& c) {
  std::vector<Violation> out;
  auto need = [&out](bool ok, std::string field, std::string message) {
    if (!ok) out.push_back({std::move(field), std::move(message)});
  };
  auto finite = [](double x) { return std::isfinite(x); };

  need(finite(c.m_A) && c.m_A > 0, "m_A", "m_A must be > 0");
  need(finite(c.m_B) && c.m_B > 0, "m_B", "m_B must be > 0");
  need(finite(c.a_B) && c.a_B >= 0, "a_B", "a_B must be ≥ 0");
  need(finite(c.a_AB), "a_AB", "a_AB must be finite");
  const std::string nkey = "n0_" + std::to_string(rank(c.dim)) + "d";
  need(finite(c.density()) && c.density() > 0, nkey, nkey + " must be > 0 for the active dimension");
  need(finite(c.tau) && c.tau > 0, "tau", "tau must be > 0");
  need(finite(c.L) && c.L > 0, "L", "L must be > 0");
  if (c.tau > 0 && c.L > 0) need(c.L > c.tau, "L", "L must exceed tau");
  need(finite(c.T) && c.T >= 0, "T", "T must be ≥ 0");
  if (c.transverse_length_1d)
    need(finite(*c.transverse_length_1d) && *c.transverse_length_1d > 0, "transverse_length_1d",
         "transverse_length_1d must be > 0");
  if (c.transverse_length_2d)
    need(finite(*c.transverse_length_2d) && *c.transverse_length_2d > 0, "transverse_length_2d",
         "transverse_length_2d must be > 0");
  if (c.gB_red_override) need(*c.gB_red_override >= 0, "gB_red_override", "gB_red_override must be ≥ 0");
  if (c.n0_red_override) need(*c.n0_red_override > 0, "n0_red_override", "n0_red_override must be > 0");
  return out;
}

/// hbar^2 / (m_B tau^2) in joules.
inline double energy_unit(const PhysicalConfig& c) { return si::hbar * si::hbar / (c.m_B * c.tau * c.tau); }

/// m_B tau^2 / hbar in seconds.
inline double time_unit(const PhysicalConfig& c) { return c.m_B * c.tau * c.tau / si::hbar; }

namespace detail {

// Dimensionless factor dividing the 3D couplings under harmonic transverse
// confinement: g1 = g / (2 pi l^2), g2 = g / (sqrt(2 pi) l), lengths in tau.
inline double confinement_factor(const PhysicalConfig& c) {
  switch (c.dim) {
  case Dimension::D1: {
    if (!c.transverse_length_1d) throw ConfigError("transverse_length_1d is required for dim = 1");
    const double l = *c.transverse_length_1d / c.tau;
    return 2.0 * std::numbers::pi * l * l;
  }
  case Dimension::D2: {
    if (!c.transverse_length_2d) throw ConfigError("transverse_length_2d is required for dim = 2");
    const double l = *c.transverse_length_2d / c.tau;
    return std::sqrt(2.0 * std::numbers::pi) * l;
  }
  case Dimension::D3: return 1.0;
  }
  return 1.0;
}

inline double mass_ratio(const PhysicalConfig& c) {
  // m_B / mu with mu = m_A m_B / (m_A + m_B)
  return (c.m_A + c.m_B) / c.m_A;
}

} // namespace detail

inline ReducedParams to_reduced(const PhysicalConfig& c) {
  if (auto v = validate(c); !v.empty()) {
    std::string msg = "invalid physical configuration:";
    for (const auto& x : v) msg += " " + x.message + ";";
    throw ConfigError(msg);
  }
  const double s = detail::confinement_factor(c);
  const int D = rank(c.dim);

  ReducedParams r;
  r.dim = c.dim;
  r.gB_red = c.gB_red_override ? *c.gB_red_override : 4.0 * std::numbers::pi * (c.a_B / c.tau) / s;
  r.gAB_red = 2.0 * std::numbers::pi * (c.a_AB / c.tau) * detail::mass_ratio(c) / s;
  r.n0_red = c.n0_red_override ? *c.n0_red_override : c.density() * std::pow(c.tau, D);
  r.beta_red = c.T == 0.0 ? infinite_beta : energy_unit(c) / (si::k_B * c.T);
  r.ell = c.L / c.tau;
  r.prefactor = prefactor_for(r.gAB_red, r.n0_red, r.dim);
  return r;
}

/// Inverse of to_reduced. Quantities that the reduced set does not encode
/// (tau, masses, transverse lengths, densities of inactive dimensions) are
/// taken from `anchor`; everything else is rebuilt from `r`.
inline PhysicalConfig from_reduced(const ReducedParams& r, const PhysicalConfig& anchor) {
  PhysicalConfig c = anchor;
  c.dim = r.dim;
  c.gB_red_override.reset();
  c.n0_red_override.reset();
  const double s = detail::confinement_factor(c);
  const int D = rank(c.dim);
  c.a_B = r.gB_red * s * c.tau / (4.0 * std::numbers::pi);
  c.a_AB = r.gAB_red * s * c.tau / (2.0 * std::numbers::pi * detail::mass_ratio(c));
  c.density() = r.n0_red / std::pow(c.tau, D);
  c.T = std::isinf(r.beta_red) ? 0.0 : energy_unit(c) / (si::k_B * r.beta_red);
  c.L = r.ell * c.tau;
  return c;
}

} // namespace becprobe

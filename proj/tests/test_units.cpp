#include <catch_amalgamated.hpp>

#include "becprobe/units.hpp"

#include <algorithm>
#include <cmath>

using namespace becprobe;
using Catch::Matchers::WithinRel;

namespace {

PhysicalConfig lab(Dimension d = Dimension::D3) {
  PhysicalConfig c;
  c.m_A = 22.98976928 * si::amu;
  c.m_B = 86.909180527 * si::amu;
  c.a_B = 5.31e-9;
  c.a_AB = 3.5e-9;
  c.n0 = {3.4e6, 3.07e13, 3.058e20};
  c.tau = 70e-9;
  c.L = 700e-9;
  c.T = 6.5e-9;
  c.dim = d;
  c.transverse_length_1d = 100e-9;
  c.transverse_length_2d = 100e-9;
  return c;
}

bool has(const std::vector<Violation>& v, const std::string& msg) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.message == msg; });
}

} // namespace

TEST_CASE("validate reports each broken invariant") {
  auto c = lab();
  CHECK(validate(c).empty());

  c.a_B = -1e-9;
  CHECK(has(validate(c), "a_B must be ≥ 0"));

  c = lab();
  c.L = c.tau / 2;
  CHECK(has(validate(c), "L must exceed tau"));

  c = lab();
  c.T = -1;
  c.m_A = 0;
  const auto v = validate(c);
  CHECK(v.size() == 2);
  CHECK(has(v, "T must be ≥ 0"));
  CHECK(has(v, "m_A must be > 0"));
}

TEST_CASE("validate only needs the density of the active dimension") {
  auto c = lab(Dimension::D2);
  c.n0[0] = 0;
  c.n0[2] = 0;
  CHECK(validate(c).empty());
  c.n0[1] = 0;
  CHECK(has(validate(c), "n0_2d must be > 0 for the active dimension"));
}

TEST_CASE("negative impurity-boson scattering length is allowed") {
  auto c = lab();
  c.a_AB = -2e-9;
  CHECK(validate(c).empty());
  const auto r = to_reduced(c);
  CHECK(r.gAB_red < 0);
  CHECK(r.prefactor > 0);
}

TEST_CASE("to_reduced limits") {
  auto c = lab();
  c.T = 0;
  CHECK(std::isinf(to_reduced(c).beta_red));
  CHECK(to_reduced(c).zero_temperature());
  c.a_B = 0;
  CHECK(to_reduced(c).gB_red == 0.0);
}

TEST_CASE("to_reduced closed forms in 3D") {
  const auto c = lab();
  const auto r = to_reduced(c);
  const double pi = std::numbers::pi;
  CHECK_THAT(r.gB_red, WithinRel(4 * pi * c.a_B / c.tau, 1e-15));
  const double mu_AB = c.m_A * c.m_B / (c.m_A + c.m_B);
  CHECK_THAT(r.gAB_red, WithinRel(2 * pi * (c.a_AB / c.tau) * c.m_B / mu_AB, 1e-14));
  CHECK_THAT(r.n0_red, WithinRel(c.n0[2] * std::pow(c.tau, 3), 1e-14));
  CHECK_THAT(r.ell, WithinRel(10.0, 1e-15));
  const double E_tau = si::hbar * si::hbar / (c.m_B * c.tau * c.tau);
  CHECK_THAT(r.beta_red, WithinRel(E_tau / (si::k_B * c.T), 1e-14));
  CHECK_THAT(r.prefactor, WithinRel(8 * r.gAB_red * r.gAB_red * r.n0_red / std::pow(2 * pi, 3), 1e-14));
}

TEST_CASE("reduced-dimension couplings use the transverse oscillator length") {
  const double pi = std::numbers::pi;
  const auto r3 = to_reduced(lab(Dimension::D3));
  const auto r1 = to_reduced(lab(Dimension::D1));
  const auto r2 = to_reduced(lab(Dimension::D2));
  const double l = 100.0 / 70.0;
  CHECK_THAT(r1.gB_red, WithinRel(r3.gB_red / (2 * pi * l * l), 1e-14));
  CHECK_THAT(r2.gB_red, WithinRel(r3.gB_red / (std::sqrt(2 * pi) * l), 1e-14));
  CHECK_THAT(r1.gAB_red, WithinRel(r3.gAB_red / (2 * pi * l * l), 1e-14));
}

TEST_CASE("missing transverse length is a configuration error") {
  auto c = lab(Dimension::D1);
  c.transverse_length_1d.reset();
  CHECK_THROWS_AS(to_reduced(c), ConfigError);
  c = lab(Dimension::D2);
  c.transverse_length_2d.reset();
  CHECK_THROWS_AS(to_reduced(c), ConfigError);
  c = lab(Dimension::D3);
  c.transverse_length_1d.reset();
  c.transverse_length_2d.reset();
  CHECK_NOTHROW(to_reduced(c));
}

TEST_CASE("to_reduced rejects invalid input with every message") {
  auto c = lab();
  c.a_B = -1;
  c.L = 1e-9;
  try {
    to_reduced(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string w = e.what();
    CHECK(w.find("a_B must be ≥ 0") != std::string::npos);
    CHECK(w.find("L must exceed tau") != std::string::npos);
  }
}

TEST_CASE("overrides bypass the reduction") {
  auto c = lab();
  c.gB_red_override = 0.25;
  c.n0_red_override = 2.0;
  const auto r = to_reduced(c);
  CHECK(r.gB_red == 0.25);
  CHECK(r.n0_red == 2.0);
  CHECK(r.mu() == 0.5);
}

TEST_CASE("round trip through reduced units to 12 digits") {
  for (Dimension d : all_dimensions) {
    for (double T : {0.0, 1e-9, 2e-7}) {
      auto c = lab(d);
      c.T = T;
      const auto back = from_reduced(to_reduced(c), c);
      CHECK_THAT(back.a_B, WithinRel(c.a_B, 1e-12));
      CHECK_THAT(back.a_AB, WithinRel(c.a_AB, 1e-12));
      CHECK_THAT(back.density(), WithinRel(c.density(), 1e-12));
      CHECK_THAT(back.L, WithinRel(c.L, 1e-12));
      if (T == 0)
        CHECK(back.T == 0.0);
      else
        CHECK_THAT(back.T, WithinRel(c.T, 1e-12));
    }
  }
}

TEST_CASE("consistent rescaling of lengths and energies leaves reduced params unchanged") {
  for (Dimension d : all_dimensions) {
    const auto c = lab(d);
    const double s = 3.7;
    auto scaled = c;
    scaled.tau *= s;
    scaled.L *= s;
    scaled.a_B *= s;
    scaled.a_AB *= s;
    *scaled.transverse_length_1d *= s;
    *scaled.transverse_length_2d *= s;
    for (int i = 0; i < 3; ++i) scaled.n0[static_cast<std::size_t>(i)] /= std::pow(s, i + 1);
    scaled.T /= s * s;
    const auto a = to_reduced(c), b = to_reduced(scaled);
    CHECK_THAT(b.gB_red, WithinRel(a.gB_red, 1e-13));
    CHECK_THAT(b.gAB_red, WithinRel(a.gAB_red, 1e-13));
    CHECK_THAT(b.n0_red, WithinRel(a.n0_red, 1e-13));
    CHECK_THAT(b.beta_red, WithinRel(a.beta_red, 1e-13));
    CHECK_THAT(b.ell, WithinRel(a.ell, 1e-13));
    CHECK_THAT(b.prefactor, WithinRel(a.prefactor, 1e-13));
  }
}

TEST_CASE("energy and time units") {
  const auto c = lab();
  CHECK_THAT(energy_unit(c) * time_unit(c), WithinRel(si::hbar, 1e-15));
  // about 1.14 microkelvin at tau = 70 nm for Rb-87
  CHECK_THAT(energy_unit(c) / si::k_B, WithinRel(1.1375e-6, 2e-3));
}

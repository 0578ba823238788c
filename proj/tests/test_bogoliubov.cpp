#include <catch_amalgamated.hpp>

#include "becprobe/bogoliubov.hpp"

#include <cmath>
#include <numbers>

using namespace becprobe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("dispersion") {
  SECTION("free particle when g_B = 0") {
    for (double k : {0.0, 0.3, 1.0, 7.5}) CHECK(dispersion(k, 0.0, 2.0) == 0.5 * k * k);
  }
  SECTION("direct substitution") {
    // E = sqrt(2 * 0.5 * 1.5 + 0.25)
    CHECK_THAT(dispersion(1.0, 1.5, 1.0), WithinRel(1.3228756555322954, 1e-15));
    CHECK_THAT(dispersion(1.0, 0.75, 2.0), WithinRel(std::sqrt(1.75), 1e-15));
  }
  SECTION("phonon slope") {
    const double c = std::sqrt(0.3);
    CHECK_THAT(dispersion(1e-6, 0.3, 1.0) / 1e-6, WithinRel(c, 1e-10));
  }
  SECTION("negative g_B n0 is a domain error") { CHECK_THROWS_AS(dispersion(1.0, -0.1, 1.0), DomainError); }
}

TEST_CASE("group velocity is dE/dk") {
  for (double mu : {0.0, 0.04, 1.0})
    for (double k : {0.01, 0.5, 3.0}) {
      const double h = 1e-6;
      const double fd = (dispersion(k + h, mu, 1.0) - dispersion(k - h, mu, 1.0)) / (2 * h);
      CHECK_THAT(group_velocity(k, mu), WithinRel(fd, 1e-8));
    }
}

TEST_CASE("Bogoliubov weight") {
  CHECK(bogoliubov_weight(0.7, 0.0, 1.0) == 1.0);
  CHECK(bogoliubov_weight(0.0, 0.5, 1.0) == 0.0);
  CHECK(bogoliubov_weight(0.0, 0.0, 1.0) == 1.0);
  CHECK_THAT(bogoliubov_weight(1e4, 0.5, 1.0), WithinAbs(1.0, 1e-8));
  // small k: k / (2c)
  CHECK_THAT(bogoliubov_weight(1e-5, 0.5, 0.5), WithinRel(1e-5 / (2 * 0.5), 1e-9));
  double last = 0.0;
  for (double k = 0.01; k < 20; k *= 1.3) {
    const double w = bogoliubov_weight(k, 0.4, 1.0);
    CHECK(w > last);
    CHECK(w <= 1.0);
    CHECK_THAT(w, WithinRel(free_energy(k) / dispersion(k, 0.4, 1.0), 1e-14));
    last = w;
  }
}

TEST_CASE("thermal factor") {
  CHECK(thermal_factor(0.3, infinite_beta) == 1.0);
  CHECK_THAT(thermal_factor(2.0, 1.0), WithinRel(1.3130352854993313, 1e-15));
  CHECK_THAT(thermal_factor(1e-6, 1.0), WithinRel(2e6, 1e-9));
  CHECK_THAT(thermal_factor(1e-12, 1.0), WithinRel(2e12, 1e-12));
  CHECK(std::isinf(thermal_factor(0.0, 1.0)));
  for (double x = 1e-3; x <= 50.0; x *= 1.7)
    CHECK_THAT(thermal_factor(x, 1.0) * std::tanh(0.5 * x), WithinRel(1.0, 1e-12));
  // the two sides of the series threshold agree
  CHECK_THAT(thermal_factor(0.99999e-4, 1.0), WithinRel(1.0 / std::tanh(0.5 * 0.99999e-4), 1e-13));
}

TEST_CASE("angular geometry closed forms") {
  for (Dimension d : all_dimensions) CHECK(angular_geometry(0.0, 3.0, d) == 0.0);
  CHECK_THAT(angular_geometry(std::numbers::pi / 2, 1.0, Dimension::D1), WithinRel(1.0, 1e-15));
  CHECK_THAT(angular_geometry(3.7, 1.0, Dimension::D3), WithinRel(0.43927648001272791, 1e-14));
  CHECK_THAT(angular_geometry(3.7, 1.0, Dimension::D2), WithinRel(0.36070188367126122, 1e-13));
  CHECK_THAT(angular_geometry(1.0, 3.7, Dimension::D3), WithinRel(angular_geometry(3.7, 1.0, Dimension::D3), 1e-15));

  SECTION("small-argument limits") {
    const double x = 1e-3;
    CHECK_THAT(angular_geometry(x, 1.0, Dimension::D1), WithinRel(x * x, 1e-6));
    CHECK_THAT(angular_geometry(x, 1.0, Dimension::D2), WithinRel(x * x / 2, 1e-6));
    CHECK_THAT(angular_geometry(x, 1.0, Dimension::D3), WithinRel(x * x / 3, 1e-6));
  }
  SECTION("series and closed form meet at the switch point") {
    const double below = std::nextafter(0.05, 0.0);
    CHECK_THAT(angular_geometry(below, 1.0, Dimension::D3),
               WithinRel(0.5 * (1 - std::sin(2 * below) / (2 * below)), 1e-9));
    CHECK_THAT(angular_geometry(below, 1.0, Dimension::D2),
               WithinRel(0.5 * (1 - std::cyl_bessel_j(0.0, 2 * below)), 1e-9));
  }
  SECTION("bounded in [0, 1]") {
    for (Dimension d : all_dimensions)
      for (double x = 0.0; x < 60; x += 0.137) {
        const double g = angular_geometry(x, 1.0, d);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
      }
  }
}

TEST_CASE("mode factors satisfy their bounds") {
  for (Dimension d : all_dimensions)
    for (double mu : {0.0, 0.05, 1.0})
      for (double beta : {0.5, 30.0, infinite_beta}) {
        const auto p = make_reduced(mu, 0.7, 1.0, beta, 4.0, d);
        for (double k = 0.01; k <= 50.0; k *= 1.21) {
          const auto m = mode_factors(k, p);
          CHECK(m.E_k >= m.eps_k);
          CHECK(m.eps_k >= 0);
          CHECK(m.weight > 0);
          CHECK(m.weight <= 1);
          CHECK(m.thermal >= 1);
          // e^{-k^2/2} leaves the double range above k ~ 38.6
          CHECK(m.cutoff >= 0);
          if (k < 38) CHECK(m.cutoff > 0);
          CHECK(m.cutoff <= 1);
          CHECK(m.geometry >= 0);
          CHECK(m.geometry <= 1);
        }
      }
}

TEST_CASE("assembled integrand") {
  const auto p = make_reduced(0.3, 1.0, 1.0, 5.0, 3.0, Dimension::D3);
  for (double k : {0.2, 1.0, 4.0}) CHECK(assemble_integrand(k, 0.0, p, IntegrandKind::gamma_factor) == 0.0);
  for (double t : {0.0, 1.0, 10.0}) {
    CHECK(assemble_integrand(0.0, t, p, IntegrandKind::gamma_factor) == 0.0);
    CHECK(assemble_integrand(0.0, t, p, IntegrandKind::decay_rate) == 0.0);
  }

  SECTION("full product") {
    const double k = 1.3, t = 2.1;
    const auto m = mode_factors(k, p);
    const double s = std::sin(0.5 * m.E_k * t) / m.E_k;
    const double expected = prefactor_density(k, p.dim) * m.weight * m.cutoff * m.thermal * m.geometry * s * s;
    CHECK_THAT(assemble_integrand(k, t, p, IntegrandKind::gamma_factor), WithinRel(expected, 1e-14));
  }

  SECTION("decay kernel is the time derivative of the Gamma kernel") {
    for (double k : {0.05, 0.8, 3.3})
      for (double t : {0.4, 3.0, 17.0}) {
        const double h = 1e-5;
        const double fd = (assemble_integrand(k, t + h, p, IntegrandKind::gamma_factor) -
                           assemble_integrand(k, t - h, p, IntegrandKind::gamma_factor)) /
                          (2 * h);
        const double an = assemble_integrand(k, t, p, IntegrandKind::decay_rate);
        CHECK_THAT(fd, WithinAbs(an, 1e-8 * (1 + std::abs(an))));
      }
  }

  SECTION("nonnegative Gamma integrand") {
    for (Dimension d : all_dimensions) {
      const auto q = make_reduced(0.1, 1.0, 1.0, 2.0, 5.0, d);
      for (double k = 0.001; k < 8; k += 0.0731)
        for (double t : {0.1, 1.0, 50.0, 1000.0}) CHECK(assemble_integrand(k, t, q, IntegrandKind::gamma_factor) >= 0);
    }
  }
}

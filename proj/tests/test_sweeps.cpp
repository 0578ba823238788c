#include <catch_amalgamated.hpp>

#include "becprobe/sweeps.hpp"

#include <cmath>

using namespace becprobe;
using Catch::Matchers::WithinRel;

namespace {

// A small reduced-unit system (tau = 1 um) that sweeps quickly.
PhysicalConfig quick(Dimension d = Dimension::D3) {
  PhysicalConfig c;
  c.m_A = 23 * si::amu;
  c.m_B = 87 * si::amu;
  c.a_B = 5e-9;
  c.a_AB = 3.5e-9;
  c.tau = 1e-6;
  c.L = 6e-6;
  c.T = 1e-9;
  c.dim = d;
  c.gB_red_override.reset();
  c.n0 = {1e6, 1e12, 1e18};
  c.transverse_length_1d = 1e-6;
  c.transverse_length_2d = 1e-6;
  return c;
}

SweepSpec spec_for(SweepAxis axis, std::vector<double> values) {
  SweepSpec s;
  s.base = quick();
  s.axis = axis;
  s.values = std::move(values);
  s.dims = {Dimension::D3};
  s.finder.horizon = 80;
  s.finder.open_policy = OpenIntervalPolicy::truncate;
  return s;
}

} // namespace

TEST_CASE("value grids") {
  const auto lin = make_values(1.0, 3.0, 5, Spacing::linear);
  CHECK(lin == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
  const auto lg = make_values(1.0, 100.0, 3, Spacing::log);
  CHECK_THAT(lg[1], WithinRel(10.0, 1e-14));
  CHECK(lg.back() == 100.0);
  CHECK(make_values(2.0, 2.0, 1, Spacing::linear) == std::vector<double>{2.0});
  CHECK_THROWS_AS(make_values(0.0, 1.0, 3, Spacing::log), ConfigError);
  CHECK_THROWS_AS(make_values(1.0, 0.0, 3, Spacing::linear), ConfigError);
}

TEST_CASE("axis substitution") {
  auto c = quick();
  c.gB_red_override = 0.3;
  const auto t = with_axis_value(c, SweepAxis::temperature, 7e-9);
  CHECK(t.T == 7e-9);
  CHECK(t.gB_red_override);
  const auto a = with_axis_value(c, SweepAxis::scattering_length, 2e-9);
  CHECK(a.a_B == 2e-9);
  CHECK_FALSE(a.gB_red_override);
}

TEST_CASE("sweep settings checks") {
  auto s = spec_for(SweepAxis::temperature, {});
  CHECK_THROWS_AS(s.check(), ConfigError);
  s.values = {2e-9, 1e-9};
  CHECK_THROWS_AS(s.check(), ConfigError);
  s.values = {-1e-9, 1e-9};
  CHECK_THROWS_AS(s.check(), ConfigError);
  s.values = {1e-9, 1e-9};
  CHECK_NOTHROW(s.check());
}

TEST_CASE("scattering sweep: free gas row is Markovian, rows are deterministic") {
  auto s = spec_for(SweepAxis::scattering_length, {0.0, 5e-9, 5e-9});
  s.dims = {Dimension::D1, Dimension::D2, Dimension::D3};
  s.finder.horizon = 40;
  s.workers = 2;
  const auto rows = run_sweep(s);
  REQUIRE(rows.size() == 9);
  for (std::size_t d = 0; d < 3; ++d) {
    const auto& zero = rows[3 * d];
    CHECK(zero.value == 0.0);
    CHECK(zero.dim == s.dims[d]);
    REQUIRE(zero.status == RowStatus::ok);
    CHECK(zero.measure.N == 0.0);
    CHECK_FALSE(zero.measure.interval.present);
    // duplicate values give identical rows
    CHECK(rows[3 * d + 1].measure.N == rows[3 * d + 2].measure.N);
    CHECK(rows[3 * d + 1].measure.interval.a == rows[3 * d + 2].measure.interval.a);
  }
  // each row reproduced in isolation, bitwise
  auto c = with_axis_value(s.base, s.axis, rows[4].value);
  c.dim = rows[4].dim;
  CHECK(measure_config(c, s.finder, s.quadrature).N == rows[4].measure.N);
}

TEST_CASE("failed rows are recorded, not fatal") {
  auto s = spec_for(SweepAxis::temperature, {1e-9, 2e-9});
  s.dims = {Dimension::D3, Dimension::D1};
  s.base.transverse_length_1d.reset();
  s.finder.horizon = 30;
  const auto rows = run_sweep(s);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].status == RowStatus::ok);
  CHECK(rows[2].status == RowStatus::failed);
  CHECK(rows[2].error.find("transverse_length_1d") != std::string::npos);
  CHECK(rows[2].measure.N == 0.0);

  s.dims = {Dimension::D1};
  CHECK_THROWS_AS(run_sweep(s), SweepError);
}

TEST_CASE("indicator transitions") {
  std::vector<SweepRow> rows(4);
  const double Ns[] = {0.0, 0.0, 0.2, 0.3};
  for (int i = 0; i < 4; ++i) {
    rows[static_cast<std::size_t>(i)].dim = Dimension::D2;
    rows[static_cast<std::size_t>(i)].measure.N = Ns[i];
  }
  CHECK(indicator_transitions(rows, {Dimension::D2}) == std::vector<std::size_t>{1});
  rows[3].measure.N = 0.0;
  CHECK(indicator_transitions(rows, {Dimension::D2}) == std::vector<std::size_t>{2});
}

TEST_CASE("critical scattering length by bisection") {
  auto base = quick(Dimension::D3);
  CriticalOptions opt;
  opt.finder.horizon = 80;
  const auto r = critical_scattering(base, Dimension::D3, 0.0, 20e-9, opt);
  CHECK(r.N_lo <= opt.eps_N);
  CHECK(r.N_hi > opt.eps_N);
  CHECK(r.hi - r.lo <= opt.rel_width * r.hi);
  CHECK(r.value > r.lo);
  CHECK(r.value < r.hi);

  SECTION("tighter tolerance stays inside the previous bracket") {
    CriticalOptions tight = opt;
    tight.rel_width /= 2;
    const auto t = critical_scattering(base, Dimension::D3, 0.0, 20e-9, tight);
    CHECK(std::abs(t.value - r.value) < r.hi - r.lo);
  }
  SECTION("bracket without a crossover") {
    try {
      critical_scattering(base, Dimension::D3, 0.0, 1e-15, opt);
      FAIL("expected BracketError");
    } catch (const BracketError& e) {
      CHECK(e.measure_lo() == 0.0);
      CHECK(e.measure_hi() <= opt.eps_N);
      CHECK(std::string(e.what()).find("N(lo)") != std::string::npos);
    }
  }
}

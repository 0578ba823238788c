#include <catch_amalgamated.hpp>

#include "becprobe/dynamics.hpp"

#include <cmath>
#include <numbers>

using namespace becprobe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ReducedParams sample(Dimension d = Dimension::D3, double beta = 10.0) {
  return make_reduced(0.1, 0.9, 1.0, beta, 10.0, d);
}

} // namespace

TEST_CASE("Gamma and gamma vanish at t = 0 and without coupling") {
  for (Dimension d : all_dimensions) {
    const auto p = sample(d);
    CHECK(gamma_factor(0.0, p) == 0.0);
    CHECK(decay_rate(0.0, p) == 0.0);
    auto q = make_reduced(0.1, 0.0, 1.0, 10.0, 10.0, d);
    CHECK(q.prefactor == 0.0);
    for (double t : {0.5, 20.0}) {
      CHECK(gamma_factor(t, q) == 0.0);
      CHECK(decay_rate(t, q) == 0.0);
    }
  }
  CHECK_THROWS_AS(gamma_factor(-1.0, sample()), DomainError);
}

TEST_CASE("Gamma is linear in the prefactor") {
  auto p = sample(Dimension::D2);
  const double g = gamma_factor(7.0, p);
  p.prefactor *= 3.0;
  CHECK_THAT(gamma_factor(7.0, p), WithinRel(3.0 * g, 1e-15));
}

TEST_CASE("trace") {
  const auto p = sample(Dimension::D1, 30.0);
  const auto tr = trace(p, 10.0, 6);
  REQUIRE(tr.times.size() == 6);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 10.0);
  CHECK(tr.gamma_factor[0] == 0.0);
  CHECK(tr.decay_rate[0] == 0.0);
  CHECK(tr.coherence[0] == 1.0);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    CHECK(tr.coherence[i] == std::exp(-tr.gamma_factor[i]));
    CHECK(tr.gamma_factor[i] >= 0.0);
    CHECK(tr.coherence[i] > 0.0);
    CHECK(tr.coherence[i] <= 1.0);
  }
  const auto parallel = trace(p, 10.0, 6, {}, 3);
  CHECK(parallel.gamma_factor == tr.gamma_factor);
  CHECK(parallel.decay_rate == tr.decay_rate);
  CHECK_THROWS_AS(trace(p, 0.0, 5), DomainError);
  CHECK_THROWS_AS(trace(p, 1.0, 1), DomainError);
}

TEST_CASE("interval finder on a synthetic rate") {
  const double a = 0.5 * std::acos(-0.625);
  const double b = std::numbers::pi - a;
  CHECK_THAT(a, WithinAbs(1.1229639298659641, 1e-15));
  CHECK_THAT(b, WithinAbs(2.0186287237238291, 1e-15));

  auto rate = [](double t) { return 1.0 + 1.6 * std::cos(2.0 * t); };
  FinderOptions opt;
  opt.horizon = 3.0;
  const auto s = find_negative_interval(rate, opt);
  REQUIRE(s.interval.present);
  CHECK(s.interval_count == 1);
  CHECK_THAT(s.interval.a, WithinAbs(a, 1e-6));
  CHECK_THAT(s.interval.b, WithinAbs(b, 1e-6));
  CHECK(std::abs(rate(s.interval.a)) < s.root_tolerance() + 1e-7);
  CHECK(std::abs(rate(s.interval.b)) < s.root_tolerance() + 1e-7);

  SECTION("several lobes: first returned, flagged") {
    opt.horizon = 6.0;
    const auto m = non_markovianity([](double t) { return t + 0.8 * std::sin(2.0 * t); }, rate, opt);
    CHECK(m.diagnostics.interval_count == 2);
    CHECK(m.diagnostics.multiple_intervals);
    CHECK_THAT(m.interval.a, WithinAbs(a, 1e-6));
  }
  SECTION("open at the horizon") {
    opt.horizon = 1.5;
    CHECK_THROWS_AS(find_negative_interval(rate, opt), HorizonError);
    opt.open_policy = OpenIntervalPolicy::truncate;
    const auto t = find_negative_interval(rate, opt);
    CHECK(t.truncated);
    CHECK(t.interval.b == 1.5);
  }
  SECTION("positive rate") {
    const auto none = find_negative_interval([](double t) { return 1.0 + t; }, opt);
    CHECK_FALSE(none.interval.present);
  }
  SECTION("a narrow dip between coarse samples is found") {
    // negative only within 0.0066 of the centre, coarse spacing there is about 0.07
    auto narrow = [](double t) { return 1.0 - 1.05 * std::exp(-std::pow((t - 1.2345) / 0.03, 2)); };
    FinderOptions o;
    o.horizon = 5.0;
    const auto n = find_negative_interval(narrow, o);
    REQUIRE(n.interval.present);
    CHECK(n.interval.a < 1.2345);
    CHECK(n.interval.b > 1.2345);
  }
}

TEST_CASE("measure from endpoints") {
  CHECK_THAT(measure_from_endpoints(1.0, 0.5), WithinRel(0.37754066879814544, 1e-14));
  CHECK_THAT(measure_from_endpoints(1.0, 0.5), WithinRel((std::exp(-0.5) - std::exp(-1.0)) / (1 - std::exp(-1.0)), 1e-14));
  CHECK(measure_from_endpoints(0.3, 0.3) == 0.0);
  CHECK_THAT(measure_from_endpoints(0.7, 0.0), WithinRel(1.0, 1e-15));
  // small Gamma stays accurate
  CHECK_THAT(measure_from_endpoints(1e-9, 0.5e-9), WithinRel(0.5, 1e-6));
}

TEST_CASE("non-Markovianity of the gas") {
  SECTION("free gas is Markovian") {
    for (Dimension d : all_dimensions) {
      const auto p = make_reduced(0.0, 1.0, 1.0, 20.0, 6.0, d);
      FinderOptions o;
      o.horizon = 200;
      const auto m = non_markovianity(p, o);
      CHECK_FALSE(m.interval.present);
      CHECK(m.N == 0.0);
    }
  }
  SECTION("interacting 3D gas at low temperature") {
    const auto p = sample(Dimension::D3, 100.0);
    FinderOptions o;
    o.horizon = 500;
    const auto m = non_markovianity(p, o);
    REQUIRE(m.interval.present);
    CHECK(m.N > 0.0);
    CHECK(m.N <= 1.0);
    CHECK(m.gamma_b < m.gamma_a);
    CHECK_THAT(m.N, WithinRel(measure_from_endpoints(m.gamma_a, m.gamma_b), 1e-10));
    CHECK_THAT(m.gamma_a, WithinRel(gamma_factor(m.interval.a, p), 1e-12));
    CHECK(std::abs(decay_rate(m.interval.a, p)) < 2 * m.diagnostics.rate_floor + 1e-12);
    CHECK(std::abs(decay_rate(m.interval.b, p)) < 2 * m.diagnostics.rate_floor + 1e-12);
    CHECK(decay_rate(0.5 * (m.interval.a + m.interval.b), p) < 0.0);
  }
}

TEST_CASE("finder options are checked") {
  FinderOptions o;
  o.horizon = 0;
  CHECK_THROWS_AS(o.check(), ConfigError);
  o = {};
  o.coarse_points = 2;
  CHECK_THROWS_AS(o.check(), ConfigError);
}

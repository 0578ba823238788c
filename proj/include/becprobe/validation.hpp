#pragma once

// Built-in oracle suite: nonnegativity of Gamma, finite differences against the
// analytic rate, Monte Carlo direction averages, lattice sums against the
// continuum integral, the T -> 0 limit, the interval finder on a synthetic
// rate, consistency of N with the coherence trace, and unit round trips.
// Everything is a pure function of the seed.

#include "becprobe/dynamics.hpp"
#include "becprobe/io.hpp"
#include "becprobe/quadrature.hpp"
#include "becprobe/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace becprobe {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

namespace detail {

// Uniform in [0, 1) from the top 53 bits, identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

} // namespace detail

// --------------------------------------------------------------------------
// Corpus

struct CorpusOptions {
  std::vector<Dimension> dims{Dimension::D1, Dimension::D2, Dimension::D3};
  double mu_lo = 0.05, mu_hi = 1.0;    ///< g_B n0 range (log-uniform)
  double ell_lo = 2.0, ell_hi = 6.0;
  double beta_lo = 1.0, beta_hi = 200.0; ///< finite beta range (log-uniform)
  double zero_temperature_fraction = 0.25; ///< share of beta = inf (never in D1)
  double free_gas_fraction = 0.1;          ///< share of g_B = 0
};

/// `n` random valid parameter sets cycling through opt.dims.
inline std::vector<ReducedParams> make_corpus(std::uint64_t seed, std::size_t n, const CorpusOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::vector<ReducedParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Dimension dim = opt.dims[i % opt.dims.size()];
    const double n0 = detail::log_uniform(rng, 0.5, 2.0);
    const double mu = detail::log_uniform(rng, opt.mu_lo, opt.mu_hi);
    const bool free_gas = detail::unit_uniform(rng) < opt.free_gas_fraction;
    const double gAB = detail::uniform(rng, 0.2, 1.0) * (detail::unit_uniform(rng) < 0.5 ? -1.0 : 1.0);
    const double ell = detail::uniform(rng, opt.ell_lo, opt.ell_hi);
    // Massless phonons at T = 0 make the 1D Gamma grow without bound.
    const bool cold = dim != Dimension::D1 && detail::unit_uniform(rng) < opt.zero_temperature_fraction;
    const double beta = detail::log_uniform(rng, opt.beta_lo, opt.beta_hi);
    out.push_back(make_reduced(free_gas ? 0.0 : mu / n0, gAB, n0, cold ? infinite_beta : beta, ell, dim));
  }
  return out;
}

inline std::string describe(const ReducedParams& p) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s mu=%.4g ell=%.4g beta=%.4g pref=%.4g", std::string(to_string(p.dim)).c_str(),
                p.mu(), p.ell, p.beta_red, p.prefactor);
  return buf;
}

// --------------------------------------------------------------------------
// Individual oracles

/// Gamma(0) == 0 exactly and Gamma(t) >= 0 on `times` for every corpus entry.
inline CheckResult check_gamma_nonnegative(const std::vector<ReducedParams>& corpus, const std::vector<double>& times,
                                           const QuadratureSpec& spec = {}) {
  CheckResult r{"gamma_nonnegative", true, ""};
  std::size_t evals = 0;
  for (const auto& p : corpus) {
    if (gamma_factor(0.0, p, spec) != 0.0) {
      r.passed = false;
      r.detail = "Gamma(0) != 0 for " + describe(p);
      return r;
    }
    for (double t : times) {
      const double g = gamma_factor(t, p, spec);
      ++evals;
      if (!(g >= 0.0)) {
        r.passed = false;
        r.detail = detail::fmt("Gamma(%.6g) = %.6g < 0 for ", t, g) + describe(p);
        return r;
      }
    }
  }
  r.detail = std::to_string(corpus.size()) + " configs x " + std::to_string(times.size()) + " times";
  return r;
}

struct FiniteDifferenceOutcome {
  double worst = 0.0; ///< max |gamma - FD| / max|gamma|, over all configs
  std::string worst_config;
};

/// Central difference (Gamma(t+h) - Gamma(t-h)) / 2h with both evaluations on
/// the panel layout chosen for Gamma(t), against the adaptive analytic rate.
/// The error for each config is scaled by the largest |gamma| over its probe
/// times, so isolated zero crossings of gamma do not produce spurious ratios.
inline FiniteDifferenceOutcome finite_difference_error(const std::vector<ReducedParams>& corpus,
                                                       const std::vector<double>& times, double h = 1e-6,
                                                       const QuadratureSpec& spec = {}) {
  FiniteDifferenceOutcome out;
  for (const auto& p : corpus) {
    double scale = 0.0, worst = 0.0;
    for (double t : times) {
      const auto edges = kernel_layout(IntegrandKind::gamma_factor, t, p, spec);
      const double up = evaluate_kernel_on_layout(IntegrandKind::gamma_factor, t + h, p, edges).value;
      const double down = evaluate_kernel_on_layout(IntegrandKind::gamma_factor, t - h, p, edges).value;
      const double fd = (up - down) / (2.0 * h);
      const double rate = decay_rate(t, p, spec);
      scale = std::max(scale, std::abs(rate));
      worst = std::max(worst, std::abs(fd - rate));
    }
    const double rel = scale > 0 ? worst / scale : worst;
    if (rel >= out.worst) {
      out.worst = rel;
      out.worst_config = describe(p);
    }
  }
  return out;
}

inline CheckResult check_finite_difference(const std::vector<ReducedParams>& corpus, const std::vector<double>& times,
                                           double tol = 1e-6, const QuadratureSpec& spec = {}) {
  const auto o = finite_difference_error(corpus, times, 1e-6, spec);
  return {"finite_difference_rate", o.worst < tol,
          detail::fmt("worst relative error %.3g (tol %.1g) at ", o.worst, tol) + o.worst_config};
}

struct AngularSample {
  double x = 0.0; ///< k * ell
  double closed = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  bool within(double sigmas) const { return std::abs(mc_mean - closed) <= sigmas * mc_stderr; }
};

/// Monte Carlo average of sin^2(k . L) over isotropic directions. The same
/// directions are reused for every x.
inline std::vector<AngularSample> angular_monte_carlo(Dimension dim, const std::vector<double>& xs,
                                                      std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> cosines(samples);
  for (auto& c : cosines) {
    if (dim == Dimension::D3)
      c = 2.0 * detail::unit_uniform(rng) - 1.0;
    else if (dim == Dimension::D2)
      c = std::cos(2.0 * std::numbers::pi * detail::unit_uniform(rng));
    else
      c = detail::unit_uniform(rng) < 0.5 ? -1.0 : 1.0;
  }
  std::vector<AngularSample> out;
  for (double x : xs) {
    double sum = 0.0, sum2 = 0.0;
    for (double c : cosines) {
      const double s = std::sin(x * c);
      const double v = s * s;
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    out.push_back({x, angular_geometry(x, 1.0, dim), mean, std::sqrt(var / (n - 1.0))});
  }
  return out;
}

inline const std::vector<double>& angular_probe_points() {
  static const std::vector<double> xs{0.1, 0.45, 1.0, 1.7, 2.5, 3.7, 5.2, 7.3, 10.0, 18.5};
  return xs;
}

inline CheckResult check_angular_average(std::size_t samples, std::uint64_t seed) {
  CheckResult r{"angular_average_mc", true, ""};
  double worst_sigma = 0.0;
  for (Dimension d : {Dimension::D2, Dimension::D3}) {
    for (const auto& s : angular_monte_carlo(d, angular_probe_points(), samples, seed)) {
      const double z = std::abs(s.mc_mean - s.closed) / s.mc_stderr;
      worst_sigma = std::max(worst_sigma, z);
      if (!s.within(3.0)) {
        r.passed = false;
        r.detail += detail::fmt("%.0fD x=%.3g off by %.2f sigma; ", rank(d), s.x, z);
      }
    }
  }
  // D1: the average over the two directions is the closed form itself.
  for (double x : angular_probe_points()) {
    const double direct = 0.5 * (std::sin(x) * std::sin(x) + std::sin(-x) * std::sin(-x));
    if (direct != angular_geometry(x, 1.0, Dimension::D1)) {
      r.passed = false;
      r.detail += detail::fmt("1D x=%.3g not exact; ", x);
    }
  }
  if (r.passed) r.detail = detail::fmt("worst deviation %.2f sigma over %.0f samples", worst_sigma, double(samples));
  return r;
}

struct LatticeComparison {
  double continuum = 0.0;
  double lattice = 0.0;
  double relative() const { return std::abs(lattice - continuum) / std::abs(continuum); }
};

inline LatticeComparison compare_lattice(const ReducedParams& p, double t, double box, IntegrandKind kind,
                                         const QuadratureSpec& spec = {}, unsigned workers = 1) {
  return {evaluate_kernel(kind, t, p, spec).value, lattice_sum_oracle(p, t, box, kind, spec.k_max(), workers)};
}

/// Box sides used against the continuum integral.
inline double default_box(Dimension d) {
  switch (d) {
  case Dimension::D1: return 200.0;
  case Dimension::D2: return 200.0;
  case Dimension::D3: return 80.0;
  }
  return 200.0;
}

inline CheckResult check_lattice(const std::vector<ReducedParams>& corpus, const std::vector<double>& times,
                                 double tol = 1e-3, double box_scale = 1.0, unsigned workers = 1) {
  CheckResult r{"lattice_vs_continuum", true, ""};
  double worst = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus[i];
    const double t = times[i % times.size()];
    const auto c = compare_lattice(p, t, box_scale * default_box(p.dim), IntegrandKind::gamma_factor, {}, workers);
    worst = std::max(worst, c.relative());
    if (!(c.relative() < tol)) {
      r.passed = false;
      r.detail += detail::fmt("t=%.3g rel %.3g: ", t, c.relative()) + describe(p) + "; ";
    }
  }
  if (r.passed) r.detail = detail::fmt("worst relative disagreement %.3g (tol %.1g)", worst, tol);
  return r;
}

/// beta = beta_hot (finite but huge) against beta = inf.
inline CheckResult check_zero_temperature(const std::vector<ReducedParams>& corpus, const std::vector<double>& times,
                                          double beta_hot = 1e6, double tol = 1e-6) {
  CheckResult r{"zero_temperature_limit", true, ""};
  double worst = 0.0;
  for (auto p : corpus) {
    ReducedParams hot = p, cold = p;
    hot.beta_red = beta_hot;
    cold.beta_red = infinite_beta;
    for (double t : times) {
      const double a = gamma_factor(t, hot), b = gamma_factor(t, cold);
      const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
      worst = std::max(worst, rel);
      if (!(rel < tol)) {
        r.passed = false;
        r.detail = detail::fmt("t=%.3g rel %.3g: ", t, rel) + describe(p);
        return r;
      }
    }
  }
  r.detail = detail::fmt("worst relative difference %.3g (tol %.1g)", worst, tol);
  return r;
}

/// Gamma(t) = t + 0.8 sin 2t. gamma < 0 on (acos(-0.625)/2, pi - acos(-0.625)/2).
inline CheckResult check_synthetic_finder(double tol = 1e-6) {
  const double a_exact = 0.5 * std::acos(-0.625);
  const double b_exact = std::numbers::pi - a_exact;
  FinderOptions opt;
  opt.horizon = 3.0;
  const auto m = non_markovianity([](double t) { return t + 0.8 * std::sin(2.0 * t); },
                                  [](double t) { return 1.0 + 1.6 * std::cos(2.0 * t); }, opt);
  const double da = std::abs(m.interval.a - a_exact), db = std::abs(m.interval.b - b_exact);
  const bool ok = m.interval.present && da < tol && db < tol && m.diagnostics.interval_count == 1;
  return {"synthetic_interval_finder", ok,
          detail::fmt("a=%.12g b=%.12g", m.interval.a, m.interval.b) +
              detail::fmt(" (errors %.2g, %.2g)", da, db)};
}

struct MeasureConsistency {
  bool ok = true;
  double N = 0.0;
  std::string detail;
};

/// 0 <= N <= 1, and N > 0, presence of a negative interval, and non-monotone
/// coherence (on a uniform grid plus the interval endpoints) agree.
inline MeasureConsistency measure_consistency(const ReducedParams& p, const FinderOptions& opt,
                                              std::size_t grid_points = 200, const QuadratureSpec& spec = {}) {
  const auto m = non_markovianity(p, opt, spec);
  std::vector<double> ts;
  for (std::size_t i = 0; i < grid_points; ++i)
    ts.push_back(opt.horizon * static_cast<double>(i) / static_cast<double>(grid_points - 1));
  if (m.interval.present) {
    ts.push_back(m.interval.a);
    ts.push_back(m.interval.b);
  }
  std::sort(ts.begin(), ts.end());
  std::vector<double> G(ts.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    G[i] = gamma_factor(ts[i], p, spec);
    peak = std::max(peak, G[i]);
  }
  // Within the rate floor a decrease of Gamma is not a revival.
  bool revival = false;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double slack = m.diagnostics.rate_floor * (ts[i] - ts[i - 1]) + 1e-10 * peak;
    if (G[i] < G[i - 1] - slack) revival = true;
  }
  MeasureConsistency c;
  c.N = m.N;
  const bool positive = m.N > 0.0;
  if (!(m.N >= 0.0 && m.N <= 1.0)) {
    c.ok = false;
    c.detail = detail::fmt("N = %.6g outside [0, 1]", m.N);
  } else if (positive != m.interval.present || positive != revival) {
    c.ok = false;
    c.detail = detail::fmt("N = %.6g, interval %.0f, revival %.0f", m.N, m.interval.present, revival);
  }
  if (!c.ok) c.detail += " for " + describe(p);
  return c;
}

inline CheckResult check_measure_consistency(const std::vector<ReducedParams>& corpus, const FinderOptions& opt,
                                             std::size_t grid_points = 200) {
  CheckResult r{"measure_consistency", true, ""};
  for (const auto& p : corpus) {
    const auto c = measure_consistency(p, opt, grid_points);
    if (!c.ok) {
      r.passed = false;
      r.detail = c.detail;
      return r;
    }
  }
  r.detail = std::to_string(corpus.size()) + " configs";
  return r;
}

/// Random laboratory configurations through to_reduced / from_reduced, and the
/// canonical config text through parse_config.
inline CheckResult check_unit_round_trip(std::uint64_t seed, std::size_t n = 200) {
  CheckResult r{"unit_round_trip", true, ""};
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  auto rel = [](double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
  for (std::size_t i = 0; i < n; ++i) {
    PhysicalConfig c;
    c.dim = all_dimensions[i % 3];
    c.m_A = detail::log_uniform(rng, 1, 200) * si::amu;
    c.m_B = detail::log_uniform(rng, 1, 200) * si::amu;
    c.a_B = detail::unit_uniform(rng) < 0.1 ? 0.0 : detail::log_uniform(rng, 1e-10, 1e-7);
    c.a_AB = detail::log_uniform(rng, 1e-10, 1e-7) * (detail::unit_uniform(rng) < 0.5 ? -1 : 1);
    c.tau = detail::log_uniform(rng, 1e-8, 1e-6);
    c.L = c.tau * detail::uniform(rng, 1.5, 50);
    c.T = detail::unit_uniform(rng) < 0.1 ? 0.0 : detail::log_uniform(rng, 1e-10, 1e-6);
    c.n0 = {detail::log_uniform(rng, 1e5, 1e8), detail::log_uniform(rng, 1e11, 1e15),
            detail::log_uniform(rng, 1e17, 1e22)};
    c.transverse_length_1d = detail::log_uniform(rng, 1e-8, 1e-6);
    c.transverse_length_2d = detail::log_uniform(rng, 1e-8, 1e-6);

    const PhysicalConfig back = from_reduced(to_reduced(c), c);
    for (double e : {rel(c.a_B, back.a_B), rel(c.a_AB, back.a_AB), rel(c.density(), back.density()), rel(c.T, back.T),
                     rel(c.L, back.L)})
      worst = std::max(worst, e);

    RunConfig rc;
    rc.physical = c;
    const RunConfig again = parse_config(to_config_text(rc));
    const auto& q = again.physical;
    const bool same = q.m_A == c.m_A && q.m_B == c.m_B && q.a_B == c.a_B && q.a_AB == c.a_AB && q.n0 == c.n0 &&
                      q.tau == c.tau && q.L == c.L && q.T == c.T && q.dim == c.dim &&
                      q.transverse_length_1d == c.transverse_length_1d &&
                      q.transverse_length_2d == c.transverse_length_2d;
    if (!same) {
      r.passed = false;
      r.detail = "config text round trip changed a field";
      return r;
    }
  }
  r.passed = worst < 1e-12;
  r.detail = detail::fmt("worst relative change %.3g over %.0f configs", worst, double(n));
  return r;
}

// --------------------------------------------------------------------------
// Suite

struct ValidationOptions {
  std::uint64_t seed = 42;
  std::size_t corpus_size = 24;
  std::size_t probe_times = 12;
  std::size_t mc_samples = 1000000;
  std::size_t lattice_points = 3; ///< per dimension
  double measure_horizon = 300.0;
  unsigned workers = 1;
};

inline std::vector<double> probe_times(std::size_t n, double t_lo = 0.05, double t_hi = 40.0) {
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i)
    ts[i] = t_lo * std::pow(t_hi / t_lo, n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1));
  return ts;
}

inline ValidationReport run_validation(const ValidationOptions& o) {
  ValidationReport rep;
  const auto corpus = make_corpus(o.seed, o.corpus_size);
  const auto times = probe_times(o.probe_times);
  rep.checks.push_back(check_gamma_nonnegative(corpus, times));
  rep.checks.push_back(check_finite_difference(corpus, times));
  rep.checks.push_back(check_angular_average(o.mc_samples, o.seed));

  std::vector<ReducedParams> lattice_corpus;
  for (Dimension d : all_dimensions) {
    CorpusOptions co;
    co.dims = {d};
    const auto c = make_corpus(o.seed + 1000 + static_cast<std::uint64_t>(rank(d)), o.lattice_points, co);
    lattice_corpus.insert(lattice_corpus.end(), c.begin(), c.end());
  }
  rep.checks.push_back(check_lattice(lattice_corpus, probe_times(5, 0.5, 5.0), 1e-3, 1.0, o.workers));

  CorpusOptions cold;
  cold.dims = {Dimension::D2, Dimension::D3};
  rep.checks.push_back(check_zero_temperature(make_corpus(o.seed + 7, o.corpus_size / 2, cold), times));
  rep.checks.push_back(check_synthetic_finder());

  FinderOptions f;
  f.horizon = o.measure_horizon;
  f.open_policy = OpenIntervalPolicy::truncate;
  rep.checks.push_back(check_measure_consistency(corpus, f));
  rep.checks.push_back(check_unit_round_trip(o.seed));
  return rep;
}

inline std::string format_report(const ValidationReport& rep) {
  std::string s;
  for (const auto& c : rep.checks) s += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
  s += rep.passed() ? "validation passed\n" : "validation FAILED\n";
  return s;
}

} // namespace becprobe

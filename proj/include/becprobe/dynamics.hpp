#pragma once

// Decoherence factor Gamma(t), decay rate gamma(t) = dGamma/dt, coherence
// traces, the negative-rate interval and the normalized non-Markovianity
// measure
//
//   N = (e^{-Gamma(b)} - e^{-Gamma(a)}) / (1 - e^{-Gamma(a)}),   gamma < 0 on (a, b).

#include "becprobe/bogoliubov.hpp"
#include "becprobe/error.hpp"
#include "becprobe/parallel.hpp"
#include "becprobe/quadrature.hpp"
#include "becprobe/units.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace becprobe {

struct KernelValue {
  double value = 0.0;
  double error = 0.0;
};

/// Phase rate in k of both the time kernel (E_k t) and the geometry factor (2 k ell).
inline auto kernel_phase_rate(const ReducedParams& p, double t) {
  const double mu = p.mu();
  const double ell = p.ell;
  return [mu, ell, t](double k) { return t * group_velocity(k, mu) + 2.0 * ell; };
}

/// Integral of the assembled integrand times the prefactor. `layout_time`
/// fixes the panel layout; two calls with the same layout time integrate on
/// identical nodes, which keeps finite differences in t free of layout noise.
inline KernelValue evaluate_kernel(IntegrandKind kind, double t, const ReducedParams& p,
                                   const QuadratureSpec& spec = {}, std::optional<double> layout_time = {}) {
  if (t < 0.0) throw DomainError("kernel evaluated at negative time");
  if (t == 0.0 || p.prefactor == 0.0) return {};
  const double lt = layout_time.value_or(t);
  const auto r = integrate_phased([&](double k) { return assemble_integrand(k, t, p, kind); }, spec,
                                  kernel_phase_rate(p, lt));
  return {p.prefactor * r.value, p.prefactor * r.error};
}

/// Kernel integral on fixed panel edges (see integrate_on_layout).
inline KernelValue evaluate_kernel_on_layout(IntegrandKind kind, double t, const ReducedParams& p,
                                             const std::vector<double>& edges) {
  if (t == 0.0 || p.prefactor == 0.0) return {};
  const auto r = integrate_on_layout([&](double k) { return assemble_integrand(k, t, p, kind); }, edges);
  return {p.prefactor * r.value, p.prefactor * r.error};
}

/// Panel edges that evaluate_kernel settles on for (kind, t).
inline std::vector<double> kernel_layout(IntegrandKind kind, double t, const ReducedParams& p,
                                         const QuadratureSpec& spec = {}) {
  std::vector<double> edges;
  integrate_phased([&](double k) { return assemble_integrand(k, t, p, kind); }, spec, kernel_phase_rate(p, t),
                   &edges);
  return edges;
}

/// Gamma(t).
inline double gamma_factor(double t, const ReducedParams& p, const QuadratureSpec& spec = {}) {
  return evaluate_kernel(IntegrandKind::gamma_factor, t, p, spec).value;
}

/// gamma(t) = dGamma/dt, from the analytically differentiated integrand.
inline double decay_rate(double t, const ReducedParams& p, const QuadratureSpec& spec = {}) {
  return evaluate_kernel(IntegrandKind::decay_rate, t, p, spec).value;
}

struct DecoherenceTrace {
  std::vector<double> times;
  std::vector<double> gamma_factor;
  std::vector<double> decay_rate;
  std::vector<double> coherence; ///< |rho01(t)| / |rho01(0)| = e^{-Gamma(t)}
  ReducedParams params_snapshot;
};

inline DecoherenceTrace trace(const ReducedParams& p, double t_end, std::size_t n_points,
                              const QuadratureSpec& spec = {}, unsigned workers = 1) {
  if (!(t_end > 0)) throw DomainError("trace: t_end must be > 0");
  if (n_points < 2) throw DomainError("trace: n_points must be >= 2");
  DecoherenceTrace out;
  out.params_snapshot = p;
  out.times.resize(n_points);
  out.gamma_factor.resize(n_points);
  out.decay_rate.resize(n_points);
  out.coherence.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    out.times[i] = t_end * static_cast<double>(i) / static_cast<double>(n_points - 1);

  parallel_for(n_points, workers, [&](std::size_t i) {
    const double t = out.times[i];
    try {
      out.gamma_factor[i] = gamma_factor(t, p, spec);
      out.decay_rate[i] = decay_rate(t, p, spec);
    } catch (const QuadratureError& e) {
      throw QuadratureError("trace point t = " + std::to_string(t) + ": " + e.what(), e.best_value(),
                            e.error_estimate());
    }
    out.coherence[i] = std::exp(-out.gamma_factor[i]);
  });
  return out;
}

// --------------------------------------------------------------------------
// Negative-rate interval

struct NegativeInterval {
  bool present = false;
  double a = 0.0;
  double b = 0.0;
};

enum class OpenIntervalPolicy {
  error,    ///< throw HorizonError when gamma is still negative at the horizon
  truncate, ///< close the interval at the horizon and flag it
};

struct FinderOptions {
  double horizon = 20.0;         ///< search window (0, horizon] in reduced time units
  double root_rel_tol = 1e-8;    ///< bisection stops at (hi - lo) <= root_rel_tol * hi
  std::size_t coarse_points = 160; ///< geometric scan points
  double first_point_fraction = 1e-4; ///< first scan time as a fraction of the horizon
  /// gamma counts as negative only below -floor, floor = max(abs, rel * max|gamma| on the scan).
  double rate_floor_rel = 1e-7;
  double rate_floor_abs = 0.0;
  std::size_t max_refinements = 8; ///< lowest sampled dips probed for hidden negative regions
  OpenIntervalPolicy open_policy = OpenIntervalPolicy::error;

  void check() const {
    if (!(horizon > 0)) throw ConfigError("search horizon must be > 0");
    if (!(root_rel_tol > 0)) throw ConfigError("root_rel_tol must be > 0");
    if (coarse_points < 4) throw ConfigError("coarse_points must be >= 4");
    if (!(first_point_fraction > 0 && first_point_fraction < 1))
      throw ConfigError("first_point_fraction must lie in (0, 1)");
    if (!(rate_floor_rel >= 0) || !(rate_floor_abs >= 0)) throw ConfigError("rate floors must be >= 0");
  }
};

struct IntervalScan {
  NegativeInterval interval; ///< first negative interval
  std::size_t interval_count = 0;
  bool truncated = false; ///< interval closed at the horizon (truncate policy)
  double rate_floor = 0.0;
  double peak_rate = 0.0; ///< max |gamma| on the coarse scan
  std::size_t rate_evaluations = 0;

  /// Bound on |gamma| at the polished endpoints.
  double root_tolerance() const noexcept { return 2.0 * rate_floor + 1e-300; }
};

namespace detail {

template <class RateFn>
double bisect_level(RateFn& negative, double lo, double hi, bool lo_negative, double rel_tol, std::size_t& evals) {
  // invariant: negative(lo) == lo_negative, negative(hi) != lo_negative
  while (hi - lo > rel_tol * std::abs(hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ++evals;
    if (negative(mid) == lo_negative)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace detail

/// Locates the first interval on which rate(t) < -floor inside (0, horizon].
/// `rate` is any callable t -> gamma(t); this is also the seam used to test the
/// finder on synthetic rates.
template <class RateFn>
IntervalScan find_negative_interval(RateFn&& rate, const FinderOptions& opt) {
  opt.check();
  IntervalScan scan;

  struct Sample {
    double t;
    double g;
  };
  std::vector<Sample> samples;
  samples.reserve(opt.coarse_points + 4 * opt.max_refinements);
  const double t0 = opt.horizon * opt.first_point_fraction;
  const double ratio = std::pow(1.0 / opt.first_point_fraction, 1.0 / static_cast<double>(opt.coarse_points - 1));
  double t = t0;
  for (std::size_t i = 0; i < opt.coarse_points; ++i) {
    const double ti = (i + 1 == opt.coarse_points) ? opt.horizon : t;
    samples.push_back({ti, rate(ti)});
    t *= ratio;
  }
  scan.rate_evaluations = samples.size();
  for (const auto& s : samples) scan.peak_rate = std::max(scan.peak_rate, std::abs(s.g));
  const double floor = std::max(opt.rate_floor_abs, opt.rate_floor_rel * scan.peak_rate);
  scan.rate_floor = floor;

  // Probe pronounced dips that stay above -floor on the coarse grid: a narrow
  // negative window can hide between two samples.
  {
    std::vector<std::size_t> dips;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
      const double g = samples[i].g;
      const double hi = std::max(samples[i - 1].g, samples[i + 1].g);
      if (g >= -floor && g <= samples[i - 1].g && g <= samples[i + 1].g && hi - g > 10.0 * floor) dips.push_back(i);
    }
    std::sort(dips.begin(), dips.end(), [&](std::size_t x, std::size_t y) { return samples[x].g < samples[y].g; });
    if (dips.size() > opt.max_refinements) dips.resize(opt.max_refinements);

    std::vector<Sample> extra;
    constexpr double inv_phi = 0.6180339887498949;
    for (std::size_t i : dips) {
      double lo = samples[i - 1].t, hi = samples[i + 1].t;
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double f1 = rate(x1), f2 = rate(x2);
      scan.rate_evaluations += 2;
      extra.push_back({x1, f1});
      extra.push_back({x2, f2});
      for (int it = 0; it < 14 && std::min(f1, f2) >= -floor; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = rate(x1);
          extra.push_back({x1, f1});
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = rate(x2);
          extra.push_back({x2, f2});
        }
        ++scan.rate_evaluations;
      }
    }
    samples.insert(samples.end(), extra.begin(), extra.end());
    std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.t < y.t; });
  }

  auto negative = [&](double tt) {
    ++scan.rate_evaluations;
    return rate(tt) < -floor;
  };
  const std::size_t n = samples.size();
  auto is_neg = [&](std::size_t i) { return samples[i].g < -floor; };

  std::size_t first_run_begin = n, first_run_end = n;
  for (std::size_t i = 0; i < n;) {
    if (!is_neg(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && is_neg(j + 1)) ++j;
    if (scan.interval_count == 0) {
      first_run_begin = i;
      first_run_end = j;
    }
    ++scan.interval_count;
    i = j + 1;
  }
  if (scan.interval_count == 0) return scan;

  std::size_t evals = 0;
  // gamma(0) = 0 >= -floor, so t = 0 is a valid non-negative bracket end.
  const double a_lo = first_run_begin == 0 ? 0.0 : samples[first_run_begin - 1].t;
  const double a = detail::bisect_level(negative, a_lo, samples[first_run_begin].t, false, opt.root_rel_tol, evals);

  double b;
  if (first_run_end + 1 == n) {
    if (opt.open_policy == OpenIntervalPolicy::error)
      throw HorizonError("decay rate is still negative at the search horizon t = " + std::to_string(opt.horizon) +
                             "; increase the horizon",
                         opt.horizon);
    b = opt.horizon;
    scan.truncated = true;
  } else {
    b = detail::bisect_level(negative, samples[first_run_end].t, samples[first_run_end + 1].t, true,
                             opt.root_rel_tol, evals);
  }
  scan.interval = {true, a, b};
  return scan;
}

inline IntervalScan find_negative_interval(const ReducedParams& p, const FinderOptions& opt,
                                           const QuadratureSpec& spec = {}) {
  return find_negative_interval([&](double t) { return decay_rate(t, p, spec); }, opt);
}

// --------------------------------------------------------------------------
// Non-Markovianity measure

/// Normalized measure from Gamma at the interval endpoints (Gamma(0) = 0).
inline double measure_from_endpoints(double gamma_a, double gamma_b) {
  // expm1 keeps precision when both exponents are small
  return (std::exp(-gamma_b) - std::exp(-gamma_a)) / (-std::expm1(-gamma_a));
}

struct MeasureDiagnostics {
  std::size_t interval_count = 0;
  bool multiple_intervals = false;
  bool truncated_at_horizon = false;
  bool degenerate_denominator = false;
  double rate_floor = 0.0;
  double peak_rate = 0.0;
  std::size_t rate_evaluations = 0;

  std::vector<std::string> flags() const {
    std::vector<std::string> f;
    if (multiple_intervals) f.emplace_back("multiple_intervals");
    if (truncated_at_horizon) f.emplace_back("truncated_at_horizon");
    if (degenerate_denominator) f.emplace_back("degenerate_denominator");
    return f;
  }
};

struct MeasureResult {
  double N = 0.0;
  NegativeInterval interval;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  MeasureDiagnostics diagnostics;
};

/// Measure for arbitrary Gamma / gamma callables.
template <class GammaFn, class RateFn>
MeasureResult non_markovianity(GammaFn&& gamma, RateFn&& rate, const FinderOptions& opt) {
  const IntervalScan scan = find_negative_interval(rate, opt);
  MeasureResult m;
  m.interval = scan.interval;
  m.diagnostics.interval_count = scan.interval_count;
  m.diagnostics.multiple_intervals = scan.interval_count > 1;
  m.diagnostics.truncated_at_horizon = scan.truncated;
  m.diagnostics.rate_floor = scan.rate_floor;
  m.diagnostics.peak_rate = scan.peak_rate;
  m.diagnostics.rate_evaluations = scan.rate_evaluations;
  if (!scan.interval.present) return m;

  m.gamma_a = gamma(scan.interval.a);
  m.gamma_b = gamma(scan.interval.b);
  if (!(m.gamma_a > 0.0)) {
    m.diagnostics.degenerate_denominator = true;
    return m;
  }
  m.N = measure_from_endpoints(m.gamma_a, m.gamma_b);
  return m;
}

inline MeasureResult non_markovianity(const ReducedParams& p, const FinderOptions& opt,
                                      const QuadratureSpec& spec = {}) {
  return non_markovianity([&](double t) { return gamma_factor(t, p, spec); },
                          [&](double t) { return decay_rate(t, p, spec); }, opt);
}

} // namespace becprobe

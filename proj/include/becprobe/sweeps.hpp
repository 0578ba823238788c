#pragma once

// Parameter sweeps over temperature or boson-boson scattering length, and
// bisection for the Markovian / non-Markovian crossover along either axis.

#include "becprobe/dynamics.hpp"
#include "becprobe/error.hpp"
#include "becprobe/parallel.hpp"
#include "becprobe/units.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace becprobe {

enum class SweepAxis { temperature, scattering_length };

constexpr std::string_view to_string(SweepAxis a) noexcept {
  return a == SweepAxis::temperature ? "temperature" : "scattering_length";
}

enum class Spacing { linear, log };

/// `count` values from `min` to `max` inclusive.
inline std::vector<double> make_values(double min, double max, std::size_t count, Spacing spacing) {
  if (count == 0) throw ConfigError("sweep count must be >= 1");
  if (!(std::isfinite(min) && std::isfinite(max)) || max < min) throw ConfigError("sweep range needs min <= max");
  if (spacing == Spacing::log && !(min > 0)) throw ConfigError("log spacing needs min > 0");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    v[i] = spacing == Spacing::linear ? min + f * (max - min) : min * std::pow(max / min, f);
  }
  v.back() = max;
  return v;
}

/// Copy of `base` with the axis quantity replaced (kelvin or metres).
inline PhysicalConfig with_axis_value(PhysicalConfig base, SweepAxis axis, double value) {
  if (axis == SweepAxis::temperature)
    base.T = value;
  else {
    base.a_B = value;
    base.gB_red_override.reset();
  }
  return base;
}

inline MeasureResult measure_config(const PhysicalConfig& c, const FinderOptions& finder,
                                    const QuadratureSpec& quadrature) {
  return non_markovianity(to_reduced(c), finder, quadrature);
}

struct SweepSpec {
  PhysicalConfig base;
  SweepAxis axis = SweepAxis::temperature;
  std::vector<double> values; ///< SI: kelvin or metres
  std::vector<Dimension> dims{Dimension::D1, Dimension::D2, Dimension::D3};
  FinderOptions finder;
  QuadratureSpec quadrature;
  unsigned workers = 1;

  void check() const {
    if (values.empty()) throw ConfigError("sweep has no values");
    if (dims.empty()) throw ConfigError("sweep has no dimensions");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[i - 1]) throw ConfigError("sweep values must be non-decreasing");
    finder.check();
    quadrature.check();
    for (Dimension d : dims)
      for (double v : values) {
        PhysicalConfig c = with_axis_value(base, axis, v);
        c.dim = d;
        if (auto bad = validate(c); !bad.empty())
          throw ConfigError("sweep value " + std::to_string(v) + " in " + std::string(to_string(d)) + ": " +
                            bad.front().message);
      }
  }
};

enum class RowStatus { ok, failed };

struct SweepRow {
  double value = 0.0;
  Dimension dim = Dimension::D3;
  RowStatus status = RowStatus::ok;
  MeasureResult measure;
  std::string error; ///< set when status == failed
};

/// One row per (dimension, value), dimension-major in the order of spec.dims.
/// A row that throws is recorded as failed; the sweep fails only if every row does.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.check();
  const std::size_t nv = spec.values.size();
  std::vector<SweepRow> rows(nv * spec.dims.size());
  parallel_for(rows.size(), spec.workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.dim = spec.dims[i / nv];
    row.value = spec.values[i % nv];
    PhysicalConfig c = with_axis_value(spec.base, spec.axis, row.value);
    c.dim = row.dim;
    try {
      row.measure = measure_config(c, spec.finder, spec.quadrature);
    } catch (const Error& e) {
      row.status = RowStatus::failed;
      row.measure = {};
      row.error = e.what();
    }
  });
  bool any = false;
  for (const auto& r : rows) any = any || r.status == RowStatus::ok;
  if (!any) throw SweepError("every sweep row failed; first error: " + rows.front().error);
  return rows;
}

/// Number of indicator flips (N > eps_N) along the axis, per dimension in spec order.
/// A single crossover gives 1; failed rows are skipped.
inline std::vector<std::size_t> indicator_transitions(const std::vector<SweepRow>& rows,
                                                      const std::vector<Dimension>& dims, double eps_N = 1e-6) {
  std::vector<std::size_t> out;
  for (Dimension d : dims) {
    std::size_t flips = 0;
    int last = -1;
    for (const auto& r : rows) {
      if (r.dim != d || r.status != RowStatus::ok) continue;
      const int now = r.measure.N > eps_N ? 1 : 0;
      if (last >= 0 && now != last) ++flips;
      last = now;
    }
    out.push_back(flips);
  }
  return out;
}

// --------------------------------------------------------------------------
// Critical points

struct CriticalOptions {
  double eps_N = 1e-6;      ///< indicator threshold, non-Markovian iff N > eps_N
  double rel_width = 1e-3;  ///< stop when hi - lo <= rel_width * max(|lo|, |hi|)
  std::size_t max_steps = 200;
  FinderOptions finder = truncating();
  QuadratureSpec quadrature;

  /// A negative region still open at the horizon proves N > 0 already, so the
  /// finders close it at the horizon instead of failing.
  static FinderOptions truncating() {
    FinderOptions f;
    f.open_policy = OpenIntervalPolicy::truncate;
    return f;
  }
};

struct CriticalResult {
  double value = 0.0; ///< midpoint of the final bracket (SI)
  double lo = 0.0;
  double hi = 0.0;
  double N_lo = 0.0;
  double N_hi = 0.0;
  std::size_t steps = 0;
};

inline CriticalResult critical_point(const PhysicalConfig& base, Dimension dim, SweepAxis axis, double lo, double hi,
                                     const CriticalOptions& opt = {}) {
  if (!(lo < hi)) throw ConfigError("critical bracket needs lo < hi");
  if (!(opt.eps_N >= 0) || !(opt.rel_width > 0)) throw ConfigError("critical options out of range");
  auto eval = [&](double v) {
    PhysicalConfig c = with_axis_value(base, axis, v);
    c.dim = dim;
    return measure_config(c, opt.finder, opt.quadrature).N;
  };

  CriticalResult r;
  r.lo = lo;
  r.hi = hi;
  r.N_lo = eval(lo);
  r.N_hi = eval(hi);
  const bool side_lo = r.N_lo > opt.eps_N;
  if (side_lo == (r.N_hi > opt.eps_N)) {
    char msg[256];
    std::snprintf(msg, sizeof msg, "no crossover in [%.6g, %.6g] along %s: N(lo) = %.6g, N(hi) = %.6g", lo, hi,
                  std::string(to_string(axis)).c_str(), r.N_lo, r.N_hi);
    throw BracketError(msg, r.N_lo, r.N_hi);
  }

  while (r.hi - r.lo > opt.rel_width * std::max(std::abs(r.lo), std::abs(r.hi)) && r.steps < opt.max_steps) {
    const double mid = 0.5 * (r.lo + r.hi);
    const double N = eval(mid);
    ++r.steps;
    if ((N > opt.eps_N) == side_lo) {
      r.lo = mid;
      r.N_lo = N;
    } else {
      r.hi = mid;
      r.N_hi = N;
    }
  }
  r.value = 0.5 * (r.lo + r.hi);
  return r;
}

inline CriticalResult critical_scattering(const PhysicalConfig& base, Dimension dim, double a_lo, double a_hi,
                                          const CriticalOptions& opt = {}) {
  return critical_point(base, dim, SweepAxis::scattering_length, a_lo, a_hi, opt);
}

inline CriticalResult critical_temperature(const PhysicalConfig& base, Dimension dim, double T_lo, double T_hi,
                                           const CriticalOptions& opt = {}) {
  return critical_point(base, dim, SweepAxis::temperature, T_lo, T_hi, opt);
}

} // namespace becprobe

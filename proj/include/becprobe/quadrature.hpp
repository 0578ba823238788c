#pragma once

// Panel-based adaptive Gauss-Kronrod (10/21) quadrature over [0, k_max], with
// an a priori panel layout that resolves a known oscillation phase, and a
// literal lattice sum of the single-mode decoherence term on a periodic box.

#include "becprobe/bogoliubov.hpp"
#include "becprobe/error.hpp"
#include "becprobe/parallel.hpp"
#include "becprobe/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace becprobe {

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double k_max_sigma = 8.0; ///< truncation in units of the Gaussian cutoff width (1 in reduced units)
  std::size_t max_panels = std::size_t{1} << 21;
  double oscillation_guard = 4.0; ///< minimum panels per oscillation period

  double k_max() const noexcept { return k_max_sigma; }

  void check() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw ConfigError("quadrature tolerances must be > 0");
    if (!(k_max_sigma >= 5)) throw ConfigError("k_max_sigma must be >= 5");
    if (!(oscillation_guard >= 2)) throw ConfigError("oscillation_guard must be >= 2");
    if (max_panels < 1) throw ConfigError("max_panels must be >= 1");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
};

namespace detail {

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> gk21_nodes{
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> gk21_kronrod_weights{
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208977136220, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for nodes 1, 3, 5, 7, 9.
inline constexpr std::array<double, 5> gk21_gauss_weights{
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

template <class F>
double checked(F& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y))
    throw QuadratureError("integrand is not finite at k = " + std::to_string(x),
                          std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity());
  return y;
}

template <class F>
Panel gauss_kronrod21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = checked(f, c);
  double kronrod = fc * gk21_kronrod_weights[10];
  double gauss = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = h * gk21_nodes[j];
    const double s = checked(f, c - dx) + checked(f, c + dx);
    kronrod += gk21_kronrod_weights[j] * s;
    if (j % 2 == 1) gauss += gk21_gauss_weights[j / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

// Neumaier compensated summation.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

} // namespace detail

/// Integrates f over [0, k_max]. `phase_rate(k)` is the local rate of change of
/// the integrand's oscillation phase with k; the initial layout places at least
/// `oscillation_guard` panels per period before adaptive refinement.
/// When `layout_out` is given it receives the final panel edges (ascending).
template <class F, class Rate>
QuadratureResult integrate_phased(F&& f, const QuadratureSpec& spec, Rate&& phase_rate,
                                  std::vector<double>* layout_out = nullptr) {
  spec.check();
  const double k_max = spec.k_max();
  const double max_width = k_max / 32.0;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  auto width_at = [&](double k) {
    const double r = phase_rate(k);
    return r > 0.0 ? std::min(max_width, two_pi / (spec.oscillation_guard * r)) : max_width;
  };

  std::vector<detail::Panel> panels;
  for (double k = 0.0; k < k_max;) {
    double h = width_at(k);
    h = std::min(h, width_at(std::min(k + h, k_max)));
    const double b = (k_max - (k + h) < 1e-12 * k_max) ? k_max : k + h;
    panels.push_back({k, b, 0.0, 0.0});
    if (panels.size() > spec.max_panels)
      throw QuadratureError("oscillation layout needs more than max_panels = " + std::to_string(spec.max_panels),
                            std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity());
    k = b;
  }

  QuadratureResult out;
  double total_error = 0.0;
  detail::CompensatedSum running;
  for (auto& p : panels) {
    p = detail::gauss_kronrod21(f, p.a, p.b);
    running.add(p.value);
    total_error += p.error;
  }
  out.evaluations = 21 * panels.size();

  auto worse = [&panels](std::size_t i, std::size_t j) { return panels[i].error < panels[j].error; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> queue(worse);
  for (std::size_t i = 0; i < panels.size(); ++i) queue.push(i);

  double total = running.value();
  while (total_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (panels.size() >= spec.max_panels)
      throw QuadratureError("quadrature budget exhausted (" + std::to_string(panels.size()) + " panels)", total,
                            total_error);
    const std::size_t i = queue.top();
    queue.pop();
    const detail::Panel old = panels[i];
    const double mid = 0.5 * (old.a + old.b);
    const auto left = detail::gauss_kronrod21(f, old.a, mid);
    const auto right = detail::gauss_kronrod21(f, mid, old.b);
    out.evaluations += 42;
    running.add(left.value + right.value - old.value);
    total_error += left.error + right.error - old.error;
    total = running.value();
    panels[i] = left;
    panels.push_back(right);
    queue.push(i);
    queue.push(panels.size() - 1);
  }

  // Final value in position order so the result is independent of refinement history.
  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  detail::CompensatedSum sum;
  double err = 0.0;
  for (const auto& p : panels) {
    sum.add(p.value);
    err += p.error;
  }
  out.value = sum.value();
  out.error = err;
  out.panels = panels.size();
  if (layout_out) {
    layout_out->clear();
    layout_out->reserve(panels.size() + 1);
    for (const auto& p : panels) layout_out->push_back(p.a);
    layout_out->push_back(panels.back().b);
  }
  return out;
}

/// One GK21 panel per consecutive pair of `edges`, no refinement. Two
/// integrands on the same edges are integrated on identical nodes.
template <class F>
QuadratureResult integrate_on_layout(F&& f, const std::vector<double>& edges) {
  QuadratureResult out;
  if (edges.size() < 2) return out;
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const auto p = detail::gauss_kronrod21(f, edges[i], edges[i + 1]);
    sum.add(p.value);
    out.error += p.error;
  }
  out.value = sum.value();
  out.panels = edges.size() - 1;
  out.evaluations = 21 * out.panels;
  return out;
}

/// Generic entry point: the oscillation scale is taken from a free-particle
/// phase k^2 t_hint / 2.
template <class F>
QuadratureResult integrate(F&& f, const QuadratureSpec& spec, double t_hint) {
  return integrate_phased(std::forward<F>(f), spec, [t_hint](double k) { return t_hint * k; });
}

/// Literal evaluation of the mode sum on a periodic box of side `box_size`
/// (reduced units): k = 2 pi n / box_size over n in Z^D with |k| <= k_max, the
/// well separation along the first axis, no direction averaging. Normalized so
/// that it converges to gamma_factor / decay_rate as box_size grows.
/// The n = 0 term is the k -> 0 limit of the direction-averaged mode term. It is
/// nonzero only for an ideal gas at finite temperature.
inline double lattice_sum_oracle(const ReducedParams& p, double t, double box_size, IntegrandKind kind,
                                 double k_max = 8.0, unsigned workers = 1) {
  if (!(box_size > 0)) throw DomainError("lattice_sum_oracle: box_size must be > 0");
  const int D = rank(p.dim);
  const double dk = 2.0 * std::numbers::pi / box_size;
  const long n_max = static_cast<long>(std::floor(k_max / dk));
  const double k_max2 = k_max * k_max;
  const double mu = p.mu();

  auto term = [&](double kx, double k2) {
    const double k = std::sqrt(k2);
    const double E = k * std::sqrt(mu + 0.25 * k2);
    const double w = 0.5 * k / std::sqrt(mu + 0.25 * k2);
    const double g = std::sin(kx * p.ell);
    const double v = w * std::exp(-0.5 * k2) * thermal_factor(E, p.beta_red) * g * g;
    if (kind == IntegrandKind::gamma_factor) {
      const double s = std::sin(0.5 * E * t) / E;
      return v * s * s;
    }
    return v * std::sin(E * t) / (2.0 * E);
  };

  // One slab per n_x, summed in a fixed order, then reduced in slab order.
  const std::size_t slabs = static_cast<std::size_t>(2 * n_max + 1);
  std::vector<double> partial(slabs, 0.0);
  parallel_for(slabs, workers, [&](std::size_t s) {
    const long nx = static_cast<long>(s) - n_max;
    const double kx = dk * static_cast<double>(nx);
    detail::CompensatedSum acc;
    if (D == 1) {
      if (nx != 0) acc.add(term(kx, kx * kx));
    } else {
      for (long ny = -n_max; ny <= n_max; ++ny) {
        const double ky = dk * static_cast<double>(ny);
        const double kxy2 = kx * kx + ky * ky;
        if (kxy2 > k_max2) continue;
        if (D == 2) {
          if (kxy2 > 0.0) acc.add(term(kx, kxy2));
          continue;
        }
        for (long nz = -n_max; nz <= n_max; ++nz) {
          const double kz = dk * static_cast<double>(nz);
          const double k2 = kxy2 + kz * kz;
          if (k2 > k_max2 || k2 == 0.0) continue;
          acc.add(term(kx, k2));
        }
      }
    }
    partial[s] = acc.value();
  });

  detail::CompensatedSum total;
  for (double x : partial) total.add(x);
  if (mu == 0.0 && std::isfinite(p.beta_red)) {
    const double c = 4.0 * p.ell * p.ell / (D * p.beta_red);
    total.add(kind == IntegrandKind::gamma_factor ? 0.25 * c * t * t : 0.5 * c * t);
  }
  return p.prefactor * std::pow(dk, D) * total.value();
}

} // namespace becprobe

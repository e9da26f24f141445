#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "stochsym/error.hpp"

namespace stochsym {

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval real_line() { return {}; }

  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  bool contains(double v) const { return v > lo && v < hi; }
  double width() const { return hi - lo; }

  /// Finite window used whenever the interval has to be sampled. Infinite
  /// ends are replaced by a span of 4 from the other end (or [-2, 2]).
  Interval window() const {
    constexpr double span = 4.0;
    if (finite()) return *this;
    if (std::isfinite(lo)) return {lo, lo + span};
    if (std::isfinite(hi)) return {hi - span, hi};
    return {-span / 2, span / 2};
  }

  double midpoint() const {
    const Interval win = window();
    return 0.5 * (win.lo + win.hi);
  }
};

/// Chebyshev-Gauss nodes on (lo, hi); strictly interior.
inline std::vector<double> chebyshev_nodes(double lo, double hi, int n) {
  std::vector<double> nodes(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double c = std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * n));
    nodes[static_cast<std::size_t>(k)] = 0.5 * (lo + hi) - 0.5 * (hi - lo) * c;
  }
  return nodes;
}

/// n equally spaced points including both ends.
inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = 0.5 * (lo + hi);
    return v;
  }
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

/// n cell midpoints of a uniform partition of [lo, hi]; never touches the ends.
inline std::vector<double> midpoints(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * (i + 0.5) / n;
  return v;
}

namespace detail {

inline double simpson_step(const std::function<double(double)>& fn, double a, double fa, double b,
                           double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = fn(lm);
  const double frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (std::abs(delta) <= std::max(15.0 * tol, roundoff) || std::abs(b - a) < 1e-15 * (1.0 + std::abs(a))) {
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    throw NumericalError("adaptive Simpson quadrature did not converge");
  }
  return simpson_step(fn, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(fn, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of fn over [a, b] (b < a allowed) to an
/// absolute tolerance. Non-finite integrands or failure to converge throw.
inline double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                               double tol = 1e-12, int max_depth = 48) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(fn, b, a, tol, max_depth);
  // Split into a few panels so features narrower than the interval are seen.
  constexpr int panels = 8;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels;
    const double hi = (p + 1 == panels) ? b : a + (b - a) * (p + 1) / panels;
    const double m = 0.5 * (lo + hi);
    const double flo = fn(lo);
    const double fhi = fn(hi);
    const double fm = fn(m);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += detail::simpson_step(fn, lo, flo, hi, fhi, m, fm, whole, tol / panels, max_depth);
  }
  if (!std::isfinite(total)) throw NumericalError("quadrature produced a non-finite value");
  return total;
}

/// Solves g(x) = 0 on [lo, hi] with a sign change, Newton steps safeguarded
/// by bisection. `dg` is the derivative of g.
inline double bracketed_newton(const std::function<double(double)>& g,
                               const std::function<double(double)>& dg, double lo, double hi,
                               double xtol = 1e-15, int max_iter = 200) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0) == (ghi > 0)) {
    throw DomainError("root not bracketed on [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  if (glo > 0) {
    std::swap(lo, hi);
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx < 0) lo = x; else hi = x;
    const double d = dg(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - gx / d : 0.5 * (lo + hi);
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    if (!(next > a && next < b)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= xtol * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

/// Plain bisection for a sign change of g on [lo, hi].
inline double bisect(const std::function<double(double)>& g, double lo, double hi,
                     double xtol = 1e-14) {
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > xtol * (1.0 + std::abs(lo)); ++it) {
    const double m = 0.5 * (lo + hi);
    const double gm = g(m);
    if ((gm > 0) == (glo > 0)) {
      lo = m;
      glo = gm;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

/// Least-squares slope of log(err) against log(step): the observed order.
inline double observed_order(const std::vector<double>& steps, const std::vector<double>& errors) {
  const std::size_t n = steps.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(steps[i]);
    const double ly = std::log(errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

/// Generator for path `index` under the master seed; independent of how
/// paths are scheduled.
inline std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return std::mt19937_64(mix(mix(seed) ^ index));
}

}  // namespace stochsym

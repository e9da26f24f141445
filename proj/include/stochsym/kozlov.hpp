#pragma once

// Kozlov substitution y = int dx / phi for a symmetry phi(x,t,w) d/dx, the
// resulting equation dy = F(t,w) dt + S(t,w) dw, and its pathwise integration.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/ito.hpp"

namespace stochsym {

struct KozlovMap {
  Expr y;        // y(x, t, w)
  Expr x_of_y;   // x(y, t, w); the variable x stands for y
  bool closed_form = false;

  double to_y(double x, double t, double w) const { return evaluate(y, Bindings(x, t, w)); }
  double to_x(double yv, double t, double w) const { return evaluate(x_of_y, Bindings(yv, t, w)); }
};

namespace detail {

inline SampleBox kozlov_box(const Interval& domain) {
  return SampleBox{domain, Interval{0.0, 1.0}, Interval{-2.0, 2.0}};
}

}  // namespace detail

/// y = int dx / phi with (t, w) frozen. Closed forms for phi free of x and
/// for phi = exp(g) with g affine in x; quadrature otherwise.
inline KozlovMap kozlov_map(const Expr& phi, const Interval& domain) {
  const SampleBox box = detail::kozlov_box(domain);
  int sign = 0;
  for (const auto& p : sample_points(box)) {
    const double v = evaluate(phi, p);
    const int sg = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (sg == 0 || (sign != 0 && sg != sign)) throw DomainError("phi vanishes inside the domain");
    sign = sg;
  }

  if (!depends_on(phi, Var::x)) return {X / phi, X * phi, true};

  if (phi.op() == Op::exp) {
    const Expr g = phi.args()[0];
    Expr gx = differentiate(g, Var::x);
    if (is_identically_zero(differentiate(gx, Var::x), box)) {
      if (depends_on(gx, Var::x)) gx = substitute(gx, Var::x, Expr(domain.midpoint()));
      const Expr g0 = substitute(g, Var::x, Expr(0.0));
      // y = -exp(-g)/g_x, so x = (-log(-g_x y) - g0)/g_x.
      const Expr y = -exp(-g) / gx;
      const Expr back = (-log(-(gx * X)) - g0) / gx;
      return {y, back, true};
    }
  }

  const double x_ref = domain.midpoint();
  const Interval bracket = detail::inverse_bracket(domain);
  const Expr y = integral(Expr(1.0) / phi, Var::x, x_ref, X);
  return {y, inverse(y, X, bracket.lo, bracket.hi), false};
}

/// dy = F(t,w) dt + S(t,w) dw.
struct GeneralizedItoEquation {
  Expr F;
  Expr S;
  KozlovMap map;
  /// F and S free of w: a proper Ito equation.
  bool proper = false;
  /// Largest |dF/dw|, |dS/dw| on the sample box.
  double w_dependence = 0.0;
};

/// Applies the Ito formula to y(x, t, w) with x and w driven by the same dw:
/// F = y_t + f y_x + (y_xx + 2 y_xw + y_ww)/2, S = y_x + y_w. Both must be
/// independent of x (checked at fixed (t, w) across x to 1e-8 relative).
inline GeneralizedItoEquation transform_equation(const ItoEquation& eq, const KozlovMap& map) {
  if (!eq.unit_noise()) throw ValidationError("Kozlov transform needs a unit-noise equation");
  const Expr& y = map.y;
  const Expr yx = differentiate(y, Var::x);
  const Expr yw = differentiate(y, Var::w);
  const Expr F_full = differentiate(y, Var::t) + eq.f() * yx +
                      Expr(0.5) * (differentiate(yx, Var::x) + Expr(2.0) * differentiate(yx, Var::w) +
                                   differentiate(yw, Var::w));
  const Expr S_full = yx + yw;

  const Interval xw = eq.domain().window();
  const auto xs = chebyshev_nodes(xw.lo, xw.hi, 12);
  const double x0 = eq.domain().midpoint();
  for (double t : linspace(0.0, 1.0, 6)) {
    for (double w : linspace(-2.0, 2.0, 6)) {
      for (const Expr* e : {&F_full, &S_full}) {
        const double ref = evaluate(*e, Bindings(x0, t, w));
        double lo = ref;
        double hi = ref;
        double scale = std::abs(ref);
        for (double x : xs) {
          const double v = evaluate(*e, Bindings(x, t, w));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          scale = std::max(scale, std::abs(v));
        }
        if (hi - lo > 1e-8 * (1.0 + scale)) {
          throw ValidationError("transformed coefficients still depend on y; phi is not a symmetry");
        }
      }
    }
  }

  GeneralizedItoEquation g;
  g.F = substitute(F_full, Var::x, Expr(x0));
  g.S = substitute(S_full, Var::x, Expr(x0));
  g.map = map;
  const Expr Fw = differentiate(g.F, Var::w);
  const Expr Sw = differentiate(g.S, Var::w);
  SampleBox tw{Interval{-1.0, 1.0}, Interval{0.0, 1.0}, Interval{-2.0, 2.0}};
  for (const auto& p : sample_points(tw)) {
    g.w_dependence = std::max({g.w_dependence, std::abs(evaluate(Fw, p)), std::abs(evaluate(Sw, p))});
  }
  g.proper = g.w_dependence < 1e-8;
  return g;
}

/// A sampled Wiener path on the uniform grid 0, dt, ..., n dt.
struct WienerPath {
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> values;

  /// Reproducible from (seed, stream, dt, T); stream separates paths that
  /// share a master seed.
  static WienerPath generate(std::uint64_t seed, double dt, double T, std::uint64_t stream = 0) {
    if (!(dt > 0) || !(T > 0)) throw ValidationError("Wiener path needs dt > 0 and T > 0");
    const auto n = static_cast<std::size_t>(std::llround(T / dt));
    if (n == 0) throw ValidationError("T shorter than one step");
    std::mt19937_64 rng = path_stream(seed, stream);
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    WienerPath p;
    p.dt = dt;
    p.seed = seed;
    p.times.resize(n + 1);
    p.values.resize(n + 1);
    p.values[0] = 0.0;
    for (std::size_t i = 0; i <= n; ++i) p.times[i] = static_cast<double>(i) * dt;
    for (std::size_t i = 1; i <= n; ++i) p.values[i] = p.values[i - 1] + normal(rng);
    return p;
  }

  std::size_t steps() const { return values.size() - 1; }

  /// Same path seen on every factor-th grid point.
  WienerPath coarsen(std::size_t factor) const {
    if (factor == 0 || steps() % factor != 0) throw ValidationError("coarsening factor must divide the step count");
    WienerPath p;
    p.dt = dt * static_cast<double>(factor);
    p.seed = seed;
    for (std::size_t i = 0; i <= steps(); i += factor) {
      p.times.push_back(times[i]);
      p.values.push_back(values[i]);
    }
    return p;
  }
};

/// y(t_i) = y0 + int F dt (trapezoid) + int S dw (left-point sums).
inline std::vector<double> integrate_path(const GeneralizedItoEquation& g, const WienerPath& path,
                                          double y0) {
  const CompiledExpr F(g.F);
  const CompiledExpr S(g.S);
  std::vector<double> y(path.values.size());
  y[0] = y0;
  double F_prev = F(0.0, path.times[0], path.values[0]);
  for (std::size_t i = 0; i + 1 < path.values.size(); ++i) {
    const double t0 = path.times[i];
    const double t1 = path.times[i + 1];
    const double F_next = F(0.0, t1, path.values[i + 1]);
    const double dw = path.values[i + 1] - path.values[i];
    y[i + 1] = y[i] + 0.5 * (F_prev + F_next) * (t1 - t0) + S(0.0, t0, path.values[i]) * dw;
    F_prev = F_next;
  }
  return y;
}

/// Maps a y-path back to x through the inverse Kozlov map.
inline std::vector<double> map_back(const KozlovMap& map, const WienerPath& path,
                                    const std::vector<double>& y) {
  const CompiledExpr back(map.x_of_y);
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = back(y[i], path.times[i], path.values[i]);
  return x;
}

/// Euler-Maruyama for a unit-noise equation on a given Wiener path.
inline std::vector<double> euler_maruyama_path(const ItoEquation& eq, const WienerPath& path, double x0) {
  const CompiledExpr f(eq.f());
  const CompiledExpr s(eq.sigma());
  std::vector<double> x(path.values.size());
  x[0] = x0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double t = path.times[i];
    const double dw = path.values[i + 1] - path.values[i];
    x[i + 1] = x[i] + f(x[i], t) * (path.times[i + 1] - t) + s(x[i], t) * dw;
  }
  return x;
}

}  // namespace stochsym

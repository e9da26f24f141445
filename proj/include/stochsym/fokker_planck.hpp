#pragma once

// Fokker-Planck equation u_t + (f u)_x - (sigma^2 u)_xx / 2 = 0 and a
// conservative Crank-Nicolson finite-volume solver with zero-flux walls.

#include <cmath>
#include <string>
#include <vector>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/ito.hpp"

namespace stochsym {

struct FPEquation {
  Expr f;
  Expr sigma{1.0};
  Interval domain;

  /// Coefficients of the expanded form c0 u + c1 u_x + c2 u_xx (+ u_t = 0).
  struct Expanded {
    Expr c0;  // f_x - (sigma^2)_xx / 2
    Expr c1;  // f - (sigma^2)_x
    Expr c2;  // -sigma^2 / 2
  };

  Expanded expanded() const {
    const Expr d = pow(sigma, 2.0);
    const Expr dx = differentiate(d, Var::x);
    return {differentiate(f, Var::x) - Expr(0.5) * differentiate(dx, Var::x), f - dx, Expr(-0.5) * d};
  }

  /// u_t + (f u)_x - (sigma^2 u)_xx / 2 for a candidate u(x, t).
  Expr residual(const Expr& u) const {
    return differentiate(u, Var::t) + differentiate(f * u, Var::x) -
           Expr(0.5) * differentiate(pow(sigma, 2.0) * u, Var::x, 2);
  }
};

inline FPEquation build_fp(const ItoEquation& eq) { return {eq.f(), eq.sigma(), eq.domain()}; }

/// Density sampled on a uniform vertex grid; cell volumes are the
/// trapezoid weights (h/2 at the walls).
struct DensityGrid {
  std::vector<double> x;
  std::vector<double> u;
  double t = 0.0;

  double h() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }

  double weight(std::size_t i) const {
    return (i == 0 || i + 1 == x.size()) ? 0.5 * h() : h();
  }

  double mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m += weight(i) * u[i];
    return m;
  }

  double moment(int order) const {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m += weight(i) * u[i] * std::pow(x[i], order);
    return m / mass();
  }

  double mean() const { return moment(1); }
  double variance() const {
    const double m = mean();
    return moment(2) - m * m;
  }

  /// sum_i w_i |u_i - v_i| against another density on the same nodes.
  double l1_distance(const std::vector<double>& v) const {
    if (v.size() != u.size()) throw ValidationError("densities on different grids");
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) d += weight(i) * std::abs(u[i] - v[i]);
    return d;
  }

  static DensityGrid uniform_grid(double xmin, double xmax, int n) {
    if (n < 3 || !(xmin < xmax)) throw ValidationError("grid needs xmin < xmax and at least 3 nodes");
    DensityGrid g;
    g.x = linspace(xmin, xmax, n);
    g.u.assign(g.x.size(), 0.0);
    return g;
  }

  /// Normal density renormalized to unit discrete mass.
  static DensityGrid gaussian(double xmin, double xmax, int n, double mean, double sd) {
    if (!(sd > 0)) throw ValidationError("Gaussian initial condition needs sd > 0");
    DensityGrid g = uniform_grid(xmin, xmax, n);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double z = (g.x[i] - mean) / sd;
      g.u[i] = std::exp(-0.5 * z * z);
    }
    const double m = g.mass();
    for (double& v : g.u) v /= m;
    return g;
  }
};

/// Solves a x_{i-1} + b x_i + c x_{i+1} = d in place (Thomas algorithm).
inline std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                             std::vector<double> c, std::vector<double> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> xs(n);
  xs[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) xs[i] = (d[i] - c[i] * xs[i + 1]) / b[i];
  return xs;
}

struct FPSolveOptions {
  double peclet_warn = 2.0;
  double peclet_error = 10.0;
  /// Keep every n-th step as a snapshot (0: initial and final only).
  int snapshot_every = 0;
};

struct FPSolution {
  std::vector<DensityGrid> snapshots;
  std::vector<std::string> warnings;
  double max_peclet = 0.0;
  double mass_drift = 0.0;  // |mass(T) - mass(0)|
  double min_value = 0.0;

  const DensityGrid& final() const { return snapshots.back(); }
};

namespace detail {

// Semi-discrete operator du/dt = A u as a tridiagonal matrix (lower, diag, upper).
struct FPOperator {
  std::vector<double> lower, diag, upper;
  double max_peclet = 0.0;
};

inline FPOperator assemble(const CompiledExpr& f, const CompiledExpr& sigma, const DensityGrid& g,
                           double t) {
  const std::size_t n = g.x.size();
  const double h = g.h();
  std::vector<double> D(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sigma(g.x[i], t);
    D[i] = s * s;
  }
  // Flux J_{i+1/2} = a_i u_i + b_i u_{i+1}.
  std::vector<double> a(n - 1), b(n - 1);
  FPOperator op;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double xm = 0.5 * (g.x[i] + g.x[i + 1]);
    const double fm = f(xm, t);
    a[i] = 0.5 * fm + 0.5 * D[i] / h;
    b[i] = 0.5 * fm - 0.5 * D[i + 1] / h;
    op.max_peclet = std::max(op.max_peclet, std::abs(fm) * h / (0.5 * (D[i] + D[i + 1])));
  }
  op.lower.assign(n, 0.0);
  op.diag.assign(n, 0.0);
  op.upper.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double V = g.weight(i);
    if (i + 1 < n) {
      op.diag[i] -= a[i] / V;
      op.upper[i] -= b[i] / V;
    }
    if (i > 0) {
      op.diag[i] += b[i - 1] / V;
      op.lower[i] += a[i - 1] / V;
    }
  }
  return op;
}

// (I - theta dt A) u_new = (I + (1 - theta) dt A) u.
inline std::vector<double> implicit_step(const FPOperator& op, const std::vector<double>& u, double dt,
                                         double theta) {
  const std::size_t n = u.size();
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = -theta * dt * op.lower[i];
    di[i] = 1.0 - theta * dt * op.diag[i];
    up[i] = -theta * dt * op.upper[i];
    double au = op.diag[i] * u[i];
    if (i > 0) au += op.lower[i] * u[i - 1];
    if (i + 1 < n) au += op.upper[i] * u[i + 1];
    rhs[i] = u[i] + (1.0 - theta) * dt * au;
  }
  return solve_tridiagonal(lo, di, up, rhs);
}

}  // namespace detail

/// Time steps started with implicit Euler halves before Crank-Nicolson.
inline constexpr std::size_t kRannacherSteps = 2;

/// Crank-Nicolson in time on the flux form u_t = -J_x with
/// J = f u - (sigma^2 u)_x / 2, zero flux at both walls. Coefficients are
/// frozen at t + dt/2 within each step; the first steps are Rannacher
/// (implicit Euler) half steps.
inline FPSolution solve_fp(const FPEquation& fpe, const DensityGrid& u0, double dt, double T,
                           const FPSolveOptions& opt = {}) {
  if (!(dt > 0) || !(T > 0)) throw ValidationError("solve_fp needs dt > 0 and T > 0");
  if (u0.x.size() < 3) throw ValidationError("grid too small");
  const CompiledExpr f(fpe.f);
  const CompiledExpr sigma(fpe.sigma);
  const bool static_coeffs = !depends_on(fpe.f, Var::t) && !depends_on(fpe.sigma, Var::t);
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  if (steps == 0) throw ValidationError("T shorter than one step");

  FPSolution sol;
  sol.snapshots.push_back(u0);
  DensityGrid cur = u0;
  const double mass0 = u0.mass();
  detail::FPOperator op;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = cur.t;
    if (s == 0 || !static_coeffs) {
      op = detail::assemble(f, sigma, cur, t + 0.5 * dt);
      sol.max_peclet = std::max(sol.max_peclet, op.max_peclet);
      if (op.max_peclet > opt.peclet_error) {
        throw ValidationError("cell Peclet number " + format_number(op.max_peclet) +
                              " exceeds " + format_number(opt.peclet_error) + "; refine the grid");
      }
    }
    if (s < kRannacherSteps) {
      // Two implicit Euler half steps damp the grid-scale modes CN keeps.
      for (int half = 0; half < 2; ++half) cur.u = detail::implicit_step(op, cur.u, 0.5 * dt, 1.0);
    } else {
      cur.u = detail::implicit_step(op, cur.u, dt, 0.5);
    }
    cur.t = t + dt;
    for (double& v : cur.u) {
      if (!std::isfinite(v)) throw NumericalError("non-finite density value");
      sol.min_value = std::min(sol.min_value, v);
      if (v < 0) {
        if (v < -1e-12) throw NumericalError("negative density " + format_number(v));
        v = 0.0;
      }
    }
    if (opt.snapshot_every > 0 && (s + 1) % static_cast<std::size_t>(opt.snapshot_every) == 0 &&
        s + 1 < steps) {
      sol.snapshots.push_back(cur);
    }
  }
  sol.snapshots.push_back(cur);
  sol.mass_drift = std::abs(cur.mass() - mass0);
  if (sol.max_peclet > opt.peclet_warn) {
    sol.warnings.push_back("cell Peclet number " + format_number(sol.max_peclet) + " above " +
                           format_number(opt.peclet_warn));
  }
  return sol;
}

}  // namespace stochsym

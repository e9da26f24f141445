#pragma once

// Scalar Ito equations dx = f(x,t) dt + sigma(x,t) dw: construction with
// validation, reduction to unit noise, the Ito Laplacian and the residuals
// of the determining equations for a standard symmetry phi(x,t,w) d/dx.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/numeric.hpp"

namespace stochsym {

class ItoEquation {
 public:
  /// Validates that neither coefficient involves w and that sigma keeps one
  /// strict sign on the domain (sampled over t in [0, 1] when time-dependent).
  static ItoEquation make(Expr f, Expr sigma, Interval domain = Interval::real_line()) {
    if (!(domain.lo < domain.hi)) throw ValidationError("empty domain");
    if (depends_on(f, Var::w) || depends_on(sigma, Var::w)) {
      throw ValidationError("drift and noise coefficients may depend on x and t only");
    }
    ItoEquation eq;
    eq.f_ = std::move(f);
    eq.sigma_ = std::move(sigma);
    eq.domain_ = domain;

    const SampleBox box = eq.box();
    int sign = 0;
    for (const auto& p : sample_points(box)) {
      double s = 0.0;
      try {
        s = evaluate(eq.sigma_, p);
      } catch (const DomainError& e) {
        throw ValidationError(std::string("noise coefficient is singular on the domain: ") + e.what());
      }
      const int sg = s > 0 ? 1 : (s < 0 ? -1 : 0);
      if (sg == 0 || (sign != 0 && sg != sign)) {
        throw ValidationError("noise coefficient vanishes on the domain");
      }
      sign = sg;
    }
    eq.autonomous_ = eq.is_static(eq.f_) && eq.is_static(eq.sigma_);
    return eq;
  }

  const Expr& f() const { return f_; }
  const Expr& sigma() const { return sigma_; }
  const Interval& domain() const { return domain_; }
  bool autonomous() const { return autonomous_; }

  bool unit_noise() const { return sigma_.is_constant(1.0); }

  /// Identity-test box: the domain in x, plus t in [0, 1] if a coefficient
  /// involves t.
  SampleBox box() const {
    SampleBox b;
    b.x = domain_;
    if (depends_on(f_, Var::t) || depends_on(sigma_, Var::t)) b.t = Interval{0.0, 1.0};
    return b;
  }

 private:
  Expr f_;
  Expr sigma_{1.0};
  Interval domain_;
  bool autonomous_ = true;

  bool is_static(const Expr& e) const {
    if (!depends_on(e, Var::t)) return true;
    SampleBox b{domain_, Interval{0.0, 1.0}, std::nullopt};
    return is_identically_zero(differentiate(e, Var::t), b);
  }
};

/// The change of variable xi = int_{x_ref}^x ds / sigma(s, t).
struct Transform {
  Expr forward;   // xi as a function of (x, t)
  Expr inverse;   // x as a function of (xi, t); the variable x stands for xi
  double x_ref = 0.0;
  bool closed_form = false;

  double to_xi(double x, double t = 0.0) const { return evaluate(forward, Bindings(x, t)); }
  double to_x(double xi, double t = 0.0) const { return evaluate(inverse, Bindings(xi, t)); }
};

struct NormalizedEquation {
  ItoEquation equation;
  Transform transform;
};

namespace detail {

// Finite bracket inside the domain for the numeric inverse.
inline Interval inverse_bracket(const Interval& domain) {
  const Interval win = domain.window();
  const double pad = 1e-6 * win.width();
  return {std::isfinite(domain.lo) ? win.lo + pad : win.lo,
          std::isfinite(domain.hi) ? win.hi - pad : win.hi};
}

}  // namespace detail

/// Rewrites the equation in the variable xi so that the noise becomes 1.
/// The new drift is f/sigma - sigma_x/2 - int sigma_t/sigma^2 dx, composed
/// with the inverse map. Time-dependent sigma must be separable, a(t) s(x).
inline NormalizedEquation normalize_noise(const ItoEquation& eq) {
  const Expr& sigma = eq.sigma();
  if (eq.unit_noise()) {
    return {eq, Transform{X, X, eq.domain().midpoint(), true}};
  }
  const SampleBox box = eq.box();
  if (box.t) {
    const Expr sx = differentiate(sigma, Var::x);
    const Expr st = differentiate(sigma, Var::t);
    const Expr mixed = sigma * differentiate(sx, Var::t) - sx * st;
    if (!is_identically_zero(mixed, box)) {
      throw ValidationError("time-dependent noise must be separable as a(t)*s(x)");
    }
  }

  if (sigma.is_constant()) {
    const double s = sigma.number();
    const Expr drift = substitute(eq.f(), Var::x, Expr(s) * X) / Expr(s);
    Interval image{eq.domain().lo / s, eq.domain().hi / s};
    if (s < 0) std::swap(image.lo, image.hi);
    return {ItoEquation::make(drift, Expr(1.0), image), Transform{X / Expr(s), Expr(s) * X, 0.0, true}};
  }

  const double x_ref = eq.domain().midpoint();
  const Interval bracket = detail::inverse_bracket(eq.domain());
  const Expr forward = integral(Expr(1.0) / sigma, Var::x, x_ref, X);
  const Expr back = inverse(forward, X, bracket.lo, bracket.hi);

  const Expr sigma_t = differentiate(sigma, Var::t);
  const Expr phi = eq.f() / sigma - Expr(0.5) * differentiate(sigma, Var::x) -
                   integral(sigma_t / pow(sigma, 2.0), Var::x, x_ref, X);
  const Expr drift = substitute(phi, Var::x, back);

  Interval image{evaluate(forward, Bindings(bracket.lo, 0.0)),
                 evaluate(forward, Bindings(bracket.hi, 0.0))};
  if (image.lo > image.hi) std::swap(image.lo, image.hi);
  return {ItoEquation::make(drift, Expr(1.0), image), Transform{forward, back, x_ref, false}};
}

/// Delta phi = phi_ww + 2 sigma phi_xw + sigma^2 phi_xx.
inline Expr ito_laplacian(const Expr& phi, const Expr& sigma) {
  const Expr phi_x = differentiate(phi, Var::x);
  return differentiate(phi, Var::w, 2) + Expr(2.0) * sigma * differentiate(phi_x, Var::w) +
         pow(sigma, 2.0) * differentiate(phi_x, Var::x);
}

/// Sampling grid for determining-equation residuals: cell midpoints of the
/// x window, and end-inclusive uniform points in t and w.
struct ResidualGrid {
  Interval x = Interval::real_line();
  Interval t{0.0, 1.0};
  Interval w{-2.0, 2.0};
  int n = 11;

  std::vector<Bindings> points() const {
    const Interval xw = x.window();
    std::vector<Bindings> pts;
    for (double xv : midpoints(xw.lo, xw.hi, n)) {
      for (double tv : linspace(t.lo, t.hi, n)) {
        for (double wv : linspace(w.lo, w.hi, n)) pts.emplace_back(xv, tv, wv);
      }
    }
    return pts;
  }
};

struct SymmetryResiduals {
  double r1 = 0.0;     // max |phi_t + f phi_x - phi f_x + Delta(phi)/2|
  double r2 = 0.0;     // max |phi_w + sigma phi_x - phi sigma_x|
  double scale = 0.0;  // largest sub-term magnitude met on the grid

  bool accepted(double tol = 1e-8) const {
    return r1 < tol * (1.0 + scale) && r2 < tol * (1.0 + scale);
  }
};

/// Residuals of the determining equations for X = phi(x,t,w) d/dx.
inline SymmetryResiduals symmetry_residuals(const ItoEquation& eq, const Expr& phi,
                                            const ResidualGrid& grid) {
  const Expr& f = eq.f();
  const Expr& s = eq.sigma();
  const Expr phi_x = differentiate(phi, Var::x);
  const Expr e1 = differentiate(phi, Var::t) + f * phi_x - phi * differentiate(f, Var::x) +
                  Expr(0.5) * ito_laplacian(phi, s);
  const Expr e2 = differentiate(phi, Var::w) + s * phi_x - phi * differentiate(s, Var::x);
  SymmetryResiduals r;
  for (const auto& p : grid.points()) {
    const ScaledValue a = evaluate_scaled(e1, p);
    const ScaledValue b = evaluate_scaled(e2, p);
    r.r1 = std::max(r.r1, std::abs(a.value));
    r.r2 = std::max(r.r2, std::abs(b.value));
    r.scale = std::max({r.scale, a.scale, b.scale});
  }
  return r;
}

inline SymmetryResiduals symmetry_residuals(const ItoEquation& eq, const Expr& phi) {
  return symmetry_residuals(eq, phi, ResidualGrid{eq.domain()});
}

}  // namespace stochsym

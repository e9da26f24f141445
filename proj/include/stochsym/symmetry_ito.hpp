#pragma once

// Standard symmetries of unit-noise scalar Ito equations. A time-preserving
// symmetry phi(x,t,w) d/dx exists exactly for three drift families:
//   A: f = h(t)                     phi = P(x - w - H(t))
//   B: f = h(t) + k(t) x            phi = exp(K(t))
//   C: f = h(t) + k(t) exp(beta x)  phi = exp(beta (x - w - H(t)))
// with H, K primitives of h, k.

#include <cmath>
#include <optional>
#include <string>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/ito.hpp"

namespace stochsym {

enum class SymmetryKind { TypeA, TypeB, TypeC, NoSymmetry };

inline const char* to_string(SymmetryKind k) {
  switch (k) {
    case SymmetryKind::TypeA: return "TypeA";
    case SymmetryKind::TypeB: return "TypeB";
    case SymmetryKind::TypeC: return "TypeC";
    case SymmetryKind::NoSymmetry: return "NoSymmetry";
  }
  return "?";
}

struct SymmetryClass {
  SymmetryKind kind = SymmetryKind::NoSymmetry;
  Expr h;             // h0 or h(t)
  Expr k;             // k0 or k(t); zero for TypeA
  double beta = 0.0;  // TypeC only
  Expr H;             // primitive of h from t = 0
  Expr K;             // primitive of k from t = 0
  Expr generator{0.0};
  bool random = false;
  std::string note;

  bool autonomous() const { return h.is_constant() && k.is_constant(); }
  double h0() const { return h.number(); }
  double k0() const { return k.number(); }
};

/// Argument x - w - H(t) of the arbitrary function in the TypeA generator.
inline Expr caseA_arg(const Expr& H) { return X - W - H; }

struct ClassifyOptions {
  /// TypeA emits P = identity (a random symmetry) instead of P = 1.
  bool random_representative = false;
  /// Relative tolerance for constancy of f''/f'.
  double beta_tol = 1e-7;
};

namespace detail {

// beta = f''/f' taken where |f'| is largest, then checked for constancy.
inline std::optional<double> recover_beta(const Expr& f1, const Expr& f2, const SampleBox& box,
                                          double tol) {
  double best = -1.0;
  double beta = 0.0;
  std::vector<std::pair<double, double>> vals;
  for (const auto& p : sample_points(box)) {
    double a = 0.0;
    double b = 0.0;
    try {
      a = evaluate(f1, p);
      b = evaluate(f2, p);
    } catch (const DomainError&) {
      continue;
    }
    vals.emplace_back(a, b);
    if (std::abs(a) > best) {
      best = std::abs(a);
      beta = b / a;
    }
  }
  if (best <= 0.0 || beta == 0.0) return std::nullopt;
  for (const auto& [a, b] : vals) {
    if (std::abs(b - beta * a) > tol * (std::abs(b) + std::abs(beta * a)) + 1e-300) {
      return std::nullopt;
    }
  }
  return beta;
}

inline Expr make_generator(SymmetryKind kind, const Expr& H, const Expr& K, double beta,
                           bool random_representative) {
  switch (kind) {
    case SymmetryKind::TypeA: return random_representative ? caseA_arg(H) : Expr(1.0);
    case SymmetryKind::TypeB: return exp(K);
    case SymmetryKind::TypeC: return exp(Expr(beta) * (X - W - H));
    case SymmetryKind::NoSymmetry: break;
  }
  return Expr(0.0);
}

inline void finish(SymmetryClass& c, const ClassifyOptions& opt) {
  c.generator = make_generator(c.kind, c.H, c.K, c.beta, opt.random_representative);
  c.random = depends_on(c.generator, Var::w);
}

}  // namespace detail

/// Classifies an autonomous unit-noise drift f(x) on the domain.
inline SymmetryClass classify_autonomous(const Expr& f, const Interval& domain,
                                         const ClassifyOptions& opt = {}) {
  if (depends_on(f, Var::t) || depends_on(f, Var::w)) {
    throw ValidationError("autonomous classification needs a drift in x alone");
  }
  const SampleBox box{domain, std::nullopt, std::nullopt};
  const Expr f1 = differentiate(f, Var::x);
  const Expr f2 = differentiate(f1, Var::x);
  const double xm = domain.midpoint();

  SymmetryClass c;
  c.k = Expr(0.0);
  if (is_identically_zero(f1, box)) {
    c.kind = SymmetryKind::TypeA;
    c.h = Expr(evaluate(f, Bindings(xm)));
    c.note = f1.is_constant(0.0)
                 ? "constant drift: also the k0 = 0 degeneration of TypeB and TypeC"
                 : "drift numerically constant: degenerate TypeB/TypeC reported as TypeA";
  } else if (is_identically_zero(f2, box)) {
    c.kind = SymmetryKind::TypeB;
    const double k0 = evaluate(f1, Bindings(xm));
    c.k = Expr(k0);
    c.h = Expr(evaluate(f, Bindings(xm)) - k0 * xm);
  } else {
    const Expr f3 = differentiate(f2, Var::x);
    std::optional<double> beta;
    if (is_identically_zero(f2 * f2 - f3 * f1, box)) beta = detail::recover_beta(f1, f2, box, opt.beta_tol);
    if (beta) {
      const double b = *beta;
      const double k0 = evaluate(f1, Bindings(xm)) / (b * std::exp(b * xm));
      const double h0 = evaluate(f, Bindings(xm)) - k0 * std::exp(b * xm);
      const Expr rest = f - Expr(h0) - Expr(k0) * exp(Expr(b) * X);
      if (is_identically_zero(rest, box)) {
        c.kind = SymmetryKind::TypeC;
        c.beta = b;
        c.h = Expr(h0);
        c.k = Expr(k0);
      }
    }
    if (c.kind != SymmetryKind::TypeC) {
      c.h = Expr(0.0);
      c.kind = SymmetryKind::NoSymmetry;
    }
  }
  c.H = c.h * T;
  c.K = c.k * T;
  detail::finish(c, opt);
  return c;
}

/// Classifies a time-dependent unit-noise drift f(x, t) on domain x tspan.
/// h(t), k(t) are extracted as expressions; H, K are quadrature nodes.
inline SymmetryClass classify_time_dependent(const Expr& f, const Interval& domain,
                                             const Interval& tspan = Interval{0.0, 1.0},
                                             const ClassifyOptions& opt = {}) {
  if (depends_on(f, Var::w)) throw ValidationError("drift may depend on x and t only");
  if (!depends_on(f, Var::t)) return classify_autonomous(f, domain, opt);

  const SampleBox box{domain, tspan, std::nullopt};
  const Expr f1 = differentiate(f, Var::x);
  const Expr f2 = differentiate(f1, Var::x);
  const double xm = domain.midpoint();
  const Expr f_at = substitute(f, Var::x, Expr(xm));
  const Expr f1_at = substitute(f1, Var::x, Expr(xm));

  SymmetryClass c;
  c.h = Expr(0.0);
  c.k = Expr(0.0);
  if (is_identically_zero(f1, box)) {
    c.kind = SymmetryKind::TypeA;
    c.h = f_at;
  } else if (is_identically_zero(f2, box)) {
    c.kind = SymmetryKind::TypeB;
    c.k = f1_at;
    c.h = f_at - Expr(xm) * f1_at;
  } else {
    const Expr f3 = differentiate(f2, Var::x);
    std::optional<double> beta;
    if (is_identically_zero(f2 * f2 - f3 * f1, box)) beta = detail::recover_beta(f1, f2, box, opt.beta_tol);
    if (beta) {
      const double b = *beta;
      const Expr k = f1_at * Expr(std::exp(-b * xm) / b);
      const Expr h = f_at - k * Expr(std::exp(b * xm));
      if (is_identically_zero(f - h - k * exp(Expr(b) * X), box)) {
        c.kind = SymmetryKind::TypeC;
        c.beta = b;
        c.h = h;
        c.k = k;
      }
    }
    if (c.kind != SymmetryKind::TypeC) c.kind = SymmetryKind::NoSymmetry;
  }
  c.H = integral(c.h, Var::t, 0.0, T);
  c.K = integral(c.k, Var::t, 0.0, T);
  detail::finish(c, opt);
  return c;
}

/// Outcome of the FP symmetry check for f = h(t) + k(t) exp(beta x).
struct TdCaseCResult {
  enum class Kind { CaseA, CaseB } kind = Kind::CaseA;
  double c2 = 0.0;
  /// -k'/(beta k): the d/dx component of the field d/dt + xi d/dx (CaseB).
  Expr xi;
};

/// The FP equation of f = h + k exp(beta x) gains the field
/// d/dt - (k'/(beta k)) d/dx iff h + k'/(beta k) is a constant c2.
inline TdCaseCResult td_caseC_fp_constraint(const Expr& h, const Expr& k, double beta,
                                            const Interval& tspan = Interval{0.0, 1.0}) {
  if (beta == 0.0) throw ValidationError("beta must be non-zero");
  for (double t : chebyshev_nodes(tspan.lo, tspan.hi, 64)) {
    if (evaluate(k, Bindings(0.0, t)) == 0.0) {
      throw DomainError("k vanishes at t = " + format_number(t));
    }
  }
  const Expr ratio = differentiate(k, Var::t) / (Expr(beta) * k);
  const Expr q = h + ratio;
  const double tm = 0.5 * (tspan.lo + tspan.hi);
  const double c2 = evaluate(q, Bindings(0.0, tm));
  const SampleBox box{Interval{-1.0, 1.0}, tspan, std::nullopt};
  TdCaseCResult r;
  r.xi = -ratio;
  if (is_identically_zero(q - Expr(c2), box)) {
    r.kind = TdCaseCResult::Kind::CaseB;
    r.c2 = c2;
  }
  return r;
}

}  // namespace stochsym

#pragma once

// Point symmetries of unit-noise Fokker-Planck equations. Beyond the trivial
// fields d/dt, u d/du and zeta d/du (zeta any solution), an autonomous
// equation has 4, 2 or 0 further fields, decided by
//   gamma = -(f^2 + f_x)_x / 2:
//   case i   gamma_xx = 0, i.e. f' + f^2 = mu0 + mu1 x + mu2 x^2;
//   case ii  (gamma_x + nu1)(x + nu0) + 3 gamma = 0 for constants nu0, nu1;
//   case iii otherwise.
// Fields are X = tau(t) d/dt + xi(x,t) d/dx + (phi1(x,t) u + phi0(x,t)) d/du.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/fokker_planck.hpp"
#include "stochsym/symmetry_ito.hpp"

namespace stochsym {

/// gamma = -(f^2 + sigma^2 f_x)_x / 2.
inline Expr gamma(const Expr& f, const Expr& sigma = Expr(1.0)) {
  return Expr(-0.5) * differentiate(pow(f, 2.0) + pow(sigma, 2.0) * differentiate(f, Var::x), Var::x);
}

struct VectorField {
  Expr tau{0.0};
  Expr xi{0.0};
  Expr phi1{0.0};
  Expr phi0{0.0};
  std::string label;

  static VectorField Z0() { return {Expr(1.0), Expr(0.0), Expr(0.0), Expr(0.0), "Z0"}; }
  static VectorField Z1() { return {Expr(0.0), Expr(0.0), Expr(1.0), Expr(0.0), "Z1"}; }
  /// zeta d/du for a solution zeta(x, t) of the equation.
  static VectorField Zzeta(const Expr& zeta) { return {Expr(0.0), Expr(0.0), Expr(0.0), zeta, "Zzeta"}; }

  VectorField operator+(const VectorField& o) const {
    return {tau + o.tau, xi + o.xi, phi1 + o.phi1, phi0 + o.phi0, label + "+" + o.label};
  }
  VectorField operator*(double a) const {
    return {Expr(a) * tau, Expr(a) * xi, Expr(a) * phi1, Expr(a) * phi0, label};
  }
};

inline std::string to_string(const VectorField& v) {
  std::string s;
  auto term = [&s](const Expr& c, const char* basis) {
    if (c.is_constant(0.0)) return;
    if (!s.empty()) s += " + ";
    s += "(" + to_string(c) + ")" + basis;
  };
  term(v.tau, "*d_t");
  term(v.xi, "*d_x");
  term(v.phi1, "*u*d_u");
  term(v.phi0, "*d_u");
  return s.empty() ? "0" : s;
}

/// Quadratic appearing in the case i fields (mu2 > 0).
inline Expr caseI_zeta_quadratic(double mu0, double mu1, double mu2) {
  const double s = std::sqrt(mu2);
  return Expr(s) * pow(X, 2.0) + Expr(mu1 / s) * X + Expr(mu0 / (2.0 * s) + mu1 * mu1 / (8.0 * mu2 * s));
}

/// rho = nu0^2 nu1 / 4 - zeta of the case ii fields.
inline double caseII_rho(double nu0, double nu1, double zeta) { return 0.25 * nu0 * nu0 * nu1 - zeta; }

enum class FPCase { CaseI, CaseII, CaseIII };

inline const char* to_string(FPCase c) {
  switch (c) {
    case FPCase::CaseI: return "CaseI";
    case FPCase::CaseII: return "CaseII";
    case FPCase::CaseIII: return "CaseIII";
  }
  return "?";
}

struct CaseIIParams {
  double nu0 = 0.0;
  double nu1 = 0.0;
  double b = 0.0;
  double c = 0.0;
  double zeta = 0.0;  // constant of the drift's Riccati relation
  double fit_residual = 0.0;
};

struct FPClass {
  FPCase fp_case = FPCase::CaseIII;
  Expr gamma;
  std::array<double, 3> mu{};  // CaseI
  CaseIIParams nu;             // CaseII
  std::vector<VectorField> fields;

  int count() const { return static_cast<int>(fields.size()); }
};

/// Grid for determining residuals: cell midpoints of the x window and
/// end-inclusive t in [0, 1].
struct FPGrid {
  Interval x = Interval::real_line();
  Interval t{0.0, 1.0};
  int nx = 11;
  int nt = 11;

  std::vector<Bindings> points() const {
    const Interval xw = x.window();
    std::vector<Bindings> pts;
    for (double xv : midpoints(xw.lo, xw.hi, nx)) {
      for (double tv : linspace(t.lo, t.hi, nt)) pts.emplace_back(xv, tv);
    }
    return pts;
  }
};

struct FPResidual {
  double xi = 0.0;    // xi_x - tau_t / 2
  double phi1x = 0.0; // phi1_x - (tau_t f / 2 - xi_t + tau f_t + xi f_x)
  double phi1t = 0.0; // phi1_t + tau_t f_x - phi1_xx / 2 + f phi1_x + tau f_xt + xi f_xx
  double phi0 = 0.0;  // phi0 must solve the equation

  double max() const { return std::max({xi, phi1x, phi1t, phi0}); }
};

/// Sup-norms of the determining equations of a unit-noise FP equation for
/// the field X, over the grid. Handles f depending on t.
inline FPResidual fp_determining_residuals(const FPEquation& fpe, const VectorField& field,
                                           const FPGrid& grid) {
  if (!fpe.sigma.is_constant(1.0)) throw ValidationError("determining residuals need unit noise");
  if (depends_on(field.tau, Var::x)) throw ValidationError("tau must depend on t only");
  const Expr& f = fpe.f;
  const Expr fx = differentiate(f, Var::x);
  const Expr ft = differentiate(f, Var::t);
  const Expr tau_t = differentiate(field.tau, Var::t);
  const Expr p1x = differentiate(field.phi1, Var::x);

  const Expr e_xi = differentiate(field.xi, Var::x) - Expr(0.5) * tau_t;
  const Expr e_1x = p1x - (Expr(0.5) * tau_t * f - differentiate(field.xi, Var::t) + field.tau * ft + field.xi * fx);
  const Expr e_1t = differentiate(field.phi1, Var::t) + tau_t * fx - Expr(0.5) * differentiate(p1x, Var::x) +
                    f * p1x + field.tau * differentiate(fx, Var::t) + field.xi * differentiate(fx, Var::x);
  const Expr e_0 = fpe.residual(field.phi0);

  const auto pts = grid.points();
  return {sup_norm(e_xi, pts), sup_norm(e_1x, pts), sup_norm(e_1t, pts), sup_norm(e_0, pts)};
}

inline double fp_determining_residual(const FPEquation& fpe, const VectorField& field, const FPGrid& grid) {
  return fp_determining_residuals(fpe, field, grid).max();
}

inline double fp_determining_residual(const FPEquation& fpe, const VectorField& field) {
  return fp_determining_residual(fpe, field, FPGrid{fpe.domain});
}

namespace detail {

// Sample abscissae at fixed fractions of the domain window.
inline std::array<double, 3> fraction_points(const Interval& domain, const std::array<double, 3>& q) {
  const Interval w = domain.window();
  return {w.lo + q[0] * w.width(), w.lo + q[1] * w.width(), w.lo + q[2] * w.width()};
}

inline constexpr std::array<std::array<double, 3>, 5> kResampleFractions{{
    {0.2, 0.5, 0.8}, {0.1, 0.45, 0.9}, {0.3, 0.6, 0.95}, {0.05, 0.35, 0.7}, {0.25, 0.55, 0.85}}};

// Max |p - (mu0 + mu1 x + mu2 x^2)| relative to the local magnitude.
inline bool quadratic_matches(const Expr& p, const std::array<double, 3>& mu, const Interval& domain,
                              double tol) {
  const SampleBox box{domain, std::nullopt, std::nullopt};
  for (const auto& pt : sample_points(box)) {
    const double x = *pt[Var::x];
    ScaledValue v{};
    try {
      v = evaluate_scaled(p, pt);
    } catch (const DomainError&) {
      continue;
    }
    const double q = mu[0] + mu[1] * x + mu[2] * x * x;
    if (std::abs(v.value - q) > tol * (1.0 + v.scale + std::abs(q))) return false;
  }
  return true;
}

}  // namespace detail

/// Riccati coefficients (mu0, mu1, mu2) of f' + f^2 from three samples,
/// validated over the domain. Throws ValidationError if no quadratic fits.
inline std::array<double, 3> riccati_coefficients(const Expr& f, const Interval& domain) {
  const Expr p = differentiate(f, Var::x) + pow(f, 2.0);
  for (const auto& q : detail::kResampleFractions) {
    const auto xs = detail::fraction_points(domain, q);
    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    try {
      for (int i = 0; i < 3; ++i) {
        A.row(i) << 1.0, xs[i], xs[i] * xs[i];
        rhs(i) = evaluate(p, Bindings(xs[i]));
      }
    } catch (const DomainError&) {
      continue;
    }
    const Eigen::Vector3d mu = A.colPivHouseholderQr().solve(rhs);
    std::array<double, 3> m{mu(0), mu(1), mu(2)};
    if (detail::quadratic_matches(p, m, domain, 1e-7)) return m;
    throw ValidationError("f' + f^2 is not a quadratic polynomial on the domain");
  }
  throw IndeterminateError("could not sample f' + f^2 away from singularities");
}

/// Constants (nu0, nu1) with (gamma_x + nu1)(x + nu0) + 3 gamma = 0 on the
/// domain, if they exist. Linear solve in (nu0, nu1, mu = nu0 nu1) from three
/// samples, accepted when mu matches nu0 nu1 and the residual stays below
/// 1e-7 on 64 points.
inline std::optional<std::pair<double, double>> solve_G_constants(const Expr& gamma_expr,
                                                                  const Interval& domain) {
  const Expr gx = differentiate(gamma_expr, Var::x);
  for (const auto& q : detail::kResampleFractions) {
    const auto xs = detail::fraction_points(domain, q);
    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    try {
      for (int i = 0; i < 3; ++i) {
        const double g = evaluate(gamma_expr, Bindings(xs[i]));
        const double d = evaluate(gx, Bindings(xs[i]));
        A.row(i) << d, xs[i], 1.0;
        rhs(i) = -(d * xs[i] + 3.0 * g);
      }
    } catch (const DomainError&) {
      continue;
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto sv = svd.singularValues();
    if (!(sv(2) > 1e-12 * sv(0))) continue;
    const Eigen::Vector3d s = svd.solve(rhs);
    const double nu0 = s(0);
    const double nu1 = s(1);
    const double mu = s(2);
    if (std::abs(mu - nu0 * nu1) >= 1e-7 * (1.0 + std::abs(nu0 * nu1))) return std::nullopt;
    const Expr G = (gx + Expr(nu1)) * (X + Expr(nu0)) + Expr(3.0) * gamma_expr;
    const SampleBox box{domain, std::nullopt, std::nullopt};
    for (const auto& p : sample_points(box)) {
      double v = 0.0;
      try {
        v = evaluate(G, p);
      } catch (const DomainError&) {
        continue;
      }
      if (!(std::abs(v) < 1e-7)) return std::nullopt;
    }
    return std::make_pair(nu0, nu1);
  }
  throw IndeterminateError("sample system for the G constants stayed singular after resampling");
}

/// Fits gamma = c - b/(x + nu0)^3 - nu1 x / 4 (linear least squares at the
/// seed nu0, then Gauss-Newton in all four constants) and recovers the
/// Riccati constant zeta = f' + f^2 + b/(x+nu0)^2 + 2 c x - nu1 x^2 / 4.
inline CaseIIParams fit_case_ii(const Expr& f, const Expr& gamma_expr, const Interval& domain,
                                double nu0) {
  const Interval win = domain.window();
  const auto xs = chebyshev_nodes(win.lo, win.hi, 64);
  std::vector<double> x;
  std::vector<double> g;
  for (double xv : xs) {
    try {
      g.push_back(evaluate(gamma_expr, Bindings(xv)));
      x.push_back(xv);
    } catch (const DomainError&) {
    }
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 8) throw IndeterminateError("too few regular samples to fit gamma");

  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    A.row(i) << 1.0, -1.0 / std::pow(xi + nu0, 3), -0.25 * xi;
    rhs(i) = g[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d lin = A.colPivHouseholderQr().solve(rhs);
  Eigen::Vector4d p(lin(0), lin(1), nu0, lin(2));  // c, b, nu0, nu1

  auto residuals = [&](const Eigen::Vector4d& q) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi = x[static_cast<std::size_t>(i)];
      r(i) = g[static_cast<std::size_t>(i)] - (q(0) - q(1) / std::pow(xi + q(2), 3) - 0.25 * q(3) * xi);
    }
    return r;
  };
  Eigen::VectorXd r = residuals(p);
  for (int it = 0; it < 30; ++it) {
    Eigen::MatrixXd J(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi = x[static_cast<std::size_t>(i)];
      const double s = xi + p(2);
      J.row(i) << -1.0, 1.0 / std::pow(s, 3), -3.0 * p(1) / std::pow(s, 4), 0.25 * xi;
    }
    const Eigen::Vector4d step = J.colPivHouseholderQr().solve(-r);
    const Eigen::Vector4d next = p + step;
    const Eigen::VectorXd rn = residuals(next);
    if (rn.norm() >= r.norm()) break;
    p = next;
    r = rn;
    if (step.norm() < 1e-15 * (1.0 + p.norm())) break;
  }

  CaseIIParams out;
  out.c = p(0);
  out.b = p(1);
  out.nu0 = p(2);
  out.nu1 = p(3);
  out.fit_residual = r.cwiseAbs().maxCoeff();
  if (!(out.fit_residual < 1e-7)) {
    throw IndeterminateError("gamma does not fit c - b/(x+nu0)^3 - nu1 x/4 (residual " +
                             format_number(out.fit_residual) + ")");
  }

  const Expr zeta_expr = differentiate(f, Var::x) + pow(f, 2.0) + Expr(out.b) / pow(X + Expr(out.nu0), 2.0) +
                         Expr(2.0 * out.c) * X - Expr(0.25 * out.nu1) * pow(X, 2.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  for (double xv : x) {
    const double z = evaluate(zeta_expr, Bindings(xv));
    lo = std::min(lo, z);
    hi = std::max(hi, z);
    sum += z;
  }
  out.zeta = sum / static_cast<double>(x.size());
  if (hi - lo > 1e-6 * (1.0 + std::abs(out.zeta))) {
    throw IndeterminateError("Riccati constant zeta is not constant on the domain");
  }
  return out;
}

namespace detail {

// tau-type field of case i from tau(t), a particular chi(t) and its primitive.
inline VectorField case_i_tau_field(const Expr& f, const std::array<double, 3>& mu, const Expr& tau,
                                    const Expr& chi, const Expr& chi_int, std::string label) {
  const Expr tau_t = differentiate(tau, Var::t);
  const Expr tau_tt = differentiate(tau_t, Var::t);
  const Expr g = Expr(-0.5 * mu[1]) * chi_int - Expr(0.5 * mu[0]) * tau - Expr(0.25) * tau_t;
  VectorField v;
  v.tau = tau;
  v.xi = Expr(0.5) * X * tau_t + chi;
  v.phi1 = -(X * differentiate(chi, Var::t)) + chi * f + Expr(0.5) * X * f * tau_t -
           Expr(0.25) * pow(X, 2.0) * tau_tt + g;
  v.label = std::move(label);
  return v;
}

// Field with tau = 0 from a homogeneous chi and its primitive.
inline VectorField case_i_chi_field(const Expr& f, const std::array<double, 3>& mu, const Expr& chi,
                                    const Expr& chi_int, std::string label) {
  VectorField v;
  v.xi = chi;
  v.phi1 = -(X * differentiate(chi, Var::t)) + chi * f - Expr(0.5 * mu[1]) * chi_int;
  v.label = std::move(label);
  return v;
}

inline bool negligible(double v, double ref) { return std::abs(v) <= 1e-10 * (1.0 + ref); }

}  // namespace detail

/// The four non-trivial fields of case i. For mu2 > 0 these are the closed
/// forms with exponentials in sqrt(mu2) t; mu2 = 0 and mu2 < 0 use
/// polynomial and trigonometric solutions of tau''' = 4 mu2 tau' and
/// chi'' - mu2 chi = 3 mu1 tau' / 4.
inline std::vector<VectorField> case_i_vector_fields(double mu0, double mu1, double mu2, const Expr& f,
                                                     const Interval& domain) {
  const Expr p = differentiate(f, Var::x) + pow(f, 2.0);
  if (!detail::quadratic_matches(p, {mu0, mu1, mu2}, domain, 1e-7)) {
    throw ValidationError("f' + f^2 does not equal mu0 + mu1 x + mu2 x^2 on the domain");
  }
  const std::array<double, 3> mu{mu0, mu1, mu2};
  std::vector<VectorField> out;
  if (detail::negligible(mu2, std::abs(mu0) + std::abs(mu1))) {
    const Expr t2 = pow(T, 2.0);
    out.push_back(detail::case_i_tau_field(f, mu, T, Expr(0.375 * mu1) * t2,
                                           Expr(mu1 / 8.0) * pow(T, 3.0), "X1"));
    out.push_back(detail::case_i_tau_field(f, mu, t2, Expr(0.25 * mu1) * pow(T, 3.0),
                                           Expr(mu1 / 16.0) * pow(T, 4.0), "X2"));
    out.push_back(detail::case_i_chi_field(f, mu, Expr(1.0), T, "X3"));
    out.push_back(detail::case_i_chi_field(f, mu, T, Expr(0.5) * t2, "X4"));
    return out;
  }
  if (mu2 > 0) {
    const double s = std::sqrt(mu2);
    const double m = mu1 / (2.0 * mu2);
    const Expr zq = caseI_zeta_quadratic(mu0, mu1, mu2);
    const Expr ep2 = exp(Expr(2.0 * s) * T);
    const Expr em2 = exp(Expr(-2.0 * s) * T);
    const Expr ep = exp(Expr(s) * T);
    const Expr em = exp(Expr(-s) * T);
    const Expr xm = X + Expr(m);
    out.push_back({ep2 / Expr(2.0 * s), Expr(0.5) * xm * ep2,
                   Expr(0.5) * ep2 * (f * xm - zq - Expr(0.5)), Expr(0.0), "X1"});
    out.push_back({-(em2 / Expr(2.0 * s)), Expr(0.5) * xm * em2,
                   Expr(0.5) * em2 * (f * xm + zq - Expr(0.5)), Expr(0.0), "X2"});
    out.push_back({Expr(0.0), ep, ep * (f - Expr(s) * xm), Expr(0.0), "X3"});
    out.push_back({Expr(0.0), em, em * (f + Expr(s) * xm), Expr(0.0), "X4"});
    return out;
  }
  const double w = std::sqrt(-mu2);
  const double a = mu1 / (4.0 * mu2);
  const Expr c2 = cos(Expr(2.0 * w) * T);
  const Expr s2 = sin(Expr(2.0 * w) * T);
  const Expr c1 = cos(Expr(w) * T);
  const Expr s1 = sin(Expr(w) * T);
  out.push_back(detail::case_i_tau_field(f, mu, c2, Expr(a) * differentiate(c2, Var::t), Expr(a) * c2, "X1"));
  out.push_back(detail::case_i_tau_field(f, mu, s2, Expr(a) * differentiate(s2, Var::t), Expr(a) * s2, "X2"));
  out.push_back(detail::case_i_chi_field(f, mu, c1, s1 / Expr(w), "X3"));
  out.push_back(detail::case_i_chi_field(f, mu, s1, -(c1 / Expr(w)), "X4"));
  return out;
}

/// The two non-trivial fields of case ii. For nu1 > 0 the closed forms with
/// rho = nu0^2 nu1 / 4 - zeta; otherwise tau from tau''' = nu1 tau' with
/// polynomial or trigonometric solutions. Requires c = -nu0 nu1 / 4.
inline std::vector<VectorField> case_ii_vector_fields(const CaseIIParams& p, const Expr& f) {
  const double nu0 = p.nu0;
  const double nu1 = p.nu1;
  if (std::abs(p.c + 0.25 * nu0 * nu1) > 1e-7 * (1.0 + std::abs(nu0 * nu1))) {
    throw ValidationError("constraint c = -nu0*nu1/4 violated: c = " + format_number(p.c) +
                          ", -nu0*nu1/4 = " + format_number(-0.25 * nu0 * nu1));
  }
  const Expr xn = X + Expr(nu0);
  std::vector<VectorField> out;
  if (nu1 > 0 && !detail::negligible(nu1, std::abs(nu0))) {
    const double r = std::sqrt(nu1);
    const double rho = caseII_rho(nu0, nu1, p.zeta);
    const Expr ep = exp(Expr(r) * T);
    const Expr em = exp(Expr(-r) * T);
    out.push_back({ep / Expr(r), Expr(0.5) * xn * ep,
                   Expr(0.5) * ep * (f * xn - Expr(0.5 * r) * pow(xn, 2.0) + Expr(rho / r - 0.5)), Expr(0.0),
                   "X1"});
    out.push_back({-(em / Expr(r)), Expr(0.5) * xn * em,
                   Expr(0.5) * em * (f * xn + Expr(0.5 * r) * pow(xn, 2.0) - Expr(rho / r + 0.5)), Expr(0.0),
                   "X2"});
    return out;
  }
  auto field = [&](const Expr& tau, std::string label) {
    const Expr tau_t = differentiate(tau, Var::t);
    const Expr tau_tt = differentiate(tau_t, Var::t);
    const Expr g = Expr(-0.125 * nu0 * nu0 * nu1 - 0.5 * p.zeta) * tau - Expr(0.25) * tau_t;
    VectorField v;
    v.tau = tau;
    v.xi = Expr(0.5) * xn * tau_t;
    v.phi1 = Expr(0.5) * xn * f * tau_t - Expr(0.25) * tau_tt * (pow(X, 2.0) + Expr(2.0 * nu0) * X) + g;
    v.label = std::move(label);
    return v;
  };
  if (nu1 > 0 || detail::negligible(nu1, std::abs(nu0))) {
    out.push_back(field(T, "X1"));
    out.push_back(field(pow(T, 2.0), "X2"));
    return out;
  }
  const double r = std::sqrt(-nu1);
  out.push_back(field(cos(Expr(r) * T), "X1"));
  out.push_back(field(sin(Expr(r) * T), "X2"));
  return out;
}

/// Classifies an autonomous unit-noise FP equation and builds its fields.
inline FPClass classify_fp(const FPEquation& fpe) {
  if (!fpe.sigma.is_constant(1.0)) throw ValidationError("FP classification needs unit noise");
  if (depends_on(fpe.f, Var::t) || depends_on(fpe.f, Var::w)) {
    throw ValidationError("FP classification needs an autonomous drift");
  }
  const SampleBox box{fpe.domain, std::nullopt, std::nullopt};
  FPClass out;
  out.gamma = gamma(fpe.f);
  const Expr gxx = differentiate(out.gamma, Var::x, 2);
  if (is_identically_zero(gxx, box)) {
    out.fp_case = FPCase::CaseI;
    out.mu = riccati_coefficients(fpe.f, fpe.domain);
    out.fields = case_i_vector_fields(out.mu[0], out.mu[1], out.mu[2], fpe.f, fpe.domain);
    return out;
  }
  // gamma_xxx = 0 with gamma_xx != 0 admits only the trivial fields.
  if (is_identically_zero(differentiate(gxx, Var::x), box)) return out;
  const auto nu = solve_G_constants(out.gamma, fpe.domain);
  if (!nu) return out;
  out.fp_case = FPCase::CaseII;
  out.nu = fit_case_ii(fpe.f, out.gamma, fpe.domain, nu->first);
  out.fields = case_ii_vector_fields(out.nu, fpe.f);
  return out;
}

/// Fields beyond zeta d/du for f = h(t) + k(t) exp(beta x): u d/du always,
/// and d/dt - (k'/(beta k)) d/dx when h + k'/(beta k) is constant.
inline std::vector<VectorField> td_caseC_fields(const Expr& h, const Expr& k, double beta,
                                                const Interval& tspan = Interval{0.0, 1.0}) {
  const TdCaseCResult r = td_caseC_fp_constraint(h, k, beta, tspan);
  std::vector<VectorField> out;
  if (r.kind == TdCaseCResult::Kind::CaseB) out.push_back({Expr(1.0), r.xi, Expr(0.0), Expr(0.0), "X1"});
  out.push_back(VectorField::Z1());
  return out;
}

}  // namespace stochsym

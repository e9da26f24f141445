#pragma once

// Drifts with maximal Fokker-Planck symmetry: f' + f^2 = p(x) with
// p = mu0 + mu1 x + mu2 x^2 is linearized by f = u'/u to u'' = p u, a Weber
// equation. For mu2 > 0 the substitution z = (4/mu2)^(1/4) (sqrt(mu2) x +
// mu1 / (2 sqrt(mu2))) gives v'' + (lambda + 1/2 - z^2/4) v = 0, solved by
// parabolic cylinder functions D(lambda, z); integer lambda gives Hermite
// polynomials.

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/fp_symmetry.hpp"

namespace stochsym {

struct WeberProblem {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double z_scale = 0.0;   // z = z_scale x + z_shift
  double z_shift = 0.0;
  double lambda = 0.0;

  double z(double x) const { return z_scale * x + z_shift; }
  Expr z_expr() const { return Expr(z_scale) * X + Expr(z_shift); }
};

inline WeberProblem riccati_to_weber(double mu0, double mu1, double mu2) {
  if (!(mu2 > 0)) throw ValidationError("standard Weber form needs mu2 > 0");
  const double s = std::sqrt(mu2);
  const double c = std::pow(4.0 / mu2, 0.25);
  WeberProblem w{mu0, mu1, mu2, c * s, c * mu1 / (2.0 * s), 0.0};
  w.lambda = mu1 * mu1 / (8.0 * mu2 * s) - mu0 / (2.0 * s) - 0.5;
  return w;
}

/// Physicists' Hermite polynomial H_n(z).
inline double hermite(int n, double z) {
  if (n < 0) throw ValidationError("Hermite degree must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * z;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * z * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// H_n applied to an expression, built by the same recurrence.
inline Expr hermite_expr(int n, const Expr& y) {
  if (n < 0) throw ValidationError("Hermite degree must be non-negative");
  Expr prev(1.0);
  if (n == 0) return prev;
  Expr cur = Expr(2.0) * y;
  for (int k = 1; k < n; ++k) {
    Expr next = Expr(2.0) * y * cur - Expr(2.0 * k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Non-negative integer n with |lambda - n| < tol, if any.
inline std::optional<int> integer_lambda(double lambda, double tol = 1e-9) {
  const double n = std::round(lambda);
  if (n >= 0 && std::abs(lambda - n) < tol) return static_cast<int>(n);
  return std::nullopt;
}

namespace detail {

using State2 = std::array<double, 2>;

inline constexpr double kWeberAnchor = 12.0;

// D(lambda, z) and its derivative from the large-z asymptotic series.
inline State2 parabolic_cylinder_asymptotic(double lambda, double z) {
  double sum = 0.0;
  double dsum = 0.0;
  double coeff = 1.0;
  double prev_mag = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 40; ++k) {
    const double p = lambda - 2.0 * k;
    const double term = coeff * std::pow(z, p);
    if (std::abs(term) > prev_mag) break;
    prev_mag = std::abs(term);
    sum += term;
    dsum += coeff * p * std::pow(z, p - 1.0);
    if (term == 0.0) break;
    coeff *= -(lambda - 2.0 * k) * (lambda - 2.0 * k - 1.0) / (2.0 * (k + 1.0));
  }
  const double g = std::exp(-0.25 * z * z);
  return {g * sum, g * (dsum - 0.5 * z * sum)};
}

}  // namespace detail

/// D(lambda, z) by integrating v'' = (z^2/4 - lambda - 1/2) v inward from the
/// anchor z = 12, where the asymptotic series fixes the normalization.
inline double parabolic_cylinder_D_numeric(double lambda, double z) {
  namespace ode = boost::numeric::odeint;
  if (std::abs(z) > detail::kWeberAnchor) {
    throw DomainError("z = " + format_number(z) + " outside the integration range [-12, 12]");
  }
  detail::State2 v = detail::parabolic_cylinder_asymptotic(lambda, detail::kWeberAnchor);
  if (z == detail::kWeberAnchor) return v[0];
  auto rhs = [lambda](const detail::State2& s, detail::State2& d, double zz) {
    d[0] = s[1];
    d[1] = (0.25 * zz * zz - lambda - 0.5) * s[0];
  };
  auto stepper = ode::make_controlled(1e-300, 1e-14, ode::runge_kutta_dopri5<detail::State2>());
  ode::integrate_adaptive(stepper, rhs, v, detail::kWeberAnchor, z, -1e-3);
  return v[0];
}

/// D(lambda, z): Hermite closed form for non-negative integer lambda,
/// numeric integration otherwise.
inline double parabolic_cylinder_D(double lambda, double z) {
  if (const auto n = integer_lambda(lambda)) {
    return std::pow(2.0, -0.5 * *n) * std::exp(-0.25 * z * z) * hermite(*n, z / std::sqrt(2.0));
  }
  return parabolic_cylinder_D_numeric(lambda, z);
}

/// Tabulated solution of u'' = p(x) u on [a, b]; component 0 is u, 1 is u'.
/// Quintic Hermite interpolation from nodal values of u, u', u'', u'''.
class WeberSolution : public Tabulated {
 public:
  WeberSolution(std::array<double, 3> mu, double a, double b, double u0, double du0, int intervals = 4000)
      : mu_(mu), a_(a), b_(b) {
    namespace ode = boost::numeric::odeint;
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
      throw ValidationError("numeric Weber solution needs a finite interval");
    }
    xs_ = linspace(a, b, intervals + 1);
    u_.resize(xs_.size());
    du_.resize(xs_.size());
    detail::State2 s{u0, du0};
    auto rhs = [this](const detail::State2& v, detail::State2& d, double x) {
      d[0] = v[1];
      d[1] = p(x) * v[0];
    };
    auto stepper = ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_dopri5<detail::State2>());
    std::size_t i = 0;
    ode::integrate_times(stepper, rhs, s, xs_.begin(), xs_.end(), (b - a) / intervals,
                         [this, &i](const detail::State2& v, double) {
                           u_[i] = v[0];
                           du_[i] = v[1];
                           ++i;
                         });
  }

  double p(double x) const { return mu_[0] + mu_[1] * x + mu_[2] * x * x; }
  double dp(double x) const { return mu_[1] + 2.0 * mu_[2] * x; }

  double value(int order, double x) const override {
    const double span = b_ - a_;
    if (x < a_ - 1e-12 * span || x > b_ + 1e-12 * span) {
      throw DomainError("x = " + format_number(x) + " outside the tabulated interval");
    }
    const double h = xs_[1] - xs_[0];
    auto i = static_cast<std::size_t>(std::floor((x - a_) / h));
    i = std::min(i, xs_.size() - 2);
    const double s = (x - xs_[i]) / h;
    const double x0 = xs_[i];
    const double x1 = xs_[i + 1];
    // Nodal data of the interpolated component and its two derivatives.
    auto node = [&](std::size_t j, double xj) -> std::array<double, 3> {
      const double u = u_[j];
      const double du = du_[j];
      if (order == 0) return {u, du, p(xj) * u};
      return {du, p(xj) * u, dp(xj) * u + p(xj) * du};
    };
    const auto l = node(i, x0);
    const auto r = node(i + 1, x1);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double s4 = s3 * s;
    const double s5 = s4 * s;
    const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    const double H3 = 10 * s3 - 15 * s4 + 6 * s5;
    const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double H5 = 0.5 * s3 - s4 + 0.5 * s5;
    return l[0] * H0 + h * l[1] * H1 + h * h * l[2] * H2 + r[0] * H3 + h * r[1] * H4 + h * h * r[2] * H5;
  }

  Expr derivative(int order, const Expr& arg) const override {
    auto self = std::static_pointer_cast<const Tabulated>(shared_from_this());
    if (order == 0) return tabulated(self, 1, arg);
    const Expr p_arg = Expr(mu_[0]) + Expr(mu_[1]) * arg + Expr(mu_[2]) * pow(arg, 2.0);
    return p_arg * tabulated(self, 0, arg);
  }

  std::string label() const override { return "u"; }

  /// First sign change of u on the grid, located by bisection.
  std::optional<double> first_zero() const {
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (u_[i] == 0.0) return xs_[i];
      if (i > 0 && (u_[i] > 0) != (u_[i - 1] > 0)) {
        return bisect([this](double x) { return value(0, x); }, xs_[i - 1], xs_[i]);
      }
    }
    return std::nullopt;
  }

 private:
  std::array<double, 3> mu_;
  double a_;
  double b_;
  std::vector<double> xs_;
  std::vector<double> u_;
  std::vector<double> du_;
};

struct DriftBranch {
  enum class Kind { Auto, Hermite, Numeric } kind = Kind::Auto;
  /// f at the left end of the domain (numeric branch: u = 1, u' = f0 there).
  double f0 = 0.0;
};

struct GeneratedDrift {
  Expr f;
  Expr u;                       // a solution of u'' = p u with f = u'/u
  bool hermite_branch = false;
  std::optional<int> n;         // Hermite degree
  std::optional<WeberProblem> problem;
  double gamma_xx_residual = 0.0;  // max |gamma_xx| / (1 + term scale) on domain samples
  double riccati_residual = 0.0;   // same measure for f' + f^2 - p
};

/// Builds f = u'/u for a solution u of u'' = p u that does not vanish on
/// the domain, then checks that f has gamma_xx = 0 there.
inline GeneratedDrift generate_max_symmetry_drift(double mu0, double mu1, double mu2, const DriftBranch& branch,
                                                  const Interval& domain) {
  GeneratedDrift out;
  std::optional<int> n;
  std::optional<WeberProblem> wp;
  if (mu2 > 0) {
    wp = riccati_to_weber(mu0, mu1, mu2);
    n = integer_lambda(wp->lambda);
  }
  const bool use_hermite = branch.kind == DriftBranch::Kind::Hermite ||
                           (branch.kind == DriftBranch::Kind::Auto && n.has_value());
  const Interval win = domain.window();

  if (use_hermite) {
    if (!n) throw ValidationError("Hermite branch needs mu2 > 0 and a non-negative integer lambda");
    const Expr z = wp->z_expr();
    const Expr y = z / Expr(std::sqrt(2.0));
    const Expr Hn = hermite_expr(*n, y);
    out.u = exp(Expr(-0.25) * pow(z, 2.0)) * Hn;
    Expr ratio(0.0);
    if (*n > 0) ratio = Expr(std::sqrt(2.0) * *n) * hermite_expr(*n - 1, y) / Hn;
    out.f = Expr(wp->z_scale) * (ratio - Expr(0.5) * z);
    out.hermite_branch = true;
    // Zeros of H_n inside the domain are poles of f.
    const auto xs = linspace(win.lo, win.hi, 4001);
    auto hn_at = [&](double x) { return hermite(*n, wp->z(x) / std::sqrt(2.0)); };
    // Roots within roundoff of an endpoint sit on the boundary.
    auto interior = [&](double x) {
      const double eps = 1e-9;
      return x > domain.lo + eps * (1 + std::abs(domain.lo)) && x < domain.hi - eps * (1 + std::abs(domain.hi));
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (interior(xs[i]) && hn_at(xs[i]) == 0.0) {
        throw DomainError("u vanishes at x = " + format_number(xs[i]) + "; f has a pole there");
      }
      if (i > 0 && (hn_at(xs[i]) > 0) != (hn_at(xs[i - 1]) > 0)) {
        const double root = bisect(hn_at, xs[i - 1], xs[i]);
        if (interior(root)) {
          throw DomainError("u vanishes at x = " + format_number(root) + "; f has a pole there");
        }
      }
    }
  } else {
    if (!domain.finite()) throw ValidationError("numeric branch needs a finite domain");
    auto table = std::make_shared<const WeberSolution>(std::array<double, 3>{mu0, mu1, mu2}, domain.lo,
                                                      domain.hi, 1.0, branch.f0);
    if (const auto zero = table->first_zero()) {
      throw DomainError("u vanishes at x = " + format_number(*zero) + "; f has a pole there");
    }
    out.u = tabulated(table, 0, X);
    out.f = tabulated(table, 1, X) / out.u;
  }
  out.n = n;
  out.problem = wp;

  const Expr gxx = differentiate(gamma(out.f), Var::x, 2);
  const Expr ric = differentiate(out.f, Var::x) + pow(out.f, 2.0) -
                   (Expr(mu0) + Expr(mu1) * X + Expr(mu2) * pow(X, 2.0));
  const auto pts = sample_points(SampleBox{domain, std::nullopt, std::nullopt});
  out.gamma_xx_residual = scaled_sup_norm(gxx, pts);
  out.riccati_residual = scaled_sup_norm(ric, pts);
  if (!is_identically_zero(gxx, domain, 1e-7)) {
    throw NumericalError("generated drift fails the gamma_xx = 0 check (max " +
                         format_number(out.gamma_xx_residual) + ")");
  }
  return out;
}

}  // namespace stochsym

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stochsym/kozlov.hpp"
#include "stochsym/symmetry_ito.hpp"

using namespace stochsym;

namespace {

double at(const Expr& e, double x, double t = 0.0, double w = 0.0) { return evaluate(e, Bindings(x, t, w)); }

// Mean |x_kozlov(T) - x_em(T)| over paths, for each dt
// obtained by coarsening a fine path.
std::vector<double> strong_errors(const ItoEquation& eq, const KozlovMap& map, const GeneralizedItoEquation& g,
                                  double x0, double fine_dt, const std::vector<std::size_t>& factors, int paths) {
  std::vector<double> err(factors.size(), 0.0);
  const double y0 = map.to_y(x0, 0.0, 0.0);
  for (int p = 0; p < paths; ++p) {
    const WienerPath fine = WienerPath::generate(2024, fine_dt, 1.0, static_cast<std::uint64_t>(p));
    for (std::size_t j = 0; j < factors.size(); ++j) {
      const WienerPath w = fine.coarsen(factors[j]);
      const double xk = map_back(map, w, integrate_path(g, w, y0)).back();
      const double xe = euler_maruyama_path(eq, w, x0).back();
      err[j] += std::abs(xk - xe) / paths;
    }
  }
  return err;
}

}  // namespace

TEST(KozlovMap, TimeExponential) {
  const double k0 = 0.7;
  const auto m = kozlov_map(exp(Expr(k0) * T), Interval::real_line());
  for (double x : {-1.0, 0.5}) {
    for (double t : {0.0, 0.8}) {
      EXPECT_NEAR(m.to_y(x, t, 0.3), std::exp(-k0 * t) * x, 1e-14);
      EXPECT_NEAR(m.to_x(m.to_y(x, t, 0.3), t, 0.3), x, 1e-14);
    }
  }
}

TEST(KozlovMap, IdentityForConstantGenerator) {
  const auto m = kozlov_map(Expr(1.0), Interval::real_line());
  EXPECT_EQ(m.to_y(1.25, 0.3, -0.2), 1.25);
}

TEST(KozlovMap, RandomExponential) {
  const double beta = -1.3;
  const Expr phi = exp(Expr(beta) * (X - W));
  const auto m = kozlov_map(phi, Interval::real_line());
  for (double x : {-1.0, 0.2, 1.4}) {
    for (double w : {-0.5, 0.9}) {
      EXPECT_NEAR(m.to_y(x, 0.2, w), -std::exp(-beta * (x - w)) / beta, 1e-12);
      EXPECT_NEAR(m.to_x(m.to_y(x, 0.2, w), 0.2, w), x, 1e-12);
    }
  }
  // dy/dx = 1/phi.
  const Expr check = differentiate(m.y, Var::x) * phi - Expr(1.0);
  EXPECT_TRUE(is_identically_zero(check, SampleBox{{-2, 2}, Interval{0, 1}, Interval{-2, 2}}));
}

TEST(KozlovMap, QuadratureFallback) {
  const Expr phi = Expr(1.0) + pow(X, 2.0);
  const auto m = kozlov_map(phi, Interval{-2, 2});
  EXPECT_FALSE(m.closed_form);
  for (double x : {-1.5, 0.3, 1.7}) {
    EXPECT_NEAR(m.to_y(x, 0, 0), std::atan(x), 1e-10);
    EXPECT_NEAR(m.to_x(m.to_y(x, 0, 0), 0, 0), x, 1e-10);
  }
}

TEST(KozlovMap, VanishingGeneratorIsRejected) { EXPECT_THROW(kozlov_map(X, Interval{-1, 1}), DomainError); }

TEST(TransformEquation, TypeBGivesDriftFreeProperEquation) {
  const double k0 = 0.9;
  const auto eq = ItoEquation::make(Expr(k0) * X, Expr(1.0));
  const auto g = transform_equation(eq, kozlov_map(exp(Expr(k0) * T), eq.domain()));
  EXPECT_TRUE(g.proper);
  for (double t : {0.0, 0.5, 1.0}) {
    EXPECT_NEAR(at(g.F, 0, t, 0.4), 0.0, 1e-14);
    EXPECT_NEAR(at(g.S, 0, t, 0.4), std::exp(-k0 * t), 1e-14);
  }
}

TEST(TransformEquation, TypeAIsTranslation) {
  const auto eq = ItoEquation::make(Expr(2.0), Expr(1.0));
  const auto g = transform_equation(eq, kozlov_map(Expr(1.0), eq.domain()));
  EXPECT_TRUE(g.proper);
  EXPECT_NEAR(at(g.F, 0, 0.3, 0.1), 2.0, 1e-14);
  EXPECT_NEAR(at(g.S, 0, 0.3, 0.1), 1.0, 1e-14);
}

TEST(TransformEquation, TypeCGivesGeneralizedEquation) {
  const double k0 = 3.0, beta = 0.5;
  const auto eq = ItoEquation::make(Expr(k0) * exp(Expr(beta) * X), Expr(1.0));
  const auto g = transform_equation(eq, kozlov_map(exp(Expr(beta) * (X - W)), eq.domain()));
  EXPECT_FALSE(g.proper);
  for (double w : {-1.0, 0.0, 1.2}) {
    EXPECT_NEAR(at(g.F, 0, 0.5, w), k0 * std::exp(beta * w), 1e-11);
    EXPECT_NEAR(at(g.S, 0, 0.5, w), 0.0, 1e-12);
  }
}

TEST(TransformEquation, NonSymmetryIsRejected) {
  const auto eq = ItoEquation::make(parse("x^2"), Expr(1.0));
  EXPECT_THROW(transform_equation(eq, kozlov_map(Expr(1.0), eq.domain())), ValidationError);
}

TEST(TransformEquation, DeterministicSymmetriesGiveProperEquations) {
  for (const char* f : {"1.5", "2 - x", "t*x", "t + x*exp(t)"}) {
    const auto eq = ItoEquation::make(parse(f), Expr(1.0));
    const auto c = classify_time_dependent(eq.f(), eq.domain());
    ASSERT_FALSE(c.random) << f;
    const auto g = transform_equation(eq, kozlov_map(c.generator, eq.domain()));
    EXPECT_LT(g.w_dependence, 1e-8) << f;
  }
}

TEST(IntegratePath, AdditiveCaseIsExact) {
  const auto eq = ItoEquation::make(Expr(1.5), Expr(1.0));
  const auto g = transform_equation(eq, kozlov_map(Expr(1.0), eq.domain()));
  const WienerPath w = WienerPath::generate(3, 1e-3, 1.0);
  const auto y = integrate_path(g, w, 0.25);
  EXPECT_NEAR(y.back(), 0.25 + 1.5 + w.values.back(), 1e-12);
}

TEST(IntegratePath, Deterministic) {
  const auto eq = ItoEquation::make(parse("2 + 5*exp(-x)"), Expr(1.0));
  const auto c = classify_autonomous(eq.f(), eq.domain());
  const auto g = transform_equation(eq, kozlov_map(c.generator, eq.domain()));
  const auto a = integrate_path(g, WienerPath::generate(77, 1e-3, 1.0, 5), 0.1);
  const auto b = integrate_path(g, WienerPath::generate(77, 1e-3, 1.0, 5), 0.1);
  EXPECT_EQ(a, b);
}

// OU through the Kozlov variable: x(T) = e^{k0 T}(x0 + sum e^{-k0 t_i} dw_i).
// The law of x(T) matches the exact OU transition.
TEST(IntegratePath, OrnsteinUhlenbeckMatchesExactLaw) {
  const double k0 = -1.0, x0 = 1.0;
  const auto eq = ItoEquation::make(Expr(k0) * X, Expr(1.0));
  const auto map = kozlov_map(exp(Expr(k0) * T), eq.domain());
  const auto g = transform_equation(eq, map);
  const int n = 20000;
  double s = 0, s2 = 0;
  for (int p = 0; p < n; ++p) {
    const WienerPath w = WienerPath::generate(9, 1e-2, 1.0, static_cast<std::uint64_t>(p));
    const double x = map_back(map, w, integrate_path(g, w, map.to_y(x0, 0, 0))).back();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  const auto law = oracle::linear_sde_law(0.0, k0, x0, 1.0);
  EXPECT_NEAR(mean, law.mean, 4 * std::sqrt(law.variance / n));
  EXPECT_NEAR(var, law.variance, 4 * law.variance * std::sqrt(2.0 / n) + 2e-3);
}

TEST(RoundTrip, AdditiveNoiseStrongOrderNearOne) {
  const double k0 = -1.0;
  const auto eq = ItoEquation::make(Expr(1.0) + Expr(k0) * X, Expr(1.0));
  const auto c = classify_autonomous(eq.f(), eq.domain());
  const auto map = kozlov_map(c.generator, eq.domain());
  const auto g = transform_equation(eq, map);
  const std::vector<std::size_t> factors{8, 4, 2, 1};
  const auto err = strong_errors(eq, map, g, 0.5, 1.25e-3, factors, 200);
  const std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  EXPECT_GE(oracle::loglog_slope(dts, err), 0.9);
}

TEST(RoundTrip, RandomSymmetryStrongOrderAtLeastHalf) {
  const auto eq = ItoEquation::make(parse("5*exp(-x)"), Expr(1.0));
  const auto c = classify_autonomous(eq.f(), eq.domain());
  ASSERT_EQ(c.kind, SymmetryKind::TypeC);
  const auto map = kozlov_map(c.generator, eq.domain());
  const auto g = transform_equation(eq, map);
  const std::vector<std::size_t> factors{8, 4, 2, 1};
  const auto err = strong_errors(eq, map, g, 1.0, 1.25e-3, factors, 200);
  const std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  EXPECT_GE(oracle::loglog_slope(dts, err), 0.5);
}

TEST(WienerPath, CoarseningKeepsValues) {
  const WienerPath w = WienerPath::generate(1, 1e-3, 1.0);
  const WienerPath c = w.coarsen(10);
  EXPECT_EQ(c.steps(), 100u);
  EXPECT_EQ(c.values.back(), w.values.back());
  EXPECT_THROW(w.coarsen(7), ValidationError);
}

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stochsym/ito.hpp"
#include "stochsym/kozlov.hpp"
#include "stochsym/symmetry_ito.hpp"

using namespace stochsym;

namespace {

double at(const Expr& e, double x, double t = 0.0, double w = 0.0) { return evaluate(e, Bindings(x, t, w)); }

}  // namespace

TEST(ItoEquation, RejectsVanishingNoise) {
  EXPECT_THROW(ItoEquation::make(parse("0"), parse("x")), ValidationError);
  EXPECT_NO_THROW(ItoEquation::make(parse("0"), parse("x"), Interval{0.0, 5.0}));
}

TEST(ItoEquation, RejectsWienerDependence) { EXPECT_THROW(ItoEquation::make(parse("w"), parse("1")), ValidationError); }

TEST(ItoEquation, AutonomousFlag) {
  EXPECT_TRUE(ItoEquation::make(parse("-x"), parse("2")).autonomous());
  EXPECT_FALSE(ItoEquation::make(parse("t*x"), parse("1")).autonomous());
  EXPECT_FALSE(ItoEquation::make(parse("x"), parse("1 + t")).autonomous());
}

TEST(NormalizeNoise, ConstantSigmaOrnsteinUhlenbeck) {
  const auto eq = ItoEquation::make(parse("-x"), parse("2"));
  const NormalizedEquation n = normalize_noise(eq);
  EXPECT_TRUE(n.equation.unit_noise());
  for (double xi : {-1.5, 0.0, 0.8}) EXPECT_NEAR(at(n.equation.f(), xi), -xi, 1e-14);
  for (double x : {-2.0, 1.0, 3.0}) {
    EXPECT_NEAR(n.transform.to_xi(x) - n.transform.to_xi(0.0), x / 2.0, 1e-14);
    EXPECT_NEAR(n.transform.to_x(n.transform.to_xi(x)), x, 1e-12);
  }
}

TEST(NormalizeNoise, UnitNoiseIsIdentity) {
  const auto eq = ItoEquation::make(parse("2 + 5*exp(-x)"), parse("1"));
  const NormalizedEquation n = normalize_noise(eq);
  EXPECT_TRUE(structurally_equal(n.equation.f(), eq.f()));
  EXPECT_NEAR(n.transform.to_xi(0.37), 0.37, 0.0);
}

TEST(NormalizeNoise, GeometricNoiseLogTransform) {
  const auto eq = ItoEquation::make(parse("0"), parse("x"), Interval{0.0, std::numeric_limits<double>::infinity()});
  const NormalizedEquation n = normalize_noise(eq);
  const double ref = n.transform.x_ref;
  for (double x : {0.5, 1.0, 2.5, 3.9}) {
    EXPECT_NEAR(n.transform.to_xi(x), std::log(x / ref), 1e-10);
    EXPECT_NEAR(n.transform.to_x(n.transform.to_xi(x)), x, 1e-10);
  }
  for (double xi : {-1.0, 0.0, 0.5}) EXPECT_NEAR(at(n.equation.f(), xi), -0.5, 1e-9);
}

TEST(NormalizeNoise, ForwardIsMonotone) {
  const auto eq = ItoEquation::make(parse("x"), parse("1 + x^2"));
  const NormalizedEquation n = normalize_noise(eq);
  double prev = -std::numeric_limits<double>::infinity();
  for (double x = -1.9; x < 1.9; x += 0.1) {
    const double xi = n.transform.to_xi(x);
    EXPECT_GT(xi, prev);
    EXPECT_NEAR(n.transform.to_x(xi), x, 1e-10);
    prev = xi;
  }
}

// Geometric Brownian motion through the log transform: the normalized
// equation predicts E[log x(T)] = log x0 - T/2; checked against direct
// Euler-Maruyama on the original equation.
TEST(NormalizeNoise, ItoFormulaOnSimulatedPaths) {
  const auto eq = ItoEquation::make(parse("0"), parse("x"), Interval{0.0, std::numeric_limits<double>::infinity()});
  const NormalizedEquation n = normalize_noise(eq);
  const double phi = at(n.equation.f(), 0.0);
  const double T = 1.0, x0 = 1.0;
  double sum = 0.0;
  const int paths = 4000;
  for (int p = 0; p < paths; ++p) {
    const WienerPath w = WienerPath::generate(11, 1e-3, T, static_cast<std::uint64_t>(p));
    sum += std::log(euler_maruyama_path(eq, w, x0).back());
  }
  const double mean = sum / paths;
  const double se = std::sqrt(T / paths);
  EXPECT_NEAR(mean, std::log(x0) + phi * T, 4 * se + 2e-3);
}

TEST(ItoLaplacian, Examples) {
  EXPECT_TRUE(is_identically_zero(ito_laplacian(parse("exp(3*t)"), Expr(1.0)),
                                  SampleBox{{-2, 2}, Interval{0, 1}, Interval{-2, 2}}));
  EXPECT_TRUE(is_identically_zero(ito_laplacian(parse("exp(0.7*(x - w))"), Expr(1.0)),
                                  SampleBox{{-2, 2}, Interval{0, 1}, Interval{-2, 2}}));
  const Expr d = ito_laplacian(parse("x*w"), Expr(1.0));
  EXPECT_NEAR(at(d, 0.3, 0.1, -0.4), 2.0, 1e-14);
}

TEST(ItoLaplacian, IsLinear) {
  const Expr p1 = parse("x^2*w + t");
  const Expr p2 = parse("exp(x - 2*w)*sin(t)");
  const Expr sigma = parse("1 + x^2");
  const double a = 1.7, b = -0.4;
  const Expr lhs = ito_laplacian(Expr(a) * p1 + Expr(b) * p2, sigma);
  const Expr rhs = Expr(a) * ito_laplacian(p1, sigma) + Expr(b) * ito_laplacian(p2, sigma);
  for (const auto& pt : sample_points(SampleBox{{-1, 1}, Interval{0, 1}, Interval{-1, 1}})) {
    EXPECT_NEAR(evaluate(lhs, pt), evaluate(rhs, pt), 1e-10 * (1.0 + std::abs(evaluate(rhs, pt))));
  }
}

TEST(SymmetryResiduals, TypeBGenerator) {
  const double k0 = 0.8;
  const auto eq = ItoEquation::make(Expr(k0) * X, Expr(1.0));
  const auto r = symmetry_residuals(eq, exp(Expr(k0) * T));
  EXPECT_LT(r.r1, 1e-14);
  EXPECT_LT(r.r2, 1e-14);
}

TEST(SymmetryResiduals, TypeCGenerator) {
  const double h0 = 2.0, k0 = 5.0, beta = -1.0;
  const auto eq = ItoEquation::make(Expr(h0) + Expr(k0) * exp(Expr(beta) * X), Expr(1.0));
  const Expr phi = exp(Expr(beta) * (X - W - Expr(h0) * T));
  const auto r = symmetry_residuals(eq, phi);
  EXPECT_TRUE(r.accepted());
  // Finite-difference oracle agrees the generator solves the system.
  const auto fo = [&](double x) { return at(eq.f(), x); };
  const auto po = [&](double x, double t, double w) { return at(phi, x, t, w); };
  const auto fd = oracle::ito_residual_fd(fo, po, 0.3, 0.4, -0.2);
  EXPECT_LT(std::abs(fd.r1), 1e-5);
  EXPECT_LT(std::abs(fd.r2), 1e-5);
}

TEST(SymmetryResiduals, QuadraticDriftConstantGenerator) {
  const auto eq = ItoEquation::make(parse("x^2"), Expr(1.0));
  ResidualGrid g{Interval{-1, 1}};
  const auto r = symmetry_residuals(eq, Expr(1.0), g);
  double expected = 0.0;
  for (const auto& p : g.points()) expected = std::max(expected, std::abs(2.0 * *p[Var::x]));
  EXPECT_NEAR(r.r1, expected, 1e-14);
  EXPECT_GT(r.r1, 0.5);
  EXPECT_EQ(r.r2, 0.0);
}

// The sigma = 2 OU example classifies after normalization exactly as the
// hand-normalized drift -xi does.
TEST(NormalizeNoise, ClassificationCommutesWithTransform) {
  const auto eq = ItoEquation::make(parse("-x"), parse("2"));
  const auto n = normalize_noise(eq);
  const auto via = classify_autonomous(n.equation.f(), n.equation.domain());
  const auto direct = classify_autonomous(parse("-x"), Interval::real_line());
  EXPECT_EQ(via.kind, SymmetryKind::TypeB);
  EXPECT_EQ(direct.kind, SymmetryKind::TypeB);
  EXPECT_NEAR(via.k0(), direct.k0(), 1e-12);
  EXPECT_NEAR(via.h0(), direct.h0(), 1e-12);
  EXPECT_TRUE(symmetry_residuals(n.equation, via.generator).accepted());
}

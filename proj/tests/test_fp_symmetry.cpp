#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stochsym/fp_symmetry.hpp"
#include "stochsym/symmetry_ito.hpp"
#include "stochsym/weber.hpp"

using namespace stochsym;

namespace {

const double kSqrt3 = std::sqrt(3.0);

FPEquation fp(const char* f, Interval dom = Interval::real_line()) {
  return build_fp(ItoEquation::make(parse(f), Expr(1.0), dom));
}

std::vector<Bindings> probe_points(const Interval& x) {
  const Interval w = x.window();
  std::vector<Bindings> pts;
  for (double xv : chebyshev_nodes(w.lo, w.hi, 5)) {
    for (double t : {0.1, 0.45, 0.8}) pts.emplace_back(xv, t);
  }
  return pts;
}

double commutator(const FPEquation& e, const VectorField& v) {
  return oracle::fp_commutator_defect(e.f, v.tau, v.xi, v.phi1, probe_points(e.domain));
}

void expect_same(const Expr& a, const Expr& b, const Interval& x) {
  for (const auto& p : sample_points(SampleBox{x, std::nullopt, std::nullopt})) {
    const double va = evaluate(a, p);
    EXPECT_NEAR(va, evaluate(b, p), 1e-10 * (1.0 + std::abs(va)));
  }
}

}  // namespace

TEST(Gamma, AffineDrift) {
  const double h0 = 0.6, k0 = -1.7;
  expect_same(gamma(Expr(h0) + Expr(k0) * X), Expr(-k0) * (Expr(h0) + Expr(k0) * X), {-3, 3});
}

TEST(Gamma, ZeroDrift) { expect_same(gamma(Expr(0.0)), Expr(0.0), {-3, 3}); }

TEST(Gamma, ExponentialDrift) {
  const double h0 = 2.0, k0 = 5.0, b = -1.0;
  const Expr e = exp(Expr(b) * X);
  const Expr printed = Expr(-0.5 * b * k0) * e * (Expr(b + 2 * h0) + Expr(2 * k0) * e);
  expect_same(gamma(Expr(h0) + Expr(k0) * e), printed, {-2, 2});
}

TEST(Determining, HeatGalileanField) {
  const VectorField gal{Expr(0.0), T, -X, Expr(0.0), "G"};
  EXPECT_LT(fp_determining_residual(fp("0"), gal), 1e-12);
  EXPECT_LT(commutator(fp("0"), gal), 1e-12);
}

TEST(Determining, NonSymmetryIsOrderOne) {
  const VectorField v{Expr(0.0), T, Expr(0.0), Expr(0.0), "t d_x"};
  EXPECT_GT(fp_determining_residual(fp("1 + exp(x)", {-1, 1}), v), 0.1);
  EXPECT_GT(commutator(fp("1 + exp(x)", {-1, 1}), v), 0.1);
}

TEST(Determining, LinearHomogeneityAlwaysPasses) {
  for (const char* f : {"0", "x^2", "1 + exp(x)", "sin(x)*t"}) {
    EXPECT_EQ(fp_determining_residual(fp(f, {-1, 1}), VectorField::Z1()), 0.0) << f;
  }
}

TEST(Determining, SuperpositionNeedsASolution) {
  const Expr heat_kernel = exp(-pow(X, 2.0) / (Expr(2.0) * (T + Expr(1.0)))) / sqrt(T + Expr(1.0));
  EXPECT_LT(fp_determining_residual(fp("0"), VectorField::Zzeta(heat_kernel)), 1e-12);
  EXPECT_GT(fp_determining_residual(fp("0"), VectorField::Zzeta(pow(X, 2.0))), 0.5);
}

TEST(SolveG, CaseIIDrift) {
  const auto nu = solve_G_constants(gamma(parse("x + 2/x")), Interval{0.2, 6});
  ASSERT_TRUE(nu.has_value());
  EXPECT_NEAR(nu->first, 0.0, 1e-6);
  EXPECT_NEAR(nu->second, 4.0, 1e-6);
}

TEST(SolveG, InverseDrift) {
  const auto nu = solve_G_constants(gamma(parse("2/x")), Interval{0.2, 6});
  ASSERT_TRUE(nu.has_value());
  EXPECT_NEAR(nu->first, 0.0, 1e-6);
  EXPECT_NEAR(nu->second, 0.0, 1e-6);
}

TEST(SolveG, ExponentialDriftHasNoSolution) {
  EXPECT_FALSE(solve_G_constants(gamma(parse("1 + exp(x)")), Interval{-2, 2}).has_value());
}

TEST(ClassifyFP, HeatIsCaseI) {
  const auto c = classify_fp(fp("0"));
  ASSERT_EQ(c.fp_case, FPCase::CaseI);
  for (double m : c.mu) EXPECT_NEAR(m, 0.0, 1e-12);
  ASSERT_EQ(c.count(), 4);
  bool scaling = false, galilean = false;
  for (const auto& v : c.fields) {
    EXPECT_LT(fp_determining_residual(fp("0"), v), 1e-10) << v.label;
    EXPECT_LT(commutator(fp("0"), v), 1e-10) << v.label;
    if (structurally_equal(v.tau, T)) scaling = true;
    if (structurally_equal(v.tau, pow(T, 2.0))) galilean = true;
  }
  EXPECT_TRUE(scaling);
  EXPECT_TRUE(galilean);
}

TEST(ClassifyFP, InversePlusLinearIsCaseII) {
  const auto e = fp("x + 2/x", {0.2, 6});
  const auto c = classify_fp(e);
  ASSERT_EQ(c.fp_case, FPCase::CaseII);
  EXPECT_NEAR(c.nu.nu0, 0.0, 1e-6);
  EXPECT_NEAR(c.nu.nu1, 4.0, 1e-6);
  EXPECT_NEAR(c.nu.b, -2.0, 1e-6);
  EXPECT_NEAR(c.nu.c, 0.0, 1e-6);
  EXPECT_NEAR(c.nu.zeta, 5.0, 1e-6);
  ASSERT_EQ(c.count(), 2);
  for (const auto& v : c.fields) {
    EXPECT_LT(fp_determining_residual(e, v), 1e-8) << v.label;
    EXPECT_LT(commutator(e, v), 1e-8) << v.label;
  }
}

TEST(ClassifyFP, ExponentialIsCaseIII) {
  const auto c = classify_fp(fp("1 + exp(x)", {-8, 2}));
  EXPECT_EQ(c.fp_case, FPCase::CaseIII);
  EXPECT_EQ(c.count(), 0);
}

TEST(ClassifyFP, ItoTypesMapToFPCases) {
  for (const char* f : {"1 + 3*x", "-x", "2 - 0.5*x", "4"}) {
    const auto cls = classify_autonomous(parse(f), Interval{-2, 2});
    ASSERT_TRUE(cls.kind == SymmetryKind::TypeA || cls.kind == SymmetryKind::TypeB);
    EXPECT_EQ(classify_fp(fp(f, {-2, 2})).fp_case, FPCase::CaseI) << f;
  }
  for (const char* f : {"2 + 5*exp(-x)", "exp(x)", "-1 + 0.3*exp(2*x)"}) {
    ASSERT_EQ(classify_autonomous(parse(f), Interval{-2, 2}).kind, SymmetryKind::TypeC);
    EXPECT_EQ(classify_fp(fp(f, {-2, 2})).fp_case, FPCase::CaseIII) << f;
  }
}

TEST(CaseIFields, WeberExampleX3) {
  const Expr f = parse("1/(x + sqrt(3)) - (x + sqrt(3))");
  const Interval dom{-1.5, 3};
  const auto fields = case_i_vector_fields(0.0, 2 * kSqrt3, 1.0, f, dom);
  ASSERT_EQ(fields.size(), 4u);
  const auto& x3 = fields[2];
  const SampleBox box{dom, Interval{0, 1}, std::nullopt};
  EXPECT_TRUE(is_identically_zero(x3.tau, box));
  EXPECT_TRUE(is_identically_zero(x3.xi - exp(T), box));
  EXPECT_TRUE(is_identically_zero(x3.phi1 - exp(T) * (f - (Expr(kSqrt3) + X)), box, 1e-10));
  for (const auto& v : fields) {
    EXPECT_LT(fp_determining_residual(fp("1/(x + sqrt(3)) - (x + sqrt(3))", dom), v), 1e-8) << v.label;
  }
}

TEST(CaseIFields, TauOfX1ForPositiveMu2) {
  for (double mu2 : {0.25, 1.0, 4.0}) {
    const double s = std::sqrt(mu2);
    // f = s x solves f' + f^2 = s + mu2 x^2.
    const auto fields = case_i_vector_fields(s, 0.0, mu2, Expr(s) * X, Interval{-2, 2});
    for (double t : {0.0, 0.5, 1.0}) {
      EXPECT_NEAR(evaluate(fields[0].tau, Bindings(0.0, t)), std::exp(2 * s * t) / (2 * s), 1e-12);
    }
  }
}

TEST(CaseIFields, AllBranchesPassVerification) {
  struct Fixture {
    const char* name;
    Expr f;
    std::array<double, 3> mu;
    Interval dom;
  };
  const Expr tanh_x = (exp(X) - exp(-X)) / (exp(X) + exp(-X));
  // u'' = (1 - x^2) u solved numerically: the mu2 < 0 branch.
  const Interval trig_dom{-1, 1};
  const Expr trig_f = generate_max_symmetry_drift(1.0, 0.0, -1.0, {DriftBranch::Kind::Numeric, 0.0}, trig_dom).f;
  const Fixture fixtures[] = {
      {"heat", Expr(0.0), {0, 0, 0}, {-2, 2}},
      {"constant", Expr(1.5), {2.25, 0, 0}, {-2, 2}},
      {"tanh", tanh_x, {1, 0, 0}, {-2, 2}},
      {"-tan", -(sin(X) / cos(X)), {-1, 0, 0}, {-1, 1}},
      {"OU", -X, {-1, 0, 1}, {-2, 2}},
      {"affine", Expr(2.0) - Expr(0.5) * X, {3.5, -2, 0.25}, {-2, 2}},
      {"weber numeric", trig_f, {1, 0, -1}, trig_dom},
  };
  for (const auto& fx : fixtures) {
    const FPEquation e{fx.f, Expr(1.0), fx.dom};
    const auto fields = case_i_vector_fields(fx.mu[0], fx.mu[1], fx.mu[2], fx.f, fx.dom);
    ASSERT_EQ(fields.size(), 4u) << fx.name;
    for (const auto& v : fields) {
      EXPECT_LT(fp_determining_residual(e, v), 1e-8) << fx.name << " " << v.label;
      EXPECT_LT(commutator(e, v), 1e-8) << fx.name << " " << v.label;
    }
  }
}

TEST(CaseIFields, RejectsMismatchedMu) {
  EXPECT_THROW(case_i_vector_fields(1.0, 0.0, 0.0, Expr(0.0), Interval{-1, 1}), ValidationError);
}

TEST(CaseIIFields, PrintedFormsForPositiveNu1) {
  CaseIIParams p;
  p.nu0 = 0.0;
  p.nu1 = 4.0;
  p.b = -2.0;
  p.zeta = 5.0;
  EXPECT_EQ(caseII_rho(p.nu0, p.nu1, p.zeta), -5.0);
  const auto fields = case_ii_vector_fields(p, parse("x + 2/x"));
  ASSERT_EQ(fields.size(), 2u);
  for (double t : {0.0, 0.7}) {
    EXPECT_NEAR(evaluate(fields[0].tau, Bindings(1.0, t)), std::exp(2 * t) / 2, 1e-12);
    for (double x : {0.5, 2.0}) EXPECT_NEAR(evaluate(fields[0].xi, Bindings(x, t)), 0.5 * x * std::exp(2 * t), 1e-12);
  }
}

TEST(CaseIIFields, ZeroNu1Branch) {
  const auto e = fp("2/x", {0.2, 6});
  const auto c = classify_fp(e);
  ASSERT_EQ(c.fp_case, FPCase::CaseII);
  EXPECT_NEAR(c.nu.nu1, 0.0, 1e-6);
  ASSERT_EQ(c.count(), 2);
  for (const auto& v : c.fields) {
    EXPECT_LT(fp_determining_residual(e, v), 1e-8) << v.label;
    EXPECT_LT(commutator(e, v), 1e-8) << v.label;
  }
}

TEST(CaseIIFields, ConstraintViolationIsRejected) {
  CaseIIParams p;
  p.nu0 = 1.0;
  p.nu1 = 4.0;
  p.c = 0.0;
  EXPECT_THROW(case_ii_vector_fields(p, parse("x")), ValidationError);
  p.c = -1.0;
  EXPECT_NO_THROW(case_ii_vector_fields(p, parse("x")));
}

TEST(Determining, LinearCombinationOfVerifiedFields) {
  const auto e = fp("-x", {-2, 2});
  const auto c = classify_fp(e);
  ASSERT_EQ(c.count(), 4);
  const double a = 0.7, b = -1.3;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      const VectorField combo = c.fields[i] * a + c.fields[j] * b;
      const double bound = std::abs(a) * fp_determining_residual(e, c.fields[i]) +
                           std::abs(b) * fp_determining_residual(e, c.fields[j]);
      EXPECT_LE(fp_determining_residual(e, combo), bound + 1e-12);
    }
  }
}

TEST(Determining, XiEquationHoldsForEmittedFields) {
  for (const char* f : {"0", "-x"}) {
    for (const auto& v : classify_fp(fp(f, {-2, 2})).fields) {
      const Expr r = differentiate(v.xi, Var::x) - Expr(0.5) * differentiate(v.tau, Var::t);
      EXPECT_TRUE(is_identically_zero(r, SampleBox{{-2, 2}, Interval{0, 1}, std::nullopt}));
    }
  }
}

TEST(TimeDependentCaseC, ConstraintHolds) {
  const Expr h(2.0);
  const Expr k = exp(T);
  const FPEquation e{h + k * exp(X), Expr(1.0), Interval{-2, 2}};
  const auto fields = td_caseC_fields(h, k, 1.0);
  ASSERT_EQ(fields.size(), 2u);
  const VectorField expected{Expr(1.0), Expr(-1.0), Expr(0.0), Expr(0.0), "X1"};
  EXPECT_LT(fp_determining_residual(e, expected), 1e-8);
  for (const auto& v : fields) {
    EXPECT_LT(fp_determining_residual(e, v), 1e-8) << v.label;
    EXPECT_LT(commutator(e, v), 1e-8) << v.label;
  }
}

TEST(TimeDependentCaseC, ConstraintFails) {
  const Expr h = T;
  const Expr k = exp(T);
  const FPEquation e{h + k * exp(X), Expr(1.0), Interval{-2, 2}};
  const auto fields = td_caseC_fields(h, k, 1.0);
  ASSERT_EQ(fields.size(), 1u);
  EXPECT_EQ(fields[0].label, "Z1");
  const VectorField candidates[] = {
      {Expr(1.0), -(differentiate(k, Var::t) / k), Expr(0.0), Expr(0.0), "d_t + xi d_x"},
      {Expr(1.0), Expr(0.0), Expr(0.0), Expr(0.0), "d_t"},
      {Expr(0.0), Expr(1.0), Expr(0.0), Expr(0.0), "d_x"},
  };
  for (const auto& v : candidates) EXPECT_GT(fp_determining_residual(e, v), 1e-3) << v.label;
}

TEST(VectorField, Printing) {
  const VectorField v{T, Expr(0.5) * X, Expr(-0.25), Expr(0.0), "X1"};
  EXPECT_EQ(to_string(v), "(t)*d_t + (0.5*x)*d_x + (-0.25)*u*d_u");
}

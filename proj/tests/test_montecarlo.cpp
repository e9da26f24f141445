#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stochsym/kozlov.hpp"
#include "stochsym/montecarlo.hpp"
#include "stochsym/symmetry_ito.hpp"

using namespace stochsym;

namespace {

ItoEquation unit(const char* f, Interval dom = Interval::real_line()) {
  return ItoEquation::make(parse(f), Expr(1.0), dom);
}

SimulationConfig config(std::size_t N, double dt, double T, double x0, double sd = 0.0) {
  SimulationConfig c;
  c.N = N;
  c.dt = dt;
  c.T = T;
  c.seed = 12345;
  c.init = {x0, sd};
  return c;
}

}  // namespace

TEST(SampleMoments, KnownSample) {
  const auto m = sample_moments({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
  EXPECT_NEAR(m.mean_se, std::sqrt(5.0 / 12.0), 1e-15);
  EXPECT_THROW(sample_moments({1.0}), ValidationError);
}

TEST(Simulate, IndependentOfWorkerCount) {
  const auto eq = unit("1 - x + 0.3*sin(x)");
  auto cfg = config(257, 1e-2, 1.0, 0.2, 0.4);
  cfg.workers = 1;
  const auto a = simulate_ensemble(eq, cfg);
  cfg.workers = 4;
  const auto b = simulate_ensemble(eq, cfg);
  EXPECT_EQ(a.terminal, b.terminal);
}

TEST(Simulate, SeedChangesPaths) {
  const auto eq = unit("-x");
  auto cfg = config(16, 1e-2, 0.5, 0.0);
  const auto a = simulate_ensemble(eq, cfg);
  cfg.seed += 1;
  EXPECT_NE(a.terminal, simulate_ensemble(eq, cfg).terminal);
}

TEST(Simulate, RecordsPaths) {
  auto cfg = config(3, 1e-2, 1.0, 0.5);
  cfg.record_every = 10;
  const auto ens = simulate_ensemble(unit("0"), cfg);
  ASSERT_EQ(ens.record_times.size(), 11u);
  ASSERT_EQ(ens.paths.size(), 3u);
  for (const auto& p : ens.paths) {
    EXPECT_EQ(p.front(), 0.5);
    EXPECT_EQ(p.back(), ens.terminal[&p - ens.paths.data()]);
  }
}

TEST(Simulate, ExclusionsOnHalfLine) {
  const auto eq = unit("-1", Interval{0.0, std::numeric_limits<double>::infinity()});
  auto cfg = config(4000, 1e-3, 1.0, 1.0);
  cfg.max_exclusion = 1.0;
  const auto ens = simulate_ensemble(eq, cfg);
  // P(first passage to 0 before T = 1) for drift -1 from 1.
  const double exact = 0.5 * std::erfc((1.0 - 1.0) / std::sqrt(2.0)) +
                       std::exp(2.0 * -1.0 * -1.0) * 0.5 * std::erfc((1.0 + 1.0) / std::sqrt(2.0));
  EXPECT_NEAR(ens.exclusion_fraction, exact, 0.04);
  EXPECT_EQ(ens.kept().size() + static_cast<std::size_t>(std::llround(ens.exclusion_fraction * 4000)), 4000u);
  cfg.max_exclusion = 0.1;
  EXPECT_THROW(simulate_ensemble(eq, cfg), ValidationError);
}

TEST(Histogram, IntegratesToKeptFraction) {
  const auto eq = unit("-1", Interval{0.0, std::numeric_limits<double>::infinity()});
  auto cfg = config(5000, 1e-2, 1.0, 2.0);
  cfg.max_exclusion = 1.0;
  const auto ens = simulate_ensemble(eq, cfg);
  const DensityGrid grid = DensityGrid::gaussian(0.0, 12.0, 241, 0.0, 1.0);
  DensityGrid h = grid;
  h.u = histogram_density(ens.kept(), cfg.N, grid);
  EXPECT_NEAR(h.mass(), 1.0 - ens.exclusion_fraction, 1e-12);
}

TEST(ExactSampler, TypeAAndTypeBMoments) {
  const auto cfg = config(200000, 1e-3, 1.5, 0.7, 0.3);
  for (const char* f : {"2", "1 - 0.8*x", "0.5*x"}) {
    const auto cls = classify_autonomous(parse(f), Interval::real_line());
    const auto m = sample_moments(exact_sampler(cls, cfg).terminal);
    const double g = cls.k0() != 0.0 ? std::exp(cls.k0() * cfg.T) : 1.0;
    const auto law = oracle::linear_sde_law(cls.h0(), cls.k0(), 0.7, cfg.T);
    EXPECT_NEAR(m.mean, law.mean, 4 * m.mean_se) << f;
    EXPECT_NEAR(m.variance, law.variance + g * g * 0.09, 4 * m.variance_se) << f;
  }
}

TEST(ExactSampler, TypeCIsRejected) {
  const auto cls = classify_autonomous(parse("2 + 5*exp(-x)"), Interval::real_line());
  try {
    exact_sampler(cls, config(10, 1e-2, 1.0, 0.0));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("kozlov"), std::string::npos);
  }
}

TEST(EulerMaruyama, WeakOrderOneOnLinearDrift) {
  const double k0 = -1.0, x0 = 2.0, T = 1.0;
  const std::vector<double> dts{0.1, 0.05, 0.025};
  std::vector<double> err;
  const double exact = oracle::linear_sde_law(0.0, k0, x0, T).mean;
  for (double dt : dts) {
    const auto m = sample_moments(simulate_ensemble(unit("-x"), config(200000, dt, T, x0)).terminal);
    err.push_back(std::abs(m.mean - exact));
  }
  const double slope = oracle::loglog_slope(dts, err);
  EXPECT_GT(slope, 0.7);
  EXPECT_LT(slope, 1.3);
}

// Additive noise: Euler-Maruyama converges strongly with order one against
// a fine-step reference on the same Brownian path.
TEST(EulerMaruyama, StrongOrderOneForAdditiveNoise) {
  const auto eq = unit("1 - x");
  const double fine = 1.25e-4;
  const std::vector<std::size_t> factors{80, 40, 20, 10};
  std::vector<double> err(factors.size(), 0.0);
  const int paths = 200;
  for (int p = 0; p < paths; ++p) {
    const WienerPath w = WienerPath::generate(99, fine, 1.0, static_cast<std::uint64_t>(p));
    const double ref = euler_maruyama_path(eq, w, 0.5).back();
    for (std::size_t j = 0; j < factors.size(); ++j) {
      err[j] += std::abs(euler_maruyama_path(eq, w.coarsen(factors[j]), 0.5).back() - ref) / paths;
    }
  }
  std::vector<double> dts;
  for (auto f : factors) dts.push_back(fine * static_cast<double>(f));
  EXPECT_GE(oracle::loglog_slope(dts, err), 0.9);
}

TEST(Crossval, OrnsteinUhlenbeck) {
  CrossvalConfig cfg;
  cfg.sim = config(200000, 1e-3, 1.0, 1.0, 0.5);
  cfg.xmin = -4;
  cfg.xmax = 4;
  cfg.nx = 161;
  const auto r = crossval(unit("-x"), cfg);
  EXPECT_LT(r.l1, 0.02);
  EXPECT_TRUE(r.moments_agree());
  EXPECT_LT(r.fp_mass_drift, 1e-8);
}

TEST(Crossval, HeatMoments) {
  CrossvalConfig cfg;
  cfg.sim = config(100000, 1e-2, 1.0, 0.0, 0.5);
  cfg.xmin = -8;
  cfg.xmax = 8;
  cfg.nx = 161;
  const auto r = crossval(unit("0"), cfg);
  EXPECT_TRUE(r.moments_agree()) << r.mc.mean << " " << r.mc.variance << " vs " << r.fp_mean << " " << r.fp_variance;
  EXPECT_NEAR(r.fp_variance, 1.25, 0.01);
}

TEST(Crossval, ExponentialDriftOnBoundedWindow) {
  CrossvalConfig cfg;
  cfg.sim = config(100000, 1e-3, 0.5, -3.0, 0.3);
  cfg.xmin = -8;
  cfg.xmax = 2;
  cfg.nx = 101;
  const auto r = crossval(unit("1 + exp(x)", Interval{-8, 2}), cfg);
  EXPECT_LT(r.exclusion_fraction, 1e-3);
  EXPECT_LT(r.l1, 0.03);
  EXPECT_TRUE(r.moments_agree());
}

TEST(Crossval, NeedsGaussianInitialLaw) {
  CrossvalConfig cfg;
  cfg.sim = config(10, 1e-2, 1.0, 0.0, 0.0);
  EXPECT_THROW(crossval(unit("0"), cfg), ValidationError);
}

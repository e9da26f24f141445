#pragma once

// Euler-Maruyama ensembles with per-path random streams, exact samplers for
// the integrable A/B families, and cross-validation against the FP solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/fokker_planck.hpp"
#include "stochsym/ito.hpp"
#include "stochsym/symmetry_ito.hpp"

namespace stochsym {

/// Normal initial law; sd = 0 means the point mean.
struct InitialCondition {
  double mean = 0.0;
  double sd = 0.0;
};

struct SimulationConfig {
  std::size_t N = 1000;
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t seed = 1;
  InitialCondition init;
  unsigned workers = 1;
  /// Record every n-th step of each path (0: terminal values only).
  std::size_t record_every = 0;
  double max_exclusion = 0.1;
};

struct PathEnsemble {
  std::vector<double> terminal;
  std::vector<std::uint8_t> excluded;
  std::vector<double> record_times;
  std::vector<std::vector<double>> paths;  // per path, at record_times
  double exclusion_fraction = 0.0;

  std::vector<double> kept() const {
    std::vector<double> v;
    v.reserve(terminal.size());
    for (std::size_t i = 0; i < terminal.size(); ++i) {
      if (!excluded[i]) v.push_back(terminal[i]);
    }
    return v;
  }
};

/// Mean, variance and their standard errors of a sample.
struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  std::size_t n = 0;
};

inline SampleMoments sample_moments(const std::vector<double>& v) {
  SampleMoments m;
  m.n = v.size();
  if (m.n < 2) throw ValidationError("need at least two samples");
  const double n = static_cast<double>(m.n);
  for (double x : v) m.mean += x;
  m.mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m.variance = m2 / (n - 1.0);
  m4 /= n;
  m.mean_se = std::sqrt(m.variance / n);
  const double v2 = m2 / n;
  m.variance_se = std::sqrt(std::max(0.0, m4 - v2 * v2) / n);
  return m;
}

namespace detail {

template <class Body>
void parallel_paths(std::size_t N, unsigned workers, Body body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(N, 1))));
  if (workers == 1) {
    body(0, N);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (N + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(N, w * chunk);
    const std::size_t hi = std::min(N, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void finish_exclusions(PathEnsemble& ens, double max_exclusion) {
  std::size_t bad = 0;
  for (auto e : ens.excluded) bad += e;
  ens.exclusion_fraction = static_cast<double>(bad) / static_cast<double>(ens.excluded.size());
  if (ens.exclusion_fraction > max_exclusion) {
    throw ValidationError("exclusion fraction " + format_number(ens.exclusion_fraction) +
                          " exceeds " + format_number(max_exclusion) + "; domain too small");
  }
}

}  // namespace detail

/// Euler-Maruyama x_{i+1} = x_i + f dt + sigma dw_i. Paths leaving the
/// domain are stopped and flagged.
inline PathEnsemble simulate_ensemble(const ItoEquation& eq, const SimulationConfig& cfg) {
  if (cfg.N < 1) throw ValidationError("need N >= 1");
  if (!(cfg.dt > 0) || !(cfg.T > 0)) throw ValidationError("need dt > 0 and T > 0");
  const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  if (steps == 0) throw ValidationError("T shorter than one step");
  const CompiledExpr f(eq.f());
  const CompiledExpr s(eq.sigma());
  const Interval dom = eq.domain();

  PathEnsemble ens;
  ens.terminal.assign(cfg.N, 0.0);
  ens.excluded.assign(cfg.N, 0);
  if (cfg.record_every > 0) {
    for (std::size_t i = 0; i <= steps; i += cfg.record_every) ens.record_times.push_back(i * cfg.dt);
    ens.paths.assign(cfg.N, {});
  }
  const double sq = std::sqrt(cfg.dt);

  detail::parallel_paths(cfg.N, cfg.workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      auto rng = path_stream(cfg.seed, p);
      std::normal_distribution<double> normal(0.0, 1.0);
      double x = cfg.init.mean + (cfg.init.sd > 0 ? cfg.init.sd * normal(rng) : 0.0);
      bool out = !dom.contains(x);
      std::vector<double> rec;
      for (std::size_t i = 0; i < steps && !out; ++i) {
        if (cfg.record_every > 0 && i % cfg.record_every == 0) rec.push_back(x);
        const double t = static_cast<double>(i) * cfg.dt;
        x += f(x, t) * cfg.dt + s(x, t) * sq * normal(rng);
        if (!dom.contains(x) || !std::isfinite(x)) out = true;
      }
      if (cfg.record_every > 0 && !out && steps % cfg.record_every == 0) rec.push_back(x);
      ens.terminal[p] = x;
      ens.excluded[p] = out ? 1 : 0;
      if (cfg.record_every > 0) ens.paths[p] = std::move(rec);
    }
  });
  detail::finish_exclusions(ens, cfg.max_exclusion);
  return ens;
}

/// Samples x(T) exactly through the Kozlov variable for autonomous TypeA
/// (x = x0 + h0 T + w(T)) and TypeB (y = exp(-k0 t) x, an Ornstein-Uhlenbeck
/// transition). Terminal values only.
inline PathEnsemble exact_sampler(const SymmetryClass& cls, const SimulationConfig& cfg) {
  if (cls.kind == SymmetryKind::TypeC) {
    throw ValidationError("TypeC equations have no exact sampler; integrate them pathwise with `stochsym kozlov`");
  }
  if (cls.kind == SymmetryKind::NoSymmetry) throw ValidationError("no symmetry: no exact sampler");
  if (!cls.autonomous()) throw ValidationError("exact sampler needs constant h and k");
  const double h0 = cls.h0();
  const double k0 = cls.k0();
  const double T = cfg.T;
  double drift_shift = h0 * T;
  double growth = 1.0;
  double sd = std::sqrt(T);
  if (cls.kind == SymmetryKind::TypeB && k0 != 0.0) {
    growth = std::exp(k0 * T);
    drift_shift = h0 * std::expm1(k0 * T) / k0;
    sd = std::sqrt(std::expm1(2.0 * k0 * T) / (2.0 * k0));
  }
  PathEnsemble ens;
  ens.terminal.assign(cfg.N, 0.0);
  ens.excluded.assign(cfg.N, 0);
  detail::parallel_paths(cfg.N, cfg.workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      auto rng = path_stream(cfg.seed, p);
      std::normal_distribution<double> normal(0.0, 1.0);
      const double x0 = cfg.init.mean + (cfg.init.sd > 0 ? cfg.init.sd * normal(rng) : 0.0);
      ens.terminal[p] = growth * x0 + drift_shift + sd * normal(rng);
    }
  });
  return ens;
}

/// Histogram on the vertex grid: bin i is the cell [x_i - h/2, x_i + h/2]
/// clipped to the grid ends; density = count / (N * cell width).
inline std::vector<double> histogram_density(const std::vector<double>& samples, std::size_t total,
                                             const DensityGrid& grid) {
  const std::size_t n = grid.x.size();
  const double h = grid.h();
  const double lo = grid.x.front();
  const double hi = grid.x.back();
  std::vector<double> counts(n, 0.0);
  for (double x : samples) {
    if (x < lo || x > hi) continue;
    const auto i = static_cast<std::size_t>(std::clamp(std::llround((x - lo) / h), 0LL,
                                                       static_cast<long long>(n - 1)));
    counts[i] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) counts[i] /= static_cast<double>(total) * grid.weight(i);
  return counts;
}

struct CrossvalConfig {
  SimulationConfig sim;
  double xmin = -4.0;
  double xmax = 4.0;
  int nx = 81;
  double fp_dt = 1e-3;
};

struct CrossvalReport {
  double l1 = 0.0;
  SampleMoments mc;
  double fp_mean = 0.0;
  double fp_variance = 0.0;
  double exclusion_fraction = 0.0;
  double outside_grid_fraction = 0.0;
  double fp_mass_drift = 0.0;

  /// Moment agreement within k standard errors.
  bool moments_agree(double k = 3.0) const {
    return std::abs(mc.mean - fp_mean) <= k * mc.mean_se &&
           std::abs(mc.variance - fp_variance) <= k * mc.variance_se;
  }
};

/// Simulates the ensemble and solves the FP equation from the same Gaussian
/// initial law, then compares the densities at T.
inline CrossvalReport crossval(const ItoEquation& eq, const CrossvalConfig& cfg) {
  if (!(cfg.sim.init.sd > 0)) throw ValidationError("cross-validation needs a Gaussian initial law with sd > 0");
  const PathEnsemble ens = simulate_ensemble(eq, cfg.sim);
  const DensityGrid u0 =
      DensityGrid::gaussian(cfg.xmin, cfg.xmax, cfg.nx, cfg.sim.init.mean, cfg.sim.init.sd);
  const FPSolution sol = solve_fp(build_fp(eq), u0, cfg.fp_dt, cfg.sim.T);
  const DensityGrid& uT = sol.final();

  const auto kept = ens.kept();
  CrossvalReport r;
  r.exclusion_fraction = ens.exclusion_fraction;
  std::size_t outside = 0;
  for (double x : kept) outside += (x < cfg.xmin || x > cfg.xmax) ? 1 : 0;
  r.outside_grid_fraction = static_cast<double>(outside) / static_cast<double>(cfg.sim.N);
  r.l1 = uT.l1_distance(histogram_density(kept, cfg.sim.N, uT));
  r.mc = sample_moments(kept);
  r.fp_mean = uT.mean();
  r.fp_variance = uT.variance();
  r.fp_mass_drift = sol.mass_drift;
  return r;
}

}  // namespace stochsym

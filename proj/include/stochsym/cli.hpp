#pragma once

// The stochsym command line: one binary, one JSON report per run on stdout
// ending in "status". Exit 0 on success, 1 on library errors (the report
// carries {"status":"error","kind":...}), 2 on usage errors.

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stochsym/equation_io.hpp"
#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/fokker_planck.hpp"
#include "stochsym/fp_symmetry.hpp"
#include "stochsym/ito.hpp"
#include "stochsym/kozlov.hpp"
#include "stochsym/montecarlo.hpp"
#include "stochsym/symmetry_ito.hpp"
#include "stochsym/weber.hpp"

namespace stochsym::cli {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << std::setprecision(17);
  return f;
}

inline Interval interval_arg(const std::vector<double>& v, const char* name) {
  if (v.size() != 2 || !(v[0] < v[1])) throw ValidationError(std::string(name) + " needs lo,hi with lo < hi");
  return {v[0], v[1]};
}

inline InitialCondition parse_init(const std::string& spec) {
  const std::string prefix = "gaussian:";
  if (spec.rfind(prefix, 0) != 0) throw ValidationError("--init must look like gaussian:mean,sd");
  const std::string body = spec.substr(prefix.size());
  const auto comma = body.find(',');
  if (comma == std::string::npos) throw ValidationError("--init must look like gaussian:mean,sd");
  try {
    return {std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ValidationError("--init must look like gaussian:mean,sd");
  }
}

inline Json residual_json(const SymmetryResiduals& r) { return Json::array({r.r1, r.r2}); }

// Unit-noise version of the equation, recording the normalization if any.
inline ItoEquation unit_noise(const ItoEquation& eq, Json& report) {
  if (eq.unit_noise()) return eq;
  const NormalizedEquation n = normalize_noise(eq);
  report["normalized"] = true;
  report["transform"] = to_string(n.transform.forward);
  return n.equation;
}

inline SymmetryClass classify(const ItoEquation& eq, const Interval& tspan, bool random) {
  ClassifyOptions opt;
  opt.random_representative = random;
  if (eq.autonomous()) return classify_autonomous(eq.f(), eq.domain(), opt);
  return classify_time_dependent(eq.f(), eq.domain(), tspan, opt);
}

inline void class_json(const SymmetryClass& c, Json& report) {
  report["kind"] = to_string(c.kind);
  if (c.kind == SymmetryKind::NoSymmetry) return;
  if (c.autonomous()) {
    report["h0"] = c.h0();
    if (c.kind != SymmetryKind::TypeA) report["k0"] = c.k0();
  } else {
    report["h"] = to_string(c.h);
    report["k"] = to_string(c.k);
  }
  if (c.kind == SymmetryKind::TypeC) report["beta"] = c.beta;
  report["generator"] = to_string(c.generator);
  report["random"] = c.random;
  if (!c.note.empty()) report["note"] = c.note;
}

}  // namespace detail

/// Runs one command; the report goes to `out`, help text too.
inline int run(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Symmetry analysis, integration and simulation of scalar Ito equations", "stochsym"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  bool no_timestamp = false;
  app.add_flag("--no-timestamp", no_timestamp, "Omit the timestamp from the report");

  // classify
  std::string eq_path;
  std::vector<double> tspan{0.0, 1.0};
  bool random_rep = false;
  auto* c_classify = app.add_subcommand("classify", "Standard symmetry type (A/B/C) of an Ito equation");
  c_classify->add_option("equation", eq_path, "Equation JSON file")->required();
  c_classify->add_option("--tspan", tspan, "t-range for time-dependent drifts")->delimiter(',')->expected(2)->capture_default_str();
  c_classify->add_flag("--random", random_rep, "TypeA: emit P = identity instead of P = 1");

  // normalize
  std::string csv_path;
  int table_rows = 21;
  auto* c_norm = app.add_subcommand("normalize", "Transform to unit noise");
  c_norm->add_option("equation", eq_path, "Equation JSON file")->required();
  c_norm->add_option("--csv", csv_path, "Write the transform table (x, xi)");
  c_norm->add_option("--rows", table_rows, "Rows of the transform table")->capture_default_str();

  // kozlov
  std::uint64_t seed = 1;
  double dt = 1e-3;
  double T = 1.0;
  std::size_t paths = 10;
  double x0 = 0.0;
  auto* c_koz = app.add_subcommand("kozlov", "Integrate via the Kozlov substitution on sampled Wiener paths");
  c_koz->add_option("equation", eq_path, "Equation JSON file")->required();
  c_koz->add_option("--seed", seed, "Master seed")->capture_default_str();
  c_koz->add_option("--dt", dt, "Time step")->capture_default_str();
  c_koz->add_option("--T", T, "Final time")->capture_default_str();
  c_koz->add_option("--paths", paths, "Number of paths")->capture_default_str();
  c_koz->add_option("--x0", x0, "Initial value")->capture_default_str();
  c_koz->add_option("--csv", csv_path, "Write (path_id, t, y, x)");

  // simulate
  std::size_t N = 10000;
  double x0_sd = 0.0;
  unsigned workers = 1;
  std::size_t record_every = 0;
  auto* c_sim = app.add_subcommand("simulate", "Euler-Maruyama ensemble");
  c_sim->add_option("equation", eq_path, "Equation JSON file")->required();
  c_sim->add_option("--N", N, "Number of paths")->capture_default_str();
  c_sim->add_option("--dt", dt, "Time step")->capture_default_str();
  c_sim->add_option("--T", T, "Final time")->capture_default_str();
  c_sim->add_option("--seed", seed, "Master seed")->capture_default_str();
  c_sim->add_option("--x0", x0, "Initial mean")->capture_default_str();
  c_sim->add_option("--x0-sd", x0_sd, "Initial standard deviation")->capture_default_str();
  c_sim->add_option("--workers", workers, "Threads")->capture_default_str();
  c_sim->add_option("--record-every", record_every, "Store every n-th step of each path")->capture_default_str();
  c_sim->add_option("--out", csv_path, "Write (path_id, t, x)");

  // fp
  auto* c_fp = app.add_subcommand("fp", "Fokker-Planck equation tools");
  c_fp->require_subcommand(1);
  std::vector<double> grid{-5.0, 5.0, 401};
  std::string init_spec = "gaussian:0,0.5";
  int snapshots = 0;
  auto* c_solve = c_fp->add_subcommand("solve", "Crank-Nicolson solve with zero-flux walls");
  c_solve->add_option("equation", eq_path, "Equation JSON file")->required();
  c_solve->add_option("--grid", grid, "xmin,xmax,Nx")->delimiter(',')->expected(3)->capture_default_str();
  c_solve->add_option("--dt", dt, "Time step")->capture_default_str();
  c_solve->add_option("--T", T, "Final time")->capture_default_str();
  c_solve->add_option("--init", init_spec, "Initial density gaussian:mean,sd")->capture_default_str();
  c_solve->add_option("--snapshots", snapshots, "Keep every n-th step in the CSV")->capture_default_str();
  c_solve->add_option("--out", csv_path, "Write (t, x, u)");
  auto* c_fpc = c_fp->add_subcommand("classify", "Symmetry case (i/ii/iii) and fields");
  c_fpc->add_option("equation", eq_path, "Equation JSON file")->required();
  std::string field_path;
  double tol = 1e-8;
  auto* c_verify = c_fp->add_subcommand("verify", "Determining-equation residuals of a field");
  c_verify->add_option("equation", eq_path, "Equation JSON file")->required();
  c_verify->add_option("field", field_path, "Field JSON file")->required();
  c_verify->add_option("--tol", tol, "Acceptance threshold")->capture_default_str();

  // weber
  auto* c_weber = app.add_subcommand("weber", "Maximal-symmetry drifts");
  c_weber->require_subcommand(1);
  std::vector<double> mu;
  std::vector<double> domain_arg{-1.0, 3.0};
  std::string branch = "auto";
  double f0 = 0.0;
  int samples = 41;
  auto* c_gen = c_weber->add_subcommand("gen", "Drift with f' + f^2 = mu0 + mu1 x + mu2 x^2");
  c_gen->add_option("--mu", mu, "mu0,mu1,mu2")->delimiter(',')->expected(3)->required();
  c_gen->add_option("--domain", domain_arg, "lo,hi")->delimiter(',')->expected(2)->capture_default_str();
  c_gen->add_option("--branch", branch, "auto | hermite | numeric")
      ->check(CLI::IsMember({"auto", "hermite", "numeric"}))
      ->capture_default_str();
  c_gen->add_option("--f0", f0, "Numeric branch: f at the left end")->capture_default_str();
  c_gen->add_option("--samples", samples, "Sampled f values")->capture_default_str();
  c_gen->add_option("--csv", csv_path, "Write (x, f)");

  // crossval
  std::vector<double> cv_grid{-4.0, 4.0, 81};
  std::string cv_init = "gaussian:1,0.5";
  double fp_dt = 1e-3;
  auto* c_cv = app.add_subcommand("crossval", "Ensemble histogram against the FP solution");
  c_cv->add_option("equation", eq_path, "Equation JSON file")->required();
  c_cv->add_option("--N", N, "Number of paths")->capture_default_str();
  c_cv->add_option("--dt", dt, "Euler-Maruyama step")->capture_default_str();
  c_cv->add_option("--T", T, "Final time")->capture_default_str();
  c_cv->add_option("--seed", seed, "Master seed")->capture_default_str();
  c_cv->add_option("--grid", cv_grid, "xmin,xmax,Nx")->delimiter(',')->expected(3)->capture_default_str();
  c_cv->add_option("--init", cv_init, "Initial law gaussian:mean,sd")->capture_default_str();
  c_cv->add_option("--fp-dt", fp_dt, "FP time step")->capture_default_str();
  c_cv->add_option("--workers", workers, "Threads")->capture_default_str();

  Json report;
  report["tool"] = "stochsym";
  report["version"] = kVersion;

  std::vector<const char*> argv{"stochsym"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    report["status"] = "error";
    report["kind"] = "usage";
    report["message"] = e.what();
    out << report.dump(2) << "\n";
    return 2;
  }

  if (!no_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    report["timestamp"] = ts.str();
  }

  Json config;
  try {
    if (c_classify->parsed()) {
      report["command"] = "classify";
      config = {{"equation", eq_path}, {"tspan", tspan}, {"random", random_rep}};
      report["config"] = config;
      const ItoEquation eq = detail::unit_noise(load_equation(eq_path), report);
      const SymmetryClass cls = detail::classify(eq, detail::interval_arg(tspan, "--tspan"), random_rep);
      detail::class_json(cls, report);
      if (cls.kind != SymmetryKind::NoSymmetry) {
        ResidualGrid g{eq.domain()};
        g.t = detail::interval_arg(tspan, "--tspan");
        const SymmetryResiduals r = symmetry_residuals(eq, cls.generator, g);
        report["residuals"] = detail::residual_json(r);
        report["accepted"] = r.accepted();
      }
    } else if (c_norm->parsed()) {
      report["command"] = "normalize";
      report["config"] = {{"equation", eq_path}, {"rows", table_rows}, {"csv", csv_path}};
      const ItoEquation eq = load_equation(eq_path);
      const NormalizedEquation n = normalize_noise(eq);
      report["equation"] = equation_to_json(n.equation);
      report["transform"] = {{"forward", to_string(n.transform.forward)},
                             {"x_ref", n.transform.x_ref},
                             {"closed_form", n.transform.closed_form}};
      const Interval w = eq.domain().window();
      Json table = Json::array();
      std::ofstream csv;
      if (!csv_path.empty()) {
        csv = detail::open_out(csv_path);
        csv << "x,xi\n";
      }
      for (double x : midpoints(w.lo, w.hi, table_rows)) {
        const double xi = n.transform.to_xi(x);
        table.push_back({x, xi});
        if (csv.is_open()) csv << x << "," << xi << "\n";
      }
      report["table"] = table;
    } else if (c_koz->parsed()) {
      report["command"] = "kozlov";
      report["config"] = {{"equation", eq_path}, {"seed", seed}, {"dt", dt}, {"T", T}, {"paths", paths}, {"x0", x0}};
      const ItoEquation eq = load_equation(eq_path);
      if (!eq.unit_noise()) throw ValidationError("kozlov needs a unit-noise equation; run normalize first");
      const SymmetryClass cls = detail::classify(eq, Interval{0.0, T}, false);
      detail::class_json(cls, report);
      if (cls.kind == SymmetryKind::NoSymmetry) throw ValidationError("no standard symmetry: Kozlov substitution unavailable");
      const KozlovMap map = kozlov_map(cls.generator, eq.domain());
      const GeneralizedItoEquation g = transform_equation(eq, map);
      report["y"] = to_string(map.y);
      report["F"] = to_string(g.F);
      report["S"] = to_string(g.S);
      report["proper_ito"] = g.proper;
      std::ofstream csv;
      if (!csv_path.empty()) {
        csv = detail::open_out(csv_path);
        csv << "path_id,t,y,x\n";
      }
      const double y0 = map.to_y(x0, 0.0, 0.0);
      Json terminal = Json::array();
      double max_gap = 0.0;
      std::size_t aborted = 0;
      std::string abort_reason;
      for (std::size_t p = 0; p < paths; ++p) {
        const WienerPath w = WienerPath::generate(seed, dt, T, p);
        const auto y = integrate_path(g, w, y0);
        std::vector<double> x;
        try {
          x = map_back(map, w, y);
        } catch (const DomainError& e) {
          ++aborted;
          abort_reason = e.what();
          continue;
        }
        const auto em = euler_maruyama_path(eq, w, x0);
        max_gap = std::max(max_gap, std::abs(x.back() - em.back()));
        terminal.push_back({{"path_id", p}, {"y", y.back()}, {"x", x.back()}, {"x_euler_maruyama", em.back()}});
        if (csv.is_open()) {
          for (std::size_t i = 0; i < y.size(); ++i) csv << p << "," << w.times[i] << "," << y[i] << "," << x[i] << "\n";
        }
      }
      report["y0"] = y0;
      report["terminal"] = terminal;
      report["max_abs_gap_to_euler_maruyama"] = max_gap;
      report["aborted_paths"] = aborted;
      if (aborted > 0) report["abort_reason"] = abort_reason;
    } else if (c_sim->parsed()) {
      report["command"] = "simulate";
      report["config"] = {{"equation", eq_path}, {"N", N},       {"dt", dt},         {"T", T},
                          {"seed", seed},        {"x0", x0},     {"x0_sd", x0_sd},   {"workers", workers},
                          {"record_every", record_every}};
      const ItoEquation eq = load_equation(eq_path);
      SimulationConfig cfg{N, dt, T, seed, {x0, x0_sd}, workers, record_every};
      if (!csv_path.empty() && cfg.record_every == 0) cfg.record_every = 1;
      const PathEnsemble ens = simulate_ensemble(eq, cfg);
      const SampleMoments m = sample_moments(ens.kept());
      report["exclusion_fraction"] = ens.exclusion_fraction;
      report["terminal"] = {{"mean", m.mean}, {"mean_se", m.mean_se}, {"variance", m.variance},
                            {"variance_se", m.variance_se}, {"n", m.n}};
      if (!csv_path.empty()) {
        auto csv = detail::open_out(csv_path);
        csv << "path_id,t,x\n";
        for (std::size_t p = 0; p < ens.paths.size(); ++p) {
          for (std::size_t i = 0; i < ens.paths[p].size(); ++i) {
            csv << p << "," << ens.record_times[i] << "," << ens.paths[p][i] << "\n";
          }
        }
      }
    } else if (c_solve->parsed()) {
      report["command"] = "fp solve";
      report["config"] = {{"equation", eq_path}, {"grid", grid}, {"dt", dt}, {"T", T}, {"init", init_spec}};
      const ItoEquation eq = load_equation(eq_path);
      const InitialCondition ic = detail::parse_init(init_spec);
      const DensityGrid u0 = DensityGrid::gaussian(grid[0], grid[1], static_cast<int>(grid[2]), ic.mean, ic.sd);
      FPSolveOptions opt;
      opt.snapshot_every = snapshots;
      const FPSolution sol = solve_fp(build_fp(eq), u0, dt, T, opt);
      const DensityGrid& uT = sol.final();
      report["mass"] = uT.mass();
      report["mass_drift"] = sol.mass_drift;
      report["mean"] = uT.mean();
      report["variance"] = uT.variance();
      report["min_value"] = sol.min_value;
      report["max_peclet"] = sol.max_peclet;
      report["warnings"] = sol.warnings;
      if (!csv_path.empty()) {
        auto csv = detail::open_out(csv_path);
        csv << "t,x,u\n";
        for (const auto& s : sol.snapshots) {
          for (std::size_t i = 0; i < s.x.size(); ++i) csv << s.t << "," << s.x[i] << "," << s.u[i] << "\n";
        }
      }
    } else if (c_fpc->parsed()) {
      report["command"] = "fp classify";
      report["config"] = {{"equation", eq_path}};
      const ItoEquation eq = detail::unit_noise(load_equation(eq_path), report);
      const FPEquation fpe = build_fp(eq);
      const FPClass cls = classify_fp(fpe);
      report["case"] = to_string(cls.fp_case);
      if (cls.fp_case == FPCase::CaseI) report["mu"] = cls.mu;
      if (cls.fp_case == FPCase::CaseII) {
        report["nu0"] = cls.nu.nu0;
        report["nu1"] = cls.nu.nu1;
        report["b"] = cls.nu.b;
        report["c"] = cls.nu.c;
        report["zeta"] = cls.nu.zeta;
      }
      report["gamma"] = to_string(cls.gamma);
      report["count"] = cls.count();
      Json fields = Json::array();
      Json residuals = Json::array();
      for (const auto& f : cls.fields) {
        fields.push_back(Json(field_to_json(f)));
        residuals.push_back(fp_determining_residual(fpe, f));
      }
      report["fields"] = fields;
      report["residuals"] = residuals;
    } else if (c_verify->parsed()) {
      report["command"] = "fp verify";
      report["config"] = {{"equation", eq_path}, {"field", field_path}, {"tol", tol}};
      const ItoEquation eq = load_equation(eq_path);
      const VectorField field = load_field(field_path);
      const FPResidual r = fp_determining_residuals(build_fp(eq), field, FPGrid{eq.domain()});
      report["residuals"] = {{"xi", r.xi}, {"phi1_x", r.phi1x}, {"phi1_t", r.phi1t}, {"phi0", r.phi0}};
      report["max"] = r.max();
      report["symmetry"] = r.max() < tol;
    } else if (c_gen->parsed()) {
      report["command"] = "weber gen";
      const Interval dom = detail::interval_arg(domain_arg, "--domain");
      report["config"] = {{"mu", mu},
                          {"domain", Json(interval_to_json(dom))},
                          {"branch", branch},
                          {"f0", f0},
                          {"samples", samples}};
      DriftBranch br;
      br.kind = branch == "hermite" ? DriftBranch::Kind::Hermite
                                    : (branch == "numeric" ? DriftBranch::Kind::Numeric : DriftBranch::Kind::Auto);
      br.f0 = f0;
      const GeneratedDrift d = generate_max_symmetry_drift(mu[0], mu[1], mu[2], br, dom);
      report["mu"] = mu;
      if (d.problem) {
        report["lambda"] = d.problem->lambda;
        report["z_transform"] = {{"scale", d.problem->z_scale}, {"shift", d.problem->z_shift}};
      }
      report["branch"] = d.hermite_branch ? "hermite" : "numeric";
      if (d.hermite_branch) report["n"] = *d.n;
      report["f"] = to_string(d.f);
      report["gamma_xx_residual"] = d.gamma_xx_residual;
      report["riccati_residual"] = d.riccati_residual;
      std::ofstream csv;
      if (!csv_path.empty()) {
        csv = detail::open_out(csv_path);
        csv << "x,f\n";
      }
      Json sampled = Json::array();
      const Interval win = dom.window();
      for (double x : midpoints(win.lo, win.hi, samples)) {
        const double fv = evaluate(d.f, Bindings(x));
        sampled.push_back({x, fv});
        if (csv.is_open()) csv << x << "," << fv << "\n";
      }
      report["samples"] = sampled;
    } else if (c_cv->parsed()) {
      report["command"] = "crossval";
      report["config"] = {{"equation", eq_path}, {"N", N},         {"dt", dt},       {"T", T},
                          {"seed", seed},        {"grid", cv_grid}, {"init", cv_init}, {"fp_dt", fp_dt},
                          {"workers", workers}};
      const ItoEquation eq = load_equation(eq_path);
      CrossvalConfig cfg;
      cfg.sim = SimulationConfig{N, dt, T, seed, detail::parse_init(cv_init), workers, 0};
      cfg.xmin = cv_grid[0];
      cfg.xmax = cv_grid[1];
      cfg.nx = static_cast<int>(cv_grid[2]);
      cfg.fp_dt = fp_dt;
      const CrossvalReport r = crossval(eq, cfg);
      report["L1"] = r.l1;
      report["moments"] = {{"mc_mean", r.mc.mean},         {"mc_mean_se", r.mc.mean_se},
                           {"mc_variance", r.mc.variance}, {"mc_variance_se", r.mc.variance_se},
                           {"fp_mean", r.fp_mean},         {"fp_variance", r.fp_variance}};
      report["moments_agree_3se"] = r.moments_agree();
      report["exclusion_fraction"] = r.exclusion_fraction;
      report["outside_grid_fraction"] = r.outside_grid_fraction;
      report["fp_mass_drift"] = r.fp_mass_drift;
    }
  } catch (const Error& e) {
    report["status"] = "error";
    report["kind"] = e.kind();
    report["message"] = e.what();
    out << report.dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    report["status"] = "error";
    report["kind"] = "internal";
    report["message"] = e.what();
    out << report.dump(2) << "\n";
    return 1;
  }
  report["status"] = "ok";
  out << report.dump(2) << "\n";
  return 0;
}

inline int run(int argc, char** argv, std::ostream& out) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out);
}

}  // namespace stochsym::cli

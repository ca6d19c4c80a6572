#include "pucci/cli.hpp"

#include "pucci/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace pucci {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

bool wants(const RunConfig& cfg, const char* format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

RunReport start_report(const char* command, const RunConfig& cfg) {
  RunReport r;
  r.command = command;
  r.inputs = to_json(cfg);
  r.constants = named_constants(cfg.spec(), cfg.p);
  return r;
}

void add_audit(RunReport& r, std::string name, double value, double tolerance, bool passed) {
  r.audits.push_back({std::move(name), value, tolerance, passed});
}

void open_for_write(std::ofstream& f, const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  f.open(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f;
  open_for_write(f, path);
  f << text;
}

void write_with(const std::string& path, const std::function<void(std::ostream&)>& emit) {
  std::ofstream f;
  open_for_write(f, path);
  emit(f);
}

/// Writes the report itself last so that it lists every file.
void finish(RunReport& r, const RunConfig& cfg, Clock::time_point t0) {
  r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!cfg.out.empty() && wants(cfg, "json")) {
    const std::string path = cfg.out + ".report.json";
    r.files.push_back(path);
    write_text(path, to_json(r).dump(2) + "\n");
  }
}

RadialSolution shoot(const RunConfig& cfg) {
  if (cfg.domain == Domain::Entire)
    return solve_entire(cfg.spec(), *cfg.p, *cfg.alpha, cfg.solve_opts());
  return solve_exterior(cfg.spec(), *cfg.p, *cfg.alpha, cfg.solve_opts());
}

int exit_code_for(const RadialSolution& sol) {
  if (sol.numerical_failure()) return kExitNumerical;
  if (sol.classification.tag == DecayTag::Undetermined) return kExitUndetermined;
  return kExitOk;
}

void fill_solution(RunReport& r, const RadialSolution& sol) {
  r.landmarks = sol.landmarks;
  r.classification = sol.classification;
  r.exit_code = exit_code_for(sol);
  if (sol.numerical_failure())
    r.notes.push_back("integration ended with " + std::string(to_string(sol.phase.terminal)));
}

bool is_critical_semilinear(const OperatorSpec& spec, double p) {
  return spec.branch == Branch::Semilinear &&
         std::abs(p - (spec.dim + 2.0) / (spec.dim - 2.0)) <= 1e-12;
}

void solution_audits(RunReport& r, const RadialSolution& sol) {
  const double p = sol.p;
  const CurveTable radial = sol.radial_table();

  if (sol.domain == Domain::Entire && is_critical_semilinear(sol.spec, p)) {
    const double nu = sol.spec.dim, lambda = sol.spec.lambda, a = sol.alpha;
    const double scale = std::pow(a, 4.0 / (nu - 2.0)) / (lambda * nu * (nu - 2.0));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < radial.rows() && radial(i, 0) <= 100.0; ++i) {
      const double r0 = radial(i, 0);
      const double exact = a * std::pow(1.0 + scale * r0 * r0, -(nu - 2.0) / 2.0);
      worst = std::max(worst, std::abs(radial(i, 1) - exact) / exact);
    }
    add_audit(r, "closed_form_bubble_rel_error", worst, 1e-6, worst <= 1e-6);
    r.notes.push_back(worst <= 1e-6
                          ? "critical exponent: matches the closed-form bubble on r <= 100"
                          : "critical exponent: deviates from the closed-form bubble");
  }

  if (sol.domain == Domain::Entire && sol.spec.branch == Branch::Semilinear) {
    try {
      const double res = std::abs(pohozaev_residual(sol, std::min(1.0, radial(radial.rows() - 1, 0))));
      add_audit(r, "pohozaev_residual_r1", res, 1e-6, res <= 1e-6);
    } catch (const std::exception& e) {
      r.notes.push_back(std::string("pohozaev audit skipped: ") + e.what());
    }
  }

  double energy_err = 0.0;
  for (const auto& seg : energy_dissipation_audit(sol.phase, sol.spec, p))
    energy_err = std::max(energy_err, seg.error);
  add_audit(r, "energy_dissipation_max_error", energy_err, 1e-6, energy_err <= 1e-6);

  const CrossingAudit c = audit_crossings(sol);
  const double margin = std::isfinite(c.above_margin) ? c.above_margin : 0.0;
  add_audit(r, "c_from_above_margin", margin, -1e-8, margin > -1e-8);
  if (sol.classification.tag == DecayTag::FiniteZero)
    add_audit(r, "x_axis_crossings", c.x_axis, 1.0, c.x_axis == 1);

  if (sol.domain == Domain::Exterior) {
    const double inc = max_e1_increase(sol);
    add_audit(r, "e1_max_increase_on_rising_arc", inc, 1e-8, inc <= 1e-8);
  }
}

void solution_fits(RunReport& r, const RadialSolution& sol) {
  try {
    if (sol.classification.tag == DecayTag::Fast)
      r.fits.push_back({"fast_decay", fit_fast_decay(sol.radial_table(), decay_dimension(sol.spec))});
    else if (sol.classification.tag == DecayTag::Slow)
      r.fits.push_back({"slow_decay", fit_slow_decay(sol.phase_table(), sol.classification.c_star)});
  } catch (const std::exception& e) {
    r.notes.push_back(std::string("decay fit skipped: ") + e.what());
  }
}

void write_trajectories(RunReport& r, const RunConfig& cfg, const RadialSolution& sol) {
  if (cfg.out.empty()) return;
  if (wants(cfg, "csv")) {
    const std::string radial = cfg.out + ".radial.csv", phase = cfg.out + ".phase.csv";
    write_with(radial, [&](std::ostream& os) { write_trajectory_csv(os, sol, false); });
    write_with(phase, [&](std::ostream& os) { write_trajectory_csv(os, sol, true); });
    r.files.push_back(radial);
    r.files.push_back(phase);
  }
  if (wants(cfg, "svg")) {
    const std::string svg = cfg.out + ".phase.svg";
    write_text(svg, phase_plane_svg(sol));
    r.files.push_back(svg);
  }
}

}  // namespace

RunReport cmd_solve(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  validate(cfg, Command::Solve);
  RunReport r = start_report("solve", cfg);
  RadialSolution sol = shoot(cfg);
  sol.domain = cfg.domain == Domain::Annulus ? Domain::Annulus : sol.domain;
  fill_solution(r, sol);
  if (cfg.domain == Domain::Annulus && r.exit_code == kExitOk &&
      sol.classification.tag != DecayTag::FiniteZero) {
    r.notes.push_back("no outer zero: the solution stays positive, so no annulus A(1, rho) exists");
    r.exit_code = kExitUndetermined;
  }
  solution_audits(r, sol);
  solution_fits(r, sol);
  write_trajectories(r, cfg, sol);
  finish(r, cfg, t0);
  return r;
}

RunReport cmd_critical_exponent(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  validate(cfg, Command::CriticalExponent);
  RunReport r = start_report("critical-exponent", cfg);
  const OperatorSpec spec = cfg.spec();
  const BisectionResult b = find_critical_exponent(spec, cfg.solve_opts());
  r.bisection = b;

  // Sanity comparison with the known bounds on the critical exponent.
  const auto ref = reference_exponents(spec);
  double lo = 0.0, hi = 0.0;
  switch (spec.branch) {
    case Branch::Semilinear:
      lo = hi = ref.sobolev;
      break;
    case Branch::PucciPlus:
      lo = std::max(ref.sobolev, ref.serrin_plus);
      hi = ref.critical_plus;
      break;
    case Branch::PucciMinus:
      lo = ref.critical_minus;
      hi = ref.sobolev;
      break;
  }
  if (spec.branch == Branch::Semilinear) {
    const double dev = std::abs(b.value - ref.sobolev);
    add_audit(r, "distance_to_sobolev_exponent", dev, 1e-3, dev <= 1e-3);
  } else {
    const double margin = std::min(b.value - lo, hi - b.value);
    add_audit(r, "margin_inside_reference_bounds", margin, 0.0, margin > 0.0);
    r.notes.push_back("reference bounds (" + format_double(lo) + ", " + format_double(hi) + ")");
  }
  r.notes.push_back("certificates: lo endpoint " + std::string(to_string(b.lo_class.tag)) +
                    ", hi endpoint " + std::string(to_string(b.hi_class.tag)));
  finish(r, cfg, t0);
  return r;
}

RunReport cmd_alpha_star(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  validate(cfg, Command::AlphaStar);
  RunReport r = start_report("alpha-star", cfg);
  const BisectionResult b = find_alpha_star(cfg.spec(), *cfg.p, cfg.solve_opts());
  r.bisection = b;
  if (b.value == 0.0)
    r.notes.push_back("alpha* = 0: every probe down to alpha = 1e-8 reached a finite zero");
  else
    r.notes.push_back("certificates: lo endpoint " + std::string(to_string(b.lo_class.tag)) +
                      ", hi endpoint " + std::string(to_string(b.hi_class.tag)));
  finish(r, cfg, t0);
  return r;
}

RunReport cmd_phase_plane(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  validate(cfg, Command::PhasePlane);
  RunReport r = start_report("phase-plane", cfg);
  const RadialSolution sol = shoot(cfg);
  fill_solution(r, sol);
  if (!cfg.out.empty()) {
    if (wants(cfg, "csv")) {
      const std::string phase = cfg.out + ".phase.csv", curves = cfg.out + ".curves.csv";
      write_with(phase, [&](std::ostream& os) { write_trajectory_csv(os, sol, true); });
      double x_max = 0.0;
      for (const auto& s : sol.phase.samples) x_max = std::max(x_max, s.y[0]);
      const double c_star = equilibrium_c_star(sol.spec, sol.p);
      if (std::isfinite(c_star)) x_max = std::max(x_max, c_star);
      if (!(x_max > 0.0)) x_max = 1.0;
      write_with(curves,
                 [&](std::ostream& os) { write_curves_csv(os, sol.spec, sol.p, 1.1 * x_max); });
      r.files.push_back(phase);
      r.files.push_back(curves);
    }
    if (wants(cfg, "svg")) {
      const std::string svg = cfg.out + ".phase.svg";
      write_text(svg, phase_plane_svg(sol));
      r.files.push_back(svg);
    }
  }
  finish(r, cfg, t0);
  return r;
}

namespace {

/// Flags that mirror the config keys. Each given flag overrides the config file.
void add_config_flags(CLI::App* sub, std::string& config_path, json& overrides) {
  sub->add_option("--config", config_path, "JSON run configuration; flags override it");
  const auto real = [&](const char* flag, const char* key, const char* help) {
    sub->add_option_function<double>(
        flag, [&overrides, key](double v) { overrides[key] = v; }, help);
  };
  const auto text = [&](const char* flag, const char* key, const char* help) {
    sub->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
  };
  text("--op", "op", "operator branch: plus, minus or semilinear");
  real("--lambda", "lambda", "lower ellipticity constant");
  real("--Lambda", "Lambda", "upper ellipticity constant");
  real("--dim", "dim", "dimension N (real nu > 2 for semilinear)");
  real("--p", "p", "exponent p > 1");
  real("--alpha", "alpha", "shooting parameter");
  text("--domain", "domain", "exterior, entire or annulus");
  real("--rel-tol", "rel_tol", "integrator relative tolerance");
  real("--abs-tol", "abs_tol", "integrator absolute tolerance");
  real("--max-step", "max_step", "largest step");
  real("--event-tol", "event_tol", "event localization tolerance");
  real("--horizon", "horizon", "first EF-time horizon");
  real("--max-horizon", "max_horizon", "largest EF-time horizon");
  sub->add_option_function<long>(
      "--max-steps", [&overrides](long v) { overrides["max_steps"] = v; }, "step budget");
  real("--tail-fraction", "tail_fraction", "tail share used by the classifier");
  real("--slow-radius", "slow_radius", "slow decay acceptance radius around c*");
  sub->add_option_function<int>(
      "--min-c-crossings", [&overrides](int v) { overrides["min_c_crossings"] = v; },
      "crossings of C needed for pseudo-slow");
  real("--ratio-lo", "ratio_lo", "lower amplitude ratio bound for pseudo-slow");
  real("--ratio-hi", "ratio_hi", "upper amplitude ratio bound for pseudo-slow");
  real("--min-amplitude", "min_amplitude", "smallest oscillation treated as pseudo-slow");
  real("--fast-slope-tol", "fast_slope_tol", "slope tolerance for fast decay");
  real("--fast-floor", "fast_floor", "radius of the ball around the origin");
  real("--alpha-tol", "alpha_tol", "alpha bisection width");
  real("--p-tol", "p_tol", "p bisection width");
  text("--out", "out", "output path prefix");
  sub->add_option_function<std::vector<std::string>>(
         "--format", [&overrides](const std::vector<std::string>& v) { overrides["formats"] = v; },
         "output formats: json, csv, svg")
      ->delimiter(',');
}

RunConfig load_config(const std::string& path, const json& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw InvalidSpec("cannot read config file '" + path + "'");
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw InvalidSpec("config file '" + path + "' is not valid JSON: " + e.what());
    }
    cfg = config_from_json(j, cfg);
  }
  return config_from_json(overrides, cfg);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Positive radial solutions of -M(D^2 u) = u^p: shooting, classification, audits"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  struct Sub {
    explicit Sub(CLI::App* a) : app(a) {}
    CLI::App* app;
    std::string config_path;
    json overrides = json::object();
  };
  Sub solve{app.add_subcommand("solve", "shoot one solution and classify it")};
  Sub crit{app.add_subcommand("critical-exponent", "bisect for the critical exponent")};
  Sub astar{app.add_subcommand("alpha-star", "bisect for the initial-slope threshold")};
  Sub phase{app.add_subcommand("phase-plane", "trajectory, L, C and equilibria as data and SVG")};
  for (Sub* s : {&solve, &crit, &astar, &phase}) add_config_flags(s->app, s->config_path, s->overrides);

  VerifyOptions vopts;
  bool verify_json = false;
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--only", vopts.only, "criterion ids or numbers")->delimiter(',');
  verify->add_option("--tol-scale", vopts.tol_scale, "multiplies every integrator tolerance");
  verify->add_option("--threads", vopts.threads, "worker cap (default PUCCI_RADIAL_THREADS)");
  verify->add_option("--out-dir", vopts.out_dir, "directory for per-criterion JSON");
  verify->add_flag("--json", verify_json, "print the aggregate result as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Help requested on a subcommand lands here too.
    if (e.get_exit_code() == 0) {
      std::ostringstream help;
      app.exit(e, help, help);
      out << help.str();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (verify->parsed()) {
      const auto results = run_verify(vopts);
      bool all = true;
      json agg = json::array();
      for (const auto& r : results) {
        all = all && r.passed;
        if (verify_json)
          agg.push_back(to_json(r));
        else
          out << format_result_line(r) << '\n';
      }
      if (verify_json)
        out << agg.dump(2) << '\n';
      else
        out << (all ? "all " : "") << std::count_if(results.begin(), results.end(),
                                                    [](const auto& r) { return r.passed; })
            << "/" << results.size() << " criteria passed\n";
      return all ? kExitOk : kExitVerifyFailed;
    }

    RunReport report;
    if (solve.app->parsed())
      report = cmd_solve(load_config(solve.config_path, solve.overrides));
    else if (crit.app->parsed())
      report = cmd_critical_exponent(load_config(crit.config_path, crit.overrides));
    else if (astar.app->parsed())
      report = cmd_alpha_star(load_config(astar.config_path, astar.overrides));
    else
      report = cmd_phase_plane(load_config(phase.config_path, phase.overrides));
    out << to_json(report).dump(2) << '\n';
    return report.exit_code;
  } catch (const std::invalid_argument& e) {  // InvalidSpec and bad verify selections
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ShootingError& e) {
    err << "undetermined: " << e.what() << '\n';
    return kExitUndetermined;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace pucci

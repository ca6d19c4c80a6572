#include "pucci/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace pucci {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json opt_to_json(const std::optional<double>& v) {
  return v ? finite_or_null(*v) : json(nullptr);
}

std::optional<double> opt_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{
      "op",           "lambda",        "Lambda",        "dim",           "p",
      "alpha",        "domain",        "rel_tol",       "abs_tol",       "max_step",
      "event_tol",    "horizon",       "max_horizon",   "max_steps",     "tail_fraction",
      "slow_radius",  "min_c_crossings", "ratio_lo",    "ratio_hi",      "min_amplitude",
      "fast_slope_tol", "fast_floor",  "alpha_tol",     "p_tol",         "out",
      "formats"};
  return keys;
}

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("config key '") + key + "' has the wrong type: " + e.what());
  }
}

void read_opt(const json& j, const char* key, std::optional<double>& dst) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    dst.reset();
    return;
  }
  double v = 0.0;
  read(j, key, v);
  dst = v;
}

}  // namespace

SolveOpts RunConfig::solve_opts() const {
  SolveOpts o;
  o.integrator = integrator;
  o.classify = classify;
  o.max_horizon = max_horizon;
  o.alpha_tol = alpha_tol;
  o.p_tol = p_tol;
  return o;
}

RunConfig config_from_json(const json& j, RunConfig cfg) {
  if (!j.is_object()) throw InvalidSpec("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!config_keys().count(key)) throw InvalidSpec("unknown config key '" + key + "'");
  }
  if (j.contains("op")) {
    std::string op;
    read(j, "op", op);
    cfg.branch = branch_from_string(op);
  }
  read(j, "lambda", cfg.lambda);
  read(j, "Lambda", cfg.Lambda);
  read(j, "dim", cfg.dim);
  read_opt(j, "p", cfg.p);
  read_opt(j, "alpha", cfg.alpha);
  if (j.contains("domain")) {
    std::string d;
    read(j, "domain", d);
    cfg.domain = domain_from_string(d);
  }
  read(j, "rel_tol", cfg.integrator.rel_tol);
  read(j, "abs_tol", cfg.integrator.abs_tol);
  read(j, "max_step", cfg.integrator.max_step);
  read(j, "event_tol", cfg.integrator.event_tol);
  read(j, "horizon", cfg.integrator.horizon);
  read(j, "max_steps", cfg.integrator.max_steps);
  read(j, "max_horizon", cfg.max_horizon);
  read(j, "tail_fraction", cfg.classify.tail_fraction);
  read(j, "slow_radius", cfg.classify.slow_radius);
  read(j, "min_c_crossings", cfg.classify.min_c_crossings);
  read(j, "ratio_lo", cfg.classify.ratio_lo);
  read(j, "ratio_hi", cfg.classify.ratio_hi);
  read(j, "min_amplitude", cfg.classify.min_amplitude);
  read(j, "fast_slope_tol", cfg.classify.fast_slope_tol);
  read(j, "fast_floor", cfg.classify.fast_floor);
  read(j, "alpha_tol", cfg.alpha_tol);
  read(j, "p_tol", cfg.p_tol);
  read(j, "out", cfg.out);
  read(j, "formats", cfg.formats);
  return cfg;
}

json to_json(const RunConfig& c) {
  return json{{"op", to_string(c.branch)},
              {"lambda", c.lambda},
              {"Lambda", c.Lambda},
              {"dim", c.dim},
              {"p", opt_to_json(c.p)},
              {"alpha", opt_to_json(c.alpha)},
              {"domain", to_string(c.domain)},
              {"rel_tol", c.integrator.rel_tol},
              {"abs_tol", c.integrator.abs_tol},
              {"max_step", c.integrator.max_step},
              {"event_tol", c.integrator.event_tol},
              {"horizon", c.integrator.horizon},
              {"max_steps", c.integrator.max_steps},
              {"max_horizon", c.max_horizon},
              {"tail_fraction", c.classify.tail_fraction},
              {"slow_radius", c.classify.slow_radius},
              {"min_c_crossings", c.classify.min_c_crossings},
              {"ratio_lo", c.classify.ratio_lo},
              {"ratio_hi", c.classify.ratio_hi},
              {"min_amplitude", c.classify.min_amplitude},
              {"fast_slope_tol", c.classify.fast_slope_tol},
              {"fast_floor", c.classify.fast_floor},
              {"alpha_tol", c.alpha_tol},
              {"p_tol", c.p_tol},
              {"out", c.out},
              {"formats", c.formats}};
}

void validate(const RunConfig& cfg, Command cmd) {
  const auto fail = [](const std::string& msg) { throw InvalidSpec(msg); };
  cfg.spec().check();
  const auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(name) + " must be a finite positive number");
  };
  positive(cfg.integrator.rel_tol, "rel_tol");
  positive(cfg.integrator.abs_tol, "abs_tol");
  positive(cfg.integrator.max_step, "max_step");
  positive(cfg.integrator.event_tol, "event_tol");
  positive(cfg.integrator.horizon, "horizon");
  positive(cfg.alpha_tol, "alpha_tol");
  positive(cfg.p_tol, "p_tol");
  positive(cfg.classify.slow_radius, "slow_radius");
  positive(cfg.classify.min_amplitude, "min_amplitude");
  positive(cfg.classify.fast_slope_tol, "fast_slope_tol");
  positive(cfg.classify.fast_floor, "fast_floor");
  if (cfg.integrator.max_steps <= 0) fail("max_steps must be positive");
  if (cfg.max_horizon < cfg.integrator.horizon) fail("max_horizon must be at least horizon");
  if (!(cfg.classify.tail_fraction > 0.0 && cfg.classify.tail_fraction <= 1.0))
    fail("tail_fraction must lie in (0, 1]");
  if (!(cfg.classify.ratio_lo < 1.0 && 1.0 < cfg.classify.ratio_hi))
    fail("ratio_lo < 1 < ratio_hi is required");
  if (cfg.classify.min_c_crossings < 1) fail("min_c_crossings must be at least 1");
  for (const auto& f : cfg.formats)
    if (f != "json" && f != "csv" && f != "svg")
      fail("unknown output format '" + f + "' (expected json, csv or svg)");

  const auto need_p = [&] {
    if (!cfg.p) fail("--p is required for this command");
    if (!(*cfg.p > 1.0) || !std::isfinite(*cfg.p)) fail("p must be a finite value > 1");
  };
  const auto need_alpha = [&] {
    if (!cfg.alpha) fail("--alpha is required for this command");
    if (!(*cfg.alpha > 0.0) || !std::isfinite(*cfg.alpha)) fail("alpha must be a finite positive number");
  };
  switch (cmd) {
    case Command::Solve:
    case Command::PhasePlane:
      need_p();
      need_alpha();
      break;
    case Command::AlphaStar:
      need_p();
      if (cfg.alpha) fail("alpha-star searches over alpha; do not pass --alpha");
      break;
    case Command::CriticalExponent:
      if (cfg.p) fail("critical-exponent searches over p; do not pass --p");
      if (cfg.alpha) fail("critical-exponent uses alpha = 1 by scaling; do not pass --alpha");
      break;
  }
}

json to_json(const DecayClass& dc) {
  return json{{"tag", to_string(dc.tag)},       {"rho", dc.rho},
              {"du_at_rho", dc.du_at_rho},      {"C", dc.C},
              {"rate", dc.rate},                {"slope", dc.slope},
              {"c_star", dc.c_star},            {"deviation", dc.deviation},
              {"inf_est", dc.inf_est},          {"sup_est", dc.sup_est},
              {"crossings", dc.crossings},      {"amplitude_ratio", dc.amplitude_ratio},
              {"horizon", dc.horizon}};
}

DecayClass decay_class_from_json(const json& j) {
  DecayClass dc;
  dc.tag = decay_tag_from_string(j.at("tag").get<std::string>());
  dc.rho = j.at("rho").get<double>();
  dc.du_at_rho = j.at("du_at_rho").get<double>();
  dc.C = j.at("C").get<double>();
  dc.rate = j.at("rate").get<double>();
  dc.slope = j.at("slope").get<double>();
  dc.c_star = j.at("c_star").get<double>();
  dc.deviation = j.at("deviation").get<double>();
  dc.inf_est = j.at("inf_est").get<double>();
  dc.sup_est = j.at("sup_est").get<double>();
  dc.crossings = j.at("crossings").get<int>();
  dc.amplitude_ratio = j.at("amplitude_ratio").get<double>();
  dc.horizon = j.at("horizon").get<double>();
  return dc;
}

json to_json(const BisectionResult& b) {
  return json{{"value", b.value},         {"lo", b.lo},
              {"hi", b.hi},               {"lo_class", to_json(b.lo_class)},
              {"hi_class", to_json(b.hi_class)}, {"iterations", b.iterations},
              {"tol_used", b.tol_used}};
}

BisectionResult bisection_from_json(const json& j) {
  BisectionResult b;
  b.value = j.at("value").get<double>();
  b.lo = j.at("lo").get<double>();
  b.hi = j.at("hi").get<double>();
  b.lo_class = decay_class_from_json(j.at("lo_class"));
  b.hi_class = decay_class_from_json(j.at("hi_class"));
  b.iterations = j.at("iterations").get<int>();
  b.tol_used = j.at("tol_used").get<double>();
  return b;
}

json to_json(const RunReport& r) {
  json j{{"schema_version", r.schema_version},
         {"tool_version", r.tool_version},
         {"command", r.command},
         {"inputs", r.inputs},
         {"constants", r.constants},
         {"landmarks", nullptr},
         {"classification", nullptr},
         {"fits", json::array()},
         {"bisection", nullptr},
         {"audits", json::array()},
         {"notes", r.notes},
         {"files", r.files},
         {"wall_time_s", r.wall_time},
         {"exit_code", r.exit_code}};
  if (r.landmarks)
    j["landmarks"] = json{{"tau", opt_to_json(r.landmarks->tau)},
                          {"sigma", opt_to_json(r.landmarks->sigma)},
                          {"rho", opt_to_json(r.landmarks->rho)}};
  if (r.classification) j["classification"] = to_json(*r.classification);
  for (const auto& f : r.fits)
    j["fits"].push_back(json{{"name", f.name},
                             {"estimate", finite_or_null(f.fit.estimate)},
                             {"window_lo", f.fit.window_lo},
                             {"window_hi", f.fit.window_hi},
                             {"residual", finite_or_null(f.fit.residual)},
                             {"slope", finite_or_null(f.fit.slope)},
                             {"converged", f.fit.converged}});
  if (r.bisection) j["bisection"] = to_json(*r.bisection);
  for (const auto& a : r.audits)
    j["audits"].push_back(json{{"name", a.name},
                               {"value", finite_or_null(a.value)},
                               {"tolerance", a.tolerance},
                               {"passed", a.passed}});
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.schema_version = j.at("schema_version").get<std::string>();
  if (r.schema_version != kSchemaVersion)
    throw std::invalid_argument("unsupported report schema_version '" + r.schema_version + "'");
  r.tool_version = j.at("tool_version").get<std::string>();
  r.command = j.at("command").get<std::string>();
  r.inputs = j.at("inputs");
  r.constants = j.at("constants");
  if (!j.at("landmarks").is_null()) {
    const auto& l = j.at("landmarks");
    r.landmarks = Landmarks{opt_from_json(l.at("tau")), opt_from_json(l.at("sigma")),
                            opt_from_json(l.at("rho"))};
  }
  if (!j.at("classification").is_null())
    r.classification = decay_class_from_json(j.at("classification"));
  const auto num = [](const json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  for (const auto& f : j.at("fits")) {
    NamedFit nf;
    nf.name = f.at("name").get<std::string>();
    nf.fit.estimate = num(f.at("estimate"));
    nf.fit.window_lo = f.at("window_lo").get<double>();
    nf.fit.window_hi = f.at("window_hi").get<double>();
    nf.fit.residual = num(f.at("residual"));
    nf.fit.slope = num(f.at("slope"));
    nf.fit.converged = f.at("converged").get<bool>();
    r.fits.push_back(nf);
  }
  if (!j.at("bisection").is_null()) r.bisection = bisection_from_json(j.at("bisection"));
  for (const auto& a : j.at("audits"))
    r.audits.push_back(AuditResult{a.at("name").get<std::string>(), num(a.at("value")),
                                   a.at("tolerance").get<double>(), a.at("passed").get<bool>()});
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.files = j.at("files").get<std::vector<std::string>>();
  r.wall_time = j.at("wall_time_s").get<double>();
  r.exit_code = j.at("exit_code").get<int>();
  return r;
}

json named_constants(const OperatorSpec& spec, std::optional<double> p) {
  const auto dims = effective_dimensions(spec);
  const auto ref = reference_exponents(spec);
  json j{{"n_tilde_plus", dims.plus},
         {"n_tilde_minus", dims.minus},
         {"sobolev_exponent", finite_or_null(ref.sobolev)},
         {"serrin_plus", finite_or_null(ref.serrin_plus)},
         {"serrin_minus", finite_or_null(ref.serrin_minus)},
         {"critical_plus", finite_or_null(ref.critical_plus)},
         {"critical_minus", finite_or_null(ref.critical_minus)}};
  if (p) {
    const auto ef = ef_coefficients(spec, *p);
    j["p"] = *p;
    j["k"] = 2.0 / (*p - 1.0);
    j["decay_dimension"] = decay_dimension(spec);
    j["c_star"] = finite_or_null(equilibrium_c_star(spec, *p));
    j["lambda_1"] = finite_or_null(fast_rate(spec, *p));
    j["ef"] = json{{"a", ef.a},
                   {"b", ef.b},
                   {"a_tilde_plus", ef.a_tilde_plus},
                   {"b_tilde_plus", ef.b_tilde_plus},
                   {"a_tilde_minus", ef.a_tilde_minus},
                   {"b_tilde_minus", ef.b_tilde_minus}};
  }
  return j;
}

void write_trajectory_csv(std::ostream& os, const RadialSolution& sol, bool phase) {
  const CurveTable table = phase ? sol.phase_table() : sol.radial_table();
  std::vector<int> labels;
  const bool has_phase = !sol.phase.samples.empty();
  if (sol.radial_part) {
    const auto& rs = sol.radial_part->samples;
    const std::size_t n = (phase && has_phase) ? rs.size() - 1 : rs.size();
    for (std::size_t i = 0; i < n; ++i) labels.push_back(rs[i].label);
  }
  const std::size_t skip = (!phase && sol.radial_part && has_phase) ? 1 : 0;
  for (std::size_t i = skip; i < sol.phase.samples.size(); ++i)
    labels.push_back(sol.phase.samples[i].label);

  std::vector<std::string> marks(static_cast<std::size_t>(table.rows()));
  for (const auto& e : sol.phase_events()) {
    const double at = phase ? e.time : std::exp(e.time);
    const double* first = table.col(0).data();
    const double* last = first + table.rows();
    const double* it = std::lower_bound(first, last, at);
    std::size_t idx = static_cast<std::size_t>(it - first);
    if (idx == marks.size()) --idx;
    if (idx > 0 && std::abs(table(static_cast<Eigen::Index>(idx) - 1, 0) - at) <
                       std::abs(table(static_cast<Eigen::Index>(idx), 0) - at))
      --idx;
    if (!marks[idx].empty()) marks[idx] += ';';
    marks[idx] += to_string(e.kind);
  }

  os << "t_or_r,u_or_x,derivative,regime,nearest_event\n";
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    const auto li = static_cast<std::size_t>(i);
    os << format_double(table(i, 0)) << ',' << format_double(table(i, 1)) << ','
       << format_double(table(i, 2)) << ','
       << (li < labels.size() ? to_string(static_cast<Regime>(labels[li])) : "") << ','
       << marks[li] << '\n';
  }
}

void write_curves_csv(std::ostream& os, const OperatorSpec& spec, double p, double x_max,
                      int samples) {
  os << "curve,x,value\n";
  for (const char* name : {"L", "C"})
    for (int i = 0; i <= samples; ++i) {
      const double x = x_max * i / samples;
      const double v = name[0] == 'L' ? line_L(p, x) : curve_C(spec, p, x);
      os << name << ',' << format_double(x) << ',' << format_double(v) << '\n';
    }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* event_color(EventKind k) {
  switch (k) {
    case EventKind::UZero: return "#d62728";
    case EventKind::CrossL: return "#2ca02c";
    case EventKind::CrossC_FromAbove: return "#9467bd";
    case EventKind::CrossC_FromBelow: return "#8c564b";
    case EventKind::XAxisCross: return "#ff7f0e";
    default: return "#7f7f7f";
  }
}

}  // namespace

std::string phase_plane_svg(const RadialSolution& sol) {
  const CurveTable t = sol.phase_table();
  const double c_star = equilibrium_c_star(sol.spec, sol.p);
  double x_max = std::isfinite(c_star) ? c_star : 0.0;
  double y_min = 0.0, y_max = 0.0;
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    x_max = std::max(x_max, t(i, 1));
    y_min = std::min(y_min, t(i, 2));
    y_max = std::max(y_max, t(i, 2));
  }
  x_max = x_max > 0.0 ? 1.1 * x_max : 1.0;
  const double pad = 0.08 * std::max(y_max - y_min, 1e-12);
  y_min -= pad;
  y_max += pad;
  const double x_min = -0.05 * x_max;

  constexpr double W = 640, H = 480, ml = 60, mr = 20, mt = 30, mb = 50;
  const auto X = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (W - ml - mr); };
  const auto Y = [&](double y) { return H - mb - (y - y_min) / (y_max - y_min) * (H - mt - mb); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\">\n";
  s << "<defs><clipPath id=\"plot\"><rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
    << W - ml - mr << "\" height=\"" << H - mt - mb << "\"/></clipPath></defs>\n";
  s << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
    << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<g clip-path=\"url(#plot)\">\n";
  s << "<line x1=\"" << fmt(X(x_min)) << "\" y1=\"" << fmt(Y(0)) << "\" x2=\"" << fmt(X(x_max))
    << "\" y2=\"" << fmt(Y(0)) << "\" stroke=\"#bbbbbb\"/>\n";
  s << "<line x1=\"" << fmt(X(0)) << "\" y1=\"" << fmt(Y(y_min)) << "\" x2=\"" << fmt(X(0))
    << "\" y2=\"" << fmt(Y(y_max)) << "\" stroke=\"#bbbbbb\"/>\n";

  const auto curve = [&](const char* id, const char* color, auto&& f) {
    s << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-dasharray=\"6 3\" points=\"";
    for (int i = 0; i <= 200; ++i) {
      const double x = x_max * i / 200.0;
      s << fmt(X(x)) << ',' << fmt(Y(std::clamp(f(x), y_min - 10 * pad, y_max + 10 * pad)))
        << (i < 200 ? " " : "");
    }
    s << "\"/>\n";
  };
  curve("L", "#1f77b4", [&](double x) { return line_L(sol.p, x); });
  curve("C", "#e377c2", [&](double x) { return curve_C(sol.spec, sol.p, x); });

  s << "<polyline id=\"trajectory\" fill=\"none\" stroke=\"black\" stroke-width=\"1.2\" points=\"";
  const Eigen::Index stride = std::max<Eigen::Index>(1, t.rows() / 4000);
  for (Eigen::Index i = 0; i < t.rows(); i += stride)
    s << fmt(X(t(i, 1))) << ',' << fmt(Y(t(i, 2))) << ' ';
  if (t.rows() > 0) s << fmt(X(t(t.rows() - 1, 1))) << ',' << fmt(Y(t(t.rows() - 1, 2)));
  s << "\"/>\n";

  for (const auto& e : sol.phase_events())
    s << "<circle cx=\"" << fmt(X(e.state[0])) << "\" cy=\"" << fmt(Y(e.state[1]))
      << "\" r=\"3\" fill=\"" << event_color(e.kind) << "\"><title>" << to_string(e.kind)
      << "</title></circle>\n";
  s << "<rect x=\"" << fmt(X(0) - 4) << "\" y=\"" << fmt(Y(0) - 4)
    << "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"#d62728\"><title>origin</title></rect>\n";
  if (std::isfinite(c_star))
    s << "<rect x=\"" << fmt(X(c_star) - 4) << "\" y=\"" << fmt(Y(0) - 4)
      << "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"#17becf\"><title>c* = "
      << fmt_label(c_star) << "</title></rect>\n";
  s << "</g>\n";

  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"13\">x</text>\n";
  s << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 16 " << H / 2 << ")\">x'</text>\n";
  const auto tick = [&](double x, double y, const char* anchor, double v) {
    s << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_label(v) << "</text>\n";
  };
  tick(X(0), H - mb + 16, "middle", 0.0);
  tick(X(x_max), H - mb + 16, "end", x_max);
  tick(ml - 6, Y(y_min) + 4, "end", y_min);
  tick(ml - 6, Y(y_max) + 4, "end", y_max);
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\">"
    << to_string(sol.spec.branch) << ", p = " << fmt_label(sol.p)
    << ", alpha = " << fmt_label(sol.alpha) << ": " << to_string(sol.classification.tag)
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace pucci

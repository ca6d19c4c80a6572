#include "pucci/shooting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace pucci {

std::string_view to_string(DecayTag tag) {
  switch (tag) {
    case DecayTag::FiniteZero: return "finite_zero";
    case DecayTag::Fast: return "fast";
    case DecayTag::Slow: return "slow";
    case DecayTag::PseudoSlow: return "pseudo_slow";
    case DecayTag::Undetermined: return "undetermined";
  }
  return "?";
}

DecayTag decay_tag_from_string(std::string_view name) {
  for (auto tag : {DecayTag::FiniteZero, DecayTag::Fast, DecayTag::Slow, DecayTag::PseudoSlow,
                   DecayTag::Undetermined})
    if (to_string(tag) == name) return tag;
  throw std::invalid_argument("unknown decay tag '" + std::string(name) + "'");
}

std::string_view to_string(Domain domain) {
  switch (domain) {
    case Domain::Exterior: return "exterior";
    case Domain::Entire: return "entire";
    case Domain::Annulus: return "annulus";
  }
  return "?";
}

Domain domain_from_string(std::string_view name) {
  for (auto d : {Domain::Exterior, Domain::Entire, Domain::Annulus})
    if (to_string(d) == name) return d;
  throw InvalidSpec("unknown domain '" + std::string(name) + "' (expected exterior or entire)");
}

namespace {

double ef_k(double p) { return 2.0 / (p - 1.0); }

void check_problem(const OperatorSpec& spec, double p, double alpha) {
  spec.check();
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidSpec("exponent p must be a finite value > 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidSpec("initial value alpha must be a finite positive number");
}

/// Radial state (r, u, u') -> phase state (x, x').
Vec2 to_phase(double r, const Vec2& y, double p) {
  const double k = ef_k(p);
  const double rk = std::pow(r, k);
  return {rk * y[0], k * rk * y[0] + rk * r * y[1]};
}

enum class RunKind { Classify, Probe };

/// Switched Emden-Fowler system with one fixed branch per segment. Crossings of L
/// and C restart the integration with the branch of the regime being entered.
struct PhaseRun {
  const OperatorSpec& spec;
  double p;
  std::array<BranchCoefficients, 3> coef;
  Regime mode = Regime::Middle;

  PhaseRun(const OperatorSpec& s, double p_)
      : spec(s),
        p(p_),
        coef{branch_coefficients(s, p_, Regime::AboveL), branch_coefficients(s, p_, Regime::Middle),
             branch_coefficients(s, p_, Regime::BelowC)} {}

  /// Integrates in (x, w) with w = x' - k x, mapped back to (x, x') on return.
  /// The linear part of w' cancels exactly, so the sign of w (the sign of u')
  /// stays resolvable where the trajectory hugs L far below double precision of x'.
  Trajectory run(double t0, const Vec2& y0, const IntegratorOpts& iopts, RunKind kind,
                 double fast_floor, bool stop_in_ball) {
    mode = regime_of(spec, p, {t0, y0[0], y0[1]});
    const double k = ef_k(p);
    const double cw = curve_weight(spec) * (spec.dim - 1.0);
    const auto g_L = [](double, const Vec2& z) { return z[1]; };
    const auto g_C = [cw, pp = p](double, const Vec2& z) {
      return z[1] + signed_pow(z[0], pp) / cw;
    };
    const auto g_axis = [k](double, const Vec2& z) { return k * z[0] + z[1]; };

    std::vector<EventSpec> events;
    events.push_back({EventKind::UZero, [](double, const Vec2& z) { return z[0]; }, -1,
                      EventAction::Stop, {}});
    events.push_back({EventKind::CrossL, g_L, 0, EventAction::Restart, [this](const EventRecord& e) {
                        mode = e.direction > 0 ? Regime::AboveL : Regime::Middle;
                      }});
    events.push_back({EventKind::CrossC_FromAbove, g_C, -1, EventAction::Restart,
                      [this](const EventRecord&) { mode = Regime::BelowC; }});
    events.push_back({EventKind::CrossC_FromBelow, g_C, 1, EventAction::Restart,
                      [this](const EventRecord&) { mode = Regime::Middle; }});
    if (kind == RunKind::Probe) {
      events.push_back({EventKind::XAxisCross, g_axis, -1, EventAction::Record, {}});
      // A local minimum of x at x > 0 rules out a finite zero.
      events.push_back({EventKind::XAxisCross, g_axis, 1, EventAction::Stop, {}});
    } else {
      events.push_back({EventKind::XAxisCross, g_axis, 0, EventAction::Record, {}});
      if (stop_in_ball)
        events.push_back({EventKind::EnteredBall,
                          [k, fast_floor](double, const Vec2& z) {
                            return std::hypot(z[0], k * z[0] + z[1]) - fast_floor;
                          },
                          -1, EventAction::Stop, {}});
    }

    const Rhs rhs = [this, k](double, const Vec2& z) -> Vec2 {
      const auto& c = coef[static_cast<std::size_t>(mode)];
      return {k * z[0] + z[1], (c.a - k) * z[1] - signed_pow(z[0], p) / c.weight};
    };
    Trajectory traj = integrate_with_events(rhs, t0, {y0[0], y0[1] - k * y0[0]}, events, iopts,
                                            [this] { return static_cast<int>(mode); });
    for (auto& s : traj.samples) {
      s.y[1] += k * s.y[0];
      s.dy[1] += k * s.dy[0];
    }
    for (auto& e : traj.events) e.state[1] += k * e.state[0];
    return traj;
  }
};

/// Radial segment [delta, 1] of the entire problem.
Trajectory run_radial_segment(const OperatorSpec& spec, double p, double alpha,
                              const SolveOpts& opts, const IntegratorOpts& iopts_in, RunKind kind) {
  const double delta = opts.taylor_delta;
  const double c = spec.branch == Branch::PucciMinus ? spec.Lambda : spec.lambda;
  const double ap = std::pow(alpha, p);
  const Vec2 y0{alpha - ap * delta * delta / (2.0 * c * spec.dim), -ap * delta / (c * spec.dim)};

  IntegratorOpts iopts = iopts_in;
  iopts.horizon = 1.0;
  iopts.checkpoints.clear();
  for (double r : opts.radial_checkpoints)
    if (r > delta && r < 1.0) iopts.checkpoints.push_back(r);

  const double k = ef_k(p);
  std::vector<EventSpec> events;
  events.push_back({EventKind::UZero, [](double, const Vec2& y) { return y[0]; }, -1,
                    EventAction::Stop, {}});
  events.push_back({EventKind::UPrimeZero, [](double, const Vec2& y) { return y[1]; }, 0,
                    EventAction::Restart, {}});
  events.push_back({EventKind::UDoublePrimeZero,
                    [&spec, p](double r, const Vec2& y) {
                      return radial_rhs_extended(spec, p, r, y[0], y[1]);
                    },
                    0, EventAction::Restart, {}});
  const auto g_axis = [k](double r, const Vec2& y) { return k * y[0] + r * y[1]; };
  events.push_back({EventKind::XAxisCross, g_axis, 0, EventAction::Record, {}});
  if (kind == RunKind::Probe)
    events.push_back({EventKind::XAxisCross, g_axis, 1, EventAction::Stop, {}});

  const Rhs rhs = [&spec, p](double r, const Vec2& y) -> Vec2 {
    return {y[1], radial_rhs_extended(spec, p, r, y[0], y[1])};
  };
  const auto labeler = [] { return 0; };
  Trajectory traj = integrate_with_events(rhs, delta, y0, events, iopts, labeler);
  for (auto& s : traj.samples)
    s.label = static_cast<int>(regime_of(spec, p, [&] {
      const Vec2 z = to_phase(s.t, s.y, p);
      return PhasePoint{std::log(s.t), z[0], z[1]};
    }()));
  return traj;
}

bool near_critical(const OperatorSpec& spec, double p, double width) {
  if (spec.branch != Branch::Semilinear) return false;
  const double crit = (spec.dim + 2.0) / (spec.dim - 2.0);
  return std::abs(p - crit) < width;
}

IntegratorOpts phase_opts(const SolveOpts& opts, const OperatorSpec& spec, double p,
                          double horizon) {
  IntegratorOpts iopts = opts.integrator;
  if (near_critical(spec, p, opts.near_critical_tighten)) iopts = iopts.tightened(1e-2);
  iopts.horizon = horizon;
  iopts.checkpoints.clear();
  for (double r : opts.radial_checkpoints)
    if (r > 1.0) iopts.checkpoints.push_back(std::log(r));
  return iopts;
}

/// One shot at a fixed horizon.
RadialSolution shoot(const OperatorSpec& spec, double p, double alpha, Domain domain,
                     const SolveOpts& opts, double horizon, RunKind kind,
                     bool stop_in_ball = true) {
  RadialSolution sol;
  sol.spec = spec;
  sol.p = p;
  sol.alpha = alpha;
  sol.domain = domain;
  sol.horizon_used = horizon;
  const IntegratorOpts iopts = phase_opts(opts, spec, p, horizon);

  Vec2 start{0.0, alpha};
  if (domain == Domain::Entire) {
    IntegratorOpts ropts = opts.integrator;
    if (near_critical(spec, p, opts.near_critical_tighten)) ropts = ropts.tightened(1e-2);
    sol.radial_part = run_radial_segment(spec, p, alpha, opts, ropts, kind);
    const auto& rp = *sol.radial_part;
    if (rp.terminal != Terminal::HorizonReached) return sol;
    start = to_phase(1.0, rp.samples.back().y, p);
  }
  PhaseRun run(spec, p);
  sol.phase = run.run(0.0, start, iopts, kind, opts.classify.fast_floor, stop_in_ball);
  return sol;
}

const Trajectory& terminal_segment(const RadialSolution& sol) {
  if (sol.radial_part && sol.phase.samples.empty()) return *sol.radial_part;
  return sol.phase;
}

bool reached_zero(const RadialSolution& sol) {
  const auto& seg = terminal_segment(sol);
  return seg.terminal == Terminal::EventStop && seg.stop_kind == EventKind::UZero;
}

void fill_landmarks(RadialSolution& sol) {
  const double k = ef_k(sol.p);
  Landmarks lm;
  if (sol.radial_part) {
    if (auto e = sol.radial_part->first(EventKind::UPrimeZero)) lm.tau = e->time;
    if (auto e = sol.radial_part->first(EventKind::UDoublePrimeZero)) lm.sigma = e->time;
  }
  if (!lm.tau)
    if (auto e = sol.phase.first(EventKind::CrossL); e && e->direction < 0) lm.tau = std::exp(e->time);
  if (!lm.sigma)
    if (auto e = sol.phase.first(EventKind::CrossC_FromAbove)) lm.sigma = std::exp(e->time);

  if (reached_zero(sol)) {
    const auto& seg = terminal_segment(sol);
    const auto& last = seg.samples.back();
    DecayClass dc;
    dc.tag = DecayTag::FiniteZero;
    if (&seg == &sol.phase) {
      dc.rho = std::exp(last.t);
      dc.du_at_rho = last.y[1] * std::exp(-(k + 1.0) * last.t);
    } else {
      dc.rho = last.t;
      dc.du_at_rho = last.y[1];
    }
    lm.rho = dc.rho;
    sol.classification = dc;
  }
  sol.landmarks = lm;
}

RadialSolution solve_classified(const OperatorSpec& spec, double p, double alpha, Domain domain,
                                const SolveOpts& opts) {
  check_problem(spec, p, alpha);
  double horizon = opts.integrator.horizon;
  if (!(horizon > 0.0)) throw InvalidSpec("horizon must be positive");
  const double max_horizon = std::max(opts.max_horizon, horizon);
  bool stop_in_ball = true;
  while (true) {
    RadialSolution sol =
        shoot(spec, p, alpha, domain, opts, horizon, RunKind::Classify, stop_in_ball);
    fill_landmarks(sol);
    if (sol.classification.tag == DecayTag::FiniteZero) return sol;
    if (sol.numerical_failure()) {
      sol.classification = DecayClass{};
      sol.classification.horizon = horizon;
      return sol;
    }
    sol.classification = classify_omega_limit(sol.phase, spec, p, opts.classify);
    if (sol.classification.tag == DecayTag::Undetermined &&
        sol.phase.stop_kind == EventKind::EnteredBall) {
      // Passed close to the origin without settling on the fast direction: a
      // near-threshold shot. Follow it past the ball.
      stop_in_ball = false;
      continue;
    }
    if (sol.classification.tag != DecayTag::Undetermined || horizon * 2.0 > max_horizon * (1 + 1e-12))
      return sol;
    horizon *= 2.0;
  }
}

double ls_slope(const std::vector<double>& s, const std::vector<double>& v) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(s.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    A(static_cast<Eigen::Index>(i), 0) = 1.0;
    A(static_cast<Eigen::Index>(i), 1) = s[i];
    b[static_cast<Eigen::Index>(i)] = v[i];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  return coef[1];
}

}  // namespace

bool RadialSolution::numerical_failure() const {
  const auto failed = [](const Trajectory& t) {
    return t.terminal == Terminal::StepFailure || t.terminal == Terminal::MaxStepsExceeded;
  };
  if (radial_part && failed(*radial_part)) return true;
  return !phase.samples.empty() && failed(phase);
}

CurveTable RadialSolution::radial_table() const {
  const double k = ef_k(p);
  std::vector<std::array<double, 4>> rows;
  if (radial_part)
    for (const auto& s : radial_part->samples) rows.push_back({s.t, s.y[0], s.y[1], s.dy[1]});
  const std::size_t skip = radial_part && !phase.samples.empty() ? 1 : 0;
  for (std::size_t i = skip; i < phase.samples.size(); ++i) {
    const auto& s = phase.samples[i];
    const double r = std::exp(s.t);
    const double rk = std::exp(-k * s.t);
    const double u = rk * s.y[0];
    const double du = rk / r * (s.y[1] - k * s.y[0]);
    const double ddu = rk / (r * r) * (s.dy[1] - (2.0 * k + 1.0) * s.y[1] + k * (k + 1.0) * s.y[0]);
    rows.push_back({r, u, du, ddu});
  }
  CurveTable out(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < 4; ++j) out(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return out;
}

CurveTable RadialSolution::phase_table() const {
  const double k = ef_k(p);
  std::vector<std::array<double, 4>> rows;
  if (radial_part) {
    const auto& rs = radial_part->samples;
    const std::size_t n = phase.samples.empty() ? rs.size() : rs.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = rs[i];
      const double r = s.t;
      const double rk = std::pow(r, k);
      const double x = rk * s.y[0];
      const double dx = k * x + rk * r * s.y[1];
      const double ddx = k * dx + (k + 1.0) * rk * r * s.y[1] + rk * r * r * s.dy[1];
      rows.push_back({std::log(r), x, dx, ddx});
    }
  }
  for (const auto& s : phase.samples) rows.push_back({s.t, s.y[0], s.y[1], s.dy[1]});
  CurveTable out(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < 4; ++j) out(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return out;
}

std::vector<EventRecord> RadialSolution::phase_events() const {
  std::vector<EventRecord> out;
  if (radial_part) {
    for (const auto& e : radial_part->events) {
      EventRecord m = e;
      m.time = std::log(e.time);
      m.state = to_phase(e.time, e.state, p);
      switch (e.kind) {
        case EventKind::UPrimeZero: m.kind = EventKind::CrossL; break;
        case EventKind::UDoublePrimeZero:
          m.kind = e.direction > 0 ? EventKind::CrossC_FromAbove : EventKind::CrossC_FromBelow;
          m.direction = -e.direction;
          break;
        default: break;
      }
      out.push_back(m);
    }
  }
  out.insert(out.end(), phase.events.begin(), phase.events.end());
  return out;
}

DecayClass classify_omega_limit(const Trajectory& phase, const OperatorSpec& spec, double p,
                                const ClassifyOpts& opts) {
  if (phase.samples.empty()) throw std::invalid_argument("empty phase trajectory");
  if (phase.terminal == Terminal::EventStop && phase.stop_kind == EventKind::UZero)
    throw std::invalid_argument(
        "trajectory reached u = 0; it is FiniteZero and has no omega-limit to classify");

  const double t0 = phase.start();
  const double t1 = phase.end();
  const double k = ef_k(p);
  DecayClass dc;
  dc.horizon = t1 - t0;

  if (phase.terminal == Terminal::EventStop && phase.stop_kind == EventKind::EnteredBall) {
    const double lo = t1 - std::log(10.0);
    std::vector<double> ts, lu;
    bool monotone = lo >= t0;
    for (const auto& s : phase.samples) {
      if (s.t < lo) continue;
      if (!(s.y[0] > 0.0) || !(s.y[1] < 0.0)) monotone = false;
      if (s.y[0] > 0.0) {
        ts.push_back(s.t);
        lu.push_back(std::log(s.y[0]) - k * s.t);
      }
    }
    if (monotone && ts.size() >= 3) {
      const double d = decay_dimension(spec);
      const double slope = ls_slope(ts, lu);
      if (std::abs(slope + (d - 2.0)) < opts.fast_slope_tol) {
        const auto& last = phase.samples.back();
        dc.tag = DecayTag::Fast;
        dc.slope = slope;
        dc.rate = fast_rate(spec, p);
        dc.C = std::exp((d - 2.0 - k) * last.t) * last.y[0];
        dc.horizon = 0.0;
        return dc;
      }
    }
    return dc;
  }
  if (phase.terminal != Terminal::HorizonReached) return dc;

  const double c_star = equilibrium_c_star(spec, p);
  const double tail_lo = t1 - opts.tail_fraction * (t1 - t0);
  if (std::isfinite(c_star)) {
    double dev = 0.0;
    for (const auto& s : phase.samples)
      if (s.t >= tail_lo) dev = std::max(dev, std::hypot(s.y[0] - c_star, s.y[1]));
    if (dev < opts.slow_radius) {
      dc = DecayClass{};
      dc.tag = DecayTag::Slow;
      dc.c_star = c_star;
      dc.deviation = dev;
      return dc;
    }

    const int crossings = static_cast<int>(phase.count(EventKind::CrossC_FromAbove) +
                                           phase.count(EventKind::CrossC_FromBelow));
    std::vector<double> maxima;
    for (const auto& e : phase.events)
      if (e.kind == EventKind::XAxisCross && e.direction < 0) maxima.push_back(e.state[0] - c_star);
    if (crossings >= opts.min_c_crossings && maxima.size() >= 2) {
      const double last = maxima.back();
      const double prev = maxima[maxima.size() - 2];
      const double ratio = last / prev;
      if (last >= opts.min_amplitude && prev > 0.0 && ratio >= opts.ratio_lo &&
          ratio <= opts.ratio_hi) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& s : phase.samples)
          if (s.t >= tail_lo) {
            lo = std::min(lo, s.y[0]);
            hi = std::max(hi, s.y[0]);
          }
        dc = DecayClass{};
        dc.tag = DecayTag::PseudoSlow;
        dc.c_star = c_star;
        dc.inf_est = lo;
        dc.sup_est = hi;
        dc.crossings = crossings;
        dc.amplitude_ratio = ratio;
        return dc;
      }
    }
  }
  return dc;
}

RadialSolution solve_exterior(const OperatorSpec& spec, double p, double alpha,
                              const SolveOpts& opts) {
  return solve_classified(spec, p, alpha, Domain::Exterior, opts);
}

RadialSolution solve_entire(const OperatorSpec& spec, double p, double alpha,
                            const SolveOpts& opts) {
  return solve_classified(spec, p, alpha, Domain::Entire, opts);
}

Membership probe_membership(const OperatorSpec& spec, double p, double alpha, Domain domain,
                            const SolveOpts& opts) {
  check_problem(spec, p, alpha);
  if (domain == Domain::Annulus) domain = Domain::Exterior;
  double horizon = opts.integrator.horizon;
  const double max_horizon = std::max(opts.max_horizon, horizon);
  while (true) {
    RadialSolution sol = shoot(spec, p, alpha, domain, opts, horizon, RunKind::Probe);
    if (sol.numerical_failure()) {
      std::ostringstream msg;
      msg << "integration failed while probing p=" << p << ", alpha=" << alpha;
      throw ShootingError(msg.str());
    }
    if (reached_zero(sol)) return Membership::InD;
    const auto& seg = terminal_segment(sol);
    if (seg.terminal == Terminal::EventStop && seg.stop_kind == EventKind::XAxisCross)
      return Membership::NotInD;
    const DecayClass dc = classify_omega_limit(sol.phase, spec, p, opts.classify);
    if (dc.tag == DecayTag::Slow || dc.tag == DecayTag::PseudoSlow) return Membership::NotInD;
    if (horizon * 2.0 > max_horizon * (1 + 1e-12)) return Membership::Unknown;
    horizon *= 2.0;
  }
}

namespace {

bool member_or_throw(const OperatorSpec& spec, double p, double alpha, Domain domain,
                     const SolveOpts& opts) {
  const Membership m = probe_membership(spec, p, alpha, domain, opts);
  if (m == Membership::Unknown) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "membership undetermined at p=" << p << ", alpha=" << alpha << " within horizon "
        << opts.max_horizon << "; increase max_horizon";
    throw ShootingError(msg.str());
  }
  return m == Membership::InD;
}

SolveOpts tightened(const SolveOpts& opts) {
  SolveOpts out = opts;
  out.integrator = opts.integrator.tightened(1e-2);
  return out;
}

}  // namespace

BisectionResult find_alpha_star(const OperatorSpec& spec, double p, const SolveOpts& opts) {
  check_problem(spec, p, 1.0);
  if (!(opts.alpha_tol > 0.0)) throw InvalidSpec("alpha tolerance must be positive");
  BisectionResult res;
  res.tol_used = opts.alpha_tol;
  constexpr double kFloor = 1e-8, kCeil = 1e8;

  double lo = 0.0, hi = 0.0;
  double alpha = 1.0;
  if (member_or_throw(spec, p, alpha, Domain::Exterior, opts)) {
    hi = alpha;
    while (true) {
      alpha *= 0.5;
      ++res.iterations;
      if (alpha < kFloor) {
        res.value = 0.0;
        res.lo = 0.0;
        res.hi = hi;
        res.hi_class = solve_exterior(spec, p, hi, opts).classification;
        return res;
      }
      if (!member_or_throw(spec, p, alpha, Domain::Exterior, opts)) {
        lo = alpha;
        break;
      }
      hi = alpha;
    }
  } else {
    lo = alpha;
    while (true) {
      alpha *= 2.0;
      ++res.iterations;
      if (alpha > kCeil)
        throw ShootingError("no initial slope up to 1e8 reaches a finite zero");
      if (member_or_throw(spec, p, alpha, Domain::Exterior, opts)) {
        hi = alpha;
        break;
      }
      lo = alpha;
    }
  }

  const SolveOpts fine = tightened(opts);
  while (hi - lo > opts.alpha_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const SolveOpts& use = (hi - lo < 1e-4) ? fine : opts;
    if (member_or_throw(spec, p, mid, Domain::Exterior, use))
      hi = mid;
    else
      lo = mid;
    ++res.iterations;
  }
  res.lo = lo;
  res.hi = hi;
  res.value = 0.5 * (lo + hi);
  res.lo_class = solve_exterior(spec, p, lo, fine).classification;
  res.hi_class = solve_exterior(spec, p, hi, fine).classification;
  return res;
}

std::pair<double, double> critical_exponent_bracket(const OperatorSpec& spec) {
  spec.check();
  constexpr double kMargin = 1e-6;
  const auto dims = effective_dimensions(spec);
  const double N = spec.dim;
  const auto crit = [](double d) { return (d + 2.0) / (d - 2.0); };
  const auto serrin = [](double d) { return d / (d - 2.0); };
  double lo = 0.0, hi = 0.0;
  switch (spec.branch) {
    case Branch::Semilinear:
      lo = serrin(N) + kMargin;
      hi = crit(N) + 1.0;
      break;
    case Branch::PucciPlus:
      lo = std::max(crit(N), serrin(dims.plus)) + kMargin;
      hi = crit(dims.plus) - kMargin;
      break;
    case Branch::PucciMinus:
      lo = crit(dims.minus) + kMargin;
      hi = crit(N) - kMargin;
      break;
  }
  if (!(hi - lo > 1e-3)) {
    // lambda == Lambda collapses the bracket onto the Sobolev exponent.
    lo = serrin(N) + kMargin;
    hi = crit(N) + 1.0;
  }
  return {lo, hi};
}

BisectionResult find_critical_exponent(const OperatorSpec& spec, const SolveOpts& opts) {
  spec.check();
  if (!(opts.p_tol > 0.0)) throw InvalidSpec("p tolerance must be positive");
  auto [lo, hi] = critical_exponent_bracket(spec);
  BisectionResult res;
  res.tol_used = opts.p_tol;
  const auto member = [&](double p, const SolveOpts& o) {
    return member_or_throw(spec, p, 1.0, Domain::Entire, o);
  };
  if (!member(lo, opts)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "lower bracket end p=" << lo << " does not give a finite zero";
    throw ShootingError(msg.str());
  }
  if (member(hi, opts)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "upper bracket end p=" << hi << " gives a finite zero";
    throw ShootingError(msg.str());
  }
  const SolveOpts fine = tightened(opts);
  while (hi - lo > opts.p_tol) {
    const double mid = 0.5 * (lo + hi);
    const SolveOpts& use = (hi - lo < 1e-2) ? fine : opts;
    if (member(mid, use))
      lo = mid;
    else
      hi = mid;
    ++res.iterations;
  }
  res.lo = lo;
  res.hi = hi;
  res.value = 0.5 * (lo + hi);
  res.lo_class = solve_entire(spec, lo, 1.0, fine).classification;
  res.hi_class = solve_entire(spec, hi, 1.0, fine).classification;
  return res;
}

AnnulusReport solve_annulus_report(const OperatorSpec& spec, double p, double alpha,
                                   const SolveOpts& opts) {
  const RadialSolution sol = solve_exterior(spec, p, alpha, opts);
  if (sol.classification.tag != DecayTag::FiniteZero) {
    std::ostringstream msg;
    msg << "the exterior solution with alpha=" << alpha << " has no finite zero (class "
        << to_string(sol.classification.tag) << "); no annulus";
    throw ShootingError(msg.str());
  }
  return {sol.classification.rho, sol.classification.du_at_rho};
}

}  // namespace pucci

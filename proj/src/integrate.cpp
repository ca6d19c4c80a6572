#include "pucci/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace pucci {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::UZero: return "u_zero";
    case EventKind::UPrimeZero: return "u_prime_zero";
    case EventKind::UDoublePrimeZero: return "u_double_prime_zero";
    case EventKind::CrossL: return "cross_L";
    case EventKind::CrossC_FromAbove: return "cross_C_from_above";
    case EventKind::CrossC_FromBelow: return "cross_C_from_below";
    case EventKind::XAxisCross: return "x_axis_cross";
    case EventKind::EnteredBall: return "entered_ball";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (auto kind : {EventKind::UZero, EventKind::UPrimeZero, EventKind::UDoublePrimeZero,
                    EventKind::CrossL, EventKind::CrossC_FromAbove, EventKind::CrossC_FromBelow,
                    EventKind::XAxisCross, EventKind::EnteredBall}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Terminal terminal) {
  switch (terminal) {
    case Terminal::HorizonReached: return "horizon_reached";
    case Terminal::EventStop: return "event_stop";
    case Terminal::StepFailure: return "step_failure";
    case Terminal::MaxStepsExceeded: return "max_steps_exceeded";
  }
  return "?";
}

void IntegratorOpts::check(double start) const {
  if (!(rel_tol > 0.0 && abs_tol > 0.0 && event_tol > 0.0 && max_step > 0.0))
    throw std::invalid_argument("integrator tolerances and max_step must be positive");
  if (!(horizon > start)) throw std::invalid_argument("integration horizon must exceed the start point");
  if (max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
}

IntegratorOpts IntegratorOpts::tightened(double factor) const {
  IntegratorOpts out = *this;
  out.rel_tol *= factor;
  out.abs_tol *= factor;
  return out;
}

std::size_t Trajectory::count(EventKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const auto& e) { return e.kind == kind; }));
}

std::optional<EventRecord> Trajectory::first(EventKind kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return e;
  return std::nullopt;
}

CurveTable Trajectory::table() const {
  CurveTable out(static_cast<Eigen::Index>(samples.size()), 4);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    out.row(i) << s.t, s.y[0], s.y[1], s.dy[1];
  }
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;

double scaled_norm(const Vec2& v, const Vec2& scale) { return (v.array() / scale.array()).abs().maxCoeff(); }

double min_step(double t) { return 1e-14 * std::max(1.0, std::abs(t)); }

double initial_step(const Rhs& rhs, double t0, const Vec2& y0, const Vec2& f0,
                    const IntegratorOpts& opts) {
  if (opts.initial_step > 0.0) return std::min(opts.initial_step, opts.max_step);
  const Vec2 scale = (opts.abs_tol + opts.rel_tol * y0.array().abs()).matrix();
  const double d0 = scaled_norm(y0, scale);
  const double d1 = scaled_norm(f0, scale);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, opts.max_step);
  const Vec2 y1 = y0 + h0 * f0;
  const Vec2 f1 = rhs(t0 + h0, y1);
  const double d2 = scaled_norm(f1 - f0, scale) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, opts.max_step});
}

int sign_of(double g) { return g > 0.0 ? 1 : (g < 0.0 ? -1 : 0); }

struct Crossing {
  std::size_t index;
  double theta;  // offset from step start
  Vec2 y;
  int direction;
};

}  // namespace

StepResult step(const Rhs& rhs, double t, const Vec2& y, const Vec2& dy, double h,
                const IntegratorOpts& opts) {
  const Vec2& k1 = dy;
  const Vec2 k2 = rhs(t + c2 * h, y + h * (a21 * k1));
  const Vec2 k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const Vec2 k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vec2 k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vec2 k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const Vec2 y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vec2 k7 = rhs(t + h, y_new);
  const Vec2 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

  const Vec2 scale =
      (opts.abs_tol + opts.rel_tol * y.array().abs().max(y_new.array().abs())).matrix();
  double error = scaled_norm(err, scale);
  if (!std::isfinite(error)) error = std::numeric_limits<double>::infinity();

  double factor = kFacMax;
  if (error > 0.0) factor = std::clamp(kSafety * std::pow(error, -0.2), kFacMin, kFacMax);
  const bool accepted = error <= 1.0;
  if (!accepted) factor = std::min(factor, 1.0);
  return {y_new, k7, error, h * factor, accepted};
}

Vec2 hermite(const Sample& a, const Sample& b, double t) {
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * a.y + h10 * h * a.dy + h01 * b.y + h11 * h * b.dy;
}

Trajectory integrate_with_events(const Rhs& rhs, double t0, const Vec2& y0,
                                 const std::vector<EventSpec>& events, const IntegratorOpts& opts,
                                 const std::function<int()>& labeler) {
  opts.check(t0);
  if (!y0.allFinite()) throw std::invalid_argument("initial state must be finite");

  const auto label = [&] { return labeler ? labeler() : 0; };
  std::vector<double> checkpoints;
  for (double c : opts.checkpoints)
    if (c > t0 && c < opts.horizon) checkpoints.push_back(c);
  std::sort(checkpoints.begin(), checkpoints.end());
  std::size_t next_cp = 0;

  Trajectory traj;
  double t = t0;
  Vec2 y = y0;
  Vec2 dy = rhs(t, y);
  traj.samples.push_back({t, y, dy, label()});

  std::vector<int> last_sign(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) last_sign[i] = sign_of(events[i].fn(t, y));

  double h = initial_step(rhs, t, y, dy, opts);
  long attempts = 0;

  while (t < opts.horizon) {
    if (++attempts > opts.max_steps) {
      traj.terminal = Terminal::MaxStepsExceeded;
      return traj;
    }
    h = std::min(h, opts.max_step);
    double t_target = t + h;
    bool clipped = false;
    if (t_target >= opts.horizon) {
      t_target = opts.horizon;
      clipped = true;
    }
    if (next_cp < checkpoints.size() && t_target >= checkpoints[next_cp]) {
      t_target = checkpoints[next_cp];
      clipped = true;
    }
    const double h_try = t_target - t;
    if (h_try < min_step(t)) {
      traj.terminal = Terminal::StepFailure;
      return traj;
    }

    const StepResult res = step(rhs, t, y, dy, h_try, opts);
    if (!res.accepted) {
      h = res.suggested_h;
      if (h < min_step(t)) {
        traj.terminal = Terminal::StepFailure;
        return traj;
      }
      continue;
    }

    // Sign changes over the accepted step.
    std::vector<Crossing> crossings;
    const double t_new = clipped ? t_target : t + h_try;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const int s1 = sign_of(events[i].fn(t_new, res.y));
      const int s0 = last_sign[i];
      if (s0 == 0 || s1 == 0 || s1 == s0) continue;
      const int direction = s1 > s0 ? 1 : -1;
      if (events[i].direction != 0 && events[i].direction != direction) continue;
      double lo = 0.0, hi = h_try;
      Vec2 y_hi = res.y;
      for (int it = 0; it < 60 && hi - lo > opts.event_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec2 y_mid = step(rhs, t, y, dy, mid, opts).y;
        const int sm = sign_of(events[i].fn(t + mid, y_mid));
        if (sm == s0) {
          lo = mid;
        } else {
          hi = mid;
          y_hi = y_mid;
        }
      }
      crossings.push_back({i, hi, y_hi, direction});
    }
    std::sort(crossings.begin(), crossings.end(),
              [](const Crossing& a, const Crossing& b) { return a.theta < b.theta; });

    bool truncated = false;
    for (const auto& c : crossings) {
      const auto& ev = events[c.index];
      const EventRecord rec{ev.kind, t + c.theta, c.y, c.direction};
      traj.events.push_back(rec);
      if (ev.action == EventAction::Record) continue;

      if (ev.on_fire) ev.on_fire(rec);
      const double t_event = (c.theta >= h_try) ? t_new : t + c.theta;
      t = t_event;
      y = c.y;
      dy = rhs(t, y);
      traj.samples.push_back({t, y, dy, label()});
      if (ev.action == EventAction::Stop) {
        traj.terminal = Terminal::EventStop;
        traj.stop_kind = ev.kind;
        return traj;
      }
      for (std::size_t i = 0; i < events.size(); ++i) {
        const int s = sign_of(events[i].fn(t, y));
        if (i == c.index) {
          last_sign[i] = s != 0 ? s : c.direction;
        } else if (s != 0) {
          last_sign[i] = s;
        }
      }
      while (next_cp < checkpoints.size() && checkpoints[next_cp] <= t) ++next_cp;
      truncated = true;
      break;
    }
    h = res.suggested_h;
    if (truncated) continue;

    t = t_new;
    y = res.y;
    dy = res.dy;
    traj.samples.push_back({t, y, dy, label()});
    for (std::size_t i = 0; i < events.size(); ++i) {
      const int s = sign_of(events[i].fn(t, y));
      if (s != 0) last_sign[i] = s;
    }
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= t) ++next_cp;
    if (!y.allFinite()) {
      traj.terminal = Terminal::StepFailure;
      return traj;
    }
  }
  traj.terminal = Terminal::HorizonReached;
  return traj;
}

}  // namespace pucci

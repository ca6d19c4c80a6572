#pragma once

#include "pucci/core.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace pucci {

/// Step-size control, event localization and stopping parameters.
///
/// `horizon` is the final value of the independent variable (EF time t or radius r).
/// `checkpoints` are abscissae the stepper lands on exactly, so that downstream
/// checks can read states there without interpolation.
struct IntegratorOpts {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double event_tol = 1e-12;
  double horizon = 60.0;
  long max_steps = 2'000'000;
  double initial_step = 0.0;
  std::vector<double> checkpoints;

  void check(double start) const;
  IntegratorOpts tightened(double factor) const;
};

enum class EventKind {
  UZero,
  UPrimeZero,
  UDoublePrimeZero,
  CrossL,
  CrossC_FromAbove,
  CrossC_FromBelow,
  XAxisCross,
  EnteredBall,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

struct EventRecord {
  EventKind kind;
  double time;
  Vec2 state;
  int direction;  // +1 rising, -1 falling

  bool operator==(const EventRecord&) const = default;
};

enum class EventAction { Record, Restart, Stop };

using Rhs = std::function<Vec2(double, const Vec2&)>;

struct EventSpec {
  EventKind kind;
  std::function<double(double, const Vec2&)> fn;
  int direction = 0;  // 0 any, +1 rising only, -1 falling only
  EventAction action = EventAction::Record;
  /// Called at the localized event before the integration resumes (Restart) or stops.
  std::function<void(const EventRecord&)> on_fire;
};

struct Sample {
  double t;
  Vec2 y;
  Vec2 dy;
  int label = 0;
};

enum class Terminal { HorizonReached, EventStop, StepFailure, MaxStepsExceeded };

std::string_view to_string(Terminal terminal);

/// Columns: abscissa, value, first derivative, second derivative.
using CurveTable = Eigen::Array<double, Eigen::Dynamic, 4>;

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<EventRecord> events;
  Terminal terminal = Terminal::HorizonReached;
  std::optional<EventKind> stop_kind;

  double start() const { return samples.front().t; }
  double end() const { return samples.back().t; }
  std::size_t count(EventKind kind) const;
  std::optional<EventRecord> first(EventKind kind) const;

  /// Second-order view: (t, y0, y1, dy1); valid when dy0 == y1.
  CurveTable table() const;
};

struct StepResult {
  Vec2 y;
  Vec2 dy;
  double error;  // normalized: accepted iff <= 1
  double suggested_h;
  bool accepted;
};

/// One Dormand-Prince 5(4) step from (t, y) with derivative dy already evaluated.
StepResult step(const Rhs& rhs, double t, const Vec2& y, const Vec2& dy, double h,
                const IntegratorOpts& opts);

/// Cubic Hermite interpolant between two samples.
Vec2 hermite(const Sample& a, const Sample& b, double t);

/// Adaptive integration from (t0, y0) up to opts.horizon.
///
/// Each sign change of an event function between accepted steps is localized by
/// bisection on sub-steps of the Runge-Kutta map, so the recorded state is an
/// integrator state rather than an interpolated one. Events are processed in time
/// order; a Restart or Stop event truncates the step at its location. `labeler`
/// tags every stored sample (used for regime labels of switched systems).
Trajectory integrate_with_events(const Rhs& rhs, double t0, const Vec2& y0,
                                 const std::vector<EventSpec>& events, const IntegratorOpts& opts,
                                 const std::function<int()>& labeler = {});

}  // namespace pucci

#include "pucci/integrate.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pucci;

namespace {
const Rhs kOscillator = [](double, const Vec2& y) -> Vec2 { return {y[1], -y[0]}; };

IntegratorOpts opts_to(double horizon) {
  IntegratorOpts o;
  o.horizon = horizon;
  return o;
}
}  // namespace

TEST_CASE("harmonic oscillator over one period") {
  const auto traj = integrate_with_events(kOscillator, 0.0, {1.0, 0.0}, {}, opts_to(2 * std::numbers::pi));
  CHECK(traj.terminal == Terminal::HorizonReached);
  CHECK(traj.end() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-15));
  CHECK(std::abs(traj.samples.back().y[0] - 1.0) < 1e-9);
  CHECK(std::abs(traj.samples.back().y[1]) < 1e-9);
}

TEST_CASE("recorded events are localized to event_tol") {
  std::vector<EventSpec> ev{{EventKind::UZero, [](double, const Vec2& y) { return y[0]; }, 0,
                             EventAction::Record, {}}};
  const auto traj = integrate_with_events(kOscillator, 0.0, {1.0, 0.0}, ev, opts_to(8.0));
  REQUIRE(traj.count(EventKind::UZero) == 3);
  CHECK(traj.events[0].time == doctest::Approx(std::numbers::pi / 2).epsilon(1e-11));
  CHECK(traj.events[0].direction == -1);
  CHECK(traj.events[1].direction == 1);
  CHECK(traj.events[2].time == doctest::Approx(2.5 * std::numbers::pi).epsilon(1e-11));
}

TEST_CASE("direction filter and stop") {
  std::vector<EventSpec> ev{{EventKind::UZero, [](double, const Vec2& y) { return y[0]; }, 1,
                             EventAction::Stop, {}}};
  const auto traj = integrate_with_events(kOscillator, 0.0, {1.0, 0.0}, ev, opts_to(10.0));
  CHECK(traj.terminal == Terminal::EventStop);
  REQUIRE(traj.stop_kind);
  CHECK(*traj.stop_kind == EventKind::UZero);
  CHECK(traj.end() == doctest::Approx(1.5 * std::numbers::pi).epsilon(1e-11));
}

TEST_CASE("two events inside one step are both reported in time order") {
  IntegratorOpts o = opts_to(1.0);
  o.max_step = 1.0;
  o.initial_step = 1.0;
  const Rhs drift = [](double, const Vec2&) -> Vec2 { return {1.0, 0.0}; };
  std::vector<EventSpec> ev{
      {EventKind::CrossC_FromBelow, [](double, const Vec2& y) { return y[0] - 0.6; }, 0,
       EventAction::Record, {}},
      {EventKind::CrossL, [](double, const Vec2& y) { return y[0] - 0.3; }, 0, EventAction::Record, {}}};
  const auto traj = integrate_with_events(drift, 0.0, {0.0, 0.0}, ev, o);
  REQUIRE(traj.events.size() == 2);
  CHECK(traj.events[0].kind == EventKind::CrossL);
  CHECK(traj.events[0].time == doctest::Approx(0.3).epsilon(1e-11));
  CHECK(traj.events[1].kind == EventKind::CrossC_FromBelow);
  CHECK(traj.events[1].time == doctest::Approx(0.6).epsilon(1e-11));
}

TEST_CASE("restart switches the right-hand side at the event") {
  double slope = 1.0;
  const Rhs rhs = [&slope](double, const Vec2&) -> Vec2 { return {slope, 0.0}; };
  std::vector<EventSpec> ev{{EventKind::CrossL, [](double t, const Vec2&) { return t - 0.5; }, 1,
                             EventAction::Restart, [&slope](const EventRecord&) { slope = -2.0; }}};
  int label = 0;
  const auto traj =
      integrate_with_events(rhs, 0.0, {0.0, 0.0}, ev, opts_to(1.0), [&] { return label++; });
  CHECK(traj.samples.back().y[0] == doctest::Approx(0.5 - 1.0).epsilon(1e-10));
}

TEST_CASE("checkpoints are landed on exactly") {
  IntegratorOpts o = opts_to(3.0);
  o.checkpoints = {0.25, 1.0, 2.75};
  const auto traj = integrate_with_events(kOscillator, 0.0, {1.0, 0.0}, {}, o);
  for (double c : o.checkpoints) {
    bool found = false;
    for (const auto& s : traj.samples) found = found || s.t == c;
    CHECK(found);
  }
}

TEST_CASE("step budget and option validation") {
  IntegratorOpts o = opts_to(100.0);
  o.max_steps = 5;
  const auto traj = integrate_with_events(kOscillator, 0.0, {1.0, 0.0}, {}, o);
  CHECK(traj.terminal == Terminal::MaxStepsExceeded);
  IntegratorOpts bad = opts_to(1.0);
  bad.rel_tol = -1.0;
  CHECK_THROWS(bad.check(0.0));
  CHECK_THROWS(opts_to(-1.0).check(0.0));
  const auto t = opts_to(1.0).tightened(0.1);
  CHECK(t.rel_tol == doctest::Approx(1e-11));
  CHECK(t.abs_tol == doctest::Approx(1e-13));
}

TEST_CASE("Hermite interpolation is exact for cubics") {
  const auto f = [](double t) { return Vec2{t * t * t - t, 3 * t * t - 1}; };
  const auto df = [](double t) { return Vec2{3 * t * t - 1, 6 * t}; };
  const Sample a{0.5, f(0.5), df(0.5), 0}, b{1.5, f(1.5), df(1.5), 0};
  const Vec2 mid = hermite(a, b, 1.1);
  CHECK(mid[0] == doctest::Approx(f(1.1)[0]).epsilon(1e-14));
}

TEST_CASE("fifth-order convergence of a single step") {
  const Rhs rhs = [](double, const Vec2& y) -> Vec2 { return {y[1], -y[0]}; };
  const IntegratorOpts o = opts_to(1.0);
  const auto err = [&](double h) {
    const auto r = step(rhs, 0.0, {1.0, 0.0}, {0.0, -1.0}, h, o);
    return std::abs(r.y[0] - std::cos(h));
  };
  const double ratio = err(0.2) / err(0.1);
  CHECK(ratio > 40.0);  // local error O(h^6) gives 64
}

TEST_CASE("event and terminal names") {
  for (EventKind k : {EventKind::UZero, EventKind::CrossC_FromAbove, EventKind::EnteredBall})
    CHECK(event_kind_from_string(to_string(k)) == k);
  CHECK_FALSE(event_kind_from_string("nonsense"));
  CHECK(to_string(Terminal::EventStop).size() > 0);
}

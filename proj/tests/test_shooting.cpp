#include "pucci/shooting.hpp"

#include <doctest.h>

#include <cmath>

using namespace pucci;

namespace {
const OperatorSpec kSemi3 = OperatorSpec::semilinear(3.0);
const OperatorSpec kPlus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciPlus);
const OperatorSpec kMinus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciMinus);
}  // namespace

TEST_CASE("tag and domain names round-trip") {
  for (DecayTag t : {DecayTag::FiniteZero, DecayTag::Fast, DecayTag::Slow, DecayTag::PseudoSlow,
                     DecayTag::Undetermined})
    CHECK(decay_tag_from_string(to_string(t)) == t);
  for (Domain d : {Domain::Exterior, Domain::Entire, Domain::Annulus})
    CHECK(domain_from_string(to_string(d)) == d);
}

TEST_CASE("invalid problems are rejected") {
  CHECK_THROWS_AS(solve_exterior(kSemi3, 1.0, 1.0), InvalidSpec);
  CHECK_THROWS_AS(solve_exterior(kSemi3, 3.0, -1.0), InvalidSpec);
  CHECK_THROWS_AS(solve_entire(kSemi3, 3.0, 0.0), InvalidSpec);
}

TEST_CASE("critical bubble decays fast") {
  const auto sol = solve_entire(kSemi3, 5.0, 1.0);
  CHECK(sol.classification.tag == DecayTag::Fast);
  CHECK_FALSE(sol.landmarks.rho);
  REQUIRE(sol.radial_part);
  CHECK(sol.landmarks.sigma);
  CHECK(*sol.landmarks.sigma == doctest::Approx(std::sqrt(1.5)).epsilon(1e-8));  // u'' = 0
}

TEST_CASE("Lane-Emden solution reaches its first zero with u'(rho) < 0") {
  const auto sol = solve_entire(kSemi3, 3.0, 1.0);
  REQUIRE(sol.classification.tag == DecayTag::FiniteZero);
  CHECK(sol.classification.rho == doctest::Approx(6.89684861937).epsilon(1e-8));
  CHECK(sol.classification.du_at_rho < 0.0);
  CHECK(sol.landmarks.rho == sol.classification.rho);
}

TEST_CASE("exterior finite-zero run has ordered landmarks") {
  const auto sol = solve_exterior(kPlus, 6.5, 0.05);
  REQUIRE(sol.classification.tag == DecayTag::FiniteZero);
  REQUIRE(sol.landmarks.tau);
  REQUIRE(sol.landmarks.sigma);
  REQUIRE(sol.landmarks.rho);
  CHECK(1.0 < *sol.landmarks.tau);
  CHECK(*sol.landmarks.tau < *sol.landmarks.sigma);
  CHECK(*sol.landmarks.sigma < *sol.landmarks.rho);
  CHECK(sol.classification.du_at_rho < 0.0);
  const auto rep = solve_annulus_report(kPlus, 6.5, 0.05);
  CHECK(rep.rho == doctest::Approx(sol.classification.rho).epsilon(1e-12));
}

TEST_CASE("tables agree with the trajectories") {
  const auto sol = solve_entire(kSemi3, 3.0, 1.0);
  const CurveTable r = sol.radial_table();
  const CurveTable t = sol.phase_table();
  CHECK(r(0, 0) == doctest::Approx(1e-6));
  for (Eigen::Index i = 1; i < r.rows(); ++i) CHECK(r(i, 0) > r(i - 1, 0));
  CHECK(t(t.rows() - 1, 0) == doctest::Approx(std::log(sol.classification.rho)));
  for (const auto& e : sol.phase_events()) CHECK(std::isfinite(e.state[0]));
}

TEST_CASE("alpha* vanishes below the critical exponent") {
  CHECK(find_alpha_star(kSemi3, 4.0).value == 0.0);
  CHECK(find_alpha_star(kSemi3, 3.0).value == 0.0);
}

TEST_CASE("alpha* at the critical exponent is at the double-precision floor") {
  // The flow is conservative here and the exterior orbit sits alpha^2/2 away from
  // the separatrix, so shots below alpha ~ sqrt(rel_tol) cannot be resolved.
  const auto b = find_alpha_star(kSemi3, 5.0);
  CHECK(b.value < 1e-6);
}

TEST_CASE("alpha* above the critical exponent carries its certificate") {
  const auto b = find_alpha_star(kSemi3, 6.0);
  CHECK(b.value > 0.0);
  CHECK(b.hi - b.lo <= 1e-8);
  CHECK(b.lo <= b.value);
  CHECK(b.value <= b.hi);
  CHECK(b.hi_class.tag == DecayTag::FiniteZero);
  CHECK(b.lo_class.tag != DecayTag::FiniteZero);
  CHECK(b.lo_class.tag != DecayTag::Undetermined);
  CHECK(probe_membership(kSemi3, 6.0, 2.0 * b.hi, Domain::Exterior, {}) == Membership::InD);
  CHECK(probe_membership(kSemi3, 6.0, 0.5 * b.lo, Domain::Exterior, {}) == Membership::NotInD);
}

TEST_CASE("critical exponent brackets") {
  const auto [lo, hi] = critical_exponent_bracket(kSemi3);
  CHECK(lo < 5.0);
  CHECK(5.0 < hi);
  const auto [mlo, mhi] = critical_exponent_bracket(kMinus);
  CHECK(mlo > 1.8);
  CHECK(mhi < 3.0);
  const auto [plo, phi] = critical_exponent_bracket(kPlus);
  CHECK(plo > 5.0);
  CHECK(phi < 9.0);
}

TEST_CASE("critical exponents") {
  const auto s = find_critical_exponent(kSemi3);
  CHECK(s.value == doctest::Approx(5.0).epsilon(2e-4));
  const auto m = find_critical_exponent(kMinus);
  CHECK(m.value > 1.8);
  CHECK(m.value < 3.0);
  CHECK(m.hi - m.lo <= 1e-6);
  const auto p = find_critical_exponent(kPlus);
  CHECK(p.value > 5.0);
  CHECK(p.value < 9.0);
  CHECK(p.lo_class.tag == DecayTag::FiniteZero);
  CHECK(p.hi_class.tag != DecayTag::FiniteZero);
}

TEST_CASE("subcritical entire solutions vanish, supercritical ones decay slowly") {
  CHECK(solve_entire(kSemi3, 4.0, 1.0).classification.tag == DecayTag::FiniteZero);
  const auto slow = solve_entire(kSemi3, 7.0, 1.0);
  CHECK(slow.classification.tag == DecayTag::Slow);
  CHECK(slow.classification.c_star == doctest::Approx(equilibrium_c_star(kSemi3, 7.0)));
}

TEST_CASE("step failure is reported, not classified") {
  SolveOpts o;
  o.integrator.max_steps = 10;
  o.max_horizon = o.integrator.horizon;
  const auto sol = solve_exterior(kSemi3, 6.0, 1.0, o);
  CHECK(sol.numerical_failure());
  CHECK(sol.classification.tag == DecayTag::Undetermined);
}

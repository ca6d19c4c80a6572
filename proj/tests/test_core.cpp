#include "pucci/core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pucci;

namespace {
const OperatorSpec kPlus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciPlus);
const OperatorSpec kMinus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciMinus);
}  // namespace

TEST_CASE("effective dimensions") {
  const auto d = effective_dimensions(kPlus);
  CHECK(d.plus == doctest::Approx(2.5));
  CHECK(d.minus == doctest::Approx(7.0));
  const auto s = effective_dimensions(OperatorSpec::semilinear(3.0));
  CHECK(s.plus == doctest::Approx(3.0));
  CHECK(s.minus == doctest::Approx(3.0));
}

TEST_CASE("operator construction rejects invalid parameters") {
  CHECK_THROWS_AS(OperatorSpec::make(2.0, 1.0, 4.0, Branch::PucciPlus), InvalidSpec);
  CHECK_THROWS_AS(OperatorSpec::make(0.0, 1.0, 4.0, Branch::PucciPlus), InvalidSpec);
  CHECK_THROWS_AS(OperatorSpec::make(1.0, 2.0, 3.0, Branch::Semilinear), InvalidSpec);
  CHECK_THROWS_AS(OperatorSpec::make(1.0, 5.0, 4.0, Branch::PucciPlus), InvalidSpec);  // N+ = 1.6
  CHECK_THROWS_AS(OperatorSpec::semilinear(2.0), InvalidSpec);
  CHECK_NOTHROW(OperatorSpec::semilinear(2.5));
}

TEST_CASE("branch names round-trip") {
  for (Branch b : {Branch::PucciPlus, Branch::PucciMinus, Branch::Semilinear})
    CHECK(branch_from_string(to_string(b)) == b);
  CHECK_THROWS_AS(branch_from_string("max"), InvalidSpec);
}

TEST_CASE("Emden-Fowler coefficients") {
  CHECK(ef_a(3.0, 5.0) == doctest::Approx(0.0));
  CHECK(ef_b(3.0, 5.0) == doctest::Approx(0.25));
  CHECK(ef_b(3.0, 6.0) == doctest::Approx(0.24));
  const auto c = ef_coefficients(kPlus, 6.5);
  CHECK(c.a == doctest::Approx(ef_a(4.0, 6.5)));
  CHECK(c.a_tilde_plus == doctest::Approx(ef_a(2.5, 6.5)));
  CHECK(c.b_tilde_minus == doctest::Approx(ef_b(7.0, 6.5)));
}

TEST_CASE("branch table") {
  const double p = 6.0;
  auto check = [&](const OperatorSpec& s, Regime r, double dim, double w) {
    const auto c = branch_coefficients(s, p, r);
    CHECK(c.dim == doctest::Approx(dim));
    CHECK(c.weight == doctest::Approx(w));
    CHECK(c.a == doctest::Approx(ef_a(dim, p)));
    CHECK(c.b == doctest::Approx(ef_b(dim, p)));
  };
  check(kPlus, Regime::AboveL, 7.0, 1.0);
  check(kPlus, Regime::Middle, 4.0, 1.0);
  check(kPlus, Regime::BelowC, 2.5, 2.0);
  check(kMinus, Regime::AboveL, 2.5, 2.0);
  check(kMinus, Regime::Middle, 4.0, 2.0);
  check(kMinus, Regime::BelowC, 7.0, 1.0);
  CHECK(curve_weight(kPlus) == 1.0);
  CHECK(curve_weight(kMinus) == 2.0);
}

TEST_CASE("regimes are closed on their boundary curves") {
  const double p = 6.0, x = 0.7;
  CHECK(regime_of(kPlus, p, {0.0, x, line_L(p, x)}) == Regime::AboveL);
  CHECK(regime_of(kPlus, p, {0.0, x, curve_C(kPlus, p, x)}) == Regime::BelowC);
  const double mid = 0.5 * (line_L(p, x) + curve_C(kPlus, p, x));
  CHECK(regime_of(kPlus, p, {0.0, x, mid}) == Regime::Middle);
  CHECK(regime_of(kPlus, p, {0.0, x, 10.0}) == Regime::AboveL);
  CHECK(regime_of(kPlus, p, {0.0, x, -10.0}) == Regime::BelowC);
}

TEST_CASE("property: the switched system is the radial equation in EF variables") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ur(0.1, 20.0), uu(0.01, 2.0), ud(-3.0, 3.0), up(1.5, 10.0);
  for (const auto& spec : {kPlus, kMinus, OperatorSpec::semilinear(3.0)}) {
    for (int i = 0; i < 300; ++i) {
      const double r = ur(rng), u = uu(rng), du = ud(rng), p = up(rng);
      const double k = 2.0 / (p - 1.0);
      const double ddu = radial_rhs(spec, p, r, u, du);
      const double rk = std::pow(r, k);
      const double x = rk * u, dx = k * x + rk * r * du;
      const double ddx = k * dx + (k + 1.0) * rk * r * du + rk * r * r * ddu;
      const double got = ef_rhs(spec, p, {std::log(r), x, dx});
      CHECK(got == doctest::Approx(ddx).epsilon(1e-9).scale(std::abs(x) + std::abs(dx) + 1.0));
    }
  }
}

TEST_CASE("property: the energy decays at rate a (x')^2 on every branch") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.05, 2.0), uy(-2.0, 2.0), up(1.5, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double p = up(rng), x = ux(rng), y = uy(rng);
    for (Regime reg : {Regime::AboveL, Regime::Middle, Regime::BelowC}) {
      const auto c = branch_coefficients(kPlus, p, reg);
      const double ydot = ef_branch_rhs(c, p, x, y);
      // dE/dt = y y' - b x y + x^p y / w
      const double dE = y * ydot - c.b * x * y + std::pow(x, p) * y / c.weight;
      CHECK(dE == doctest::Approx(c.a * y * y).scale(1.0));
    }
  }
}

TEST_CASE("equilibria, rates and reference exponents") {
  const auto semi = OperatorSpec::semilinear(3.0);
  CHECK(equilibrium_c_star(semi, 6.0) == doctest::Approx(std::pow(0.24, 0.2)));
  CHECK(std::isnan(equilibrium_c_star(semi, 2.0)));
  CHECK(fast_rate(kPlus, 6.0) == doctest::Approx(-(0.5 * 6.0 - 2.5) / 5.0));
  CHECK(decay_dimension(kPlus) == doctest::Approx(2.5));
  CHECK(decay_dimension(kMinus) == doctest::Approx(7.0));
  const auto ref = reference_exponents(kPlus);
  CHECK(ref.sobolev == doctest::Approx(3.0));
  CHECK(ref.serrin_plus == doctest::Approx(5.0));
  CHECK(ref.critical_plus == doctest::Approx(9.0));
  CHECK(ref.critical_minus == doctest::Approx(1.8));
}

TEST_CASE("radial equation preconditions") {
  CHECK_THROWS(radial_rhs(kPlus, 3.0, 0.0, 1.0, 0.0));
  CHECK_THROWS(radial_rhs(kPlus, 3.0, 1.0, -1.0, 0.0));
  CHECK_THROWS(ef_rhs(kPlus, 3.0, {0.0, -0.1, 0.0}));
  CHECK(signed_pow(-2.0, 3.0) == doctest::Approx(-8.0));
  const auto c = branch_coefficients(kPlus, 3.5, Regime::Middle);
  CHECK(ef_branch_rhs(c, 3.5, -0.3, -0.2) == doctest::Approx(-ef_branch_rhs(c, 3.5, 0.3, 0.2)));
}

TEST_CASE("E1 is the first integral of the frozen-coefficient problem") {
  const auto semi = OperatorSpec::semilinear(3.0);
  CHECK(monotone_energy_E1(semi, 3.0, 1.0, 2.0) == doctest::Approx(2.0 + 0.25));
}

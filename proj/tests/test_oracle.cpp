#include "pucci/oracle.hpp"

#include <doctest.h>

#include <cmath>

using pucci::oracle::semilinear_entire;

TEST_CASE("oracle reproduces the three-dimensional bubble") {
  const auto prof = semilinear_entire(3.0, 5.0, 1.0, 1.0, 1e-4, 10.0, {0.5, 1.0, 2.0, 5.0});
  CHECK_FALSE(prof.first_zero);
  REQUIRE(prof.values.size() == 4);
  for (std::size_t i = 0; i < prof.radii.size(); ++i) {
    const double r = prof.radii[i];
    CHECK(prof.values[i] == doctest::Approx(1.0 / std::sqrt(1.0 + r * r / 3.0)).epsilon(1e-11));
  }
}

TEST_CASE("oracle reproduces the four-dimensional bubble with lambda != 1") {
  // u = alpha (1 + alpha^2 r^2 / (8 lambda))^{-1} for nu = 4, p = 3.
  const double lambda = 2.0, alpha = 1.5;
  const auto prof = semilinear_entire(4.0, 3.0, lambda, alpha, 1e-4, 6.0, {1.0, 3.0});
  REQUIRE(prof.values.size() == 2);
  for (std::size_t i = 0; i < prof.radii.size(); ++i) {
    const double r = prof.radii[i];
    const double exact = alpha / (1.0 + alpha * alpha * r * r / (8.0 * lambda));
    CHECK(prof.values[i] == doctest::Approx(exact).epsilon(1e-11));
  }
}

TEST_CASE("Lane-Emden n = 3 first zero") {
  const auto prof = semilinear_entire(3.0, 3.0, 1.0, 1.0);
  REQUIRE(prof.first_zero);
  CHECK(*prof.first_zero == doctest::Approx(6.89684861937).epsilon(1e-9));
}

TEST_CASE("first zero is step-converged") {
  const auto a = semilinear_entire(3.0, 4.0, 1.0, 1.0, 2e-4, 40.0);
  const auto b = semilinear_entire(3.0, 4.0, 1.0, 1.0, 1e-4, 40.0);
  REQUIRE(a.first_zero);
  REQUIRE(b.first_zero);
  CHECK(std::abs(*a.first_zero - *b.first_zero) < 1e-10 * *b.first_zero);
}

TEST_CASE("zero radius scales like alpha^{-(p-1)/2}") {
  const auto one = semilinear_entire(3.0, 3.0, 1.0, 1.0);
  const auto two = semilinear_entire(3.0, 3.0, 1.0, 4.0, 2.5e-6);
  REQUIRE(one.first_zero);
  REQUIRE(two.first_zero);
  CHECK(*two.first_zero == doctest::Approx(*one.first_zero / 4.0).epsilon(1e-9));
}

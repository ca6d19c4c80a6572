#include "pucci/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pucci;

namespace {
const OperatorSpec kSemi3 = OperatorSpec::semilinear(3.0);

/// Table of the bubble (1 + r^2/3)^{-1/2} on [lo, hi].
CurveTable bubble_table(double lo, double hi, int n, bool log_spaced = true) {
  CurveTable t(n, 4);
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    const double r = log_spaced ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
    const double q = 1.0 + r * r / 3.0;
    const double u = std::pow(q, -0.5);
    const double du = -r / 3.0 * std::pow(q, -1.5);
    const double ddu = -std::pow(q, -1.5) / 3.0 + r * r / 3.0 * std::pow(q, -2.5);
    t.row(i) << r, u, du, ddu;
  }
  return t;
}
}  // namespace

TEST_CASE("Emden-Fowler transform round-trips") {
  const CurveTable r = bubble_table(0.01, 100.0, 50);
  const CurveTable back = emden_fowler_inverse(emden_fowler_forward(r, 5.0), 5.0);
  CHECK(((back - r).abs() / (r.abs() + 1e-300)).maxCoeff() < 1e-11);
}

TEST_CASE("Kelvin map is an involution") {
  const CurveTable r = bubble_table(0.1, 10.0, 40);
  const CurveTable twice = kelvin_map(kelvin_map(r, 3.0), 3.0);
  REQUIRE(twice.rows() == r.rows());
  CHECK(((twice - r).abs() / (r.abs() + 1e-300)).maxCoeff() < 1e-12);
}

TEST_CASE("Hermite quadrature is exact for cubics") {
  Eigen::ArrayXd s(4), f(4), df(4);
  s << 0.0, 0.3, 1.1, 2.0;
  f = s * s * s - 2 * s;
  df = 3 * s * s - 2;
  CHECK(hermite_quadrature(s, f, df) == doctest::Approx(4.0 - 4.0).scale(1.0));
}

TEST_CASE("Pohozaev residual vanishes on the bubble and not on a constant") {
  const CurveTable t = bubble_table(1e-6, 5.0, 4000);
  CHECK(std::abs(pohozaev_residual(t, 3.0, 5.0, 1.0, 1.0)) < 1e-8);
  CurveTable flat = t;
  flat.col(1).setOnes();
  flat.col(2).setZero();
  flat.col(3).setZero();
  CHECK(std::abs(pohozaev_residual(flat, 3.0, 5.0, 1.0, 1.0)) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
  CHECK_THROWS(pohozaev_residual(bubble_table(0.5, 5.0, 100), 3.0, 5.0, 1.0, 1.0));
}

TEST_CASE("Pohozaev residual on computed solutions") {
  const auto sol = solve_entire(kSemi3, 3.0, 1.0);
  CHECK(std::abs(pohozaev_residual(sol, 1.0)) < 1e-6);
  CHECK(std::abs(pohozaev_residual(sol, 3.0)) < 1e-6);
  const auto ext = solve_exterior(kSemi3, 3.0, 1.0);
  CHECK_THROWS(pohozaev_residual(ext, 1.0));
}

TEST_CASE("fast decay fit recovers C on a synthetic tail") {
  const double C = 1.7, nt = 2.5;
  CurveTable t(200, 4);
  for (int i = 0; i < 200; ++i) {
    const double r = 10.0 * std::pow(1e3, i / 199.0);
    t.row(i) << r, C * std::pow(r, 2 - nt), C * (2 - nt) * std::pow(r, 1 - nt),
        C * (2 - nt) * (1 - nt) * std::pow(r, -nt);
  }
  const FitReport f = fit_fast_decay(t, nt);
  CHECK(f.converged);
  CHECK(f.estimate == doctest::Approx(C).epsilon(1e-10));
  CHECK(f.slope == doctest::Approx(2 - nt).epsilon(1e-10));
  CHECK(log_slope(t, 100.0, 1000.0) == doctest::Approx(2 - nt).epsilon(1e-10));
}

TEST_CASE("fast decay fit on the bubble") {
  const auto sol = solve_entire(kSemi3, 5.0, 1.0, [] {
    SolveOpts o;
    o.radial_checkpoints = {100.0, 1000.0};
    return o;
  }());
  const FitReport f = fit_fast_decay(sol.radial_table(), 3.0, std::pair{100.0, 1000.0});
  CHECK(f.estimate == doctest::Approx(std::sqrt(3.0)).epsilon(1e-4));
}

TEST_CASE("slow decay fit and oscillation statistics") {
  const auto sol = solve_exterior(kSemi3, 6.0, 0.2);
  REQUIRE(sol.classification.tag == DecayTag::Slow);
  const double c = equilibrium_c_star(kSemi3, 6.0);
  const FitReport f = fit_slow_decay(sol.phase_table(), c);
  CHECK(f.residual < 1e-4);
  const auto st = oscillation_stats(sol.phase);
  CHECK(st.inf_est <= c + 1e-4);
  CHECK(st.sup_est >= c - 1e-4);
}

TEST_CASE("scaling map relates entire solutions with different alpha") {
  SolveOpts o;
  o.radial_checkpoints = {0.5, 2.0};
  SolveOpts o4;
  o4.radial_checkpoints = {2.0, 8.0};
  const CurveTable one = solve_entire(kSemi3, 3.0, 1.0, o4).radial_table();
  const CurveTable two = solve_entire(kSemi3, 3.0, 2.0, o).radial_table();
  const CurveTable mapped = scaling_map(one, 3.0, 2.0);  // v(s) = 2 u(2 s)
  for (double s : {0.5, 2.0}) {
    const Vec2 a = table_state_at(mapped, s), b = table_state_at(two, s);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-8));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-8));
  }
  CHECK(scaling_time_shift(3.0, 1.0, 2.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("support distance is zero for identical curves") {
  const CurveTable t = emden_fowler_forward(bubble_table(0.5, 50.0, 60), 5.0);
  CHECK(support_distance(t, t, t(0, 0), t(t.rows() - 1, 0)) < 1e-14);
}

TEST_CASE("table_state_at interpolates between samples") {
  const CurveTable t = bubble_table(0.1, 3.0, 400, false);
  const Vec2 s = table_state_at(t, 1.234);
  CHECK(s[0] == doctest::Approx(std::pow(1.0 + 1.234 * 1.234 / 3.0, -0.5)).epsilon(1e-9));
}

TEST_CASE("Kelvin transform of a fast exterior solution") {
  const auto b = find_alpha_star(kSemi3, 6.0);
  const auto sol = solve_exterior(kSemi3, 6.0, b.value);
  const KelvinReport k = kelvin_transform(sol.radial_table(), 3.0, 6.0, 1.0, 0.01, 0.5);
  CHECK(k.integrated_residual < 1e-5);
  CHECK(k.pointwise_residual < 1e-5);
  CHECK(k.limit > 0.0);
  CHECK(k.limit_drift < 1e-5);
  CHECK_THROWS(kelvin_transform(sol.radial_table(), 3.0, 6.0, 1.0, 1e-9, 0.5));
}

TEST_CASE("energy dissipation and crossing audits on switched runs") {
  const auto plus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciPlus);
  for (double alpha : {1e-3, 0.05, 1.0, 30.0}) {
    const auto sol = solve_exterior(plus, 6.5, alpha);
    const auto segs = energy_dissipation_audit(sol.phase, plus, 6.5);
    REQUIRE_FALSE(segs.empty());
    for (const auto& s : segs) CHECK(s.error <= 1e-6);
    const auto a = audit_crossings(sol);
    CHECK(a.above_margin > -1e-8);
    if (sol.classification.tag == DecayTag::FiniteZero) CHECK(a.x_axis == 1);
    CHECK(max_e1_increase(sol) <= 1e-10);
  }
}

#pragma once

#include "pucci/core.hpp"
#include "pucci/integrate.hpp"
#include "pucci/shooting.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace pucci {

// Coordinate changes. Tables carry (abscissa, value, first, second derivative).

/// (r, u, u', u'') -> (t, x, x', x'') with x = r^{2/(p-1)} u, t = log r.
CurveTable emden_fowler_forward(const CurveTable& radial, double p);
/// Inverse of emden_fowler_forward.
CurveTable emden_fowler_inverse(const CurveTable& phase, double p);

/// r -> r^{2-nu} u(1/r), rows returned in increasing r. An involution.
CurveTable kelvin_map(const CurveTable& radial, double nu);

struct KelvinReport {
  CurveTable transformed;
  double r_lo = 0.0;
  double r_hi = 0.0;
  /// Max over sample intervals in [r_lo, r_hi] of the relative defect of the
  /// integrated equation (r^{nu-1} u')' = -r^{p(nu-2)-3} u^p / lambda.
  double integrated_residual = 0.0;
  /// Max relative pointwise defect of u'' + (nu-1) u'/r + r^{p(nu-2)-nu-2} u^p / lambda.
  double pointwise_residual = 0.0;
  /// Value at r_lo/100, and the relative spread of the transformed function over
  /// [r_lo/100, r_lo/10] (continuity at the origin).
  double limit = 0.0;
  double limit_drift = 0.0;
  double covered_lo = 0.0;
  double covered_hi = 0.0;
};

/// Kelvin transform of an exterior semilinear solution sampled on [1, R) and the
/// residual of the transformed equation on [r_lo, r_hi]. Throws if the data do
/// not reach 100/r_lo.
KelvinReport kelvin_transform(const CurveTable& exterior_radial, double nu, double p,
                              double lambda, double r_lo, double r_hi);

/// Integral of f over the knots using the end-point corrected trapezoid rule
/// (exact for cubics): h (f0 + f1)/2 + h^2 (f0' - f1')/12 per interval.
double hermite_quadrature(const Eigen::ArrayXd& s, const Eigen::ArrayXd& f,
                          const Eigen::ArrayXd& df);

/// LHS - RHS of the Pohozaev-type identity for an entire semilinear solution
/// sampled from (near) r = 0 up to at least r.
double pohozaev_residual(const CurveTable& radial, double nu, double p, double lambda, double r);
double pohozaev_residual(const RadialSolution& sol, double r);

struct FitReport {
  double estimate = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double residual = 0.0;
  double slope = 0.0;
  bool converged = false;

  bool operator==(const FitReport&) const = default;
};

/// Least-squares slope of log u against log r on [r_lo, r_hi] (default: the last
/// decade of data). Converged iff |slope + (n_tilde - 2)| < slope_tol. The estimate
/// is r^{n_tilde - 2} u at the outer end of the window.
FitReport fit_fast_decay(const CurveTable& radial, double n_tilde,
                         std::optional<std::pair<double, double>> window = std::nullopt,
                         double slope_tol = 5e-2);

/// Max |x - c*| over the final tail_fraction of the phase samples.
FitReport fit_slow_decay(const CurveTable& phase, double c_star, double tail_fraction = 0.2,
                         double radius = 1e-4);

struct OscillationStats {
  double inf_est = 0.0;
  double sup_est = 0.0;
  int crossing_count = 0;
};

OscillationStats oscillation_stats(const Trajectory& phase, double tail_fraction = 0.2);

/// Samples of v_alpha -> samples of v_{ratio * alpha}: r -> r / s, u -> ratio u,
/// with s = ratio^{(p-1)/2}.
CurveTable scaling_map(const CurveTable& radial, double p, double ratio);

/// Shift with Gamma_{alpha'}(t) = Gamma_alpha(t + shift).
inline double scaling_time_shift(double p, double alpha, double alpha_prime) {
  return 0.5 * (p - 1.0) * std::log(alpha_prime / alpha);
}

/// Max over the samples of `a` with abscissa in [lo, hi] of the distance in the
/// (x, x') plane to the Hermite curve through the samples of `b`.
double support_distance(const CurveTable& a, const CurveTable& b, double lo, double hi);

struct SegmentAudit {
  double t0;
  double t1;
  Regime regime;
  double delta_energy;
  double dissipation;
  double error;
};

/// Energy balance E(t1) - E(t0) = a * int (x')^2 dt on every regime-pure segment of
/// a switched phase trajectory (samples labelled by Regime).
std::vector<SegmentAudit> energy_dissipation_audit(const Trajectory& phase,
                                                   const OperatorSpec& spec, double p);

struct CrossingAudit {
  int from_above = 0;
  int from_below = 0;
  int x_axis = 0;
  /// min over C-from-above crossings of x^{p-1} - c (N-1)/p;
  /// +inf when there is none.
  double above_margin = 0.0;
  /// max over C-from-below crossings of x^{p-1} - c (N-1)/p; -inf when none.
  double below_excess = 0.0;
};

CrossingAudit audit_crossings(const RadialSolution& sol);

/// Largest increase of E1 between consecutive samples on the rising arc [1, tau].
double max_e1_increase(const RadialSolution& sol);

/// Least-squares slope of log u vs log r over samples with r in [r_lo, r_hi].
double log_slope(const CurveTable& radial, double r_lo, double r_hi);

/// State (u, u') at r: the sample value when r is a sample, Hermite otherwise.
Vec2 table_state_at(const CurveTable& table, double s);

}  // namespace pucci

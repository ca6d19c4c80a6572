#pragma once

#include "pucci/core.hpp"
#include "pucci/integrate.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace pucci {

enum class DecayTag { FiniteZero, Fast, Slow, PseudoSlow, Undetermined };

std::string_view to_string(DecayTag tag);
DecayTag decay_tag_from_string(std::string_view name);

/// Outcome of a shot. Only the payload fields of the active tag are meaningful;
/// the others stay at zero.
struct DecayClass {
  DecayTag tag = DecayTag::Undetermined;
  // FiniteZero
  double rho = 0.0;
  double du_at_rho = 0.0;
  // Fast
  double C = 0.0;
  double rate = 0.0;
  double slope = 0.0;
  // Slow (c_star is also reported for PseudoSlow)
  double c_star = 0.0;
  double deviation = 0.0;
  // PseudoSlow
  double inf_est = 0.0;
  double sup_est = 0.0;
  int crossings = 0;
  double amplitude_ratio = 0.0;
  // Undetermined
  double horizon = 0.0;

  bool operator==(const DecayClass&) const = default;
};

/// Finite-horizon surrogates for the omega-limit alternatives.
struct ClassifyOpts {
  double tail_fraction = 0.2;
  double slow_radius = 1e-4;
  int min_c_crossings = 10;
  double ratio_lo = 0.9;
  double ratio_hi = 1.1;
  double min_amplitude = 1e-4;
  double fast_slope_tol = 5e-2;
  double fast_floor = 1e-5;
};

struct SolveOpts {
  IntegratorOpts integrator;  // integrator.horizon is the first EF-time horizon
  ClassifyOpts classify;
  double max_horizon = 240.0;
  double taylor_delta = 1e-6;
  double near_critical_tighten = 1e-2;
  double alpha_tol = 1e-8;
  double p_tol = 1e-6;
  /// Radii the integration must land on exactly (entire and exterior problems).
  std::vector<double> radial_checkpoints;
};

enum class Domain { Exterior, Entire, Annulus };

std::string_view to_string(Domain domain);
Domain domain_from_string(std::string_view name);

struct Landmarks {
  std::optional<double> tau;    // maximum of u (exterior problems)
  std::optional<double> sigma;  // first inflection
  std::optional<double> rho;    // outer zero; empty means +infinity

  bool operator==(const Landmarks&) const = default;
};

struct RadialSolution {
  OperatorSpec spec;
  double p = 0.0;
  double alpha = 0.0;
  Domain domain = Domain::Exterior;
  /// Entire problems: the segment r in [delta, 1] integrated in radial coordinates.
  std::optional<Trajectory> radial_part;
  /// Emden-Fowler segment, t = log r >= 0; samples labelled by Regime.
  Trajectory phase;
  Landmarks landmarks;
  DecayClass classification;
  double horizon_used = 0.0;

  /// All samples as (r, u, u', u'').
  CurveTable radial_table() const;
  /// All samples as (t, x, x', x'').
  CurveTable phase_table() const;
  /// Events of both segments in phase-plane terms (radial events are mapped to
  /// their L/C/x-axis counterparts, state converted to (x, x')).
  std::vector<EventRecord> phase_events() const;
  bool numerical_failure() const;
};

/// Thrown when a shot cannot be classified within the horizon policy or a bisection
/// bracket is inconsistent.
class ShootingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shoots the exterior problem from u(1) = 0, u'(1) = alpha; EF coordinates throughout.
RadialSolution solve_exterior(const OperatorSpec& spec, double p, double alpha,
                              const SolveOpts& opts = {});

/// Shoots the entire problem v(0) = alpha, v'(0) = 0 from a Taylor start at r = delta,
/// radial coordinates up to r = 1, EF coordinates beyond.
RadialSolution solve_entire(const OperatorSpec& spec, double p, double alpha,
                            const SolveOpts& opts = {});

/// Omega-limit surrogate for a phase trajectory that did not reach u = 0.
DecayClass classify_omega_limit(const Trajectory& phase, const OperatorSpec& spec, double p,
                                const ClassifyOpts& opts = {});

struct BisectionResult {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  DecayClass lo_class;
  DecayClass hi_class;
  int iterations = 0;
  double tol_used = 0.0;

  bool operator==(const BisectionResult&) const = default;
};

/// alpha*(p) = inf{alpha : rho_alpha < infinity}. Value 0 when every probe down to
/// 1e-8 reaches a finite zero.
BisectionResult find_alpha_star(const OperatorSpec& spec, double p, const SolveOpts& opts = {});

/// Bisection on p of "the entire solution with alpha = 1 has a finite zero".
BisectionResult find_critical_exponent(const OperatorSpec& spec, const SolveOpts& opts = {});

/// Initial p-bracket used by find_critical_exponent.
std::pair<double, double> critical_exponent_bracket(const OperatorSpec& spec);

struct AnnulusReport {
  double rho;
  double du_at_rho;
};

AnnulusReport solve_annulus_report(const OperatorSpec& spec, double p, double alpha,
                                   const SolveOpts& opts = {});

enum class Membership { InD, NotInD, Unknown };

/// Finite-time membership test for bisections: a zero of u certifies membership, a
/// local minimum of x with x > 0 (second x-axis crossing) certifies non-membership.
Membership probe_membership(const OperatorSpec& spec, double p, double alpha, Domain domain,
                            const SolveOpts& opts);

}  // namespace pucci

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pucci {

using Vec2 = Eigen::Vector2d;

enum class Branch { PucciPlus, PucciMinus, Semilinear };

std::string_view to_string(Branch branch);
Branch branch_from_string(std::string_view name);

/// Thrown when an operator or problem parametrization violates its invariants.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EffectiveDimensions {
  double plus;
  double minus;
};

/// Ellipticity pair, dimension and operator branch.
///
/// `dim` is real: the semilinear branch accepts any nu > 2, and the effective
/// dimensions are non-integer in general. Construction through `make` enforces
/// 0 < lambda <= Lambda, lambda == Lambda for the semilinear branch, and both
/// effective dimensions strictly above 2.
struct OperatorSpec {
  double lambda = 1.0;
  double Lambda = 1.0;
  double dim = 3.0;
  Branch branch = Branch::Semilinear;

  static OperatorSpec make(double lambda, double Lambda, double dim, Branch branch);
  static OperatorSpec semilinear(double nu, double lambda = 1.0) {
    return make(lambda, lambda, nu, Branch::Semilinear);
  }

  /// Checks everything except the effective-dimension bound; throws InvalidSpec.
  void check_basic() const;
  void check() const;

  bool operator==(const OperatorSpec&) const = default;
};

EffectiveDimensions effective_dimensions(const OperatorSpec& spec);

/// Coefficients of the autonomous Emden-Fowler equation for each effective dimension.
struct EfCoefficients {
  double a, b;
  double a_tilde_plus, b_tilde_plus;
  double a_tilde_minus, b_tilde_minus;
  double p;
};

/// a(d) = (d + 2 - (d - 2) p) / (p - 1)
double ef_a(double d, double p);
/// b(d) = 2 ((d - 2) p - d) / (p - 1)^2
double ef_b(double d, double p);

EfCoefficients ef_coefficients(const OperatorSpec& spec, double p);

enum class Regime { AboveL, Middle, BelowC };

std::string_view to_string(Regime regime);

struct PhasePoint {
  double t = 0.0;
  double x = 0.0;
  double dx = 0.0;
};

/// Linear coefficients and nonlinear weight of one branch of the switched system:
/// x'' = a x' + b x - x^p / weight.
struct BranchCoefficients {
  double dim;
  double a;
  double b;
  double weight;
};

BranchCoefficients branch_coefficients(const OperatorSpec& spec, double p, Regime regime);

/// Diffusion coefficient that scales the curve C: lambda for the plus and
/// semilinear branches, Lambda for the minus branch.
double curve_weight(const OperatorSpec& spec);

inline double line_L(double p, double x) { return 2.0 * x / (p - 1.0); }
double curve_C(const OperatorSpec& spec, double p, double x);

/// L belongs to AboveL and C belongs to BelowC.
Regime regime_of(const OperatorSpec& spec, double p, const PhasePoint& point);

/// u'' of the radial equation at (r, u, u'). Rejects r <= 0 and u < 0.
double radial_rhs(const OperatorSpec& spec, double p, double r, double u, double du);

/// x'' of the switched Emden-Fowler system, branch chosen by regime_of. Rejects x < 0.
double ef_rhs(const OperatorSpec& spec, double p, const PhasePoint& point);

/// Evaluation of one fixed branch, extended oddly in x so that integrator stages
/// slightly past x = 0 stay finite.
double ef_branch_rhs(const BranchCoefficients& coef, double p, double x, double dx);

/// Same extension for the radial equation; selects the Pucci coefficients from the signs.
double radial_rhs_extended(const OperatorSpec& spec, double p, double r, double u, double du);

/// E = y^2/2 - b x^2/2 + x^{p+1} / (weight (p+1))
double energy(double b_coef, double weight, double p, const PhasePoint& point);

/// E1 = (u')^2 / 2 + u^{p+1} / (lambda (p+1)); non-increasing on the rising arc.
double monotone_energy_E1(const OperatorSpec& spec, double p, double u, double du);

/// Odd power |x|^p sign(x).
inline double signed_pow(double x, double p) {
  return x >= 0.0 ? std::pow(x, p) : -std::pow(-x, p);
}

/// Interior equilibrium (c*, 0) of the below-C branch; NaN when b <= 0.
double equilibrium_c_star(const OperatorSpec& spec, double p);

/// Stable eigenvalue of the below-C linearization at the origin, -((d-2)p - d)/(p-1).
double fast_rate(const OperatorSpec& spec, double p);

/// Effective dimension felt by decreasing convex solutions (the below-C branch).
double decay_dimension(const OperatorSpec& spec);

/// Named reference exponents echoed in reports.
struct ReferenceExponents {
  double sobolev;         // (N+2)/(N-2)
  double serrin_plus;     // N+/(N+-2)
  double serrin_minus;    // N-/(N--2)
  double critical_plus;   // (N+ + 2)/(N+ - 2)
  double critical_minus;  // (N- + 2)/(N- - 2)
};

ReferenceExponents reference_exponents(const OperatorSpec& spec);

}  // namespace pucci

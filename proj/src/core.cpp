#include "pucci/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pucci {

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::PucciPlus: return "plus";
    case Branch::PucciMinus: return "minus";
    case Branch::Semilinear: return "semilinear";
  }
  return "?";
}

Branch branch_from_string(std::string_view name) {
  if (name == "plus" || name == "+") return Branch::PucciPlus;
  if (name == "minus" || name == "-") return Branch::PucciMinus;
  if (name == "semilinear" || name == "laplace") return Branch::Semilinear;
  throw InvalidSpec("unknown operator branch '" + std::string(name) +
                    "' (expected plus, minus or semilinear)");
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::AboveL: return "above_L";
    case Regime::Middle: return "middle";
    case Regime::BelowC: return "below_C";
  }
  return "?";
}

OperatorSpec OperatorSpec::make(double lambda, double Lambda, double dim, Branch branch) {
  OperatorSpec spec{lambda, Lambda, dim, branch};
  spec.check();
  return spec;
}

void OperatorSpec::check_basic() const {
  if (!(std::isfinite(lambda) && std::isfinite(Lambda) && std::isfinite(dim)))
    throw InvalidSpec("operator parameters must be finite");
  if (!(lambda > 0.0))
    throw InvalidSpec("lambda must be positive");
  if (!(lambda <= Lambda)) {
    std::ostringstream msg;
    msg << "ellipticity constants must satisfy 0 < lambda <= Lambda (got lambda=" << lambda
        << ", Lambda=" << Lambda << ")";
    throw InvalidSpec(msg.str());
  }
  if (branch == Branch::Semilinear && lambda != Lambda)
    throw InvalidSpec("the semilinear branch takes a single diffusion coefficient (lambda == Lambda)");
  if (!(dim >= 2.0))
    throw InvalidSpec("dimension must be at least 2");
}

void OperatorSpec::check() const {
  check_basic();
  const auto dims = effective_dimensions(*this);
  if (!(dims.plus > 2.0) || !(dims.minus > 2.0)) {
    std::ostringstream msg;
    msg << "effective dimensions must exceed 2 (got N+=" << dims.plus << ", N-=" << dims.minus
        << ")";
    throw InvalidSpec(msg.str());
  }
}

EffectiveDimensions effective_dimensions(const OperatorSpec& spec) {
  const double n1 = spec.dim - 1.0;
  return {spec.lambda / spec.Lambda * n1 + 1.0, spec.Lambda / spec.lambda * n1 + 1.0};
}

double ef_a(double d, double p) { return (d + 2.0 - (d - 2.0) * p) / (p - 1.0); }

double ef_b(double d, double p) {
  return 2.0 * ((d - 2.0) * p - d) / ((p - 1.0) * (p - 1.0));
}

static void require_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidSpec("exponent p must be a finite value > 1");
}

EfCoefficients ef_coefficients(const OperatorSpec& spec, double p) {
  require_exponent(p);
  const auto dims = effective_dimensions(spec);
  return {ef_a(spec.dim, p),       ef_b(spec.dim, p),       ef_a(dims.plus, p),
          ef_b(dims.plus, p),      ef_a(dims.minus, p),     ef_b(dims.minus, p),
          p};
}

BranchCoefficients branch_coefficients(const OperatorSpec& spec, double p, Regime regime) {
  const auto dims = effective_dimensions(spec);
  double d = spec.dim;
  double weight = spec.lambda;
  switch (spec.branch) {
    case Branch::Semilinear:
      break;
    case Branch::PucciPlus:
      if (regime == Regime::AboveL) {
        d = dims.minus;
      } else if (regime == Regime::BelowC) {
        d = dims.plus;
        weight = spec.Lambda;
      }
      break;
    case Branch::PucciMinus:
      weight = spec.Lambda;
      if (regime == Regime::AboveL) {
        d = dims.plus;
      } else if (regime == Regime::BelowC) {
        d = dims.minus;
        weight = spec.lambda;
      }
      break;
  }
  return {d, ef_a(d, p), ef_b(d, p), weight};
}

double curve_weight(const OperatorSpec& spec) {
  return spec.branch == Branch::PucciMinus ? spec.Lambda : spec.lambda;
}

double curve_C(const OperatorSpec& spec, double p, double x) {
  return line_L(p, x) - signed_pow(x, p) / (curve_weight(spec) * (spec.dim - 1.0));
}

Regime regime_of(const OperatorSpec& spec, double p, const PhasePoint& point) {
  if (point.dx >= line_L(p, point.x)) return Regime::AboveL;
  if (point.dx <= curve_C(spec, p, point.x)) return Regime::BelowC;
  return Regime::Middle;
}

double radial_rhs_extended(const OperatorSpec& spec, double p, double r, double u, double du) {
  const double up = signed_pow(u, p);
  const double n1 = spec.dim - 1.0;
  switch (spec.branch) {
    case Branch::Semilinear:
      return -n1 * du / r - up / spec.lambda;
    case Branch::PucciPlus: {
      const double k = du >= 0.0 ? spec.Lambda / spec.lambda * du : du;
      const double s = -spec.lambda * n1 / r * k - up;
      return s >= 0.0 ? s / spec.Lambda : s / spec.lambda;
    }
    case Branch::PucciMinus: {
      const double k = du >= 0.0 ? spec.lambda / spec.Lambda * du : du;
      const double s = -spec.Lambda * n1 / r * k - up;
      return s >= 0.0 ? s / spec.lambda : s / spec.Lambda;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double radial_rhs(const OperatorSpec& spec, double p, double r, double u, double du) {
  if (!(r > 0.0)) throw std::domain_error("radial_rhs needs r > 0; start from the Taylor expansion");
  if (u < 0.0) throw std::domain_error("radial_rhs needs u >= 0");
  return radial_rhs_extended(spec, p, r, u, du);
}

double ef_branch_rhs(const BranchCoefficients& coef, double p, double x, double dx) {
  return coef.a * dx + coef.b * x - signed_pow(x, p) / coef.weight;
}

double ef_rhs(const OperatorSpec& spec, double p, const PhasePoint& point) {
  if (point.x < 0.0) throw std::domain_error("ef_rhs needs x >= 0");
  const auto coef = branch_coefficients(spec, p, regime_of(spec, p, point));
  return ef_branch_rhs(coef, p, point.x, point.dx);
}

double energy(double b_coef, double weight, double p, const PhasePoint& point) {
  return 0.5 * point.dx * point.dx - 0.5 * b_coef * point.x * point.x +
         std::pow(point.x, p + 1.0) / (weight * (p + 1.0));
}

double monotone_energy_E1(const OperatorSpec& spec, double p, double u, double du) {
  return 0.5 * du * du + std::pow(u, p + 1.0) / (spec.lambda * (p + 1.0));
}

double decay_dimension(const OperatorSpec& spec) {
  const auto dims = effective_dimensions(spec);
  switch (spec.branch) {
    case Branch::PucciPlus: return dims.plus;
    case Branch::PucciMinus: return dims.minus;
    case Branch::Semilinear: return spec.dim;
  }
  return spec.dim;
}

double equilibrium_c_star(const OperatorSpec& spec, double p) {
  const auto coef = branch_coefficients(spec, p, Regime::BelowC);
  if (!(coef.b > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::pow(coef.b * coef.weight, 1.0 / (p - 1.0));
}

double fast_rate(const OperatorSpec& spec, double p) {
  const double d = decay_dimension(spec);
  return -((d - 2.0) * p - d) / (p - 1.0);
}

ReferenceExponents reference_exponents(const OperatorSpec& spec) {
  const auto dims = effective_dimensions(spec);
  const auto crit = [](double d) { return (d + 2.0) / (d - 2.0); };
  const auto serrin = [](double d) { return d / (d - 2.0); };
  return {crit(spec.dim), serrin(dims.plus), serrin(dims.minus), crit(dims.plus),
          crit(dims.minus)};
}

}  // namespace pucci

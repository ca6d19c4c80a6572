#pragma once

#include <optional>
#include <vector>

namespace pucci::oracle {

/// Reference integration of the semilinear entire problem
///   u'' + (nu-1) u'/r + u^p / lambda = 0,  u(0) = alpha, u'(0) = 0
/// with the classical fifth-order Cash-Karp scheme at a fixed step in long double.
/// Shares no code with the adaptive integrator.
struct EntireProfile {
  std::optional<double> first_zero;  // empty when u stays positive up to r_max
  std::vector<double> radii;         // requested radii that were reached
  std::vector<double> values;        // u at those radii
};

EntireProfile semilinear_entire(double nu, double p, double lambda, double alpha,
                                double step = 1e-5, double r_max = 20.0,
                                const std::vector<double>& radii = {});

}  // namespace pucci::oracle

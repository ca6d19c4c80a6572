#include "pucci/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pucci::oracle {

namespace {

using real = long double;

struct State {
  real u, v;
};

struct Field {
  real nu, p, lambda;
  State operator()(real r, const State& s) const {
    const real up = s.u >= 0 ? std::pow(s.u, p) : -std::pow(-s.u, p);
    return {s.v, -(nu - 1) * s.v / r - up / lambda};
  }
};

State axpy(const State& s, real h, std::initializer_list<std::pair<real, State>> terms) {
  State out = s;
  for (const auto& [c, k] : terms) {
    out.u += h * c * k.u;
    out.v += h * c * k.v;
  }
  return out;
}

/// Cash-Karp 5th-order solution of one step.
State cash_karp(const Field& f, real r, const State& s, real h) {
  const State k1 = f(r, s);
  const State k2 = f(r + h / 5, axpy(s, h, {{1.0L / 5, k1}}));
  const State k3 = f(r + 3 * h / 10, axpy(s, h, {{3.0L / 40, k1}, {9.0L / 40, k2}}));
  const State k4 =
      f(r + 3 * h / 5, axpy(s, h, {{3.0L / 10, k1}, {-9.0L / 10, k2}, {6.0L / 5, k3}}));
  const State k5 = f(r + h, axpy(s, h,
                                 {{-11.0L / 54, k1}, {5.0L / 2, k2}, {-70.0L / 27, k3},
                                  {35.0L / 27, k4}}));
  const State k6 = f(r + 7 * h / 8,
                     axpy(s, h,
                          {{1631.0L / 55296, k1}, {175.0L / 512, k2}, {575.0L / 13824, k3},
                           {44275.0L / 110592, k4}, {253.0L / 4096, k5}}));
  return axpy(s, h,
              {{37.0L / 378, k1}, {250.0L / 621, k3}, {125.0L / 594, k4}, {512.0L / 1771, k6}});
}

}  // namespace

EntireProfile semilinear_entire(double nu, double p, double lambda, double alpha, double step,
                                double r_max, const std::vector<double>& radii) {
  if (!(nu > 2) || !(p > 1) || !(lambda > 0) || !(alpha > 0) || !(step > 0))
    throw std::invalid_argument("oracle parameters out of range");
  const Field f{nu, p, lambda};
  const real a = alpha;
  const real a2 = -std::pow(a, (real)p) / (2 * f.nu * f.lambda);
  const real a4 = f.p * std::pow(a, 2 * f.p - 1) / (8 * f.nu * f.lambda * f.lambda * (f.nu + 2));

  std::vector<double> targets(radii);
  std::sort(targets.begin(), targets.end());
  std::size_t next = 0;

  EntireProfile out;
  real r = step;
  State s{a + a2 * r * r + a4 * r * r * r * r, 2 * a2 * r + 4 * a4 * r * r * r};
  while (next < targets.size() && targets[next] <= (double)r) ++next;

  const real h = step;
  while (r < r_max) {
    real hh = h;
    // Land exactly on requested radii.
    const bool hit = next < targets.size() && targets[next] < (double)(r + h);
    if (hit) hh = (real)targets[next] - r;
    const State s1 = hh > 0 ? cash_karp(f, r, s, hh) : s;
    if (s1.u <= 0 && s.u > 0) {
      // Zero inside the step: bisect on sub-steps of the same scheme.
      real lo = 0, hi = hh;
      for (int it = 0; it < 200 && hi - lo > 1e-30L; ++it) {
        const real mid = (lo + hi) / 2;
        if (cash_karp(f, r, s, mid).u > 0)
          lo = mid;
        else
          hi = mid;
      }
      out.first_zero = (double)(r + (lo + hi) / 2);
      return out;
    }
    r += hh;
    s = s1;
    if (hit) {
      out.radii.push_back(targets[next]);
      out.values.push_back((double)s.u);
      ++next;
    }
  }
  return out;
}

}  // namespace pucci::oracle

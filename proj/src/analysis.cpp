#include "pucci/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pucci {

namespace {

double ef_k(double p) { return 2.0 / (p - 1.0); }

Sample row_sample(const CurveTable& t, Eigen::Index i) {
  return {t(i, 0), Vec2{t(i, 1), t(i, 2)}, Vec2{t(i, 2), t(i, 3)}, 0};
}

/// Index of the first row with abscissa >= s.
Eigen::Index lower_row(const CurveTable& t, double s) {
  Eigen::Index lo = 0, hi = t.rows();
  while (lo < hi) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (t(mid, 0) < s)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

double least_squares_slope(const std::vector<double>& s, const std::vector<double>& v,
                           double* rms = nullptr) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = s[static_cast<std::size_t>(i)];
    b[i] = v[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  if (rms) *rms = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
  return c[1];
}

double hermite_interval(double h, double f0, double f1, double d0, double d1) {
  return 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
}

/// Integral of g(s, u(s)) over [t(i,0), t(i+1,0)], with u the quintic Hermite
/// interpolant of (u, u', u'') at both ends; 5-point Gauss-Legendre.
template <class G>
double quintic_gauss(const CurveTable& t, Eigen::Index i, G&& g) {
  static constexpr double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
  static constexpr double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};
  const double a = t(i, 0), h = t(i + 1, 0) - a;
  double sum = 0.0;
  for (int q = 0; q < 5; ++q) {
    const double s = 0.5 * (xg[q] + 1.0);
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5), h3 = 0.5 * (s3 - 2 * s4 + s5);
    const double h4 = -4 * s3 + 7 * s4 - 3 * s5, h5 = 10 * s3 - 15 * s4 + 6 * s5;
    const double u = h0 * t(i, 1) + h1 * h * t(i, 2) + h2 * h * h * t(i, 3) +
                     h3 * h * h * t(i + 1, 3) + h4 * h * t(i + 1, 2) + h5 * t(i + 1, 1);
    sum += wg[q] * g(a + s * h, u);
  }
  return 0.5 * h * sum;
}

}  // namespace

CurveTable emden_fowler_forward(const CurveTable& radial, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must exceed 1");
  const double k = ef_k(p);
  CurveTable out(radial.rows(), 4);
  for (Eigen::Index i = 0; i < radial.rows(); ++i) {
    const double r = radial(i, 0);
    if (!(r > 0.0)) throw std::domain_error("Emden-Fowler transform needs r > 0");
    const double rk = std::pow(r, k);
    const double x = rk * radial(i, 1);
    const double w = rk * r * radial(i, 2);  // r^{k+1} u'
    const double dx = k * x + w;
    out.row(i) << std::log(r), x, dx, k * dx + (k + 1.0) * w + rk * r * r * radial(i, 3);
  }
  return out;
}

CurveTable emden_fowler_inverse(const CurveTable& phase, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must exceed 1");
  const double k = ef_k(p);
  CurveTable out(phase.rows(), 4);
  for (Eigen::Index i = 0; i < phase.rows(); ++i) {
    const double t = phase(i, 0), x = phase(i, 1), dx = phase(i, 2), ddx = phase(i, 3);
    const double r = std::exp(t);
    const double rk = std::exp(-k * t);
    out.row(i) << r, rk * x, rk / r * (dx - k * x),
        rk / (r * r) * (ddx - (2.0 * k + 1.0) * dx + k * (k + 1.0) * x);
  }
  return out;
}

CurveTable kelvin_map(const CurveTable& radial, double nu) {
  const Eigen::Index n = radial.rows();
  CurveTable out(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = radial(i, 0);
    if (!(s > 0.0)) throw std::domain_error("Kelvin transform needs r > 0");
    const double r = 1.0 / s;
    const double u = radial(i, 1), du = radial(i, 2), ddu = radial(i, 3);
    const double rn = std::pow(r, -nu);
    out.row(n - 1 - i) << r, r * r * rn * u, (2.0 - nu) * r * rn * u - rn * du,
        (2.0 - nu) * (1.0 - nu) * rn * u + (2.0 * nu - 2.0) * rn / r * du + rn / (r * r) * ddu;
  }
  return out;
}

KelvinReport kelvin_transform(const CurveTable& exterior_radial, double nu, double p,
                              double lambda, double r_lo, double r_hi) {
  if (!(nu > 2.0)) throw std::invalid_argument("Kelvin transform needs nu > 2");
  if (!(0.0 < r_lo && r_lo < r_hi && r_hi <= 1.0))
    throw std::invalid_argument("Kelvin residual window must satisfy 0 < r_lo < r_hi <= 1");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < exterior_radial.rows(); ++i)
    if (exterior_radial(i, 0) >= 1.0) keep.push_back(i);
  CurveTable ext(static_cast<Eigen::Index>(keep.size()), 4);
  for (std::size_t i = 0; i < keep.size(); ++i)
    ext.row(static_cast<Eigen::Index>(i)) = exterior_radial.row(keep[i]);
  if (ext.rows() < 2) throw std::domain_error("Kelvin transform needs samples on r >= 1");

  KelvinReport rep;
  rep.transformed = kelvin_map(ext, nu);
  const CurveTable& kt = rep.transformed;
  rep.r_lo = r_lo;
  rep.r_hi = r_hi;
  rep.covered_lo = kt(0, 0);
  rep.covered_hi = kt(kt.rows() - 1, 0);
  if (rep.covered_lo > 0.01 * r_lo * (1.0 + 1e-12))
    throw std::domain_error("coverage gap: exterior data end at r = " +
                            std::to_string(1.0 / rep.covered_lo) + ", need " +
                            std::to_string(100.0 / r_lo));

  const double m2 = p * (nu - 2.0) - nu - 2.0;
  const double m = p * (nu - 2.0) - 3.0;
  double pw = 0.0, integ = 0.0;
  for (Eigen::Index i = 0; i < kt.rows(); ++i) {
    const double r = kt(i, 0);
    if (r < r_lo || r > r_hi) continue;
    const double t1 = kt(i, 3), t2 = (nu - 1.0) * kt(i, 2) / r,
                 t3 = std::pow(r, m2) * std::pow(kt(i, 1), p) / lambda;
    pw = std::max(pw, std::abs(t1 + t2 + t3) / (std::abs(t1) + std::abs(t2) + std::abs(t3)));
    if (i + 1 >= kt.rows() || kt(i + 1, 0) > r_hi) continue;
    const auto flux = [&](Eigen::Index j) { return std::pow(kt(j, 0), nu - 1.0) * kt(j, 2); };
    const double dF = flux(i + 1) - flux(i);
    const double Q = quintic_gauss(kt, i, [&](double s, double u) {
      return std::pow(s, m) * std::pow(std::max(u, 0.0), p) / lambda;
    });
    integ = std::max(integ, std::abs(dF + Q) / std::abs(Q));
  }
  rep.pointwise_residual = pw;
  rep.integrated_residual = integ;

  // Limit at the origin: spread over the decade [r_lo/100, r_lo/10].
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < kt.rows(); ++i) {
    const double r = kt(i, 0);
    if (r < 0.01 * r_lo || r > 0.1 * r_lo) continue;
    lo = std::min(lo, kt(i, 1));
    hi = std::max(hi, kt(i, 1));
  }
  rep.limit = kt(lower_row(kt, 0.01 * r_lo * (1.0 - 1e-12)), 1);
  rep.limit_drift = (hi - lo) / std::abs(rep.limit);
  return rep;
}

double hermite_quadrature(const Eigen::ArrayXd& s, const Eigen::ArrayXd& f,
                          const Eigen::ArrayXd& df) {
  if (s.size() != f.size() || s.size() != df.size())
    throw std::invalid_argument("quadrature arrays must have equal length");
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < s.size(); ++i)
    sum += hermite_interval(s[i + 1] - s[i], f[i], f[i + 1], df[i], df[i + 1]);
  return sum;
}

Vec2 table_state_at(const CurveTable& table, double s) {
  if (table.rows() == 0) throw std::invalid_argument("empty table");
  const Eigen::Index j = lower_row(table, s);
  if (j < table.rows() && table(j, 0) == s) return {table(j, 1), table(j, 2)};
  if (j == 0 || j == table.rows())
    throw std::domain_error("abscissa " + std::to_string(s) + " outside the sampled range");
  return hermite(row_sample(table, j - 1), row_sample(table, j), s);
}

double pohozaev_residual(const CurveTable& radial, double nu, double p, double lambda, double r) {
  if (radial.rows() < 2) throw std::invalid_argument("Pohozaev residual needs samples");
  if (!(radial(0, 0) < 1e-3))
    throw std::invalid_argument(
        "Pohozaev identity integrates from r = 0; the data must start at the origin (entire "
        "solutions only)");
  if (r > radial(radial.rows() - 1, 0) || r <= radial(0, 0))
    throw std::domain_error("radius outside the sampled range");

  const auto f = [&](double s, double u) { return std::pow(s, nu - 1.0) * std::pow(u, p + 1.0); };
  const auto df = [&](double s, double u, double du) {
    return (nu - 1.0) * std::pow(s, nu - 2.0) * std::pow(u, p + 1.0) +
           (p + 1.0) * std::pow(s, nu - 1.0) * std::pow(u, p) * du;
  };

  // [0, s0]: u is constant to O(s0^2).
  const double s0 = radial(0, 0);
  double integral = std::pow(s0, nu) / nu * std::pow(radial(0, 1), p + 1.0);
  const Vec2 end = table_state_at(radial, r);
  for (Eigen::Index i = 0; i + 1 < radial.rows() && radial(i, 0) < r; ++i) {
    const double a = radial(i, 0);
    const bool last = radial(i + 1, 0) >= r;
    const double b = last ? r : radial(i + 1, 0);
    const double ua = radial(i, 1), dua = radial(i, 2);
    const double ub = last ? end[0] : radial(i + 1, 1);
    const double dub = last ? end[1] : radial(i + 1, 2);
    const double h_lin = b - a, h_log = std::log(b / a);
    if (h_lin <= h_log) {
      integral += hermite_interval(h_lin, f(a, ua), f(b, ub), df(a, ua, dua), df(b, ub, dub));
    } else {
      // Variable log s: integrand s f(s), derivative s (f + s f').
      const double ga = a * f(a, ua), gb = b * f(b, ub);
      const double dga = a * (f(a, ua) + a * df(a, ua, dua));
      const double dgb = b * (f(b, ub) + b * df(b, ub, dub));
      integral += hermite_interval(h_log, ga, gb, dga, dgb);
    }
  }

  const double u = end[0], du = end[1];
  const double rn = std::pow(r, nu);
  const double lhs = 0.5 * rn * du * du + rn * std::pow(u, p + 1.0) / (lambda * (p + 1.0)) +
                     0.5 * (nu - 2.0) * std::pow(r, nu - 1.0) * u * du;
  const double rhs = (nu / (p + 1.0) - 0.5 * (nu - 2.0)) * integral / lambda;
  return lhs - rhs;
}

double pohozaev_residual(const RadialSolution& sol, double r) {
  if (sol.domain != Domain::Entire)
    throw std::invalid_argument("Pohozaev identity applies to entire-problem solutions only");
  if (sol.spec.branch != Branch::Semilinear)
    throw std::invalid_argument("Pohozaev identity is stated for the semilinear branch");
  return pohozaev_residual(sol.radial_table(), sol.spec.dim, sol.p, sol.spec.lambda, r);
}

double log_slope(const CurveTable& radial, double r_lo, double r_hi) {
  std::vector<double> s, v;
  for (Eigen::Index i = 0; i < radial.rows(); ++i) {
    const double r = radial(i, 0);
    if (r < r_lo || r > r_hi || !(radial(i, 1) > 0.0)) continue;
    s.push_back(std::log(r));
    v.push_back(std::log(radial(i, 1)));
  }
  if (s.size() < 3) throw std::domain_error("fit window holds fewer than 3 positive samples");
  return least_squares_slope(s, v);
}

FitReport fit_fast_decay(const CurveTable& radial, double n_tilde,
                         std::optional<std::pair<double, double>> window, double slope_tol) {
  if (radial.rows() < 3) throw std::domain_error("fit needs at least 3 samples");
  const double r_max = radial(radial.rows() - 1, 0);
  const auto [lo, hi] = window.value_or(std::pair{r_max / 10.0, r_max});
  if (!(lo > 0.0) || hi / lo < 10.0 * (1.0 - 1e-12))
    throw std::domain_error("fit window must cover at least one decade of r");
  if (lo < radial(0, 0) * (1.0 - 1e-12) || hi > r_max * (1.0 + 1e-12))
    throw std::domain_error("fit window exceeds the sampled range");

  FitReport rep;
  rep.window_lo = lo;
  rep.window_hi = hi;
  rep.slope = log_slope(radial, lo, hi);
  rep.residual = std::abs(rep.slope + (n_tilde - 2.0));
  rep.converged = rep.residual < slope_tol;
  const Eigen::Index j = std::min(lower_row(radial, hi * (1.0 + 1e-12)), radial.rows()) - 1;
  rep.estimate = std::pow(radial(j, 0), n_tilde - 2.0) * radial(j, 1);
  return rep;
}

FitReport fit_slow_decay(const CurveTable& phase, double c_star, double tail_fraction,
                         double radius) {
  if (phase.rows() < 2) throw std::domain_error("fit needs at least 2 samples");
  const double t0 = phase(0, 0), t1 = phase(phase.rows() - 1, 0);
  const double lo = t1 - tail_fraction * (t1 - t0);
  FitReport rep;
  rep.window_lo = lo;
  rep.window_hi = t1;
  for (Eigen::Index i = 0; i < phase.rows(); ++i)
    if (phase(i, 0) >= lo) rep.residual = std::max(rep.residual, std::abs(phase(i, 1) - c_star));
  rep.estimate = phase(phase.rows() - 1, 1);
  rep.converged = std::isfinite(c_star) && rep.residual < radius;
  return rep;
}

OscillationStats oscillation_stats(const Trajectory& phase, double tail_fraction) {
  OscillationStats st;
  if (phase.samples.empty()) return st;
  const double lo = phase.end() - tail_fraction * (phase.end() - phase.start());
  st.inf_est = std::numeric_limits<double>::infinity();
  st.sup_est = -st.inf_est;
  for (const auto& s : phase.samples) {
    if (s.t < lo) continue;
    st.inf_est = std::min(st.inf_est, s.y[0]);
    st.sup_est = std::max(st.sup_est, s.y[0]);
  }
  st.crossing_count = static_cast<int>(phase.count(EventKind::CrossC_FromAbove) +
                                       phase.count(EventKind::CrossC_FromBelow));
  return st;
}

CurveTable scaling_map(const CurveTable& radial, double p, double ratio) {
  if (!(ratio > 0.0)) throw std::invalid_argument("scaling ratio must be positive");
  const double s = std::pow(ratio, 0.5 * (p - 1.0));
  CurveTable out(radial.rows(), 4);
  out.col(0) = radial.col(0) / s;
  out.col(1) = ratio * radial.col(1);
  out.col(2) = ratio * s * radial.col(2);
  out.col(3) = ratio * s * s * radial.col(3);
  return out;
}

double support_distance(const CurveTable& a, const CurveTable& b, double lo, double hi) {
  if (b.rows() < 2) throw std::invalid_argument("reference curve needs at least 2 samples");
  const auto point = [&](Eigen::Index j, double theta) {
    const Sample s0 = row_sample(b, j), s1 = row_sample(b, j + 1);
    return hermite(s0, s1, s0.t + theta * (s1.t - s0.t));
  };
  double worst = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a(i, 0) < lo || a(i, 0) > hi) continue;
    any = true;
    const Vec2 P{a(i, 1), a(i, 2)};
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double d = (Vec2{b(j, 1), b(j, 2)} - P).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    for (Eigen::Index j = std::max<Eigen::Index>(best - 1, 0);
         j <= std::min<Eigen::Index>(best, b.rows() - 2); ++j) {
      // Golden-section search on the Hermite arc.
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double x0 = 0.0, x1 = 1.0;
      double c = x1 - g * (x1 - x0), d = x0 + g * (x1 - x0);
      double fc = (point(j, c) - P).norm(), fd = (point(j, d) - P).norm();
      for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
          x1 = d;
          d = c;
          fd = fc;
          c = x1 - g * (x1 - x0);
          fc = (point(j, c) - P).norm();
        } else {
          x0 = c;
          c = d;
          fc = fd;
          d = x0 + g * (x1 - x0);
          fd = (point(j, d) - P).norm();
        }
      }
      best_d = std::min({best_d, fc, fd});
    }
    worst = std::max(worst, best_d);
  }
  if (!any) throw std::domain_error("no samples inside the comparison window");
  return worst;
}

std::vector<SegmentAudit> energy_dissipation_audit(const Trajectory& phase,
                                                   const OperatorSpec& spec, double p) {
  std::vector<SegmentAudit> out;
  const auto& s = phase.samples;
  std::size_t i = 0;
  while (i + 1 < s.size()) {
    std::size_t j = i + 1;
    while (j < s.size() && s[j].label == s[i].label) ++j;
    const std::size_t end = std::min(j, s.size() - 1);
    const Regime regime = static_cast<Regime>(s[i].label);
    const auto coef = branch_coefficients(spec, p, regime);
    const auto E = [&](const Sample& q) {
      return energy(coef.b, coef.weight, p, {q.t, std::max(q.y[0], 0.0), q.y[1]});
    };
    // x' is quintic Hermite from its first two derivatives at both ends.
    const auto third = [&](const Sample& q) {
      const double x = std::max(q.y[0], 0.0);
      return coef.a * q.dy[1] + coef.b * q.y[1] - p * std::pow(x, p - 1.0) * q.y[1] / coef.weight;
    };
    double diss = 0.0;
    CurveTable pair(2, 4);
    for (std::size_t m = i; m < end; ++m) {
      pair.row(0) << s[m].t, s[m].y[1], s[m].dy[1], third(s[m]);
      pair.row(1) << s[m + 1].t, s[m + 1].y[1], s[m + 1].dy[1], third(s[m + 1]);
      diss += quintic_gauss(pair, 0, [](double, double v) { return v * v; });
    }
    diss *= coef.a;
    const double dE = E(s[end]) - E(s[i]);
    if (end > i) out.push_back({s[i].t, s[end].t, regime, dE, diss, std::abs(dE - diss)});
    i = j;
  }
  return out;
}

CrossingAudit audit_crossings(const RadialSolution& sol) {
  CrossingAudit audit;
  audit.above_margin = std::numeric_limits<double>::infinity();
  audit.below_excess = -std::numeric_limits<double>::infinity();
  const double bound = curve_weight(sol.spec) * (sol.spec.dim - 1.0) / sol.p;
  for (const auto& e : sol.phase_events()) {
    const double v = std::pow(std::max(e.state[0], 0.0), sol.p - 1.0) - bound;
    switch (e.kind) {
      case EventKind::CrossC_FromAbove:
        ++audit.from_above;
        audit.above_margin = std::min(audit.above_margin, v);
        break;
      case EventKind::CrossC_FromBelow:
        ++audit.from_below;
        audit.below_excess = std::max(audit.below_excess, v);
        break;
      case EventKind::XAxisCross: ++audit.x_axis; break;
      default: break;
    }
  }
  return audit;
}

double max_e1_increase(const RadialSolution& sol) {
  const CurveTable t = sol.radial_table();
  double worst = 0.0;
  const double tau = sol.landmarks.tau.value_or(std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i + 1 < t.rows(); ++i) {
    if (t(i + 1, 0) > tau || t(i, 0) < 1.0) continue;
    const double e0 = monotone_energy_E1(sol.spec, sol.p, std::max(t(i, 1), 0.0), t(i, 2));
    const double e1 = monotone_energy_E1(sol.spec, sol.p, std::max(t(i + 1, 1), 0.0), t(i + 1, 2));
    worst = std::max(worst, e1 - e0);
  }
  return worst;
}

}  // namespace pucci

#include "pucci/verify.hpp"

#include "pucci/analysis.hpp"
#include "pucci/io.hpp"
#include "pucci/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pucci {

const std::vector<std::pair<int, std::string>>& criterion_ids() {
  static const std::vector<std::pair<int, std::string>> ids{
      {1, "critical-bubble"},      {2, "critical-exponent-recovery"},
      {3, "ordering"},             {4, "lane-emden-zero"},
      {5, "dichotomy"},            {6, "fast-decay-rate"},
      {7, "slow-decay"},           {8, "pseudo-slow"},
      {9, "energy-dissipation"},   {10, "vector-field-continuity"},
      {11, "pohozaev"},            {12, "kelvin-duality"},
      {13, "scaling-covariance"},  {14, "crossing-audits"},
      {15, "tolerance-robustness"}};
  return ids;
}

std::vector<int> select_criteria(const std::vector<std::string>& only) {
  std::vector<int> out;
  if (only.empty()) {
    for (const auto& [n, id] : criterion_ids()) out.push_back(n);
    return out;
  }
  for (const auto& name : only) {
    int found = 0;
    for (const auto& [n, id] : criterion_ids())
      if (id == name || std::to_string(n) == name) found = n;
    if (!found) throw std::invalid_argument("unknown criterion '" + name + "'");
    if (std::find(out.begin(), out.end(), found) == out.end()) out.push_back(found);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string num10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Computed once on first use, shared by every criterion that needs it.
template <class T>
class Lazy {
 public:
  explicit Lazy(std::function<T()> make) : make_(std::move(make)) {}

  const T& get() {
    std::call_once(flag_, [this] {
      const auto t0 = Clock::now();
      try {
        value_.emplace(make_());
      } catch (...) {
        error_ = std::current_exception();
      }
      seconds_ = seconds_since(t0);
    });
    if (error_) std::rethrow_exception(error_);
    return *value_;
  }
  /// Wall time of the computation itself.
  double seconds() {
    get();
    return seconds_;
  }

 private:
  std::function<T()> make_;
  std::once_flag flag_;
  std::optional<T> value_;
  std::exception_ptr error_;
  double seconds_ = 0.0;
};

const OperatorSpec kSemi3 = OperatorSpec::semilinear(3.0);
const OperatorSpec kSemi4 = OperatorSpec::semilinear(4.0);
const OperatorSpec kPlus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciPlus);
const OperatorSpec kMinus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciMinus);

std::vector<double> alpha_grid() {
  std::vector<double> g;
  for (int i = 0; i < 20; ++i) g.push_back(1e-4 * std::pow(1e6, i / 19.0));
  return g;
}

const std::vector<double> kScalingRadii{0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0};

struct AlphaStarRun {
  double p = 0.0;
  BisectionResult star;
};

/// Every run of the suite, computed at most once.
struct SuiteContext {
  SolveOpts base;
  SolveOpts half;

  explicit SuiteContext(double tol_scale) {
    base.integrator = base.integrator.tightened(tol_scale);
    half = base;
    half.integrator.rel_tol *= 0.5;
  }

  static SolveOpts with_checkpoints(SolveOpts o, std::vector<double> r) {
    o.radial_checkpoints = std::move(r);
    return o;
  }

  Lazy<RadialSolution> bubble{[this] {
    return solve_entire(kSemi3, 5.0, 1.0, with_checkpoints(base, {1.0, 3.0, 100.0, 1000.0}));
  }};
  Lazy<RadialSolution> lane_emden{
      [this] { return solve_entire(kSemi3, 3.0, 1.0, with_checkpoints(base, {1.0, 3.0})); }};
  Lazy<double> lane_emden_oracle{[] {
    const auto ref = oracle::semilinear_entire(3.0, 3.0, 1.0, 1.0, 1e-5, 20.0);
    if (!ref.first_zero) throw std::runtime_error("oracle found no zero");
    return *ref.first_zero;
  }};

  Lazy<BisectionResult> pstar_semi3{[this] { return find_critical_exponent(kSemi3, base); }};
  Lazy<BisectionResult> pstar_semi4{[this] { return find_critical_exponent(kSemi4, base); }};
  Lazy<BisectionResult> pstar_plus{[this] { return find_critical_exponent(kPlus, base); }};
  Lazy<BisectionResult> pstar_minus{[this] { return find_critical_exponent(kMinus, base); }};
  Lazy<BisectionResult> pstar_plus_half{[this] { return find_critical_exponent(kPlus, half); }};
  Lazy<BisectionResult> pstar_minus_half{[this] { return find_critical_exponent(kMinus, half); }};

  // Dichotomy above and below p+*.
  Lazy<AlphaStarRun> astar_plus{[this] {
    const double p = pstar_plus.get().value + 0.2;
    return AlphaStarRun{p, find_alpha_star(kPlus, p, base)};
  }};
  Lazy<BisectionResult> astar_plus_half{
      [this] { return find_alpha_star(kPlus, astar_plus.get().p, half); }};
  Lazy<RadialSolution> fast_run{[this] { return fast_run_with(base); }};
  Lazy<RadialSolution> fast_run_half{[this] { return fast_run_with(half); }};
  Lazy<std::vector<RadialSolution>> grid_runs{[this] { return grid_with(base); }};
  Lazy<std::vector<RadialSolution>> grid_runs_half{[this] { return grid_with(half); }};

  RadialSolution fast_run_with(const SolveOpts& o) {
    const auto& a = astar_plus.get();
    return solve_exterior(kPlus, a.p, a.star.value, with_checkpoints(o, {100.0, 1000.0}));
  }
  std::vector<RadialSolution> grid_with(const SolveOpts& o) {
    const double p = pstar_plus.get().value - 0.2;
    std::vector<RadialSolution> out;
    for (double a : alpha_grid()) out.push_back(solve_exterior(kPlus, p, a, o));
    return out;
  }

  // Semilinear N = 3, p = 6.
  Lazy<BisectionResult> astar_semi6{[this] { return find_alpha_star(kSemi3, 6.0, base); }};
  Lazy<BisectionResult> astar_semi6_half{[this] { return find_alpha_star(kSemi3, 6.0, half); }};
  Lazy<RadialSolution> slow_run{
      [this] { return solve_exterior(kSemi3, 6.0, 0.5 * astar_semi6.get().value, base); }};
  Lazy<RadialSolution> slow_run_half{
      [this] { return solve_exterior(kSemi3, 6.0, 0.5 * astar_semi6.get().value, half); }};
  Lazy<RadialSolution> kelvin_run{
      [this] { return solve_exterior(kSemi3, 6.0, astar_semi6.get().value, base); }};

  // Pseudo-slow regime between p+* and the upper critical exponent.
  Lazy<AlphaStarRun> astar_pseudo{[this] {
    const double p = 0.5 * (pstar_plus.get().value + reference_exponents(kPlus).critical_plus);
    return AlphaStarRun{p, find_alpha_star(kPlus, p, base)};
  }};
  Lazy<BisectionResult> astar_pseudo_half{
      [this] { return find_alpha_star(kPlus, astar_pseudo.get().p, half); }};
  Lazy<RadialSolution> pseudo_run{[this] {
    const auto& a = astar_pseudo.get();
    return solve_exterior(kPlus, a.p, 0.5 * a.star.value, base);
  }};
  Lazy<RadialSolution> pseudo_run_half{[this] {
    const auto& a = astar_pseudo.get();
    return solve_exterior(kPlus, a.p, 0.5 * a.star.value, half);
  }};

  // Scaling pair: v_2(s) = 2 v_1(4 s) for p = 5.
  Lazy<RadialSolution> scale_one{[this] {
    std::vector<double> r;
    for (double s : kScalingRadii) r.push_back(4.0 * s);
    return solve_entire(kSemi3, 5.0, 1.0, with_checkpoints(base, r));
  }};
  Lazy<RadialSolution> scale_two{
      [this] { return solve_entire(kSemi3, 5.0, 2.0, with_checkpoints(base, kScalingRadii)); }};
};

struct Outcome {
  bool passed = false;
  std::string measured;
  std::string tolerance;
};

using CriterionFn = std::function<Outcome(SuiteContext&)>;

double max_energy_error(const RadialSolution& sol) {
  double worst = 0.0;
  for (const auto& seg : energy_dissipation_audit(sol.phase, sol.spec, sol.p))
    worst = std::max(worst, seg.error);
  return worst;
}

Outcome critical_bubble(SuiteContext& c) {
  const auto& sol = c.bubble.get();
  const CurveTable t = sol.radial_table();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    const double r = t(i, 0);
    if (r > 100.0) break;
    const double exact = 1.0 / std::sqrt(1.0 + r * r / 3.0);
    worst = std::max(worst, std::abs(t(i, 1) - exact) / exact);
  }
  const FitReport fit = fit_fast_decay(t, 3.0, std::pair{100.0, 1000.0});
  const double dC = std::abs(fit.estimate - std::sqrt(3.0));
  const double secs = c.bubble.seconds();
  return {worst <= 1e-6 && dC <= 1e-3 && secs < 5.0,
          "max rel err " + num(worst) + " on [1e-6,100]; C=" + num10(fit.estimate) + " (|C-sqrt3|=" +
              num(dC) + "); " + num(secs) + " s",
          "rel err <= 1e-6; |C-sqrt3| <= 1e-3; < 5 s"};
}

Outcome exponent_recovery(SuiteContext& c) {
  const auto& a = c.pstar_semi3.get();
  const auto& b = c.pstar_semi4.get();
  const double ta = c.pstar_semi3.seconds(), tb = c.pstar_semi4.seconds();
  const bool ok = std::abs(a.value - 5.0) <= 1e-3 && std::abs(b.value - 3.0) <= 1e-3 &&
                  ta < 120.0 && tb < 120.0;
  return {ok,
          "N=3: " + num10(a.value) + " (" + num(ta) + " s); N=4: " + num10(b.value) + " (" +
              num(tb) + " s)",
          "5 +- 1e-3 and 3 +- 1e-3; < 120 s each"};
}

Outcome ordering(SuiteContext& c) {
  const double pp = c.pstar_plus.get().value;
  const double pm = c.pstar_minus.get().value;
  const double secs = c.pstar_plus.seconds() + c.pstar_minus.seconds();
  constexpr double m = 1e-3;
  const bool ok = pm > 1.8 + m && pm < 3.0 - m && pp > 3.0 + m && pp < 9.0 - m && pp > 5.0 + m &&
                  secs < 600.0;
  return {ok, "p-*=" + num10(pm) + ", p+*=" + num10(pp) + "; " + num(secs) + " s",
          "1.8 < p-* < 3 < p+* < 9, p+* > 5, margins >= 1e-3; < 600 s"};
}

Outcome lane_emden_zero(SuiteContext& c) {
  const auto& sol = c.lane_emden.get();
  const double ref = c.lane_emden_oracle.get();
  const double secs = c.lane_emden.seconds() + c.lane_emden_oracle.seconds();
  if (sol.classification.tag != DecayTag::FiniteZero)
    return {false, "class " + std::string(to_string(sol.classification.tag)), "FiniteZero"};
  const double rel = std::abs(sol.classification.rho - ref) / ref;
  return {rel <= 1e-4 && secs < 5.0,
          "r=" + num10(sol.classification.rho) + ", oracle=" + num10(ref) + ", rel " + num(rel) +
              "; " + num(secs) + " s",
          "FiniteZero; rel <= 1e-4; < 5 s"};
}

Outcome dichotomy(SuiteContext& c) {
  const auto& a = c.astar_plus.get();
  const auto& grid = c.grid_runs.get();
  int finite = 0;
  for (const auto& s : grid) finite += s.classification.tag == DecayTag::FiniteZero;
  const double width = a.star.hi - a.star.lo;
  const double secs = c.astar_plus.seconds() + c.grid_runs.seconds() + c.pstar_plus.seconds();
  const bool ok = a.star.value > 0.0 && width <= 1e-8 && finite == 20 && secs < 600.0;
  return {ok,
          "p=" + num10(a.p) + ": alpha*=" + num10(a.star.value) + " width " + num(width) + " [" +
              std::string(to_string(a.star.lo_class.tag)) + "/" +
              std::string(to_string(a.star.hi_class.tag)) + "]; p-0.4: " + std::to_string(finite) +
              "/20 FiniteZero; " + num(secs) + " s",
          "alpha* > 0, width <= 1e-8; 20/20 FiniteZero; < 600 s"};
}

Outcome fast_decay_rate(SuiteContext& c) {
  const auto& sol = c.fast_run.get();
  const double slope = log_slope(sol.radial_table(), 100.0, 1000.0);
  const double target = -(effective_dimensions(kPlus).plus - 2.0);
  return {std::abs(slope - target) <= 5e-2,
          "slope " + num10(slope) + " on r in [1e2,1e3] (class " +
              std::string(to_string(sol.classification.tag)) + ")",
          "|slope + 0.5| <= 5e-2"};
}

Outcome slow_decay(SuiteContext& c) {
  const auto& sol = c.slow_run.get();
  const double target = std::pow(0.24, 0.2);
  const double x_end = sol.phase.samples.back().y[0];
  const double dev = std::abs(x_end - target);
  const bool ok = sol.phase.terminal == Terminal::HorizonReached && dev < 1e-4 &&
                  sol.classification.tag == DecayTag::Slow;
  return {ok,
          "x(T)=" + num10(x_end) + " at T=" + num(sol.phase.end()) + ", |x-c*|=" + num(dev) +
              ", class " + std::string(to_string(sol.classification.tag)),
          "|x(T) - 0.24^0.2| < 1e-4; Slow"};
}

Outcome pseudo_slow(SuiteContext& c) {
  const auto& sol = c.pseudo_run.get();
  const auto& dc = sol.classification;
  const bool ok = dc.tag == DecayTag::PseudoSlow && dc.crossings >= 10 &&
                  dc.amplitude_ratio >= 0.9 && dc.amplitude_ratio <= 1.1;
  return {ok,
          "p=" + num10(sol.p) + ", alpha=" + num10(sol.alpha) + ": " +
              std::string(to_string(dc.tag)) + ", " + std::to_string(dc.crossings) +
              " C-crossings, ratio " + num10(dc.amplitude_ratio) + ", x in [" + num(dc.inf_est) +
              ", " + num(dc.sup_est) + "]",
          "PseudoSlow; >= 10 crossings; ratio in [0.9, 1.1]"};
}

Outcome energy_dissipation(SuiteContext& c) {
  double worst = 0.0;
  std::size_t segments = 0;
  std::vector<const RadialSolution*> runs{&c.fast_run.get(), &c.slow_run.get(),
                                          &c.pseudo_run.get()};
  for (const auto& s : c.grid_runs.get()) runs.push_back(&s);
  for (const auto* s : runs) {
    segments += energy_dissipation_audit(s->phase, s->spec, s->p).size();
    worst = std::max(worst, max_energy_error(*s));
  }
  return {worst <= 1e-6,
          "max |dE - a int x'^2| = " + num(worst) + " over " + std::to_string(segments) +
              " segments of " + std::to_string(runs.size()) + " runs",
          "<= 1e-6"};
}

Outcome vector_field_continuity(SuiteContext&) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> up(1.2, 12.0), ux(0.01, 3.0);
  const std::vector<OperatorSpec> specs{kPlus, kMinus, kSemi3,
                                        OperatorSpec::make(1.0, 3.0, 6.0, Branch::PucciPlus),
                                        OperatorSpec::make(1.0, 3.0, 6.0, Branch::PucciMinus)};
  double worst = 0.0;
  const auto rel = [](const BranchCoefficients& a, const BranchCoefficients& b, double p, double x,
                      double y) {
    const double fa = ef_branch_rhs(a, p, x, y), fb = ef_branch_rhs(b, p, x, y);
    const auto scale = [&](const BranchCoefficients& c) {
      return std::abs(c.a * y) + std::abs(c.b * x) + std::pow(x, p) / c.weight;
    };
    return std::abs(fa - fb) / std::max(scale(a), scale(b));
  };
  for (int i = 0; i < 1000; ++i) {
    const auto& spec = specs[static_cast<std::size_t>(i) % specs.size()];
    const double p = up(rng), x = ux(rng);
    const auto above = branch_coefficients(spec, p, Regime::AboveL);
    const auto middle = branch_coefficients(spec, p, Regime::Middle);
    const auto below = branch_coefficients(spec, p, Regime::BelowC);
    worst = std::max(worst, rel(above, middle, p, x, line_L(p, x)));
    worst = std::max(worst, rel(middle, below, p, x, curve_C(spec, p, x)));
  }
  return {worst <= 1e-12, "max relative jump " + num(worst) + " over 1000 L and 1000 C points",
          "<= 1e-12 (relative to the term magnitudes)"};
}

Outcome pohozaev(SuiteContext& c) {
  double worst = 0.0;
  std::string detail;
  for (const auto* sol : {&c.lane_emden.get(), &c.bubble.get()})
    for (double r : {1.0, 3.0}) {
      const double res = std::abs(pohozaev_residual(*sol, r));
      worst = std::max(worst, res);
    }
  // Negative control: u = 1 is not a solution.
  const int n = 3001;
  CurveTable flat(n, 4);
  for (int i = 0; i < n; ++i) flat.row(i) << 1e-6 + (3.0 - 1e-6) * i / (n - 1), 1.0, 0.0, 0.0;
  flat(n - 1, 0) = 3.0;
  const double control =
      std::min(std::abs(pohozaev_residual(flat, 3.0, 3.0, 1.0, 1.0)),
               std::abs(pohozaev_residual(flat, 3.0, 3.0, 1.0, 3.0)));
  return {worst <= 1e-6 && control >= 1e-2,
          "max residual " + num(worst) + " (Lane-Emden, bubble; r = 1, 3); control " + num(control),
          "<= 1e-6; control >= 1e-2"};
}

Outcome kelvin_duality(SuiteContext& c) {
  const auto& sol = c.kelvin_run.get();
  const KelvinReport k = kelvin_transform(sol.radial_table(), 3.0, 6.0, 1.0, 0.01, 0.5);
  const double res = std::max(k.integrated_residual, k.pointwise_residual);
  const bool ok = res <= 1e-5 && k.limit_drift <= 1e-5 && k.limit > 0.0;
  return {ok,
          "residual " + num(res) + " (integrated " + num(k.integrated_residual) + ", pointwise " +
              num(k.pointwise_residual) + ") on [0.01,0.5]; u_bar(0+) ~ " + num10(k.limit) +
              ", drift " + num(k.limit_drift) + " on [1e-4,1e-3]",
          "residual <= 1e-5; drift <= 1e-5"};
}

Outcome scaling_covariance(SuiteContext& c) {
  const CurveTable mapped = scaling_map(c.scale_one.get().radial_table(), 5.0, 2.0);
  const CurveTable direct = c.scale_two.get().radial_table();
  const auto row_at = [](const CurveTable& t, double s) -> Eigen::Index {
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      if (std::abs(t(i, 0) - s) <= 1e-12 * s) return i;
    throw std::runtime_error("no sample at r = " + num(s));
  };
  double worst = 0.0;
  for (double s : kScalingRadii) {
    const Eigen::Index i = row_at(mapped, s), j = row_at(direct, s);
    worst = std::max(worst, std::abs(mapped(i, 1) - direct(j, 1)) / std::abs(direct(j, 1)));
    worst = std::max(worst, std::abs(mapped(i, 2) - direct(j, 2)) / std::abs(direct(j, 2)));
  }
  return {worst <= 1e-8, "max relative difference " + num(worst) + " at " +
                             std::to_string(kScalingRadii.size()) + " radii (u and u')",
          "<= 1e-8"};
}

Outcome crossing_audits(SuiteContext& c) {
  std::vector<const RadialSolution*> runs{
      &c.bubble.get(),     &c.lane_emden.get(), &c.fast_run.get(),  &c.slow_run.get(),
      &c.kelvin_run.get(), &c.pseudo_run.get(), &c.scale_one.get(), &c.scale_two.get()};
  for (const auto& s : c.grid_runs.get()) runs.push_back(&s);
  double margin = std::numeric_limits<double>::infinity();
  int above = 0, finite = 0, bad_axis = 0;
  for (const auto* s : runs) {
    const CrossingAudit a = audit_crossings(*s);
    above += a.from_above;
    margin = std::min(margin, a.above_margin);
    if (s->classification.tag == DecayTag::FiniteZero) {
      ++finite;
      if (a.x_axis != 1) ++bad_axis;
    }
  }
  return {margin > -1e-8 && bad_axis == 0,
          std::to_string(above) + " C-from-above crossings, min x^(p-1) - c(N-1)/p = " + num(margin) +
              "; " + std::to_string(finite) + " FiniteZero runs, " + std::to_string(bad_axis) +
              " with x-axis count != 1",
          "margin > -1e-8; exactly one x-axis crossing"};
}

Outcome tolerance_robustness(SuiteContext& c) {
  std::vector<std::string> problems;
  const auto same = [&](const char* what, DecayTag a, DecayTag b) {
    if (a != b)
      problems.push_back(std::string(what) + ": " + std::string(to_string(a)) + " -> " +
                         std::string(to_string(b)));
  };
  const auto& g = c.grid_runs.get();
  const auto& gh = c.grid_runs_half.get();
  for (std::size_t i = 0; i < g.size(); ++i)
    same("grid", g[i].classification.tag, gh[i].classification.tag);
  same("alpha* lo", c.astar_plus.get().star.lo_class.tag, c.astar_plus_half.get().lo_class.tag);
  same("alpha* hi", c.astar_plus.get().star.hi_class.tag, c.astar_plus_half.get().hi_class.tag);
  same("fast run", c.fast_run.get().classification.tag, c.fast_run_half.get().classification.tag);
  same("slow run", c.slow_run.get().classification.tag, c.slow_run_half.get().classification.tag);
  same("pseudo run", c.pseudo_run.get().classification.tag,
       c.pseudo_run_half.get().classification.tag);

  double worst = 0.0;  // shift / (10 * bracket width)
  const auto moved = [&](const char* what, const BisectionResult& a, const BisectionResult& b) {
    const double shift = std::abs(a.value - b.value);
    const double allowed = 10.0 * std::max(a.hi - a.lo, b.hi - b.lo);
    worst = std::max(worst, shift / allowed);
    if (shift >= allowed) problems.push_back(std::string(what) + " moved " + num(shift));
  };
  moved("p+*", c.pstar_plus.get(), c.pstar_plus_half.get());
  moved("p-*", c.pstar_minus.get(), c.pstar_minus_half.get());
  moved("alpha*(p+*+0.2)", c.astar_plus.get().star, c.astar_plus_half.get());
  moved("alpha*(pseudo p)", c.astar_pseudo.get().star, c.astar_pseudo_half.get());
  moved("alpha*(6)", c.astar_semi6.get(), c.astar_semi6_half.get());

  std::string measured = "26 classes compared; max shift / (10 x width) = " + num(worst);
  for (const auto& p : problems) measured += "; " + p;
  return {problems.empty(), measured, "no class change; shift < 10 x bracket width"};
}

const std::map<int, CriterionFn>& criterion_table() {
  static const std::map<int, CriterionFn> table{
      {1, critical_bubble},     {2, exponent_recovery},        {3, ordering},
      {4, lane_emden_zero},     {5, dichotomy},                {6, fast_decay_rate},
      {7, slow_decay},          {8, pseudo_slow},              {9, energy_dissipation},
      {10, vector_field_continuity}, {11, pohozaev},           {12, kelvin_duality},
      {13, scaling_covariance}, {14, crossing_audits},         {15, tolerance_robustness}};
  return table;
}

int thread_cap(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PUCCI_RADIAL_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::vector<CriterionResult> run_verify(const VerifyOptions& opts) {
  if (!(opts.tol_scale > 0.0) || !std::isfinite(opts.tol_scale))
    throw std::invalid_argument("tol-scale must be a finite positive number");
  const std::vector<int> selected = select_criteria(opts.only);
  SuiteContext ctx(opts.tol_scale);
  std::vector<CriterionResult> results(selected.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < selected.size(); i = next++) {
      const int n = selected[i];
      CriterionResult& r = results[i];
      r.number = n;
      r.id = criterion_ids()[static_cast<std::size_t>(n - 1)].second;
      const auto t0 = Clock::now();
      try {
        const Outcome o = criterion_table().at(n)(ctx);
        r.passed = o.passed;
        r.measured = o.measured;
        r.tolerance = o.tolerance;
      } catch (const std::exception& e) {
        r.passed = false;
        r.error = e.what();
      }
      r.seconds = seconds_since(t0);
    }
  };
  const int n_threads = std::min<int>(thread_cap(opts.threads), static_cast<int>(selected.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    for (const auto& r : results) {
      std::ofstream f(std::filesystem::path(opts.out_dir) / (r.id + ".json"));
      f << to_json(r).dump(2) << '\n';
    }
  }
  return results;
}

std::string format_result_line(const CriterionResult& r) {
  std::ostringstream s;
  char head[64];
  std::snprintf(head, sizeof head, "[%s] %2d %-27s", r.passed ? "PASS" : "FAIL", r.number,
                r.id.c_str());
  s << head << ' ';
  if (!r.error.empty())
    s << "error: " << r.error;
  else
    s << r.measured << " | need " << r.tolerance;
  return s.str();
}

nlohmann::json to_json(const CriterionResult& r) {
  return nlohmann::json{{"number", r.number},     {"id", r.id},
                        {"passed", r.passed},     {"measured", r.measured},
                        {"tolerance", r.tolerance}, {"seconds", r.seconds},
                        {"error", r.error}};
}

}  // namespace pucci

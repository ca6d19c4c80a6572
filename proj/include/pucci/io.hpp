#pragma once

#include "pucci/analysis.hpp"
#include "pucci/shooting.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pucci {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "1";

/// Everything a run needs. Filled from a JSON file and/or command-line flags.
struct RunConfig {
  Branch branch = Branch::Semilinear;
  double lambda = 1.0;
  double Lambda = 1.0;
  double dim = 3.0;
  std::optional<double> p;
  std::optional<double> alpha;
  Domain domain = Domain::Exterior;
  IntegratorOpts integrator;
  ClassifyOpts classify;
  double max_horizon = 240.0;
  double alpha_tol = 1e-8;
  double p_tol = 1e-6;
  /// Path prefix for written files; empty writes nothing but the report on stdout.
  std::string out;
  std::vector<std::string> formats{"json", "csv", "svg"};

  OperatorSpec spec() const { return {lambda, Lambda, dim, branch}; }
  SolveOpts solve_opts() const;
};

/// Throws InvalidSpec on unknown keys or wrongly typed values.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json to_json(const RunConfig& cfg);

enum class Command { Solve, CriticalExponent, AlphaStar, PhasePlane };

/// Checks every precondition the command relies on; throws InvalidSpec with a
/// message naming the offending field.
void validate(const RunConfig& cfg, Command cmd);

struct NamedFit {
  std::string name;
  FitReport fit;
  bool operator==(const NamedFit&) const = default;
};

struct AuditResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool operator==(const AuditResult&) const = default;
};

struct RunReport {
  std::string schema_version = kSchemaVersion;
  std::string tool_version = kToolVersion;
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json constants = nlohmann::json::object();
  std::optional<Landmarks> landmarks;
  std::optional<DecayClass> classification;
  std::vector<NamedFit> fits;
  std::optional<BisectionResult> bisection;
  std::vector<AuditResult> audits;
  std::vector<std::string> notes;
  std::vector<std::string> files;
  double wall_time = 0.0;
  int exit_code = 0;

  bool operator==(const RunReport&) const = default;
};

nlohmann::json to_json(const DecayClass& dc);
DecayClass decay_class_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BisectionResult& b);
BisectionResult bisection_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

/// Echo of the named constants (effective dimensions, c*, fast rate, reference
/// exponents, EF coefficients). Non-finite values become null.
nlohmann::json named_constants(const OperatorSpec& spec, std::optional<double> p);

/// Trajectory as CSV with header t_or_r,u_or_x,derivative,regime,nearest_event.
/// `phase` selects (t, x, x') rows; otherwise (r, u, u'). An event is written on the
/// row of the sample closest to it.
void write_trajectory_csv(std::ostream& os, const RadialSolution& sol, bool phase);

/// L and C sampled on [0, x_max] as CSV (curve,x,value).
void write_curves_csv(std::ostream& os, const OperatorSpec& spec, double p, double x_max,
                      int samples = 200);

/// Phase-plane figure: trajectory, L, C, event markers and equilibria. Deterministic.
std::string phase_plane_svg(const RadialSolution& sol);

/// Shortest round-trip decimal form ('.' separator).
std::string format_double(double v);

}  // namespace pucci

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace pucci {

struct CriterionResult {
  int number = 0;
  std::string id;
  bool passed = false;
  std::string measured;
  std::string tolerance;
  double seconds = 0.0;
  std::string error;  // exception text when the criterion could not be evaluated
};

struct VerifyOptions {
  /// Criterion ids or numbers ("energy-dissipation", "9"); empty runs all.
  std::vector<std::string> only;
  /// Multiplies the integrator rel_tol and abs_tol of every suite run.
  double tol_scale = 1.0;
  /// Worker cap; 0 reads PUCCI_RADIAL_THREADS, falling back to the hardware count.
  int threads = 0;
  /// Directory for per-criterion JSON results; empty writes nothing.
  std::string out_dir;
};

/// (number, id) of every acceptance criterion, in order.
const std::vector<std::pair<int, std::string>>& criterion_ids();

/// Resolves ids/numbers; throws std::invalid_argument on unknown names.
std::vector<int> select_criteria(const std::vector<std::string>& only);

/// Runs the selected criteria (concurrently, shared memoized runs) and returns
/// results ordered by criterion number.
std::vector<CriterionResult> run_verify(const VerifyOptions& opts);

std::string format_result_line(const CriterionResult& r);
nlohmann::json to_json(const CriterionResult& r);

}  // namespace pucci

#pragma once

#include "pucci/io.hpp"

#include <iosfwd>

namespace pucci {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitValidation = 2,
  kExitUndetermined = 3,
  kExitNumerical = 4,
};

/// Report for one command; `files` are written only when cfg.out is set.
RunReport cmd_solve(const RunConfig& cfg);
RunReport cmd_critical_exponent(const RunConfig& cfg);
RunReport cmd_alpha_star(const RunConfig& cfg);
RunReport cmd_phase_plane(const RunConfig& cfg);

/// Entry point of pucci_radial. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pucci

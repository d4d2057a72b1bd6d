#pragma once

// Orchestration shared by every CLI subcommand: builds the discrete problem from a
// RunConfig, runs the requested stages and produces a JSON report plus CSV tables.

#include <string>
#include <vector>

#include "pxeig/config.hpp"

namespace pxeig {

enum class Command { Validate, Norm, Embed, LambdaStar, GeometryCheck, NegativeRay, Rayleigh, Unbounded, Solve, Sweep, Run };

const char* to_string(Command c);

/// Exit-code contract of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitVerdict = 1, kExitInput = 2, kExitComputation = 3 };

struct RunOptions {
  bool timings = true;       // include wall-clock seconds per stage
  bool write_files = true;   // write report.json and CSV tables into out_dir
  std::string norm_exponent = "p";  // `norm`: "p", "q" or an expression
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string report;                  // JSON text
  std::vector<std::string> artifacts;  // files written, relative to out_dir
  std::string summary;                 // short human-readable lines
};

/// Runs `command` and never throws: failures are mapped to exit codes and recorded
/// in the (possibly partial) report.
RunOutcome execute(Command command, const RunConfig& config, const RunOptions& options = {});

}  // namespace pxeig

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tmplgraph {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Runs one subcommand (`synth`, `ingest`, `template`, `train`, `eval`,
/// `explain`, `pipeline`). `args` excludes the program name. The JSON result goes
/// to `out`; diagnostics and usage text go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tmplgraph

#pragma once

#include <string>
#include <vector>

namespace ciosl {

// Entry point behind the `ciosl` binary: subcommands run, gen-synthetic,
// import-csv and report. Returns the process exit code; never throws.
int run_cli(const std::vector<std::string>& args);

}  // namespace ciosl

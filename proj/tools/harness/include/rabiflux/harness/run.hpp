#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rabiflux/harness/config.hpp"

namespace rabiflux::harness {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNumerical = 2 };

// Executes one command, writing artifacts into config.output_dir.
// Returns the exit status; messages go to log.
int run(const RunConfig& config, std::ostream& log);

// Output directory: RABIFLUX_OUT if set, else the --out value, else the fallback.
std::filesystem::path resolve_output_dir(const std::string& cli_out);

}  // namespace rabiflux::harness

#pragma once

#include <string>
#include <vector>

namespace relief {

/// Executes one toolkit subcommand (generate, segment, retrieve, evaluate,
/// export). `args` excludes the program name. Returns the process exit
/// status: 0 success, 1 usage error, 2 data error.
int run_command(const std::vector<std::string>& args);

} // namespace relief

#pragma once

#include <string>
#include <vector>

namespace phdim {

/// Entry point of the `phdim` tool. Returns the process exit code:
/// 0 on success, 1 on an I/O failure, 2 on bad usage or invalid input.
int run_cli(int argc, const char* const* argv);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args);

} // namespace phdim

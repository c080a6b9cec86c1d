#pragma once

#include <iosfwd>

namespace dgsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `dgsim` tool: `run`, `sweep` and `train` subcommands.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dgsim

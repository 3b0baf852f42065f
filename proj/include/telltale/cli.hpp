#pragma once

namespace telltale {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Parses argv and runs one subcommand. Returns kExitUsage for command-line
// errors (with usage text on stderr) and kExitData for unreadable, malformed
// or inconsistent inputs.
int dispatch(int argc, const char* const* argv);

}  // namespace telltale

#pragma once

namespace gridsentry {

// Full command-line entry point (generate / train / stream / report).
// Returns the process exit code: 0 success, 2 invalid input or arguments,
// 3 file-system trouble, 4 internal contract violations.
int run_cli(int argc, const char* const* argv);

}  // namespace gridsentry

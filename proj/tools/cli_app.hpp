#pragma once

namespace bubblelab::cli {

// Full command-line entry point. Returns the process exit code: 0 on
// success, 1 on a validation or usage error, 2 on a runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace bubblelab::cli

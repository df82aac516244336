#pragma once

namespace dprl {

// Command line entry point; returns the process exit code (0 success,
// 2 usage or validation errors, 1 runtime failures).
int cli_main(int argc, char** argv);

}  // namespace dprl

#pragma once

namespace admctl {

/// Full command-line front end; returns the process exit code.
/// 0 success, 2 invalid input, 3 over the memory budget, 1 anything else.
int run_cli(int argc, char **argv);

} // namespace admctl

#pragma once

namespace swarm {

/// Command-line entry point. Exit codes: 0 success, 1 usage or validation
/// error, 2 comparison mismatch.
int run_cli(int argc, char** argv);

}  // namespace swarm

#pragma once

namespace remitsim {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_data_error = 2,
    exit_calibration_failure = 3,
    exit_missing_artifact = 4,
};

/// Parses the command line and runs one subcommand. Returns the exit code.
int run_cli(int argc, const char *const *argv);

} // namespace remitsim

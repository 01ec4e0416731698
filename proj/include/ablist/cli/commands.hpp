#pragma once

namespace ablist::cli {

/// Exit codes, one per failure class.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kMissingFile = 3,
    kConfigViolation = 4,
    kCheckpointMismatch = 5,
    kInsufficientData = 6,
};

/// Entry point of the `ablist` executable. `env` is an environ-style array
/// scanned for ABLIST_* overrides.
int run_cli(int argc, char** argv, char** env);

} // namespace ablist::cli

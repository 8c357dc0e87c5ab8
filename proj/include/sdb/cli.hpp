#pragma once

namespace sdb {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Entry point of the `sdb` tool; returns an ExitCode.
int run_cli(int argc, char **argv);

} // namespace sdb

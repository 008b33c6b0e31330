#pragma once

// Scenario-driven front end: `glag <task> --scenario <path> [--out <path>]
// [--set key=value ...]`.

#include <string>
#include <vector>

namespace glag::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDomainError = 2, kToleranceFailure = 3 };

struct RunResult {
  int exit_code = kOk;
  /// JSON report (always produced, also for failures).
  std::string report;
  /// Human-readable message for non-zero exits.
  std::string error;
};

const std::vector<std::string>& task_names();

/// Runs one task on a scenario given as JSON text. `overrides` are
/// "dotted.key=value" strings applied before validation.
RunResult run(const std::string& task, const std::string& scenario_json,
              const std::vector<std::string>& overrides = {});

/// Entry point of the `glag` executable.
int main(int argc, char** argv);

}  // namespace glag::cli

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nictl/cli/config.hpp"
#include "nictl/sim.hpp"

namespace nictl::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,    ///< config or usage error
  kExitRuntime = 2,  ///< numerical failure (divergence, singular loop, ...)
  kExitCheckFailed = 3,
};

/// One named verification: verdict, numeric evidence and the inequality it tests.
struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json evidence = nlohmann::json::object();
  std::string condition;
};

nlohmann::json to_json(const CheckResult& c);

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;
};

/// Simulation plus requested checks, with nothing written to disk.
struct ScenarioRun {
  Trajectory trajectory;
  std::vector<CheckResult> checks;
  nlohmann::json report;
  int exit_code = kExitOk;
};

/// Throws ConfigError for a missing controller or a check that does not apply to it.
/// NonFiniteState is caught and turned into exit code 2 with a "diverged" report.
ScenarioRun run_scenario(const ScenarioConfig& cfg);

/// Runs the scenario and writes the CSV and JSON report. Relative output paths resolve
/// against `output_dir` (default: current directory). Default names derive from the config
/// file stem.
CommandResult cmd_simulate(const std::filesystem::path& config_path,
                           const std::optional<std::filesystem::path>& output_dir = std::nullopt);

/// which: ni | sni | certificate | stability
CommandResult cmd_check(const std::filesystem::path& config_path, const std::string& which);
CommandResult cmd_check(const ScenarioConfig& cfg, const std::string& which);

/// Parameter regions for controller_type (default: the configured controller's type).
/// Throws NotNI when the plant fails both the frequency test and the certificate search.
CommandResult cmd_design(const std::filesystem::path& config_path, const std::optional<std::string>& controller_type);
CommandResult cmd_design(const ScenarioConfig& cfg, const std::optional<std::string>& controller_type);

/// Runs one scenario per sweep value on a worker pool; results are ordered by value index.
CommandResult cmd_sweep(const std::filesystem::path& config_path, std::optional<int> workers = std::nullopt);

/// Calls fn, mapping exceptions to the exit-code contract and logging them to stderr.
int run_guarded(const std::function<int()>& fn);

/// Human-readable error text plus the exit code for an in-flight exception.
int exit_code_for_current_exception(std::string& message);

}  // namespace nictl::cli

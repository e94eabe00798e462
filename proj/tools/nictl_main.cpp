#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nictl/cli/commands.hpp"
#include "nictl/cli/log.hpp"

namespace cli = nictl::cli;

int main(int argc, char** argv) {
  cli::init_logging();

  CLI::App app{"Negative-imaginary control toolkit: HIGS-based IRC and PII2 simulation and checks"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::string which;
  std::string type;
  int workers = 0;
  bool quiet = false;
  bool as_sweep = false;
  app.add_flag("-q,--quiet", quiet, "do not print the JSON report to stdout");

  auto* simulate = app.add_subcommand("simulate", "run a scenario and write CSV + JSON report");
  simulate->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out-dir", out_dir, "directory for relative output paths");
  simulate->add_flag("--sweep", as_sweep, "run the scenario's sweep section instead");

  auto* check = app.add_subcommand("check", "run one verification against the scenario");
  check->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  check->add_option("which", which, "ni | sni | certificate | stability")
      ->required()
      ->check(CLI::IsMember({"ni", "sni", "certificate", "stability"}));

  auto* design = app.add_subcommand("design", "report feasible parameter regions for a controller type");
  design->add_option("config", config, "scenario file with the plant")->required()->check(CLI::ExistingFile);
  design->add_option("-t,--type", type, "irc | higs_irc | pii2rc | higs_pii2 (default: configured type)");

  auto* sweep = app.add_subcommand("sweep", "run the scenario's sweep section on a worker pool");
  sweep->add_option("config", config, "scenario file with a sweep section")->required()->check(CLI::ExistingFile);
  sweep->add_option("-j,--workers", workers, "worker threads (default: sweep.workers)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  return cli::run_guarded([&] {
    cli::CommandResult result;
    if (*simulate && as_sweep) {
      result = cli::cmd_sweep(config, std::nullopt);
    } else if (*simulate) {
      result = cli::cmd_simulate(config, out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir));
    } else if (*check) {
      result = cli::cmd_check(config, which);
    } else if (*design) {
      result = cli::cmd_design(config, type.empty() ? std::nullopt : std::optional<std::string>(type));
    } else {
      result = cli::cmd_sweep(config, workers > 0 ? std::optional<int>(workers) : std::nullopt);
    }
    if (!quiet) std::cout << result.report.dump(2) << '\n';
    return result.exit_code;
  });
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nictl/controllers.hpp"
#include "nictl/errors.hpp"
#include "nictl/higs.hpp"
#include "nictl/lti.hpp"
#include "nictl/sim.hpp"

namespace nictl::cli {

/// Malformed or invalid scenario file. `field` is a JSON pointer ("/sim/dt"); `line` is set for
/// syntax errors.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message, std::optional<std::size_t> line = std::nullopt);
  const std::string& field() const { return field_; }
  std::optional<std::size_t> line() const { return line_; }

 private:
  std::string field_;
  std::optional<std::size_t> line_;
};

enum class ControllerKind { Irc, HigsIrc, Pii2rc, HigsPii2 };

std::string to_string(ControllerKind kind);
std::optional<ControllerKind> controller_kind_from_string(const std::string& s);

using ControllerParams = std::variant<IrcParams, HigsIrcParams, Pii2Params, HigsPii2Params>;

struct ControllerSpec {
  ControllerKind kind;
  ControllerParams params;
};

struct PlantSpec {
  StateSpace ss;
  std::optional<RationalTF> tf;  ///< set when the plant was given as num/den
};

struct FrequencyGrid {
  double min = 1e-2;
  double max = 1e2;
  int points = 201;
};

struct CheckOptions {
  double convergence_tol = 0.2;  ///< bound on |joint state(t_end)|
  double monotone_budget = 1e-6; ///< W may grow by at most budget * dt per step
  double sector_tol = 1e-9;      ///< relative sector violation
  double tol = 1e-9;             ///< certificate / frequency-test tolerance
  FrequencyGrid grid;
};

struct OutputSpec {
  std::optional<std::string> csv;
  std::optional<std::string> json;
};

struct SweepSpec {
  std::string parameter;  ///< JSON pointer into the scenario, e.g. "/controller/k_h"
  std::vector<double> values;
  int workers = 4;
};

inline const std::vector<std::string> kKnownChecks{"convergence", "monotone", "sector", "stability", "certificate"};

struct ScenarioConfig {
  std::string name;
  PlantSpec plant;
  std::optional<ControllerSpec> controller;
  SimConfig sim;
  std::vector<std::string> checks;
  CheckOptions check_options;
  std::optional<Matrix> certificate_Y;  ///< explicit NI certificate; otherwise searched when needed
  OutputSpec output;
  std::optional<SweepSpec> sweep;
  nlohmann::json raw;  ///< parsed document, kept for sweeps and report metadata
};

/// Parses scenario text (JSON, comments allowed).
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace nictl::cli

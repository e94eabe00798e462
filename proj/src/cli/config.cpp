#include "nictl/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nictl::cli {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message, std::optional<std::size_t> line)
    : Error((line ? "line " + std::to_string(*line) + ": " : std::string()) +
            (field.empty() ? std::string() : field + ": ") + message),
      field_(std::move(field)),
      line_(line) {}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Irc: return "irc";
    case ControllerKind::HigsIrc: return "higs_irc";
    case ControllerKind::Pii2rc: return "pii2rc";
    case ControllerKind::HigsPii2: return "higs_pii2";
  }
  return "unknown";
}

std::optional<ControllerKind> controller_kind_from_string(const std::string& s) {
  for (auto k : {ControllerKind::Irc, ControllerKind::HigsIrc, ControllerKind::Pii2rc, ControllerKind::HigsPii2})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

void reject_unknown_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(join(path, key), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required field");
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? as_number(obj.at(key), join(path, key)) : fallback;
}

int int_or(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

std::vector<double> as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& item = v[i];
    // Accept [[a], [b]] and [[a, b]] for column / row vectors.
    if (item.is_array()) {
      for (std::size_t j = 0; j < item.size(); ++j)
        out.push_back(as_number(item[j], path + "/" + std::to_string(i) + "/" + std::to_string(j)));
    } else {
      out.push_back(as_number(item, path + "/" + std::to_string(i)));
    }
  }
  return out;
}

Matrix as_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = -1;
  Matrix M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row_path = path + "/" + std::to_string(i);
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw ConfigError(row_path, "expected a row array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      if (cols == 0) throw ConfigError(row_path, "empty row");
      M.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(row_path, "ragged matrix");
    for (Eigen::Index j = 0; j < cols; ++j)
      M(i, j) = as_number(row[static_cast<std::size_t>(j)], row_path + "/" + std::to_string(j));
  }
  return M;
}

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

PlantSpec parse_plant(const json& obj) {
  const std::string path = "/plant";
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  try {
    if (obj.contains("num") || obj.contains("den")) {
      reject_unknown_keys(obj, path, {"num", "den"});
      RationalTF tf(as_vector(require(obj, path, "num"), path + "/num"),
                    as_vector(require(obj, path, "den"), path + "/den"));
      if (tf.degree() < 1) throw ConfigError(path + "/den", "plant must have at least one state");
      return {to_state_space(tf), tf};
    }
    reject_unknown_keys(obj, path, {"A", "B", "C", "D"});
    Matrix A = as_matrix(require(obj, path, "A"), path + "/A");
    Vector B = to_eigen(as_vector(require(obj, path, "B"), path + "/B"));
    RowVector C = to_eigen(as_vector(require(obj, path, "C"), path + "/C")).transpose();
    const double D = number_or(obj, path, "D", 0.0);
    return {StateSpace(std::move(A), std::move(B), std::move(C), D), std::nullopt};
  } catch (const PreconditionViolation& e) {
    throw ConfigError(path, e.what());
  }
}

HigsParams parse_higs(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(obj, path, {"omega_h", "k_h"});
  try {
    return HigsParams(as_number(require(obj, path, "omega_h"), path + "/omega_h"),
                      as_number(require(obj, path, "k_h"), path + "/k_h"));
  } catch (const PreconditionViolation& e) {
    throw ConfigError(path, e.what());
  }
}

ControllerSpec parse_controller(const json& obj) {
  const std::string path = "/controller";
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const auto& type = require(obj, path, "type");
  if (!type.is_string()) throw ConfigError(path + "/type", "expected a string");
  const auto kind = controller_kind_from_string(type.get<std::string>());
  if (!kind) throw ConfigError(path + "/type", "unknown controller type (irc | higs_irc | pii2rc | higs_pii2)");
  auto num = [&](const char* key) { return as_number(require(obj, path, key), join(path, key)); };
  try {
    switch (*kind) {
      case ControllerKind::Irc:
        reject_unknown_keys(obj, path, {"type", "Gamma", "D"});
        return {*kind, IrcParams(num("Gamma"), num("D"))};
      case ControllerKind::HigsIrc:
        reject_unknown_keys(obj, path, {"type", "omega_h", "k_h", "D"});
        return {*kind, HigsIrcParams(num("omega_h"), num("k_h"), num("D"))};
      case ControllerKind::Pii2rc:
        reject_unknown_keys(obj, path, {"type", "k_p", "k1", "k2", "D"});
        return {*kind, Pii2Params(num("k_p"), num("k1"), num("k2"), num("D"))};
      case ControllerKind::HigsPii2:
        reject_unknown_keys(obj, path, {"type", "k_p", "D", "h1", "h2", "h3"});
        return {*kind, HigsPii2Params(num("k_p"), num("D"), parse_higs(require(obj, path, "h1"), path + "/h1"),
                                      parse_higs(require(obj, path, "h2"), path + "/h2"),
                                      parse_higs(require(obj, path, "h3"), path + "/h3"))};
    }
  } catch (const PreconditionViolation& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path, "unreachable");
}

SimConfig parse_sim(const json& obj, Eigen::Index plant_order) {
  const std::string path = "/sim";
  SimConfig cfg;
  cfg.x0 = Vector::Zero(plant_order);
  if (obj.is_null()) return cfg;
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(obj, path, {"dt", "t_end", "x0", "controller_x0", "r", "record_every"});
  cfg.dt = number_or(obj, path, "dt", cfg.dt);
  cfg.t_end = number_or(obj, path, "t_end", cfg.t_end);
  cfg.r = number_or(obj, path, "r", cfg.r);
  cfg.record_every = int_or(obj, path, "record_every", cfg.record_every);
  if (obj.contains("x0")) {
    cfg.x0 = to_eigen(as_vector(obj.at("x0"), path + "/x0"));
    if (cfg.x0.size() != plant_order) throw ConfigError(path + "/x0", "length must equal the plant order");
  }
  if (obj.contains("controller_x0")) cfg.controller_x0 = as_vector(obj.at("controller_x0"), path + "/controller_x0");
  if (!(cfg.dt > 0.0)) throw ConfigError(path + "/dt", "must be > 0");
  if (!(cfg.t_end >= cfg.dt)) throw ConfigError(path + "/t_end", "must be >= dt");
  if (cfg.record_every < 1) throw ConfigError(path + "/record_every", "must be >= 1");
  return cfg;
}

CheckOptions parse_check_options(const json& obj) {
  const std::string path = "/check_options";
  CheckOptions o;
  if (obj.is_null()) return o;
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(obj, path, {"convergence_tol", "monotone_budget", "sector_tol", "tol", "grid"});
  o.convergence_tol = number_or(obj, path, "convergence_tol", o.convergence_tol);
  o.monotone_budget = number_or(obj, path, "monotone_budget", o.monotone_budget);
  o.sector_tol = number_or(obj, path, "sector_tol", o.sector_tol);
  o.tol = number_or(obj, path, "tol", o.tol);
  if (obj.contains("grid")) {
    const auto& g = obj.at("grid");
    const std::string gp = path + "/grid";
    if (!g.is_object()) throw ConfigError(gp, "expected an object");
    reject_unknown_keys(g, gp, {"min", "max", "points"});
    o.grid.min = number_or(g, gp, "min", o.grid.min);
    o.grid.max = number_or(g, gp, "max", o.grid.max);
    o.grid.points = int_or(g, gp, "points", o.grid.points);
    if (!(o.grid.min > 0.0) || !(o.grid.max >= o.grid.min) || o.grid.points < 2)
      throw ConfigError(gp, "need 0 < min <= max and points >= 2");
  }
  return o;
}

std::optional<SweepSpec> parse_sweep(const json& obj) {
  const std::string path = "/sweep";
  if (obj.is_null()) return std::nullopt;
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(obj, path, {"parameter", "values", "workers"});
  SweepSpec s;
  const auto& param = require(obj, path, "parameter");
  if (!param.is_string() || param.get<std::string>().empty() || param.get<std::string>().front() != '/')
    throw ConfigError(path + "/parameter", "expected a JSON pointer such as \"/controller/k_h\"");
  s.parameter = param.get<std::string>();
  s.values = as_vector(require(obj, path, "values"), path + "/values");
  if (s.values.empty()) throw ConfigError(path + "/values", "needs at least one value");
  s.workers = int_or(obj, path, "workers", s.workers);
  if (s.workers < 1) throw ConfigError(path + "/workers", "must be >= 1");
  return s;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "scenario must be a JSON object");
  reject_unknown_keys(doc, "", {"name", "plant", "controller", "sim", "checks", "check_options", "certificate",
                                "output", "sweep"});
  ScenarioConfig cfg{.name = {}, .plant = parse_plant(require(doc, "", "plant")), .controller = {}, .sim = {},
                     .checks = {}, .check_options = {}, .certificate_Y = {}, .output = {}, .sweep = {}, .raw = doc};
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ConfigError("/name", "expected a string");
    cfg.name = doc.at("name").get<std::string>();
  }
  if (doc.contains("controller")) cfg.controller = parse_controller(doc.at("controller"));
  cfg.sim = parse_sim(doc.contains("sim") ? doc.at("sim") : json(), cfg.plant.ss.order());

  if (doc.contains("checks")) {
    const auto& checks = doc.at("checks");
    if (!checks.is_array()) throw ConfigError("/checks", "expected an array of check names");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const auto p = "/checks/" + std::to_string(i);
      if (!checks[i].is_string()) throw ConfigError(p, "expected a string");
      const auto name = checks[i].get<std::string>();
      if (std::find(kKnownChecks.begin(), kKnownChecks.end(), name) == kKnownChecks.end())
        throw ConfigError(p, "unknown check '" + name + "'");
      if (seen.insert(name).second) cfg.checks.push_back(name);
    }
  }
  cfg.check_options = parse_check_options(doc.contains("check_options") ? doc.at("check_options") : json());

  if (doc.contains("certificate")) {
    const auto& c = doc.at("certificate");
    if (c.is_string() && c.get<std::string>() == "search") {
      // searched on demand
    } else if (c.is_object()) {
      reject_unknown_keys(c, "/certificate", {"Y"});
      Matrix Y = as_matrix(require(c, "/certificate", "Y"), "/certificate/Y");
      if (Y.rows() != cfg.plant.ss.order() || Y.cols() != Y.rows())
        throw ConfigError("/certificate/Y", "must be n x n for the plant order n");
      cfg.certificate_Y = std::move(Y);
    } else {
      throw ConfigError("/certificate", "expected {\"Y\": [[...]]} or \"search\"");
    }
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    if (!o.is_object()) throw ConfigError("/output", "expected an object");
    reject_unknown_keys(o, "/output", {"csv", "json"});
    for (const char* key : {"csv", "json"}) {
      if (!o.contains(key)) continue;
      if (!o.at(key).is_string()) throw ConfigError(std::string("/output/") + key, "expected a path string");
      (std::string(key) == "csv" ? cfg.output.csv : cfg.output.json) = o.at(key).get<std::string>();
    }
  }
  cfg.sweep = parse_sweep(doc.contains("sweep") ? doc.at("sweep") : json());
  return cfg;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", e.what(), line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  return parse_config(doc);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nictl::cli

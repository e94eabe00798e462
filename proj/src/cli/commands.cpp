#include "nictl/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "nictl/cli/log.hpp"
#include "nictl/errors.hpp"
#include "nictl/trajectory_io.hpp"

namespace nictl::cli {

using nlohmann::json;

namespace {

constexpr const char* kLemmaCondition = "Y > 0, A Y + Y A^T <= 0, B + A Y C^T = 0";

json to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const std::vector<Complex>& zs) {
  json out = json::array();
  for (const auto& z : zs) out.push_back({z.real(), z.imag()});
  return out;
}

// Infinite or NaN values have no JSON literal; report them as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

RationalTF plant_tf(const ScenarioConfig& cfg) {
  return cfg.plant.tf ? *cfg.plant.tf : to_transfer_function(cfg.plant.ss);
}

const ControllerSpec& require_controller(const ScenarioConfig& cfg) {
  if (!cfg.controller) throw ConfigError("/controller", "this command needs a controller");
  return *cfg.controller;
}

bool is_higs(ControllerKind k) { return k == ControllerKind::HigsIrc || k == ControllerKind::HigsPii2; }

std::optional<RationalTF> linear_tf(const ControllerSpec& c) {
  if (c.kind == ControllerKind::Irc) return irc_tf(std::get<IrcParams>(c.params));
  if (c.kind == ControllerKind::Pii2rc) return pii2rc_tf(std::get<Pii2Params>(c.params));
  return std::nullopt;
}

json controller_json(const ControllerSpec& c) {
  json j{{"type", to_string(c.kind)}};
  switch (c.kind) {
    case ControllerKind::Irc: {
      const auto& p = std::get<IrcParams>(c.params);
      j["Gamma"] = p.Gamma;
      j["D"] = p.D;
      break;
    }
    case ControllerKind::HigsIrc: {
      const auto& p = std::get<HigsIrcParams>(c.params);
      j["omega_h"] = p.omega_h();
      j["k_h"] = p.k_h();
      j["D"] = p.D();
      j["derived"] = {{"kappa_tilde", p.kappa_tilde()}};
      break;
    }
    case ControllerKind::Pii2rc: {
      const auto& p = std::get<Pii2Params>(c.params);
      j["k_p"] = p.k_p;
      j["k1"] = p.k1;
      j["k2"] = p.k2;
      j["D"] = p.D;
      break;
    }
    case ControllerKind::HigsPii2: {
      const auto& p = std::get<HigsPii2Params>(c.params);
      j["k_p"] = p.k_p();
      j["D"] = p.D();
      for (auto [key, h] : {std::pair{"h1", p.h1()}, std::pair{"h2", p.h2()}, std::pair{"h3", p.h3()}})
        j[key] = {{"omega_h", h.omega_h}, {"k_h", h.k_h}};
      j["derived"] = {{"gamma", p.gamma()}};
      break;
    }
  }
  return j;
}

json plant_json(const ScenarioConfig& cfg) {
  const auto& ss = cfg.plant.ss;
  json j{{"A", to_json(ss.A())},
         {"B", to_json_vector(ss.B())},
         {"C", to_json_vector(ss.C().transpose())},
         {"D", ss.D_ff()}};
  if (cfg.plant.tf) j["tf"] = {{"num", cfg.plant.tf->num()}, {"den", cfg.plant.tf->den()}};
  try {
    j["dc_gain"] = dc_gain(ss);
  } catch (const SingularA&) {
    j["dc_gain"] = nullptr;
  }
  return j;
}

struct CertificateSource {
  std::optional<NICertificate> cert;
  std::string source;  // "config" or "search"
};

CertificateSource obtain_certificate(const ScenarioConfig& cfg) {
  if (cfg.certificate_Y) return {NICertificate(*cfg.certificate_Y), "config"};
  CertificateSearchOptions opts;
  opts.tol = cfg.check_options.tol;
  spdlog::debug("searching for an NI certificate (order {})", cfg.plant.ss.order());
  return {search_ni_certificate(cfg.plant.ss, opts), "search"};
}

// ---------------------------------------------------------------- checks

CheckResult ni_check(const ScenarioConfig& cfg) {
  CheckResult r{.name = "ni", .pass = false, .evidence = json::object(),
                .condition = "m(w) = j[G(jw) - G(jw)^*] >= 0 with no open RHP poles, or " +
                             std::string(kLemmaCondition)};
  const auto& o = cfg.check_options;
  const auto grid = log_grid(o.grid.min, o.grid.max, o.grid.points);
  const auto freq = ni_frequency_test(plant_tf(cfg), grid, o.tol);
  r.evidence["frequency"] = {{"pass", freq.pass},
                             {"min_m", number(freq.min_m)},
                             {"poles", to_json(freq.poles)},
                             {"max_pole_real", freq.max_pole_real},
                             {"poles_ok", freq.poles_ok},
                             {"excluded_omegas", freq.excluded_omegas},
                             {"grid", {{"min", o.grid.min}, {"max", o.grid.max}, {"points", o.grid.points}}}};
  const auto cs = obtain_certificate(cfg);
  json lemma{{"source", cs.source}, {"found", cs.cert.has_value()}, {"pass", false}};
  if (cs.cert) {
    const auto rep = verify_ni_certificate(cfg.plant.ss, *cs.cert, o.tol);
    lemma["pass"] = rep.pass;
    lemma["y_min_eig"] = rep.y_min_eig;
    lemma["lyap_max_eig"] = rep.lyap_max_eig;
    lemma["residual_norm"] = rep.residual_norm;
    lemma["minimal"] = rep.minimal;
    lemma["det_A_nonzero"] = rep.det_A_nonzero;
    lemma["Y"] = to_json(cs.cert->Y());
  }
  const bool lemma_pass = lemma["pass"].get<bool>();
  r.evidence["lemma"] = std::move(lemma);
  r.pass = freq.pass || lemma_pass;
  json paths = json::array();
  if (freq.pass) paths.push_back("frequency");
  if (lemma_pass) paths.push_back("lemma");
  r.evidence["passed_by"] = std::move(paths);
  return r;
}

CheckResult sni_check(const ScenarioConfig& cfg) {
  const auto& c = require_controller(cfg);
  const auto tf = linear_tf(c);
  if (!tf) throw ConfigError("/controller/type", "the sni check applies to linear controllers (irc, pii2rc)");
  CheckResult r{.name = "sni", .pass = false, .evidence = json::object(),
                .condition = "all controller poles in Re < 0 and j[K(jw) - K(jw)^*] > 0 for w > 0"};
  const auto& o = cfg.check_options;
  const auto grid = log_grid(o.grid.min, o.grid.max, o.grid.points);
  const auto rep = sni_frequency_test(*tf, grid, o.tol);
  r.pass = rep.pass;
  r.evidence = {{"min_m", number(rep.min_m)},
                {"poles", to_json(rep.poles)},
                {"max_pole_real", rep.max_pole_real},
                {"poles_ok", rep.poles_ok},
                {"excluded_omegas", rep.excluded_omegas},
                {"controller_tf", {{"num", tf->num()}, {"den", tf->den()}}}};
  if (c.kind == ControllerKind::Pii2rc) {
    const auto& p = std::get<Pii2Params>(c.params);
    double lo = std::numeric_limits<double>::infinity();
    for (double w : grid) lo = std::min(lo, pii2rc_sni_value(w, p));
    r.evidence["min_closed_form"] = number(lo);
  }
  return r;
}

CheckResult stability_check(const ScenarioConfig& cfg) {
  const auto& c = require_controller(cfg);
  const auto& plant = cfg.plant.ss;
  CheckResult r{.name = "stability", .pass = false, .evidence = json::object(), .condition = {}};
  auto fill = [&](const StabilityVerdict& v) {
    r.pass = v.pass;
    r.condition = v.condition;
    r.evidence = {{"dc_gain", v.dc_gain}, {"loop_value", v.loop_value}, {"margin", v.margin}};
  };
  switch (c.kind) {
    case ControllerKind::HigsIrc: {
      const auto& p = std::get<HigsIrcParams>(c.params);
      fill(check_irc_stability(plant, p.kappa_tilde()));
      r.evidence["kappa_tilde"] = p.kappa_tilde();
      break;
    }
    case ControllerKind::Irc:
      fill(check_pii2_stability(plant, std::get<IrcParams>(c.params).D));
      break;
    case ControllerKind::Pii2rc:
      fill(check_pii2_stability(plant, std::get<Pii2Params>(c.params).D));
      break;
    case ControllerKind::HigsPii2: {
      const auto& p = std::get<HigsPii2Params>(c.params);
      fill(check_pii2_stability(plant, p.D()));
      const double clearance = gain_sum_clearance(plant, p);
      const double s = dc_gain(plant) + p.D();
      const double k2 = p.h2().k_h;
      r.evidence["gain_sum"] = p.h1().k_h + k2 * k2 + p.k_p();
      r.evidence["excluded_gain_sum"] = s == 0.0 ? json(nullptr) : json(1.0 / s);
      r.evidence["gain_sum_clearance"] = number(clearance);
      r.pass = r.pass && clearance > 1e-9 * std::max(1.0, std::abs(s == 0.0 ? 0.0 : 1.0 / s));
      r.condition += " and k_h1 + k_h2^2 + k_p != 1/(G(0) + D)";
      break;
    }
  }
  return r;
}

// Schur chain of the linear IRC / PII2RC Lyapunov matrix: Y > 0, -D > 0, -D - C Y C^T > 0.
std::pair<std::string, double> linear_chain(const Matrix& Y, const RowVector& C, double D) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Y, Eigen::EigenvaluesOnly);
  const double margin = -D - (C * Y * C.transpose())(0);
  if (!(es.eigenvalues().minCoeff() > 0.0)) return {"Y > 0", margin};
  if (!(-D > 0.0)) return {"-D > 0", margin};
  if (!(margin > 0.0)) return {"-D - C Y C^T > 0", margin};
  return {"", margin};
}

CheckResult certificate_check(const ScenarioConfig& cfg) {
  CheckResult r{.name = "certificate", .pass = false, .evidence = json::object(), .condition = kLemmaCondition};
  const auto cs = obtain_certificate(cfg);
  r.evidence["source"] = cs.source;
  r.evidence["found"] = cs.cert.has_value();
  if (!cs.cert) return r;
  const auto& Y = cs.cert->Y();
  const auto rep = verify_ni_certificate(cfg.plant.ss, *cs.cert, cfg.check_options.tol);
  r.evidence["Y"] = to_json(Y);
  r.evidence["y_min_eig"] = rep.y_min_eig;
  r.evidence["lyap_max_eig"] = rep.lyap_max_eig;
  r.evidence["residual_norm"] = rep.residual_norm;
  r.evidence["minimal"] = rep.minimal;
  r.evidence["det_A_nonzero"] = rep.det_A_nonzero;
  r.evidence["lemma_pass"] = rep.pass;
  r.pass = rep.pass;
  if (!cfg.controller) return r;

  const auto& C = cfg.plant.ss.C();
  const auto& c = *cfg.controller;
  json loop;
  switch (c.kind) {
    case ControllerKind::HigsIrc: {
      const LyapunovIrcCertificate lc(Y, C, std::get<HigsIrcParams>(c.params).kappa_tilde());
      loop = {{"positive_definite", lc.positive_definite()},
              {"failing_stage", lc.positive_definite() ? "" : "1/kappa_tilde - C Y C^T > 0"},
              {"margin", lc.schur_margin()}};
      r.condition += "; closed loop: 1/kappa_tilde - C Y C^T > 0";
      break;
    }
    case ControllerKind::HigsPii2: {
      const LyapunovPii2Certificate lc(Y, C, std::get<HigsPii2Params>(c.params));
      loop = {{"positive_definite", lc.positive_definite()},
              {"failing_stage", lc.failing_stage()},
              {"margin", lc.final_margin()}};
      r.condition += "; closed loop: Y > 0, -D > 0, -D - C Y C^T > 0";
      break;
    }
    case ControllerKind::Irc:
    case ControllerKind::Pii2rc: {
      const double D = c.kind == ControllerKind::Irc ? std::get<IrcParams>(c.params).D : std::get<Pii2Params>(c.params).D;
      const auto [stage, margin] = linear_chain(Y, C, D);
      loop = {{"positive_definite", stage.empty()}, {"failing_stage", stage}, {"margin", margin}};
      r.condition += "; closed loop: Y > 0, -D > 0, -D - C Y C^T > 0";
      break;
    }
  }
  r.pass = r.pass && loop["positive_definite"].get<bool>();
  r.evidence["closed_loop"] = std::move(loop);
  return r;
}

void validate_checks(const ScenarioConfig& cfg) {
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
    const auto& name = cfg.checks[i];
    if ((name == "monotone" || name == "sector") && !is_higs(cfg.controller->kind))
      throw ConfigError("/checks/" + std::to_string(i),
                        "check '" + name + "' needs a HIGS controller (higs_irc, higs_pii2)");
  }
}

bool wants(const ScenarioConfig& cfg, const char* check) {
  return std::find(cfg.checks.begin(), cfg.checks.end(), check) != cfg.checks.end();
}

std::size_t count_switches(const Trajectory& traj) {
  std::size_t n = 0;
  for (std::size_t k = 1; k < traj.modes.size(); ++k)
    if (traj.modes[k] != traj.modes[k - 1]) ++n;
  return n;
}

struct Simulation {
  Trajectory traj;
  json lyapunov = json::object();
};

Simulation simulate(const ScenarioConfig& cfg) {
  const auto& c = *cfg.controller;
  const auto& plant = cfg.plant.ss;
  Simulation out;
  if (auto tf = linear_tf(c)) {
    out.traj = simulate_linear_loop(plant, *tf, cfg.sim);
    return out;
  }
  // Closed-loop W is traced when a certificate is configured or the monotone check needs one.
  std::optional<Matrix> Y;
  if (cfg.certificate_Y || wants(cfg, "monotone")) {
    const auto cs = obtain_certificate(cfg);
    out.lyapunov["source"] = cs.source;
    if (cs.cert) Y = cs.cert->Y();
  }
  out.lyapunov["recorded"] = false;
  if (c.kind == ControllerKind::HigsIrc) {
    const auto& p = std::get<HigsIrcParams>(c.params);
    std::optional<LyapunovIrcCertificate> cert;
    if (Y) {
      cert.emplace(*Y, plant.C(), p.kappa_tilde());
      out.lyapunov["failing_stage"] = cert->positive_definite() ? "" : "1/kappa_tilde - C Y C^T > 0";
      if (!cert->positive_definite()) cert.reset();
    }
    out.lyapunov["recorded"] = cert.has_value();
    out.traj = simulate_higs_irc_loop(plant, p, cfg.sim, cert);
  } else {
    const auto& p = std::get<HigsPii2Params>(c.params);
    std::optional<LyapunovPii2Certificate> cert;
    if (Y) {
      cert.emplace(*Y, plant.C(), p);
      out.lyapunov["failing_stage"] = cert->failing_stage();
      if (!cert->positive_definite()) cert.reset();
    }
    out.lyapunov["recorded"] = cert.has_value();
    out.traj = simulate_higs_pii2_loop(plant, p, cfg.sim, cert);
  }
  return out;
}

CheckResult convergence_check(const Trajectory& traj, const CheckOptions& o) {
  CheckResult r{.name = "convergence", .pass = false, .evidence = json::object(),
                .condition = "|z(t_end)| <= convergence_tol"};
  const std::size_t n = traj.size();
  std::vector<double> norms(n);
  for (std::size_t k = 0; k < n; ++k) norms[k] = traj.joint_state(k).norm();
  // Peak norm over the first and the last quarter of the horizon.
  const std::size_t q = std::max<std::size_t>(1, n / 4);
  const double early = *std::max_element(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(q));
  const double late = *std::max_element(norms.end() - static_cast<std::ptrdiff_t>(q), norms.end());
  r.pass = norms.back() <= o.convergence_tol;
  r.evidence = {{"final_norm", norms.back()},
                {"bound", o.convergence_tol},
                {"peak_first_quarter", early},
                {"peak_last_quarter", late},
                {"envelope_decays", late < early}};
  return r;
}

CheckResult monotone_check(const Simulation& sim, const CheckOptions& o) {
  CheckResult r{.name = "monotone", .pass = false, .evidence = json::object(),
                .condition = "W(t_k+1) <= W(t_k) + monotone_budget * dt"};
  r.evidence["budget"] = o.monotone_budget;
  r.evidence["lyapunov"] = sim.lyapunov;
  if (sim.traj.lyapunov.empty()) {
    r.evidence["reason"] = "no positive definite closed-loop certificate";
    return r;
  }
  const auto rep = check_monotone(sim.traj, o.monotone_budget);
  r.pass = rep.pass;
  r.evidence["worst_violation"] = rep.worst_violation;
  r.evidence["worst_time"] = sim.traj.times.at(rep.worst_index);
  r.evidence["W_initial"] = sim.traj.lyapunov.front();
  r.evidence["W_final"] = sim.traj.lyapunov.back();
  return r;
}

CheckResult sector_check(const ScenarioConfig& cfg, const Trajectory& traj) {
  const auto& c = *cfg.controller;
  const double tol = cfg.check_options.sector_tol;
  SectorReport rep;
  CheckResult r{.name = "sector", .pass = false, .evidence = json::object(), .condition = {}};
  if (c.kind == ControllerKind::HigsIrc) {
    rep = check_sector_irc(traj, std::get<HigsIrcParams>(c.params), tol);
    r.condition = "e_tilde x_h >= x_h^2 / kappa_tilde";
  } else {
    rep = check_sector_pii2(traj, std::get<HigsPii2Params>(c.params), tol);
    r.condition = "e_i x_hi >= x_hi^2 / k_hi for each element";
  }
  r.pass = rep.pass;
  r.evidence = {{"worst_violation", rep.worst_violation},
                {"tolerance", tol},
                {"worst_time", traj.times.at(rep.worst_index)},
                {"worst_element", rep.worst_element + 1}};
  return r;
}

json settings_json(const ScenarioConfig& cfg) {
  const auto& s = cfg.sim;
  return {{"dt", s.dt},
          {"t_end", s.t_end},
          {"r", s.r},
          {"record_every", s.record_every},
          {"steps", s.steps()},
          {"x0", to_json_vector(s.x0)},
          {"controller_x0", s.controller_x0}};
}

json tolerances_json(const ScenarioConfig& cfg) {
  const auto& o = cfg.check_options;
  return {{"boundary_rel", cfg.sim.tolerances.boundary_rel},
          {"divergence", cfg.sim.tolerances.divergence},
          {"convergence_tol", o.convergence_tol},
          {"monotone_budget", o.monotone_budget},
          {"sector_tol", o.sector_tol},
          {"tol", o.tol}};
}

std::filesystem::path resolve(const std::optional<std::filesystem::path>& dir, const std::filesystem::path& p) {
  if (p.is_absolute() || !dir) return p;
  return *dir / p;
}

void write_text(const std::filesystem::path& path, const std::string& field, const std::function<void(std::ostream&)>& fn) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(field, "cannot write " + path.string());
  fn(out);
  if (!out) throw ConfigError(field, "failed writing " + path.string());
}

int aggregate_exit(const std::vector<int>& codes) {
  // A config error outranks a runtime failure, which outranks a failed check.
  for (int code : {kExitUsage, kExitRuntime, kExitCheckFailed})
    if (std::find(codes.begin(), codes.end(), code) != codes.end()) return code;
  return kExitOk;
}

}  // namespace

json to_json(const CheckResult& c) {
  return {{"name", c.name}, {"pass", c.pass}, {"evidence", c.evidence}, {"condition", c.condition}};
}

ScenarioRun run_scenario(const ScenarioConfig& cfg) {
  const auto& c = require_controller(cfg);
  validate_checks(cfg);

  ScenarioRun run;
  run.report = {{"scenario", cfg.name},
                {"plant", plant_json(cfg)},
                {"controller", controller_json(c)},
                {"sim", settings_json(cfg)},
                {"tolerances", tolerances_json(cfg)}};
  spdlog::info("simulating '{}' ({} steps)", cfg.name, cfg.sim.steps());

  Simulation sim;
  try {
    sim = simulate(cfg);
  } catch (const NonFiniteState& e) {
    spdlog::error("{}", e.what());
    run.report["status"] = "diverged";
    run.report["error"] = {{"type", "NonFiniteState"}, {"t", e.time()}, {"message", e.what()}};
    run.report["checks"] = json::array();
    run.report["pass"] = false;
    run.exit_code = kExitRuntime;
    return run;
  }
  const auto& traj = sim.traj;
  const auto last = traj.joint_state(traj.size() - 1);
  run.report["status"] = "completed";
  run.report["result"] = {{"samples", traj.size()},
                          {"final_time", traj.times.back()},
                          {"final_state", to_json_vector(last)},
                          {"final_norm", last.norm()},
                          {"mode_switches", count_switches(traj)},
                          {"lyapunov", sim.lyapunov}};

  for (const auto& name : cfg.checks) {
    if (name == "convergence") run.checks.push_back(convergence_check(traj, cfg.check_options));
    else if (name == "monotone") run.checks.push_back(monotone_check(sim, cfg.check_options));
    else if (name == "sector") run.checks.push_back(sector_check(cfg, traj));
    else if (name == "stability") run.checks.push_back(stability_check(cfg));
    else if (name == "certificate") run.checks.push_back(certificate_check(cfg));
  }
  json checks = json::array();
  bool all = true;
  for (const auto& ch : run.checks) {
    checks.push_back(to_json(ch));
    all = all && ch.pass;
    spdlog::info("check {}: {}", ch.name, ch.pass ? "pass" : "FAIL");
  }
  run.report["checks"] = std::move(checks);
  run.report["pass"] = all;
  run.exit_code = all ? kExitOk : kExitCheckFailed;
  run.trajectory = std::move(sim.traj);
  return run;
}

CommandResult cmd_simulate(const std::filesystem::path& config_path,
                           const std::optional<std::filesystem::path>& output_dir) {
  const auto cfg = load_config(config_path);
  auto run = run_scenario(cfg);
  const std::string stem = config_path.stem().string();
  const auto csv_path = resolve(output_dir, cfg.output.csv.value_or(stem + ".csv"));
  const auto json_path = resolve(output_dir, cfg.output.json.value_or(stem + ".json"));
  if (run.report["status"] == "completed")
    write_text(csv_path, "/output/csv", [&](std::ostream& os) { write_trajectory_csv(os, run.trajectory); });
  write_text(json_path, "/output/json", [&](std::ostream& os) { os << run.report.dump(2) << '\n'; });
  spdlog::info("wrote {} and {}", csv_path.string(), json_path.string());
  return {run.exit_code, std::move(run.report)};
}

CommandResult cmd_check(const ScenarioConfig& cfg, const std::string& which) {
  CheckResult r;
  if (which == "ni") r = ni_check(cfg);
  else if (which == "sni") r = sni_check(cfg);
  else if (which == "certificate") r = certificate_check(cfg);
  else if (which == "stability") r = stability_check(cfg);
  else throw ConfigError("", "unknown check '" + which + "' (ni | sni | certificate | stability)");
  json report{{"scenario", cfg.name}, {"check", to_json(r)}, {"pass", r.pass}, {"plant", plant_json(cfg)}};
  if (cfg.controller) report["controller"] = controller_json(*cfg.controller);
  return {r.pass ? kExitOk : kExitCheckFailed, std::move(report)};
}

CommandResult cmd_check(const std::filesystem::path& config_path, const std::string& which) {
  return cmd_check(load_config(config_path), which);
}

CommandResult cmd_design(const ScenarioConfig& cfg, const std::optional<std::string>& controller_type) {
  ControllerKind kind;
  if (controller_type) {
    const auto k = controller_kind_from_string(*controller_type);
    if (!k) throw ConfigError("", "unknown controller type '" + *controller_type + "'");
    kind = *k;
  } else {
    kind = require_controller(cfg).kind;
  }
  const auto& plant = cfg.plant.ss;
  const auto ni = ni_check(cfg);
  if (!ni.pass) throw NotNI("plant fails both the frequency test and the certificate search");
  if (!is_minimal(plant)) throw ConfigError("/plant", "plant realization is not minimal");

  const double G0 = dc_gain(plant);
  double omega_ref = std::numeric_limits<double>::infinity();
  for (const auto& p : poles(plant))
    if (std::abs(p) > 0.0) omega_ref = std::min(omega_ref, std::abs(p));
  // Default D sits one unit (or |G(0)|) inside the strict bound D < -G(0).
  const double D_default = -G0 - std::max(1.0, std::abs(G0));

  json report{{"scenario", cfg.name},
              {"controller_type", to_string(kind)},
              {"plant", plant_json(cfg)},
              {"ni", to_json(ni)},
              {"dc_gain", G0},
              {"reference_frequency", omega_ref}};
  const std::string caveat =
      "the conditions are sufficient for the stated gains; integrator frequencies must also be "
      "sufficiently small, so confirm the defaults by simulation";

  switch (kind) {
    case ControllerKind::HigsIrc: {
      report["region"] = {{"condition", "kappa_tilde * G(0) < 1, i.e. k_h (G(0) + D) < 1 with k_h > 0, D < 0"},
                          {"kappa_tilde_max", G0 > 0.0 ? json(1.0 / G0) : json(nullptr)}};
      json samples = json::array();
      auto add = [&](double k_h, double D) {
        const HigsIrcParams p(0.5 * omega_ref, k_h, D);
        const auto v = check_irc_stability(plant, p.kappa_tilde());
        samples.push_back({{"k_h", k_h}, {"D", D}, {"kappa_tilde", p.kappa_tilde()}, {"margin", v.margin},
                           {"feasible", v.pass}});
      };
      for (double k_h : {1.0, 5.0, 20.0})
        for (double D : {-0.5, -1.0, -2.0}) add(k_h, D);
      if (cfg.controller && cfg.controller->kind == ControllerKind::HigsIrc) {
        const auto& p = std::get<HigsIrcParams>(cfg.controller->params);
        add(p.k_h(), p.D());
        samples.back()["configured"] = true;
      }
      report["samples"] = std::move(samples);
      report["defaults"] = {{"omega_h", 0.5 * omega_ref}, {"omega_rule", "0.5 * min |pole|"}, {"caveat", caveat}};
      break;
    }
    case ControllerKind::Irc:
    case ControllerKind::Pii2rc:
    case ControllerKind::HigsPii2: {
      report["region"] = {{"condition", "D < -G(0)"}, {"D_max", -G0}};
      json defaults{{"D", D_default}, {"caveat", caveat}};
      if (kind == ControllerKind::Irc) {
        defaults["Gamma"] = 1.0;
      } else if (kind == ControllerKind::Pii2rc) {
        defaults["k_p"] = 1.0;
        defaults["k1"] = 1.0;
        defaults["k2"] = 1.0;
      } else {
        const double s = G0 + D_default;
        report["region"]["exclusion"] = "k_h1 + k_h2^2 + k_p != 1/(G(0) + D)";
        report["region"]["excluded_gain_sum_at_default_D"] = s == 0.0 ? json(nullptr) : json(1.0 / s);
        defaults["k_p"] = 0.5;
        defaults["h1"] = {{"omega_h", 0.3 * omega_ref}, {"k_h", 2.0}};
        defaults["h2"] = {{"omega_h", 0.2 * omega_ref}, {"k_h", 1.0}};
        defaults["h3"] = {{"omega_h", 0.4 * omega_ref}, {"k_h", 1.0}};
        defaults["gain_sum"] = 2.0 + 1.0 + 0.5;
        defaults["omega_rule"] = "0.3 / 0.2 / 0.4 * min |pole| (cascade needs omega_h2 < omega_h3, k_h2 = k_h3)";
      }
      report["defaults"] = std::move(defaults);
      if (cfg.controller && cfg.controller->kind == kind) report["configured"] = to_json(stability_check(cfg));
      break;
    }
  }
  return {kExitOk, std::move(report)};
}

CommandResult cmd_design(const std::filesystem::path& config_path, const std::optional<std::string>& controller_type) {
  return cmd_design(load_config(config_path), controller_type);
}

CommandResult cmd_sweep(const std::filesystem::path& config_path, std::optional<int> workers) {
  const auto base = load_config(config_path);
  if (!base.sweep) throw ConfigError("/sweep", "missing sweep section");
  const auto& sw = *base.sweep;
  const json::json_pointer ptr(sw.parameter);
  {
    json probe = base.raw;
    if (!probe.contains(ptr)) throw ConfigError("/sweep/parameter", "'" + sw.parameter + "' does not name a field");
  }

  struct Outcome {
    int exit_code = kExitOk;
    json summary;
  };
  std::vector<Outcome> outcomes(sw.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sw.values.size(); i = next++) {
      json summary{{"index", i}, {"value", sw.values[i]}};
      int code = kExitOk;
      try {
        json doc = base.raw;
        doc.erase("sweep");
        doc.erase("output");
        doc[ptr] = sw.values[i];
        const auto run = run_scenario(parse_config(doc));
        code = run.exit_code;
        summary["status"] = run.report["status"];
        if (run.report.contains("result")) summary["final_norm"] = run.report["result"]["final_norm"];
        json checks = json::object();
        for (const auto& ch : run.checks) checks[ch.name] = ch.pass;
        summary["checks"] = std::move(checks);
      } catch (...) {
        std::string message;
        code = exit_code_for_current_exception(message);
        summary["status"] = "error";
        summary["error"] = message;
      }
      summary["exit_code"] = code;
      outcomes[i] = {code, std::move(summary)};
    }
  };
  const int n_workers = std::clamp(workers.value_or(sw.workers), 1, static_cast<int>(sw.values.size()));
  spdlog::info("sweeping {} over {} values with {} workers", sw.parameter, sw.values.size(), n_workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  json runs = json::array();
  std::vector<int> codes;
  for (auto& o : outcomes) {
    codes.push_back(o.exit_code);
    runs.push_back(std::move(o.summary));
  }
  const int code = aggregate_exit(codes);
  json report{{"scenario", base.name}, {"parameter", sw.parameter}, {"runs", std::move(runs)}, {"pass", code == kExitOk}};
  if (base.output.json) {
    write_text(*base.output.json, "/output/json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
  }
  return {code, std::move(report)};
}

int exit_code_for_current_exception(std::string& message) {
  try {
    throw;
  } catch (const ConfigError& e) {
    message = std::string("config error: ") + e.what();
    return kExitUsage;
  } catch (const PreconditionViolation& e) {
    message = std::string("invalid parameters: ") + e.what();
    return kExitUsage;
  } catch (const NotNI& e) {
    message = std::string("not negative imaginary: ") + e.what();
    return kExitCheckFailed;
  } catch (const CertificateNotPD& e) {
    message = std::string("certificate not positive definite at stage '") + e.stage() + "': " + e.what();
    return kExitCheckFailed;
  } catch (const Error& e) {
    message = std::string("numerical failure: ") + e.what();
    return kExitRuntime;
  } catch (const json::exception& e) {
    message = std::string("config error: ") + e.what();
    return kExitUsage;
  } catch (const std::exception& e) {
    message = std::string("error: ") + e.what();
    return kExitRuntime;
  }
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (...) {
    std::string message;
    const int code = exit_code_for_current_exception(message);
    spdlog::error("{}", message);
    return code;
  }
}

}  // namespace nictl::cli

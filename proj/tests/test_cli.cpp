#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "nictl/cli/commands.hpp"
#include "nictl/cli/config.hpp"
#include "test_support.hpp"

namespace nictl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kMinimal = R"({
  "name": "t",
  "plant": {"A": [[0, 1], [-1, 0]], "B": [0, 1], "C": [1, 0]},
  "controller": {"type": "higs_irc", "omega_h": 0.5, "k_h": 20, "D": -1},
  "sim": {"dt": 1e-2, "t_end": 2, "x0": [3, 1]}
})";

json minimal() { return json::parse(kMinimal); }

std::string config_error_field(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nictl_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int guarded_code(const std::function<void()>& fn) {
  return run_guarded([&] {
    fn();
    return static_cast<int>(kExitOk);
  });
}

TEST(Config, ParsesMinimalScenario) {
  const auto cfg = parse_config(std::string(kMinimal));
  EXPECT_EQ(cfg.name, "t");
  ASSERT_TRUE(cfg.controller.has_value());
  EXPECT_EQ(cfg.controller->kind, ControllerKind::HigsIrc);
  EXPECT_DOUBLE_EQ(std::get<HigsIrcParams>(cfg.controller->params).kappa_tilde(), 20.0 / 21.0);
  EXPECT_EQ(cfg.sim.steps(), 200);
  EXPECT_EQ(cfg.sim.record_every, 1);
  EXPECT_TRUE(cfg.checks.empty());
  EXPECT_FALSE(cfg.certificate_Y.has_value());
  EXPECT_EQ(cfg.check_options.grid.points, 201);
}

TEST(Config, AcceptsCommentsAndTransferFunctionPlant) {
  const auto cfg = parse_config(std::string(R"(
    // comment line
    {"plant": {"num": [1], "den": [1, 0, 1]},  /* mass-spring */
     "controller": {"type": "pii2rc", "k_p": 1, "k1": 1, "k2": 1, "D": -2},
     "sim": {"dt": 1e-2, "t_end": 1}})"));
  EXPECT_EQ(cfg.plant.ss.order(), 2);
  EXPECT_NEAR(dc_gain(cfg.plant.ss), 1.0, 1e-12);
  EXPECT_EQ(cfg.sim.x0.size(), 2);
  EXPECT_EQ(cfg.sim.x0.norm(), 0.0);
}

TEST(Config, FieldErrors) {
  auto doc = minimal();
  doc["sim"]["dt"] = 0;
  EXPECT_EQ(config_error_field(doc), "/sim/dt");
  doc = minimal();
  doc["sim"]["dt"] = -1e-3;
  EXPECT_EQ(config_error_field(doc), "/sim/dt");
  doc = minimal();
  doc["checks"] = {"stability", "bogus"};
  EXPECT_EQ(config_error_field(doc), "/checks/1");
  doc = minimal();
  doc["controller"]["type"] = "pid";
  EXPECT_EQ(config_error_field(doc), "/controller/type");
  doc = minimal();
  doc["sim"]["step"] = 1;
  EXPECT_EQ(config_error_field(doc), "/sim/step");
  doc = minimal();
  doc["sim"]["x0"] = {1, 2, 3};
  EXPECT_EQ(config_error_field(doc), "/sim/x0");
  doc = minimal();
  doc["controller"]["k_h"] = -1;
  EXPECT_EQ(config_error_field(doc), "/controller");
  doc = minimal();
  doc.erase("plant");
  EXPECT_EQ(config_error_field(doc), "/plant");
  doc = minimal();
  doc["certificate"] = {{"Y", {{1, 0}}}};
  EXPECT_EQ(config_error_field(doc), "/certificate/Y");
  doc = minimal();
  doc["sweep"] = {{"parameter", "controller/k_h"}, {"values", {1}}};
  EXPECT_EQ(config_error_field(doc), "/sweep/parameter");
}

TEST(Config, SyntaxErrorReportsLine) {
  try {
    parse_config(std::string("{\n  \"name\": \"x\",\n  \"plant\": {\n  ]\n}"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_TRUE(e.line().has_value());
    EXPECT_EQ(*e.line(), 4u);
  }
}

TEST(Config, ShippedScenariosParse) {
  for (const auto& entry : fs::directory_iterator(NICTL_SCENARIO_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
}

TEST(Check, StabilityMarginForShippedScenario) {
  const auto r = cmd_check(test::scenario("fig8.cfg"), "stability");
  EXPECT_EQ(r.exit_code, kExitOk);
  const auto& ev = r.report["check"]["evidence"];
  EXPECT_NEAR(ev["margin"].get<double>(), 1.0 / 21.0, 1e-12);
  EXPECT_NEAR(ev["kappa_tilde"].get<double>(), 20.0 / 21.0, 0.0);
}

TEST(Check, NiExcludesResonance) {
  const auto r = cmd_check(test::scenario("fig8.cfg"), "ni");
  EXPECT_EQ(r.exit_code, kExitOk);
  const auto& ev = r.report["check"]["evidence"];
  EXPECT_EQ(ev["frequency"]["excluded_omegas"], json::array({1.0}));
  EXPECT_EQ(ev["passed_by"], json::array({"frequency", "lemma"}));
}

TEST(Check, CertificateIncludesClosedLoopStage) {
  auto cfg = load_config(test::scenario("fig8.cfg"));
  auto r = cmd_check(cfg, "certificate");
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_LE(r.report["check"]["evidence"]["residual_norm"].get<double>(), 1e-12);

  auto doc = cfg.raw;
  doc["controller"]["D"] = -0.5;
  r = cmd_check(parse_config(doc), "certificate");
  EXPECT_EQ(r.exit_code, kExitCheckFailed);
  EXPECT_EQ(r.report["check"]["evidence"]["closed_loop"]["failing_stage"], "1/kappa_tilde - C Y C^T > 0");
}

TEST(Check, LinearBoundaryFails) {
  auto doc = load_config(test::scenario("pii2rc_linear.cfg")).raw;
  doc["controller"]["D"] = -1;
  const auto cfg = parse_config(doc);
  auto r = cmd_check(cfg, "stability");
  EXPECT_EQ(r.exit_code, kExitCheckFailed);
  EXPECT_EQ(r.report["check"]["evidence"]["margin"].get<double>(), 0.0);
  doc["controller"]["D"] = -0.5;
  r = cmd_check(parse_config(doc), "certificate");
  EXPECT_EQ(r.exit_code, kExitCheckFailed);
  EXPECT_EQ(r.report["check"]["evidence"]["closed_loop"]["failing_stage"], "-D - C Y C^T > 0");
}

TEST(Check, SniRejectsHybridController) {
  EXPECT_EQ(guarded_code([] { cmd_check(test::scenario("fig8.cfg"), "sni"); }), kExitUsage);
  const auto r = cmd_check(test::scenario("pii2rc_linear.cfg"), "sni");
  EXPECT_EQ(r.exit_code, kExitOk);
}

TEST(Design, HigsIrcRegion) {
  const auto r = cmd_design(test::scenario("fig8.cfg"), std::nullopt);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_DOUBLE_EQ(r.report["region"]["kappa_tilde_max"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r.report["defaults"]["omega_h"].get<double>(), 0.5);
  const auto& configured = r.report["samples"].back();
  EXPECT_TRUE(configured["configured"].get<bool>());
  EXPECT_TRUE(configured["feasible"].get<bool>());
  // Each sample's verdict agrees with k_h (G(0) + D) < 1.
  for (const auto& s : r.report["samples"]) {
    const double lhs = s["k_h"].get<double>() * (1.0 + s["D"].get<double>());
    EXPECT_EQ(s["feasible"].get<bool>(), lhs < 1.0) << s.dump();
  }
}

TEST(Design, LinearRegionAndDefaults) {
  const auto r = cmd_design(load_config(test::scenario("fig8.cfg")), std::string("pii2rc"));
  EXPECT_DOUBLE_EQ(r.report["region"]["D_max"].get<double>(), -1.0);
  EXPECT_DOUBLE_EQ(r.report["defaults"]["D"].get<double>(), -2.0);
  const auto h = cmd_design(load_config(test::scenario("fig8.cfg")), std::string("higs_pii2"));
  EXPECT_LT(h.report["defaults"]["h2"]["omega_h"].get<double>(), h.report["defaults"]["h3"]["omega_h"].get<double>());
  EXPECT_NE(h.report["defaults"]["gain_sum"].get<double>(),
            h.report["region"]["excluded_gain_sum_at_default_D"].get<double>());
}

TEST(Design, NonNiPlantRejected) {
  auto doc = minimal();
  doc["plant"] = {{"A", {{1.0}}}, {"B", {1.0}}, {"C", {1.0}}};
  doc["sim"].erase("x0");
  const auto cfg = parse_config(doc);
  EXPECT_THROW(cmd_design(cfg, std::nullopt), NotNI);
  EXPECT_EQ(guarded_code([&] { cmd_design(cfg, std::nullopt); }), kExitCheckFailed);
  EXPECT_EQ(guarded_code([&] { cmd_design(cfg, std::string("lqr")); }), kExitUsage);
}

TEST(Simulate, ShippedScenarioExitCodes) {
  const auto dir = scratch_dir("exit");
  const std::vector<std::pair<std::string, int>> cases = {{"fig8.cfg", kExitOk},      {"fig8_kh5.cfg", kExitOk},
                                                          {"higs_pii2.cfg", kExitOk}, {"irc_linear.cfg", kExitOk},
                                                          {"pii2rc_linear.cfg", kExitOk}};
  for (const auto& [file, code] : cases) {
    const auto r = cmd_simulate(test::scenario(file), dir);
    EXPECT_EQ(r.exit_code, code) << file << '\n' << r.report.dump(2);
    EXPECT_EQ(r.report["status"], "completed");
  }
  EXPECT_TRUE(fs::exists(dir / "fig8.csv"));
  EXPECT_TRUE(fs::exists(dir / "fig8.json"));
  EXPECT_TRUE(fs::exists(dir / "higs_pii2.csv"));
  fs::remove_all(dir);
}

TEST(Simulate, DivergenceIsRuntimeFailure) {
  const auto dir = scratch_dir("diverge");
  const auto r = cmd_simulate(test::scenario("unstable.cfg"), dir);
  EXPECT_EQ(r.exit_code, kExitRuntime);
  EXPECT_EQ(r.report["status"], "diverged");
  EXPECT_FALSE(r.report["pass"].get<bool>());
  fs::remove_all(dir);
}

TEST(Simulate, RepeatedRunsByteIdentical) {
  const auto a = scratch_dir("rep_a"), b = scratch_dir("rep_b");
  cmd_simulate(test::scenario("fig8.cfg"), a);
  cmd_simulate(test::scenario("fig8.cfg"), b);
  EXPECT_EQ(slurp(a / "fig8.csv"), slurp(b / "fig8.csv"));
  EXPECT_EQ(slurp(a / "fig8.json"), slurp(b / "fig8.json"));
  EXPECT_FALSE(slurp(a / "fig8.csv").empty());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Simulate, ReportCarriesChecksAndTolerances) {
  const auto run = run_scenario(load_config(test::scenario("fig8.cfg")));
  EXPECT_EQ(run.exit_code, kExitOk);
  std::vector<std::string> names;
  for (const auto& c : run.checks) names.push_back(c.name);
  EXPECT_EQ(names, (std::vector<std::string>{"stability", "certificate", "convergence", "monotone", "sector"}));
  EXPECT_TRUE(run.report.contains("tolerances"));
  EXPECT_LE(run.report["result"]["final_norm"].get<double>(), 0.2);
  for (const auto& c : run.report["checks"]) EXPECT_TRUE(c["pass"].get<bool>()) << c.dump();
}

TEST(Simulate, FailedCheckGivesExitThree) {
  auto doc = load_config(test::scenario("fig8.cfg")).raw;
  doc["sim"]["t_end"] = 5;
  doc.erase("output");
  const auto run = run_scenario(parse_config(doc));
  EXPECT_EQ(run.exit_code, kExitCheckFailed);
}

TEST(Simulate, CheckNotApplicableToLinearController) {
  auto doc = load_config(test::scenario("irc_linear.cfg")).raw;
  doc["checks"] = {"monotone"};
  EXPECT_THROW(run_scenario(parse_config(doc)), ConfigError);
}

TEST(Sweep, OrderedAndIndependentOfWorkerCount) {
  const auto dir = scratch_dir("sweep");
  auto doc = load_config(test::scenario("sweep_kh.cfg")).raw;
  doc["output"] = {{"json", (dir / "s.json").string()}};
  doc["sim"]["t_end"] = 10;
  doc["checks"] = {"stability"};
  const auto path = dir / "sweep.cfg";
  std::ofstream(path) << doc.dump();
  const auto one = cmd_sweep(path, 1);
  const auto four = cmd_sweep(path, 4);
  EXPECT_EQ(one.report, four.report);
  const auto& runs = four.report["runs"];
  ASSERT_EQ(runs.size(), doc["sweep"]["values"].size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    EXPECT_EQ(runs[i]["index"].get<std::size_t>(), i);
    EXPECT_EQ(runs[i]["value"], doc["sweep"]["values"][i]);
  }
  EXPECT_TRUE(fs::exists(dir / "s.json"));
  fs::remove_all(dir);
}

TEST(Sweep, AggregatesWorstExitCode) {
  const auto dir = scratch_dir("sweep_agg");
  auto doc = minimal();
  doc["checks"] = {"stability"};
  doc["sweep"] = {{"parameter", "/controller/D"}, {"values", {-1, -0.5, -2}}};
  const auto path = dir / "sweep.cfg";
  std::ofstream(path) << doc.dump();
  auto r = cmd_sweep(path, 2);
  EXPECT_EQ(r.exit_code, kExitCheckFailed);
  EXPECT_EQ(r.report["runs"][1]["exit_code"], kExitCheckFailed);

  doc["sweep"]["values"] = {-1, 0.5};  // D > 0 is rejected by the controller
  std::ofstream(path) << doc.dump();
  r = cmd_sweep(path, 2);
  EXPECT_EQ(r.exit_code, kExitUsage);
  EXPECT_EQ(r.report["runs"][1]["status"], "error");

  doc["sweep"]["parameter"] = "/controller/nope";
  std::ofstream(path) << doc.dump();
  EXPECT_THROW(cmd_sweep(path, 2), ConfigError);
  fs::remove_all(dir);
}

TEST(Guarded, ExceptionMapping) {
  EXPECT_EQ(guarded_code([] { throw ConfigError("/x", "bad"); }), kExitUsage);
  EXPECT_EQ(guarded_code([] { throw PreconditionViolation("bad"); }), kExitUsage);
  EXPECT_EQ(guarded_code([] { throw NonFiniteState(1.0); }), kExitRuntime);
  EXPECT_EQ(guarded_code([] { throw NotNI("no"); }), kExitCheckFailed);
  EXPECT_EQ(guarded_code([] { throw CertificateNotPD("Y > 0", "no"); }), kExitCheckFailed);
  EXPECT_EQ(guarded_code([] { throw std::runtime_error("x"); }), kExitRuntime);
  EXPECT_EQ(guarded_code([] { const auto j = json::parse("{"); (void)j; }), kExitUsage);
  EXPECT_EQ(run_guarded([] { return static_cast<int>(kExitCheckFailed); }), kExitCheckFailed);
}

}  // namespace
}  // namespace nictl::cli

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "halphen/scenario.hpp"

using namespace halphen;
using nlohmann::json;

namespace {

json minimal_hal2_config() {
  json cfg;
  cfg["name"] = "t";
  cfg["system"] = "hal2";
  cfg["parameters"] = {{"abc", json::array({json::array({-0.125, 0.0}), json::array({-0.125, 0.0}),
                                            json::array({-0.125, 0.0})})}};
  cfg["initial_state"] = "theta:1,0,0,1,i";
  cfg["path"] = json::array({json::array({0.0, 1.0}), json::array({0.3, 1.0})});
  cfg["tolerance"] = 1e-8;
  cfg["verification"] = json::array({"lax"});
  return cfg;
}

std::string field_of(const ConfigError& e) { return e.field(); }

}  // namespace

TEST_CASE("parse_complex literal forms") {
  CHECK(parse_complex("1") == Complex(1, 0));
  CHECK(parse_complex("-2.5") == Complex(-2.5, 0));
  CHECK(parse_complex("i") == Complex(0, 1));
  CHECK(parse_complex("-i") == Complex(0, -1));
  CHECK(parse_complex("2i") == Complex(0, 2));
  CHECK(parse_complex("1+2i") == Complex(1, 2));
  CHECK(parse_complex("0.5-0.3i") == Complex(0.5, -0.3));
  CHECK(parse_complex("1.2e-3+4i") == Complex(1.2e-3, 4));
  CHECK(parse_complex(" 1 + 2i ") == Complex(1, 2));
  CHECK_THROWS_AS(parse_complex("foo"), ConfigError);
  CHECK_THROWS_AS(parse_complex("1+2j"), ConfigError);
}

TEST_CASE("config parsing: valid config") {
  const ScenarioConfig cfg = parse_config_json(minimal_hal2_config());
  CHECK(cfg.system == "hal2");
  CHECK(cfg.abc.has_value());
  CHECK(cfg.theta_mobius.has_value());
  CHECK(cfg.verifications == std::vector<std::string>{"lax"});
}

TEST_CASE("config parsing: field-level errors") {
  {
    json c = minimal_hal2_config();
    c.erase("system");
    CHECK_THROWS_AS(parse_config_json(c), ConfigError);
  }
  {
    json c = minimal_hal2_config();
    c["system"] = "painleve6";
    CHECK_THROWS_WITH_AS(parse_config_json(c), doctest::Contains("system"), ConfigError);
  }
  {
    json c = minimal_hal2_config();
    c["verification"] = json::array({"lax", "closed-form", "nonsense"});
    CHECK_THROWS_WITH_AS(parse_config_json(c), doctest::Contains("nonsense"), ConfigError);
  }
  {
    json c = minimal_hal2_config();
    c["system"] = "chazy";  // lax is not valid for chazy
    c["parameters"] = json::object();
    CHECK_THROWS_AS(parse_config_json(c), ConfigError);
  }
  {
    json c = minimal_hal2_config();
    c["initial_state"] = json::array({json::array({1.0, 0.0})});  // wrong size
    CHECK_THROWS_AS(parse_config_json(c), ConfigError);
  }
  {
    json c = minimal_hal2_config();
    c["initial_state"] = "theta:1,0,0,1,2i";  // t0 != path front
    CHECK_THROWS_AS(parse_config_json(c), ConfigError);
  }
  {
    json c = minimal_hal2_config();
    c["tolerance"] = -1.0;
    CHECK_THROWS_AS(parse_config_json(c), ConfigError);
  }
}

TEST_CASE("config parsing: med constraint violations are named") {
  json c = minimal_hal2_config();
  c["med"] = {{"c", json::array({json::array({1.0, 0.0}), json::array({1.0, 0.0}),
                                 json::array({1.0, 0.0})})}};
  try {
    parse_config_json(c);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(field_of(e) == "med.c");
    CHECK(std::string(e.what()).find("c1+c2+c3") != std::string::npos);
  }

  json s = minimal_hal2_config();
  s["med"] = {{"S", json::array({json::array({json::array({1.0, 0.0}), json::array({0.0, 0.0})}),
                                 json::array({json::array({0.0, 0.0}), json::array({1.0, 0.0})})})}};
  try {
    parse_config_json(s);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(field_of(e) == "med.S");
    CHECK(std::string(e.what()).find("trace") != std::string::npos);
  }
}

TEST_CASE("scenario catalog: stable names and required entries") {
  const auto& infos = list_scenarios();
  CHECK(infos.size() >= 10);
  bool has_hal2 = false, has_dhv = false;
  for (const auto& info : infos) {
    if (info.name == "hal2-lax-default") has_hal2 = true;
    if (info.name == "dhv-lax-default") has_dhv = true;
  }
  CHECK(has_hal2);
  CHECK(has_dhv);
  const auto& again = list_scenarios();
  for (std::size_t k = 0; k < infos.size(); ++k) CHECK(infos[k].name == again[k].name);
}

TEST_CASE("run_scenario: hal2 with lax and exponents passes below 1e-7") {
  json cfg = minimal_hal2_config();
  cfg["path"] = json::array({json::array({0.0, 1.0}), json::array({0.5, 1.0})});
  cfg["tolerance"] = 1e-7;
  cfg["verification"] = json::array({"lax", "exponents"});
  const RunOutcome out = run_scenario(parse_config_json(cfg));
  CHECK(out.pass);
  REQUIRE(out.verifications.size() == 2);
  for (const auto& v : out.verifications) CHECK(v.max_residual < 1e-7);
}

TEST_CASE("run_scenario: hal2 closed-form through a z_path") {
  json cfg;
  cfg["name"] = "hypergeom-cf";
  cfg["system"] = "hal2";
  cfg["parameters"] = {{"abc", json::array({json::array({-31.0 / 288.0, 0.0}),
                                            json::array({-23.0 / 288.0, 0.0}),
                                            json::array({-41.0 / 288.0, 0.0})})}};
  cfg["initial_state"] =
      json::array({json::array({0.9, 0.2}), json::array({0.05, -0.4}), json::array({-0.8, 0.1})});
  cfg["path"] = json::array({json::array({0.0, 0.0}), json::array({0.2, 0.1})});
  cfg["z_path"] = json::array({json::array({0.5, 0.0}), json::array({0.5, 0.45})});
  cfg["tolerance"] = 1e-6;
  cfg["verification"] = json::array({"closed-form"});
  const RunOutcome out = run_scenario(parse_config_json(cfg));
  CHECK(out.pass);
}

TEST_CASE("run_scenario: chazy closed-form config passes") {
  json cfg;
  cfg["name"] = "chazy-cf";
  cfg["system"] = "chazy";
  cfg["initial_state"] = "theta:1,0,0,1,1.2i";
  cfg["path"] = json::array({json::array({0.0, 1.2}), json::array({0.4, 1.2})});
  cfg["tolerance"] = 1e-8;
  cfg["verification"] = json::array({"closed-form"});
  const RunOutcome out = run_scenario(parse_config_json(cfg));
  CHECK(out.pass);
  REQUIRE(out.verifications.size() == 1);
  CHECK(out.verifications[0].max_residual < 1e-8);
}

TEST_CASE("run_scenario: identical config gives byte-identical report and CSV") {
  const ScenarioConfig cfg = parse_config_json(minimal_hal2_config());
  const RunOutcome a = run_scenario(cfg);
  const RunOutcome b = run_scenario(cfg);
  CHECK(report_to_json(a).dump(2) == report_to_json(b).dump(2));
  std::ostringstream csv_a, csv_b;
  write_trajectory_csv(csv_a, a.system, *a.trajectory);
  write_trajectory_csv(csv_b, b.system, *b.trajectory);
  CHECK(csv_a.str() == csv_b.str());
  CHECK(csv_a.str().rfind("path_param,t_re,t_im,x1_re,x1_im,x2_re,x2_im,x3_re,x3_im\n", 0) == 0);
}

TEST_CASE("run_scenario: blow-up is reported with a partial trajectory") {
  json cfg;
  cfg["name"] = "explode";
  cfg["system"] = "hal2";
  cfg["parameters"] = {{"abc", json::array({json::array({0.0, 0.0}), json::array({0.0, 0.0}),
                                            json::array({0.0, 0.0})})}};
  cfg["initial_state"] =
      json::array({json::array({1.0, 0.0}), json::array({2.0, 0.0}), json::array({3.0, 0.0})});
  cfg["path"] = json::array({json::array({0.0, 0.0}), json::array({2.0, 0.0})});
  cfg["verification"] = json::array({"lax"});
  const RunOutcome out = run_scenario(parse_config_json(cfg));
  CHECK_FALSE(out.pass);
  REQUIRE(out.trajectory_summary.has_value());
  CHECK(out.trajectory_summary->blow_up);
  CHECK(out.trajectory->samples().size() > 1);
  CHECK(out.verifications.empty());
}

TEST_CASE("report JSON shape") {
  const RunOutcome out = run_scenario(parse_config_json(minimal_hal2_config()));
  const json rep = report_to_json(out);
  CHECK(rep.contains("config"));
  CHECK(rep.contains("trajectory"));
  CHECK(rep["trajectory"].contains("steps"));
  CHECK(rep["trajectory"].contains("rejected_steps"));
  CHECK(rep["trajectory"].contains("end_state"));
  CHECK(rep["verifications"].is_array());
  const json& v = rep["verifications"][0];
  CHECK(v.contains("max_residual"));
  CHECK(v.contains("tolerance"));
  CHECK(v.contains("pass"));
  CHECK(v["reports"][0].contains("x_grid"));
  CHECK(v["reports"][0].contains("t_points"));
  CHECK(v["reports"][0].contains("max_abs_residual"));
  CHECK(v["reports"][0]["metadata"].contains("trajectory_id"));
  // pass iff every verification is within tolerance
  bool all = true;
  for (const auto& vj : rep["verifications"]) all = all && vj["pass"].get<bool>();
  CHECK(rep["pass"].get<bool>() == all);
}

#ifdef HALPHEN_CLI
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HALPHEN_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string write_tmp_config(const json& j, const std::string& name) {
  const std::string path = "/tmp/halphen_test_" + name + ".json";
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

}  // namespace

TEST_CASE("CLI exit-status contract") {
  // 0: all verifications pass
  CHECK(run_cli("verify theta-identities --out /tmp/halphen_cli_out") == 0);

  // 1: verification failure (absurd tolerance)
  json fail_cfg = minimal_hal2_config();
  fail_cfg["tolerance"] = 1e-30;
  CHECK(run_cli("verify --config " + write_tmp_config(fail_cfg, "fail") +
                " --out /tmp/halphen_cli_out") == 1);

  // 2: config error
  json bad_cfg = minimal_hal2_config();
  bad_cfg["system"] = "unknown";
  CHECK(run_cli("verify --config " + write_tmp_config(bad_cfg, "bad") +
                " --out /tmp/halphen_cli_out") == 2);
  CHECK(run_cli("verify no-such-scenario --out /tmp/halphen_cli_out") == 2);

  // 3: blow-up
  json blow_cfg;
  blow_cfg["name"] = "blow";
  blow_cfg["system"] = "hal2";
  blow_cfg["parameters"] = {{"abc", json::array({json::array({0.0, 0.0}), json::array({0.0, 0.0}),
                                                 json::array({0.0, 0.0})})}};
  blow_cfg["initial_state"] =
      json::array({json::array({1.0, 0.0}), json::array({2.0, 0.0}), json::array({3.0, 0.0})});
  blow_cfg["path"] = json::array({json::array({0.0, 0.0}), json::array({2.0, 0.0})});
  blow_cfg["verification"] = json::array({"lax"});
  CHECK(run_cli("integrate --config " + write_tmp_config(blow_cfg, "blow") +
                " --out /tmp/halphen_cli_out") == 3);
}

TEST_CASE("CLI integrate writes trajectory and report files") {
  const std::string cfg_path = write_tmp_config(minimal_hal2_config(), "ok");
  CHECK(run_cli("integrate --config " + cfg_path + " --out /tmp/halphen_cli_int") == 0);
  CHECK(std::ifstream("/tmp/halphen_cli_int/t.report.json").good());
  CHECK(std::ifstream("/tmp/halphen_cli_int/t.trajectory.csv").good());
  CHECK(std::ifstream("/tmp/halphen_cli_int/t.meta.json").good());
  CHECK(run_cli("integrate --config " + cfg_path +
                " --out /tmp/halphen_cli_int --format json") == 0);
  CHECK(std::ifstream("/tmp/halphen_cli_int/t.trajectory.json").good());
}
#endif

// Command-line runner: integrates the configured system, runs the
// requested verifications, and writes machine-readable reports.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "halphen/scenario.hpp"

namespace fs = std::filesystem;
using halphen::RunOutcome;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitBlowUp = 3;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw halphen::ConfigError("--config", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw halphen::ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

nlohmann::json trajectory_to_json(const std::string& system, const halphen::Trajectory& traj) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& smp : traj.samples()) {
    nlohmann::json row;
    row["path_param"] = smp.s;
    row["t"] = nlohmann::json::array({smp.t.real(), smp.t.imag()});
    nlohmann::json st = nlohmann::json::array();
    for (Eigen::Index i = 0; i < smp.y.size(); ++i)
      st.push_back(nlohmann::json::array({smp.y[i].real(), smp.y[i].imag()}));
    row["state"] = st;
    rows.push_back(row);
  }
  return nlohmann::json{{"system", system}, {"samples", rows}};
}

/// Writes <name>.report.json, the trajectory file, and the wall-time
/// sidecar; the sidecar is the only output that varies between runs.
void write_outputs(const fs::path& out_dir, const RunOutcome& outcome, double wall_ms,
                   const std::string& format) {
  fs::create_directories(out_dir);
  write_text(out_dir / (outcome.name + ".report.json"),
             halphen::report_to_json(outcome).dump(2) + "\n");
  if (outcome.trajectory && !outcome.system.empty()) {
    if (format == "csv") {
      std::ofstream csv(out_dir / (outcome.name + ".trajectory.csv"), std::ios::binary);
      halphen::write_trajectory_csv(csv, outcome.system, *outcome.trajectory);
    } else {
      write_text(out_dir / (outcome.name + ".trajectory.json"),
                 trajectory_to_json(outcome.system, *outcome.trajectory).dump(2) + "\n");
    }
  }
  write_text(out_dir / (outcome.name + ".meta.json"),
             nlohmann::json{{"wall_time_ms", wall_ms}}.dump(2) + "\n");
}

int outcome_exit_code(const RunOutcome& outcome) {
  if (outcome.trajectory_summary && outcome.trajectory_summary->blow_up) return kExitBlowUp;
  return outcome.pass ? kExitPass : kExitVerificationFailure;
}

void print_outcome(const RunOutcome& outcome) {
  for (const auto& v : outcome.verifications) {
    std::cout << (v.pass ? "  pass  " : "  FAIL  ") << outcome.name << " / " << v.name
              << "  max residual " << v.max_residual << "  (tol " << v.tolerance << ")";
    if (!v.note.empty()) std::cout << "  [" << v.note << "]";
    std::cout << "\n";
  }
  if (outcome.trajectory_summary && outcome.trajectory_summary->blow_up)
    std::cout << "  BLOW-UP  " << outcome.name << " (partial trajectory reported)\n";
}

template <typename Fn>
std::pair<RunOutcome, double> timed(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out = fn();
  const auto stop = std::chrono::steady_clock::now();
  return {std::move(out), std::chrono::duration<double, std::milli>(stop - start).count()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integrate and cross-verify the Halphen/Chazy/Darboux-Halphen family"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", format = "csv";
  double tol_override = 0.0;
  std::vector<std::string> scenario_names;

  CLI::App* cmd_list = app.add_subcommand("list", "list built-in scenarios");

  CLI::App* cmd_integrate =
      app.add_subcommand("integrate", "integrate a configured system along its path");
  cmd_integrate->add_option("--config", config_path, "scenario config JSON")->required();
  cmd_integrate->add_option("--out", out_dir, "output directory");
  cmd_integrate->add_option("--tol", tol_override, "override the integration tolerance");
  cmd_integrate->add_option("--format", format, "trajectory format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "run verifications from a config or named built-in scenarios (default: all)");
  cmd_verify->add_option("scenarios", scenario_names, "built-in scenario names");
  cmd_verify->add_option("--config", config_path, "scenario config JSON");
  cmd_verify->add_option("--out", out_dir, "output directory");
  cmd_verify->add_option("--tol", tol_override, "override the verification tolerance");
  cmd_verify->add_option("--format", format, "trajectory format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_list->parsed()) {
      for (const auto& info : halphen::list_scenarios())
        std::cout << info.name << "  -  " << info.description << "\n";
      return kExitPass;
    }

    if (cmd_integrate->parsed()) {
      halphen::ScenarioConfig cfg = halphen::parse_config_json(load_json(config_path));
      cfg.verifications.clear();  // integrate only
      if (tol_override > 0.0) cfg.integration_tolerance = tol_override;
      auto [outcome, ms] = timed([&] { return halphen::run_scenario(cfg); });
      write_outputs(out_dir, outcome, ms, format);
      print_outcome(outcome);
      return outcome_exit_code(outcome);
    }

    // verify
    std::vector<RunOutcome> outcomes;
    std::vector<double> times;
    if (!config_path.empty()) {
      halphen::ScenarioConfig cfg = halphen::parse_config_json(load_json(config_path));
      if (tol_override > 0.0) cfg.tolerance = tol_override;
      auto [outcome, ms] = timed([&] { return halphen::run_scenario(cfg); });
      outcomes.push_back(std::move(outcome));
      times.push_back(ms);
    } else {
      std::vector<std::string> names = scenario_names;
      if (names.empty())
        for (const auto& info : halphen::list_scenarios()) names.push_back(info.name);
      for (const auto& name : names) {
        if (!halphen::has_builtin(name))
          throw halphen::ConfigError("scenario", "unknown built-in scenario '" + name + "'");
        auto [outcome, ms] = timed([&] { return halphen::run_builtin(name); });
        outcomes.push_back(std::move(outcome));
        times.push_back(ms);
      }
    }

    int exit_code = kExitPass;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      write_outputs(out_dir, outcomes[k], times[k], format);
      print_outcome(outcomes[k]);
      exit_code = std::max(exit_code, outcome_exit_code(outcomes[k]));
    }
    return exit_code;
  } catch (const halphen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const halphen::BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const halphen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerificationFailure;
  }
}

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "halphen/closed_form.hpp"
#include "halphen/flows.hpp"
#include "halphen/integrate.hpp"
#include "halphen/med_lax.hpp"

namespace halphen {

/// Parsed and validated scenario description. Complex numbers appear in
/// the JSON form as two-element arrays [re, im]; see README for the full
/// schema.
struct ScenarioConfig {
  std::string name = "custom";
  std::string system;  // hal1 | hal2 | chazy | dhv | ach | dh9
  std::optional<HalphenABC> abc;
  std::optional<AlphaParams> alphas;
  std::optional<std::vector<Complex>> initial_values;
  std::optional<Mobius> theta_mobius;
  std::optional<Complex> theta_t0;
  std::vector<Complex> path;
  std::optional<std::vector<Complex>> z_path;
  double tolerance = 1e-8;
  double integration_tolerance = 1e-12;
  std::vector<std::string> verifications;
  MedParams med;
  nlohmann::json raw;  // echoed into reports
};

/// Parse "1", "-2.5", "i", "2i", "1+2i", "0.5-0.3i", ...
Complex parse_complex(const std::string& text);

ScenarioConfig parse_config_json(const nlohmann::json& j);

struct VerificationResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
  std::vector<ResidualReport> reports;
};

struct TrajectorySummary {
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  Complex end_time;
  std::vector<Complex> end_state;
  bool blow_up = false;
};

struct RunOutcome {
  std::string name;
  std::string system;
  nlohmann::json config_echo;
  std::optional<TrajectorySummary> trajectory_summary;
  std::vector<VerificationResult> verifications;
  bool pass = true;
  std::optional<Trajectory> trajectory;  // kept for CSV output
};

/// Integrates the configured system along its path and runs the requested
/// verifications. A blow-up is reported (pass = false, summary flagged)
/// rather than thrown, so the partial report survives.
RunOutcome run_scenario(const ScenarioConfig& cfg);

nlohmann::json to_json(const ResidualReport& rep);
nlohmann::json report_to_json(const RunOutcome& outcome);
void write_trajectory_csv(std::ostream& out, const std::string& system, const Trajectory& traj);

struct BuiltinInfo {
  std::string name;
  std::string description;
};

/// Stable catalog of named scenarios, one per acceptance check.
const std::vector<BuiltinInfo>& list_scenarios();
bool has_builtin(const std::string& name);
RunOutcome run_builtin(const std::string& name);

}  // namespace halphen

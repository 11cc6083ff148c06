#pragma once

#include "bess/horizon.hpp"
#include "bess/scenarios.hpp"
#include "bess/sim.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bess {

enum class ScenarioKind { GaussianDemand, GaussianRes, Csv };

/**
 * Flat, unit-suffixed run configuration. Every key of the YAML file maps to
 * one field here; see `config_keys()` for the list.
 *
 * `peak_sigma_slots` is a width in sampling periods: with the default 5 min
 * slot, sigma = 4 is 20 minutes.
 */
struct RunConfig {
  // controller
  double theta_minutes = 5.0;
  int horizon_slots = 24;
  double alpha = 1.0;
  double beta = 5.0;
  double gamma = 1.0;
  double soc_min_mwh = 0.0;
  double capacity_mwh = 12.0;
  double x_ref_mwh = 6.0;
  double storage_power_mw = 6.0;
  double pg_min_mw = -1e6;
  double pg_max_mw = 1e6;

  // scenario
  ScenarioKind scenario = ScenarioKind::GaussianDemand;
  double start_hour = 0.0;
  double demand_base_mw = 50.0;
  double res_base_mw = 5.0;
  double peak_amplitude = 0.0;  // fraction of the base of the peaked series
  double peak_center_hour = 17.0;
  double peak_sigma_slots = 4.0;
  std::string load_csv;
  std::string load_column = "load_mw";
  std::string res_csv;
  std::string res_column = "pv_mw";
  Interpolation interpolation = Interpolation::Linear;

  // simulation
  int duration_slots = 288;
  double x_init_mwh = 0.0;

  // output
  std::string trace_path = "trace.csv";
  std::string metrics_path = "metrics.txt";
  bool baseline = false;
  bool record_timing = true;

  double theta_h() const { return theta_minutes / 60.0; }
  ControllerConfig controller() const;

  /// Throws Error(ConfigError) on inconsistent values.
  void validate() const;

  /// Sets one key from its text form. Throws Error(ConfigError) for unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Current value of one key as text (the form accepted by set()).
  std::string get(const std::string& key) const;
};

const std::vector<std::string>& config_keys();

/// YAML text with one `key: value` line per setting.
std::string to_yaml(const RunConfig& cfg);
RunConfig parse_run_config(const std::string& yaml_text, const std::string& source = "<string>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Built-in scenarios: testcase1 (demand peak), testcase2 (RES peak),
/// testcase3 (bundled realistic-day CSVs). Overrides are applied with
/// RunConfig::set; failures raise InvalidOverride, unknown names UnknownPreset.
RunConfig preset(const std::string& name, const std::map<std::string, std::string>& overrides = {});

/// Directory holding the bundled data files (BESS_DATA_DIR env var, else the
/// compiled-in source path).
std::filesystem::path data_dir();

/// Profiles for the run. Synthetic scenarios carry horizon_slots - 1 extra
/// slots after the simulated duration so that the last window is full.
Scenario build_scenario(const RunConfig& cfg);

struct RunOutput {
  SimulationResult result;
  SimulationResult baseline;
  Metrics metrics;
};

/// Builds the scenario, runs the controller and the storage-free baseline.
RunOutput execute(const RunConfig& cfg);

}  // namespace bess

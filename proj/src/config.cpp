#include "bess/config.hpp"

#include "bess/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#ifndef BESS_DEFAULT_DATA_DIR
#define BESS_DEFAULT_DATA_DIR "data"
#endif

namespace bess {

namespace {

using FieldPtr =
    std::variant<double RunConfig::*, int RunConfig::*, std::string RunConfig::*, bool RunConfig::*>;

struct Field {
  const char* key;
  FieldPtr ptr;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"theta_minutes", &RunConfig::theta_minutes},
      {"horizon_slots", &RunConfig::horizon_slots},
      {"alpha", &RunConfig::alpha},
      {"beta", &RunConfig::beta},
      {"gamma", &RunConfig::gamma},
      {"soc_min_mwh", &RunConfig::soc_min_mwh},
      {"capacity_mwh", &RunConfig::capacity_mwh},
      {"x_ref_mwh", &RunConfig::x_ref_mwh},
      {"storage_power_mw", &RunConfig::storage_power_mw},
      {"pg_min_mw", &RunConfig::pg_min_mw},
      {"pg_max_mw", &RunConfig::pg_max_mw},
      {"start_hour", &RunConfig::start_hour},
      {"demand_base_mw", &RunConfig::demand_base_mw},
      {"res_base_mw", &RunConfig::res_base_mw},
      {"peak_amplitude", &RunConfig::peak_amplitude},
      {"peak_center_hour", &RunConfig::peak_center_hour},
      {"peak_sigma_slots", &RunConfig::peak_sigma_slots},
      {"load_csv", &RunConfig::load_csv},
      {"load_column", &RunConfig::load_column},
      {"res_csv", &RunConfig::res_csv},
      {"res_column", &RunConfig::res_column},
      {"duration_slots", &RunConfig::duration_slots},
      {"x_init_mwh", &RunConfig::x_init_mwh},
      {"trace_path", &RunConfig::trace_path},
      {"metrics_path", &RunConfig::metrics_path},
      {"baseline", &RunConfig::baseline},
      {"record_timing", &RunConfig::record_timing},
  };
  return table;
}

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.c_str();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, v.c_str() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.c_str() + v.size() || !std::isfinite(out)) {
    config_error(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.c_str(), v.c_str() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.c_str() + v.size()) {
    config_error(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  config_error(key + ": expected true/false, got '" + v + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"scenario", "interpolation"};
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "scenario") {
    if (value == "gaussian_demand") scenario = ScenarioKind::GaussianDemand;
    else if (value == "gaussian_res") scenario = ScenarioKind::GaussianRes;
    else if (value == "csv") scenario = ScenarioKind::Csv;
    else config_error("scenario: expected gaussian_demand, gaussian_res or csv, got '" + value + "'");
    return;
  }
  if (key == "interpolation") {
    if (value == "linear") interpolation = Interpolation::Linear;
    else if (value == "previous") interpolation = Interpolation::Previous;
    else config_error("interpolation: expected linear or previous, got '" + value + "'");
    return;
  }
  for (const auto& f : fields()) {
    if (key != f.key) continue;
    std::visit(
        [&](auto ptr) {
          using T = std::remove_reference_t<decltype(this->*ptr)>;
          if constexpr (std::is_same_v<T, double>) this->*ptr = to_double(key, value);
          else if constexpr (std::is_same_v<T, int>) this->*ptr = to_int(key, value);
          else if constexpr (std::is_same_v<T, bool>) this->*ptr = to_bool(key, value);
          else this->*ptr = value;
        },
        f.ptr);
    return;
  }
  config_error("unknown key '" + key + "'");
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "scenario") {
    switch (scenario) {
      case ScenarioKind::GaussianDemand: return "gaussian_demand";
      case ScenarioKind::GaussianRes: return "gaussian_res";
      case ScenarioKind::Csv: return "csv";
    }
  }
  if (key == "interpolation") return interpolation == Interpolation::Linear ? "linear" : "previous";
  for (const auto& f : fields()) {
    if (key != f.key) continue;
    return std::visit(
        [&](auto ptr) -> std::string {
          using T = std::remove_cv_t<std::remove_reference_t<decltype(this->*ptr)>>;
          if constexpr (std::is_same_v<T, bool>) return (this->*ptr) ? "true" : "false";
          else if constexpr (std::is_same_v<T, std::string>) return this->*ptr;
          else return fmt::format("{}", this->*ptr);
        },
        f.ptr);
  }
  config_error("unknown key '" + key + "'");
}

ControllerConfig RunConfig::controller() const {
  ControllerConfig c = ControllerConfig::with_constant_weights(horizon_slots, alpha, beta, gamma);
  c.theta_h = theta_h();
  c.x_ref = x_ref_mwh;
  c.x_min = soc_min_mwh;
  c.x_max = capacity_mwh;
  c.ps_min = -storage_power_mw;
  c.ps_max = storage_power_mw;
  c.pg_min = pg_min_mw;
  c.pg_max = pg_max_mw;
  return c;
}

void RunConfig::validate() const {
  if (!(theta_minutes > 0.0)) config_error("theta_minutes must be > 0");
  if (horizon_slots < 1) config_error("horizon_slots must be >= 1");
  if (alpha < 0.0 || beta < 0.0) config_error("alpha and beta must be >= 0");
  if (!(gamma > 0.0)) config_error("gamma must be > 0");
  if (!(soc_min_mwh <= capacity_mwh)) config_error("soc_min_mwh exceeds capacity_mwh");
  if (!(soc_min_mwh <= x_ref_mwh && x_ref_mwh <= capacity_mwh)) {
    config_error(fmt::format("x_ref_mwh {} outside [{}, {}]", x_ref_mwh, soc_min_mwh, capacity_mwh));
  }
  if (!(soc_min_mwh <= x_init_mwh && x_init_mwh <= capacity_mwh)) {
    config_error(fmt::format("x_init_mwh {} outside [{}, {}]", x_init_mwh, soc_min_mwh, capacity_mwh));
  }
  if (storage_power_mw < 0.0) config_error("storage_power_mw must be >= 0");
  if (!(pg_min_mw <= pg_max_mw)) config_error("pg_min_mw exceeds pg_max_mw");
  if (duration_slots < 1) config_error("duration_slots must be >= 1");
  if (demand_base_mw < 0.0 || res_base_mw < 0.0) config_error("base powers must be >= 0");
  if (peak_amplitude < 0.0) config_error("peak_amplitude must be >= 0");
  if (!(peak_sigma_slots > 0.0)) config_error("peak_sigma_slots must be > 0");
  if (scenario == ScenarioKind::Csv && load_csv.empty()) config_error("scenario csv needs load_csv");
}

std::string to_yaml(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const auto& key : config_keys()) out << YAML::Key << key << YAML::Value << cfg.get(key);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

RunConfig parse_run_config(const std::string& yaml_text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error(source + ": " + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) config_error(source + ": expected a mapping of key: value lines");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kv.second.IsScalar()) config_error(source + ": " + key + " must be a scalar");
    try {
      cfg.set(key, kv.second.as<std::string>());
    } catch (const Error& e) {
      config_error(source + ": " + e.detail());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("BESS_DATA_DIR"); env && *env) return env;
  return BESS_DEFAULT_DATA_DIR;
}

RunConfig preset(const std::string& name, const std::map<std::string, std::string>& overrides) {
  RunConfig cfg;
  cfg.trace_path = name + ".trace.csv";
  cfg.metrics_path = name + ".metrics.txt";
  if (name == "testcase1") {
    cfg.scenario = ScenarioKind::GaussianDemand;
    cfg.peak_amplitude = 0.5;
  } else if (name == "testcase2") {
    cfg.scenario = ScenarioKind::GaussianRes;
    cfg.peak_amplitude = 1.0;
  } else if (name == "testcase3") {
    cfg.scenario = ScenarioKind::Csv;
  } else {
    throw Error(ErrorCode::UnknownPreset, "'" + name + "' (known: testcase1, testcase2, testcase3)");
  }
  for (const auto& [key, value] : overrides) {
    try {
      cfg.set(key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidOverride, e.detail());
    }
  }
  if (cfg.scenario == ScenarioKind::Csv && cfg.load_csv.empty()) {
    cfg.load_csv = (data_dir() / "realistic_day_load.csv").string();
    cfg.res_csv = (data_dir() / "realistic_day_pv.csv").string();
    cfg.load_column = "load_mw";
    cfg.res_column = "pv_mw";
    spdlog::info("testcase3: using bundled synthetic realistic-day profiles ({}); these are NOT the "
                 "historical demand/PV datasets, only profiles of similar shape",
                 data_dir().string());
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidOverride, e.detail());
  }
  return cfg;
}

Scenario build_scenario(const RunConfig& cfg) {
  const double slot = cfg.theta_h();
  const Eigen::Index n = cfg.duration_slots + cfg.horizon_slots - 1;
  Scenario s;
  switch (cfg.scenario) {
    case ScenarioKind::GaussianDemand: {
      const GaussianPeakSpec spec{cfg.demand_base_mw, cfg.peak_amplitude, cfg.peak_center_hour,
                                  cfg.peak_sigma_slots};
      s.load = gaussian_peak_profile(spec, cfg.start_hour, n, slot);
      s.res = {cfg.start_hour, slot, Vec::Zero(n)};
      break;
    }
    case ScenarioKind::GaussianRes: {
      const GaussianPeakSpec spec{cfg.res_base_mw, cfg.peak_amplitude, cfg.peak_center_hour,
                                  cfg.peak_sigma_slots};
      s.load = {cfg.start_hour, slot, Vec::Constant(n, cfg.demand_base_mw)};
      s.res = res_peak_profile(spec, cfg.start_hour, n, slot);
      break;
    }
    case ScenarioKind::Csv: {
      CsvOptions opts;
      opts.slot_hours = slot;
      opts.interpolation = cfg.interpolation;
      opts.start_h = cfg.start_hour;
      auto load = [&](const std::string& path, const std::string& column, bool clamp) {
        opts.value_column = column;
        opts.clamp_negative = clamp;
        opts.n_slots = n;
        try {
          return load_csv_profile(path, opts);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InsufficientCoverage) throw;
        }
        // No look-ahead beyond the simulated duration; the horizon shrinks.
        opts.n_slots = cfg.duration_slots;
        return load_csv_profile(path, opts);
      };
      s.load = load(cfg.load_csv, cfg.load_column, false);
      if (cfg.res_csv.empty()) {
        s.res = {s.load.start_h, slot, Vec::Zero(s.load.size())};
      } else {
        s.res = load(cfg.res_csv, cfg.res_column, true);
        const auto m = std::min(s.load.size(), s.res.size());
        s.load.values.conservativeResize(m);
        s.res.values.conservativeResize(m);
      }
      break;
    }
  }
  return s;
}

RunOutput execute(const RunConfig& cfg) {
  cfg.validate();
  const Scenario scenario = build_scenario(cfg);
  const ControllerConfig ctrl = cfg.controller();
  SimOptions opts;
  opts.duration_slots = cfg.duration_slots;
  RunOutput out;
  out.result = run_closed_loop(scenario, ctrl, cfg.x_init_mwh, opts);
  out.baseline = run_closed_loop(scenario, ctrl.without_storage(), cfg.x_init_mwh, opts);
  out.metrics = compute_metrics(out.result, out.baseline);
  return out;
}

}  // namespace bess

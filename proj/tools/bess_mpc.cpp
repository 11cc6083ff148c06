// Command-line front end: runs a configuration file or a built-in preset and
// writes the per-slot trace and a metrics summary.
//
// Exit codes: 0 success, 1 domain error (config, infeasibility, I/O),
// 2 usage error.

#include "bess/config.hpp"
#include "bess/error.hpp"
#include "bess/report.hpp"
#include "bess/sim.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

struct Sweep {
  std::string key;
  std::vector<std::string> values;
};

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw bess::Error(bess::ErrorCode::InvalidOverride, "--sweep expects key=v1,v2,... got '" + text + "'");
  }
  Sweep s{text.substr(0, eq), {}};
  std::string rest = text.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    const auto end = comma == std::string::npos ? rest.size() : comma;
    if (end > start) s.values.push_back(rest.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (s.values.empty()) throw bess::Error(bess::ErrorCode::InvalidOverride, "--sweep has no values");
  return s;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const auto stem = p.stem().string();
  const auto ext = p.extension().string();
  return (p.parent_path() / (stem + suffix + ext)).string();
}

void write_outputs(const bess::RunConfig& cfg, const bess::RunOutput& out) {
  bess::write_trace(cfg.trace_path, out.result, cfg.record_timing);
  bess::write_metrics(cfg.metrics_path, out.metrics);
  if (cfg.baseline) bess::write_trace(with_suffix(cfg.trace_path, "_baseline"), out.baseline, cfg.record_timing);
  std::cout << cfg.trace_path << ": peak P^g " << out.metrics.peak_gen << " MW (baseline "
            << out.metrics.peak_gen_baseline << " MW), max ramp " << out.metrics.max_ramp_gen << " MW/slot (baseline "
            << out.metrics.max_ramp_gen_baseline << "), mean step " << out.metrics.mean_solve_ms << " ms\n";
}

void run_single(const bess::RunConfig& cfg) { write_outputs(cfg, bess::execute(cfg)); }

// Each sweep value gets its own trace/metrics files (suffix _<key>-<value>);
// the runs execute in parallel.
void run_sweep(const bess::RunConfig& base, const Sweep& sweep) {
  std::vector<bess::RunConfig> cfgs;
  for (const auto& v : sweep.values) {
    bess::RunConfig c = base;
    try {
      c.set(sweep.key, v);
      c.validate();
    } catch (const bess::Error& e) {
      throw bess::Error(bess::ErrorCode::InvalidOverride, e.detail());
    }
    const std::string suffix = "_" + sweep.key + "-" + v;
    c.trace_path = with_suffix(base.trace_path, suffix);
    c.metrics_path = with_suffix(base.metrics_path, suffix);
    cfgs.push_back(std::move(c));
  }

  std::vector<bess::SweepCase> cases;
  for (const auto& c : cfgs) {
    bess::SweepCase sc{bess::build_scenario(c), c.controller(), c.x_init_mwh, {}};
    sc.opts.duration_slots = c.duration_slots;
    cases.push_back(sc);
    sc.cfg = sc.cfg.without_storage();
    cases.push_back(std::move(sc));
  }
  const auto results = bess::run_sweep_parallel(cases);
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    bess::RunOutput out{results[2 * i], results[2 * i + 1], {}};
    out.metrics = bess::compute_metrics(out.result, out.baseline);
    write_outputs(cfgs[i], out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  // Diagnostics go to stderr; stdout carries summaries and --print-config.
  spdlog::set_default_logger(spdlog::stderr_color_mt("bess_mpc"));

  CLI::App app{"Receding-horizon dispatch of a substation battery"};
  app.require_subcommand(1);

  bool baseline = false;
  bool no_timing = false;
  bool print_config = false;
  std::string sweep_spec;
  std::string trace_path;
  std::string metrics_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--baseline", baseline, "Also write the storage-free trace (<trace>_baseline.csv)");
    sub->add_option("--sweep", sweep_spec, "Run one case per value: key=v1,v2,...");
    sub->add_option("--trace", trace_path, "Trace CSV path");
    sub->add_option("--metrics", metrics_path, "Metrics file path");
    sub->add_flag("--no-timing", no_timing, "Write solve_ms as 0 (byte-reproducible traces)");
    sub->add_flag("--print-config", print_config, "Print the effective configuration as YAML and exit");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a YAML configuration file");
  run->add_option("config", config_path, "Configuration file")->required();
  add_common(run);

  std::string preset_name;
  double amplitude = -1.0;
  int horizon = 0;
  double alpha = -1.0, beta = -1.0, gamma = -1.0;
  std::vector<std::string> sets;
  auto* pre = app.add_subcommand("preset", "Run a built-in scenario (testcase1, testcase2, testcase3)");
  pre->add_option("name", preset_name, "Preset name")->required();
  pre->add_option("--amplitude", amplitude, "Peak amplitude as a fraction of the base");
  pre->add_option("--horizon", horizon, "Horizon length in slots");
  pre->add_option("--alpha", alpha, "Generation-cost weight");
  pre->add_option("--beta", beta, "SoC-deviation weight");
  pre->add_option("--gamma", gamma, "Quadratic cost coefficient");
  pre->add_option("--set", sets, "Any config key: key=value (repeatable)");
  add_common(pre);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    bess::RunConfig cfg;
    if (*run) {
      cfg = bess::load_run_config(config_path);
    } else {
      std::map<std::string, std::string> ov;
      if (amplitude >= 0.0) ov["peak_amplitude"] = fmt::format("{}", amplitude);
      if (horizon > 0) ov["horizon_slots"] = std::to_string(horizon);
      if (alpha >= 0.0) ov["alpha"] = fmt::format("{}", alpha);
      if (beta >= 0.0) ov["beta"] = fmt::format("{}", beta);
      if (gamma >= 0.0) ov["gamma"] = fmt::format("{}", gamma);
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
          throw bess::Error(bess::ErrorCode::InvalidOverride, "--set expects key=value, got '" + s + "'");
        }
        ov[s.substr(0, eq)] = s.substr(eq + 1);
      }
      cfg = bess::preset(preset_name, ov);
    }
    if (baseline) cfg.baseline = true;
    if (no_timing) cfg.record_timing = false;
    if (!trace_path.empty()) cfg.trace_path = trace_path;
    if (!metrics_path.empty()) cfg.metrics_path = metrics_path;

    if (print_config) {
      std::cout << bess::to_yaml(cfg);
      return 0;
    }
    if (sweep_spec.empty()) {
      run_single(cfg);
    } else {
      run_sweep(cfg, parse_sweep(sweep_spec));
    }
  } catch (const bess::Error& e) {
    spdlog::error("{}", e.what());
    const bool usage = e.code() == bess::ErrorCode::UnknownPreset || e.code() == bess::ErrorCode::InvalidOverride;
    return usage ? kUsageError : kDomainError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kDomainError;
  }
  return 0;
}

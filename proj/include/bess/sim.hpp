#pragma once

#include "bess/horizon.hpp"
#include "bess/qp.hpp"
#include "bess/scenarios.hpp"

#include <span>
#include <vector>

namespace bess {

/// Realized demand and renewable profiles on a common slot grid.
struct Scenario {
  Profile load;
  Profile res;

  Eigen::Index size() const { return load.size(); }
  void validate() const;
};

/// Source of the forecast window handed to the controller at each slot.
class ForecastPolicy {
 public:
  virtual ~ForecastPolicy() = default;
  /// Forecast for slots [k, k + len) of the scenario.
  virtual HorizonForecast window(const Scenario& s, Eigen::Index k, Eigen::Index len) const = 0;
};

/// Forecasts equal the realized profiles.
class PerfectForesight final : public ForecastPolicy {
 public:
  HorizonForecast window(const Scenario& s, Eigen::Index k, Eigen::Index len) const override;
};

struct StepResult {
  double p_gen = 0.0;
  double p_sto = 0.0;
  ControlSchedule schedule;
  QpSolution solution;
  double objective = 0.0;  // horizon cost F, constant term included
};

/// One receding-horizon iteration: build, solve, extract. Throws
/// Error(Infeasible) naming the most violated constraint, or
/// Error(IterationLimit).
StepResult mpc_step(double x0, const HorizonForecast& window, const ControllerConfig& cfg,
                    const QpSettings& settings = {});

/// Storage integrator x' = x - theta * p_sto. Throws SocBoundViolation when
/// the result leaves [x_min, x_max] by more than 1e-9 MWh.
double apply_to_plant(double x, double p_sto, const ControllerConfig& cfg);

struct SimulationResult {
  std::vector<Eigen::Index> t;
  Vec time_h;
  Vec p_load;
  Vec p_res;
  Vec p_gen;
  Vec p_sto;
  Vec x;  // SoC at the end of each slot
  Vec solve_times;  // seconds per iteration (build + solve + extract)
  Vec objective_per_step;
  Vec kkt_residual;  // certified residual of each horizon solve
  double x_init = 0.0;
  double x_ref = 0.0;

  Eigen::Index size() const { return p_gen.size(); }
};

struct SimOptions {
  /// Slots to simulate; 0 simulates the whole scenario.
  Eigen::Index duration_slots = 0;
  QpSettings qp;
  /// Defaults to perfect foresight.
  const ForecastPolicy* forecast = nullptr;
};

/// Closed-loop run. Forecast windows shrink at the end of the scenario data.
/// The generator covers whatever net demand the storage does not, so the
/// per-slot balance holds exactly in the applied controls.
SimulationResult run_closed_loop(const Scenario& scenario, const ControllerConfig& cfg, double x_init,
                                 const SimOptions& opts = {});

struct Metrics {
  double peak_gen = 0.0;
  double peak_gen_baseline = 0.0;
  double peak_reduction_pct = 0.0;
  double max_ramp_gen = 0.0;
  double max_ramp_gen_baseline = 0.0;
  double rms_soc_dev = 0.0;
  double max_soc_dev = 0.0;
  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
  Eigen::Index slots = 0;
};

Metrics compute_metrics(const SimulationResult& r, const SimulationResult& baseline);

/// Largest one-slot |delta| of a series.
double max_abs_ramp(const Vec& v);

/// Independent closed-loop runs for parameter sweeps.
struct SweepCase {
  Scenario scenario;
  ControllerConfig cfg;
  double x_init = 0.0;
  SimOptions opts;
};

/// Reference implementation: runs cases one after another.
std::vector<SimulationResult> run_sweep_serial(std::span<const SweepCase> cases);

/// OpenMP across cases; each run stays sequential. Results match the serial
/// sweep except for solve_times. The first failing case (lowest index) is
/// rethrown after all cases finish.
std::vector<SimulationResult> run_sweep_parallel(std::span<const SweepCase> cases);

}  // namespace bess

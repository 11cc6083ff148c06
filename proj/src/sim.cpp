#include "bess/sim.hpp"

#include "bess/error.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace bess {

void Scenario::validate() const {
  load.validate();
  res.validate();
  if (load.size() != res.size() || std::abs(load.slot_hours - res.slot_hours) > 1e-12 ||
      std::abs(load.start_h - res.start_h) > 1e-9) {
    throw Error(ErrorCode::DimensionMismatch, "load and RES profiles must share one slot grid");
  }
}

HorizonForecast PerfectForesight::window(const Scenario& s, Eigen::Index k, Eigen::Index len) const {
  return {s.load.values.segment(k, len), s.res.values.segment(k, len)};
}

namespace {

// Names the constraint of a horizon QP that is most violated at u.
std::string most_violated(const QpProblem& qp, const Vec& u, Eigen::Index N, bool upper_rows) {
  std::string what = "none";
  double worst = 0.0;
  auto consider = [&](double v, std::string name) {
    if (v > worst) {
      worst = v;
      what = std::move(name);
    }
  };
  const Vec eq = qp.A_eq * u - qp.b_eq;
  for (Eigen::Index t = 0; t < N; ++t) consider(std::abs(eq[t]), "power balance in horizon slot " + std::to_string(t));
  const Vec in = qp.A_ineq * u - qp.b_ineq;
  for (Eigen::Index r = 0; r < in.size(); ++r) {
    const bool is_upper = upper_rows && r < N;
    consider(in[r], std::string(is_upper ? "SoC upper bound" : "SoC lower bound") + " in horizon slot " +
                        std::to_string(r % N));
  }
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const std::string var = j < N ? "P^g" : "P^s";
    consider(qp.u_min[j] - u[j], var + " lower bound in horizon slot " + std::to_string(j % N));
    consider(u[j] - qp.u_max[j], var + " upper bound in horizon slot " + std::to_string(j % N));
  }
  return what + " (violation " + std::to_string(worst) + ")";
}

}  // namespace

StepResult mpc_step(double x0, const HorizonForecast& window, const ControllerConfig& cfg,
                    const QpSettings& settings) {
  const HorizonQp hq = build_qp(x0, window, cfg);
  StepResult out;
  out.solution = solve_qp(hq.qp, settings);
  switch (out.solution.status) {
    case QpStatus::Optimal: break;
    case QpStatus::Infeasible:
      throw Error(ErrorCode::Infeasible,
                  most_violated(hq.qp, out.solution.u_star, cfg.n_slots, std::isfinite(cfg.x_max)));
    case QpStatus::IterationLimit:
      throw Error(ErrorCode::IterationLimit,
                  "solver stopped after " + std::to_string(out.solution.iterations) + " iterations");
  }
  out.schedule = extract_schedule(out.solution, x0, window, cfg, settings.tol);
  out.p_gen = out.schedule.p_gen[0];
  out.p_sto = out.schedule.p_sto[0];
  out.objective = out.solution.objective + hq.constant;
  return out;
}

double apply_to_plant(double x, double p_sto, const ControllerConfig& cfg) {
  const double next = x - cfg.theta_h * p_sto;
  if (next < cfg.x_min - 1e-9 || next > cfg.x_max + 1e-9) {
    throw Error(ErrorCode::SocBoundViolation, "SoC " + std::to_string(next) + " MWh outside [" +
                                                  std::to_string(cfg.x_min) + ", " + std::to_string(cfg.x_max) + "]");
  }
  return next;
}

SimulationResult run_closed_loop(const Scenario& scenario, const ControllerConfig& cfg, double x_init,
                                 const SimOptions& opts) {
  scenario.validate();
  cfg.validate();
  if (std::abs(scenario.load.slot_hours - cfg.theta_h) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "scenario slot length differs from controller sampling time");
  }
  if (!(cfg.x_min <= x_init && x_init <= cfg.x_max)) {
    throw Error(ErrorCode::InvalidState, "initial SoC outside bounds");
  }
  const Eigen::Index total = scenario.size();
  const Eigen::Index steps = opts.duration_slots > 0 ? opts.duration_slots : total;
  if (steps > total) throw Error(ErrorCode::InvalidArgument, "duration exceeds scenario data");

  const PerfectForesight perfect;
  const ForecastPolicy& policy = opts.forecast ? *opts.forecast : perfect;

  SimulationResult r;
  r.t.resize(static_cast<std::size_t>(steps));
  r.time_h.resize(steps);
  r.p_load.resize(steps);
  r.p_res.resize(steps);
  r.p_gen.resize(steps);
  r.p_sto.resize(steps);
  r.x.resize(steps);
  r.solve_times.resize(steps);
  r.objective_per_step.resize(steps);
  r.kkt_residual.resize(steps);
  r.x_init = x_init;
  r.x_ref = cfg.x_ref;

  double x = x_init;
  ControllerConfig window_cfg = cfg;
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Eigen::Index len = std::min<Eigen::Index>(cfg.n_slots, total - k);
    if (len != window_cfg.n_slots) window_cfg = cfg.truncated(static_cast<int>(len));

    const auto t_start = std::chrono::steady_clock::now();
    StepResult step;
    try {
      step = mpc_step(x, policy.window(scenario, k, len), window_cfg, opts.qp);
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(k) + ": " + e.detail());
    }
    const auto t_end = std::chrono::steady_clock::now();

    const double net = scenario.load.values[k] - scenario.res.values[k];
    r.t[static_cast<std::size_t>(k)] = k;
    r.time_h[k] = scenario.load.time_of(k);
    r.p_load[k] = scenario.load.values[k];
    r.p_res[k] = scenario.res.values[k];
    r.p_sto[k] = step.p_sto;
    r.p_gen[k] = net - step.p_sto;
    try {
      x = apply_to_plant(x, step.p_sto, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(k) + ": " + e.detail());
    }
    r.x[k] = x;
    r.solve_times[k] = std::chrono::duration<double>(t_end - t_start).count();
    r.objective_per_step[k] = step.objective;
    r.kkt_residual[k] = step.solution.kkt_residual;
  }
  return r;
}

double max_abs_ramp(const Vec& v) {
  double m = 0.0;
  for (Eigen::Index k = 1; k < v.size(); ++k) m = std::max(m, std::abs(v[k] - v[k - 1]));
  return m;
}

Metrics compute_metrics(const SimulationResult& r, const SimulationResult& baseline) {
  if (r.size() != baseline.size() || r.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "metrics need two runs of equal, nonzero length");
  }
  Metrics m;
  m.slots = r.size();
  m.peak_gen = r.p_gen.maxCoeff();
  m.peak_gen_baseline = baseline.p_gen.maxCoeff();
  m.peak_reduction_pct =
      m.peak_gen_baseline != 0.0 ? 100.0 * (m.peak_gen_baseline - m.peak_gen) / m.peak_gen_baseline : 0.0;
  m.max_ramp_gen = max_abs_ramp(r.p_gen);
  m.max_ramp_gen_baseline = max_abs_ramp(baseline.p_gen);
  const Vec dev = (r.x.array() - r.x_ref).matrix();
  m.rms_soc_dev = std::sqrt(dev.squaredNorm() / static_cast<double>(dev.size()));
  m.max_soc_dev = dev.cwiseAbs().maxCoeff();
  m.mean_solve_ms = 1e3 * r.solve_times.mean();
  m.max_solve_ms = 1e3 * r.solve_times.maxCoeff();
  return m;
}

}  // namespace bess

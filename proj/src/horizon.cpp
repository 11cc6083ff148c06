#include "bess/horizon.hpp"

#include "bess/error.hpp"

#include <cmath>
#include <string>

namespace bess {

ControllerConfig ControllerConfig::with_constant_weights(int n_slots, double alpha, double beta,
                                                         double gamma) {
  ControllerConfig cfg;
  cfg.n_slots = n_slots;
  cfg.alpha = Vec::Constant(n_slots, alpha);
  cfg.beta = Vec::Constant(n_slots, beta);
  cfg.gamma = Vec::Constant(n_slots, gamma);
  return cfg;
}

void ControllerConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(theta_h > 0.0) || !std::isfinite(theta_h)) bad("theta must be positive");
  if (n_slots < 1) bad("horizon must have at least one slot");
  if (alpha.size() != n_slots || beta.size() != n_slots || gamma.size() != n_slots) {
    throw Error(ErrorCode::DimensionMismatch, "weight vectors must have n_slots entries");
  }
  if ((alpha.array() < 0.0).any()) bad("alpha must be >= 0");
  if ((beta.array() < 0.0).any()) bad("beta must be >= 0");
  if ((gamma.array() <= 0.0).any()) bad("gamma must be > 0");
  if (!(pg_min <= pg_max)) bad("pg_min > pg_max");
  if (!(ps_min <= ps_max)) bad("ps_min > ps_max");
  if (!(x_min <= x_ref && x_ref <= x_max)) bad("x_ref must lie in [x_min, x_max]");
}

ControllerConfig ControllerConfig::truncated(int n) const {
  if (n < 1 || n > n_slots) throw Error(ErrorCode::InvalidArgument, "truncation length out of range");
  ControllerConfig c = *this;
  c.n_slots = n;
  c.alpha = alpha.head(n);
  c.beta = beta.head(n);
  c.gamma = gamma.head(n);
  return c;
}

ControllerConfig ControllerConfig::without_storage() const {
  ControllerConfig c = *this;
  c.ps_min = 0.0;
  c.ps_max = 0.0;
  return c;
}

Mat SocMap::gain() const {
  Mat G = Mat::Zero(n_slots, n_slots);
  G.triangularView<Eigen::Lower>().setConstant(-theta_h);
  return G;
}

Vec SocMap::apply(const Vec& p_sto) const {
  Vec x(p_sto.size());
  double soc = x0;
  for (Eigen::Index t = 0; t < p_sto.size(); ++t) {
    soc -= theta_h * p_sto[t];
    x[t] = soc;
  }
  return x;
}

SocMap condense_dynamics(double x0, const ControllerConfig& cfg) {
  return {x0, cfg.theta_h, cfg.n_slots};
}

HorizonQp build_qp(double x0, const HorizonForecast& fc, const ControllerConfig& cfg) {
  cfg.validate();
  const Eigen::Index N = cfg.n_slots;
  if (fc.p_load.size() != N || fc.p_res.size() != N) {
    throw Error(ErrorCode::DimensionMismatch, "forecast length " + std::to_string(fc.p_load.size()) + "/" +
                                                  std::to_string(fc.p_res.size()) + " != horizon " +
                                                  std::to_string(N));
  }
  if (!fc.p_load.allFinite() || !fc.p_res.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "forecast contains non-finite values");
  }
  if ((fc.p_res.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "negative RES forecast");
  // Same 1e-9 MWh round-off band the plant accepts.
  if (!(cfg.x_min - 1e-9 <= x0 && x0 <= cfg.x_max + 1e-9)) {
    throw Error(ErrorCode::InvalidState, "initial SoC " + std::to_string(x0) + " outside [" +
                                             std::to_string(cfg.x_min) + ", " + std::to_string(cfg.x_max) + "]");
  }

  const double th = cfg.theta_h;
  const double dev = x0 - cfg.x_ref;

  // Suffix sums B_k = sum_{t>=k} beta_t give the Gram matrix L' diag(beta) L.
  Vec suffix(N);
  double acc = 0.0;
  for (Eigen::Index k = N - 1; k >= 0; --k) {
    acc += cfg.beta[k];
    suffix[k] = acc;
  }

  HorizonQp out;
  auto& qp = out.qp;
  qp.H = Mat::Zero(2 * N, 2 * N);
  qp.f = Vec::Zero(2 * N);
  for (Eigen::Index t = 0; t < N; ++t) qp.H(t, t) = 2.0 * cfg.alpha[t] * cfg.gamma[t];
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) qp.H(N + i, N + j) = 2.0 * th * th * suffix[std::max(i, j)];
    qp.f[N + i] = -2.0 * dev * th * suffix[i];
  }
  out.constant = dev * dev * acc;

  qp.A_eq = Mat::Zero(N, 2 * N);
  for (Eigen::Index t = 0; t < N; ++t) {
    qp.A_eq(t, t) = 1.0;
    qp.A_eq(t, N + t) = 1.0;
  }
  qp.b_eq = fc.net_demand();

  const bool upper = std::isfinite(cfg.x_max);
  const bool lower = std::isfinite(cfg.x_min);
  const Eigen::Index rows = (upper ? N : 0) + (lower ? N : 0);
  qp.A_ineq = Mat::Zero(rows, 2 * N);
  qp.b_ineq = Vec(rows);
  Eigen::Index r = 0;
  if (upper) {
    // x0 - th*(Lp)_t <= x_max
    for (Eigen::Index t = 0; t < N; ++t, ++r) {
      qp.A_ineq.row(r).segment(N, t + 1).setConstant(-th);
      qp.b_ineq[r] = cfg.x_max - x0;
    }
  }
  if (lower) {
    // x0 - th*(Lp)_t >= x_min
    for (Eigen::Index t = 0; t < N; ++t, ++r) {
      qp.A_ineq.row(r).segment(N, t + 1).setConstant(th);
      qp.b_ineq[r] = x0 - cfg.x_min;
    }
  }

  qp.u_min.resize(2 * N);
  qp.u_max.resize(2 * N);
  qp.u_min.head(N).setConstant(cfg.pg_min);
  qp.u_max.head(N).setConstant(cfg.pg_max);
  qp.u_min.tail(N).setConstant(cfg.ps_min);
  qp.u_max.tail(N).setConstant(cfg.ps_max);
  return out;
}

double evaluate_objective(const ControlSchedule& sched, double x0, const ControllerConfig& cfg) {
  const Eigen::Index N = cfg.n_slots;
  if (sched.p_gen.size() != N || sched.p_sto.size() != N) {
    throw Error(ErrorCode::DimensionMismatch, "schedule length does not match horizon");
  }
  double F = 0.0;
  double x = x0;
  for (Eigen::Index t = 0; t < N; ++t) {
    x -= cfg.theta_h * sched.p_sto[t];
    const double pg = sched.p_gen[t];
    F += cfg.alpha[t] * cfg.gamma[t] * pg * pg + cfg.beta[t] * (x - cfg.x_ref) * (x - cfg.x_ref);
  }
  return F;
}

ControlSchedule extract_schedule(const QpSolution& sol, double x0, const HorizonForecast& fc,
                                 const ControllerConfig& cfg, double balance_tol) {
  if (sol.status != QpStatus::Optimal) {
    throw Error(ErrorCode::NotOptimal, std::string("solver status ") + std::string(to_string(sol.status)));
  }
  const Eigen::Index N = cfg.n_slots;
  if (sol.u_star.size() != 2 * N || fc.p_load.size() != N || fc.p_res.size() != N) {
    throw Error(ErrorCode::DimensionMismatch, "solution length does not match horizon");
  }
  ControlSchedule s;
  s.p_gen = sol.u_star.head(N);
  s.p_sto = sol.u_star.tail(N);
  s.x_traj = condense_dynamics(x0, cfg).apply(s.p_sto);
  const double imbalance = (s.p_gen + s.p_sto - fc.net_demand()).cwiseAbs().maxCoeff();
  if (imbalance > balance_tol) {
    throw Error(ErrorCode::InvalidState, "power balance violated by " + std::to_string(imbalance) + " MW");
  }
  return s;
}

}  // namespace bess

#pragma once

#include "bess/qp.hpp"

namespace bess {

/// Weights, bounds and timing of the dispatch problem over one horizon.
///
/// Units: theta_h in hours, powers in MW, state of charge in MWh. Positive
/// storage power means discharge into the bus.
struct ControllerConfig {
  double theta_h = 5.0 / 60.0;
  int n_slots = 24;
  Vec alpha = Vec::Ones(24);       // generation-cost weight per slot
  Vec beta = Vec::Constant(24, 5.0);  // SoC-deviation weight per slot
  Vec gamma = Vec::Ones(24);       // quadratic generation cost coefficient per slot
  double x_ref = 6.0;
  double pg_min = -1e6;
  double pg_max = 1e6;
  double ps_min = -6.0;
  double ps_max = 6.0;
  double x_min = 0.0;
  double x_max = 12.0;

  static ControllerConfig with_constant_weights(int n_slots, double alpha, double beta, double gamma);

  void validate() const;

  /// First n slots of this configuration (shrinking horizon).
  ControllerConfig truncated(int n) const;

  /// Same limits and weights, but the storage can neither charge nor discharge.
  ControllerConfig without_storage() const;
};

struct HorizonForecast {
  Vec p_load;
  Vec p_res;

  Vec net_demand() const { return p_load - p_res; }
};

struct ControlSchedule {
  Vec p_gen;
  Vec p_sto;
  Vec x_traj;
};

/// Affine map p_sto -> x_traj with x(t) = x0 - theta * sum_{k<=t} p_sto(k).
struct SocMap {
  double x0 = 0.0;
  double theta_h = 0.0;
  int n_slots = 0;

  /// Constant part x0 * 1.
  Vec offset() const { return Vec::Constant(n_slots, x0); }
  /// Linear part -theta * L, L lower-triangular ones.
  Mat gain() const;
  /// Evaluates the map by forward recurrence.
  Vec apply(const Vec& p_sto) const;
};

SocMap condense_dynamics(double x0, const ControllerConfig& cfg);

/// Standard-form program for one horizon plus the objective constant that the
/// quadratic form omits: F(u) = qp.objective(u) + constant.
///
/// Variable layout is u = (P^g(1..N), P^s(1..N)). SoC bounds become 2N
/// inequality rows (upper bound rows first); rows whose bound is infinite are
/// left out.
struct HorizonQp {
  QpProblem qp;
  double constant = 0.0;
};

HorizonQp build_qp(double x0, const HorizonForecast& fc, const ControllerConfig& cfg);

/// Sum over the horizon of alpha*gamma*P^g^2 + beta*(x - x_ref)^2.
double evaluate_objective(const ControlSchedule& sched, double x0, const ControllerConfig& cfg);

/// Splits u* into generator and storage setpoints and rebuilds the SoC
/// trajectory. Throws NotOptimal unless sol is optimal, InvalidState if the
/// per-slot power balance is off by more than balance_tol.
ControlSchedule extract_schedule(const QpSolution& sol, double x0, const HorizonForecast& fc,
                                 const ControllerConfig& cfg, double balance_tol = 1e-6);

}  // namespace bess

#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string_view>

namespace bess {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * Dense strictly convex quadratic program
 *
 *   minimize    1/2 u'Hu + f'u
 *   subject to  A_eq u  = b_eq
 *               A_ineq u <= b_ineq
 *               u_min <= u <= u_max
 *
 * Box entries may be +-infinity. H must be symmetric positive definite.
 */
struct QpProblem {
  Mat H;
  Vec f;
  Mat A_eq;
  Vec b_eq;
  Mat A_ineq;
  Vec b_ineq;
  Vec u_min;
  Vec u_max;

  Eigen::Index num_vars() const { return f.size(); }
  Eigen::Index num_eq() const { return b_eq.size(); }
  Eigen::Index num_ineq() const { return b_ineq.size(); }

  /// Problem with n variables, no constraints and an infinite box.
  static QpProblem unconstrained(Mat H, Vec f);

  /// Throws Error(DimensionMismatch / InvalidArgument) when the shape or box invariants fail.
  void validate() const;

  double objective(const Vec& u) const { return 0.5 * u.dot(H * u) + f.dot(u); }
};

/// Lagrange multipliers with the convention
///   Hu + f + A_eq' eq + A_ineq' ineq - lower + upper = 0,
/// ineq, lower, upper >= 0.
struct Multipliers {
  Vec eq;
  Vec ineq;
  Vec lower;
  Vec upper;

  static Multipliers zeros(const QpProblem& p);
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

std::string_view to_string(QpStatus s);

struct QpSolution {
  Vec u_star;
  double objective = 0.0;
  double kkt_residual = kInf;
  QpStatus status = QpStatus::IterationLimit;
  Multipliers multipliers;
  int iterations = 0;
};

struct QpSettings {
  double tol = 1e-6;
  /// 0 selects 10 * (n + m_ineq + number of finite box sides).
  int max_iter = 0;
};

/// Primal active-set solver with an elastic phase-1. Deterministic and
/// free of shared state.
QpSolution solve_qp(const QpProblem& p, const QpSettings& settings = {});

/// Infinity norm of stationarity, primal feasibility, complementarity and
/// multiplier-sign violations.
double kkt_residual(const QpProblem& p, const Vec& u, const Multipliers& m);

/// Largest violation of the equality, inequality and box constraints at u.
double max_constraint_violation(const QpProblem& p, const Vec& u);

}  // namespace bess

#include "bess/qp.hpp"

#include "bess/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace bess {

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

QpProblem QpProblem::unconstrained(Mat H, Vec f) {
  const auto n = f.size();
  QpProblem p;
  p.H = std::move(H);
  p.f = std::move(f);
  p.A_eq = Mat(0, n);
  p.b_eq = Vec(0);
  p.A_ineq = Mat(0, n);
  p.b_ineq = Vec(0);
  p.u_min = Vec::Constant(n, -kInf);
  p.u_max = Vec::Constant(n, kInf);
  return p;
}

void QpProblem::validate() const {
  const auto n = f.size();
  auto mismatch = [](const std::string& what) { throw Error(ErrorCode::DimensionMismatch, what); };
  if (H.rows() != n || H.cols() != n) mismatch("H must be n x n");
  if (A_eq.cols() != n || A_eq.rows() != b_eq.size()) mismatch("A_eq/b_eq shape");
  if (A_ineq.cols() != n || A_ineq.rows() != b_ineq.size()) mismatch("A_ineq/b_ineq shape");
  if (u_min.size() != n || u_max.size() != n) mismatch("box length");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(u_min[j]) || std::isnan(u_max[j]) || u_min[j] > u_max[j]) {
      throw Error(ErrorCode::InvalidArgument, "u_min > u_max at index " + std::to_string(j));
    }
  }
  if (!H.allFinite() || !f.allFinite() || !A_eq.allFinite() || !b_eq.allFinite() ||
      !A_ineq.allFinite() || !b_ineq.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite problem data");
  }
  const double hnorm = H.cwiseAbs().maxCoeff();
  if (n > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + hnorm)) {
    throw Error(ErrorCode::InvalidArgument, "H is not symmetric");
  }
}

Multipliers Multipliers::zeros(const QpProblem& p) {
  return {Vec::Zero(p.num_eq()), Vec::Zero(p.num_ineq()), Vec::Zero(p.num_vars()),
          Vec::Zero(p.num_vars())};
}

double max_constraint_violation(const QpProblem& p, const Vec& u) {
  double v = 0.0;
  if (p.num_eq() > 0) v = std::max(v, (p.A_eq * u - p.b_eq).cwiseAbs().maxCoeff());
  if (p.num_ineq() > 0) v = std::max(v, (p.A_ineq * u - p.b_ineq).maxCoeff());
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    v = std::max({v, p.u_min[j] - u[j], u[j] - p.u_max[j]});
  }
  return v;
}

double kkt_residual(const QpProblem& p, const Vec& u, const Multipliers& m) {
  const auto n = p.num_vars();
  Vec grad = p.H * u + p.f - m.lower + m.upper;
  if (p.num_eq() > 0) grad += p.A_eq.transpose() * m.eq;
  if (p.num_ineq() > 0) grad += p.A_ineq.transpose() * m.ineq;
  double r = n > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;

  r = std::max(r, max_constraint_violation(p, u));

  for (Eigen::Index i = 0; i < p.num_ineq(); ++i) {
    const double slack = p.A_ineq.row(i).dot(u) - p.b_ineq[i];
    r = std::max({r, std::abs(m.ineq[i] * slack), -m.ineq[i]});
  }
  auto side = [&r](double mult, double bound, double x) {
    r = std::max(r, -mult);
    if (std::isfinite(bound)) {
      r = std::max(r, std::abs(mult * (x - bound)));
    } else {
      r = std::max(r, std::abs(mult));
    }
  };
  for (Eigen::Index j = 0; j < n; ++j) {
    side(m.lower[j], p.u_min[j], u[j]);
    side(m.upper[j], p.u_max[j], u[j]);
  }
  return r;
}

namespace {

enum class BoundState : std::uint8_t { Free, Lower, Upper, Fixed };

struct WorkingSet {
  std::vector<Eigen::Index> ineq;  // inequality rows held at equality
  std::vector<BoundState> bound;   // per variable
};

struct CoreResult {
  Vec u;
  Multipliers m;
  WorkingSet ws;
  int iterations = 0;
  bool converged = false;
};

// Greedy Gram-Schmidt selection of linearly independent equality rows.
std::vector<Eigen::Index> independent_rows(const Mat& A) {
  std::vector<Eigen::Index> keep;
  std::vector<Vec> basis;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    Vec r = A.row(i).transpose();
    const double norm0 = r.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) r -= q.dot(r) * q;
    }
    if (r.norm() > 1e-10 * norm0) {
      basis.push_back(r / r.norm());
      keep.push_back(i);
    }
  }
  return keep;
}

int default_iteration_cap(const QpProblem& p) {
  int sides = 0;
  for (Eigen::Index j = 0; j < p.num_vars(); ++j) {
    sides += std::isfinite(p.u_min[j]) ? 1 : 0;
    sides += std::isfinite(p.u_max[j]) ? 1 : 0;
  }
  return 10 * static_cast<int>(p.num_vars() + p.num_ineq() + sides);
}

/**
 * Primal active-set iteration from a feasible point.
 *
 * The working set always contains every row listed in eq_rows. Variables
 * held at a bound are removed from the equality-constrained subproblem, which
 * is solved on the free variables through the Schur complement
 * A_F H_FF^{-1} A_F'.
 */
CoreResult primal_active_set(const QpProblem& p, const std::vector<Eigen::Index>& eq_rows, Vec u,
                             WorkingSet ws, int max_iter, double tol) {
  const auto n = p.num_vars();
  const auto m_eq = static_cast<Eigen::Index>(eq_rows.size());
  const double drop_tol = 1e-3 * tol;

  std::vector<char> in_ws(static_cast<std::size_t>(p.num_ineq()), 0);
  for (auto i : ws.ineq) in_ws[static_cast<std::size_t>(i)] = 1;

  CoreResult out;
  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    free_idx.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (ws.bound[static_cast<std::size_t>(j)] == BoundState::Free) free_idx.push_back(j);
    }
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    const auto mw = m_eq + static_cast<Eigen::Index>(ws.ineq.size());

    Mat Aw(mw, n);
    for (Eigen::Index r = 0; r < m_eq; ++r) Aw.row(r) = p.A_eq.row(eq_rows[static_cast<std::size_t>(r)]);
    for (std::size_t k = 0; k < ws.ineq.size(); ++k) {
      Aw.row(m_eq + static_cast<Eigen::Index>(k)) = p.A_ineq.row(ws.ineq[k]);
    }

    const Vec g = p.H * u + p.f;
    Vec step = Vec::Zero(n);
    Vec lambda = Vec::Zero(mw);
    double hp = 0.0;

    if (nf > 0) {
      Mat Hff(nf, nf);
      Mat AwF(mw, nf);
      Vec gF(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gF[a] = g[free_idx[static_cast<std::size_t>(a)]];
        AwF.col(a) = Aw.col(free_idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < nf; ++b) {
          Hff(a, b) = p.H(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
        }
      }
      const Eigen::LLT<Mat> llt(Hff);
      Vec pF = -llt.solve(gF);
      if (mw > 0) {
        const Mat Y = llt.solve(AwF.transpose());
        const Mat S = AwF * Y;
        lambda = S.ldlt().solve(AwF * pF);
        pF -= Y * lambda;
      }
      for (Eigen::Index a = 0; a < nf; ++a) step[free_idx[static_cast<std::size_t>(a)]] = pF[a];
      hp = (Hff * pF).cwiseAbs().maxCoeff();
    }

    // H p equals minus the projected gradient, so a small H p certifies
    // stationarity on the current working set.
    const double unorm = n > 0 ? u.cwiseAbs().maxCoeff() : 0.0;
    const double pnorm = n > 0 ? step.cwiseAbs().maxCoeff() : 0.0;
    const bool stationary = pnorm <= 1e-12 * (1.0 + unorm) || hp <= 1e-2 * tol;

    if (stationary) {
      const Vec r = g + (mw > 0 ? Vec(Aw.transpose() * lambda) : Vec::Zero(n));
      // Most negative multiplier among droppable constraints.
      double worst = -drop_tol;
      Eigen::Index drop_ineq = -1;
      Eigen::Index drop_bound = -1;
      for (std::size_t k = 0; k < ws.ineq.size(); ++k) {
        const double mu = lambda[m_eq + static_cast<Eigen::Index>(k)];
        if (mu < worst) {
          worst = mu;
          drop_ineq = static_cast<Eigen::Index>(k);
        }
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto st = ws.bound[static_cast<std::size_t>(j)];
        const double z = st == BoundState::Lower ? r[j] : st == BoundState::Upper ? -r[j] : 0.0;
        if (z < worst) {
          worst = z;
          drop_bound = j;
          drop_ineq = -1;
        }
      }
      if (drop_ineq < 0 && drop_bound < 0) {
        out.converged = true;
        out.m = Multipliers::zeros(p);
        for (Eigen::Index k = 0; k < m_eq; ++k) out.m.eq[eq_rows[static_cast<std::size_t>(k)]] = lambda[k];
        for (std::size_t k = 0; k < ws.ineq.size(); ++k) {
          out.m.ineq[ws.ineq[k]] = std::max(0.0, lambda[m_eq + static_cast<Eigen::Index>(k)]);
        }
        for (Eigen::Index j = 0; j < n; ++j) {
          switch (ws.bound[static_cast<std::size_t>(j)]) {
            case BoundState::Lower: out.m.lower[j] = std::max(0.0, r[j]); break;
            case BoundState::Upper: out.m.upper[j] = std::max(0.0, -r[j]); break;
            case BoundState::Fixed:
              out.m.lower[j] = std::max(0.0, r[j]);
              out.m.upper[j] = std::max(0.0, -r[j]);
              break;
            case BoundState::Free: break;
          }
        }
        break;
      }
      if (drop_ineq >= 0) {
        in_ws[static_cast<std::size_t>(ws.ineq[static_cast<std::size_t>(drop_ineq)])] = 0;
        ws.ineq.erase(ws.ineq.begin() + drop_ineq);
      } else {
        ws.bound[static_cast<std::size_t>(drop_bound)] = BoundState::Free;
      }
      continue;
    }

    // Ratio test; ties resolve to the lowest index, inequality rows first.
    double alpha = 1.0;
    Eigen::Index block_ineq = -1;
    Eigen::Index block_var = -1;
    BoundState block_side = BoundState::Free;
    for (Eigen::Index i = 0; i < p.num_ineq(); ++i) {
      if (in_ws[static_cast<std::size_t>(i)]) continue;
      const auto row = p.A_ineq.row(i);
      const double ap = row.dot(step);
      if (ap <= 1e-12 * row.norm() * step.norm()) continue;
      const double t = std::max(0.0, p.b_ineq[i] - row.dot(u)) / ap;
      if (t < alpha) {
        alpha = t;
        block_ineq = i;
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (ws.bound[static_cast<std::size_t>(j)] != BoundState::Free) continue;
      const double s = step[j];
      if (s < 0.0 && std::isfinite(p.u_min[j])) {
        const double t = std::max(0.0, u[j] - p.u_min[j]) / -s;
        if (t < alpha) {
          alpha = t;
          block_ineq = -1;
          block_var = j;
          block_side = BoundState::Lower;
        }
      } else if (s > 0.0 && std::isfinite(p.u_max[j])) {
        const double t = std::max(0.0, p.u_max[j] - u[j]) / s;
        if (t < alpha) {
          alpha = t;
          block_ineq = -1;
          block_var = j;
          block_side = BoundState::Upper;
        }
      }
    }

    u += alpha * step;
    if (block_ineq >= 0) {
      ws.ineq.push_back(block_ineq);
      in_ws[static_cast<std::size_t>(block_ineq)] = 1;
    } else if (block_var >= 0) {
      ws.bound[static_cast<std::size_t>(block_var)] = block_side;
      u[block_var] = block_side == BoundState::Lower ? p.u_min[block_var] : p.u_max[block_var];
    }
  }

  out.u = std::move(u);
  out.ws = std::move(ws);
  return out;
}

WorkingSet initial_bounds(const QpProblem& p) {
  WorkingSet ws;
  ws.bound.assign(static_cast<std::size_t>(p.num_vars()), BoundState::Free);
  for (Eigen::Index j = 0; j < p.num_vars(); ++j) {
    if (p.u_min[j] == p.u_max[j]) ws.bound[static_cast<std::size_t>(j)] = BoundState::Fixed;
  }
  return ws;
}

struct PhaseOne {
  QpProblem problem;
  Vec start;
  Eigen::Index n_orig = 0;
};

// Elastic feasibility problem: every equality row gets a signed slack and
// every inequality row violated at u0 gets a relaxing slack. Minimizes the
// total slack plus a tiny proximal term that keeps the Hessian definite.
PhaseOne build_phase_one(const QpProblem& p, const Vec& u0) {
  constexpr double kProx = 1e-9;
  const auto n = p.num_vars();
  const auto m_eq = p.num_eq();
  const Vec r_eq = p.b_eq - p.A_eq * u0;
  const Vec v_in = p.A_ineq * u0 - p.b_ineq;
  std::vector<Eigen::Index> violated;
  for (Eigen::Index i = 0; i < p.num_ineq(); ++i) {
    if (v_in[i] > 0.0) violated.push_back(i);
  }
  const auto n_in = static_cast<Eigen::Index>(violated.size());
  const auto nz = n + m_eq + n_in;

  PhaseOne ph;
  ph.n_orig = n;
  auto& q = ph.problem;
  q.H = kProx * Mat::Identity(nz, nz);
  q.f = Vec::Ones(nz);
  q.f.head(n) = -kProx * u0;
  q.A_eq = Mat::Zero(m_eq, nz);
  q.A_eq.leftCols(n) = p.A_eq;
  for (Eigen::Index i = 0; i < m_eq; ++i) q.A_eq(i, n + i) = r_eq[i] >= 0.0 ? 1.0 : -1.0;
  q.b_eq = p.b_eq;
  q.A_ineq = Mat::Zero(p.num_ineq(), nz);
  q.A_ineq.leftCols(n) = p.A_ineq;
  for (Eigen::Index k = 0; k < n_in; ++k) q.A_ineq(violated[static_cast<std::size_t>(k)], n + m_eq + k) = -1.0;
  q.b_ineq = p.b_ineq;
  q.u_min = Vec::Zero(nz);
  q.u_max = Vec::Constant(nz, kInf);
  q.u_min.head(n) = p.u_min;
  q.u_max.head(n) = p.u_max;

  ph.start.resize(nz);
  ph.start.head(n) = u0;
  ph.start.segment(n, m_eq) = r_eq.cwiseAbs();
  for (Eigen::Index k = 0; k < n_in; ++k) ph.start[n + m_eq + k] = v_in[violated[static_cast<std::size_t>(k)]];
  return ph;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const QpSettings& settings) {
  p.validate();
  if (!(settings.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  const auto n = p.num_vars();
  // A Hessian that is only definite on the equality null space is made
  // definite by adding rho*|A_eq u - b_eq|^2, which vanishes on the feasible set.
  QpProblem convexified;
  const QpProblem* work = &p;
  if (n > 0 && Eigen::LLT<Mat>(p.H).info() != Eigen::Success) {
    bool ok = false;
    if (p.num_eq() > 0) {
      const double rho = 1.0 + p.H.cwiseAbs().maxCoeff();
      convexified = p;
      convexified.H += 2.0 * rho * p.A_eq.transpose() * p.A_eq;
      convexified.f -= 2.0 * rho * p.A_eq.transpose() * p.b_eq;
      ok = Eigen::LLT<Mat>(convexified.H).info() == Eigen::Success;
      work = &convexified;
    }
    if (!ok) throw Error(ErrorCode::InvalidArgument, "H is not positive definite on the feasible directions");
  }
  const double tol = settings.tol;

  QpSolution sol;
  sol.multipliers = Multipliers::zeros(p);

  Vec u0(n);
  for (Eigen::Index j = 0; j < n; ++j) u0[j] = std::clamp(0.0, p.u_min[j], p.u_max[j]);

  const auto eq_rows = independent_rows(p.A_eq);
  WorkingSet ws = initial_bounds(*work);
  Vec start = u0;
  int iterations = 0;

  const bool origin_feasible =
      (p.num_eq() == 0 || (p.A_eq * u0 - p.b_eq).cwiseAbs().maxCoeff() == 0.0) &&
      (p.num_ineq() == 0 || (p.A_ineq * u0 - p.b_ineq).maxCoeff() <= 0.0);

  if (!origin_feasible) {
    const PhaseOne ph = build_phase_one(*work, u0);
    std::vector<Eigen::Index> all_eq(static_cast<std::size_t>(p.num_eq()));
    for (Eigen::Index i = 0; i < p.num_eq(); ++i) all_eq[static_cast<std::size_t>(i)] = i;
    const int cap1 = settings.max_iter > 0 ? settings.max_iter : default_iteration_cap(ph.problem);
    const CoreResult r1 =
        primal_active_set(ph.problem, all_eq, ph.start, initial_bounds(ph.problem), cap1, tol);
    iterations += r1.iterations;
    start = r1.u.head(n);
    for (Eigen::Index j = 0; j < n; ++j) start[j] = std::clamp(start[j], p.u_min[j], p.u_max[j]);

    if (max_constraint_violation(p, start) > tol) {
      sol.u_star = start;
      sol.objective = p.objective(start);
      sol.status = r1.converged ? QpStatus::Infeasible : QpStatus::IterationLimit;
      sol.iterations = iterations;
      return sol;
    }
    // Carry over the phase-one working set when every slack ended at its bound;
    // the remaining rows are then independent in the original variables.
    bool slacks_held = true;
    for (auto j = n; j < ph.problem.num_vars(); ++j) {
      slacks_held = slacks_held && r1.ws.bound[static_cast<std::size_t>(j)] == BoundState::Lower;
    }
    if (r1.converged && slacks_held && eq_rows.size() == static_cast<std::size_t>(p.num_eq())) {
      ws.ineq = r1.ws.ineq;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (ws.bound[static_cast<std::size_t>(j)] != BoundState::Fixed) {
          ws.bound[static_cast<std::size_t>(j)] = r1.ws.bound[static_cast<std::size_t>(j)];
        }
      }
    }
  }

  const int cap2 = settings.max_iter > 0 ? settings.max_iter : default_iteration_cap(*work);
  CoreResult r2 = primal_active_set(*work, eq_rows, start, std::move(ws), cap2, tol);
  iterations += r2.iterations;

  sol.u_star = std::move(r2.u);
  sol.objective = p.objective(sol.u_star);
  sol.iterations = iterations;
  if (!r2.converged) {
    sol.status = QpStatus::IterationLimit;
    return sol;
  }
  sol.multipliers = std::move(r2.m);
  sol.kkt_residual = kkt_residual(p, sol.u_star, sol.multipliers);
  sol.status = sol.kkt_residual <= tol ? QpStatus::Optimal : QpStatus::IterationLimit;
  return sol;
}

}  // namespace bess

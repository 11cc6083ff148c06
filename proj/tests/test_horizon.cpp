#include "bess/error.hpp"
#include "bess/horizon.hpp"
#include "oracle/qp_oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace bess;
using bess::testing::solve_qp_oracle;

namespace {

constexpr double kTheta = 1.0 / 12.0;

ControllerConfig default_cfg(int n) { return ControllerConfig::with_constant_weights(n, 1.0, 5.0, 1.0); }

HorizonForecast flat(int n, double load, double res = 0.0) {
  return {Vec::Constant(n, load), Vec::Constant(n, res)};
}

ControlSchedule solve_schedule(double x0, const HorizonForecast& fc, const ControllerConfig& cfg) {
  const auto hq = build_qp(x0, fc, cfg);
  return extract_schedule(solve_qp(hq.qp), x0, fc, cfg);
}

}  // namespace

TEST_SUITE("horizon") {

TEST_CASE("condensed dynamics") {
  auto cfg = default_cfg(2);
  auto map = condense_dynamics(6.0, cfg);
  CHECK(map.apply(Vec::Zero(2)) == Vec::Constant(2, 6.0));
  const Vec x = map.apply(Vec::Constant(2, 6.0));
  CHECK(x[0] == doctest::Approx(5.5));
  CHECK(x[1] == doctest::Approx(5.0));

  cfg = default_cfg(3);
  map = condense_dynamics(0.0, cfg);
  const Vec y = map.apply(Vec::Constant(3, -6.0));
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(1.0));
  CHECK(y[2] == doctest::Approx(1.5));

  // Matrix form agrees with the recurrence.
  const Vec p = Vec(Eigen::Vector3d(1.0, -2.0, 4.0));
  CHECK(((map.offset() + map.gain() * p) - map.apply(p)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("one-slot program") {
  const auto hq = build_qp(6.0, flat(1, 50.0), default_cfg(1));
  CHECK(hq.qp.H(0, 0) == doctest::Approx(2.0));
  CHECK(hq.qp.H(1, 1) == doctest::Approx(2.0 * 5.0 / 144.0));
  CHECK(hq.qp.H(0, 1) == 0.0);
  CHECK(hq.qp.f.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(hq.qp.num_eq() == 1);
  CHECK(hq.qp.A_eq(0, 0) == 1.0);
  CHECK(hq.qp.A_eq(0, 1) == 1.0);
  CHECK(hq.qp.b_eq[0] == 50.0);
  CHECK(hq.constant == 0.0);

  // Quadratic form reproduces F = pg^2 + 5 (theta ps)^2 at arbitrary points.
  for (const auto& [pg, ps] : {std::pair{3.0, -2.0}, std::pair{44.0, 6.0}, std::pair{-7.5, 0.25}}) {
    const Vec u = Vec(Eigen::Vector2d(pg, ps));
    const double by_hand = pg * pg + 5.0 * (kTheta * ps) * (kTheta * ps);
    CHECK(hq.qp.objective(u) == doctest::Approx(by_hand).epsilon(1e-12));
  }
}

TEST_CASE("default horizon dimensions") {
  const auto hq = build_qp(0.0, flat(24, 50.0), default_cfg(24));
  CHECK(hq.qp.num_vars() == 48);
  CHECK(hq.qp.num_eq() == 24);
  CHECK(hq.qp.num_ineq() == 48);
}

TEST_CASE("no SoC weight and open SoC bounds decouple the slots") {
  auto cfg = default_cfg(6);
  cfg.beta.setZero();
  cfg.x_min = -kInf;
  cfg.x_max = kInf;
  const Vec load = (Vec(6) << 3.0, -2.0, 10.0, 0.5, -9.0, 5.9).finished();
  const HorizonForecast fc{load, Vec::Zero(6)};
  const auto hq = build_qp(0.0, fc, cfg);
  CHECK(hq.qp.num_ineq() == 0);
  Mat off = hq.qp.H;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() == 0.0);

  const auto s = extract_schedule(solve_qp(hq.qp), 0.0, fc, cfg);
  for (int t = 0; t < 6; ++t) {
    // Per slot: min (d - ps)^2 over ps in [-6, 6].
    CHECK(s.p_sto[t] == doctest::Approx(std::clamp(load[t], -6.0, 6.0)));
  }
}

TEST_CASE("objective evaluation") {
  const auto cfg2 = default_cfg(2);
  CHECK(evaluate_objective({Vec::Zero(2), Vec::Zero(2), {}}, 6.0, cfg2) == 0.0);
  CHECK(evaluate_objective({Vec::Constant(2, 50.0), Vec::Zero(2), {}}, 6.0, cfg2) == doctest::Approx(5000.0));

  const double x1 = 6.0 - kTheta * 6.0;
  const double independent = 44.0 * 44.0 + 5.0 * (x1 - 6.0) * (x1 - 6.0);
  CHECK(independent == doctest::Approx(1937.25));
  const double F = evaluate_objective({Vec::Constant(1, 44.0), Vec::Constant(1, 6.0), {}}, 6.0, default_cfg(1));
  CHECK(F == doctest::Approx(1937.25).epsilon(1e-12));
}

TEST_CASE("quadratic form plus constant equals F") {
  std::mt19937 rng(42);
  std::normal_distribution<double> g(0.0, 10.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 24;
    auto cfg = default_cfg(n);
    for (int t = 0; t < n; ++t) {
      cfg.alpha[t] = 0.2 + 2.0 * u01(rng);
      cfg.beta[t] = 10.0 * u01(rng);
      cfg.gamma[t] = 0.5 + u01(rng);
    }
    const double x0 = 12.0 * u01(rng);
    ControlSchedule s{Vec(n), Vec(n), {}};
    for (int t = 0; t < n; ++t) {
      s.p_gen[t] = g(rng);
      s.p_sto[t] = g(rng);
    }
    const auto hq = build_qp(x0, {s.p_gen + s.p_sto, Vec::Zero(n)}, cfg);
    Vec u(2 * n);
    u << s.p_gen, s.p_sto;
    const double F = evaluate_objective(s, x0, cfg);
    CHECK(hq.qp.objective(u) + hq.constant == doctest::Approx(F).epsilon(1e-9));
  }
}

TEST_CASE("schedule extraction") {
  const auto cfg1 = default_cfg(1);
  const auto fc1 = flat(1, 50.0);
  const auto s = solve_schedule(6.0, fc1, cfg1);
  CHECK(s.p_gen[0] == doctest::Approx(44.0));
  CHECK(s.p_sto[0] == doctest::Approx(6.0));
  CHECK(s.x_traj[0] == doctest::Approx(5.5));

  const auto zero = solve_schedule(6.0, flat(5, 0.0), default_cfg(5));
  CHECK(zero.p_gen.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(zero.p_sto.cwiseAbs().maxCoeff() <= 1e-9);

  // Above the reference with no demand: discharge in both slots.
  const auto cfg2 = default_cfg(2);
  const auto fc2 = flat(2, 0.0);
  const auto hq = build_qp(7.0, fc2, cfg2);
  const auto ref = solve_qp_oracle(hq.qp);
  REQUIRE(ref.status == QpStatus::Optimal);
  CHECK(ref.u_star[2] > 0.0);
  CHECK(ref.u_star[3] > 0.0);
  const auto s2 = extract_schedule(solve_qp(hq.qp), 7.0, fc2, cfg2);
  CHECK(s2.p_sto[0] > 0.0);
  CHECK(s2.p_sto[1] > 0.0);
  CHECK((s2.p_sto - ref.u_star.tail(2)).cwiseAbs().maxCoeff() <= 1e-6);

  QpSolution bad;
  bad.status = QpStatus::Infeasible;
  try {
    (void)extract_schedule(bad, 6.0, fc1, cfg1);
    FAIL("expected NotOptimal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOptimal);
  }
}

TEST_CASE("balance holds on solved horizons") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> load(20.0, 80.0);
  std::uniform_real_distribution<double> res(0.0, 15.0);
  std::uniform_real_distribution<double> soc(0.0, 12.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 24;
    HorizonForecast fc{Vec(n), Vec(n)};
    for (int t = 0; t < n; ++t) {
      fc.p_load[t] = load(rng);
      fc.p_res[t] = res(rng);
    }
    const double x0 = soc(rng);
    const auto s = solve_schedule(x0, fc, default_cfg(n));
    CHECK((s.p_gen + s.p_sto - fc.net_demand()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(s.x_traj.minCoeff() >= -1e-9);
    CHECK(s.x_traj.maxCoeff() <= 12.0 + 1e-9);
  }
}

TEST_CASE("reference with zero net demand is a fixed point") {
  for (int n : {1, 2, 7, 24}) {
    const auto s = solve_schedule(6.0, flat(n, 10.0, 10.0), default_cfg(n));
    CHECK(s.p_gen.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(s.p_sto.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("scaling alpha and beta together leaves the argmin unchanged") {
  HorizonForecast fc{Vec(24), Vec::Zero(24)};
  for (int t = 0; t < 24; ++t) fc.p_load[t] = 50.0 + 10.0 * std::sin(0.3 * t);
  const auto base = solve_schedule(3.0, fc, default_cfg(24));
  for (double c : {0.1, 3.0, 40.0}) {
    auto cfg = default_cfg(24);
    cfg.alpha *= c;
    cfg.beta *= c;
    const auto scaled = solve_schedule(3.0, fc, cfg);
    CHECK((scaled.p_sto - base.p_sto).cwiseAbs().maxCoeff() <= 1e-6);
  }
  // gamma enters multiplied by alpha, so scaling all three changes the trade-off.
  auto all = default_cfg(24);
  all.alpha *= 3.0;
  all.beta *= 3.0;
  all.gamma *= 3.0;
  const auto moved = solve_schedule(3.0, fc, all);
  CHECK((moved.p_sto - base.p_sto).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("build-time validation") {
  const auto cfg = default_cfg(3);
  try {
    (void)build_qp(12.5, flat(3, 50.0), cfg);
    FAIL("expected InvalidState");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidState);
  }
  try {
    (void)build_qp(6.0, flat(2, 50.0), cfg);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  auto bad = cfg;
  bad.gamma[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.x_ref = 13.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS((void)build_qp(6.0, flat(3, 50.0, -1.0), cfg), Error);
}

TEST_CASE("truncation keeps the leading weights") {
  auto cfg = default_cfg(4);
  cfg.beta << 1.0, 2.0, 3.0, 4.0;
  const auto t = cfg.truncated(2);
  CHECK(t.n_slots == 2);
  CHECK(t.beta[1] == 2.0);
  CHECK_THROWS_AS((void)cfg.truncated(5), Error);
}

}  // TEST_SUITE

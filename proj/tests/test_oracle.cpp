#include "bess/error.hpp"
#include "bess/horizon.hpp"
#include "oracle/qp_oracle.hpp"
#include "random_qp.hpp"

#include <doctest.h>

#include <random>

using namespace bess;
using bess::testing::solve_qp_oracle;

TEST_SUITE("qp_oracle") {

TEST_CASE("clipped scalar problem") {
  QpProblem p = QpProblem::unconstrained(Mat::Constant(1, 1, 2.0), Vec::Constant(1, -10.0));
  p.u_min[0] = 0.0;
  p.u_max[0] = 2.0;
  const auto sol = solve_qp_oracle(p);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(std::abs(sol.u_star[0] - 2.0) <= 1e-5);
}

TEST_CASE("equality example") {
  QpProblem p = QpProblem::unconstrained(2.0 * Mat::Identity(2, 2), Vec::Zero(2));
  p.A_eq = Mat::Ones(1, 2);
  p.b_eq = Vec::Constant(1, 2.0);
  p.u_min = Vec::Constant(2, -10.0);
  p.u_max = Vec::Constant(2, 10.0);
  const auto sol = solve_qp_oracle(p);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(std::abs(sol.u_star[0] - 1.0) <= 1e-5);
  CHECK(std::abs(sol.u_star[1] - 1.0) <= 1e-5);
}

TEST_CASE("one-slot dispatch problem saturates the storage") {
  const auto cfg = ControllerConfig::with_constant_weights(1, 1.0, 5.0, 1.0);
  const HorizonForecast fc{Vec::Constant(1, 50.0), Vec::Zero(1)};
  const auto hq = build_qp(6.0, fc, cfg);
  const auto sol = solve_qp_oracle(hq.qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.u_star[0] == doctest::Approx(44.0).epsilon(1e-9));
  CHECK(sol.u_star[1] == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("oracle solutions carry a small KKT residual") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing::random_feasible_qp(rng);
    const auto sol = solve_qp_oracle(inst.problem);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(kkt_residual(inst.problem, sol.u_star, sol.multipliers) <= 1e-3);
  }
}

TEST_CASE("dimension and box preconditions") {
  QpProblem big = QpProblem::unconstrained(Mat::Identity(5, 5), Vec::Zero(5));
  big.u_min.setConstant(-1.0);
  big.u_max.setConstant(1.0);
  try {
    (void)solve_qp_oracle(big);
    FAIL("expected DimensionTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooLarge);
  }
  const QpProblem open = QpProblem::unconstrained(Mat::Identity(1, 1), Vec::Zero(1));
  CHECK_THROWS_AS(solve_qp_oracle(open), Error);
}

}  // TEST_SUITE

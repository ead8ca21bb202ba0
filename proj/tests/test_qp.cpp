#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oed/errors.hpp"
#include "oed/qp.hpp"
#include "oracles.hpp"

using namespace oed;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double qp_objective(const QpProblem& p, const Vector& x) {
  return 0.5 * dot(x, p.hessian * x) + dot(p.linear, x);
}

} // namespace

TEST(Qp, Unconstrained) {
  QpProblem p{DenseMatrix::identity(2), {-1, -2}, std::nullopt, {-kInf, -kInf}, {kInf, kInf}};
  const QpSolution s = solve_qp(p, Vector{0, 0});
  EXPECT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.x[0], 1.0, 1e-14);
  EXPECT_NEAR(s.x[1], 2.0, 1e-14);
  EXPECT_TRUE(s.active_set.empty());
}

TEST(Qp, ClippedAtUpperBound) {
  QpProblem p{DenseMatrix{{1.0}}, {-4}, std::nullopt, {-kInf}, {1.0}};
  const QpSolution s = solve_qp(p, Vector{0});
  EXPECT_EQ(s.status, QpStatus::Optimal);
  EXPECT_DOUBLE_EQ(s.x[0], 1.0);
  ASSERT_EQ(s.active_set.size(), 1u);
  EXPECT_LT(s.bound_multipliers[0], 0.0);
  EXPECT_NEAR(s.bound_multipliers[0], -3.0, 1e-14);
}

TEST(Qp, SymmetricEquality) {
  QpProblem p{DenseMatrix::identity(2), {0, 0}, LinearEquality{{1, 1}, 1.0}, {0, 0}, {1, 1}};
  const QpSolution s = solve_qp(p, Vector{1, 0});
  EXPECT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.x[0], 0.5, 1e-14);
  EXPECT_NEAR(s.x[1], 0.5, 1e-14);
  EXPECT_NEAR(s.eq_multiplier, 0.5, 1e-14);
}

TEST(Qp, InfeasibleStartThrows) {
  QpProblem p{DenseMatrix::identity(2), {0, 0}, LinearEquality{{1, 1}, 1.0}, {0, 0}, {1, 1}};
  EXPECT_THROW(solve_qp(p, Vector{2, -1}), InfeasibleStart);
  EXPECT_THROW(solve_qp(p, Vector{0.2, 0.2}), InfeasibleStart);
}

TEST(Qp, IndefiniteHessianThrows) {
  QpProblem p{DenseMatrix{{1, 2}, {2, 1}}, {0, 0}, std::nullopt, {-1, -1}, {1, 1}};
  EXPECT_THROW(solve_qp(p, Vector{0, 0}), NotPositiveDefinite);
}

TEST(Qp, DefaultIterationLimit) {
  QpProblem p{DenseMatrix::identity(3), {0, 0, 0}, std::nullopt, {0, -kInf, 0}, {1, kInf, kInf}};
  EXPECT_EQ(default_qp_iteration_limit(p), 10u * 3u * (1u + 3u));
}

TEST(Qp, PlantedInstancesMatchNullspaceOracle) {
  RngStream rng(2718);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rep % 20;
    const bool eq = rep % 3 != 0 && n > 1;
    const oracle::PlantedQp planted = oracle::planted_qp(n, eq, rng);
    const QpProblem& p = planted.problem;
    const Vector oracle_x = oracle::nullspace_kkt_solve(p, planted.activity);
    for (std::size_t i = 0; i < n; ++i)
      ASSERT_NEAR(oracle_x[i], planted.solution[i], 1e-9) << "oracle self-check " << rep;

    const Vector x0 = project_feasible(p.equality, p.lower, p.upper, Vector(n, 0.0));
    const QpSolution s = solve_qp(p, x0);
    ASSERT_EQ(s.status, QpStatus::Optimal) << rep;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      err = std::max(err, std::abs(s.x[i] - oracle_x[i]));
    EXPECT_LT(err, 1e-8) << "instance " << rep << " n=" << n;
    EXPECT_LE(qp_kkt_residual(p, s), 1e-9 * (1.0 + norm2(p.linear))) << rep;
    EXPECT_LE(qp_objective(p, s.x), qp_objective(p, x0) + 1e-12) << rep;
  }
}

TEST(Qp, MultiplierSigns) {
  RngStream rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const oracle::PlantedQp planted = oracle::planted_qp(8, rep % 2 == 0, rng);
    const QpProblem& p = planted.problem;
    const QpSolution s =
        solve_qp(p, project_feasible(p.equality, p.lower, p.upper, Vector(8, 0.0)));
    for (std::size_t i : s.active_set) {
      if (s.x[i] == p.lower[i])
        EXPECT_GE(s.bound_multipliers[i], 0.0);
      else
        EXPECT_LE(s.bound_multipliers[i], 0.0);
    }
  }
}

TEST(Qp, Deterministic) {
  RngStream rng(17);
  const oracle::PlantedQp planted = oracle::planted_qp(12, true, rng);
  const QpProblem& p = planted.problem;
  const Vector x0 = project_feasible(p.equality, p.lower, p.upper, Vector(12, 0.0));
  const QpSolution a = solve_qp(p, x0);
  const QpSolution b = solve_qp(p, x0);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.active_set, b.active_set);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.eq_multiplier, b.eq_multiplier);
}

TEST(Qp, IterationLimitIsReported) {
  RngStream rng(3);
  oracle::PlantedQp planted = oracle::planted_qp(15, true, rng);
  planted.problem.max_iterations = 1;
  const QpProblem& p = planted.problem;
  const QpSolution s = solve_qp(p, project_feasible(p.equality, p.lower, p.upper, Vector(15, 0.0)));
  EXPECT_EQ(s.status, QpStatus::IterationLimit);
}

TEST(ProjectFeasible, Examples) {
  const std::optional<LinearEquality> sum1 = LinearEquality{{1, 1}, 1.0};
  const Vector lo{0, 0}, hi{1, 1};
  EXPECT_EQ(project_feasible(sum1, lo, hi, Vector{2, -1}), (Vector{1, 0}));
  const Vector mid = project_feasible(sum1, lo, hi, Vector{0.3, 0.3});
  EXPECT_NEAR(mid[0], 0.5, 1e-15);
  EXPECT_NEAR(mid[1], 0.5, 1e-15);
  const std::optional<LinearEquality> sum5 = LinearEquality{{1, 1, 1}, 5.0};
  EXPECT_THROW(project_feasible(sum5, Vector{0, 0, 0}, Vector{1, 1, 1}, Vector{0, 0, 0}),
               EmptyFeasibleSet);
}

TEST(ProjectFeasible, RandomPointsLandInFeasibleSet) {
  RngStream rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 30;
    Vector x(m), a(m, 1.0);
    for (double& v : x)
      v = rng.uniform(-1.0, 2.0);
    const Vector y = project_feasible(LinearEquality{a, 12.0}, Vector(m, 0.0), Vector(m, 1.0), x);
    double s = 0.0;
    for (double v : y) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      s += v;
    }
    EXPECT_NEAR(s, 12.0, 1e-10);
  }
}

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "oed/dense.hpp"

namespace oed {

/// aᵀx = b
struct LinearEquality {
  Vector a;
  double b = 0.0;
};

/// minimize ½xᵀHx + gᵀx  s.t.  aᵀx = b (optional),  lower ≤ x ≤ upper.
///
/// H must be symmetric positive definite. Infinite bounds are allowed.
struct QpProblem {
  DenseMatrix hessian;
  Vector linear;
  std::optional<LinearEquality> equality;
  Vector lower;
  Vector upper;
  /// 0 selects default_qp_iteration_limit().
  std::size_t max_iterations = 0;
};

enum class QpStatus { Optimal, IterationLimit };

/// Multipliers follow Hx + g = a·eq_multiplier + bound_multipliers, so a
/// bound multiplier is ≥ 0 on an active lower bound and ≤ 0 on an active
/// upper bound.
struct QpSolution {
  Vector x;
  double eq_multiplier = 0.0;
  Vector bound_multipliers;
  std::vector<std::size_t> active_set;
  std::size_t iterations = 0;
  QpStatus status = QpStatus::Optimal;
};

/// 10·n·(1 + number of finite bounds).
std::size_t default_qp_iteration_limit(const QpProblem& p);

/// Primal active-set method started from a feasible x0.
///
/// The working set holds bound constraints; the equality is kept in every
/// subproblem and eliminated through the Schur complement aᵀH_FF⁻¹a. A
/// constraint blocking a step enters the working set (smallest index on
/// ties); the bound with the most wrongly signed multiplier leaves it. More
/// than n consecutive zero-length steps end the solve with IterationLimit.
///
/// Throws InfeasibleStart if x0 violates a bound or the equality by more than
/// 1e-10, NotPositiveDefinite if a reduced Hessian cannot be factorized.
QpSolution solve_qp(const QpProblem& p, std::span<const double> x0);

/// Largest violation of stationarity, feasibility, complementarity and
/// multiplier signs for a candidate solution.
double qp_kkt_residual(const QpProblem& p, const QpSolution& s);

/// Clips x into the box, then spreads the equality residual over coordinates
/// that are not saturated in the direction of the correction. The result
/// satisfies the bounds exactly and the equality to about 1e-12.
///
/// Throws EmptyFeasibleSet when b lies outside the range of aᵀx over the box.
Vector project_feasible(const std::optional<LinearEquality>& equality,
                        std::span<const double> lower, std::span<const double> upper,
                        std::span<const double> x);

} // namespace oed

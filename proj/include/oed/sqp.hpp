#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oed/dense.hpp"
#include "oed/qp.hpp"

namespace oed {

struct NlpEvaluation {
  double value = 0.0;
  Vector gradient;
};

/// Smooth objective over a box with at most one linear equality.
///
/// Callbacks may throw oed::Error (for instance SingularInformationMatrix);
/// the solver treats a throwing trial point as rejected.
struct NlpSpec {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>)> objective;
  std::function<NlpEvaluation(std::span<const double>)> objective_and_gradient;
  /// Diagonal of the exact Hessian (entries may have any sign).
  std::function<Vector(std::span<const double>)> hessian_diagonal;
  std::optional<LinearEquality> equality;
  Vector lower;
  Vector upper;
};

struct SqpOptions {
  double tol_d = 1e-8;              ///< converged when ‖d‖₂ ≤ tol_d
  std::size_t max_iterations = 500; ///< SQP major iterations
  std::size_t qp_max_iterations = 0; ///< 0 selects the QP default limit
  double hessian_floor = 1e-8;      ///< relative lower bound on initial diagonal entries
  double armijo = 1e-4;
  double min_step = 1e-12;
  double initial_penalty = 1.0;
};

enum class SqpStatus { Converged, MaxIterations, QpIterationLimit, EvaluationFailure };

std::string_view to_string(SqpStatus s) noexcept;
std::optional<SqpStatus> parse_sqp_status(std::string_view s) noexcept;

struct SqpIterationRecord {
  double direction_norm = 0.0; ///< ‖d‖₂ of the QP step
  double merit = 0.0;          ///< merit at the iterate after this iteration
  double step_length = 0.0;    ///< accepted line-search step (0 when none taken)
  double objective = 0.0;
  std::size_t qp_iterations = 0;
};

struct SqpReport {
  Vector solution;
  double objective = 0.0;
  double eq_multiplier = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  std::size_t qp_iterations = 0; ///< inner iterations summed over the run
  SqpStatus status = SqpStatus::MaxIterations;
  std::string detail; ///< reason for a non-converged status, empty otherwise
  std::vector<SqpIterationRecord> trace;
};

/// Quasi-Newton SQP with damped BFGS updates, an augmented Lagrangian merit
/// function and backtracking line search.
SqpReport solve(const NlpSpec& nlp, std::span<const double> x0, const SqpOptions& options = {});

/// Powell-damped BFGS update. Throws DegenerateStep when sᵀBs ≤ 0.
DenseMatrix damped_bfgs_update(const DenseMatrix& b, std::span<const double> s,
                               std::span<const double> y);

/// diag(max(|hᵢᵢ|, floor·maxⱼ|hⱼⱼ|)) from the exact Hessian diagonal at x0;
/// the floor is absolute when the whole diagonal vanishes.
DenseMatrix initial_hessian(const NlpSpec& nlp, std::span<const double> x0, double floor = 1e-8);

/// Φ(x; λ, ρ) = f(x) + λc(x) + ½ρc(x)² where c is the equality residual.
double merit_value(double objective, double constraint, double lambda, double penalty) noexcept;

struct LineSearchState {
  std::span<const double> x;
  double objective;
  std::span<const double> gradient;
  std::span<const double> direction;
  double dBd; ///< dᵀBd of the QP model
};

struct LineSearchResult {
  bool success = false;
  double step = 0.0;
  double objective = 0.0;
  double merit = 0.0;
  double penalty = 0.0;
  Vector x;
  std::size_t rejected_evaluations = 0; ///< trial points whose evaluation threw
};

/// Backtracking Armijo search on the merit function with steps 1, ½, ¼, …
/// down to options.min_step. A trial is accepted when
/// Φ(x+αd) ≤ Φ(x) + armijo·α·Φ'(x; d) + 10ε|Φ(x)|. `penalty` is raised to max(ρ, 2|λ|+1) when the
/// directional derivative is not sufficiently negative.
LineSearchResult merit_line_search(const NlpSpec& nlp, const LineSearchState& state,
                                   double lambda, double penalty, const SqpOptions& options);

} // namespace oed

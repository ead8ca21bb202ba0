#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "oed/criterion.hpp"
#include "oed/dense.hpp"
#include "oed/rng.hpp"

namespace oed::fhn {

/// Model parameters (z, a, b, c) of
///   ẋ₁ = x₁ - z x₁³ - x₂ + I,   ẋ₂ = a (x₁ + b + c x₂).
struct Parameters {
  double z = 0.25;
  double a = 0.02;
  double b = 0.7;
  double c = -0.8;

  [[nodiscard]] std::array<double, 4> as_array() const noexcept { return {z, a, b, c}; }
  static Parameters from_array(std::span<const double, 4> v) noexcept {
    return {v[0], v[1], v[2], v[3]};
  }
};

inline constexpr std::size_t kStates = 2;
inline constexpr std::size_t kParameters = 4;
inline constexpr std::size_t kControls = 3; // (I, x₀₁, x₀₂)

/// Closed control box [-1, 0.5] × [-5, 5] × [-5, 5] for (I, x₀₁, x₀₂).
std::vector<Interval> control_bounds();

struct Model {
  Parameters parameters;
  std::array<double, kControls> controls{0.0, 0.0, 0.0};
  std::size_t measurement_count = 100; ///< T, measurements at tᵢ = spacing·i
  double spacing = 5.0;

  [[nodiscard]] std::vector<double> measurement_times() const;
  [[nodiscard]] std::size_t candidates() const noexcept { return kStates * measurement_count; }
};

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
};

/// States and first-order sensitivities sampled at t₀ = 0 followed by the
/// requested output times.
struct SensitivityTrajectory {
  std::vector<double> times;
  std::vector<std::array<double, kStates>> states;
  std::vector<DenseMatrix> parameter_sensitivities; ///< 2×4 blocks ∂x/∂p
  std::vector<DenseMatrix> control_sensitivities;   ///< 2×3 blocks ∂x/∂q
};

/// Accepted step sizes of an adaptive run, replayable for perturbed runs.
using StepSequence = std::vector<double>;

/// Adaptive Dormand-Prince 5(4) on the state plus variational equations,
/// landing exactly on every output time (defaults to the measurement grid).
/// Throws StepSizeUnderflow when the step falls below 1e-12.
SensitivityTrajectory integrate_with_sensitivities(const Model& model, const Tolerances& tol,
                                                   std::span<const double> output_times = {},
                                                   StepSequence* record = nullptr);

/// Re-runs the integrator with a fixed sequence of step sizes.
SensitivityTrajectory replay_with_sensitivities(const Model& model, const StepSequence& steps,
                                                std::span<const double> output_times);

/// Dormand-Prince 5th-order solution with constant step h up to t_end.
SensitivityTrajectory integrate_fixed_step(const Model& model, double h, double t_end);

/// J (2T×4): row 2(i-1)+s holds ∂x_s(tᵢ)/∂p, i.e. (x₁@t₁, x₂@t₁, x₁@t₂, …).
DenseMatrix assemble_jacobian(const SensitivityTrajectory& traj, std::size_t measurements);

/// Central differences of a control-dependent Jacobian, step
/// relative_step·(1+|q_k|).
std::vector<DenseMatrix> control_derivatives(
    const std::function<DenseMatrix(std::span<const double>)>& jacobian_of,
    std::span<const double> q, double relative_step = 1e-5);

/// Relative difference step used by design_jacobian. Replayed integrations
/// are smooth in q, so the step can be small; near good designs the
/// sensitivities vary too fast in I for 1e-5.
inline constexpr double kReplayStep = 1e-7;

/// J(q) and ∂J/∂q_k for the FHN model. Perturbed integrations replay the
/// step sequence of the nominal run so the differences are smooth in q.
JacobianEvaluation design_jacobian(const Model& model, std::span<const double> q,
                                   const Tolerances& tol, bool with_derivatives = true);

/// DesignProblem over the FHN measurement grid with controls (I, x₀₁, x₀₂).
DesignProblem make_design_problem(const Model& model, double m_max, bool preconditioned,
                                  const Tolerances& tol = {});

/// Draws q uniformly from the control box until Tr((JᵀJ)⁻¹) ≤ threshold.
/// Throws FilterExhausted after 1000 draws.
std::array<double, kControls> initial_guess_filter(const Model& model, RngStream& rng,
                                                   double threshold = 100.0,
                                                   const Tolerances& tol = {});

/// CSV with columns t,x1,x2 and, optionally, dx1_dz,…,dx2_dx02.
void write_trajectory_csv(std::ostream& os, const SensitivityTrajectory& traj,
                          bool with_sensitivities);

} // namespace oed::fhn

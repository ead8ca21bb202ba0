#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "oed/dense.hpp"

namespace oed {

/// J(q) together with ∂J/∂q_k, one m×n_p matrix per control.
struct JacobianEvaluation {
  DenseMatrix jacobian;
  std::vector<DenseMatrix> control_derivatives;
};

/// Callback q ↦ J(q); derivatives are only required when requested.
using JacobianProvider =
    std::function<JacobianEvaluation(std::span<const double> q, bool with_derivatives)>;

struct Interval {
  double low;
  double high;
};

/// Relaxed A-optimal design problem
///
///   min  h(Tr([α⁻¹I + Jᵀ(q) W(w) J(q)]⁻¹))  s.t.  w ∈ [0,1]^m, Σw = m_max, q ∈ Θ
///
/// where h is the identity, or h(z) = -z⁻² when preconditioned.
class DesignProblem {
public:
  /// Linear problem: J is fixed and there are no controls.
  static DesignProblem fixed(DenseMatrix jacobian, double m_max, std::optional<double> prior_alpha,
                             bool preconditioned);

  /// Nonlinear problem: J depends on controls q within the box `control_bounds`.
  static DesignProblem with_controls(JacobianProvider provider, std::size_t candidates,
                                     std::size_t parameters, std::vector<Interval> control_bounds,
                                     double m_max, std::optional<double> prior_alpha,
                                     bool preconditioned);

  [[nodiscard]] std::size_t candidates() const noexcept { return candidates_; }
  [[nodiscard]] std::size_t parameters() const noexcept { return parameters_; }
  [[nodiscard]] std::size_t controls() const noexcept { return control_bounds_.size(); }
  [[nodiscard]] double m_max() const noexcept { return m_max_; }
  [[nodiscard]] const std::optional<double>& prior_alpha() const noexcept { return prior_alpha_; }
  [[nodiscard]] bool preconditioned() const noexcept { return preconditioned_; }
  [[nodiscard]] const std::vector<Interval>& control_bounds() const noexcept {
    return control_bounds_;
  }
  [[nodiscard]] bool has_fixed_jacobian() const noexcept { return fixed_.has_value(); }

  /// Same problem with the preconditioning flag replaced.
  [[nodiscard]] DesignProblem with_preconditioning(bool on) const;

  /// Throws MissingJacobianDerivative when derivatives are requested from a
  /// fixed-matrix problem that has controls to differentiate against.
  [[nodiscard]] JacobianEvaluation jacobian(std::span<const double> q,
                                            bool with_derivatives) const;

private:
  DesignProblem() = default;
  void validate() const;

  std::optional<DenseMatrix> fixed_;
  JacobianProvider provider_;
  std::size_t candidates_ = 0;
  std::size_t parameters_ = 0;
  std::vector<Interval> control_bounds_;
  double m_max_ = 0.0;
  std::optional<double> prior_alpha_;
  bool preconditioned_ = false;
};

/// The left preconditioner h(z) = -z⁻² and its first two derivatives.
struct Preconditioner {
  static double value(double z) noexcept { return -1.0 / (z * z); }
  static double first(double z) noexcept { return 2.0 / (z * z * z); }
  static double second(double z) noexcept { return -6.0 / (z * z * z * z); }
};

struct CriterionRequest {
  bool gradient_w = false;
  bool gradient_q = false;
  bool hessian_w_diagonal = false;
};

struct CriterionValue {
  double trace = 0.0; ///< Tr(M⁻¹), always unpreconditioned
  double value = 0.0; ///< objective: trace, or h(trace) when preconditioned
  Vector gradient_w;
  Vector gradient_q;
  Vector hessian_w_diagonal;
};

/// M = [α⁻¹I +] Σᵢ wᵢ jᵢjᵢᵀ; exactly symmetric.
DenseMatrix information_matrix(const DenseMatrix& jacobian, std::span<const double> w,
                               const std::optional<double>& prior_alpha);

/// Evaluates the criterion and the requested derivatives from a QR
/// factorization of J and a Cholesky factorization of QᵀWQ. `control_derivatives` may be empty unless gradient_q is set.
/// Throws SingularInformationMatrix.
CriterionValue evaluate_criterion(const DenseMatrix& jacobian,
                                  std::span<const DenseMatrix> control_derivatives,
                                  std::span<const double> w,
                                  const std::optional<double>& prior_alpha, bool preconditioned,
                                  const CriterionRequest& request);

CriterionValue evaluate_criterion(const DesignProblem& p, std::span<const double> w,
                                  std::span<const double> q, const CriterionRequest& request);

DenseMatrix information_matrix(const DesignProblem& p, std::span<const double> w,
                               std::span<const double> q);
double objective(const DesignProblem& p, std::span<const double> w, std::span<const double> q);
Vector gradient_w(const DesignProblem& p, std::span<const double> w, std::span<const double> q);
Vector gradient_q(const DesignProblem& p, std::span<const double> w, std::span<const double> q);
Vector hessian_w_diagonal(const DesignProblem& p, std::span<const double> w,
                          std::span<const double> q);

} // namespace oed

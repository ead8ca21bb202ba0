#pragma once

namespace oed {

/// Two-observation design with prior covariance αI and orthonormal candidate
/// rows v₁, v₂, reduced to the single weight w = w₁ (w₂ = 1 - w):
///
///   f(w) = 2α - wα²/(1+wα) - (1-w)α²/(1+(1-w)α)
///
/// The minimizer is w* = ½ for every α > 0.
struct ModelProblem {
  double alpha = 1.0;
  bool preconditioned = false;
};

struct ReducedDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// f(w), or -f(w)⁻² when preconditioned.
double reduced_objective(const ModelProblem& mp, double w);

ReducedDerivatives reduced_derivatives(const ModelProblem& mp, double w);

/// (1+α/2)³/(2α³) unpreconditioned, exactly 2 preconditioned.
double analytic_condition_number(const ModelProblem& mp);

/// |g(ε) - g(-ε)| / (2ε|w*|) where g solves f'(g(ε)) = ε.
///
/// `eps` ≤ 0 selects 1e-6·|f''(w*)|, which keeps g(±ε) within about 1e-6 of
/// w* for every α. Throws RootNotBracketed if f' - ε has no sign change on
/// [0, 1].
double empirical_condition_number(const ModelProblem& mp, double eps = 0.0);

/// Root of f'(w) = target on [0, 1] by safeguarded Newton/bisection.
double solve_stationarity(const ModelProblem& mp, double target);

} // namespace oed

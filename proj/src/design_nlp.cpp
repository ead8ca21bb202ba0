#include "oed/design_nlp.hpp"

#include <cmath>
#include <memory>
#include <optional>

namespace oed {

namespace {

struct JacobianCache {
  Vector q;
  bool has_derivatives = false;
  std::optional<JacobianEvaluation> value;
};

const JacobianEvaluation& cached_jacobian(const DesignProblem& p, JacobianCache& cache,
                                          std::span<const double> q, bool with_derivatives) {
  const bool hit = cache.value && cache.q.size() == q.size() &&
                   std::equal(q.begin(), q.end(), cache.q.begin()) &&
                   (cache.has_derivatives || !with_derivatives);
  if (!hit) {
    cache.value.reset();
    cache.value = p.jacobian(q, with_derivatives);
    cache.q.assign(q.begin(), q.end());
    cache.has_derivatives = with_derivatives;
  }
  return *cache.value;
}

} // namespace

std::span<const double> weights_of(const DesignProblem& problem, std::span<const double> x) {
  return x.subspan(0, problem.candidates());
}

std::span<const double> controls_of(const DesignProblem& problem, std::span<const double> x) {
  return x.subspan(problem.candidates(), problem.controls());
}

NlpSpec make_design_nlp(const DesignProblem& problem) {
  const std::size_t m = problem.candidates();
  const std::size_t nq = problem.controls();
  auto p = std::make_shared<const DesignProblem>(problem);
  auto cache = std::make_shared<JacobianCache>();

  NlpSpec nlp;
  nlp.dimension = m + nq;
  nlp.lower.assign(m + nq, 0.0);
  nlp.upper.assign(m + nq, 1.0);
  for (std::size_t k = 0; k < nq; ++k) {
    nlp.lower[m + k] = problem.control_bounds()[k].low;
    nlp.upper[m + k] = problem.control_bounds()[k].high;
  }
  LinearEquality eq{Vector(m + nq, 0.0), problem.m_max()};
  std::fill(eq.a.begin(), eq.a.begin() + static_cast<std::ptrdiff_t>(m), 1.0);
  nlp.equality = std::move(eq);

  auto value_at = [p, cache](std::span<const double> x) {
    const JacobianEvaluation& jac =
        cached_jacobian(*p, *cache, controls_of(*p, x), false);
    return evaluate_criterion(jac.jacobian, {}, weights_of(*p, x), p->prior_alpha(),
                              p->preconditioned(), {})
        .value;
  };

  nlp.objective = value_at;

  nlp.objective_and_gradient = [p, cache, nq](std::span<const double> x) {
    const JacobianEvaluation& jac = cached_jacobian(*p, *cache, controls_of(*p, x), nq > 0);
    const CriterionValue cv =
        evaluate_criterion(jac.jacobian, jac.control_derivatives, weights_of(*p, x),
                           p->prior_alpha(), p->preconditioned(),
                           {.gradient_w = true, .gradient_q = nq > 0});
    NlpEvaluation out;
    out.value = cv.value;
    out.gradient = cv.gradient_w;
    out.gradient.insert(out.gradient.end(), cv.gradient_q.begin(), cv.gradient_q.end());
    return out;
  };

  nlp.hessian_diagonal = [p, cache, m, nq, value_at](std::span<const double> x) {
    const JacobianEvaluation& jac = cached_jacobian(*p, *cache, controls_of(*p, x), false);
    const CriterionValue cv = evaluate_criterion(jac.jacobian, {}, weights_of(*p, x),
                                                 p->prior_alpha(), p->preconditioned(),
                                                 {.hessian_w_diagonal = true});
    Vector diag = cv.hessian_w_diagonal;
    diag.resize(m + nq);
    Vector xp(x.begin(), x.end());
    for (std::size_t k = 0; k < nq; ++k) {
      const std::size_t i = m + k;
      const double h = 1e-4 * (1.0 + std::abs(x[i]));
      xp[i] = x[i] + h;
      const double fp = value_at(xp);
      xp[i] = x[i] - h;
      const double fm = value_at(xp);
      xp[i] = x[i];
      diag[i] = (fp - 2.0 * cv.value + fm) / (h * h);
    }
    return diag;
  };
  return nlp;
}

} // namespace oed

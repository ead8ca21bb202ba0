#include "oed/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oed/errors.hpp"

namespace oed {

std::string_view to_string(SqpStatus s) noexcept {
  switch (s) {
  case SqpStatus::Converged:
    return "Converged";
  case SqpStatus::MaxIterations:
    return "MaxIterations";
  case SqpStatus::QpIterationLimit:
    return "QpIterationLimit";
  case SqpStatus::EvaluationFailure:
    return "EvaluationFailure";
  }
  return "Unknown";
}

std::optional<SqpStatus> parse_sqp_status(std::string_view s) noexcept {
  for (SqpStatus v : {SqpStatus::Converged, SqpStatus::MaxIterations, SqpStatus::QpIterationLimit,
                      SqpStatus::EvaluationFailure})
    if (to_string(v) == s)
      return v;
  return std::nullopt;
}

DenseMatrix damped_bfgs_update(const DenseMatrix& b, std::span<const double> s,
                               std::span<const double> y) {
  const std::size_t n = b.rows();
  if (!b.square() || s.size() != n || y.size() != n)
    throw std::invalid_argument("damped_bfgs_update: dimension mismatch");
  const Vector bs = b * s;
  const double sbs = dot(s, bs);
  if (!(sbs > 0.0))
    throw DegenerateStep("damped_bfgs_update: sᵀBs is not positive");
  const double sy = dot(s, y);

  const double theta = sy >= 0.2 * sbs ? 1.0 : 0.8 * sbs / (sbs - sy);
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = theta * y[i] + (1.0 - theta) * bs[i];
  const double sr = dot(s, r);

  DenseMatrix out(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) {
      const double v = b(i, j) - bs[i] * bs[j] / sbs + r[i] * r[j] / sr;
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

DenseMatrix initial_hessian(const NlpSpec& nlp, std::span<const double> x0, double floor) {
  Vector d = nlp.hessian_diagonal(x0);
  if (d.size() != nlp.dimension)
    throw std::invalid_argument("initial_hessian: diagonal has wrong length");
  double scale = 0.0;
  for (double v : d) {
    if (!std::isfinite(v))
      throw NonFiniteValue("initial_hessian: non-finite Hessian diagonal");
    scale = std::max(scale, std::abs(v));
  }
  // Relative floor: preconditioned objectives without prior are O(1e-16) and
  // an absolute floor would swamp their curvature.
  const double lo = scale > 0.0 ? floor * scale : floor;
  for (double& v : d)
    v = std::max(std::abs(v), lo);
  return DenseMatrix::diagonal(d);
}

double merit_value(double objective, double constraint, double lambda, double penalty) noexcept {
  return objective + lambda * constraint + 0.5 * penalty * constraint * constraint;
}

namespace {

constexpr double kRoundoffSlack = 10.0 * std::numeric_limits<double>::epsilon();

// Residuals within the rounding error of aᵀx - b count as zero; otherwise
// ½ρc² adds noise that can swamp objectives of order 1e-18.
double constraint_residual(const NlpSpec& nlp, std::span<const double> x) {
  if (!nlp.equality)
    return 0.0;
  const Vector& a = nlp.equality->a;
  double sum = -nlp.equality->b;
  double mag = std::abs(nlp.equality->b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += a[i] * x[i];
    mag += std::abs(a[i] * x[i]);
  }
  const double bound = static_cast<double>(a.size() + 1) * std::numeric_limits<double>::epsilon() * mag;
  return std::abs(sum) <= bound ? 0.0 : sum;
}

Vector clip(const NlpSpec& nlp, std::span<const double> x) {
  Vector y(x.begin(), x.end());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = std::clamp(y[i], nlp.lower[i], nlp.upper[i]);
  return y;
}

double kkt_residual(const NlpSpec& nlp, std::span<const double> x, std::span<const double> grad,
                    double eq_multiplier) {
  double res = std::abs(constraint_residual(nlp, x));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = grad[i] - (nlp.equality ? eq_multiplier * nlp.equality->a[i] : 0.0);
    if (x[i] <= nlp.lower[i])
      res = std::max(res, -r);
    else if (x[i] >= nlp.upper[i])
      res = std::max(res, r);
    else
      res = std::max(res, std::abs(r));
  }
  return res;
}

} // namespace

LineSearchResult merit_line_search(const NlpSpec& nlp, const LineSearchState& state,
                                   double lambda, double penalty, const SqpOptions& options) {
  LineSearchResult out;
  const double c0 = constraint_residual(nlp, state.x);
  const double ad = nlp.equality ? dot(nlp.equality->a, state.direction) : 0.0;
  auto directional = [&](double rho) {
    return dot(state.gradient, state.direction) + (lambda + rho * c0) * ad;
  };
  double slope = directional(penalty);
  if (slope > -0.5 * state.dBd && c0 != 0.0) {
    penalty = std::max(penalty, 2.0 * std::abs(lambda) + 1.0);
    slope = directional(penalty);
  }
  out.penalty = penalty;
  const double phi0 = merit_value(state.objective, c0, lambda, penalty);
  if (!(slope < 0.0))
    return out;

  Vector trial(state.x.size());
  for (double alpha = 1.0; alpha >= options.min_step; alpha *= 0.5) {
    for (std::size_t i = 0; i < trial.size(); ++i)
      trial[i] = state.x[i] + alpha * state.direction[i];
    if (alpha < 1.0)
      trial = clip(nlp, trial);
    double f = 0.0;
    try {
      f = nlp.objective(trial);
    } catch (const Error&) {
      ++out.rejected_evaluations;
      continue;
    }
    if (!std::isfinite(f)) {
      ++out.rejected_evaluations;
      continue;
    }
    const double phi = merit_value(f, constraint_residual(nlp, trial), lambda, penalty);
    // Sufficient decrease, with slack for merit values equal to roundoff.
    if (phi <= phi0 + options.armijo * alpha * slope + kRoundoffSlack * std::abs(phi0)) {
      out.success = true;
      out.step = alpha;
      out.objective = f;
      out.merit = phi;
      out.x = std::move(trial);
      return out;
    }
  }
  return out;
}

namespace {

SqpReport solve_iterations(const NlpSpec& nlp, std::span<const double> x0,
                         const SqpOptions& options) {
  const std::size_t n = nlp.dimension;
  SqpReport report;
  Vector x = project_feasible(nlp.equality, nlp.lower, nlp.upper, x0);
  report.solution = x;

  NlpEvaluation eval;
  DenseMatrix b;
  try {
    eval = nlp.objective_and_gradient(x);
    b = initial_hessian(nlp, x, options.hessian_floor);
  } catch (const Error& e) {
    report.status = SqpStatus::EvaluationFailure;
    report.detail = e.what();
    return report;
  }
  if (!std::isfinite(eval.value)) {
    report.status = SqpStatus::EvaluationFailure;
    report.detail = "non-finite objective at the starting point";
    return report;
  }
  report.objective = eval.value;

  double lambda = 0.0;
  double penalty = options.initial_penalty;
  report.status = SqpStatus::MaxIterations;

  const Vector zeros(n, 0.0);
  for (std::size_t k = 1; k <= options.max_iterations; ++k) {
    report.iterations = k;
    const double c = constraint_residual(nlp, x);

    QpProblem qp;
    qp.hessian = b;
    qp.linear = eval.gradient;
    if (nlp.equality)
      qp.equality = LinearEquality{nlp.equality->a, -c};
    qp.lower.resize(n);
    qp.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      qp.lower[i] = nlp.lower[i] - x[i];
      qp.upper[i] = nlp.upper[i] - x[i];
    }
    qp.max_iterations = options.qp_max_iterations;

    QpSolution qs;
    try {
      const Vector d0 = project_feasible(qp.equality, qp.lower, qp.upper, zeros);
      try {
        qs = solve_qp(qp, d0);
      } catch (const NotPositiveDefinite&) {
        // B lost definiteness in floating point; restart from a fresh diagonal.
        b = initial_hessian(nlp, x, options.hessian_floor);
        qp.hessian = b;
        qs = solve_qp(qp, d0);
      }
    } catch (const Error& e) {
      report.trace.push_back({0.0, merit_value(eval.value, c, lambda, penalty), 0.0, eval.value, 0});
      report.status = SqpStatus::EvaluationFailure;
      report.detail = std::string("QP subproblem: ") + e.what();
      break;
    }
    report.qp_iterations += qs.iterations;
    const double dnorm = norm2(qs.x);
    SqpIterationRecord rec{dnorm, merit_value(eval.value, c, lambda, penalty), 0.0, eval.value,
                           qs.iterations};

    if (qs.status == QpStatus::IterationLimit) {
      report.trace.push_back(rec);
      report.status = SqpStatus::QpIterationLimit;
      report.detail = "QP iteration limit";
      break;
    }
    // Lagrangian L = f - νc with ν the QP equality multiplier; Φ uses λ = -ν.
    const double nu = qs.eq_multiplier;
    report.eq_multiplier = nu;
    if (dnorm <= options.tol_d) {
      report.trace.push_back(rec);
      report.status = SqpStatus::Converged;
      break;
    }

    lambda = -nu;
    const Vector bd = b * qs.x;
    const LineSearchResult ls = merit_line_search(
        nlp, {x, eval.value, eval.gradient, qs.x, dot(qs.x, bd)}, lambda, penalty, options);
    penalty = ls.penalty;
    if (!ls.success) {
      rec.merit = merit_value(eval.value, c, lambda, penalty);
      report.trace.push_back(rec);
      report.status = k == 1 ? SqpStatus::EvaluationFailure : SqpStatus::MaxIterations;
      report.detail = "line search failed";
      break;
    }

    Vector x_new = project_feasible(nlp.equality, nlp.lower, nlp.upper, ls.x);
    NlpEvaluation eval_new;
    try {
      eval_new = nlp.objective_and_gradient(x_new);
    } catch (const Error& e) {
      report.trace.push_back(rec);
      report.status = SqpStatus::EvaluationFailure;
      report.detail = e.what();
      break;
    }

    // Constraints are linear, so the Lagrangian gradient difference reduces
    // to the objective gradient difference.
    Vector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = eval_new.gradient[i] - eval.gradient[i];
    }
    try {
      b = damped_bfgs_update(b, s, y);
    } catch (const DegenerateStep&) {
      b = initial_hessian(nlp, x_new, options.hessian_floor);
    }

    x = std::move(x_new);
    eval = std::move(eval_new);
    rec.step_length = ls.step;
    rec.objective = eval.value;
    rec.merit = merit_value(eval.value, constraint_residual(nlp, x), lambda, penalty);
    report.trace.push_back(rec);
  }

  if (report.status == SqpStatus::MaxIterations && report.detail.empty())
    report.detail = "iteration limit";
  report.solution = x;
  report.objective = eval.value;
  report.kkt_residual = kkt_residual(nlp, x, eval.gradient, report.eq_multiplier);
  return report;
}

} // namespace

SqpReport solve(const NlpSpec& nlp, std::span<const double> x0, const SqpOptions& options) {
  const std::size_t n = nlp.dimension;
  if (x0.size() != n || nlp.lower.size() != n || nlp.upper.size() != n)
    throw std::invalid_argument("sqp::solve: dimension mismatch");
  return solve_iterations(nlp, x0, options);
}

} // namespace oed

#include "oed/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oed/errors.hpp"

namespace oed {

constexpr double kEpsilon = std::numeric_limits<double>::epsilon();

DesignProblem DesignProblem::fixed(DenseMatrix jacobian, double m_max,
                                   std::optional<double> prior_alpha, bool preconditioned) {
  DesignProblem p;
  p.candidates_ = jacobian.rows();
  p.parameters_ = jacobian.cols();
  p.fixed_ = std::move(jacobian);
  p.m_max_ = m_max;
  p.prior_alpha_ = prior_alpha;
  p.preconditioned_ = preconditioned;
  p.validate();
  return p;
}

DesignProblem DesignProblem::with_controls(JacobianProvider provider, std::size_t candidates,
                                           std::size_t parameters,
                                           std::vector<Interval> control_bounds, double m_max,
                                           std::optional<double> prior_alpha,
                                           bool preconditioned) {
  if (!provider)
    throw std::invalid_argument("DesignProblem: empty jacobian provider");
  DesignProblem p;
  p.provider_ = std::move(provider);
  p.candidates_ = candidates;
  p.parameters_ = parameters;
  p.control_bounds_ = std::move(control_bounds);
  p.m_max_ = m_max;
  p.prior_alpha_ = prior_alpha;
  p.preconditioned_ = preconditioned;
  p.validate();
  return p;
}

void DesignProblem::validate() const {
  if (candidates_ == 0 || parameters_ == 0)
    throw std::invalid_argument("DesignProblem: empty jacobian");
  if (!(m_max_ > 0.0) || !(m_max_ < static_cast<double>(candidates_)))
    throw std::invalid_argument("DesignProblem: need 0 < m_max < number of candidates");
  if (prior_alpha_ && !(*prior_alpha_ > 0.0))
    throw std::invalid_argument("DesignProblem: prior alpha must be positive");
  for (const auto& b : control_bounds_)
    if (!(b.low < b.high))
      throw std::invalid_argument("DesignProblem: control bound low must be < high");
}

DesignProblem DesignProblem::with_preconditioning(bool on) const {
  DesignProblem p = *this;
  p.preconditioned_ = on;
  return p;
}

JacobianEvaluation DesignProblem::jacobian(std::span<const double> q, bool with_derivatives) const {
  if (q.size() != controls())
    throw std::invalid_argument("DesignProblem: control vector has wrong length");
  if (fixed_) {
    if (with_derivatives && !control_bounds_.empty())
      throw MissingJacobianDerivative("fixed jacobian has no control derivatives");
    return {*fixed_, {}};
  }
  JacobianEvaluation e = provider_(q, with_derivatives);
  if (e.jacobian.rows() != candidates_ || e.jacobian.cols() != parameters_)
    throw std::invalid_argument("DesignProblem: provider returned wrong jacobian shape");
  if (with_derivatives && e.control_derivatives.size() != controls())
    throw MissingJacobianDerivative("provider returned too few control derivatives");
  return e;
}

DenseMatrix information_matrix(const DenseMatrix& jacobian, std::span<const double> w,
                               const std::optional<double>& prior_alpha) {
  const std::size_t m = jacobian.rows();
  const std::size_t n = jacobian.cols();
  if (w.size() != m)
    throw std::invalid_argument("information_matrix: weight vector has wrong length");

  DenseMatrix info(n, n);
  if (prior_alpha)
    for (std::size_t k = 0; k < n; ++k)
      info(k, k) = 1.0 / *prior_alpha;

  // Lower triangle, then mirrored, so the result is bit-symmetric.
  for (std::size_t i = 0; i < m; ++i) {
    if (w[i] == 0.0)
      continue;
    for (std::size_t c = 0; c < n; ++c) {
      const double wjc = w[i] * jacobian(i, c);
      for (std::size_t r = c; r < n; ++r)
        info(r, c) += wjc * jacobian(i, r);
    }
  }
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = c + 1; r < n; ++r)
      info(c, r) = info(r, c);
  return info;
}

namespace {

// Solves R x = b for upper triangular R.
Vector solve_upper_triangular(const DenseMatrix& r, std::span<const double> b) {
  const std::size_t n = r.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k)
      s -= r(i, k) * x[k];
    x[i] = s / r(i, i);
  }
  return x;
}

// Solves Rᵀ x = b for upper triangular R.
Vector solve_upper_transposed(const DenseMatrix& r, std::span<const double> b) {
  const std::size_t n = r.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k)
      s -= r(k, i) * x[k];
    x[i] = s / r(i, i);
  }
  return x;
}

} // namespace

CriterionValue evaluate_criterion(const DenseMatrix& jacobian,
                                  std::span<const DenseMatrix> control_derivatives,
                                  std::span<const double> w,
                                  const std::optional<double>& prior_alpha, bool preconditioned,
                                  const CriterionRequest& request) {
  const std::size_t m = jacobian.rows();
  const std::size_t n = jacobian.cols();
  if (w.size() != m)
    throw std::invalid_argument("evaluate_criterion: weight vector has wrong length");
  if (!jacobian.all_finite() || !std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); }))
    throw NonFiniteValue("evaluate_criterion: non-finite jacobian or weights");

  // Work with J = QR (the prior enters as extra rows α^{-1/2}I of weight one)
  // so that M = Rᵀ G R with G = QᵀWQ. Forming M directly squares cond(J).
  const std::size_t rows = m + (prior_alpha ? n : 0);
  if (rows < n)
    throw SingularInformationMatrix("evaluate_criterion: fewer candidates than parameters");
  DenseMatrix a(rows, n);
  Vector wt(rows, 1.0);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t i = 0; i < m; ++i)
      a(i, c) = jacobian(i, c);
  std::copy(w.begin(), w.end(), wt.begin());
  if (prior_alpha)
    for (std::size_t k = 0; k < n; ++k)
      a(m + k, k) = 1.0 / std::sqrt(*prior_alpha);

  const QrFactor qr = householder_qr(a);
  double rmax = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    rmax = std::max(rmax, std::abs(qr.r(k, k)));
  for (std::size_t k = 0; k < n; ++k)
    if (!(std::abs(qr.r(k, k)) > static_cast<double>(n) * kEpsilon * rmax))
      throw SingularInformationMatrix("evaluate_criterion: jacobian is rank deficient");

  std::optional<CholeskyFactor> g;
  try {
    g.emplace(cholesky(information_matrix(qr.q, wt, std::nullopt)));
  } catch (const NotPositiveDefinite& e) {
    throw SingularInformationMatrix(e.what());
  }

  // M⁻¹ = YᵀY with Y = L⁻¹R⁻ᵀ, G = LLᵀ.
  DenseMatrix y(n, n);
  CriterionValue out;
  double trace = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    Vector e(n, 0.0);
    e[c] = 1.0;
    const Vector yc = g->solve_lower(solve_upper_transposed(qr.r, e));
    for (std::size_t k = 0; k < n; ++k)
      y(k, c) = yc[k];
    trace += dot(yc, yc);
  }
  out.trace = trace;
  const double f = trace;
  out.value = preconditioned ? Preconditioner::value(f) : f;

  const bool any_w = request.gradient_w || request.hessian_w_diagonal;
  if (!any_w && !request.gradient_q)
    return out;

  const double dh = preconditioned ? Preconditioner::first(f) : 1.0;
  // vᵢ = M⁻¹jᵢ = R⁻¹G⁻¹qᵢ and jᵢᵀM⁻¹jᵢ = ‖L⁻¹qᵢ‖².
  std::vector<Vector> v(m);
  Vector jv(m);
  Vector qi(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < n; ++c)
      qi[c] = qr.q(i, c);
    const Vector z = g->solve_lower(qi);
    jv[i] = dot(z, z);
    v[i] = solve_upper_triangular(qr.r, g->solve_upper(z));
  }

  if (any_w) {
    // ∂f/∂wᵢ = -vᵀv,  ∂²f/∂wᵢ² = 2 (jᵢᵀv)(vᵀv).
    Vector grad(m), hess(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double vv = dot(v[i], v[i]);
      grad[i] = -vv;
      hess[i] = 2.0 * jv[i] * vv;
    }
    if (preconditioned) {
      const double d2h = Preconditioner::second(f);
      for (std::size_t i = 0; i < m; ++i) {
        hess[i] = d2h * grad[i] * grad[i] + dh * hess[i];
        grad[i] *= dh;
      }
    }
    if (request.gradient_w)
      out.gradient_w = std::move(grad);
    if (request.hessian_w_diagonal)
      out.hessian_w_diagonal = std::move(hess);
  }

  if (request.gradient_q) {
    // ∂f/∂q_k = -Tr(M⁻¹ Ṁ_k M⁻¹) = -2 Σᵢ wᵢ (M⁻¹vᵢ)ᵀ dᵢ,  D_k = ∂J/∂q_k.
    const DenseMatrix inv = y.transpose() * y;
    std::vector<Vector> u(m);
    for (std::size_t i = 0; i < m; ++i)
      if (w[i] != 0.0)
        u[i] = inv * v[i];
    out.gradient_q.resize(control_derivatives.size());
    for (std::size_t k = 0; k < control_derivatives.size(); ++k) {
      const DenseMatrix& d = control_derivatives[k];
      if (d.rows() != m || d.cols() != n)
        throw std::invalid_argument("evaluate_criterion: control derivative has wrong shape");
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (w[i] == 0.0)
          continue;
        for (std::size_t r = 0; r < n; ++r)
          s += w[i] * u[i][r] * d(i, r);
      }
      out.gradient_q[k] = dh * (-2.0 * s);
    }
  }
  return out;
}

CriterionValue evaluate_criterion(const DesignProblem& p, std::span<const double> w,
                                  std::span<const double> q, const CriterionRequest& request) {
  if (w.size() != p.candidates())
    throw std::invalid_argument("evaluate_criterion: weight vector has wrong length");
  const JacobianEvaluation jac = p.jacobian(q, request.gradient_q);
  return evaluate_criterion(jac.jacobian, jac.control_derivatives, w, p.prior_alpha(),
                            p.preconditioned(), request);
}

DenseMatrix information_matrix(const DesignProblem& p, std::span<const double> w,
                               std::span<const double> q) {
  return information_matrix(p.jacobian(q, false).jacobian, w, p.prior_alpha());
}

double objective(const DesignProblem& p, std::span<const double> w, std::span<const double> q) {
  return evaluate_criterion(p, w, q, {}).value;
}

Vector gradient_w(const DesignProblem& p, std::span<const double> w, std::span<const double> q) {
  return evaluate_criterion(p, w, q, {.gradient_w = true}).gradient_w;
}

Vector gradient_q(const DesignProblem& p, std::span<const double> w, std::span<const double> q) {
  if (p.has_fixed_jacobian())
    throw MissingJacobianDerivative("gradient_q: fixed jacobian has no control derivatives");
  return evaluate_criterion(p, w, q, {.gradient_q = true}).gradient_q;
}

Vector hessian_w_diagonal(const DesignProblem& p, std::span<const double> w,
                          std::span<const double> q) {
  return evaluate_criterion(p, w, q, {.hessian_w_diagonal = true}).hessian_w_diagonal;
}

} // namespace oed

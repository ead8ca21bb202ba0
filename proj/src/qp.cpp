#include "oed/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oed/errors.hpp"

namespace oed {

namespace {

enum class BoundState { Free, AtLower, AtUpper };

constexpr double kTiny = std::numeric_limits<double>::min();

void check_dimensions(const QpProblem& p) {
  const std::size_t n = p.linear.size();
  if (p.hessian.rows() != n || p.hessian.cols() != n || p.lower.size() != n ||
      p.upper.size() != n)
    throw std::invalid_argument("QpProblem: inconsistent dimensions");
  if (p.equality && p.equality->a.size() != n)
    throw std::invalid_argument("QpProblem: equality has wrong length");
  for (std::size_t i = 0; i < n; ++i)
    if (!(p.lower[i] <= p.upper[i]))
      throw std::invalid_argument("QpProblem: lower bound exceeds upper bound");
}

Vector gradient(const QpProblem& p, std::span<const double> x) {
  Vector g = p.hessian * x;
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] += p.linear[i];
  return g;
}

struct ReducedStep {
  Vector step;       // full-length, zero outside the free set
  double multiplier; // equality multiplier of the subspace problem
};

// minimize ½pᵀH_FF p + grad_Fᵀp  s.t.  a_Fᵀp = 0, via the Schur complement.
ReducedStep reduced_step(const QpProblem& p, std::span<const std::size_t> free,
                         std::span<const double> grad, bool use_equality) {
  const std::size_t n = p.linear.size();
  const std::size_t nf = free.size();
  ReducedStep out{Vector(n, 0.0), 0.0};
  if (nf == 0)
    return out;

  DenseMatrix hff(nf, nf);
  for (std::size_t c = 0; c < nf; ++c)
    for (std::size_t r = 0; r < nf; ++r)
      hff(r, c) = p.hessian(free[r], free[c]);
  const CholeskyFactor factor = cholesky(hff);

  Vector gf(nf);
  for (std::size_t r = 0; r < nf; ++r)
    gf[r] = grad[free[r]];
  const Vector u = factor.solve(gf);

  Vector pf(nf);
  for (std::size_t r = 0; r < nf; ++r)
    pf[r] = -u[r];

  if (use_equality) {
    Vector af(nf);
    for (std::size_t r = 0; r < nf; ++r)
      af[r] = p.equality->a[free[r]];
    if (norm_inf(af) > 0.0) {
      const Vector s = factor.solve(af);
      const double mu = dot(af, u) / dot(af, s);
      for (std::size_t r = 0; r < nf; ++r)
        pf[r] += mu * s[r];
      out.multiplier = mu;
    }
  }
  for (std::size_t r = 0; r < nf; ++r)
    out.step[free[r]] = pf[r];
  return out;
}

} // namespace

std::size_t default_qp_iteration_limit(const QpProblem& p) {
  std::size_t finite = 0;
  for (std::size_t i = 0; i < p.linear.size(); ++i) {
    finite += std::isfinite(p.lower[i]) ? 1 : 0;
    finite += std::isfinite(p.upper[i]) ? 1 : 0;
  }
  return 10 * p.linear.size() * (1 + finite);
}

QpSolution solve_qp(const QpProblem& p, std::span<const double> x0) {
  check_dimensions(p);
  const std::size_t n = p.linear.size();
  if (x0.size() != n)
    throw std::invalid_argument("solve_qp: starting point has wrong length");
  for (std::size_t i = 0; i < n; ++i)
    if (!(x0[i] >= p.lower[i] && x0[i] <= p.upper[i]))
      throw InfeasibleStart("solve_qp: starting point violates bound " + std::to_string(i));
  if (p.equality) {
    const double r = dot(p.equality->a, x0) - p.equality->b;
    if (std::abs(r) > 1e-10 * std::max(1.0, std::abs(p.equality->b)))
      throw InfeasibleStart("solve_qp: starting point violates the equality");
  }

  const std::size_t limit = p.max_iterations > 0 ? p.max_iterations : default_qp_iteration_limit(p);

  QpSolution sol;
  sol.x.assign(x0.begin(), x0.end());
  Vector& x = sol.x;

  // Start with every bound that x0 touches in the working set, but keep one
  // equality-carrying variable free so the working set stays independent.
  std::vector<BoundState> state(n, BoundState::Free);
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] == p.lower[i])
      state[i] = BoundState::AtLower;
    else if (x[i] == p.upper[i])
      state[i] = BoundState::AtUpper;
  }
  const bool has_eq = p.equality.has_value();
  auto in_support = [&](std::size_t i) { return has_eq && p.equality->a[i] != 0.0; };
  auto free_support_count = [&] {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
      c += (in_support(i) && state[i] == BoundState::Free) ? 1 : 0;
    return c;
  };
  if (has_eq && free_support_count() == 0) {
    for (std::size_t i = n; i-- > 0;)
      if (in_support(i) && p.lower[i] < p.upper[i]) {
        state[i] = BoundState::Free;
        break;
      }
  }

  const double g_scale = std::max(norm_inf(p.linear), kTiny);
  std::size_t degenerate_run = 0;
  bool at_subspace_minimum = false;
  std::vector<std::size_t> free;
  free.reserve(n);

  for (;;) {
    if (sol.iterations >= limit) {
      sol.status = QpStatus::IterationLimit;
      break;
    }
    ++sol.iterations;

    free.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (state[i] == BoundState::Free)
        free.push_back(i);

    const Vector grad = gradient(p, x);
    ReducedStep rs = reduced_step(p, free, grad, has_eq);

    // A single free equality variable cannot move.
    std::size_t pinned = n;
    if (has_eq && free_support_count() == 1) {
      for (std::size_t i : free)
        if (in_support(i)) {
          pinned = i;
          rs.step[i] = 0.0;
        }
    }

    const double step_norm = norm_inf(rs.step);
    const double x_scale = std::max(1.0, norm_inf(x));
    if (at_subspace_minimum || step_norm <= 1e-15 * x_scale) {
      // Stationary on the working set: inspect bound multipliers.
      const double mu = rs.multiplier;
      const double tol = 1e-11 * std::max({g_scale, norm_inf(grad), kTiny});
      std::size_t drop = n;
      double worst = tol;
      for (std::size_t i = 0; i < n; ++i) {
        if (state[i] == BoundState::Free || p.lower[i] == p.upper[i])
          continue;
        const double z = grad[i] - (has_eq ? mu * p.equality->a[i] : 0.0);
        const double violation = state[i] == BoundState::AtLower ? -z : z;
        if (violation > worst) {
          worst = violation;
          drop = i;
        }
      }
      if (drop == n) {
        sol.status = QpStatus::Optimal;
        sol.eq_multiplier = mu;
        break;
      }
      state[drop] = BoundState::Free;
      at_subspace_minimum = false;
      degenerate_run = 0;
      continue;
    }

    // Ratio test over free variables; strict '<' keeps the smallest index.
    double t = 1.0;
    std::size_t block = n;
    for (std::size_t i : free) {
      if (i == pinned)
        continue;
      const double pi = rs.step[i];
      double ratio = std::numeric_limits<double>::infinity();
      if (pi < 0.0 && std::isfinite(p.lower[i]))
        ratio = (p.lower[i] - x[i]) / pi;
      else if (pi > 0.0 && std::isfinite(p.upper[i]))
        ratio = (p.upper[i] - x[i]) / pi;
      if (ratio < t) {
        t = std::max(ratio, 0.0);
        block = i;
      }
    }

    for (std::size_t i : free)
      x[i] = std::clamp(x[i] + t * rs.step[i], p.lower[i], p.upper[i]);

    if (block != n) {
      const bool to_lower = rs.step[block] < 0.0;
      x[block] = to_lower ? p.lower[block] : p.upper[block];
      state[block] = to_lower ? BoundState::AtLower : BoundState::AtUpper;
      at_subspace_minimum = false;
      if (t == 0.0) {
        if (++degenerate_run > n) {
          sol.status = QpStatus::IterationLimit;
          break;
        }
      } else {
        degenerate_run = 0;
      }
    } else {
      at_subspace_minimum = true;
      degenerate_run = 0;
    }
  }

  // Multipliers at the returned point.
  const Vector grad = gradient(p, x);
  sol.bound_multipliers.assign(n, 0.0);
  sol.active_set.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == BoundState::Free)
      continue;
    sol.active_set.push_back(i);
    sol.bound_multipliers[i] = grad[i] - (has_eq ? sol.eq_multiplier * p.equality->a[i] : 0.0);
  }
  return sol;
}

double qp_kkt_residual(const QpProblem& p, const QpSolution& s) {
  const std::size_t n = p.linear.size();
  const Vector grad = gradient(p, s.x);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = p.equality ? p.equality->a[i] : 0.0;
    const double z = s.bound_multipliers[i];
    res = std::max(res, std::abs(grad[i] - a * s.eq_multiplier - z));
    res = std::max(res, std::max(p.lower[i] - s.x[i], 0.0));
    res = std::max(res, std::max(s.x[i] - p.upper[i], 0.0));
    if (p.lower[i] == p.upper[i])
      continue;
    if (z > 0.0)
      res = std::max(res, z * (s.x[i] - p.lower[i])); // needs x at lower
    if (z < 0.0)
      res = std::max(res, -z * (p.upper[i] - s.x[i])); // needs x at upper
  }
  if (p.equality)
    res = std::max(res, std::abs(dot(p.equality->a, s.x) - p.equality->b));
  return res;
}

Vector project_feasible(const std::optional<LinearEquality>& equality,
                        std::span<const double> lower, std::span<const double> upper,
                        std::span<const double> x) {
  const std::size_t n = x.size();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("project_feasible: inconsistent dimensions");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i]))
      throw EmptyFeasibleSet("project_feasible: empty box");
    y[i] = std::clamp(x[i], lower[i], upper[i]);
  }
  if (!equality)
    return y;

  const Vector& a = equality->a;
  const double b = equality->b;
  double lo_sum = 0.0, hi_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] > 0.0) {
      lo_sum += a[i] * lower[i];
      hi_sum += a[i] * upper[i];
    } else if (a[i] < 0.0) {
      lo_sum += a[i] * upper[i];
      hi_sum += a[i] * lower[i];
    }
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(b));
  if (b < lo_sum - slack || b > hi_sum + slack)
    throw EmptyFeasibleSet("project_feasible: equality unattainable within bounds");

  for (std::size_t pass = 0; pass <= n + 1; ++pass) {
    double scale = std::abs(b);
    for (std::size_t i = 0; i < n; ++i)
      scale = std::max(scale, std::abs(a[i] * y[i]));
    const double r = b - dot(a, y);
    if (std::abs(r) <= 1e-15 * std::max(1.0, scale))
      break;
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dir = r * a[i];
      if ((dir > 0.0 && y[i] < upper[i]) || (dir < 0.0 && y[i] > lower[i]))
        denom += a[i] * a[i];
    }
    if (denom == 0.0)
      break;
    for (std::size_t i = 0; i < n; ++i) {
      const double dir = r * a[i];
      if ((dir > 0.0 && y[i] < upper[i]) || (dir < 0.0 && y[i] > lower[i]))
        y[i] = std::clamp(y[i] + r * a[i] / denom, lower[i], upper[i]);
    }
  }
  return y;
}

} // namespace oed

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oed/criterion.hpp"
#include "oed/design_nlp.hpp"
#include "oed/errors.hpp"
#include "oed/sqp.hpp"
#include "oracles.hpp"

using namespace oed;

namespace {

DenseMatrix random_matrix(std::size_t m, std::size_t n, RngStream& rng) {
  DenseMatrix a(m, n);
  for (double& v : a.data())
    v = rng.uniform(-1.0, 1.0);
  return a;
}

Vector random_weights(std::size_t m, RngStream& rng) {
  Vector w(m);
  for (double& v : w)
    v = rng.uniform(0.2, 1.0);
  return w;
}

double rel_err(const Vector& a, const Vector& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

// Fourth-order central differences from two central-difference gradients. A
// plain h = 1e-6 stencil loses about ε·f/h to roundoff, which reaches 1e-6 of
// the gradient once a strong prior makes f/‖∇f‖ ~ 1/α large.
Vector richardson_gradient(const ScalarFunction& f, const Vector& x, double h = 1e-3) {
  const Vector a = finite_difference_gradient(f, x, h);
  const Vector b = finite_difference_gradient(f, x, 2.0 * h);
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    r[i] = (4.0 * a[i] - b[i]) / 3.0;
  return r;
}

SqpReport solve_design(const DesignProblem& p, const Vector& w0, double tol_d = 1e-9) {
  SqpOptions opt;
  opt.tol_d = tol_d;
  return solve(make_design_nlp(p), w0, opt);
}

Vector uniform_start(const DesignProblem& p) {
  return Vector(p.candidates(), p.m_max() / static_cast<double>(p.candidates()));
}

} // namespace

TEST(InformationMatrix, Examples) {
  const DenseMatrix i2 = DenseMatrix::identity(2);
  const Vector ones{1, 1};
  EXPECT_EQ(information_matrix(i2, ones, std::nullopt), i2);
  EXPECT_EQ(information_matrix(i2, ones, 1.0), DenseMatrix::diagonal(Vector{2, 2}));

  const double r = 1.0 / std::sqrt(2.0);
  const DenseMatrix v{{r, r}, {r, -r}};
  const DenseMatrix m = information_matrix(v, Vector{0.5, 0.5}, 0.25);
  const DenseMatrix expect = oracle::naive_information_matrix(v, Vector{0.5, 0.5}, 4.0);
  EXPECT_LT(max_abs_diff(m, expect), 1e-15);
}

TEST(InformationMatrix, ExactlySymmetric) {
  RngStream rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const DenseMatrix j = random_matrix(15, 5, rng);
    const DenseMatrix m = information_matrix(j, random_weights(15, rng), 0.3);
    for (std::size_t a = 0; a < 5; ++a)
      for (std::size_t b = 0; b < 5; ++b)
        ASSERT_EQ(m(a, b), m(b, a));
  }
}

TEST(Criterion, IdentityExamples) {
  const DenseMatrix i2 = DenseMatrix::identity(2);
  const CriterionValue c =
      evaluate_criterion(i2, {}, Vector{1, 1}, std::nullopt, false,
                         {.gradient_w = true, .hessian_w_diagonal = true});
  EXPECT_NEAR(c.value, 2.0, 1e-15);
  EXPECT_NEAR(c.gradient_w[0], -1.0, 1e-15);
  EXPECT_NEAR(c.gradient_w[1], -1.0, 1e-15);
  EXPECT_NEAR(c.hessian_w_diagonal[0], 2.0, 1e-15);
  EXPECT_NEAR(c.hessian_w_diagonal[1], 2.0, 1e-15);
}

TEST(Criterion, ModelInstanceValues) {
  const DenseMatrix i2 = DenseMatrix::identity(2);
  const Vector w{0.5, 0.5};
  const CriterionValue u = evaluate_criterion(i2, {}, w, 1.0, false, {});
  EXPECT_NEAR(u.value, 4.0 / 3.0, 1e-14);
  const CriterionValue p = evaluate_criterion(i2, {}, w, 1.0, true, {});
  EXPECT_NEAR(p.value, -9.0 / 16.0, 1e-14);
  EXPECT_NEAR(p.trace, 4.0 / 3.0, 1e-14);
}

TEST(Criterion, TraceMatchesExplicitInverse) {
  RngStream rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    const DenseMatrix j = random_matrix(12, 4, rng);
    const Vector w = random_weights(12, rng);
    const std::optional<double> alpha = rep % 2 ? std::optional<double>(0.1) : std::nullopt;
    const double ref = oracle::explicit_trace_of_inverse(
        oracle::naive_information_matrix(j, w, alpha ? 1.0 / *alpha : 0.0));
    const CriterionValue c = evaluate_criterion(j, {}, w, alpha, false, {});
    EXPECT_NEAR(c.trace, ref, 1e-11 * ref);
  }
}

TEST(Criterion, SignOfObjective) {
  RngStream rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const DenseMatrix j = random_matrix(10, 3, rng);
    const Vector w = random_weights(10, rng);
    const std::optional<double> alpha = rep % 2 ? std::optional<double>(1e-3) : std::nullopt;
    EXPECT_GT(evaluate_criterion(j, {}, w, alpha, false, {}).value, 0.0);
    EXPECT_LT(evaluate_criterion(j, {}, w, alpha, true, {}).value, 0.0);
  }
}

TEST(Criterion, SingularDesignThrows) {
  const DenseMatrix i2 = DenseMatrix::identity(2);
  EXPECT_THROW(evaluate_criterion(i2, {}, Vector{1, 0}, std::nullopt, false, {}),
               SingularInformationMatrix);
  EXPECT_NO_THROW(evaluate_criterion(i2, {}, Vector{1, 0}, 1.0, false, {}));
  EXPECT_THROW(evaluate_criterion(i2, {}, Vector{1, NAN}, 1.0, false, {}), NonFiniteValue);
}

TEST(Criterion, GradientMatchesFiniteDifferences) {
  RngStream rng(2024);
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rep % 5;
    const std::size_t m = n + 1 + static_cast<std::size_t>(rng.uniform() * (20 - n - 1));
    const DenseMatrix j = random_matrix(m, n, rng);
    const std::optional<double> alpha =
        rep % 2 ? std::optional<double>(std::pow(10.0, rng.uniform(-4.0, 0.0))) : std::nullopt;
    const bool pre = (rep / 2) % 2 == 1;
    const DesignProblem p = DesignProblem::fixed(j, 1.0, alpha, pre);
    const Vector w = random_weights(m, rng);
    const Vector g = gradient_w(p, w, {});
    const Vector fd = richardson_gradient(
        [&](std::span<const double> x) { return objective(p, x, {}); }, w);
    EXPECT_LT(rel_err(g, fd), 1e-6) << "instance " << rep << " m=" << m << " n=" << n;
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(Criterion, HessianDiagonalMatchesSecondDifferences) {
  RngStream rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const DenseMatrix j = random_matrix(8, 3, rng);
    const bool pre = rep % 2 == 1;
    const DesignProblem p = DesignProblem::fixed(j, 2.0, 0.5, pre);
    const Vector w = random_weights(8, rng);
    const Vector h = hessian_w_diagonal(p, w, {});
    const double f0 = objective(p, w, {});
    const double step = 1e-4;
    Vector fd(8);
    for (std::size_t i = 0; i < 8; ++i) {
      Vector x = w;
      x[i] = w[i] + step;
      const double fp = objective(p, x, {});
      x[i] = w[i] - step;
      const double fm = objective(p, x, {});
      fd[i] = (fp - 2.0 * f0 + fm) / (step * step);
    }
    EXPECT_LT(rel_err(h, fd), 1e-4) << rep;
  }
}

TEST(Criterion, ControlGradientZeroWhenJacobianIsConstant) {
  const DenseMatrix j{{1, 0}, {0, 1}, {1, 1}};
  const DesignProblem p = DesignProblem::with_controls(
      [j](std::span<const double>, bool) {
        return JacobianEvaluation{j, {DenseMatrix(3, 2), DenseMatrix(3, 2)}};
      },
      3, 2, {{0.0, 1.0}, {0.0, 1.0}}, 2.0, std::nullopt, false);
  const Vector g = gradient_q(p, Vector{1, 1, 0.5}, Vector{0.5, 0.5});
  EXPECT_EQ(g, (Vector{0.0, 0.0}));
}

TEST(Criterion, ScaledIdentityControlGradient) {
  // J(q) = q·I₂: f = 2/q², ∂f/∂q = -4/q³.
  const DesignProblem p = DesignProblem::with_controls(
      [](std::span<const double> q, bool with_derivatives) {
        JacobianEvaluation e{DenseMatrix::diagonal(Vector{q[0], q[0]}), {}};
        if (with_derivatives)
          e.control_derivatives.push_back(DenseMatrix::identity(2));
        return e;
      },
      2, 2, {{0.5, 2.0}}, 1.0, std::nullopt, false);
  const Vector w{1, 1};
  EXPECT_NEAR(objective(p, w, Vector{1.0}), 2.0, 1e-15);
  EXPECT_NEAR(gradient_q(p, w, Vector{1.0})[0], -4.0, 1e-14);
  EXPECT_NEAR(gradient_q(p, w, Vector{1.5})[0], -4.0 / 3.375, 1e-14);
}

TEST(Criterion, MissingDerivatives) {
  const DesignProblem fixed = DesignProblem::fixed(DenseMatrix::identity(2), 1.0, 1.0, false);
  EXPECT_THROW(gradient_q(fixed, Vector{1, 1}, {}), MissingJacobianDerivative);

  const DesignProblem lazy = DesignProblem::with_controls(
      [](std::span<const double>, bool) {
        return JacobianEvaluation{DenseMatrix::identity(2), {}};
      },
      2, 2, {{0.0, 1.0}}, 1.0, std::nullopt, false);
  EXPECT_THROW(gradient_q(lazy, Vector{1, 1}, Vector{0.5}), MissingJacobianDerivative);
}

TEST(DesignProblem, RejectsInvalidSettings) {
  const DenseMatrix i2 = DenseMatrix::identity(2);
  EXPECT_THROW(DesignProblem::fixed(i2, 2.0, std::nullopt, false), std::invalid_argument);
  EXPECT_THROW(DesignProblem::fixed(i2, 1.0, -1.0, false), std::invalid_argument);
  EXPECT_THROW(DesignProblem::with_controls(
                   [](std::span<const double>, bool) { return JacobianEvaluation{}; }, 2, 2,
                   {{1.0, 1.0}}, 1.0, std::nullopt, false),
               std::invalid_argument);
}

TEST(Relaxation, LowerBoundsIntegerDesigns) {
  RngStream rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const DenseMatrix j = random_matrix(6, 2, rng);
    const DesignProblem p = DesignProblem::fixed(j, 2.0, std::nullopt, false);
    double best = std::numeric_limits<double>::infinity();
    int designs = 0;
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = a + 1; b < 6; ++b) {
        Vector w(6, 0.0);
        w[a] = w[b] = 1.0;
        best = std::min(best, objective(p, w, {}));
        ++designs;
      }
    ASSERT_EQ(designs, 15);
    const SqpReport r = solve_design(p, uniform_start(p));
    ASSERT_EQ(r.status, SqpStatus::Converged) << r.detail;
    EXPECT_LE(r.objective, best * (1.0 + 1e-12)) << rep;
  }
}

TEST(Relaxation, PreconditioningKeepsMinimizer) {
  RngStream rng(99);
  for (int rep = 0; rep < 5; ++rep) {
    const DenseMatrix j = random_matrix(6, 3, rng);
    const DesignProblem u = DesignProblem::fixed(j, 2.0, 1.0, false);
    const DesignProblem p = u.with_preconditioning(true);
    const SqpReport ru = solve_design(u, uniform_start(u));
    const SqpReport rp = solve_design(p, uniform_start(p));
    ASSERT_EQ(ru.status, SqpStatus::Converged) << ru.detail;
    ASSERT_EQ(rp.status, SqpStatus::Converged) << rp.detail;
    double diff = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
      diff = std::max(diff, std::abs(ru.solution[i] - rp.solution[i]));
    EXPECT_LT(diff, 1e-6) << rep;
  }
}

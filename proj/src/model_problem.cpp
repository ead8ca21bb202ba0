#include "oed/model_problem.hpp"

#include <cmath>
#include <stdexcept>

#include "oed/criterion.hpp"
#include "oed/errors.hpp"

namespace oed {

namespace {

void check(const ModelProblem& mp) {
  if (!(mp.alpha > 0.0))
    throw std::invalid_argument("ModelProblem: alpha must be positive");
}

struct RawDerivatives {
  double value, first, second;
};

// f, f', f'' of the unpreconditioned reduced objective. The first derivative
// is written as a product so that it carries no cancellation near w = ½:
//   f'(w) = α³(2w-1)(2+α) / ((1+wα)²(1+(1-w)α)²).
RawDerivatives raw(double alpha, double w) {
  const double p = 1.0 + w * alpha;
  const double q = 1.0 + (1.0 - w) * alpha;
  const double a2 = alpha * alpha;
  const double value = 2.0 * alpha - w * a2 / p - (1.0 - w) * a2 / q;
  const double first = a2 * alpha * (2.0 * w - 1.0) * (2.0 + alpha) / (p * p * q * q);
  const double second = 2.0 * a2 * alpha * (1.0 / (p * p * p) + 1.0 / (q * q * q));
  return {value, first, second};
}

} // namespace

double reduced_objective(const ModelProblem& mp, double w) {
  check(mp);
  const double f = raw(mp.alpha, w).value;
  return mp.preconditioned ? Preconditioner::value(f) : f;
}

ReducedDerivatives reduced_derivatives(const ModelProblem& mp, double w) {
  check(mp);
  const RawDerivatives d = raw(mp.alpha, w);
  if (!mp.preconditioned)
    return {d.first, d.second};
  const double h1 = Preconditioner::first(d.value);
  const double h2 = Preconditioner::second(d.value);
  return {h1 * d.first, h2 * d.first * d.first + h1 * d.second};
}

double analytic_condition_number(const ModelProblem& mp) {
  check(mp);
  if (mp.preconditioned)
    return 2.0;
  const double a = mp.alpha;
  const double c = 1.0 + 0.5 * a;
  return c * c * c / (2.0 * a * a * a);
}

double solve_stationarity(const ModelProblem& mp, double target) {
  check(mp);
  double lo = 0.0;
  double hi = 1.0;
  double flo = reduced_derivatives(mp, lo).first - target;
  const double fhi = reduced_derivatives(mp, hi).first - target;
  if (flo == 0.0)
    return lo;
  if (fhi == 0.0)
    return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw RootNotBracketed("solve_stationarity: f' - target does not change sign on [0, 1]");

  double w = 0.5;
  for (int it = 0; it < 200; ++it) {
    const ReducedDerivatives d = reduced_derivatives(mp, w);
    const double r = d.first - target;
    if (r == 0.0)
      return w;
    if ((r < 0.0) == (flo < 0.0)) {
      lo = w;
      flo = r;
    } else {
      hi = w;
    }
    double next = d.second != 0.0 ? w - r / d.second : 0.5 * (lo + hi);
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    if (std::abs(next - w) <= 1e-14 || hi - lo <= 1e-14)
      return next;
    w = next;
  }
  return w;
}

double empirical_condition_number(const ModelProblem& mp, double eps) {
  check(mp);
  if (eps <= 0.0)
    eps = 1e-6 * std::abs(reduced_derivatives(mp, 0.5).second);
  const double w_star = solve_stationarity(mp, 0.0);
  const double plus = solve_stationarity(mp, eps);
  const double minus = solve_stationarity(mp, -eps);
  return std::abs(plus - minus) / (2.0 * eps * std::abs(w_star));
}

} // namespace oed

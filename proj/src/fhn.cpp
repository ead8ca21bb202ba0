#include "oed/fhn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "oed/errors.hpp"

namespace oed::fhn {

namespace {

// Augmented state: x (2), ∂x/∂p column-wise (2×4), ∂x/∂q column-wise (2×3).
constexpr std::size_t kSpOffset = kStates;
constexpr std::size_t kSqOffset = kSpOffset + kStates * kParameters;
constexpr std::size_t kDim = kSqOffset + kStates * kControls;
constexpr double kMinStep = 1e-12;
constexpr std::size_t kMaxSteps = 10'000'000;

using State = std::array<double, kDim>;

State initial_state(const Model& model) {
  State y{};
  y[0] = model.controls[1];
  y[1] = model.controls[2];
  // ∂x(0)/∂x₀ = I₂; the current I does not enter the initial value.
  y[kSqOffset + 2] = 1.0;
  y[kSqOffset + 5] = 1.0;
  return y;
}

State rhs(const Parameters& p, double current, const State& y) {
  const double x1 = y[0];
  const double x2 = y[1];
  State dy{};
  dy[0] = x1 - p.z * x1 * x1 * x1 - x2 + current;
  dy[1] = p.a * (x1 + p.b + p.c * x2);

  // Variational equations Ṡ = φ_x S + φ_θ.
  const double f11 = 1.0 - 3.0 * p.z * x1 * x1;
  const double f12 = -1.0;
  const double f21 = p.a;
  const double f22 = p.a * p.c;
  const std::array<std::array<double, 2>, kParameters> dphi_dp{{
      {-x1 * x1 * x1, 0.0},
      {0.0, x1 + p.b + p.c * x2},
      {0.0, p.a},
      {0.0, p.a * x2},
  }};
  for (std::size_t j = 0; j < kParameters; ++j) {
    const double s1 = y[kSpOffset + 2 * j];
    const double s2 = y[kSpOffset + 2 * j + 1];
    dy[kSpOffset + 2 * j] = f11 * s1 + f12 * s2 + dphi_dp[j][0];
    dy[kSpOffset + 2 * j + 1] = f21 * s1 + f22 * s2 + dphi_dp[j][1];
  }
  for (std::size_t k = 0; k < kControls; ++k) {
    const double s1 = y[kSqOffset + 2 * k];
    const double s2 = y[kSqOffset + 2 * k + 1];
    dy[kSqOffset + 2 * k] = f11 * s1 + f12 * s2 + (k == 0 ? 1.0 : 0.0);
    dy[kSqOffset + 2 * k + 1] = f21 * s1 + f22 * s2;
  }
  return dy;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

struct StepResult {
  State y;
  State err;
};

StepResult dopri_step(const Parameters& p, double current, const State& y, double h) {
  auto stage = [&](auto&& combine) {
    State t;
    for (std::size_t i = 0; i < kDim; ++i)
      t[i] = y[i] + h * combine(i);
    return rhs(p, current, t);
  };
  const State k1 = rhs(p, current, y);
  const State k2 = stage([&](std::size_t i) { return a21 * k1[i]; });
  const State k3 = stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
  const State k4 =
      stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
  const State k5 = stage(
      [&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
  const State k6 = stage([&](std::size_t i) {
    return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
  });
  StepResult r;
  for (std::size_t i = 0; i < kDim; ++i)
    r.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  const State k7 = rhs(p, current, r.y);
  for (std::size_t i = 0; i < kDim; ++i)
    r.err[i] =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  return r;
}

double error_norm(const State& y, const State& y_new, const State& err, const Tolerances& tol) {
  double s = 0.0;
  for (std::size_t i = 0; i < kDim; ++i) {
    const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(y_new[i]));
    const double e = err[i] / sc;
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(kDim));
}

void push_sample(SensitivityTrajectory& traj, double t, const State& y) {
  traj.times.push_back(t);
  traj.states.push_back({y[0], y[1]});
  DenseMatrix sp(kStates, kParameters);
  for (std::size_t j = 0; j < kParameters; ++j)
    for (std::size_t s = 0; s < kStates; ++s)
      sp(s, j) = y[kSpOffset + 2 * j + s];
  DenseMatrix sq(kStates, kControls);
  for (std::size_t k = 0; k < kControls; ++k)
    for (std::size_t s = 0; s < kStates; ++s)
      sq(s, k) = y[kSqOffset + 2 * k + s];
  traj.parameter_sensitivities.push_back(std::move(sp));
  traj.control_sensitivities.push_back(std::move(sq));
}

void check_finite(const State& y) {
  for (double v : y)
    if (!std::isfinite(v))
      throw StepSizeUnderflow("fhn: solution blew up");
}

std::vector<double> resolve_outputs(const Model& model, std::span<const double> output_times) {
  std::vector<double> out(output_times.begin(), output_times.end());
  if (out.empty())
    out = model.measurement_times();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(out[i] > (i == 0 ? 0.0 : out[i - 1])))
      throw std::invalid_argument("fhn: output times must be positive and increasing");
  return out;
}

} // namespace

std::vector<Interval> control_bounds() { return {{-1.0, 0.5}, {-5.0, 5.0}, {-5.0, 5.0}}; }

std::vector<double> Model::measurement_times() const {
  std::vector<double> t(measurement_count);
  for (std::size_t i = 0; i < measurement_count; ++i)
    t[i] = spacing * static_cast<double>(i + 1);
  return t;
}

SensitivityTrajectory integrate_with_sensitivities(const Model& model, const Tolerances& tol,
                                                   std::span<const double> output_times,
                                                   StepSequence* record) {
  if (!(tol.rel > 0.0) || !(tol.abs > 0.0))
    throw std::invalid_argument("fhn: tolerances must be positive");
  const std::vector<double> outputs = resolve_outputs(model, output_times);
  const double current = model.controls[0];

  SensitivityTrajectory traj;
  State y = initial_state(model);
  double t = 0.0;
  push_sample(traj, t, y);
  if (record)
    record->clear();

  double h = 1e-2;
  std::size_t steps = 0;
  for (double t_out : outputs) {
    while (t < t_out) {
      if (++steps > kMaxSteps)
        throw StepSizeUnderflow("fhn: step budget exhausted");
      const bool landing = h >= t_out - t;
      const double h_try = landing ? t_out - t : h;
      const StepResult r = dopri_step(model.parameters, current, y, h_try);
      const double err = error_norm(y, r.y, r.err, tol);
      const double fac =
          err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        y = r.y;
        check_finite(y);
        t = landing ? t_out : t + h_try;
        if (record)
          record->push_back(h_try);
        h = landing ? std::max(h, h_try * fac) : h_try * fac;
      } else {
        h = h_try * fac;
        if (h < kMinStep || !std::isfinite(err))
          throw StepSizeUnderflow("fhn: step size underflow at t = " + std::to_string(t));
      }
    }
    push_sample(traj, t, y);
  }
  return traj;
}

SensitivityTrajectory replay_with_sensitivities(const Model& model, const StepSequence& steps,
                                                std::span<const double> output_times) {
  const std::vector<double> outputs = resolve_outputs(model, output_times);
  const double current = model.controls[0];

  SensitivityTrajectory traj;
  State y = initial_state(model);
  double t = 0.0;
  push_sample(traj, t, y);
  std::size_t next = 0;
  for (double h : steps) {
    if (next >= outputs.size())
      break;
    y = dopri_step(model.parameters, current, y, h).y;
    check_finite(y);
    t += h;
    if (std::abs(t - outputs[next]) <= 1e-12 * outputs[next]) {
      t = outputs[next++];
      push_sample(traj, t, y);
    }
  }
  if (next != outputs.size())
    throw std::invalid_argument("fhn: step sequence does not reach every output time");
  return traj;
}

SensitivityTrajectory integrate_fixed_step(const Model& model, double h, double t_end) {
  if (!(h > 0.0) || !(t_end > 0.0))
    throw std::invalid_argument("fhn: step and end time must be positive");
  const auto n = static_cast<std::size_t>(std::llround(t_end / h));
  if (n == 0 || std::abs(static_cast<double>(n) * h - t_end) > 1e-12 * t_end)
    throw std::invalid_argument("fhn: step must divide the interval");
  SensitivityTrajectory traj;
  State y = initial_state(model);
  push_sample(traj, 0.0, y);
  for (std::size_t i = 0; i < n; ++i) {
    y = dopri_step(model.parameters, model.controls[0], y, h).y;
    check_finite(y);
  }
  push_sample(traj, t_end, y);
  return traj;
}

DenseMatrix assemble_jacobian(const SensitivityTrajectory& traj, std::size_t measurements) {
  if (traj.parameter_sensitivities.size() < measurements + 1)
    throw std::invalid_argument("fhn: trajectory too short for the measurement grid");
  DenseMatrix j(kStates * measurements, kParameters);
  for (std::size_t i = 0; i < measurements; ++i) {
    const DenseMatrix& sp = traj.parameter_sensitivities[i + 1];
    for (std::size_t s = 0; s < kStates; ++s)
      for (std::size_t c = 0; c < kParameters; ++c)
        j(kStates * i + s, c) = sp(s, c);
  }
  return j;
}

std::vector<DenseMatrix> control_derivatives(
    const std::function<DenseMatrix(std::span<const double>)>& jacobian_of,
    std::span<const double> q, double relative_step) {
  std::vector<DenseMatrix> out;
  out.reserve(q.size());
  std::vector<double> qp(q.begin(), q.end());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double h = relative_step * (1.0 + std::abs(q[k]));
    qp[k] = q[k] + h;
    const DenseMatrix plus = jacobian_of(qp);
    qp[k] = q[k] - h;
    const DenseMatrix minus = jacobian_of(qp);
    qp[k] = q[k];
    DenseMatrix d = plus - minus;
    for (double& v : d.data())
      v /= 2.0 * h;
    out.push_back(std::move(d));
  }
  return out;
}

JacobianEvaluation design_jacobian(const Model& model, std::span<const double> q,
                                   const Tolerances& tol, bool with_derivatives) {
  if (q.size() != kControls)
    throw std::invalid_argument("fhn: expected three controls");
  Model nominal = model;
  std::copy(q.begin(), q.end(), nominal.controls.begin());
  const std::vector<double> times = model.measurement_times();

  StepSequence steps;
  JacobianEvaluation out;
  out.jacobian = assemble_jacobian(
      integrate_with_sensitivities(nominal, tol, times, with_derivatives ? &steps : nullptr),
      model.measurement_count);
  if (!with_derivatives)
    return out;

  out.control_derivatives = control_derivatives(
      [&](std::span<const double> qk) {
        Model perturbed = nominal;
        std::copy(qk.begin(), qk.end(), perturbed.controls.begin());
        return assemble_jacobian(replay_with_sensitivities(perturbed, steps, times),
                                 model.measurement_count);
      },
      q, kReplayStep);
  return out;
}

DesignProblem make_design_problem(const Model& model, double m_max, bool preconditioned,
                                  const Tolerances& tol) {
  auto provider = [model, tol](std::span<const double> q, bool with_derivatives) {
    return design_jacobian(model, q, tol, with_derivatives);
  };
  return DesignProblem::with_controls(provider, model.candidates(), kParameters, control_bounds(),
                                      m_max, std::nullopt, preconditioned);
}

std::array<double, kControls> initial_guess_filter(const Model& model, RngStream& rng,
                                                   double threshold, const Tolerances& tol) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("fhn: filter threshold must be positive");
  const auto bounds = control_bounds();
  const std::vector<double> ones(model.candidates(), 1.0);
  for (int draw = 0; draw < 1000; ++draw) {
    std::array<double, kControls> q{};
    for (std::size_t k = 0; k < kControls; ++k)
      q[k] = rng.uniform(bounds[k].low, bounds[k].high);
    try {
      const DenseMatrix j = design_jacobian(model, q, tol, false).jacobian;
      if (trace_of_inverse(information_matrix(j, ones, std::nullopt)) <= threshold)
        return q;
    } catch (const Error&) {
      // Singular or blown-up candidates are simply redrawn.
    }
  }
  throw FilterExhausted("fhn: no acceptable initial controls in 1000 draws");
}

void write_trajectory_csv(std::ostream& os, const SensitivityTrajectory& traj,
                          bool with_sensitivities) {
  static constexpr const char* kParamNames[kParameters] = {"z", "a", "b", "c"};
  static constexpr const char* kControlNames[kControls] = {"I", "x01", "x02"};
  os << "t,x1,x2";
  if (with_sensitivities) {
    for (const char* name : kParamNames)
      os << ",dx1_d" << name << ",dx2_d" << name;
    for (const char* name : kControlNames)
      os << ",dx1_d" << name << ",dx2_d" << name;
  }
  os << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    put(traj.times[i]);
    for (double x : traj.states[i]) {
      os << ',';
      put(x);
    }
    if (with_sensitivities) {
      for (std::size_t j = 0; j < kParameters; ++j)
        for (std::size_t s = 0; s < kStates; ++s) {
          os << ',';
          put(traj.parameter_sensitivities[i](s, j));
        }
      for (std::size_t k = 0; k < kControls; ++k)
        for (std::size_t s = 0; s < kStates; ++s) {
          os << ',';
          put(traj.control_sensitivities[i](s, k));
        }
    }
    os << '\n';
  }
}

} // namespace oed::fhn

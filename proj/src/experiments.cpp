#include "oed/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "oed/design_nlp.hpp"
#include "oed/errors.hpp"
#include "oed/model_problem.hpp"

namespace oed::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s, const char* what) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw ConfigError(std::string("cannot parse ") + what + ": '" + tmp + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(std::string("cannot parse ") + what + ": '" + std::string(s) + "'");
  return v;
}

std::vector<char> variants(PreconditionMode mode) {
  switch (mode) {
  case PreconditionMode::On:
    return {'p'};
  case PreconditionMode::Off:
    return {'u'};
  case PreconditionMode::Both:
    return {'u', 'p'};
  }
  return {};
}

int severity(SqpStatus s) {
  switch (s) {
  case SqpStatus::Converged:
    return 0;
  case SqpStatus::MaxIterations:
    return 1;
  case SqpStatus::EvaluationFailure:
    return 2;
  case SqpStatus::QpIterationLimit:
    return 3;
  }
  return 3;
}

SqpStatus worst(SqpStatus a, SqpStatus b) { return severity(a) >= severity(b) ? a : b; }

double trace_at(const DenseMatrix& j, std::span<const double> w,
                const std::optional<double>& alpha) {
  try {
    return evaluate_criterion(j, {}, w, alpha, false, {}).trace;
  } catch (const Error&) {
    return kNaN;
  }
}

double mean(const std::vector<double>& v) {
  if (v.empty())
    return kNaN;
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2)
    return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v)
    s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void fill_speedups(std::vector<TrialRecord>& pair) {
  const TrialRecord* u = nullptr;
  const TrialRecord* p = nullptr;
  for (const auto& r : pair)
    (r.variant == 'u' ? u : p) = &r;
  const double ratio = (u && p && p->iterations > 0)
                           ? static_cast<double>(u->iterations) / static_cast<double>(p->iterations)
                           : kNaN;
  for (auto& r : pair)
    r.speedup = ratio;
}

template <typename T>
std::vector<T> flatten(std::vector<std::vector<T>>&& parts) {
  std::vector<T> out;
  for (auto& p : parts)
    for (auto& r : p)
      out.push_back(std::move(r));
  return out;
}

} // namespace

std::string_view to_string(ExperimentId id) noexcept {
  switch (id) {
  case ExperimentId::Exp1:
    return "exp1";
  case ExperimentId::Exp2:
    return "exp2";
  case ExperimentId::Exp3:
    return "exp3";
  case ExperimentId::ModelSweep:
    return "model-sweep";
  }
  return "unknown";
}

std::optional<ExperimentId> parse_experiment_id(std::string_view s) noexcept {
  for (ExperimentId id :
       {ExperimentId::Exp1, ExperimentId::Exp2, ExperimentId::Exp3, ExperimentId::ModelSweep})
    if (to_string(id) == s)
      return id;
  return std::nullopt;
}

std::vector<double> parse_alpha_grid(std::string_view spec) {
  if (spec.starts_with("log:")) {
    const auto parts = split(spec.substr(4), ':');
    if (parts.size() != 3)
      throw ConfigError("alpha grid must look like log:lo:hi:count");
    const double lo = parse_double(parts[0], "alpha grid lower end");
    const double hi = parse_double(parts[1], "alpha grid upper end");
    const auto count = static_cast<std::size_t>(parse_u64(parts[2], "alpha grid count"));
    if (!(lo > 0.0) || !(hi >= lo) || count == 0)
      throw ConfigError("alpha grid needs 0 < lo <= hi and count >= 1");
    std::vector<double> grid(count);
    if (count == 1) {
      grid[0] = hi;
      return grid;
    }
    const double llo = std::log10(lo);
    const double lhi = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i) {
      const double e = llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1);
      grid[i] = std::pow(10.0, e);
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
  }
  std::vector<double> grid;
  for (auto part : split(spec, ','))
    grid.push_back(parse_double(part, "alpha"));
  return grid;
}

std::vector<std::size_t> parse_size_list(std::string_view spec) {
  std::vector<std::size_t> sizes;
  for (auto part : split(spec, ','))
    sizes.push_back(static_cast<std::size_t>(parse_u64(part, "size")));
  return sizes;
}

ExperimentConfig default_config(ExperimentId id, bool paper_scale) {
  ExperimentConfig cfg;
  cfg.id = id;
  switch (id) {
  case ExperimentId::Exp1:
    cfg.trials = paper_scale ? 200 : 20;
    cfg.alphas = parse_alpha_grid(paper_scale ? "log:1e-6:1:11" : "log:1e-6:1:5");
    break;
  case ExperimentId::Exp2:
    cfg.trials = paper_scale ? 200 : 20;
    if (paper_scale)
      cfg.sizes = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    else
      cfg.sizes = {1, 2, 3, 4};
    break;
  case ExperimentId::Exp3:
    cfg.trials = 5;
    cfg.m_max = 30.0;
    cfg.measurement_count = paper_scale ? 100 : 40;
    break;
  case ExperimentId::ModelSweep:
    cfg.trials = 1;
    cfg.alphas = parse_alpha_grid("log:1e-4:1:9");
    break;
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1)
    throw ConfigError("trials must be >= 1");
  if (!(cfg.solver.tol_d > 0.0))
    throw ConfigError("tol-d must be positive");
  if (cfg.solver.max_iterations < 1)
    throw ConfigError("sqp-max-iter must be >= 1");
  if (!(cfg.m_max > 0.0))
    throw ConfigError("m_max must be positive");
  switch (cfg.id) {
  case ExperimentId::Exp1:
  case ExperimentId::ModelSweep:
    if (cfg.alphas.empty())
      throw ConfigError("alpha grid is empty");
    for (double a : cfg.alphas)
      if (!(a > 0.0 && a <= 1.0))
        throw ConfigError("alpha values must lie in (0, 1]");
    if (cfg.id == ExperimentId::Exp1 &&
        !(cfg.m_max < static_cast<double>(cfg.base_candidates)))
      throw ConfigError("m_max must be below the number of candidates");
    break;
  case ExperimentId::Exp2:
    if (cfg.sizes.empty())
      throw ConfigError("size list is empty");
    for (std::size_t n : cfg.sizes)
      if (n < 1)
        throw ConfigError("sizes must be >= 1");
    if (!(cfg.m_max < static_cast<double>(cfg.base_candidates * cfg.sizes.front())))
      throw ConfigError("m_max must be below the number of candidates");
    break;
  case ExperimentId::Exp3:
    if (cfg.measurement_count < 1)
      throw ConfigError("measurement count must be >= 1");
    if (!(cfg.m_max < 2.0 * static_cast<double>(cfg.measurement_count)))
      throw ConfigError("m_max must be below the number of candidates");
    if (!(cfg.filter_threshold > 0.0))
      throw ConfigError("filter threshold must be positive");
    break;
  }
  if (cfg.base_candidates < cfg.parameters)
    throw ConfigError("need at least as many candidates as parameters");
}

// ---------------------------------------------------------------------------
// CSV

std::string csv_header() {
  return "experiment,trial,param,variant,iterations,status,objective,distance,speedup,"
         "qp_iterations,content_hash";
}

std::string to_csv_row(const TrialRecord& r) {
  std::ostringstream os;
  os << r.experiment << ',' << r.trial << ',' << format_double(r.param) << ',' << r.variant << ','
     << r.iterations << ',' << to_string(r.status) << ',' << format_double(r.objective) << ','
     << format_double(r.distance) << ',' << format_double(r.speedup) << ',' << r.qp_iterations
     << ',' << r.content_hash;
  return os.str();
}

TrialRecord parse_csv_row(std::string_view row) {
  const auto f = split(row, ',');
  if (f.size() != 11)
    throw ConfigError("csv row has " + std::to_string(f.size()) + " fields, expected 11");
  TrialRecord r;
  r.experiment = std::string(f[0]);
  if (!parse_experiment_id(r.experiment))
    throw ConfigError("unknown experiment id in csv row");
  r.trial = static_cast<std::size_t>(parse_u64(f[1], "trial"));
  r.param = parse_double(f[2], "param");
  if (f[3] != "u" && f[3] != "p")
    throw ConfigError("variant must be u or p");
  r.variant = f[3][0];
  r.iterations = static_cast<std::size_t>(parse_u64(f[4], "iterations"));
  const auto status = parse_sqp_status(f[5]);
  if (!status)
    throw ConfigError("unknown status in csv row");
  r.status = *status;
  r.objective = parse_double(f[6], "objective");
  r.distance = parse_double(f[7], "distance");
  r.speedup = parse_double(f[8], "speedup");
  r.qp_iterations = static_cast<std::size_t>(parse_u64(f[9], "qp_iterations"));
  r.content_hash = parse_u64(f[10], "content_hash");
  return r;
}

void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << csv_header() << '\n';
  for (const auto& r : records)
    os << to_csv_row(r) << '\n';
}

void write_model_sweep_csv(std::ostream& os, const std::vector<ModelSweepRow>& rows) {
  os << "alpha,kappa_analytic_u,kappa_empirical_u,kappa_analytic_p,kappa_empirical_p\n";
  for (const auto& r : rows)
    os << format_double(r.alpha) << ',' << format_double(r.kappa_analytic_u) << ','
       << format_double(r.kappa_empirical_u) << ',' << format_double(r.kappa_analytic_p) << ','
       << format_double(r.kappa_empirical_p) << '\n';
}

void write_design_csv(std::ostream& os, const DesignExport& d) {
  os << "# I=" << format_double(d.controls[0]) << " x01=" << format_double(d.controls[1])
     << " x02=" << format_double(d.controls[2]) << " objective=" << format_double(d.objective)
     << '\n';
  os << "time,observable,weight\n";
  for (const auto& p : d.points)
    os << format_double(p.time) << ",x" << (p.observable + 1) << ',' << format_double(p.weight)
       << '\n';
}

void write_trace_csv(std::ostream& os, const DesignExport& d) {
  os << "variant,iteration,direction_norm,merit,step_length,objective,qp_iterations\n";
  auto emit = [&](char v, const std::vector<SqpIterationRecord>& trace) {
    for (std::size_t k = 0; k < trace.size(); ++k)
      os << v << ',' << (k + 1) << ',' << format_double(trace[k].direction_norm) << ','
         << format_double(trace[k].merit) << ',' << format_double(trace[k].step_length) << ','
         << format_double(trace[k].objective) << ',' << trace[k].qp_iterations << '\n';
  };
  emit('u', d.trace_u);
  emit('p', d.trace_p);
}

std::uint64_t content_hash(std::span<const double> a, std::span<const double> b) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::span<const double> v) {
    for (double x : v) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &x, sizeof x);
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    }
  };
  feed(a);
  feed(b);
  return h;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t)
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
        }
      }
    });
  for (auto& th : threads)
    th.join();
  if (error)
    std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Summaries

const GroupSummary* SweepResult::find(double param, char variant) const {
  for (const auto& g : groups)
    if (g.param == param && g.variant == variant)
      return &g;
  return nullptr;
}

std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records) {
  std::vector<GroupSummary> groups;
  std::vector<std::vector<double>> iters, dists;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const GroupSummary& g) {
      return g.param == r.param && g.variant == r.variant;
    });
    std::size_t idx = static_cast<std::size_t>(it - groups.begin());
    if (it == groups.end()) {
      groups.push_back({r.param, r.variant});
      iters.emplace_back();
      dists.emplace_back();
    }
    GroupSummary& g = groups[idx];
    ++g.count;
    iters[idx].push_back(static_cast<double>(r.iterations));
    if (!std::isnan(r.distance))
      dists[idx].push_back(r.distance);
    if (r.status == SqpStatus::QpIterationLimit)
      g.qp_limit_percent += 1.0;
    if (r.status == SqpStatus::Converged)
      ++g.converged;
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    GroupSummary& g = groups[i];
    g.mean_iterations = mean(iters[i]);
    g.std_iterations = sample_std(iters[i]);
    g.qp_limit_percent = 100.0 * g.qp_limit_percent / static_cast<double>(g.count);
    g.mean_distance = dists[i].empty() ? kNaN : mean(dists[i]);
  }
  return groups;
}

PairedTable paired_table(const std::vector<TrialRecord>& records) {
  PairedTable t;
  std::vector<double> kp, ku, ratio;
  for (const auto& r : records) {
    if (r.variant != 'p')
      continue;
    const auto u = std::find_if(records.begin(), records.end(), [&](const TrialRecord& o) {
      return o.variant == 'u' && o.trial == r.trial && o.param == r.param;
    });
    if (u == records.end())
      continue;
    kp.push_back(static_cast<double>(r.iterations));
    ku.push_back(static_cast<double>(u->iterations));
    ratio.push_back(static_cast<double>(u->iterations) / static_cast<double>(r.iterations));
    if (r.iterations < u->iterations)
      ++t.preconditioned_wins;
    else if (u->iterations < r.iterations)
      ++t.unpreconditioned_wins;
  }
  t.mean_kp = mean(kp);
  t.mean_ku = mean(ku);
  t.mean_ratio = mean(ratio);
  t.std_ratio = sample_std(ratio);
  return t;
}

// ---------------------------------------------------------------------------
// Experiments

Vector exp1_start(std::size_t m, std::size_t m_max, bool reverse) {
  Vector w(m, 0.0);
  for (std::size_t i = 0; i < std::min(m, m_max); ++i)
    w[reverse ? m - 1 - i : i] = 1.0;
  return w;
}

SweepResult run_exp1(const ExperimentConfig& cfg) {
  validate(cfg);
  const RngStream master(cfg.seed);
  const std::size_t m = cfg.base_candidates;
  const auto budget = static_cast<std::size_t>(std::llround(cfg.m_max));
  const Vector start_a = exp1_start(m, budget, false);
  const Vector start_b = exp1_start(m, budget, true);
  const auto vars = variants(cfg.mode);

  std::vector<DenseMatrix> matrices(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    RngStream rng = master.split(t);
    matrices[t] = random_design_matrix(m, cfg.parameters, cfg.cond, true, rng);
  }

  const std::size_t tasks = cfg.trials * cfg.alphas.size();
  std::vector<std::vector<TrialRecord>> parts(tasks);
  parallel_for(tasks, [&](std::size_t task) {
    const std::size_t t = task / cfg.alphas.size();
    const double alpha = cfg.alphas[task % cfg.alphas.size()];
    const DenseMatrix& j = matrices[t];
    const double alpha_arr[1] = {alpha};
    const std::uint64_t hash = content_hash(j.data(), alpha_arr);
    for (char v : vars) {
      const auto problem = DesignProblem::fixed(j, cfg.m_max, alpha, v == 'p');
      const NlpSpec nlp = make_design_nlp(problem);
      const SqpReport ra = solve(nlp, start_a, cfg.solver);
      const SqpReport rb = solve(nlp, start_b, cfg.solver);
      TrialRecord rec;
      rec.experiment = "exp1";
      rec.trial = t;
      rec.param = alpha;
      rec.variant = v;
      rec.iterations = std::max(ra.iterations, rb.iterations);
      rec.status = worst(ra.status, rb.status);
      rec.objective = trace_at(j, ra.solution, alpha);
      Vector diff(m);
      for (std::size_t i = 0; i < m; ++i)
        diff[i] = ra.solution[i] - rb.solution[i];
      rec.distance = norm_inf(diff);
      rec.qp_iterations = ra.qp_iterations + rb.qp_iterations;
      rec.content_hash = hash;
      parts[task].push_back(rec);
    }
    fill_speedups(parts[task]);
  });

  SweepResult out;
  out.records = flatten(std::move(parts));
  out.groups = summarize(out.records);
  return out;
}

SweepResult run_exp2(const ExperimentConfig& cfg) {
  validate(cfg);
  const RngStream master(cfg.seed);
  const auto vars = variants(cfg.mode);

  const std::size_t tasks = cfg.sizes.size() * cfg.trials;
  std::vector<std::vector<TrialRecord>> parts(tasks);
  parallel_for(tasks, [&](std::size_t task) {
    const std::size_t n = cfg.sizes[task / cfg.trials];
    const std::size_t t = task % cfg.trials;
    const std::size_t m = cfg.base_candidates * n;
    RngStream rng = master.split(n).split(t);
    const DenseMatrix j = random_design_matrix(m, cfg.parameters, cfg.cond, false, rng);

    const Vector uniform(m, cfg.m_max / static_cast<double>(m));
    const LinearEquality eq{Vector(m, 1.0), cfg.m_max};
    const Vector x0 = project_feasible(eq, Vector(m, 0.0), Vector(m, 1.0), uniform);
    const std::uint64_t hash = content_hash(j.data(), x0);

    for (char v : vars) {
      const auto problem = DesignProblem::fixed(j, cfg.m_max, std::nullopt, v == 'p');
      const SqpReport r = solve(make_design_nlp(problem), x0, cfg.solver);
      TrialRecord rec;
      rec.experiment = "exp2";
      rec.trial = t;
      rec.param = static_cast<double>(n);
      rec.variant = v;
      rec.iterations = r.iterations;
      rec.status = r.status;
      rec.objective = trace_at(j, r.solution, std::nullopt);
      rec.distance = kNaN;
      rec.qp_iterations = r.qp_iterations;
      rec.content_hash = hash;
      parts[task].push_back(rec);
    }
    fill_speedups(parts[task]);
  });

  SweepResult out;
  out.records = flatten(std::move(parts));
  out.groups = summarize(out.records);
  return out;
}

Exp3Result run_exp3(const ExperimentConfig& cfg) {
  validate(cfg);
  const RngStream master(cfg.seed);
  const auto vars = variants(cfg.mode);

  fhn::Model model;
  model.measurement_count = cfg.measurement_count;
  const std::size_t m = model.candidates();

  struct RepeatResult {
    std::vector<TrialRecord> records;
    std::vector<SqpReport> reports;
  };
  std::vector<RepeatResult> parts(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    RngStream rng = master.split(t);
    const auto q0 = fhn::initial_guess_filter(model, rng, cfg.filter_threshold, cfg.tolerances);
    Vector x0(m, cfg.m_max / static_cast<double>(m));
    x0.insert(x0.end(), q0.begin(), q0.end());
    const std::uint64_t hash = content_hash(x0);

    for (char v : vars) {
      const auto problem = fhn::make_design_problem(model, cfg.m_max, v == 'p', cfg.tolerances);
      const SqpReport r = solve(make_design_nlp(problem), x0, cfg.solver);
      TrialRecord rec;
      rec.experiment = "exp3";
      rec.trial = t;
      rec.param = static_cast<double>(t);
      rec.variant = v;
      rec.iterations = r.iterations;
      rec.status = r.status;
      rec.objective = kNaN;
      try {
        const auto w = weights_of(problem, r.solution);
        const auto q = controls_of(problem, r.solution);
        rec.objective = trace_at(fhn::design_jacobian(model, q, cfg.tolerances, false).jacobian,
                                 w, std::nullopt);
      } catch (const Error&) {
      }
      rec.distance = kNaN;
      rec.qp_iterations = r.qp_iterations;
      rec.content_hash = hash;
      parts[t].records.push_back(rec);
      parts[t].reports.push_back(r);
    }
    fill_speedups(parts[t].records);
  });

  Exp3Result out;
  for (const auto& p : parts)
    for (const auto& r : p.records)
      out.records.push_back(r);
  out.table = paired_table(out.records);

  // Best preconditioned design, preferring converged runs.
  const RepeatResult* best = nullptr;
  std::size_t best_idx = 0;
  auto better = [](const TrialRecord& a, const TrialRecord* b) {
    if (std::isnan(a.objective))
      return false;
    if (!b)
      return true;
    const bool ca = a.status == SqpStatus::Converged;
    const bool cb = b->status == SqpStatus::Converged;
    if (ca != cb)
      return ca;
    return a.objective < b->objective;
  };
  const TrialRecord* best_rec = nullptr;
  const char want = std::find(vars.begin(), vars.end(), 'p') != vars.end() ? 'p' : 'u';
  for (const auto& p : parts)
    for (std::size_t i = 0; i < p.records.size(); ++i)
      if (p.records[i].variant == want && better(p.records[i], best_rec)) {
        best_rec = &p.records[i];
        best = &p;
        best_idx = i;
      }
  if (best) {
    const SqpReport& r = best->reports[best_idx];
    DesignExport d;
    std::copy(r.solution.begin() + static_cast<std::ptrdiff_t>(m), r.solution.end(),
              d.controls.begin());
    d.objective = best_rec->objective;
    for (std::size_t i = 0; i < m; ++i)
      if (r.solution[i] > 1e-6)
        d.points.push_back({model.spacing * static_cast<double>(i / fhn::kStates + 1),
                            i % fhn::kStates, r.solution[i]});
    fhn::Model design_model = model;
    design_model.controls = d.controls;
    std::vector<double> grid;
    const double t_end = model.spacing * static_cast<double>(model.measurement_count);
    for (double t = 0.5; t <= t_end + 1e-9; t += 0.5)
      grid.push_back(t);
    d.trajectory = fhn::integrate_with_sensitivities(design_model, cfg.tolerances, grid);
    for (std::size_t i = 0; i < best->records.size(); ++i)
      (best->records[i].variant == 'p' ? d.trace_p : d.trace_u) = best->reports[i].trace;
    out.design = std::move(d);
  }
  return out;
}

std::vector<ModelSweepRow> run_model_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<ModelSweepRow> rows;
  for (double alpha : cfg.alphas) {
    const ModelProblem u{alpha, false};
    const ModelProblem p{alpha, true};
    rows.push_back({alpha, analytic_condition_number(u), empirical_condition_number(u),
                    analytic_condition_number(p), empirical_condition_number(p)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Human-readable output

void print_summary(std::ostream& os, const SweepResult& r, std::string_view param_name) {
  char line[256];
  std::snprintf(line, sizeof line, "%12s %3s %6s %10s %10s %8s %10s %6s\n",
                std::string(param_name).c_str(), "var", "count", "mean_k", "std_k", "qp_lim%",
                "mean_dist", "conv");
  os << line;
  for (const auto& g : r.groups) {
    std::snprintf(line, sizeof line, "%12.4g %3c %6zu %10.2f %10.2f %8.1f %10.3g %6zu\n", g.param,
                  g.variant, g.count, g.mean_iterations, g.std_iterations, g.qp_limit_percent,
                  g.mean_distance, g.converged);
    os << line;
  }
}

void print_table(std::ostream& os, const Exp3Result& r) {
  char line[256];
  os << "score  <k_p>   <k_u>   <k_u/k_p>  sigma\n";
  std::snprintf(line, sizeof line, "%zu:%zu  %6.1f  %6.1f  %9.2f  %5.2f\n",
                r.table.preconditioned_wins, r.table.unpreconditioned_wins, r.table.mean_kp,
                r.table.mean_ku, r.table.mean_ratio, r.table.std_ratio);
  os << line;
  if (r.design) {
    std::snprintf(line, sizeof line,
                  "best design: I=%.4f x01=%.4f x02=%.4f  Tr(M^-1)=%.6g  points=%zu\n",
                  r.design->controls[0], r.design->controls[1], r.design->controls[2],
                  r.design->objective, r.design->points.size());
    os << line;
  }
}

void print_model_sweep(std::ostream& os, const std::vector<ModelSweepRow>& rows) {
  char line[256];
  std::snprintf(line, sizeof line, "%12s %16s %16s %10s %10s\n", "alpha", "kappa_u", "kappa_u_emp",
                "kappa_p", "kappa_p_emp");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%12.4g %16.8g %16.8g %10.6f %10.6f\n", r.alpha,
                  r.kappa_analytic_u, r.kappa_empirical_u, r.kappa_analytic_p,
                  r.kappa_empirical_p);
    os << line;
  }
}

} // namespace oed::experiments

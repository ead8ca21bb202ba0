// Command-line harness for the design experiments.
//
//   oed exp1 --trials 20 --alphas log:1e-6:1:5 --out exp1.csv
//   oed exp2 --sizes 1,2,3,4
//   oed exp3 --out exp3.csv        (also writes exp3.design.csv, .trajectory.csv, .trace.csv)
//   oed model-sweep --alphas log:1e-4:1:9
//
// Exit codes: 0 success, 2 configuration error, 3 internal error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "oed/errors.hpp"
#include "oed/experiments.hpp"

namespace ex = oed::experiments;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

struct Flags {
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> alphas;
  std::optional<std::string> sizes;
  std::string precondition = "both";
  std::string out;
  bool paper_scale = false;
  std::optional<std::size_t> qp_max_iter;
  std::optional<std::size_t> sqp_max_iter;
  std::optional<double> tol_d;
  std::optional<std::size_t> measurements;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--trials", f.trials, "Number of random matrices / repeats");
  cmd->add_option("--seed", f.seed, "Master seed (64-bit)");
  cmd->add_option("--precondition", f.precondition, "on, off or both")
      ->check(CLI::IsMember({"on", "off", "both"}));
  cmd->add_option("--out", f.out, "CSV output path");
  cmd->add_flag("--paper-scale", f.paper_scale, "Use the full published problem sizes");
  cmd->add_option("--qp-max-iter", f.qp_max_iter, "QP iteration limit (default 10n(1+bounds))");
  cmd->add_option("--sqp-max-iter", f.sqp_max_iter, "SQP iteration limit (default 500)");
  cmd->add_option("--tol-d", f.tol_d, "Search-direction length tolerance (default 1e-8)");
}

ex::ExperimentConfig build_config(ex::ExperimentId id, const Flags& f) {
  ex::ExperimentConfig cfg = ex::default_config(id, f.paper_scale);
  if (f.trials)
    cfg.trials = *f.trials;
  if (f.seed)
    cfg.seed = *f.seed;
  if (f.alphas)
    cfg.alphas = ex::parse_alpha_grid(*f.alphas);
  if (f.sizes)
    cfg.sizes = ex::parse_size_list(*f.sizes);
  if (f.measurements)
    cfg.measurement_count = *f.measurements;
  cfg.mode = f.precondition == "on"    ? ex::PreconditionMode::On
             : f.precondition == "off" ? ex::PreconditionMode::Off
                                       : ex::PreconditionMode::Both;
  cfg.output_path = f.out;
  if (f.qp_max_iter)
    cfg.solver.qp_max_iterations = *f.qp_max_iter;
  if (f.sqp_max_iter)
    cfg.solver.max_iterations = *f.sqp_max_iter;
  if (f.tol_d)
    cfg.solver.tol_d = *f.tol_d;
  ex::validate(cfg);
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os)
    throw oed::ConfigError("cannot open output file '" + path + "'");
  return os;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? path.substr(0, dot) : path) + suffix;
}

void run(ex::ExperimentId id, const Flags& flags) {
  const ex::ExperimentConfig cfg = build_config(id, flags);
  switch (id) {
  case ex::ExperimentId::Exp1:
  case ex::ExperimentId::Exp2: {
    const ex::SweepResult r = id == ex::ExperimentId::Exp1 ? ex::run_exp1(cfg) : ex::run_exp2(cfg);
    if (!cfg.output_path.empty()) {
      auto os = open_output(cfg.output_path);
      ex::write_records_csv(os, r.records);
    }
    ex::print_summary(std::cout, r, id == ex::ExperimentId::Exp1 ? "alpha" : "n");
    break;
  }
  case ex::ExperimentId::Exp3: {
    const ex::Exp3Result r = ex::run_exp3(cfg);
    if (!cfg.output_path.empty()) {
      auto os = open_output(cfg.output_path);
      ex::write_records_csv(os, r.records);
      if (r.design) {
        auto ds = open_output(sibling(cfg.output_path, ".design.csv"));
        ex::write_design_csv(ds, *r.design);
        auto ts = open_output(sibling(cfg.output_path, ".trajectory.csv"));
        oed::fhn::write_trajectory_csv(ts, r.design->trajectory, false);
        auto tr = open_output(sibling(cfg.output_path, ".trace.csv"));
        ex::write_trace_csv(tr, *r.design);
      }
    }
    ex::print_table(std::cout, r);
    break;
  }
  case ex::ExperimentId::ModelSweep: {
    const auto rows = ex::run_model_sweep(cfg);
    if (!cfg.output_path.empty()) {
      auto os = open_output(cfg.output_path);
      ex::write_model_sweep_csv(os, rows);
    }
    ex::print_model_sweep(std::cout, rows);
    break;
  }
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed A-optimal experimental design: preconditioned SQP experiments"};
  app.require_subcommand(1);

  Flags flags;
  auto* exp1 = app.add_subcommand("exp1", "Prior-information sweep");
  add_common_flags(exp1, flags);
  exp1->add_option("--alphas", flags.alphas, "Comma list or log:lo:hi:count");

  auto* exp2 = app.add_subcommand("exp2", "Problem-size sweep");
  add_common_flags(exp2, flags);
  exp2->add_option("--sizes", flags.sizes, "Comma list of multipliers n (m = 50n)");

  auto* exp3 = app.add_subcommand("exp3", "FitzHugh-Nagumo design with controls");
  add_common_flags(exp3, flags);
  exp3->add_option("--measurements", flags.measurements, "Number of measurement times T");

  auto* sweep = app.add_subcommand("model-sweep", "Condition numbers of the two-weight model");
  add_common_flags(sweep, flags);
  sweep->add_option("--alphas", flags.alphas, "Comma list or log:lo:hi:count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto id = ex::parse_experiment_id(app.get_subcommands().front()->get_name());
    run(*id, flags);
  } catch (const oed::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oed/fhn.hpp"
#include "oed/sqp.hpp"

namespace oed::experiments {

enum class ExperimentId { Exp1, Exp2, Exp3, ModelSweep };
enum class PreconditionMode { On, Off, Both };

std::string_view to_string(ExperimentId id) noexcept;
std::optional<ExperimentId> parse_experiment_id(std::string_view s) noexcept;

struct ExperimentConfig {
  ExperimentId id = ExperimentId::Exp1;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::vector<double> alphas;     ///< exp1 prior weights, model-sweep grid
  std::vector<std::size_t> sizes; ///< exp2 candidate multipliers n (m = 50n)
  PreconditionMode mode = PreconditionMode::Both;
  std::string output_path;        ///< CSV destination; empty writes nothing
  SqpOptions solver;

  std::size_t base_candidates = 50; ///< m for exp1, and the per-n block for exp2
  std::size_t parameters = 7;
  double m_max = 20.0;
  double cond = 1e4;
  std::size_t measurement_count = 40; ///< exp3 T
  double filter_threshold = 100.0;
  fhn::Tolerances tolerances;
};

/// Desk-scale defaults, or the full published sizes with `paper_scale`.
ExperimentConfig default_config(ExperimentId id, bool paper_scale = false);

/// Throws ConfigError on invalid settings.
void validate(const ExperimentConfig& cfg);

/// "1,0.1,0.01" or "log:lo:hi:count" (count points equidistant in log10).
/// Throws ConfigError on malformed input.
std::vector<double> parse_alpha_grid(std::string_view spec);
std::vector<std::size_t> parse_size_list(std::string_view spec);

struct TrialRecord {
  std::string experiment;
  std::size_t trial = 0;
  double param = 0.0; ///< α (exp1), n (exp2), repeat index (exp3)
  char variant = 'u'; ///< 'u' unpreconditioned, 'p' preconditioned
  std::size_t iterations = 0;
  SqpStatus status = SqpStatus::Converged;
  double objective = 0.0; ///< Tr(M⁻¹) at the returned design
  double distance = 0.0;  ///< exp1: max-norm between the two-start solutions; NaN elsewhere
  double speedup = 0.0;   ///< k_u / k_p of the pair; NaN when only one variant ran
  std::size_t qp_iterations = 0;
  std::uint64_t content_hash = 0; ///< hash of the problem data and starting point
};

std::string csv_header();
std::string to_csv_row(const TrialRecord& r);
/// Throws ConfigError when the row does not match the schema.
TrialRecord parse_csv_row(std::string_view row);

/// Statistics for one (parameter, variant) group.
struct GroupSummary {
  double param = 0.0;
  char variant = 'u';
  std::size_t count = 0;
  double mean_iterations = 0.0;
  double std_iterations = 0.0;
  double qp_limit_percent = 0.0;
  double mean_distance = 0.0;
  std::size_t converged = 0;
};

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<GroupSummary> groups;
  [[nodiscard]] const GroupSummary* find(double param, char variant) const;
};

/// Table-1 style statistics over paired FHN runs.
struct PairedTable {
  std::size_t preconditioned_wins = 0; ///< repeats with k_p < k_u
  std::size_t unpreconditioned_wins = 0;
  double mean_kp = 0.0;
  double mean_ku = 0.0;
  double mean_ratio = 0.0;
  double std_ratio = 0.0;
};

struct MeasurementPoint {
  double time;
  std::size_t observable; ///< 0 for x₁, 1 for x₂
  double weight;
};

struct DesignExport {
  std::array<double, fhn::kControls> controls{};
  double objective = 0.0; ///< Tr(M⁻¹)
  std::vector<MeasurementPoint> points;
  fhn::SensitivityTrajectory trajectory;
  std::vector<SqpIterationRecord> trace_p;
  std::vector<SqpIterationRecord> trace_u;
};

struct Exp3Result {
  std::vector<TrialRecord> records;
  PairedTable table;
  std::optional<DesignExport> design;
};

struct ModelSweepRow {
  double alpha;
  double kappa_analytic_u;
  double kappa_empirical_u;
  double kappa_analytic_p;
  double kappa_empirical_p;
};

/// First m_max entries one, the rest zero ("forward"), or the mirror image.
Vector exp1_start(std::size_t m, std::size_t m_max, bool reverse);

SweepResult run_exp1(const ExperimentConfig& cfg);
SweepResult run_exp2(const ExperimentConfig& cfg);
Exp3Result run_exp3(const ExperimentConfig& cfg);
std::vector<ModelSweepRow> run_model_sweep(const ExperimentConfig& cfg);

std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records);
PairedTable paired_table(const std::vector<TrialRecord>& records);

void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records);
void write_model_sweep_csv(std::ostream& os, const std::vector<ModelSweepRow>& rows);
void write_design_csv(std::ostream& os, const DesignExport& design);
void write_trace_csv(std::ostream& os, const DesignExport& design);

void print_summary(std::ostream& os, const SweepResult& r, std::string_view param_name);
void print_table(std::ostream& os, const Exp3Result& r);
void print_model_sweep(std::ostream& os, const std::vector<ModelSweepRow>& rows);

/// FNV-1a over raw bytes of doubles, used for the content hash.
std::uint64_t content_hash(std::span<const double> a, std::span<const double> b = {});

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. The
/// first exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace oed::experiments

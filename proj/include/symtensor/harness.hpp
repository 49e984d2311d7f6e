#ifndef SYMTENSOR_HARNESS_HPP
#define SYMTENSOR_HARNESS_HPP

#include "symtensor/als.hpp"
#include "symtensor/pcls.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace symtensor {

/// A synthetic problem: the tensor and the model that generated it.
struct Problem {
  DenseTensor<double> tensor;
  FactorModel<double> model;
};

/// I x R matrix whose columns have expected pairwise cosine `collinearity`:
/// column r = sqrt(1 - rho) g_r + sqrt(rho) z, z shared across columns.
Matrix<double> random_factor(Index rows, Index cols, Rng& rng, double collinearity = 0.0);

Problem gen_partial_sym3(Index I, Index K, Index R, Rng& rng, double collinearity = 0.0);
Problem gen_full_sym4(Index I, Index R, Rng& rng, double collinearity = 0.0);
Problem gen_partial_sym4_case1(Index I, Index J, Index R, Rng& rng, double collinearity = 0.0);
Problem gen_partial_sym4_case2(Index I, Index J, Index K, Index R, Rng& rng,
                               double collinearity = 0.0);

/// Generator for a symmetric pattern with dims given per tensor mode.
Problem generate(SymmetryPattern pattern, const std::vector<Index>& dims, Index rank, Rng& rng,
                 double collinearity = 0.0);

enum class SolverKind { Als, Pcls };
std::string_view solver_name(SolverKind s);
std::optional<SolverKind> parse_solver(std::string_view s);

/// (rows, cols) of the distinct factors a pattern carries, from tensor dims.
std::vector<std::pair<Index, Index>> factor_shapes(SymmetryPattern pattern,
                                                   const std::vector<Index>& dims, Index rank);

/// Runs the solver matching `pattern` on `x` from the distinct-factor
/// initialization `init` (ALS seeds repeated modes with the same matrix).
SolverResult<double> run_solver(SolverKind solver, SymmetryPattern pattern,
                                const DenseTensor<double>& x,
                                const std::vector<Matrix<double>>& init, const SolverConfig& cfg);

/// Deterministic per-run seed derived from a base seed and a run index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

struct ExperimentSpec {
  std::string name = "experiment";
  SymmetryPattern pattern = SymmetryPattern::PartialSym3_12;
  std::vector<Index> dims;
  Index rank = 1;
  int seeds = 1;
  InitStrategy::Kind init = InitStrategy::Kind::RandomGaussian;
  double sigma = 0.1;
  double collinearity = 0.0;
  std::vector<SolverKind> solvers{SolverKind::Als, SolverKind::Pcls};
  SolverConfig config;
  std::uint64_t base_seed = 1;
  bool fresh_problem_per_run = false;  // otherwise one shared tensor
  std::optional<std::filesystem::path> problem_file;  // load instead of generating
  std::optional<std::filesystem::path> output_dir;    // traces + summary.json
  int threads = 1;                                    // 0 = hardware concurrency

  void validate() const;
};

struct RunRecord {
  int run_index = 0;
  std::uint64_t seed = 0;
  std::string solver;
  int iterations = 0;
  double final_residual = 0.0;
  double wall_time = 0.0;
  StopReason stop_reason = StopReason::MaxIters;
  std::string trace_file;
  ConvergenceTrace trace;
};

struct SolverAggregate {
  std::string solver;
  std::string population = "converged";
  int total = 0;
  int converged = 0;
  double convergence_fraction = 0.0;
  double mean_iterations = 0.0;
  double median_iterations = 0.0;
  double mean_wall_time = 0.0;
  double median_wall_time = 0.0;
};

struct RunSummary {
  std::string experiment;
  std::string pattern;
  std::vector<Index> dims;
  Index rank = 0;
  std::vector<RunRecord> runs;
  std::vector<SolverAggregate> aggregates;

  const SolverAggregate* aggregate(std::string_view solver) const;
  std::vector<const RunRecord*> runs_of(std::string_view solver) const;
};

double mean(const std::vector<double>& v);
double median(std::vector<double> v);

/// Aggregates over converged runs per solver.
std::vector<SolverAggregate> aggregate_runs(const std::vector<RunRecord>& runs,
                                            const std::vector<SolverKind>& solvers);

RunSummary run_experiment(const ExperimentSpec& spec);

/// Named presets modelled on the paper-style examples; `scale` shrinks dims.
std::vector<ExperimentSpec> preset(std::string_view name, double scale = 1.0);

}  // namespace symtensor

#endif  // SYMTENSOR_HARNESS_HPP

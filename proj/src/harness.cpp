#include "symtensor/harness.hpp"
#include "symtensor/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace symtensor {

Matrix<double> random_factor(Index rows, Index cols, Rng& rng, double collinearity) {
  detail::require(collinearity >= 0.0 && collinearity < 1.0,
                  "random_factor: collinearity must lie in [0, 1)");
  Matrix<double> m = gaussian_matrix(rows, cols, rng);
  if (collinearity > 0.0) {
    const Vector<double> shared = gaussian_matrix(rows, 1, rng).col(0);
    m = std::sqrt(1.0 - collinearity) * m +
        std::sqrt(collinearity) * shared * Vector<double>::Ones(cols).transpose();
  }
  return m;
}

namespace {

Problem make_problem(SymmetryPattern p, std::vector<Matrix<double>> factors) {
  FactorModel<double> model(p, std::move(factors));
  auto tensor = reconstruct(model);
  return {std::move(tensor), std::move(model)};
}

}  // namespace

Problem gen_partial_sym3(Index I, Index K, Index R, Rng& rng, double collinearity) {
  detail::require(R >= 1, "gen_partial_sym3: rank must be >= 1");
  auto a = random_factor(I, R, rng, collinearity);
  auto c = random_factor(K, R, rng, collinearity);
  return make_problem(SymmetryPattern::PartialSym3_12, {std::move(a), std::move(c)});
}

Problem gen_full_sym4(Index I, Index R, Rng& rng, double collinearity) {
  detail::require(R >= 1, "gen_full_sym4: rank must be >= 1");
  return make_problem(SymmetryPattern::FullSym4, {random_factor(I, R, rng, collinearity)});
}

Problem gen_partial_sym4_case1(Index I, Index J, Index R, Rng& rng, double collinearity) {
  detail::require(R >= 1, "gen_partial_sym4_case1: rank must be >= 1");
  auto a = random_factor(I, R, rng, collinearity);
  auto b = random_factor(J, R, rng, collinearity);
  return make_problem(SymmetryPattern::PartialSym4_13_24, {std::move(a), std::move(b)});
}

Problem gen_partial_sym4_case2(Index I, Index J, Index K, Index R, Rng& rng,
                               double collinearity) {
  detail::require(R >= 1, "gen_partial_sym4_case2: rank must be >= 1");
  auto a = random_factor(I, R, rng, collinearity);
  auto b = random_factor(J, R, rng, collinearity);
  auto c = random_factor(K, R, rng, collinearity);
  return make_problem(SymmetryPattern::PartialSym4_13,
                      {std::move(a), std::move(b), std::move(c)});
}

Problem generate(SymmetryPattern pattern, const std::vector<Index>& dims, Index rank, Rng& rng,
                 double collinearity) {
  detail::require(static_cast<int>(dims.size()) == tensor_order(pattern),
                  "generate: dims do not match the order of pattern " +
                      std::string(pattern_name(pattern)));
  for (Index d : dims) detail::require(d > 0, "generate: dims must be positive");
  switch (pattern) {
    case SymmetryPattern::PartialSym3_12:
      detail::require(dims[0] == dims[1], "generate: psym3 needs I x I x K dims");
      return gen_partial_sym3(dims[0], dims[2], rank, rng, collinearity);
    case SymmetryPattern::PartialSym4_13_24:
      detail::require(dims[0] == dims[2] && dims[1] == dims[3],
                      "generate: psym4-case1 needs I x J x I x J dims");
      return gen_partial_sym4_case1(dims[0], dims[1], rank, rng, collinearity);
    case SymmetryPattern::PartialSym4_13:
      detail::require(dims[0] == dims[2], "generate: psym4-case2 needs I x J x I x K dims");
      return gen_partial_sym4_case2(dims[0], dims[1], dims[3], rank, rng, collinearity);
    case SymmetryPattern::FullSym4:
      detail::require(dims[0] == dims[1] && dims[1] == dims[2] && dims[2] == dims[3],
                      "generate: fsym4 needs I x I x I x I dims");
      return gen_full_sym4(dims[0], rank, rng, collinearity);
    case SymmetryPattern::General3:
    case SymmetryPattern::General4: {
      std::vector<Matrix<double>> f;
      for (Index d : dims) f.push_back(random_factor(d, rank, rng, collinearity));
      return make_problem(pattern, std::move(f));
    }
  }
  throw Error("generate: unsupported pattern");
}

std::string_view solver_name(SolverKind s) { return s == SolverKind::Als ? "als" : "pcls"; }

std::optional<SolverKind> parse_solver(std::string_view s) {
  if (s == "als") return SolverKind::Als;
  if (s == "pcls") return SolverKind::Pcls;
  return std::nullopt;
}

std::vector<std::pair<Index, Index>> factor_shapes(SymmetryPattern pattern,
                                                   const std::vector<Index>& dims, Index rank) {
  detail::require(static_cast<int>(dims.size()) == tensor_order(pattern),
                  "factor_shapes: dims do not match pattern order");
  const auto map = mode_to_factor(pattern);
  std::vector<std::pair<Index, Index>> shapes(factor_count(pattern), {0, rank});
  for (std::size_t n = 0; n < map.size(); ++n) shapes[map[n]].first = dims[n];
  return shapes;
}

SolverResult<double> run_solver(SolverKind solver, SymmetryPattern pattern,
                                const DenseTensor<double>& x,
                                const std::vector<Matrix<double>>& init, const SolverConfig& cfg) {
  detail::require(static_cast<int>(init.size()) == factor_count(pattern),
                  "run_solver: wrong number of initial factors for pattern " +
                      std::string(pattern_name(pattern)));
  if (solver == SolverKind::Pcls) {
    switch (pattern) {
      case SymmetryPattern::PartialSym3_12: return pcls3(x, init[0], init[1], cfg);
      case SymmetryPattern::PartialSym4_13_24: return pcls4_case1(x, init[0], init[1], cfg);
      case SymmetryPattern::PartialSym4_13: return pcls4_case2(x, init[0], init[1], init[2], cfg);
      case SymmetryPattern::FullSym4: return pcls4_full(x, init[0], cfg);
      default:
        throw Error("run_solver: pcls requires a symmetric pattern, got " +
                    std::string(pattern_name(pattern)));
    }
  }
  switch (pattern) {
    case SymmetryPattern::General3: return als3(x, init[0], init[1], init[2], cfg);
    case SymmetryPattern::PartialSym3_12: return als3_sym(x, init[0], init[1], cfg);
    case SymmetryPattern::FullSym4: return als4_sym(x, init[0], cfg);
    default: {
      std::vector<Matrix<double>> per_mode;
      for (int f : mode_to_factor(pattern)) per_mode.push_back(init[f]);
      return als4(x, std::move(per_mode), cfg);
    }
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over a combination of both inputs
  std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void ExperimentSpec::validate() const {
  detail::require(seeds >= 1, "ExperimentSpec: seeds must be >= 1");
  detail::require(rank >= 1, "ExperimentSpec: rank must be >= 1");
  detail::require(!solvers.empty(), "ExperimentSpec: at least one solver required");
  detail::require(sigma >= 0, "ExperimentSpec: sigma must be >= 0");
  if (!problem_file) {
    detail::require(static_cast<int>(dims.size()) == tensor_order(pattern),
                    "ExperimentSpec: dims do not match pattern order");
    for (Index d : dims) detail::require(d > 0, "ExperimentSpec: dims must be positive");
  }
  detail::require(!(problem_file && init == InitStrategy::Kind::PerturbedTruth),
                  "ExperimentSpec: PerturbedTruth needs a generated problem (no reference model "
                  "for a loaded tensor)");
  config.validate();
}

const SolverAggregate* RunSummary::aggregate(std::string_view solver) const {
  for (const auto& a : aggregates)
    if (a.solver == solver) return &a;
  return nullptr;
}

std::vector<const RunRecord*> RunSummary::runs_of(std::string_view solver) const {
  std::vector<const RunRecord*> out;
  for (const auto& r : runs)
    if (r.solver == solver) out.push_back(&r);
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<SolverAggregate> aggregate_runs(const std::vector<RunRecord>& runs,
                                            const std::vector<SolverKind>& solvers) {
  std::vector<SolverAggregate> out;
  for (SolverKind s : solvers) {
    SolverAggregate agg;
    agg.solver = std::string(solver_name(s));
    std::vector<double> iters, times;
    for (const auto& r : runs) {
      if (r.solver != agg.solver) continue;
      ++agg.total;
      if (r.stop_reason != StopReason::Converged) continue;
      ++agg.converged;
      iters.push_back(static_cast<double>(r.iterations));
      times.push_back(r.wall_time);
    }
    agg.convergence_fraction =
        agg.total ? static_cast<double>(agg.converged) / static_cast<double>(agg.total) : 0.0;
    agg.mean_iterations = mean(iters);
    agg.median_iterations = median(iters);
    agg.mean_wall_time = mean(times);
    agg.median_wall_time = median(times);
    out.push_back(std::move(agg));
  }
  return out;
}

namespace {

std::vector<RunRecord> run_one(const ExperimentSpec& spec, const Problem* shared, int k) {
  const std::uint64_t seed = derive_seed(spec.base_seed, static_cast<std::uint64_t>(k));
  Problem fresh;
  const Problem* problem = shared;
  if (!problem) {
    Rng prng(derive_seed(spec.base_seed ^ 0xA5A5A5A5A5A5A5A5ULL, static_cast<std::uint64_t>(k)));
    fresh = generate(spec.pattern, spec.dims, spec.rank, prng, spec.collinearity);
    problem = &fresh;
  }
  const auto& x = problem->tensor;
  const auto shapes = factor_shapes(spec.pattern, x.dims(), spec.rank);
  InitStrategy strategy;
  if (spec.init == InitStrategy::Kind::PerturbedTruth) {
    detail::require(problem->model.rank() == spec.rank,
                    "run_experiment: PerturbedTruth needs the generating rank");
    strategy = InitStrategy::perturbed(problem->model.factors, spec.sigma);
  }
  Rng rng(seed);
  const auto init = initialize(strategy, shapes, rng);

  std::vector<RunRecord> out;
  for (SolverKind s : spec.solvers) {
    SolverConfig cfg = spec.config;
    cfg.seed = seed;
    auto result = run_solver(s, spec.pattern, x, init, cfg);
    RunRecord rec;
    rec.run_index = k;
    rec.seed = seed;
    rec.solver = std::string(solver_name(s));
    rec.iterations = result.trace.iterations();
    rec.final_residual = result.trace.final_residual();
    rec.wall_time = result.trace.total_time();
    rec.stop_reason = result.trace.stop_reason;
    rec.trace = std::move(result.trace);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

RunSummary run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::optional<Problem> shared;
  if (spec.problem_file) {
    Problem p;
    p.tensor = read_tensor(*spec.problem_file);
    const auto shapes = factor_shapes(spec.pattern, p.tensor.dims(), spec.rank);
    std::vector<Matrix<double>> zeros;
    for (const auto& [r, c] : shapes) zeros.push_back(Matrix<double>::Zero(r, c));
    p.model = FactorModel<double>(spec.pattern, std::move(zeros));
    shared = std::move(p);
  } else if (!spec.fresh_problem_per_run) {
    Rng prng(spec.base_seed);
    shared = generate(spec.pattern, spec.dims, spec.rank, prng, spec.collinearity);
  }

  std::vector<std::vector<RunRecord>> per_run(static_cast<std::size_t>(spec.seeds));
  unsigned threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(spec.seeds));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < spec.seeds; k = next++) {
      try {
        per_run[static_cast<std::size_t>(k)] = run_one(spec, shared ? &*shared : nullptr, k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  RunSummary summary;
  summary.experiment = spec.name;
  summary.pattern = std::string(pattern_name(spec.pattern));
  summary.dims = shared ? shared->tensor.dims() : spec.dims;
  summary.rank = spec.rank;
  for (auto& records : per_run)
    for (auto& r : records) summary.runs.push_back(std::move(r));
  summary.aggregates = aggregate_runs(summary.runs, spec.solvers);

  if (spec.output_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*spec.output_dir, ec);
    if (ec) throw IoError("cannot create '" + spec.output_dir->string() + "': " + ec.message());
    for (auto& r : summary.runs) {
      const auto file = spec.name + "_run" + std::to_string(r.run_index) + "_" + r.solver + ".csv";
      write_trace_csv(*spec.output_dir / file, r.trace);
      r.trace_file = file;
    }
    write_summary_json(*spec.output_dir / (spec.name + "_summary.json"), summary);
  }
  return summary;
}

namespace {

Index scaled(Index v, double scale) {
  return std::max<Index>(1, static_cast<Index>(std::llround(static_cast<double>(v) * scale)));
}

ExperimentSpec example_base(std::string name, SymmetryPattern p, std::vector<Index> dims,
                            Index rank, double scale) {
  ExperimentSpec s;
  s.name = std::move(name);
  s.pattern = p;
  for (Index& d : dims) d = scaled(d, scale);
  s.dims = std::move(dims);
  s.rank = scaled(rank, scale);
  s.collinearity = 0.75;
  s.config.max_iters = 20000;
  s.config.tol = 1e-10;
  return s;
}

}  // namespace

std::vector<ExperimentSpec> preset(std::string_view name, double scale) {
  detail::require(scale > 0, "preset: scale must be > 0");
  using P = SymmetryPattern;
  if (name == "example1") {
    auto s = example_base("example1", P::PartialSym3_12, {17, 17, 18}, 17, scale);
    s.init = InitStrategy::Kind::PerturbedTruth;
    s.seeds = 10;
    return {s};
  }
  if (name == "example2") {
    auto s = example_base("example2", P::PartialSym3_12, {17, 17, 18}, 17, scale);
    s.seeds = 50;
    return {s};
  }
  if (name == "example3") {
    std::vector<ExperimentSpec> out;
    for (Index n = 10; n <= 90; n += 10) {
      auto s = example_base("example3_n" + std::to_string(scaled(n, scale)), P::PartialSym3_12,
                            {n, n, n}, n, scale);
      s.seeds = 5;
      out.push_back(s);
    }
    return out;
  }
  if (name == "example4") {
    auto s = example_base("example4", P::FullSym4, {10, 10, 10, 10}, 10, scale);
    s.init = InitStrategy::Kind::PerturbedTruth;
    s.seeds = 10;
    return {s};
  }
  if (name == "example5") {
    auto s = example_base("example5", P::FullSym4, {15, 15, 15, 15}, 10, scale);
    s.init = InitStrategy::Kind::PerturbedTruth;
    s.seeds = 10;
    return {s};
  }
  throw Error("preset: unknown preset '" + std::string(name) + "'");
}

}  // namespace symtensor

// symtensor: generate synthetic tensors, decompose them, run benchmarks.
//
// Exit codes: 0 converged / success, 1 usage error, 2 runtime error,
// 3 iteration cap reached, 4 stalled.

#include "symtensor/io.hpp"
#include "symtensor/symtensor.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

namespace st = symtensor;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitMaxIters = 3;
constexpr int kExitStalled = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

st::SymmetryPattern pattern_flag(const std::string& name) {
  auto p = st::parse_pattern(name);
  if (!p) throw UsageError("unknown pattern '" + name + "'");
  return *p;
}

std::vector<st::Index> to_dims(const std::vector<long long>& raw) {
  std::vector<st::Index> dims;
  for (long long d : raw) {
    if (d <= 0) throw UsageError("--dims entries must be positive");
    dims.push_back(static_cast<st::Index>(d));
  }
  return dims;
}

int exit_code(st::StopReason r) {
  switch (r) {
    case st::StopReason::Converged: return 0;
    case st::StopReason::MaxIters: return kExitMaxIters;
    case st::StopReason::Stalled: return kExitStalled;
  }
  return kExitRuntime;
}

int env_threads() {
  const char* v = std::getenv("SYMTENSOR_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw UsageError("SYMTENSOR_THREADS must be a non-negative integer");
  return static_cast<int>(n);
}

struct GenerateArgs {
  std::string kind;
  std::vector<long long> dims;
  long long rank = 0;
  std::uint64_t seed = 0;
  double collinearity = 0.0;
  std::string output;
  std::string model;
};

int cmd_generate(const GenerateArgs& a) {
  const auto pattern = pattern_flag(a.kind);
  if (pattern == st::SymmetryPattern::General3 || pattern == st::SymmetryPattern::General4)
    throw UsageError("--kind must be one of psym3, psym4-case1, psym4-case2, fsym4");
  if (a.rank < 1) throw UsageError("--rank must be >= 1");
  if (a.collinearity < 0 || a.collinearity >= 1)
    throw UsageError("--collinearity must lie in [0, 1)");
  st::Rng rng(a.seed);
  const auto problem =
      st::generate(pattern, to_dims(a.dims), static_cast<st::Index>(a.rank), rng, a.collinearity);
  st::write_tensor(std::filesystem::path(a.output), problem.tensor);
  std::cout << a.output << '\n';
  if (!a.model.empty()) {
    st::write_model(std::filesystem::path(a.model), problem.model);
    std::cout << a.model << '\n';
  }
  return 0;
}

struct DecomposeArgs {
  std::string input;
  std::string solver;
  std::string pattern;
  long long rank = 0;
  double tol = 1e-10;
  int max_iters = 1000;
  int inner_sweeps = 1;
  std::uint64_t seed = 0;
  std::string init_model;
  double sigma = 0.0;
  std::string output_model;
  std::string trace;
  bool normalize = false;
};

int cmd_decompose(const DecomposeArgs& a) {
  const auto solver = st::parse_solver(a.solver);
  if (!solver) throw UsageError("--solver must be als or pcls");
  const auto pattern = pattern_flag(a.pattern);
  if (a.rank < 1) throw UsageError("--rank must be >= 1");
  if (a.max_iters < 1) throw UsageError("--max-iters must be >= 1");
  if (a.inner_sweeps < 1) throw UsageError("--inner-sweeps must be >= 1");
  if (!(a.tol > 0)) throw UsageError("--tol must be > 0");
  if (a.sigma < 0) throw UsageError("--sigma must be >= 0");

  const auto x = st::read_tensor(std::filesystem::path(a.input));
  if (x.order() != st::tensor_order(pattern))
    throw st::Error("tensor order " + std::to_string(x.order()) + " does not match pattern " +
                    a.pattern);
  const auto sym = st::symmetry_defect(x, pattern);
  if (!sym.shape_ok) throw st::Error("pattern mismatch: " + sym.diagnostic);
  if (sym.max_defect > st::kPclsSymmetryTol)
    throw st::Error("input violates " + a.pattern + " symmetry (max defect " +
                    std::to_string(sym.max_defect) + ")");

  const auto rank = static_cast<st::Index>(a.rank);
  const auto shapes = st::factor_shapes(pattern, x.dims(), rank);
  st::InitStrategy strategy;
  if (!a.init_model.empty()) {
    const auto ref = st::read_model(std::filesystem::path(a.init_model));
    if (ref.pattern != pattern)
      throw st::Error("--init-model pattern " + std::string(st::pattern_name(ref.pattern)) +
                      " does not match --pattern " + a.pattern);
    strategy = st::InitStrategy::perturbed(ref.factors, a.sigma);
  }
  st::Rng rng(a.seed);
  const auto init = st::initialize(strategy, shapes, rng);

  st::SolverConfig cfg;
  cfg.tol = a.tol;
  cfg.max_iters = a.max_iters;
  cfg.inner_sweeps = a.inner_sweeps;
  cfg.seed = a.seed;
  auto result = st::run_solver(*solver, pattern, x, init, cfg);
  const auto& trace = result.trace;
  for (const auto& w : trace.warnings) std::cerr << "warning: " << w << '\n';
  if (trace.rank_deficient_solves > 0)
    std::cerr << "note: " << trace.rank_deficient_solves << " rank-deficient solves\n";
  if (trace.redrawn_columns > 0)
    std::cerr << "note: " << trace.redrawn_columns << " columns redrawn\n";

  if (!a.output_model.empty()) {
    const auto model = a.normalize ? st::normalized(result.model) : result.model;
    st::write_model(std::filesystem::path(a.output_model), model);
    std::cout << "model\t" << a.output_model << '\n';
  }
  if (!a.trace.empty()) {
    st::write_trace_csv(std::filesystem::path(a.trace), trace);
    std::cout << "trace\t" << a.trace << '\n';
  }
  std::printf("result\t%s\t%d\t%.17g\t%.6f\n", std::string(st::stop_reason_name(trace.stop_reason)).c_str(),
              trace.iterations(), trace.final_residual(), trace.total_time());
  return exit_code(trace.stop_reason);
}

struct BenchmarkArgs {
  std::string preset;
  double scale = 1.0;
  std::string output_dir = "benchmark";
  // explicit spec flags; unset ones keep the preset value
  std::string name = "custom";
  std::string pattern;
  std::vector<long long> dims;
  long long rank = 0;
  int seeds = -1;
  std::string init;
  double sigma = -1;
  double collinearity = -1;
  double tol = -1;
  int max_iters = -1;
  long long base_seed = -1;
  std::vector<std::string> solvers;
  bool fresh = false;
  std::string input;
};

st::ExperimentSpec explicit_spec(const BenchmarkArgs& a) {
  if (a.pattern.empty()) throw UsageError("benchmark needs --preset or --pattern");
  st::ExperimentSpec s;
  s.name = a.name;
  s.pattern = pattern_flag(a.pattern);
  if (a.input.empty()) {
    if (a.dims.empty()) throw UsageError("--dims is required without --input");
    s.dims = to_dims(a.dims);
  } else {
    s.problem_file = a.input;
  }
  if (a.rank < 1) throw UsageError("--rank must be >= 1");
  s.rank = static_cast<st::Index>(a.rank);
  return s;
}

void apply_overrides(st::ExperimentSpec& s, const BenchmarkArgs& a) {
  if (a.seeds >= 0) s.seeds = a.seeds;
  if (!a.init.empty()) {
    if (a.init == "random") s.init = st::InitStrategy::Kind::RandomGaussian;
    else if (a.init == "perturbed") s.init = st::InitStrategy::Kind::PerturbedTruth;
    else throw UsageError("--init must be random or perturbed");
  }
  if (a.sigma >= 0) s.sigma = a.sigma;
  if (a.collinearity >= 0) s.collinearity = a.collinearity;
  if (a.tol > 0) s.config.tol = a.tol;
  if (a.max_iters > 0) s.config.max_iters = a.max_iters;
  if (a.base_seed >= 0) s.base_seed = static_cast<std::uint64_t>(a.base_seed);
  if (!a.solvers.empty()) {
    s.solvers.clear();
    for (const auto& n : a.solvers) {
      auto k = st::parse_solver(n);
      if (!k) throw UsageError("unknown solver '" + n + "'");
      s.solvers.push_back(*k);
    }
  }
  if (a.fresh) s.fresh_problem_per_run = true;
}

int cmd_benchmark(const BenchmarkArgs& a) {
  if (a.seeds == 0) throw UsageError("--seeds must be >= 1");
  if (!(a.scale > 0)) throw UsageError("--scale must be > 0");
  std::vector<st::ExperimentSpec> specs;
  if (!a.preset.empty()) {
    try {
      specs = st::preset(a.preset, a.scale);
    } catch (const st::Error& e) {
      throw UsageError(e.what());
    }
  } else {
    specs.push_back(explicit_spec(a));
  }
  const int threads = env_threads();
  for (auto& s : specs) {
    apply_overrides(s, a);
    s.output_dir = a.output_dir;
    s.threads = threads;
    try {
      s.validate();
    } catch (const st::Error& e) {
      throw UsageError(e.what());
    }
  }
  for (const auto& s : specs) {
    std::cerr << "running " << s.name << " (" << s.seeds << " seeds)\n";
    const auto summary = st::run_experiment(s);
    std::cout << "summary\t" << (*s.output_dir / (s.name + "_summary.json")).string() << '\n';
    for (const auto& agg : summary.aggregates)
      std::printf("aggregate\t%s\t%s\t%d/%d\t%.6g\t%.6g\t%.6g\n", s.name.c_str(),
                  agg.solver.c_str(), agg.converged, agg.total, agg.mean_iterations,
                  agg.median_iterations, agg.mean_wall_time);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric outer product decomposition via PCLS and ALS"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic symmetric tensor");
  g->add_option("--kind", gen.kind, "psym3, psym4-case1, psym4-case2 or fsym4")->required();
  g->add_option("--dims", gen.dims, "Tensor dimensions, comma separated")
      ->required()
      ->delimiter(',');
  g->add_option("--rank", gen.rank, "Number of rank-one terms")->required();
  g->add_option("--seed", gen.seed, "RNG seed");
  g->add_option("--collinearity", gen.collinearity, "Expected column cosine in [0, 1)");
  g->add_option("--output", gen.output, "Tensor output file")->required();
  g->add_option("--emit-model", gen.model, "Also write the generating model here");

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "Decompose a tensor file");
  d->add_option("--input", dec.input, "Tensor file")->required();
  d->add_option("--solver", dec.solver, "als or pcls")->required();
  d->add_option("--pattern", dec.pattern, "Symmetry pattern")->required();
  d->add_option("--rank", dec.rank, "Number of rank-one terms")->required();
  d->add_option("--tol", dec.tol, "Stop once the squared residual is at most this");
  d->add_option("--max-iters", dec.max_iters, "Iteration cap");
  d->add_option("--inner-sweeps", dec.inner_sweeps, "Coordinate sweeps per PCLS column");
  d->add_option("--seed", dec.seed, "RNG seed for initialization and redraws");
  d->add_option("--init-model", dec.init_model, "Start from this model instead of random");
  d->add_option("--sigma", dec.sigma, "Gaussian noise added to --init-model");
  d->add_option("--output-model", dec.output_model, "Write the fitted model here");
  d->add_option("--trace", dec.trace, "Write the convergence trace CSV here");
  d->add_flag("--normalize", dec.normalize, "Unit-norm symmetric columns in the output model");

  BenchmarkArgs bench;
  auto* b = app.add_subcommand("benchmark", "Run a seeded ALS vs PCLS experiment");
  b->add_option("--preset", bench.preset, "example1 .. example5");
  b->add_option("--scale", bench.scale, "Multiply preset dims and rank");
  b->add_option("--output-dir", bench.output_dir, "Directory for traces and summary");
  b->add_option("--name", bench.name, "Experiment name (explicit spec)");
  b->add_option("--pattern", bench.pattern, "Symmetry pattern (explicit spec)");
  b->add_option("--dims", bench.dims, "Tensor dimensions (explicit spec)")->delimiter(',');
  b->add_option("--rank", bench.rank, "Rank (explicit spec)");
  b->add_option("--input", bench.input, "Use this tensor file instead of generating");
  b->add_option("--seeds", bench.seeds, "Number of runs");
  b->add_option("--init", bench.init, "random or perturbed");
  b->add_option("--sigma", bench.sigma, "Perturbation scale for perturbed inits");
  b->add_option("--collinearity", bench.collinearity, "Generator column cosine");
  b->add_option("--tol", bench.tol, "Convergence tolerance");
  b->add_option("--max-iters", bench.max_iters, "Iteration cap");
  b->add_option("--base-seed", bench.base_seed, "Base seed for per-run seeds");
  b->add_option("--solvers", bench.solvers, "Solvers to run")->delimiter(',');
  b->add_flag("--fresh-problems", bench.fresh, "Generate a new tensor for every run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*d) return cmd_decompose(dec);
    return cmd_benchmark(bench);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

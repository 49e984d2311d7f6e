#ifndef SYMTENSOR_SOLVER_COMMON_HPP
#define SYMTENSOR_SOLVER_COMMON_HPP

#include "symtensor/model.hpp"
#include "symtensor/numerics.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace symtensor {

struct SolverConfig {
  int max_iters = 1000;
  double tol = 1e-10;        // stop once residual_sq <= tol
  int inner_sweeps = 1;      // coordinate passes per PCLS column update
  double pinv_cutoff = 0.0;  // <= 0 selects max(rows, cols) * eps
  int stall_window = 50;
  double stall_eps = 1e-14;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(max_iters >= 1, "SolverConfig: max_iters must be >= 1");
    detail::require(tol > 0, "SolverConfig: tol must be > 0");
    detail::require(inner_sweeps >= 1, "SolverConfig: inner_sweeps must be >= 1");
    detail::require(stall_window >= 0, "SolverConfig: stall_window must be >= 0");
  }

  PinvOptions pinv() const { return PinvOptions{pinv_cutoff}; }
};

enum class StopReason { Converged, MaxIters, Stalled };

inline std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::Stalled: return "stalled";
  }
  return "unknown";
}

inline std::optional<StopReason> parse_stop_reason(std::string_view s) {
  for (auto r : {StopReason::Converged, StopReason::MaxIters, StopReason::Stalled})
    if (stop_reason_name(r) == s) return r;
  return std::nullopt;
}

/// Per-outer-iteration residuals and timings, plus solver diagnostics.
struct ConvergenceTrace {
  std::vector<double> residuals;  // ||x - model||_F^2 after each outer iteration
  std::vector<double> elapsed;    // wall-clock seconds spent in each iteration
  StopReason stop_reason = StopReason::MaxIters;
  double initial_residual = 0.0;

  // diagnostics
  int rank_deficient_solves = 0;
  int redrawn_columns = 0;
  int reorthogonalizations = 0;
  Index clipped_eigenvalues = 0;
  double clipped_mass = 0.0;    // sum of squared clipped eigenvalues
  double truncated_mass = 0.0;  // sum of squared discarded eigenvalues
  std::vector<double> symmetry_defect;  // ||A_k - B_k||_F (ALS on symmetric input)
  std::vector<double> e_space_residuals;
  std::vector<std::string> warnings;

  int iterations() const { return static_cast<int>(residuals.size()); }
  double final_residual() const { return residuals.back(); }
  double total_time() const {
    double t = 0;
    for (double e : elapsed) t += e;
    return t;
  }

  void validate() const {
    detail::require(!residuals.empty(), "ConvergenceTrace: residuals must be nonempty");
    detail::require(residuals.size() == elapsed.size(),
                    "ConvergenceTrace: residual and timing columns differ in length");
    for (double r : residuals)
      detail::require(r >= 0 && !std::isnan(r), "ConvergenceTrace: residuals must be >= 0");
  }
};

template <typename Scalar>
struct SolverResult {
  FactorModel<Scalar> model;
  ConvergenceTrace trace;
};

using Rng = std::mt19937_64;

struct InitStrategy {
  enum class Kind { RandomGaussian, PerturbedTruth };
  Kind kind = Kind::RandomGaussian;
  double sigma = 0.1;
  std::vector<Matrix<double>> reference;  // truth factors for PerturbedTruth

  static InitStrategy random() { return {}; }
  static InitStrategy perturbed(std::vector<Matrix<double>> truth, double sigma) {
    InitStrategy s;
    s.kind = Kind::PerturbedTruth;
    s.sigma = sigma;
    s.reference = std::move(truth);
    return s;
  }
};

template <typename Scalar = double>
Matrix<Scalar> gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(normal(rng));
  return m;
}

/// Initial factor matrices with the given (rows, cols) shapes.
template <typename Scalar = double>
std::vector<Matrix<Scalar>> initialize(const InitStrategy& strategy,
                                       const std::vector<std::pair<Index, Index>>& shapes,
                                       Rng& rng) {
  for (const auto& [r, c] : shapes)
    detail::require(r > 0 && c > 0, "initialize: shapes must be positive");
  std::vector<Matrix<Scalar>> out;
  if (strategy.kind == InitStrategy::Kind::RandomGaussian) {
    for (const auto& [r, c] : shapes) out.push_back(gaussian_matrix<Scalar>(r, c, rng));
    return out;
  }
  detail::require(strategy.sigma >= 0, "initialize: sigma must be >= 0");
  detail::require(strategy.reference.size() == shapes.size(),
                  "initialize: PerturbedTruth needs one reference factor per shape");
  for (std::size_t f = 0; f < shapes.size(); ++f) {
    const auto& ref = strategy.reference[f];
    detail::require(ref.rows() == shapes[f].first && ref.cols() == shapes[f].second,
                    "initialize: reference factor shape mismatch");
    Matrix<Scalar> m = ref.template cast<Scalar>();
    if (strategy.sigma > 0)
      m += static_cast<Scalar>(strategy.sigma) *
           gaussian_matrix<Scalar>(ref.rows(), ref.cols(), rng);
    out.push_back(std::move(m));
  }
  return out;
}

namespace detail {

/// Drives the outer loop: `step()` performs one outer iteration and returns
/// the residual afterwards. Stops on tol, max_iters, or a stall (relative
/// change over `stall_window` iterations at most `stall_eps`).
template <typename Step>
void run_outer_loop(const SolverConfig& cfg, ConvergenceTrace& trace, Step&& step) {
  using clock = std::chrono::steady_clock;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const auto t0 = clock::now();
    const double res = static_cast<double>(step());
    const auto t1 = clock::now();
    trace.residuals.push_back(res);
    trace.elapsed.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (res <= cfg.tol) {
      trace.stop_reason = StopReason::Converged;
      return;
    }
    const auto k = trace.residuals.size();
    if (cfg.stall_window > 0 && k > static_cast<std::size_t>(cfg.stall_window)) {
      const double prev = trace.residuals[k - 1 - static_cast<std::size_t>(cfg.stall_window)];
      if (std::abs(prev - res) <= cfg.stall_eps * prev) {
        trace.stop_reason = StopReason::Stalled;
        return;
      }
    }
  }
  trace.stop_reason = StopReason::MaxIters;
}

}  // namespace detail
}  // namespace symtensor

#endif  // SYMTENSOR_SOLVER_COMMON_HPP

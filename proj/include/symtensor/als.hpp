#ifndef SYMTENSOR_ALS_HPP
#define SYMTENSOR_ALS_HPP

#include "symtensor/solver_common.hpp"

namespace symtensor {

namespace detail {

// Khatri-Rao product of all factors except `skip`, slowest mode first, so
// that X_(n) = U_n * kr_except(U, n)^T.
template <typename Scalar>
Matrix<Scalar> kr_except(const std::vector<Matrix<Scalar>>& u, int skip) {
  Matrix<Scalar> kr;
  bool first = true;
  for (int m = static_cast<int>(u.size()) - 1; m >= 0; --m) {
    if (m == skip) continue;
    if (first) {
      kr = u[m];
      first = false;
    } else {
      kr = khatri_rao(kr, u[m]);
    }
  }
  return kr;
}

// Gauss-Seidel ALS over all modes of an order-3 or order-4 tensor.
// `on_sweep` sees the factors after every full sweep.
template <typename Scalar, typename OnSweep>
SolverResult<Scalar> als_general(const DenseTensor<Scalar>& x, std::vector<Matrix<Scalar>> u,
                                 const SolverConfig& cfg, OnSweep&& on_sweep) {
  cfg.validate();
  const int order = x.order();
  require(static_cast<int>(u.size()) == order, "als: need one initial factor per mode");
  const Index rank = u.front().cols();
  require(rank >= 1, "als: rank must be >= 1");
  for (int n = 0; n < order; ++n) {
    require(u[n].cols() == rank, "als: initial factors disagree on rank");
    require(u[n].rows() == x.dim(n), "als: initial factor rows do not match tensor dims");
  }

  std::vector<Matrix<Scalar>> unfolded_t(order);  // X_(n)^T
  for (int n = 0; n < order; ++n) unfolded_t[n] = mode_n_matricize(x, n + 1).transpose();

  SolverResult<Scalar> result;
  auto& trace = result.trace;
  {
    const Matrix<Scalar> kr = kr_except(u, order - 1);
    trace.initial_residual =
        static_cast<double>((unfolded_t[order - 1] - kr * u[order - 1].transpose()).squaredNorm());
  }

  run_outer_loop(cfg, trace, [&]() -> Scalar {
    Matrix<Scalar> kr;
    for (int n = 0; n < order; ++n) {
      kr = kr_except(u, n);
      auto sol = least_squares_detailed(kr, unfolded_t[n], cfg.pinv());
      if (sol.rank_deficient) ++trace.rank_deficient_solves;
      u[n] = sol.x.transpose();
    }
    on_sweep(u, trace);
    return (unfolded_t[order - 1] - kr * u[order - 1].transpose()).squaredNorm();
  });

  result.model = FactorModel<Scalar>(
      order == 3 ? SymmetryPattern::General3 : SymmetryPattern::General4, std::move(u));
  return result;
}

}  // namespace detail

/// Classic CP-ALS for a third-order tensor, updating A, B, C in turn.
template <typename Scalar>
SolverResult<Scalar> als3(const DenseTensor<Scalar>& x, const Matrix<Scalar>& a0,
                          const Matrix<Scalar>& b0, const Matrix<Scalar>& c0,
                          const SolverConfig& cfg) {
  detail::require(x.order() == 3, "als3: tensor must be order 3");
  return detail::als_general(x, {a0, b0, c0}, cfg, [](const auto&, auto&) {});
}

/// ALS baseline for an I x I x K tensor symmetric in modes 1-2: B0 = A0,
/// factors evolve independently afterwards. Records ||A_k - B_k||_F.
template <typename Scalar>
SolverResult<Scalar> als3_sym(const DenseTensor<Scalar>& x, const Matrix<Scalar>& a0,
                              const Matrix<Scalar>& c0, const SolverConfig& cfg) {
  detail::require(x.order() == 3, "als3_sym: tensor must be order 3");
  detail::require(x.dim(0) == x.dim(1), "als3_sym: modes 1 and 2 must have equal size");
  detail::require(a0.cols() >= 1, "als3_sym: rank must be >= 1");
  return detail::als_general(x, {a0, a0, c0}, cfg, [](const auto& u, ConvergenceTrace& t) {
    t.symmetry_defect.push_back(static_cast<double>((u[0] - u[1]).norm()));
  });
}

/// Four-factor ALS with arbitrary initial factors.
template <typename Scalar>
SolverResult<Scalar> als4(const DenseTensor<Scalar>& x, std::vector<Matrix<Scalar>> init,
                          const SolverConfig& cfg) {
  detail::require(x.order() == 4, "als4: tensor must be order 4");
  return detail::als_general(x, std::move(init), cfg, [](const auto&, auto&) {});
}

/// ALS baseline for fourth-order symmetric problems: all four factors start
/// at A0. Records the largest ||U_1 - U_n||_F per sweep.
template <typename Scalar>
SolverResult<Scalar> als4_sym(const DenseTensor<Scalar>& x, const Matrix<Scalar>& a0,
                              const SolverConfig& cfg) {
  detail::require(x.order() == 4, "als4_sym: tensor must be order 4");
  return detail::als_general(x, {a0, a0, a0, a0}, cfg, [](const auto& u, ConvergenceTrace& t) {
    double d = 0;
    for (std::size_t n = 1; n < u.size(); ++n)
      d = std::max(d, static_cast<double>((u[0] - u[n]).norm()));
    t.symmetry_defect.push_back(d);
  });
}

}  // namespace symtensor

#endif  // SYMTENSOR_ALS_HPP

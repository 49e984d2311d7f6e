#ifndef SYMTENSOR_NUMERICS_HPP
#define SYMTENSOR_NUMERICS_HPP

#include "symtensor/core.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace symtensor {

/// Relative singular-value cutoff. A non-positive value selects the default
/// max(rows, cols) * machine epsilon.
struct PinvOptions {
  double cutoff = 0.0;
};

namespace detail {

template <typename Scalar>
Scalar effective_cutoff(const PinvOptions& opts, Index rows, Index cols) {
  if (opts.cutoff > 0) return static_cast<Scalar>(opts.cutoff);
  return static_cast<Scalar>(std::max(rows, cols)) *
         std::numeric_limits<Scalar>::epsilon();
}

}  // namespace detail

template <typename Scalar>
struct LeastSquaresSolution {
  Matrix<Scalar> x;
  Index rank = 0;
  bool rank_deficient = false;
};

/// Minimum-norm solution of min_X ||rhs - m X||_F via a complete orthogonal
/// decomposition of m.
template <typename DerivedM, typename DerivedR>
LeastSquaresSolution<typename DerivedM::Scalar> least_squares_detailed(
    const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedR>& rhs,
    const PinvOptions& opts = {}) {
  using Scalar = typename DerivedM::Scalar;
  detail::require(m.rows() == rhs.rows(),
                  "least_squares: row mismatch (" + std::to_string(m.rows()) + " vs " +
                      std::to_string(rhs.rows()) + ")");
  LeastSquaresSolution<Scalar> out;
  if (m.size() == 0 || m.cols() == 0) {
    out.x = Matrix<Scalar>::Zero(m.cols(), rhs.cols());
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod;
  cod.setThreshold(detail::effective_cutoff<Scalar>(opts, m.rows(), m.cols()));
  cod.compute(m);
  out.rank = cod.rank();
  out.rank_deficient = out.rank < std::min(m.rows(), m.cols());
  if (out.rank == 0) {
    out.x = Matrix<Scalar>::Zero(m.cols(), rhs.cols());
  } else {
    out.x = cod.solve(rhs);
  }
  return out;
}

template <typename DerivedM, typename DerivedR>
Matrix<typename DerivedM::Scalar> least_squares(const Eigen::MatrixBase<DerivedM>& m,
                                                const Eigen::MatrixBase<DerivedR>& rhs,
                                                const PinvOptions& opts = {}) {
  return least_squares_detailed(m, rhs, opts).x;
}

/// Moore-Penrose pseudoinverse; singular values at or below
/// cutoff * sigma_max are treated as zero.
template <typename Derived>
Matrix<typename Derived::Scalar> pseudoinverse(const Eigen::MatrixBase<Derived>& m,
                                               const PinvOptions& opts = {},
                                               Index* numerical_rank = nullptr) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = Matrix<Scalar>::Zero(m.cols(), m.rows());
  if (numerical_rank) *numerical_rank = 0;
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == Scalar(0)) return out;
  const Scalar threshold =
      detail::effective_cutoff<Scalar>(opts, m.rows(), m.cols()) * s(0);
  Vector<Scalar> inv = Vector<Scalar>::Zero(s.size());
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) {
      inv(i) = Scalar(1) / s(i);
      ++rank;
    }
  }
  if (numerical_rank) *numerical_rank = rank;
  out.noalias() = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

/// Thin orthogonal factor O of P = O R, with diag(R) made nonnegative.
template <typename Derived>
Matrix<typename Derived::Scalar> qr_orthogonal_factor(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  detail::require(p.rows() >= p.cols(), "qr_orthogonal_factor: need rows >= cols");
  Eigen::HouseholderQR<Matrix<Scalar>> qr(p);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(p.rows(), p.cols());
  const auto& packed = qr.matrixQR();
  for (Index j = 0; j < p.cols(); ++j)
    if (packed(j, j) < Scalar(0)) q.col(j) = -q.col(j);
  return q;
}

template <typename Scalar>
struct PsdFactor {
  Matrix<Scalar> e;                 // n x r, columns u_i sqrt(lambda_i)
  Vector<Scalar> eigenvalues;       // all eigenvalues, descending
  Scalar discarded_sq = 0;          // sum of lambda_i^2 for i > r
  Scalar clipped_sq = 0;            // sum of lambda_i^2 over clipped negatives among the kept
  Index clipped = 0;
  std::string warning;
};

/// T ~= E E^T from the r largest eigenpairs of the symmetrized input.
/// Negative kept eigenvalues are clipped to zero and reported.
template <typename Derived>
PsdFactor<typename Derived::Scalar> symmetric_psd_factor(const Eigen::MatrixBase<Derived>& t,
                                                         Index r) {
  using Scalar = typename Derived::Scalar;
  detail::require(t.rows() == t.cols(), "symmetric_psd_factor: matrix must be square");
  detail::require(r >= 1 && r <= t.rows(), "symmetric_psd_factor: need 1 <= r <= n");
  const Scalar scale = t.cwiseAbs().maxCoeff();
  const Scalar asym = (t - t.transpose()).cwiseAbs().maxCoeff();
  detail::require(asym <= Scalar(1e-10) * std::max(scale, Scalar(1e-300)),
                  "symmetric_psd_factor: input is not symmetric (max |T - T^T| = " +
                      std::to_string(static_cast<double>(asym)) + ")");
  const Matrix<Scalar> sym = (t + t.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sym);
  const Index n = t.rows();
  PsdFactor<Scalar> out;
  out.eigenvalues = eig.eigenvalues().reverse();
  const Matrix<Scalar> vecs = eig.eigenvectors().rowwise().reverse();
  out.e.resize(n, r);
  for (Index i = 0; i < n; ++i) {
    const Scalar lambda = out.eigenvalues(i);
    if (i >= r) {
      out.discarded_sq += lambda * lambda;
      continue;
    }
    if (lambda < Scalar(0)) {
      out.clipped_sq += lambda * lambda;
      ++out.clipped;
      out.e.col(i).setZero();
    } else {
      out.e.col(i) = vecs.col(i) * std::sqrt(lambda);
    }
  }
  if (out.clipped > 0)
    out.warning = std::to_string(out.clipped) +
                  " negative eigenvalue(s) clipped to zero; no exact real factor exists";
  return out;
}

}  // namespace symtensor

#endif  // SYMTENSOR_NUMERICS_HPP

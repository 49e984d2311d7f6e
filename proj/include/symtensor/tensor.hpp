#ifndef SYMTENSOR_TENSOR_HPP
#define SYMTENSOR_TENSOR_HPP

#include "symtensor/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <vector>

namespace symtensor {

/// Dense real tensor of order 3 or 4, stored in generalized column-major
/// order (mode 1 fastest). The public accessors are 0-based.
template <typename Scalar = double>
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
    validate_dims();
    data_ = Vector<Scalar>::Zero(numel());
  }

  DenseTensor(std::initializer_list<Index> dims)
      : DenseTensor(std::vector<Index>(dims)) {}

  DenseTensor(std::vector<Index> dims, Vector<Scalar> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    validate_dims();
    detail::require(data_.size() == numel(),
                    "DenseTensor: data length " + std::to_string(data_.size()) +
                        " does not match product of dims " +
                        std::to_string(numel()));
  }

  int order() const { return static_cast<int>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  Index numel() const {
    return std::accumulate(dims_.begin(), dims_.end(), Index{1},
                           std::multiplies<>());
  }

  const Vector<Scalar>& data() const { return data_; }
  Vector<Scalar>& data() { return data_; }

  /// Flat offset of a 0-based multi-index.
  Index offset(std::span<const Index> idx) const {
    Index off = 0;
    Index stride = 1;
    for (std::size_t n = 0; n < dims_.size(); ++n) {
      off += idx[n] * stride;
      stride *= dims_[n];
    }
    return off;
  }

  Scalar operator()(Index i, Index j, Index k) const {
    return data_[i + dims_[0] * (j + dims_[1] * k)];
  }
  Scalar& operator()(Index i, Index j, Index k) {
    return data_[i + dims_[0] * (j + dims_[1] * k)];
  }
  Scalar operator()(Index i, Index j, Index k, Index l) const {
    return data_[i + dims_[0] * (j + dims_[1] * (k + dims_[2] * l))];
  }
  Scalar& operator()(Index i, Index j, Index k, Index l) {
    return data_[i + dims_[0] * (j + dims_[1] * (k + dims_[2] * l))];
  }

  Scalar squared_norm() const { return data_.squaredNorm(); }

  bool same_shape(const DenseTensor& other) const {
    return dims_ == other.dims_;
  }

 private:
  void validate_dims() const {
    detail::require(dims_.size() == 3 || dims_.size() == 4,
                    "DenseTensor: order must be 3 or 4, got " +
                        std::to_string(dims_.size()));
    for (Index d : dims_)
      detail::require(d > 0, "DenseTensor: dimensions must be positive");
  }

  std::vector<Index> dims_;
  Vector<Scalar> data_;
};

namespace detail {

// 1-based multi-index of a flat offset, mirroring the textbook index map.
inline void unflatten_1based(Index flat, const std::vector<Index>& dims,
                             std::array<Index, 4>& idx) {
  for (std::size_t n = 0; n < dims.size(); ++n) {
    idx[n] = flat % dims[n] + 1;
    flat /= dims[n];
  }
}

// Column j (1-based) of the mode-n matricization for a 1-based index:
// j = 1 + sum_{k != n} (i_k - 1) J_k,  J_k = prod_{m < k, m != n} I_m.
inline Index matricize_column_1based(const std::array<Index, 4>& idx,
                                     const std::vector<Index>& dims,
                                     int mode_1based) {
  Index j = 1;
  Index stride = 1;
  const int order = static_cast<int>(dims.size());
  for (int k = 1; k <= order; ++k) {
    if (k == mode_1based) continue;
    j += (idx[k - 1] - 1) * stride;
    stride *= dims[k - 1];
  }
  return j;
}

}  // namespace detail

/// Mode-n unfolding; `mode` is 1-based. Columns are the mode-n fibers.
template <typename Scalar>
Matrix<Scalar> mode_n_matricize(const DenseTensor<Scalar>& t, int mode) {
  detail::require(mode >= 1 && mode <= t.order(),
                  "mode_n_matricize: mode " + std::to_string(mode) +
                      " out of range for order " + std::to_string(t.order()));
  const auto& dims = t.dims();
  const Index rows = dims[mode - 1];
  Matrix<Scalar> out(rows, t.numel() / rows);
  std::array<Index, 4> idx{};
  for (Index flat = 0; flat < t.numel(); ++flat) {
    detail::unflatten_1based(flat, dims, idx);
    const Index j = detail::matricize_column_1based(idx, dims, mode);
    out(idx[mode - 1] - 1, j - 1) = t.data()[flat];
  }
  return out;
}

/// Inverse of mode_n_matricize.
template <typename Scalar>
DenseTensor<Scalar> mode_n_fold(const Matrix<Scalar>& m, int mode,
                                const std::vector<Index>& dims) {
  DenseTensor<Scalar> t(dims);
  detail::require(mode >= 1 && mode <= t.order(), "mode_n_fold: bad mode");
  detail::require(m.rows() == dims[mode - 1] &&
                      m.size() == t.numel(),
                  "mode_n_fold: matrix shape does not match dims");
  std::array<Index, 4> idx{};
  for (Index flat = 0; flat < t.numel(); ++flat) {
    detail::unflatten_1based(flat, dims, idx);
    const Index j = detail::matricize_column_1based(idx, dims, mode);
    t.data()[flat] = m(idx[mode - 1] - 1, j - 1);
  }
  return t;
}

/// Square matricization of an I x J x K x L tensor into an IK x JL matrix,
/// entry ((i-1)K + k, (j-1)L + l) = x_{ijkl}.
template <typename Scalar>
Matrix<Scalar> square_matricize(const DenseTensor<Scalar>& x) {
  detail::require(x.order() == 4, "square_matricize: tensor must be order 4");
  const Index I = x.dim(0), J = x.dim(1), K = x.dim(2), L = x.dim(3);
  Matrix<Scalar> out(I * K, J * L);
  for (Index l = 1; l <= L; ++l)
    for (Index k = 1; k <= K; ++k)
      for (Index j = 1; j <= J; ++j)
        for (Index i = 1; i <= I; ++i)
          out((i - 1) * K + k - 1, (j - 1) * L + l - 1) =
              x(i - 1, j - 1, k - 1, l - 1);
  return out;
}

template <typename Scalar>
DenseTensor<Scalar> square_fold(const Matrix<Scalar>& m,
                                const std::vector<Index>& dims) {
  DenseTensor<Scalar> x(dims);
  detail::require(x.order() == 4, "square_fold: dims must have order 4");
  const Index I = dims[0], J = dims[1], K = dims[2], L = dims[3];
  detail::require(m.rows() == I * K && m.cols() == J * L,
                  "square_fold: matrix shape does not match dims");
  for (Index l = 1; l <= L; ++l)
    for (Index k = 1; k <= K; ++k)
      for (Index j = 1; j <= J; ++j)
        for (Index i = 1; i <= I; ++i)
          x(i - 1, j - 1, k - 1, l - 1) =
              m((i - 1) * K + k - 1, (j - 1) * L + l - 1);
  return x;
}

/// Reshape a length-I^2 vector into I x I by consecutive length-I columns.
template <typename Derived>
Matrix<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  detail::require(v.cols() == 1 || v.rows() == 1, "unvec: input must be a vector");
  const Index n = v.size();
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  detail::require(side * side == n && n > 0,
                  "unvec: length " + std::to_string(n) + " is not a perfect square");
  Matrix<Scalar> w(side, side);
  for (Index j = 0; j < side; ++j)
    for (Index i = 0; i < side; ++i) w(i, j) = v(j * side + i);
  return w;
}

/// Column-wise Kronecker product: column r is a_r (x) b_r.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> khatri_rao(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  detail::require(a.cols() == b.cols(),
                  "khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                      " vs " + std::to_string(b.cols()) + ")");
  const Index I = a.rows(), J = b.rows();
  Matrix<Scalar> out(I * J, a.cols());
  for (Index r = 0; r < a.cols(); ++r)
    for (Index i = 0; i < I; ++i)
      out.col(r).segment(i * J, J) = a(i, r) * b.col(r);
  return out;
}

template <typename DerivedA, typename DerivedB, typename DerivedC>
Matrix<typename DerivedA::Scalar> khatri_rao(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b,
                                             const Eigen::MatrixBase<DerivedC>& c) {
  return khatri_rao(a, khatri_rao(b, c));
}

/// Outer product of per-mode vectors (3 or 4 of them).
template <typename Scalar>
DenseTensor<Scalar> outer(const std::vector<Vector<Scalar>>& vs) {
  std::vector<Index> dims;
  for (const auto& v : vs) dims.push_back(v.size());
  DenseTensor<Scalar> t(dims);
  Vector<Scalar> acc = vs.front();
  for (std::size_t n = 1; n < vs.size(); ++n) {
    // next mode varies slower: vec(acc * v^T)
    Matrix<Scalar> m = acc * vs[n].transpose();
    acc = Eigen::Map<Vector<Scalar>>(m.data(), m.size());
  }
  t.data() = acc;
  return t;
}

}  // namespace symtensor

#endif  // SYMTENSOR_TENSOR_HPP

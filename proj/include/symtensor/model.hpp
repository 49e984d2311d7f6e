#ifndef SYMTENSOR_MODEL_HPP
#define SYMTENSOR_MODEL_HPP

#include "symtensor/tensor.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace symtensor {

enum class SymmetryPattern {
  General3,           // a_r o b_r o c_r
  PartialSym3_12,     // a_r o a_r o c_r,  t_ijk = t_jik
  PartialSym4_13_24,  // a_r o b_r o a_r o b_r
  PartialSym4_13,     // a_r o b_r o a_r o c_r
  FullSym4,           // a_r o a_r o a_r o a_r
  General4,           // a_r o b_r o c_r o d_r (ALS output for order-4 inputs)
};

inline int tensor_order(SymmetryPattern p) {
  switch (p) {
    case SymmetryPattern::General3:
    case SymmetryPattern::PartialSym3_12:
      return 3;
    default:
      return 4;
  }
}

inline int factor_count(SymmetryPattern p) {
  switch (p) {
    case SymmetryPattern::General3: return 3;
    case SymmetryPattern::PartialSym3_12: return 2;
    case SymmetryPattern::PartialSym4_13_24: return 2;
    case SymmetryPattern::PartialSym4_13: return 3;
    case SymmetryPattern::FullSym4: return 1;
    case SymmetryPattern::General4: return 4;
  }
  return 0;
}

/// Which stored factor feeds each tensor mode.
inline std::vector<int> mode_to_factor(SymmetryPattern p) {
  switch (p) {
    case SymmetryPattern::General3: return {0, 1, 2};
    case SymmetryPattern::PartialSym3_12: return {0, 0, 1};
    case SymmetryPattern::PartialSym4_13_24: return {0, 1, 0, 1};
    case SymmetryPattern::PartialSym4_13: return {0, 1, 0, 2};
    case SymmetryPattern::FullSym4: return {0, 0, 0, 0};
    case SymmetryPattern::General4: return {0, 1, 2, 3};
  }
  return {};
}

inline std::string_view pattern_name(SymmetryPattern p) {
  switch (p) {
    case SymmetryPattern::General3: return "general3";
    case SymmetryPattern::PartialSym3_12: return "psym3";
    case SymmetryPattern::PartialSym4_13_24: return "psym4-case1";
    case SymmetryPattern::PartialSym4_13: return "psym4-case2";
    case SymmetryPattern::FullSym4: return "fsym4";
    case SymmetryPattern::General4: return "general4";
  }
  return "unknown";
}

inline std::optional<SymmetryPattern> parse_pattern(std::string_view name) {
  for (auto p : {SymmetryPattern::General3, SymmetryPattern::PartialSym3_12,
                 SymmetryPattern::PartialSym4_13_24, SymmetryPattern::PartialSym4_13,
                 SymmetryPattern::FullSym4, SymmetryPattern::General4})
    if (pattern_name(p) == name) return p;
  return std::nullopt;
}

/// Mode permutations (0-based, as images of each mode) under which tensors of
/// the pattern are invariant, identity excluded.
inline std::vector<std::array<int, 4>> pattern_permutations(SymmetryPattern p) {
  switch (p) {
    case SymmetryPattern::General3:
    case SymmetryPattern::General4:
      return {};
    case SymmetryPattern::PartialSym3_12:
      return {{1, 0, 2, 3}};
    case SymmetryPattern::PartialSym4_13:
      return {{2, 1, 0, 3}};
    case SymmetryPattern::PartialSym4_13_24:
      return {{2, 1, 0, 3}, {0, 3, 2, 1}, {2, 3, 0, 1}};
    case SymmetryPattern::FullSym4: {
      std::vector<std::array<int, 4>> perms;
      std::array<int, 4> s{0, 1, 2, 3};
      while (std::next_permutation(s.begin(), s.end())) perms.push_back(s);
      return perms;
    }
  }
  return {};
}

/// Symmetry pattern plus the distinct factor matrices of a CP/SOPD model.
/// `weights`, when non-empty, scales summand r by weights[r].
template <typename Scalar = double>
struct FactorModel {
  SymmetryPattern pattern = SymmetryPattern::General3;
  std::vector<Matrix<Scalar>> factors;
  Vector<Scalar> weights;

  FactorModel() = default;
  FactorModel(SymmetryPattern p, std::vector<Matrix<Scalar>> f,
              Vector<Scalar> w = {})
      : pattern(p), factors(std::move(f)), weights(std::move(w)) {
    validate();
  }

  Index rank() const { return factors.empty() ? 0 : factors.front().cols(); }

  void validate() const {
    detail::require(static_cast<int>(factors.size()) == factor_count(pattern),
                    "FactorModel: pattern " + std::string(pattern_name(pattern)) +
                        " needs " + std::to_string(factor_count(pattern)) +
                        " factors, got " + std::to_string(factors.size()));
    for (const auto& f : factors)
      detail::require(f.cols() == rank(), "FactorModel: factors disagree on rank");
    detail::require(weights.size() == 0 || weights.size() == rank(),
                    "FactorModel: weight vector length must equal rank");
  }

  /// Tensor dimensions implied by the factor row counts.
  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (int f : mode_to_factor(pattern)) d.push_back(factors[f].rows());
    return d;
  }

  const Matrix<Scalar>& mode_factor(int mode0) const {
    return factors[mode_to_factor(pattern)[mode0]];
  }
};

/// Sum of outer products of the pattern-expanded columns. Entries that a
/// pattern permutation maps onto each other are bitwise equal: values of
/// modes sharing a factor are multiplied in sorted order.
template <typename Scalar>
DenseTensor<Scalar> reconstruct(const FactorModel<Scalar>& m,
                                const std::vector<Index>& dims) {
  m.validate();
  detail::require(dims == m.dims(), "reconstruct: factor rows do not match dims");
  const int order = tensor_order(m.pattern);
  const auto map = mode_to_factor(m.pattern);
  const int nf = factor_count(m.pattern);
  DenseTensor<Scalar> t(dims);
  std::array<Index, 4> idx{};
  std::array<Scalar, 4> group{};
  for (Index flat = 0; flat < t.numel(); ++flat) {
    Scalar sum = 0;
    for (Index r = 0; r < m.rank(); ++r) {
      Scalar term = m.weights.size() != 0 ? m.weights(r) : Scalar(1);
      for (int f = 0; f < nf; ++f) {
        int count = 0;
        for (int n = 0; n < order; ++n)
          if (map[n] == f) group[count++] = m.factors[f](idx[n], r);
        std::sort(group.begin(), group.begin() + count);
        Scalar prod = group[0];
        for (int c = 1; c < count; ++c) prod *= group[c];
        term *= prod;
      }
      sum += term;
    }
    t.data()(flat) = sum;
    for (int n = 0; n < order; ++n) {
      if (++idx[n] < dims[n]) break;
      idx[n] = 0;
    }
  }
  return t;
}

template <typename Scalar>
DenseTensor<Scalar> reconstruct(const FactorModel<Scalar>& m) {
  return reconstruct(m, m.dims());
}

/// ||x - reconstruct(m)||_F^2.
template <typename Scalar>
Scalar residual_sq(const DenseTensor<Scalar>& x, const FactorModel<Scalar>& m) {
  detail::require(x.order() == tensor_order(m.pattern),
                  "residual_sq: tensor order does not match model pattern");
  detail::require(x.dims() == m.dims(), "residual_sq: shape mismatch");
  return (x.data() - reconstruct(m, x.dims()).data()).squaredNorm();
}

/// Reporting convention: each symmetric-mode column scaled to unit norm with
/// the scale absorbed elsewhere (C for psym3/psym4-case2, B for psym4-case1,
/// a weight vector for fsym4), first nonzero entry made positive. General
/// patterns are returned unchanged. The reconstructed tensor is preserved.
template <typename Scalar>
FactorModel<Scalar> normalized(FactorModel<Scalar> m) {
  m.validate();
  auto fix_sign = [](auto col) {
    for (Index i = 0; i < col.size(); ++i) {
      if (col(i) != Scalar(0)) {
        if (col(i) < Scalar(0)) col = -col;
        return;
      }
    }
  };
  const Index R = m.rank();
  switch (m.pattern) {
    case SymmetryPattern::General3:
    case SymmetryPattern::General4:
      return m;
    case SymmetryPattern::FullSym4: {
      if (m.weights.size() == 0) m.weights = Vector<Scalar>::Ones(R);
      for (Index r = 0; r < R; ++r) {
        const Scalar n = m.factors[0].col(r).norm();
        if (n == Scalar(0)) continue;
        m.factors[0].col(r) /= n;
        m.weights(r) *= n * n * n * n;
        fix_sign(m.factors[0].col(r));
      }
      return m;
    }
    case SymmetryPattern::PartialSym3_12:
    case SymmetryPattern::PartialSym4_13:
    case SymmetryPattern::PartialSym4_13_24: {
      const bool case1 = m.pattern == SymmetryPattern::PartialSym4_13_24;
      auto& sink = m.factors.back();
      for (Index r = 0; r < R; ++r) {
        const Scalar n = m.factors[0].col(r).norm();
        if (n == Scalar(0)) continue;
        m.factors[0].col(r) /= n;
        sink.col(r) *= case1 ? n : n * n;
        fix_sign(m.factors[0].col(r));
        if (case1) fix_sign(sink.col(r));
      }
      return m;
    }
  }
  return m;
}

struct SymmetryReport {
  bool shape_ok = true;
  double max_defect = 0.0;
  std::string diagnostic;
};

/// Largest |x_sigma - x| over the pattern's mode permutations.
template <typename Scalar>
SymmetryReport symmetry_defect(const DenseTensor<Scalar>& x, SymmetryPattern p) {
  SymmetryReport rep;
  if (x.order() != tensor_order(p)) {
    rep.shape_ok = false;
    rep.diagnostic = "order " + std::to_string(x.order()) + " does not match pattern " +
                     std::string(pattern_name(p));
    return rep;
  }
  const auto perms = pattern_permutations(p);
  const auto& dims = x.dims();
  for (const auto& s : perms) {
    for (int n = 0; n < x.order(); ++n) {
      if (dims[n] != dims[s[n]]) {
        rep.shape_ok = false;
        rep.diagnostic = "modes " + std::to_string(n + 1) + " and " +
                         std::to_string(s[n] + 1) + " differ in size for pattern " +
                         std::string(pattern_name(p));
        return rep;
      }
    }
  }
  std::array<Index, 4> idx{}, pidx{};
  for (Index flat = 0; flat < x.numel(); ++flat) {
    Index rest = flat;
    for (int n = 0; n < x.order(); ++n) {
      idx[n] = rest % dims[n];
      rest /= dims[n];
    }
    for (const auto& s : perms) {
      for (int n = 0; n < x.order(); ++n) pidx[n] = idx[s[n]];
      const double d = std::abs(static_cast<double>(
          x.data()[x.offset(std::span<const Index>(pidx.data(), dims.size()))] -
          x.data()[flat]));
      rep.max_defect = std::max(rep.max_defect, d);
    }
  }
  return rep;
}

template <typename Scalar>
bool symmetry_check(const DenseTensor<Scalar>& x, SymmetryPattern p,
                    double tol = 1e-12) {
  const auto rep = symmetry_defect(x, p);
  return rep.shape_ok && rep.max_defect <= tol;
}

}  // namespace symtensor

#endif  // SYMTENSOR_MODEL_HPP

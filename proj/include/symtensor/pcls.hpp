#ifndef SYMTENSOR_PCLS_HPP
#define SYMTENSOR_PCLS_HPP

#include "symtensor/polynomial.hpp"
#include "symtensor/solver_common.hpp"

namespace symtensor {

/// Tolerance used by the PCLS entry points to verify input symmetry.
inline constexpr double kPclsSymmetryTol = 1e-8;

namespace detail {

inline void require_symmetric(const DenseTensor<double>& x, SymmetryPattern p,
                              const char* who) {
  const auto rep = symmetry_defect(x, p);
  require(rep.shape_ok, std::string(who) + ": " + rep.diagnostic);
  require(rep.max_defect <= kPclsSymmetryTol,
          std::string(who) + ": input violates " + std::string(pattern_name(p)) +
              " symmetry (max defect " + std::to_string(rep.max_defect) + ")");
}

template <typename Scalar>
void require_symmetric(const DenseTensor<Scalar>& x, SymmetryPattern p, const char* who) {
  DenseTensor<double> xd(x.dims(), x.data().template cast<double>());
  require_symmetric(xd, p, who);
}

/// For each column r of `g` (length I^2): fit a_r a_r^T to unvec(g(:, r)) by
/// Gauss-Seidel coordinate quartic minimization, warm-started from a(:, r).
/// Numerically zero columns of `g` re-draw a_r from N(0, 1).
template <typename Scalar>
void update_symmetric_columns(const Matrix<Scalar>& g, Matrix<Scalar>& a, int sweeps,
                              Rng& rng, ConvergenceTrace& trace) {
  require(g.cols() == a.cols() && g.rows() == a.rows() * a.rows(),
          "update_symmetric_columns: G must be I^2 x R");
  const Scalar g_norm = g.norm();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index r = 0; r < a.cols(); ++r) {
    const auto col = g.col(r);
    if (col.norm() <= Scalar(1e-14) * g_norm || g_norm == Scalar(0)) {
      for (Index i = 0; i < a.rows(); ++i) a(i, r) = static_cast<Scalar>(normal(rng));
      ++trace.redrawn_columns;
      continue;
    }
    const Matrix<Scalar> y = unvec(col);
    for (int s = 0; s < sweeps; ++s)
      for (Index i = 0; i < a.rows(); ++i)
        a(i, r) = quartic_global_min(build_coordinate_quartic(y, a.col(r), i)).argmin;
  }
}

template <typename Scalar>
Matrix<Scalar> pinv_tracked(const Matrix<Scalar>& m, const SolverConfig& cfg,
                            ConvergenceTrace& trace) {
  Index rank = 0;
  Matrix<Scalar> p = pseudoinverse(m, cfg.pinv(), &rank);
  if (rank < std::min(m.rows(), m.cols())) ++trace.rank_deficient_solves;
  return p;
}

template <typename Scalar>
Matrix<Scalar> lstsq_tracked(const Matrix<Scalar>& m, const Matrix<Scalar>& rhs,
                             const SolverConfig& cfg, ConvergenceTrace& trace) {
  auto sol = least_squares_detailed(m, rhs, cfg.pinv());
  if (sol.rank_deficient) ++trace.rank_deficient_solves;
  return std::move(sol.x);
}

inline void require_rank(Index r, const char* who) {
  require(r >= 1, std::string(who) + ": rank must be >= 1");
}

}  // namespace detail

/// PCLS for an I x I x K tensor with t_ijk = t_jik, model sum_r a_r o a_r o c_r.
/// Per iteration: G = ((C^k)^+ T_(3))^T, columns of A by coordinate quartic
/// fits to unvec(G(:, r)), then C by least squares against (A (.) A)^T.
template <typename Scalar>
SolverResult<Scalar> pcls3(const DenseTensor<Scalar>& x, const Matrix<Scalar>& a0,
                           const Matrix<Scalar>& c0, const SolverConfig& cfg) {
  cfg.validate();
  detail::require(x.order() == 3, "pcls3: tensor must be order 3");
  detail::require_symmetric(x, SymmetryPattern::PartialSym3_12, "pcls3");
  const Index I = x.dim(0), K = x.dim(2), R = a0.cols();
  detail::require_rank(R, "pcls3");
  detail::require(a0.rows() == I && c0.rows() == K && c0.cols() == R,
                  "pcls3: initial factors must be I x R and K x R");

  const Matrix<Scalar> t3 = mode_n_matricize(x, 3);  // K x I^2
  const Matrix<Scalar> t3t = t3.transpose();
  Matrix<Scalar> a = a0, c = c0;
  Rng rng(cfg.seed);

  SolverResult<Scalar> result;
  auto& trace = result.trace;
  trace.initial_residual =
      static_cast<double>((t3 - c * khatri_rao(a, a).transpose()).squaredNorm());

  detail::run_outer_loop(cfg, trace, [&]() -> Scalar {
    const Matrix<Scalar> g = t3t * detail::pinv_tracked(c, cfg, trace).transpose();
    detail::update_symmetric_columns(g, a, cfg.inner_sweeps, rng, trace);
    const Matrix<Scalar> kaa = khatri_rao(a, a);
    c = detail::lstsq_tracked(kaa, t3t, cfg, trace).transpose();
    return (t3 - c * kaa.transpose()).squaredNorm();
  });

  result.model = FactorModel<Scalar>(SymmetryPattern::PartialSym3_12, {std::move(a), std::move(c)});
  return result;
}

/// PCLS for an I x J x I x J tensor with x_ijkl = x_kjil = x_ilkj, model
/// sum_r a_r o b_r o a_r o b_r. Uses mat(X) = (A (.) A)(B (.) B)^T.
template <typename Scalar>
SolverResult<Scalar> pcls4_case1(const DenseTensor<Scalar>& x, const Matrix<Scalar>& a0,
                                 const Matrix<Scalar>& b0, const SolverConfig& cfg) {
  cfg.validate();
  detail::require(x.order() == 4, "pcls4_case1: tensor must be order 4");
  detail::require_symmetric(x, SymmetryPattern::PartialSym4_13_24, "pcls4_case1");
  const Index I = x.dim(0), J = x.dim(1), R = a0.cols();
  detail::require_rank(R, "pcls4_case1");
  detail::require(a0.rows() == I && b0.rows() == J && b0.cols() == R,
                  "pcls4_case1: initial factors must be I x R and J x R");

  const Matrix<Scalar> sq = square_matricize(x);  // I^2 x J^2
  const Matrix<Scalar> sqt = sq.transpose();
  Matrix<Scalar> a = a0, b = b0;
  Rng rng(cfg.seed);

  SolverResult<Scalar> result;
  auto& trace = result.trace;
  trace.initial_residual = static_cast<double>(
      (sq - khatri_rao(a, a) * khatri_rao(b, b).transpose()).squaredNorm());

  detail::run_outer_loop(cfg, trace, [&]() -> Scalar {
    const Matrix<Scalar> kbb = khatri_rao(b, b);
    const Matrix<Scalar> ga = sq * detail::pinv_tracked<Scalar>(kbb.transpose(), cfg, trace);
    detail::update_symmetric_columns(ga, a, cfg.inner_sweeps, rng, trace);
    const Matrix<Scalar> kaa = khatri_rao(a, a);
    const Matrix<Scalar> gb = sqt * detail::pinv_tracked<Scalar>(kaa.transpose(), cfg, trace);
    detail::update_symmetric_columns(gb, b, cfg.inner_sweeps, rng, trace);
    return (sq - kaa * khatri_rao(b, b).transpose()).squaredNorm();
  });

  result.model =
      FactorModel<Scalar>(SymmetryPattern::PartialSym4_13_24, {std::move(a), std::move(b)});
  return result;
}

/// PCLS for an I x J x I x K tensor with x_ijkl = x_kjil, model
/// sum_r a_r o b_r o a_r o c_r. A from mat(X) = (A (.) A)(B (.) C)^T; B and C
/// by least squares on the mode-2 and mode-4 unfoldings.
template <typename Scalar>
SolverResult<Scalar> pcls4_case2(const DenseTensor<Scalar>& x, const Matrix<Scalar>& a0,
                                 const Matrix<Scalar>& b0, const Matrix<Scalar>& c0,
                                 const SolverConfig& cfg) {
  cfg.validate();
  detail::require(x.order() == 4, "pcls4_case2: tensor must be order 4");
  detail::require_symmetric(x, SymmetryPattern::PartialSym4_13, "pcls4_case2");
  const Index I = x.dim(0), J = x.dim(1), K = x.dim(3), R = a0.cols();
  detail::require_rank(R, "pcls4_case2");
  detail::require(a0.rows() == I && b0.rows() == J && c0.rows() == K && b0.cols() == R &&
                      c0.cols() == R,
                  "pcls4_case2: initial factors must be I x R, J x R and K x R");

  const Matrix<Scalar> sq = square_matricize(x);                  // I^2 x JK
  const Matrix<Scalar> x2t = mode_n_matricize(x, 2).transpose();  // I^2 K x J
  const Matrix<Scalar> x4t = mode_n_matricize(x, 4).transpose();  // I J I x K
  Matrix<Scalar> a = a0, b = b0, c = c0;
  Rng rng(cfg.seed);

  SolverResult<Scalar> result;
  auto& trace = result.trace;
  trace.initial_residual = static_cast<double>(
      (x4t - khatri_rao(a, b, a) * c.transpose()).squaredNorm());

  detail::run_outer_loop(cfg, trace, [&]() -> Scalar {
    const Matrix<Scalar> kbc = khatri_rao(b, c);
    const Matrix<Scalar> g = sq * detail::pinv_tracked<Scalar>(kbc.transpose(), cfg, trace);
    detail::update_symmetric_columns(g, a, cfg.inner_sweeps, rng, trace);
    const Matrix<Scalar> kaa = khatri_rao(a, a);
    b = detail::lstsq_tracked<Scalar>(khatri_rao(c, kaa), x2t, cfg, trace).transpose();
    // mode-4 columns run over (i, j, k) with i fastest: A (.) B (.) A
    const Matrix<Scalar> kaba = khatri_rao(a, b, a);
    c = detail::lstsq_tracked<Scalar>(kaba, x4t, cfg, trace).transpose();
    return (x4t - kaba * c.transpose()).squaredNorm();
  });

  result.model = FactorModel<Scalar>(SymmetryPattern::PartialSym4_13,
                                     {std::move(a), std::move(b), std::move(c)});
  return result;
}

/// PCLS for a fully symmetric I^4 tensor, model sum_r a_r^{o4}.
/// Setup: T = mat(X) = E E^T, Q^0 from the initial A. Per iteration: columns of A from E Q^T, then
/// P = argmin ||E - (A (.) A) P||, Q = orthogonal factor of P.
template <typename Scalar>
SolverResult<Scalar> pcls4_full(const DenseTensor<Scalar>& x, const Matrix<Scalar>& a0,
                                const SolverConfig& cfg) {
  cfg.validate();
  detail::require(x.order() == 4, "pcls4_full: tensor must be order 4");
  detail::require_symmetric(x, SymmetryPattern::FullSym4, "pcls4_full");
  const Index I = x.dim(0), R = a0.cols();
  detail::require_rank(R, "pcls4_full");
  detail::require(a0.rows() == I, "pcls4_full: initial factor must be I x R");
  detail::require(R <= I * I, "pcls4_full: rank must not exceed I^2");

  const Matrix<Scalar> t = square_matricize(x);  // I^2 x I^2
  SolverResult<Scalar> result;
  auto& trace = result.trace;

  const auto psd = symmetric_psd_factor(t, R);
  const Matrix<Scalar>& e = psd.e;
  trace.clipped_eigenvalues = psd.clipped;
  trace.clipped_mass = static_cast<double>(psd.clipped_sq);
  trace.truncated_mass = static_cast<double>(psd.discarded_sq);
  if (!psd.warning.empty()) trace.warnings.push_back(psd.warning);

  Matrix<Scalar> a = a0;
  Rng rng(cfg.seed);
  // Q^0 is the orthogonal factor of argmin_P ||E - (A^0 (.) A^0) P||, so an exact
  // initial model is a fixed point.
  Matrix<Scalar> q;
  {
    const Matrix<Scalar> kaa = khatri_rao(a, a);
    trace.initial_residual = static_cast<double>((t - kaa * kaa.transpose()).squaredNorm());
    q = qr_orthogonal_factor(detail::lstsq_tracked(kaa, e, cfg, trace));
  }

  detail::run_outer_loop(cfg, trace, [&]() -> Scalar {
    Matrix<Scalar> q_inv;
    const Scalar drift = (q.transpose() * q - Matrix<Scalar>::Identity(R, R)).norm();
    if (drift > Scalar(1e-8)) {
      q_inv = pseudoinverse(q, cfg.pinv());
      ++trace.reorthogonalizations;
    } else {
      q_inv = q.transpose();
    }
    const Matrix<Scalar> g = e * q_inv;
    detail::update_symmetric_columns(g, a, cfg.inner_sweeps, rng, trace);
    const Matrix<Scalar> kaa = khatri_rao(a, a);
    const Matrix<Scalar> p = detail::lstsq_tracked(kaa, e, cfg, trace);
    q = qr_orthogonal_factor(p);
    trace.e_space_residuals.push_back(static_cast<double>((e - kaa * q).squaredNorm()));
    return (t - kaa * kaa.transpose()).squaredNorm();
  });

  result.model = FactorModel<Scalar>(SymmetryPattern::FullSym4, {std::move(a)});
  return result;
}

}  // namespace symtensor

#endif  // SYMTENSOR_PCLS_HPP

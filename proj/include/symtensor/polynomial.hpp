#ifndef SYMTENSOR_POLYNOMIAL_HPP
#define SYMTENSOR_POLYNOMIAL_HPP

#include "symtensor/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace symtensor {

/// f(x) = c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0
template <typename Scalar = double>
struct QuarticCoefficients {
  Scalar c4 = 0, c3 = 0, c2 = 0, c1 = 0, c0 = 0;

  Scalar operator()(Scalar x) const {
    return (((c4 * x + c3) * x + c2) * x + c1) * x + c0;
  }
  Scalar derivative(Scalar x) const {
    return ((Scalar(4) * c4 * x + Scalar(3) * c3) * x + Scalar(2) * c2) * x + c1;
  }
};

template <typename Scalar>
struct QuarticMinimum {
  Scalar argmin = 0;
  Scalar value = 0;
};

namespace detail {

template <typename Scalar>
Scalar cubic_value(Scalar a, Scalar b, Scalar c, Scalar d, Scalar x) {
  return ((a * x + b) * x + c) * x + d;
}

// Newton steps on a*x^3 + b*x^2 + c*x + d, kept only while |p| shrinks.
template <typename Scalar>
Scalar polish_root(Scalar a, Scalar b, Scalar c, Scalar d, Scalar x) {
  Scalar px = cubic_value(a, b, c, d, x);
  for (int it = 0; it < 4 && px != Scalar(0); ++it) {
    const Scalar dp = (Scalar(3) * a * x + Scalar(2) * b) * x + c;
    if (dp == Scalar(0)) break;
    const Scalar next = x - px / dp;
    const Scalar pn = cubic_value(a, b, c, d, next);
    if (!(std::abs(pn) < std::abs(px))) break;
    x = next;
    px = pn;
  }
  return x;
}

template <typename Scalar>
void dedupe_sorted(std::vector<Scalar>& roots) {
  std::sort(roots.begin(), roots.end());
  std::vector<Scalar> out;
  for (Scalar r : roots) {
    if (!out.empty() &&
        std::abs(r - out.back()) <= Scalar(1e-10) * std::max(Scalar(1), std::abs(r)))
      continue;
    out.push_back(r);
  }
  roots.swap(out);
}

template <typename Scalar>
std::vector<Scalar> real_quadratic_roots(Scalar a, Scalar b, Scalar c) {
  std::vector<Scalar> roots;
  if (a == Scalar(0)) {
    if (b != Scalar(0)) roots.push_back(-c / b);
    return roots;
  }
  const Scalar disc = b * b - Scalar(4) * a * c;
  if (disc < Scalar(0)) return roots;
  if (disc == Scalar(0)) {
    roots.push_back(-b / (Scalar(2) * a));
    return roots;
  }
  // cancellation-free form
  const Scalar q = Scalar(-0.5) * (b + std::copysign(std::sqrt(disc), b));
  roots.push_back(q / a);
  if (q != Scalar(0)) roots.push_back(c / q);
  dedupe_sorted(roots);
  return roots;
}

}  // namespace detail

/// All real roots of c3 x^3 + c2 x^2 + c1 x + c0, each reported once.
/// Lower-degree polynomials are handled when leading coefficients vanish.
template <typename Scalar>
std::vector<Scalar> real_cubic_roots(Scalar c3, Scalar c2, Scalar c1, Scalar c0) {
  detail::require(!(c3 == Scalar(0) && c2 == Scalar(0) && c1 == Scalar(0) && c0 == Scalar(0)),
                  "real_cubic_roots: zero polynomial has no finite root set");
  if (c3 == Scalar(0)) return detail::real_quadratic_roots(c2, c1, c0);

  // depressed cubic t^3 + p t + q with x = t - b/3
  const Scalar b = c2 / c3, c = c1 / c3, d = c0 / c3;
  const Scalar shift = b / Scalar(3);
  const Scalar p = c - b * b / Scalar(3);
  const Scalar q = Scalar(2) * b * b * b / Scalar(27) - b * c / Scalar(3) + d;

  std::vector<Scalar> ts;
  const Scalar half_q = q / Scalar(2);
  const Scalar third_p = p / Scalar(3);
  const Scalar disc = half_q * half_q + third_p * third_p * third_p;
  const Scalar disc_scale = std::max(half_q * half_q, std::abs(third_p * third_p * third_p));
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  if (p == Scalar(0) && q == Scalar(0)) {
    ts.push_back(Scalar(0));
  } else if (std::abs(disc) <= Scalar(64) * eps * disc_scale) {
    // repeated root: simple 3q/p, double -3q/(2p)
    ts.push_back(Scalar(3) * q / p);
    ts.push_back(Scalar(-1.5) * q / p);
  } else if (disc > Scalar(0)) {
    const Scalar u = std::cbrt(-half_q - std::copysign(std::sqrt(disc), half_q));
    ts.push_back(u == Scalar(0) ? Scalar(0) : u - third_p / u);
  } else {
    const Scalar m = Scalar(2) * std::sqrt(-third_p);
    // cos(3 theta) = (3q / 2p) sqrt(-3/p)
    const Scalar cos3 = std::clamp(Scalar(3) * q / (Scalar(2) * p) * std::sqrt(Scalar(-3) / p),
                                   Scalar(-1), Scalar(1));
    const Scalar theta = std::acos(cos3) / Scalar(3);
    for (int k = 0; k < 3; ++k)
      ts.push_back(m * std::cos(theta - Scalar(2) * std::numbers::pi_v<Scalar> * k / Scalar(3)));
  }

  std::vector<Scalar> roots;
  roots.reserve(ts.size());
  for (Scalar t : ts) roots.push_back(detail::polish_root(c3, c2, c1, c0, t - shift));
  detail::dedupe_sorted(roots);
  return roots;
}

/// Global minimizer over the reals of a coercive quartic (c4 > 0), or of the
/// degenerate quadratic c2 x^2 + c1 x + c0 with c2 > 0. Ties prefer smaller
/// |x|, then smaller x.
template <typename Scalar>
QuarticMinimum<Scalar> quartic_global_min(const QuarticCoefficients<Scalar>& q) {
  const bool coercive = q.c4 > Scalar(0) ||
                        (q.c4 == Scalar(0) && q.c3 == Scalar(0) && q.c2 > Scalar(0));
  detail::require(coercive, "quartic_global_min: polynomial is not bounded below");
  const auto stationary =
      real_cubic_roots(Scalar(4) * q.c4, Scalar(3) * q.c3, Scalar(2) * q.c2, q.c1);
  QuarticMinimum<Scalar> best{std::numeric_limits<Scalar>::quiet_NaN(),
                              std::numeric_limits<Scalar>::infinity()};
  for (Scalar x : stationary) {
    const Scalar fx = q(x);
    const Scalar tie = Scalar(16) * std::numeric_limits<Scalar>::epsilon() *
                       std::max({Scalar(1), std::abs(fx), std::abs(best.value)});
    bool take = false;
    if (std::isnan(best.argmin) || fx < best.value - tie) {
      take = true;
    } else if (std::abs(fx - best.value) <= tie) {
      take = std::abs(x) < std::abs(best.argmin) ||
             (std::abs(x) == std::abs(best.argmin) && x < best.argmin);
    }
    if (take) best = {x, fx};
  }
  return best;
}

/// Coefficients of g(x_i) = (y_ii - x_i^2)^2
///   + sum_{j != i} [(y_ji - x_j x_i)^2 + (y_ij - x_j x_i)^2],
/// the other x_j held at their current values. `i` is 0-based.
template <typename DerivedY, typename DerivedX>
QuarticCoefficients<typename DerivedY::Scalar> build_coordinate_quartic(
    const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedX>& x, Index i) {
  using Scalar = typename DerivedY::Scalar;
  detail::require(y.rows() == y.cols() && y.rows() == x.size(),
                  "build_coordinate_quartic: Y must be I x I with I = len(x)");
  detail::require(i >= 0 && i < x.size(), "build_coordinate_quartic: coordinate out of range");
  QuarticCoefficients<Scalar> q;
  const Scalar yii = y(i, i);
  Scalar sum_x2 = 0, cross = 0, sum_y2 = 0;
  for (Index j = 0; j < x.size(); ++j) {
    if (j == i) continue;
    const Scalar xj = x(j);
    sum_x2 += xj * xj;
    cross += xj * (y(i, j) + y(j, i));
    sum_y2 += y(i, j) * y(i, j) + y(j, i) * y(j, i);
  }
  q.c4 = Scalar(1);
  q.c3 = Scalar(0);
  q.c2 = Scalar(-2) * yii + Scalar(2) * sum_x2;
  q.c1 = Scalar(-2) * cross;
  q.c0 = yii * yii + sum_y2;
  return q;
}

}  // namespace symtensor

#endif  // SYMTENSOR_POLYNOMIAL_HPP

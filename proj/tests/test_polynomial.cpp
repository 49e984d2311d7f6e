#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <random>

using namespace symtensor;

namespace {

bool contains(const std::vector<double>& roots, double x) {
  for (double r : roots)
    if (std::abs(r - x) < 1e-10) return true;
  return false;
}

}  // namespace

TEST_CASE("real cubic roots examples") {
  auto r = real_cubic_roots(1.0, 0.0, 0.0, -1.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));

  r = real_cubic_roots(1.0, 0.0, -1.0, 0.0);
  REQUIRE(r.size() == 3);
  CHECK(contains(r, -1.0));
  CHECK(contains(r, 0.0));
  CHECK(contains(r, 1.0));

  r = real_cubic_roots(4.0, 0.0, 4.0, 0.0);
  REQUIRE(r.size() == 1);
  CHECK(std::abs(r[0]) < 1e-14);
}

TEST_CASE("real cubic roots degenerate degrees and multiple roots") {
  auto r = real_cubic_roots(0.0, 1.0, -3.0, 2.0);
  REQUIRE(r.size() == 2);
  CHECK(contains(r, 1.0));
  CHECK(contains(r, 2.0));
  r = real_cubic_roots(0.0, 0.0, 2.0, -1.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(0.5));
  CHECK(real_cubic_roots(0.0, 0.0, 0.0, 3.0).empty());
  CHECK_THROWS_AS(real_cubic_roots(0.0, 0.0, 0.0, 0.0), Error);

  // (x - 1)^2 (x + 2) and (x - 2)^3
  r = real_cubic_roots(1.0, 0.0, -3.0, 2.0);
  REQUIRE(r.size() == 2);
  CHECK(contains(r, 1.0));
  CHECK(contains(r, -2.0));
  r = real_cubic_roots(1.0, -6.0, 12.0, -8.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(2.0));
}

TEST_CASE("real cubic roots: residuals and root count match the discriminant") {
  Rng rng(99);
  std::normal_distribution<double> normal;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = normal(rng), b = normal(rng), c = normal(rng), d = normal(rng);
    const auto roots = real_cubic_roots(a, b, c, d);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    for (double x : roots) {
      const double px = ((a * x + b) * x + c) * x + d;
      CHECK(std::abs(px) <= 1e-8 * scale * std::max(1.0, std::abs(x * x * x)));
    }
    const double disc = 18 * a * b * c * d - 4 * b * b * b * d + b * b * c * c -
                        4 * a * c * c * c - 27 * a * a * d * d;
    if (std::abs(disc) < 1e-6 * std::pow(scale, 4)) continue;
    ++checked;
    CHECK(roots.size() == (disc > 0 ? 3u : 1u));
  }
  CHECK(checked > 900);
}

TEST_CASE("quartic global minimum examples") {
  // (4 - x^2)^2 + 2 (6 - 3x)^2
  QuarticCoefficients<double> q{1, 0, 10, -72, 88};
  auto m = quartic_global_min(q);
  CHECK(m.argmin == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(m.value) < 1e-12);
  const auto grid = oracle::quartic_grid(q, -10, 10, 1e-4);
  CHECK(std::abs(grid.argmin - 2.0) < 1e-3);

  m = quartic_global_min(QuarticCoefficients<double>{1, 0, 0, 0, 0});
  CHECK(m.argmin == 0.0);
  CHECK(m.value == 0.0);

  m = quartic_global_min(QuarticCoefficients<double>{1, 0, 2, 0, 1});
  CHECK(m.argmin == 0.0);
  CHECK(m.value == 1.0);
}

TEST_CASE("quartic global minimum preconditions and ties") {
  CHECK_THROWS_AS(quartic_global_min(QuarticCoefficients<double>{-1, 0, 0, 0, 0}), Error);
  CHECK_THROWS_AS(quartic_global_min(QuarticCoefficients<double>{0, 1, 1, 0, 0}), Error);
  CHECK_THROWS_AS(quartic_global_min(QuarticCoefficients<double>{0, 0, -1, 0, 0}), Error);
  const auto quad = quartic_global_min(QuarticCoefficients<double>{0, 0, 2, -4, 0});
  CHECK(quad.argmin == doctest::Approx(1.0));
  // (x^2 - 1)^2 has minima at +-1; the convention picks -1
  const auto tie = quartic_global_min(QuarticCoefficients<double>{1, 0, -2, 0, 1});
  CHECK(tie.argmin == doctest::Approx(-1.0));
  CHECK(std::abs(tie.value) < 1e-14);
}

TEST_CASE("quartic global minimum agrees with grid search") {
  Rng rng(2024);
  std::uniform_real_distribution<double> lead(0.0, 10.0);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    double c4 = lead(rng);
    if (c4 == 0.0) c4 = 1.0;
    const QuarticCoefficients<double> q{c4, normal(rng), normal(rng), normal(rng), normal(rng)};
    const auto m = quartic_global_min(q);
    const auto g = oracle::quartic_grid(q);
    const bool close_arg = std::abs(m.argmin - g.argmin) <= 1e-3;
    const bool close_val = std::abs(m.value - g.value) <= 1e-8 * std::max(1.0, std::abs(g.value));
    CHECK((close_arg || close_val || m.value < g.value));
    CHECK(m.value <= g.value + 1e-9 * std::max(1.0, std::abs(g.value)));
  }
}

TEST_CASE("coordinate quartic coefficients") {
  Matrix<double> y1(1, 1);
  y1 << -1;
  Vector<double> x1(1);
  x1 << 0.3;
  auto q = build_coordinate_quartic(y1, x1, 0);
  CHECK(q.c4 == 1);
  CHECK(q.c3 == 0);
  CHECK(q.c2 == 2);
  CHECK(q.c1 == 0);
  CHECK(q.c0 == 1);

  Matrix<double> y(2, 2);
  y << 4, 6, 6, 9;
  Vector<double> x(2);
  x << 0.0, 3.0;
  q = build_coordinate_quartic(y, x, 0);
  CHECK(q.c4 == 1);
  CHECK(q.c3 == 0);
  CHECK(q.c2 == 10);
  CHECK(q.c1 == -72);
  CHECK(q.c0 == 88);
  for (double t : {0.0, 1.0, 2.0}) {
    const double direct = (4 - t * t) * (4 - t * t) + 2 * (6 - 3 * t) * (6 - 3 * t);
    CHECK(q(t) == doctest::Approx(direct));
  }

  Rng rng(6);
  const Vector<double> xr = gaussian_matrix(4, 1, rng).col(0);
  const auto qz = build_coordinate_quartic(Matrix<double>::Zero(4, 4), xr, 2);
  const double others = xr.squaredNorm() - xr(2) * xr(2);
  CHECK(qz.c2 == doctest::Approx(2 * others));
  CHECK(qz.c1 == 0);
  CHECK(qz.c0 == 0);

  // generic Y (not symmetric): compare against the defining sum
  const auto yg = gaussian_matrix(4, 4, rng);
  for (Index i = 0; i < 4; ++i) {
    const auto qi = build_coordinate_quartic(yg, xr, i);
    for (double t : {-1.5, 0.2, 2.0}) {
      double direct = (yg(i, i) - t * t) * (yg(i, i) - t * t);
      for (Index j = 0; j < 4; ++j) {
        if (j == i) continue;
        direct += (yg(j, i) - xr(j) * t) * (yg(j, i) - xr(j) * t) +
                  (yg(i, j) - xr(j) * t) * (yg(i, j) - xr(j) * t);
      }
      CHECK(qi(t) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(build_coordinate_quartic(yg, xr, 4), Error);
}

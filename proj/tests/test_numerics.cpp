#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtensor/symtensor.hpp"

#include <random>

using namespace symtensor;

TEST_CASE("least squares examples") {
  const Matrix<double> rhs = Matrix<double>::Random(3, 2);
  CHECK((least_squares(Matrix<double>::Identity(3, 3), rhs) - rhs).norm() < 1e-14);

  Matrix<double> m(2, 1), b(2, 1);
  m << 1, 1;
  b << 1, 3;
  CHECK(least_squares(m, b)(0, 0) == doctest::Approx(2.0));

  Matrix<double> z(3, 2);
  z << 1, 0, 2, 0, 3, 0;
  Matrix<double> zr(3, 1);
  zr << 1, 2, 4;
  const auto sol = least_squares_detailed(z, zr);
  CHECK(sol.rank_deficient);
  CHECK(sol.x(1, 0) == 0.0);
  CHECK(sol.x(0, 0) == doctest::Approx(17.0 / 14.0));

  CHECK_THROWS_AS(least_squares(Matrix<double>::Ones(3, 2), Matrix<double>::Ones(2, 1)), Error);
}

TEST_CASE("least squares solution cannot be improved by small perturbations") {
  Rng rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = gaussian_matrix(12, 4, rng);
    const auto rhs = gaussian_matrix(12, 3, rng);
    const auto x = least_squares(m, rhs);
    const double base = (rhs - m * x).squaredNorm();
    for (int k = 0; k < 100; ++k) {
      Matrix<double> dir = gaussian_matrix(4, 3, rng);
      dir *= 1e-4 / dir.norm();
      const double perturbed = (rhs - m * (x + dir)).squaredNorm();
      CHECK(perturbed >= base - 1e-12);
    }
  }
}

TEST_CASE("pseudoinverse examples") {
  Matrix<double> d = Matrix<double>::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  Matrix<double> dinv = Matrix<double>::Zero(2, 2);
  dinv(0, 0) = 0.5;
  dinv(1, 1) = 0.25;
  CHECK((pseudoinverse(d) - dinv).norm() < 1e-15);

  Vector<double> u(3), v(2);
  u << 1, 2, 2;
  v << 3, 4;
  u /= 3;
  v /= 5;
  const Matrix<double> uv = u * v.transpose();
  CHECK((pseudoinverse(uv) - v * u.transpose()).norm() < 1e-14);

  const auto pz = pseudoinverse(Matrix<double>::Zero(3, 2));
  CHECK(pz.rows() == 2);
  CHECK(pz.cols() == 3);
  CHECK(pz.isZero(0));
}

TEST_CASE("pseudoinverse satisfies the Penrose conditions") {
  Rng rng(31);
  std::uniform_int_distribution<int> size(1, 50);
  for (int trial = 0; trial < 20; ++trial) {
    const Index r = size(rng), c = size(rng);
    const auto a = gaussian_matrix(r, c, rng);
    const auto p = pseudoinverse(a);
    const double na = a.norm(), np = p.norm();
    CHECK((a * p * a - a).norm() <= 1e-9 * na);
    CHECK((p * a * p - p).norm() <= 1e-9 * np);
    const Matrix<double> ap = a * p, pa = p * a;
    CHECK((ap - ap.transpose()).norm() <= 1e-9 * std::max(1.0, ap.norm()));
    CHECK((pa - pa.transpose()).norm() <= 1e-9 * std::max(1.0, pa.norm()));
  }
}

TEST_CASE("qr orthogonal factor") {
  Matrix<double> p(2, 1);
  p << 3, 4;
  const auto o = qr_orthogonal_factor(p);
  CHECK(o(0, 0) == doctest::Approx(0.6));
  CHECK(o(1, 0) == doctest::Approx(0.8));

  Matrix<double> rot(2, 2);
  rot << 0.6, -0.8, 0.8, 0.6;
  CHECK((qr_orthogonal_factor(rot) - rot).norm() < 1e-14);

  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = gaussian_matrix(8, 5, rng);
    const auto q = qr_orthogonal_factor(a);
    CHECK((q.transpose() * q - Matrix<double>::Identity(5, 5)).norm() < 1e-12);
    const Matrix<double> r = q.transpose() * a;
    for (Index j = 0; j < 5; ++j) CHECK(r(j, j) >= 0);
    CHECK((q * r - a).norm() < 1e-12 * a.norm());
  }
  CHECK_THROWS_AS(qr_orthogonal_factor(Matrix<double>::Ones(2, 3)), Error);
}

TEST_CASE("symmetric psd factor") {
  SUBCASE("rank one") {
    Vector<double> v(3);
    v << 1, -2, 2;
    const Matrix<double> t = v * v.transpose();
    const auto f = symmetric_psd_factor(t, 1);
    CHECK((f.e * f.e.transpose() - t).norm() < 1e-13);
    CHECK(std::abs(std::abs(f.e(0, 0)) - 1.0) < 1e-13);
    CHECK(f.warning.empty());
  }
  SUBCASE("diagonal") {
    Matrix<double> t = Matrix<double>::Zero(2, 2);
    t(0, 0) = 4;
    t(1, 1) = 1;
    const auto f = symmetric_psd_factor(t, 2);
    CHECK(std::abs(f.e(0, 0)) == doctest::Approx(2.0));
    CHECK(std::abs(f.e(1, 1)) == doctest::Approx(1.0));
    CHECK(f.eigenvalues(0) >= f.eigenvalues(1));
  }
  SUBCASE("negative eigenvalue is clipped with a warning") {
    Matrix<double> t = Matrix<double>::Zero(2, 2);
    t(0, 0) = 1;
    t(1, 1) = -1;
    const auto f = symmetric_psd_factor(t, 2);
    Matrix<double> expect = Matrix<double>::Zero(2, 2);
    expect(0, 0) = 1;
    CHECK((f.e * f.e.transpose() - expect).norm() < 1e-14);
    CHECK(f.clipped == 1);
    CHECK_FALSE(f.warning.empty());
  }
  SUBCASE("reconstruction error equals discarded plus clipped mass") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const auto g = gaussian_matrix(9, 9, rng);
      const Matrix<double> t = g + g.transpose();
      for (Index r : {1, 4, 9}) {
        const auto f = symmetric_psd_factor(t, r);
        const double err = (t - f.e * f.e.transpose()).squaredNorm();
        CHECK(err == doctest::Approx(f.discarded_sq + f.clipped_sq).epsilon(1e-10));
      }
    }
  }
  SUBCASE("asymmetric input is rejected") {
    Matrix<double> t(2, 2);
    t << 1, 2, 3, 1;
    CHECK_THROWS_AS(symmetric_psd_factor(t, 1), Error);
  }
}

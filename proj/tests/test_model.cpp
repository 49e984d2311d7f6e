#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace symtensor;

namespace {

Matrix<double> col(std::initializer_list<double> v) {
  Matrix<double> m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("pattern metadata") {
  CHECK(factor_count(SymmetryPattern::General3) == 3);
  CHECK(factor_count(SymmetryPattern::PartialSym3_12) == 2);
  CHECK(factor_count(SymmetryPattern::PartialSym4_13_24) == 2);
  CHECK(factor_count(SymmetryPattern::PartialSym4_13) == 3);
  CHECK(factor_count(SymmetryPattern::FullSym4) == 1);
  for (auto p : {SymmetryPattern::General3, SymmetryPattern::PartialSym3_12,
                 SymmetryPattern::PartialSym4_13_24, SymmetryPattern::PartialSym4_13,
                 SymmetryPattern::FullSym4, SymmetryPattern::General4})
    CHECK(parse_pattern(pattern_name(p)) == p);
  CHECK_FALSE(parse_pattern("psym5").has_value());
  CHECK_THROWS_AS(FactorModel<double>(SymmetryPattern::PartialSym3_12, {col({1, 2})}), Error);
  CHECK_THROWS_AS(FactorModel<double>(SymmetryPattern::PartialSym3_12,
                                      {col({1, 2}), Matrix<double>::Ones(3, 2)}),
                  Error);
}

TEST_CASE("reconstruct") {
  SUBCASE("psym3 rank one") {
    const FactorModel<double> m(SymmetryPattern::PartialSym3_12, {col({1, 2}), col({3})});
    const auto t = reconstruct(m);
    CHECK(t.dims() == std::vector<Index>{2, 2, 1});
    CHECK(t(0, 0, 0) == 3);
    CHECK(t(0, 1, 0) == 6);
    CHECK(t(1, 0, 0) == 6);
    CHECK(t(1, 1, 0) == 12);
  }
  SUBCASE("fsym4 of e1") {
    const FactorModel<double> m(SymmetryPattern::FullSym4, {col({1, 0})});
    const auto t = reconstruct(m);
    CHECK(t(0, 0, 0, 0) == 1);
    CHECK(t.squared_norm() == 1);
  }
  SUBCASE("zero column contributes nothing") {
    Rng rng(5);
    Matrix<double> a = gaussian_matrix(3, 3, rng), c = gaussian_matrix(4, 3, rng);
    a.col(1).setZero();
    const FactorModel<double> full(SymmetryPattern::PartialSym3_12, {a, c});
    Matrix<double> a2(3, 2), c2(4, 2);
    a2 << a.col(0), a.col(2);
    c2 << c.col(0), c.col(2);
    const FactorModel<double> dropped(SymmetryPattern::PartialSym3_12, {a2, c2});
    CHECK((reconstruct(full).data() - reconstruct(dropped).data()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("agrees with the entrywise oracle for every pattern") {
    Rng rng(9);
    const auto a = gaussian_matrix(3, 2, rng), b = gaussian_matrix(2, 2, rng),
               c = gaussian_matrix(4, 2, rng), d = gaussian_matrix(2, 2, rng);
    std::vector<FactorModel<double>> models{
        {SymmetryPattern::General3, {a, b, c}},
        {SymmetryPattern::PartialSym3_12, {a, c}},
        {SymmetryPattern::PartialSym4_13_24, {a, b}},
        {SymmetryPattern::PartialSym4_13, {a, b, c}},
        {SymmetryPattern::FullSym4, {a}},
        {SymmetryPattern::General4, {a, b, c, d}},
    };
    Vector<double> w(2);
    w << 2.0, -0.5;
    models.push_back({SymmetryPattern::FullSym4, {a}, w});
    for (const auto& m : models) {
      const auto t = reconstruct(m);
      const auto o = oracle::reconstruct(m);
      CHECK((t.data() - o.data()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    const FactorModel<double> m(SymmetryPattern::PartialSym3_12, {col({1, 2}), col({3})});
    CHECK_THROWS_AS(reconstruct(m, {3, 3, 1}), Error);
  }
}

TEST_CASE("residual_sq") {
  const FactorModel<double> m(SymmetryPattern::PartialSym3_12, {col({1, 2}), col({3})});
  const auto x = reconstruct(m);
  CHECK(residual_sq(x, m) == 0);
  const FactorModel<double> off(SymmetryPattern::PartialSym3_12, {col({1, 2}), col({2})});
  CHECK(residual_sq(x, off) == doctest::Approx(25).epsilon(1e-15));
  const FactorModel<double> zero(SymmetryPattern::PartialSym3_12, {col({0, 0}), col({0})});
  CHECK(residual_sq(x, zero) == doctest::Approx(x.squared_norm()));
  CHECK_THROWS_AS(residual_sq(DenseTensor<double>({2, 2, 2}), m), Error);
}

TEST_CASE("residual_sq is invariant under sign flips of symmetric columns") {
  Rng rng(21);
  DenseTensor<double> x({4, 4, 3});
  x.data() = gaussian_matrix(48, 1, rng).col(0);
  Matrix<double> a = gaussian_matrix(4, 3, rng);
  const Matrix<double> c = gaussian_matrix(3, 3, rng);
  const double base = residual_sq(x, FactorModel<double>(SymmetryPattern::PartialSym3_12, {a, c}));
  for (Index r = 0; r < 3; ++r) {
    Matrix<double> flipped = a;
    flipped.col(r) *= -1;
    const double v =
        residual_sq(x, FactorModel<double>(SymmetryPattern::PartialSym3_12, {flipped, c}));
    CHECK(v == doctest::Approx(base).epsilon(1e-14));
  }

  DenseTensor<double> y({3, 3, 3, 3});
  y.data() = gaussian_matrix(81, 1, rng).col(0);
  Matrix<double> f = gaussian_matrix(3, 2, rng);
  const double base4 = residual_sq(y, FactorModel<double>(SymmetryPattern::FullSym4, {f}));
  f.col(0) *= -1;
  CHECK(residual_sq(y, FactorModel<double>(SymmetryPattern::FullSym4, {f})) ==
        doctest::Approx(base4).epsilon(1e-14));
}

TEST_CASE("symmetry_check") {
  Rng rng(2);
  const FactorModel<double> m(SymmetryPattern::PartialSym3_12,
                              {gaussian_matrix(3, 2, rng), gaussian_matrix(2, 2, rng)});
  CHECK(symmetry_check(reconstruct(m), SymmetryPattern::PartialSym3_12, 0.0));

  DenseTensor<double> t({2, 2, 1});
  t(0, 1, 0) = 1.0;
  CHECK_FALSE(symmetry_check(t, SymmetryPattern::PartialSym3_12, 0.5));
  CHECK(symmetry_check(t, SymmetryPattern::PartialSym3_12, 1.0));

  const auto full = reconstruct(FactorModel<double>(SymmetryPattern::FullSym4,
                                                    {gaussian_matrix(3, 2, rng)}));
  CHECK(symmetry_check(full, SymmetryPattern::FullSym4));
  CHECK(symmetry_check(full, SymmetryPattern::PartialSym4_13));
  CHECK(symmetry_check(full, SymmetryPattern::PartialSym4_13_24));

  const auto case2 = reconstruct(FactorModel<double>(
      SymmetryPattern::PartialSym4_13,
      {gaussian_matrix(3, 2, rng), gaussian_matrix(3, 2, rng), gaussian_matrix(3, 2, rng)}));
  CHECK(symmetry_check(case2, SymmetryPattern::PartialSym4_13));
  CHECK_FALSE(symmetry_check(case2, SymmetryPattern::FullSym4));

  const auto rep = symmetry_defect(DenseTensor<double>({2, 3, 2}), SymmetryPattern::PartialSym3_12);
  CHECK_FALSE(rep.shape_ok);
  CHECK_FALSE(rep.diagnostic.empty());
  CHECK_FALSE(symmetry_check(DenseTensor<double>({2, 2, 2, 2}), SymmetryPattern::PartialSym3_12));
}

TEST_CASE("normalized preserves the tensor and fixes the reporting convention") {
  Rng rng(4);
  const auto a = gaussian_matrix(3, 2, rng), b = gaussian_matrix(4, 2, rng),
             c = gaussian_matrix(2, 2, rng);
  for (const FactorModel<double>& m :
       {FactorModel<double>(SymmetryPattern::PartialSym3_12, {a, c}),
        FactorModel<double>(SymmetryPattern::PartialSym4_13_24, {a, b}),
        FactorModel<double>(SymmetryPattern::PartialSym4_13, {a, b, c}),
        FactorModel<double>(SymmetryPattern::FullSym4, {a})}) {
    const auto n = normalized(m);
    const auto diff = reconstruct(n).data() - reconstruct(m).data();
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
    for (Index r = 0; r < 2; ++r) {
      CHECK(n.factors[0].col(r).norm() == doctest::Approx(1.0));
      CHECK(n.factors[0](0, r) > 0);
    }
  }
}

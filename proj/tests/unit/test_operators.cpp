#include <cstdio>
#include <filesystem>
#include <fstream>

#include "../support.hpp"
#include "doctest.h"
#include "paraprec/error.hpp"
#include "paraprec/mmio.hpp"

using namespace paraprec;
using namespace testsupport;

TEST_SUITE("operators") {
  TEST_CASE("evaluation matches the term-wise sum") {
    const SmallProblem p = small_problem(12, 3);
    for (double x : {0.0, 0.3, 0.77}) {
      const Point xi = make_point(x);
      const Vector phi = p.op->coefficients(xi);
      Matrix ref = Matrix::Zero(12, 12);
      for (std::size_t k = 0; k < p.op->num_terms(); ++k) ref += phi[static_cast<Index>(k)] * Matrix(p.op->terms()[k]);
      CHECK((Matrix(p.op->eval(xi)) - ref).norm() <= 1e-14 * ref.norm());
    }
  }

  TEST_CASE("all samples share one sparsity pattern") {
    SparseMatrix A0(3, 3), A1(3, 3);
    A0.insert(0, 0) = 1;
    A0.insert(1, 1) = 1;
    A0.insert(2, 2) = 1;
    A1.insert(0, 2) = 1;
    AffineOperator op({A0, A1}, {CoefficientFunction::constant(1), CoefficientFunction::monomial(1, 1)}, 1);
    CHECK(op.eval(make_point(0.0)).nonZeros() == op.eval(make_point(1.0)).nonZeros());
  }

  TEST_CASE("coefficient functions") {
    const Point xi = make_point(0.25);
    CHECK(CoefficientFunction::cosine(2.0, 2 * M_PI)(xi) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(CoefficientFunction::sine(2.0, 2 * M_PI)(xi) == doctest::Approx(2.0));
    CHECK(CoefficientFunction::log_uniform(0.1, 10.0)(make_point(0.5)) == doctest::Approx(1.0));
    CHECK(CoefficientFunction::monomial(3.0, 2.0)(xi) == doctest::Approx(0.1875));
    const auto t = CoefficientFunction::tabulated({make_point(0.0), make_point(1.0)}, {2.0, 5.0});
    CHECK(t(make_point(1.0)) == 5.0);
    CHECK_THROWS(t(make_point(0.5)));
  }

  TEST_CASE("dimension mismatch is rejected") {
    SparseMatrix A(3, 3), B(4, 4);
    CHECK_THROWS_AS(AffineOperator({A, B}, {CoefficientFunction::constant(1), CoefficientFunction::constant(1)}, 1),
                    DimensionError);
  }

  TEST_CASE("factorized inverse solves and transpose-solves") {
    const SmallProblem p = small_problem(15, 4);
    const SparseMatrix A = p.op->eval(make_point(0.4));
    const FactorizedInverse F = factorize(A);
    SplitMix64 rng(1);
    const Vector x = random_matrix(15, 1, rng);
    CHECK((A * F.apply(x) - x).norm() <= 1e-12 * x.norm());
    CHECK((SparseMatrix(A.transpose()) * F.apply(x, true) - x).norm() <= 1e-12 * x.norm());
    CHECK(F.condition_estimate() >= 1.0);
  }

  TEST_CASE("singular operator reports a pivot") {
    SparseMatrix A(3, 3);
    A.insert(0, 0) = 1;
    A.insert(1, 1) = 1;
    A.insert(2, 0) = 1;
    try {
      factorize(A);
      FAIL("expected SingularOperator");
    } catch (const SingularOperator& e) {
      CHECK(e.pivot() >= 0);
    }
  }

  TEST_CASE("norm matrix") {
    const NormMatrix I = NormMatrix::identity(4);
    Vector v(4);
    v << 1, 2, 2, 0;
    CHECK(I.xnorm(v) == doctest::Approx(3.0));
    CHECK(I.xdualnorm(v) == doctest::Approx(3.0));
    SparseMatrix R(2, 2);
    R.insert(0, 0) = 4;
    R.insert(1, 1) = 1;
    const NormMatrix N(R);
    Vector w(2);
    w << 1, 1;
    CHECK(N.xnorm(w) == doctest::Approx(std::sqrt(5.0)));
    CHECK(N.xdualnorm(w) == doctest::Approx(std::sqrt(1.25)));
    SparseMatrix bad(2, 2);
    bad.insert(0, 0) = 1;
    bad.insert(0, 1) = 1;
    bad.insert(1, 1) = 1;
    CHECK_THROWS_AS(NormMatrix{bad}, NotSPD);
    SparseMatrix indef(2, 2);
    indef.insert(0, 0) = 1;
    indef.insert(1, 1) = -1;
    CHECK_THROWS_AS(NormMatrix{indef}, NotSPD);
  }
}

TEST_SUITE("mmio") {
  const std::string dir = (std::filesystem::temp_directory_path() / "paraprec_mmio_test").string();

  TEST_CASE("identity round trip") {
    std::filesystem::create_directories(dir);
    SparseMatrix I(3, 3);
    I.setIdentity();
    write_matrix_market(dir + "/I.mtx", I);
    CHECK((Matrix(read_sparse_matrix_market(dir + "/I.mtx")) - Matrix::Identity(3, 3)).norm() == 0.0);
  }

  TEST_CASE("random sparse round trip is exact") {
    std::filesystem::create_directories(dir);
    SplitMix64 rng(5);
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < 100; ++k)
      t.emplace_back(rng.below(100), rng.below(100), (rng.uniform() - 0.5) * std::pow(10.0, 40 * rng.uniform() - 20));
    SparseMatrix A(100, 100);
    A.setFromTriplets(t.begin(), t.end());
    write_matrix_market(dir + "/A.mtx", A);
    const SparseMatrix B = read_sparse_matrix_market(dir + "/A.mtx");
    CHECK((Matrix(A) - Matrix(B)).cwiseAbs().maxCoeff() == 0.0);
    const Matrix D = random_matrix(7, 3, rng) * 1e-300;
    write_matrix_market(dir + "/D.mtx", D);
    CHECK((read_dense_matrix_market(dir + "/D.mtx") - D).cwiseAbs().maxCoeff() == 0.0);
    const Vector v = random_matrix(9, 1, rng);
    write_matrix_market(dir + "/v.mtx", v);
    CHECK((read_vector_matrix_market(dir + "/v.mtx") - v).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("symmetric storage is expanded") {
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/s.mtx") << "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 3.0\n";
    const Matrix S(read_sparse_matrix_market(dir + "/s.mtx"));
    CHECK(S(0, 1) == 3.0);
    CHECK(S(1, 0) == 3.0);
  }

  TEST_CASE("header-only file is an empty matrix") {
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/e.mtx") << "%%MatrixMarket matrix coordinate real general\n";
    CHECK_THROWS_AS(read_sparse_matrix_market(dir + "/e.mtx"), EmptyMatrix);
  }

  TEST_CASE("malformed entry reports its line") {
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/m.mtx") << "%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n1 x 1.0\n";
    try {
      read_sparse_matrix_market(dir + "/m.mtx");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
}

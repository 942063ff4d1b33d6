#include <Eigen/SVD>

#include "../support.hpp"
#include "doctest.h"
#include "paraprec/error.hpp"
#include "paraprec/reduction.hpp"

using namespace paraprec;
using namespace testsupport;

namespace {

ReducedModel model_with_snapshots(const SmallProblem& p, const std::vector<double>& xs) {
  ReducedModel m(p.op, p.rhs, p.RX);
  for (double x : xs) {
    const Point xi = make_point(x);
    m.add_snapshot(factorize(p.op->eval(xi)).apply(p.rhs->eval(xi)), xi);
  }
  return m;
}

Vector truth(const SmallProblem& p, const Point& xi) { return factorize(p.op->eval(xi)).apply(p.rhs->eval(xi)); }

}  // namespace

TEST_SUITE("reduction") {
  TEST_CASE("basis is X-orthonormal and dependent snapshots are dropped") {
    const SmallProblem p = small_problem(30, 1);
    ReducedModel m = model_with_snapshots(p, {0.1, 0.4, 0.7});
    CHECK(m.dim() == 3);
    const Matrix G = m.U().transpose() * p.RX.apply(m.U());
    CHECK((G - Matrix::Identity(3, 3)).norm() <= 1e-12);
    CHECK_FALSE(m.add_snapshot(2.0 * m.U().col(0) - m.U().col(2), make_point(0.5)));
    CHECK_FALSE(m.add_snapshot(Vector::Zero(30), make_point(0.5)));
    CHECK(m.dim() == 3);
  }

  TEST_CASE("best approximation is the X-orthogonal projection") {
    const SmallProblem p = small_problem(30, 2);
    const ReducedModel m = model_with_snapshots(p, {0.1, 0.4, 0.7});
    const Point xi = make_point(0.55);
    const Vector u = truth(p, xi);
    const Vector a = best_approx(xi, m);
    const Vector e = u - m.U() * a;
    CHECK((m.U().transpose() * p.RX.apply(e)).norm() <= 1e-11 * u.norm());
  }

  TEST_CASE("exact preconditioner gives delta = 0 and the best approximation") {
    const SmallProblem p = small_problem(30, 3);
    const ReducedModel m = model_with_snapshots(p, {0.1, 0.4, 0.7});
    const Point xi = make_point(0.3);
    const LocalPreconditioner P = LocalPreconditioner::exact(factorize(p.op->eval(xi)));
    CHECK(delta_rm(xi, m, P) <= 1e-6);
    CHECK((petrov_galerkin(xi, m, P) - best_approx(xi, m)).norm() <= 1e-10);
    CHECK(quasi_opt_constant(0.0) == doctest::Approx(1.0));
    CHECK(std::isinf(quasi_opt_constant(1.0)));
  }

  TEST_CASE("norm-inverse preconditioner reduces to Galerkin and the dual residual") {
    const SmallProblem p = small_problem(30, 4);
    const ReducedModel m = model_with_snapshots(p, {0.2, 0.9});
    const Point xi = make_point(0.6);
    const LocalPreconditioner P = LocalPreconditioner::norm_inverse(p.RX);
    const Vector a = galerkin(xi, m);
    CHECK((petrov_galerkin(xi, m, P) - a).norm() <= 1e-10 * a.norm());
    const double r1 = preconditioned_residual_norm(xi, Vector(m.U() * a), P, m);
    const double r2 = dual_residual_norm(xi, m.U() * a, *p.op, *p.rhs, p.RX);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-10));
  }

  TEST_CASE("quasi-optimality bound holds for interpolated preconditioners") {
    const SmallProblem p = small_problem(40, 5, 2.0);
    const ReducedModel m = model_with_snapshots(p, {0.0, 0.3, 0.6, 0.95});
    const InverseBasis basis = build_basis(*p.op, {make_point(0.2), make_point(0.8)});
    SplitMix64 rng(7);
    for (int t = 0; t < 10; ++t) {
      const Point xi = make_point(rng.uniform());
      Vector lam(2);
      lam << rng.uniform(), rng.uniform();
      const LocalPreconditioner P = LocalPreconditioner::interpolated(basis, lam);
      const double d = delta_rm(xi, m, P);
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
      const Vector u = truth(p, xi);
      const double err_pg = p.RX.xnorm(u - m.U() * petrov_galerkin(xi, m, P));
      const double err_best = p.RX.xnorm(u - m.U() * best_approx(xi, m));
      if (d < 1.0) CHECK(err_pg <= quasi_opt_constant(d) * err_best * (1 + 1e-8) + 1e-12);
    }
  }

  TEST_CASE("attached blocks reproduce the direct computation") {
    const SmallProblem p = small_problem(35, 6);
    ReducedModel m = model_with_snapshots(p, {0.15, 0.5, 0.85});
    const InverseBasis basis = build_basis(*p.op, {make_point(0.25), make_point(0.75)});
    m.attach(basis);
    CHECK(m.attached_to(basis));
    Vector lam(2);
    lam << 0.7, -0.2;
    const LocalPreconditioner P = LocalPreconditioner::interpolated(basis, lam);
    const Point xi = make_point(0.42);
    const Vector a = petrov_galerkin(xi, m, P);
    CHECK((m.petrov_galerkin_blocks(xi, lam) - a).norm() <= 1e-10 * a.norm());
    const Vector r = P.apply(Vector(Matrix(p.op->eval(xi)) * (m.U() * a) - p.rhs->eval(xi)));
    CHECK((m.preconditioned_residual_blocks(xi, lam, a) - r).norm() <= 1e-10 * std::max(1.0, r.norm()));
    const Matrix Z = P.apply_transpose(Matrix(p.RX.apply(m.U())));
    CHECK((m.pt_rx_u_blocks(lam) - Z).norm() <= 1e-10 * Z.norm());
    m.add_snapshot(truth(p, make_point(0.33)), make_point(0.33));
    CHECK_FALSE(m.attached_to(basis));
  }

  TEST_CASE("singular bounds match a dense SVD in the Euclidean norm") {
    const SmallProblem p = small_problem(25, 7);
    const Point xi = make_point(0.5);
    const InverseBasis basis = build_basis(*p.op, {make_point(0.4)});
    Vector lam(1);
    lam << 1.0;
    const LocalPreconditioner P = LocalPreconditioner::interpolated(basis, lam);
    const SingularBounds s = singular_bounds(xi, P, *p.op, NormMatrix::identity(25));
    const Vector sv = Eigen::JacobiSVD<Matrix>(P.dense() * Matrix(p.op->eval(xi))).singularValues();
    CHECK(s.beta == doctest::Approx(sv[0]).epsilon(1e-10));
    CHECK(s.alpha == doctest::Approx(sv[24]).epsilon(1e-10));
    CHECK(s.kappa == doctest::Approx(sv[0] / sv[24]).epsilon(1e-10));
  }

  TEST_CASE("effectivity flags exact solutions") {
    const SmallProblem p = small_problem(20, 8);
    const Point xi = make_point(0.2);
    const Vector u = truth(p, xi);
    const LocalPreconditioner P = LocalPreconditioner::exact(factorize(p.op->eval(xi)));
    const Effectivity e = effectivity(xi, u, P, u, *p.op, *p.rhs, p.RX);
    CHECK(e.exact);
    CHECK(e.eta == 1.0);
    const Vector v = u + 0.01 * Vector::Ones(20);
    CHECK(effectivity(xi, v, P, u, *p.op, *p.rhs, NormMatrix::identity(20)).eta == doctest::Approx(1.0));
  }

  TEST_CASE("confidence intervals and quantiles") {
    auto [lo, hi] = confidence_interval({10.0, 1.0, 3.0, 2.0}, 0.5);
    CHECK(lo == 1.0);
    CHECK(hi == 2.0);
    std::tie(lo, hi) = confidence_interval({1.0, 5.0, 5.1, 5.2, 9.0, NAN}, 0.6);
    CHECK(lo == 5.0);
    CHECK(hi == 5.2);
    std::tie(lo, hi) = confidence_interval({4.0, 1.0}, 1.0);
    CHECK(lo == 1.0);
    CHECK(hi == 4.0);
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
    CHECK(quantile({7.0}, 0.3) == 7.0);
  }

  TEST_CASE("POD basis is X-orthonormal and captures low-rank snapshots") {
    const SmallProblem p = small_problem(30, 9);
    SplitMix64 rng(1);
    const Matrix S = random_matrix(30, 3, rng) * random_matrix(3, 12, rng);
    const Matrix U = pod_basis(S, p.RX, 3);
    CHECK((U.transpose() * p.RX.apply(U) - Matrix::Identity(3, 3)).norm() <= 1e-10);
    const Matrix proj = U * (U.transpose() * p.RX.apply(S));
    CHECK((proj - S).norm() <= 1e-9 * S.norm());
    CHECK_THROWS_AS(pod_basis(S, p.RX, 5), InvalidArgument);
  }

  TEST_CASE("ideal reduced basis greedy decreases and stagnates on a finite manifold") {
    // Constant operator, two-term right-hand side: solutions span two dimensions.
    SplitMix64 rng(3);
    const Index n = 20;
    const Matrix A = 3.0 * Matrix::Identity(n, n) + 0.2 * random_matrix(n, n, rng);
    auto op = std::make_shared<AffineOperator>(std::vector<SparseMatrix>{to_sparse(A)},
                                               std::vector<CoefficientFunction>{CoefficientFunction::constant(1.0)}, 1);
    auto rhs = std::make_shared<AffineVector>(
        std::vector<Vector>{random_matrix(n, 1, rng), random_matrix(n, 1, rng)},
        std::vector<CoefficientFunction>{CoefficientFunction::constant(1.0), CoefficientFunction::monomial(1.0, 1.0)},
        1);
    RbOptions opt;
    opt.mode = RbMode::ideal;
    opt.R = 5;
    const RbResult r = rb_greedy(op, rhs, uniform_grid(0.0, 1.0, 30), NormMatrix::identity(n), opt);
    CHECK(r.trace.status == "stagnated");
    CHECK(r.model.dim() == 2);
    CHECK(r.trace.records.back().sup_rel_err_all <= 1e-10);

    const SmallProblem p = small_problem(30, 10);
    opt.R = 6;
    const RbResult q = rb_greedy(p.op, p.rhs, uniform_grid(0.0, 1.0, 40), p.RX, opt);
    CHECK(q.trace.records.size() == 6);
    for (std::size_t k = 1; k < q.trace.records.size(); ++k)
      CHECK(q.trace.records[k].sup_rel_err_all <= q.trace.records[k - 1].sup_rel_err_all * (1 + 1e-10));
  }

  TEST_CASE("reduced greedy modes run and keep sensible estimates") {
    const SmallProblem p = small_problem(30, 11);
    const PointSet grid = uniform_grid(0.0, 1.0, 40);
    for (RbMode mode : {RbMode::standard, RbMode::precond_reuse}) {
      RbOptions opt;
      opt.mode = mode;
      opt.R = 4;
      opt.V = Matrix::Identity(30, 30);
      const RbResult r = rb_greedy(p.op, p.rhs, grid, p.RX, opt);
      CHECK(r.model.dim() == 4);
      for (const auto& rec : r.trace.records) {
        CHECK(rec.eff_lo > 0.0);
        CHECK(rec.eff_lo <= rec.eff_hi);
      }
    }
    CHECK(parse_rb_mode(to_string(RbMode::precond_fixed)) == RbMode::precond_fixed);
    CHECK_THROWS(parse_rb_mode("nope"));
  }
}

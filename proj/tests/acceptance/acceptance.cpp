// Acceptance suite: one PASS/FAIL line per criterion. With an argument k only
// criterion k runs. Tolerances are fixed here and never relaxed.
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "paraprec/diagnostics.hpp"
#include "paraprec/eim.hpp"
#include "paraprec/error.hpp"
#include "paraprec/greedy.hpp"
#include "paraprec/precond.hpp"
#include "paraprec/preconditioner.hpp"
#include "paraprec/reduction.hpp"
#include "paraprec/sketch.hpp"

using namespace paraprec;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------
void sketch_tables(Outcome& o) {
  Timer t;
  const std::vector<double> ns = {1e4, 1e6, 1e8};
  const std::vector<int> ms = {2, 5, 10, 20, 50};
  const long rad[3][5] = {{239, 363, 567, 972, 2185}, {270, 395, 599, 1005, 2219}, {301, 427, 632, 1038, 2253}};
  const long srht[3][5] = {{27059, 63298, 155129, 455851, 2286645},
                           {30597, 69129, 164750, 473011, 2326301},
                           {34112, 74929, 174333, 490126, 2365914}};
  int ok_a = 0, ok_b = 0;
  long worst_a = 0, worst_b = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) {
      const long ka = min_sketch_columns(SketchKind::rademacher, ns[i], ms[j], 10.0, 1e-3).K;
      const long kb = min_sketch_columns(SketchKind::psrht, ns[i], ms[j], 10.0, 1e-3).K;
      const long da = ka - rad[i][j], db = kb - srht[i][j];
      if (std::labs(da) <= 1) ++ok_a;
      else o.detail << " rademacher(n=" << fmt(ns[i]) << ",m=" << ms[j] << "): " << ka << " vs " << rad[i][j] << ";";
      if (std::labs(db) <= 5) ++ok_b;
      else o.detail << " psrht(n=" << fmt(ns[i]) << ",m=" << ms[j] << "): " << kb << " vs " << srht[i][j] << ";";
      worst_a = std::max(worst_a, std::labs(da));
      worst_b = std::max(worst_b, std::labs(db));
    }
  const double secs = t.seconds();
  o.detail << " rademacher " << ok_a << "/15 within +-1 (worst " << worst_a << "), psrht " << ok_b
           << "/15 within +-5 (worst " << worst_b << "), " << fmt(secs, 3) << " s";
  o.require(ok_a == 15, "rademacher sizes");
  o.require(ok_b == 15, "psrht sizes");
  o.require(secs < 1.0, "runtime");
}

// ---------------------------------------------------------------------------
void hadamard_exact(Outcome& o) {
  Timer t;
  bool orth = true;
  for (Index s = 1; s <= 1024; s *= 2) {
    const Eigen::MatrixXi H = hadamard_int(s);
    const Eigen::MatrixXi G = H * H.transpose();
    orth = orth && G == Eigen::MatrixXi::Identity(s, s) * static_cast<int>(s);
  }
  o.require(orth, "H H^T = sI");

  const Index n = 600, K = 128;
  const SketchMatrix V = make_sketch(SketchKind::partial_hadamard, n, K);
  const auto pattern = vvt_pattern(V);
  const auto allowed = vvt_allowed_offsets(n, K);
  const std::set<Index> pat(pattern.begin(), pattern.end()), allow(allowed.begin(), allowed.end());
  bool subset = std::includes(allow.begin(), allow.end(), pat.begin(), pat.end());
  // Entry-wise check of V V^T in integer arithmetic: K * (V V^T)(i, j) = sum_k H(i,k) H(j,k).
  std::set<Index> occupied;
  long off_pattern = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      long acc = 0;
      for (Index k = 0; k < K; ++k) acc += hadamard_entry(i, k) * hadamard_entry(j, k);
      if (acc != 0) occupied.insert(j - i);
      if (acc != 0 && !pat.count(j - i)) ++off_pattern;
    }
  const double secs = t.seconds();
  o.detail << " H_s H_s^T = sI for s<=1024: " << (orth ? "yes" : "no") << "; pattern " << pat.size()
           << " diagonals, entries off pattern " << off_pattern << ", pattern == occupied "
           << (occupied == pat ? "yes" : "no") << ", " << fmt(secs, 3) << " s";
  o.require(subset, "pattern within multiples of K");
  o.require(off_pattern == 0 && occupied == pat, "entry-wise zero structure");
  o.require(secs < 5.0, "runtime");
}

// ---------------------------------------------------------------------------
bool match_within(std::vector<double> got, std::vector<double> want, double tol, std::ostringstream& os) {
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  bool ok = got.size() == want.size();
  for (std::size_t k = 0; k < std::min(got.size(), want.size()); ++k) {
    const double d = std::abs(got[k] - want[k]);
    if (d > tol) {
      ok = false;
      os << " point " << fmt(got[k]) << " vs " << want[k] << " (off by " << fmt(d, 3) << ");";
    }
  }
  return ok;
}

void eim_redundancy(Outcome& o) {
  const BenchmarkProblem p = assemble_adr(10, 50.0, 250);
  const EimPair e = eim_for_operator(*p.op, p.grid);
  std::vector<double> mp, sp;
  for (const auto& x : e.M.magic_points) mp.push_back(x[0]);
  for (const auto& x : e.S.magic_points) sp.push_back(x[0]);
  o.detail << " rank M " << e.M.rank() << ", rank S " << e.S.rank() << "; M points";
  for (double x : mp) o.detail << ' ' << fmt(x, 3);
  o.detail << "; S points";
  for (double x : sp) o.detail << ' ' << fmt(x, 3);
  o.detail << ";";
  o.require(e.M.rank() == 5, "rank of products is 5");
  o.require(e.S.rank() == 3, "rank of coefficients is 3");
  // one grid cell, plus half a unit in the second decimal of the two-digit reference points
  const double tol = 1.0 / 249.0 + 0.005;
  const bool okM = match_within(mp, {0.0, 0.25, 0.37, 0.56, 0.80}, tol, o.detail);
  const bool okS = match_within(sp, {0.0, 0.25, 0.62}, tol, o.detail);
  o.require(okM, "M magic points");
  o.require(okS, "S magic points");
}

// ---------------------------------------------------------------------------
void interpolation_property(Outcome& o) {
  const BenchmarkProblem p = assemble_adr(40, 50.0, 250);
  const Index n = p.op->dim();
  const SketchMatrix V = make_sketch(SketchKind::psrht, n, 128, derive_seed(0, "sketch"));
  const PointSet pts = {make_point(0.05), make_point(0.2), make_point(0.8)};
  const double tol_res = 1e-8 * std::sqrt(static_cast<double>(n));
  for (const Constraint c : {Constraint::none(), Constraint::nonneg(), Constraint::kappa(5e4)}) {
    const Preconditioner P = make_preconditioner(p.op, p.grid, pts, V.dense(), c);
    double worst_lambda = 0.0, worst_res = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vector lam = P.coefficients(pts[i]).lambda;
      Vector e = Vector::Zero(3);
      e[static_cast<Index>(i)] = 1.0;
      worst_lambda = std::max(worst_lambda, (lam - e).cwiseAbs().maxCoeff());
      worst_res = std::max(worst_res, P.sketched_residual(pts[i]));
    }
    o.detail << " " << to_string(c) << ": max|lambda-e_i| " << fmt(worst_lambda, 3) << ", max residual "
             << fmt(worst_res, 3) << ";";
    o.require(worst_lambda <= 1e-8, to_string(c) + " lambda");
    o.require(worst_res <= tol_res, to_string(c) + " residual");
  }
}

// ---------------------------------------------------------------------------
// Largest principal angle sine between range(U) and range(R^-1 B) in the X
// geometry, the brute-force form of delta.
double delta_oracle(const Matrix& R, const Matrix& U, const Matrix& B) {
  Eigen::LLT<Matrix> llt(R);
  const Matrix L = llt.matrixL();
  const Matrix X1 = L.transpose() * U;
  const Matrix X2 = L.triangularView<Eigen::Lower>().solve(B);  // L^T R^-1 B = L^-1 B
  const Matrix Q1 = Eigen::HouseholderQR<Matrix>(X1).householderQ() * Matrix::Identity(X1.rows(), X1.cols());
  const Matrix Q2 = Eigen::HouseholderQR<Matrix>(X2).householderQ() * Matrix::Identity(X2.rows(), X2.cols());
  const Matrix D = Q1 - Q2 * (Q2.transpose() * Q1);
  return Eigen::JacobiSVD<Matrix>(D).singularValues()[0];
}

void oracle_equivalences(Outcome& o) {
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0;
  int p21 = 0, p26 = 0, p26_applicable = 0, p26_inverse_form = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 20 + 4 * trial % 60;
    const SmallProblem sp = small_problem(n, 1000 + trial);
    SplitMix64 rng(derive_seed(trial, "oracle"));
    const Index m = 2 + trial % 4;
    const PointSet pts = random_points(m, rng);
    const InverseBasis basis = build_basis(*sp.op, pts);
    const Point xi = make_point(rng.uniform());
    const SparseMatrix A = sp.op->eval(xi);
    std::vector<Matrix> Pd;
    for (const auto& q : pts) Pd.push_back(dense_inverse(sp.op->eval(q)));
    const Matrix Ad(A);

    // (a) V = I against traces
    const NormalEq ne = assemble_normal_eq(A, basis, Matrix(Matrix::Identity(n, n)));
    Matrix M(m, m);
    Vector S(m);
    for (Index i = 0; i < m; ++i) {
      const Matrix PiA = Pd[i] * Ad;
      S[i] = PiA.trace();
      for (Index j = 0; j < m; ++j) M(i, j) = (PiA.transpose() * (Pd[j] * Ad)).trace();
    }
    worst_a = std::max({worst_a, (ne.M - M).norm() / M.norm(), (ne.S - S).norm() / S.norm()});

    // (b) sketched residual against the dense product
    const Matrix V = make_sketch(SketchKind::rademacher, n, n / 2 + m, trial).dense();
    const NormalEq nev = assemble_normal_eq(A, basis, V);
    const Vector lam = solve_unconstrained(nev).lambda;
    Matrix P = Matrix::Zero(n, n);
    for (Index i = 0; i < m; ++i) P += lam[i] * Pd[i];
    const double direct = ((Matrix::Identity(n, n) - P * Ad) * V).norm();
    worst_b = std::max(worst_b, std::abs(frob_residual(nev, lam) - direct) / std::max(1.0, direct));

    // (c) delta against principal angles
    ReducedModel model(sp.op, sp.rhs, sp.RX);
    const Index r = 2 + trial % 4;
    model.set_basis(random_matrix(n, r, rng));
    const Matrix R(sp.RX.matrix());
    const Matrix B = (P * Ad).transpose() * R * model.U();
    const double d_ref = delta_oracle(R, model.U(), B);
    const double d = delta_rm(xi, model, LocalPreconditioner::interpolated(basis, lam));
    worst_c = std::max(worst_c, std::abs(d - d_ref));

    // (d) spectral bounds of the projections
    const NormalEq ne_full = assemble_normal_eq(A, basis, Matrix(Matrix::Identity(n, n)));
    const Vector lam_full = solve_unconstrained(ne_full).lambda;
    Matrix Pf = Matrix::Zero(n, n);
    for (Index i = 0; i < m; ++i) Pf += lam_full[i] * Pd[i];
    const Prop21Diagnostics d21 = diagnostics_prop21(Ad, Pf);
    if (d21.frob_gap_ok) ++p21;
    const Matrix Vp = make_sketch(SketchKind::psrht, n, std::min<Index>(n, 3 * n / 4), 77 + trial).dense();
    const Vector lam_v = solve_unconstrained(assemble_normal_eq(A, basis, Vp)).lambda;
    const Prop26Diagnostics d26 = diagnostics_prop26(Ad, Pd, lam_v, Vp);
    if (d26.applicable) ++p26_applicable;
    if (d26.lower_ok && d26.upper_ok && d26.kappa_ok) ++p26;
    if (d26.lower_inverse_form_ok) ++p26_inverse_form;
  }
  o.detail << " (a) max rel err " << fmt(worst_a, 3) << "; (b) max err " << fmt(worst_b, 3) << "; (c) max |delta-oracle| "
           << fmt(worst_c, 3) << "; (d) first projection bounds " << p21 << "/20, sketched bounds " << p26
           << "/20 (eps'<1 on " << p26_applicable << ", variant with 1/(1-eps') lower bound holds on "
           << p26_inverse_form << ")";
  o.require(worst_a <= 1e-10, "(a)");
  o.require(worst_b <= 1e-8, "(b)");
  o.require(worst_c <= 1e-8, "(c)");
  o.require(p21 == 20, "(d) unsketched");
  o.require(p26 == 20, "(d) sketched");
}

// ---------------------------------------------------------------------------
void constrained_guarantees(Outcome& o) {
  int nn_checked = 0, nn_ok = 0, k_ok = 0, k_active = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 30 + trial % 5 * 10;
    const SmallProblem sp = small_problem(n, 5000 + trial, 2.0);
    SplitMix64 rng(derive_seed(trial, "constrained"));
    const Index m = 2 + trial % 4;
    const PointSet pts = random_points(m, rng);
    const PointSet grid = uniform_grid(0.0, 1.0, 50);
    const Matrix V = Matrix::Identity(n, n);
    const Point xi = make_point(rng.uniform());
    std::vector<Matrix> Pd;
    for (const auto& q : pts) Pd.push_back(dense_inverse(sp.op->eval(q)));
    auto dense_P = [&](const Vector& lam) {
      Matrix P = Matrix::Zero(n, n);
      for (Index i = 0; i < m; ++i) P += lam[i] * Pd[static_cast<std::size_t>(i)];
      return P;
    };

    const Preconditioner Pn = make_preconditioner(sp.op, grid, pts, V, Constraint::nonneg());
    const Vector lam = Pn.coefficients(xi).lambda;
    const SpectralConstants sc = spectral_constants(Pn.basis());
    const double margin = lam.dot(sc.gamma_minus);
    if (margin > 0.0) {
      ++nn_checked;
      const Matrix P = dense_P(lam);
      const double mineig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (P + P.transpose())).eigenvalues().minCoeff();
      if (mineig > 0.0) ++nn_ok;
    }

    const double kbar = sc.kappa_threshold() * (1.0 + 0.5 * rng.uniform());
    const Preconditioner Pk = make_preconditioner(sp.op, grid, pts, V, Constraint::kappa(kbar));
    const CoefficientSolution cs = Pk.coefficients(xi);
    const Matrix P = dense_P(cs.lambda);
    const Vector sv = Eigen::JacobiSVD<Matrix>(P).singularValues();
    const double kappa = sv[0] / sv[n - 1];
    const Vector lu = Pk.size() ? solve_unconstrained(Pk.normal_eq(xi)).lambda : Vector();
    const Vector svu = Eigen::JacobiSVD<Matrix>(dense_P(lu)).singularValues();
    if (svu[0] / svu[n - 1] > kbar) ++k_active;
    worst_ratio = std::max(worst_ratio, kappa / kbar);
    if (kappa <= kbar * (1.0 + 1e-6)) ++k_ok;
  }
  o.detail << " nonneg: positive definite symmetric part on " << nn_ok << "/" << nn_checked
           << " trials with positive margin; kappa: " << k_ok << "/50 within bound (unconstrained solution exceeded the "
           << "bound on " << k_active << "), max kappa/bound " << fmt(worst_ratio, 8);
  o.require(nn_checked > 0 && nn_ok == nn_checked, "nonneg definiteness");
  o.require(k_ok == 50, "kappa bound");
}

// ---------------------------------------------------------------------------
void greedy_trend(Outcome& o) {
  Timer t;
  const BenchmarkProblem p = assemble_adr(40, 50.0, 250);
  const Index n = p.op->dim(), K = 128;
  const SketchMatrix V = make_sketch(SketchKind::psrht, n, K, derive_seed(0, "sketch"));
  GreedyOptions go;
  go.M_max = 30;
  go.seed_point = make_point(0.0);
  go.diagnostics = true;
  go.kappa_at = {5, 30};
  const Preconditioner P = greedy_frob(p.op, p.grid, V.dense(), go);
  KappaEvaluator kev(p.op);
  const Preconditioner P0(p.op, V.dense(), Constraint::none(), P.eim_models());
  const double kappa0 = sup_kappa(P0, p.grid, kev);

  // The reference residuals use the unscaled transform (R H D)^T, i.e. sqrt(K)
  // times the residual of the rescaled sketch.
  const std::vector<int> ms = {1, 2, 5, 10, 20, 30};
  const std::vector<double> ref = {300, 265, 80.5, 35.4, 10.0, 7.6};
  int within = 0;
  o.detail << " sup residual (unscaled sketch) at m=";
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const double v = std::sqrt(static_cast<double>(K)) * P.history[static_cast<std::size_t>(ms[k] - 1)].sup_residual;
    const double ratio = v / ref[k];
    const bool ok = ratio <= 3.0 && ratio >= 1.0 / 3.0;
    within += ok;
    o.detail << ms[k] << ": " << fmt(v) << " (ref " << ref[k] << ", x" << fmt(ratio, 3) << (ok ? "" : " OUT") << ") ";
  }
  const double k5 = P.history[4].sup_kappa.value_or(NAN), k30 = P.history[29].sup_kappa.value_or(NAN);
  o.detail << "; sup kappa m=0: " << fmt(kappa0) << ", m=5: " << fmt(k5) << ", m=30: " << fmt(k30) << "; "
           << fmt(t.seconds(), 3) << " s";
  o.require(within == 6, "residuals within factor 3");
  o.require(kappa0 >= 5e3 && kappa0 <= 2e4, "kappa at m=0 within factor 2 of 1e4");
  o.require(k30 < 50.0, "kappa at m=30 below 50");
  o.require(k30 < k5 && k5 < kappa0, "kappa decreasing");
}

// ---------------------------------------------------------------------------
void quasi_optimality(Outcome& o) {
  int ok37 = 0, ok38 = 0, n38 = 0, total = 0;
  double worst_cover = 0.0;
  auto check = [&](const Point& xi, const ReducedModel& model, const LocalPreconditioner& P, const Vector& u) {
    const NormMatrix& X = model.norm();
    const Vector ustar = model.U() * best_approx_of(u, model);
    const Vector ur = model.U() * petrov_galerkin(xi, model, P);
    const double d = delta_rm(xi, model, P);
    const double slack = 1e-8 * X.xnorm(u);
    ++total;
    if (X.xnorm(ustar - ur) <= d * X.xnorm(u - ur) + slack) ++ok37;
    if (d < 1.0) {
      ++n38;
      if (X.xnorm(u - ur) <= quasi_opt_constant(d) * X.xnorm(u - ustar) + slack) ++ok38;
    }
  };
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 30 + trial;
    const SmallProblem sp = small_problem(n, 9000 + trial);
    SplitMix64 rng(derive_seed(trial, "quasi-opt"));
    const PointSet pts = random_points(3, rng);
    const Preconditioner P = make_preconditioner(sp.op, uniform_grid(0, 1, 60), pts, Matrix::Identity(n, n),
                                                 Constraint::none());
    ReducedModel model(sp.op, sp.rhs, sp.RX);
    model.set_basis(random_matrix(n, 4, rng));
    const Point xi = make_point(rng.uniform());
    const Vector u = factorize(sp.op->eval(xi)).apply(sp.rhs->eval(xi));
    check(xi, model, P.at(xi), u);
  }
  const BenchmarkProblem p = assemble_adr(40, 50.0, 250);
  const Index n = p.op->dim();
  Matrix snaps(n, 30);
  for (Index k = 0; k < 30; ++k) {
    const Point& xi = p.grid[static_cast<std::size_t>(k * 249 / 29)];
    snaps.col(k) = factorize(p.op->eval(xi)).apply(p.rhs->eval(xi));
  }
  ReducedModel model(p.op, p.rhs, p.RX);
  model.set_basis(pod_basis(snaps, p.RX, 10));
  const SketchMatrix V = make_sketch(SketchKind::psrht, n, 128, derive_seed(0, "sketch"));
  const Preconditioner P = make_preconditioner(p.op, p.grid, {make_point(0.05), make_point(0.2), make_point(0.8)},
                                               V.dense(), Constraint::none());
  for (int k = 0; k < 20; ++k) {
    const Point& xi = p.grid[static_cast<std::size_t>(3 + 12 * k)];
    const Vector u = factorize(p.op->eval(xi)).apply(p.rhs->eval(xi));
    check(xi, model, P.at(xi), u);
  }
  // m covering the queried point: the projection is the orthogonal one
  for (const double x : {0.05, 0.2, 0.8}) {
    const Point xi = make_point(x);
    const Vector u = factorize(p.op->eval(xi)).apply(p.rhs->eval(xi));
    const Vector ustar = model.U() * best_approx_of(u, model);
    const Vector ur = model.U() * petrov_galerkin(xi, model, P);
    worst_cover = std::max(worst_cover, p.RX.xnorm(ur - ustar) / p.RX.xnorm(u));
  }
  o.detail << " first bound " << ok37 << "/" << total << ", second bound " << ok38 << "/" << n38
           << " (delta<1), covered-point |PG - best| / |u| " << fmt(worst_cover, 3);
  o.require(ok37 == total, "delta bound");
  o.require(ok38 == n38, "quasi-optimality bound");
  o.require(worst_cover <= 1e-8, "covered point");
}

// ---------------------------------------------------------------------------
void rb_reuse(Outcome& o) {
  Timer t;
  const BenchmarkProblem p = assemble_adr(40, 50.0, 250);
  const Index n = p.op->dim();
  RbOptions ro;
  ro.R = 25;
  ro.mode = RbMode::ideal;
  const RbResult ideal = rb_greedy(p.op, p.rhs, p.grid, p.RX, ro);
  ro.mode = RbMode::standard;
  const RbResult standard = rb_greedy(p.op, p.rhs, p.grid, p.RX, ro);
  ro.mode = RbMode::precond_reuse;
  ro.V = make_sketch(SketchKind::psrht, n, 128, derive_seed(0, "sketch")).dense();
  const RbResult reuse = rb_greedy(p.op, p.rhs, p.grid, p.RX, ro);
  auto at25 = [](const RbResult& r) { return r.trace.records.size() >= 25 ? r.trace.records[24] : RbRecord{}; };
  const RbRecord ri = at25(ideal), rs = at25(standard), rr = at25(reuse);
  const double ratio = rr.sup_rel_err / ri.sup_rel_err;
  const double spread_reuse = std::log(rr.eff_hi / rr.eff_lo), spread_std = std::log(rs.eff_hi / rs.eff_lo);
  o.detail << " r=25 sup validation error: ideal " << fmt(ri.sup_rel_err, 3) << ", reuse " << fmt(rr.sup_rel_err, 3)
           << " (x" << fmt(ratio, 3) << "), standard " << fmt(rs.sup_rel_err, 3) << "; 97% effectivity interval: reuse ["
           << fmt(rr.eff_lo, 3) << ", " << fmt(rr.eff_hi, 3) << "], dual residual [" << fmt(rs.eff_lo, 3) << ", "
           << fmt(rs.eff_hi, 3) << "]; " << fmt(t.seconds(), 3) << " s";
  o.require(ideal.trace.records.size() == 25 && reuse.trace.records.size() == 25 &&
                standard.trace.records.size() == 25,
            "25 greedy steps");
  o.require(ratio <= 5.0, "error within factor 5 of ideal");
  o.require(rr.eff_lo >= 0.2 && rr.eff_hi <= 5.0, "effectivity interval within [0.2, 5]");
  o.require(spread_std > spread_reuse, "dual residual interval wider");
}

// ---------------------------------------------------------------------------
void concentration(Outcome& o) {
  const Index n = 50;
  SplitMix64 rng(derive_seed(0, "concentration"));
  const Matrix B = random_matrix(n, n, rng);
  const Index K = concentration_columns(SketchKind::rademacher, static_cast<double>(n), 0.5, 0.05);
  const double b2 = B.squaredNorm();
  int bad = 0;
  for (int s = 0; s < 200; ++s) {
    const Matrix V = make_sketch(SketchKind::rademacher, n, K, derive_seed(static_cast<std::uint64_t>(s), "trial")).dense();
    if (std::abs((B * V).squaredNorm() - b2) >= 0.5 * b2) ++bad;
  }
  const double frac = bad / 200.0;
  o.detail << " K = " << K << ", violations " << bad << "/200 (" << fmt(frac, 3) << ", limit 0.08)";
  o.require(frac <= 0.05 + 0.03, "violation fraction");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"sketch-size tables", sketch_tables},
      {"Hadamard exactness and V V^T pattern", hadamard_exact},
      {"EIM redundancy detection", eim_redundancy},
      {"interpolation property", interpolation_property},
      {"oracle equivalences", oracle_equivalences},
      {"constrained-mode guarantees", constrained_guarantees},
      {"greedy residual and condition number trend", greedy_trend},
      {"Petrov-Galerkin quasi-optimality", quasi_optimality},
      {"reduced basis greedy with reuse", rb_reuse},
      {"sketch concentration", concentration},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<int>(k + 1) != only) continue;
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
              << "):" << o.detail.str() << std::endl;
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}

#include "paraprec/precond.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "paraprec/error.hpp"
#include "paraprec/parallel.hpp"
#include "paraprec/qp.hpp"

namespace paraprec {

void InverseBasis::add(Point xi, FactorizedInverse P) {
  if (!P.valid()) throw InvalidArgument("InverseBasis::add needs a factorized inverse");
  if (!inverses_.empty() && P.dim() != dim()) throw DimensionError("all inverses must share the dimension");
  if (find(xi) >= 0) throw InvalidArgument("interpolation point already in the basis");
  points_.push_back(std::move(xi));
  inverses_.push_back(std::move(P));
}

long InverseBasis::find(const Point& xi) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].size() == xi.size() && (points_[i] - xi).cwiseAbs().maxCoeff() <= 1e-12) return static_cast<long>(i);
  return -1;
}

InverseBasis build_basis(const AffineOperator& op, const PointSet& points) {
  InverseBasis basis;
  for (const auto& xi : points) basis.add(xi, factorize(op.eval(xi), xi));
  return basis;
}

NormalEq assemble_normal_eq(const SparseMatrix& A, const InverseBasis& basis, const Matrix& V, unsigned workers,
                            bool with_factor) {
  const Index n = A.rows();
  const Index m = static_cast<Index>(basis.size());
  const Index K = V.cols();
  if (A.cols() != n || V.rows() != n) throw DimensionError("assemble_normal_eq: A is n x n and V is n x K");
  if (m > 0 && basis.dim() != n) throw DimensionError("assemble_normal_eq: basis dimension mismatch");
  if (K < m) throw SketchTooSmall("sketch has K = " + std::to_string(K) + " columns but the basis has m = " + std::to_string(m));

  const Matrix AV = A * V;
  // Column blocks of every W_i are independent solves.
  const Index block = 32;
  const Index nblocks = (K + block - 1) / block;
  Matrix W(n * K, m);  // column i holds vec(W_i)
  parallel_for(static_cast<std::size_t>(m * nblocks), workers, [&](std::size_t task) {
    const Index i = static_cast<Index>(task) / nblocks;
    const Index b = static_cast<Index>(task) % nblocks;
    const Index c0 = b * block, nc = std::min(block, K - c0);
    const Matrix Wi = basis[static_cast<std::size_t>(i)].apply(Matrix(AV.middleCols(c0, nc)));
    for (Index c = 0; c < nc; ++c) W.col(i).segment((c0 + c) * n, n) = Wi.col(c);
  });
  const Eigen::Map<const Vector> v(V.data(), n * K);

  NormalEq ne;
  ne.M = W.transpose() * W;
  ne.M = 0.5 * (ne.M + ne.M.transpose()).eval();
  ne.S = W.transpose() * v;
  ne.vnorm2 = V.squaredNorm();
  if (with_factor) {
    Matrix WV(n * K, m + 1);
    WV.leftCols(m) = W;
    WV.col(m) = v;
    Eigen::HouseholderQR<Matrix> qr(WV);
    ne.factor = Matrix(qr.matrixQR().topRows(m + 1).triangularView<Eigen::Upper>());
  }
  return ne;
}

NormalEq assemble_normal_eq(const SparseMatrix& A, const InverseBasis& basis, const SketchMatrix& V, unsigned workers,
                            bool with_factor) {
  return assemble_normal_eq(A, basis, V.dense(), workers, with_factor);
}

Constraint parse_constraint(const std::string& text) {
  if (text == "none" || text == "unconstrained") return Constraint::none();
  if (text == "nonneg") return Constraint::nonneg();
  if (text.rfind("kappa:", 0) == 0) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(6), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - 6 || !(v > 0.0)) throw InvalidArgument("bad kappa bound in '" + text + "'");
    return Constraint::kappa(v);
  }
  throw InvalidArgument("constraint must be none, nonneg or kappa:<value>, got '" + text + "'");
}

std::string to_string(const Constraint& c) {
  switch (c.mode) {
    case ConstraintMode::unconstrained:
      return "none";
    case ConstraintMode::nonneg:
      return "nonneg";
    case ConstraintMode::kappa: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "kappa:%.17g", c.kappa_bar);
      return buf;
    }
  }
  return "none";
}

double SpectralConstants::kappa_threshold() const {
  double t = 0.0;
  for (Index i = 0; i < C.size(); ++i) {
    if (!(gamma_minus[i] > 0.0)) return std::numeric_limits<double>::infinity();
    t = std::max(t, C[i] / gamma_minus[i]);
  }
  return t;
}

double objective_value(const NormalEq& ne, const Vector& lambda) {
  const double raw = ne.vnorm2 - 2.0 * lambda.dot(ne.S) + lambda.dot(ne.M * lambda);
  if (raw < 0.0 && raw >= -1e-10 * ne.vnorm2) return 0.0;
  return raw;
}

CoefficientSolution solve_unconstrained(const NormalEq& ne) {
  const Index m = ne.m();
  CoefficientSolution sol;
  sol.mode = ConstraintMode::unconstrained;
  if (m == 0) {
    sol.lambda = Vector();
    sol.objective = ne.vnorm2;
    return sol;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ne.M);
  const Vector& ev = eig.eigenvalues();
  const double top = std::max(0.0, ev.maxCoeff());
  const double cut = 1e-13 * top * static_cast<double>(m);
  if (top == 0.0 || ev.minCoeff() <= cut) {
    sol.rank_deficient = true;
    Vector coef = eig.eigenvectors().transpose() * ne.S;
    for (Index k = 0; k < m; ++k) coef[k] = ev[k] > cut && top > 0.0 ? coef[k] / ev[k] : 0.0;
    sol.lambda = eig.eigenvectors() * coef;
  } else {
    sol.lambda = ne.M.ldlt().solve(ne.S);
  }
  sol.objective = objective_value(ne, sol.lambda);
  return sol;
}

CoefficientSolution solve_nonneg(const NormalEq& ne) {
  CoefficientSolution sol;
  sol.mode = ConstraintMode::nonneg;
  sol.lambda = nnls_gram(ne.M, ne.S).x;
  sol.objective = objective_value(ne, sol.lambda);
  return sol;
}

std::pair<double, double> kappa_constraint_slacks(const Vector& lp, const Vector& lm, const SpectralConstants& sc,
                                                  double kappa_bar) {
  const double g1 = lp.dot(sc.gamma_minus) - lm.dot(sc.gamma_plus);
  const double g2 = lp.dot(kappa_bar * sc.gamma_minus - sc.C) - lm.dot(kappa_bar * sc.gamma_plus + sc.C);
  return {g1, g2};
}

CoefficientSolution solve_kappa_constrained(const NormalEq& ne, const SpectralConstants& sc, double kappa_bar) {
  const Index m = ne.m();
  if (sc.size() != m) throw DimensionError("spectral constants do not match the basis size");
  const double threshold = sc.kappa_threshold();
  if (!(kappa_bar >= threshold * (1.0 - 1e-12)))
    throw KappaTooSmall("kappa bound " + std::to_string(kappa_bar) + " is below max_i C_i/gamma-_i = " +
                        std::to_string(threshold) + "; the constrained set must contain the nonnegative cone");
  CoefficientSolution sol;
  sol.mode = ConstraintMode::kappa;
  if (m == 0) {
    sol.objective = ne.vnorm2;
    return sol;
  }
  Matrix H(2 * m, 2 * m);
  H << ne.M, -ne.M, -ne.M, ne.M;
  Vector c(2 * m);
  c << ne.S, -ne.S;
  Matrix G(2, 2 * m);
  G.row(0) << sc.gamma_minus.transpose(), -sc.gamma_plus.transpose();
  G.row(1) << (kappa_bar * sc.gamma_minus - sc.C).transpose(), -(kappa_bar * sc.gamma_plus + sc.C).transpose();
  const Vector h = Vector::Zero(2);
  // The nonnegative solution is feasible because kappa_bar >= C_i / gamma-_i.
  Vector x0 = Vector::Zero(2 * m);
  x0.head(m) = nnls_gram(ne.M, ne.S).x;
  const QpResult qp = convex_qp(H, c, G, h, x0);
  sol.lambda_plus = qp.x.head(m);
  sol.lambda_minus = qp.x.tail(m);
  sol.lambda = sol.lambda_plus - sol.lambda_minus;
  sol.objective = objective_value(ne, sol.lambda);
  return sol;
}

CoefficientSolution solve_coefficients(const NormalEq& ne, const Constraint& c, const SpectralConstants* sc) {
  switch (c.mode) {
    case ConstraintMode::unconstrained:
      return solve_unconstrained(ne);
    case ConstraintMode::nonneg:
      return solve_nonneg(ne);
    case ConstraintMode::kappa:
      if (!sc) throw InvalidArgument("kappa mode needs spectral constants");
      return solve_kappa_constrained(ne, *sc, c.kappa_bar);
  }
  return solve_unconstrained(ne);
}

Vector precond_apply(const Vector& lambda, const InverseBasis& basis, const Vector& x) {
  if (lambda.size() != static_cast<Index>(basis.size())) throw DimensionError("precond_apply: lambda length mismatch");
  if (!basis.empty() && x.size() != basis.dim()) throw DimensionError("precond_apply: vector length mismatch");
  Vector y = Vector::Zero(x.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (lambda[static_cast<Index>(i)] != 0.0) y += lambda[static_cast<Index>(i)] * basis[i].apply(x);
  return y;
}

Vector precond_apply_transpose(const Vector& lambda, const InverseBasis& basis, const Vector& x) {
  if (lambda.size() != static_cast<Index>(basis.size())) throw DimensionError("precond_apply: lambda length mismatch");
  if (!basis.empty() && x.size() != basis.dim()) throw DimensionError("precond_apply: vector length mismatch");
  Vector y = Vector::Zero(x.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (lambda[static_cast<Index>(i)] != 0.0) y += lambda[static_cast<Index>(i)] * basis[i].apply(x, true);
  return y;
}

double frob_residual(const NormalEq& ne, const Vector& lambda) {
  const Index m = ne.m();
  if (lambda.size() != m) throw DimensionError("frob_residual: lambda length mismatch");
  if (ne.factor && ne.factor->rows() == m + 1) {
    const Matrix& R = *ne.factor;
    const Vector r = R.topLeftCorner(m, m) * lambda - R.col(m).head(m);
    return std::sqrt(r.squaredNorm() + R(m, m) * R(m, m));
  }
  return std::sqrt(std::max(0.0, objective_value(ne, lambda)));
}

Prop21Diagnostics diagnostics_prop21(const Matrix& A, const Matrix& P, double slack) {
  const Index n = A.rows();
  if (n > 2000) throw InvalidSize("dense diagnostics are limited to n <= 2000");
  if (A.cols() != n || P.rows() != n || P.cols() != n) throw DimensionError("diagnostics_prop21: square matrices of equal size");
  const Matrix PA = P * A;
  Eigen::BDCSVD<Matrix> svd(PA);
  const Vector sv = svd.singularValues();
  Prop21Diagnostics d;
  d.beta = sv[0];
  d.alpha = sv[n - 1];
  d.kappa = d.alpha > 0.0 ? d.beta / d.alpha : std::numeric_limits<double>::infinity();
  d.frob2 = (Matrix::Identity(n, n) - PA).squaredNorm();
  const double nn = static_cast<double>(n);
  const double tol = slack * std::max(1.0, nn);
  d.lower_ok = (1.0 - d.alpha) * (1.0 - d.alpha) <= d.frob2 + tol;
  d.upper_ok = d.alpha > 1.0 + slack || d.frob2 <= nn * (1.0 - d.alpha * d.alpha) + tol;
  if (d.alpha > 0.0) {
    const double bound = std::sqrt(std::max(0.0, nn - (nn - 1.0) * d.alpha * d.alpha)) / d.alpha;
    d.kappa_ok = d.kappa <= bound * (1.0 + slack) + slack;
  } else {
    d.kappa_ok = true;  // bound is infinite
  }
  d.frob_gap_ok = d.lower_ok && d.upper_ok && d.kappa_ok;
  return d;
}

Prop26Diagnostics diagnostics_prop26(const Matrix& A, const std::vector<Matrix>& inverses, const Vector& lambda,
                                     const Matrix& V, double slack) {
  const Index n = A.rows();
  const Index m = static_cast<Index>(inverses.size());
  if (n > 2000) throw InvalidSize("dense diagnostics are limited to n <= 2000");
  if (lambda.size() != m) throw DimensionError("diagnostics_prop26: lambda length mismatch");
  std::vector<Matrix> B;
  B.push_back(Matrix::Identity(n, n));
  for (const auto& P : inverses) B.push_back(P * A);
  const Index L = m + 1;
  Matrix G(L, L), GV(L, L);
  std::vector<Matrix> BV;
  for (const auto& b : B) BV.push_back(b * V);
  for (Index k = 0; k < L; ++k)
    for (Index l = 0; l <= k; ++l) {
      G(k, l) = G(l, k) = (B[k].array() * B[l].array()).sum();
      GV(k, l) = GV(l, k) = (BV[k].array() * BV[l].array()).sum();
    }
  // eps' = max relative distortion of ||B V||^2 over the span, computed on an
  // orthonormal basis of the span to tolerate dependent generators.
  Eigen::SelfAdjointEigenSolver<Matrix> eg(G);
  const double gmax = eg.eigenvalues().maxCoeff();
  std::vector<Index> keep;
  for (Index k = 0; k < L; ++k)
    if (eg.eigenvalues()[k] > 1e-12 * gmax) keep.push_back(k);
  Matrix Wt(L, static_cast<Index>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a)
    Wt.col(static_cast<Index>(a)) = eg.eigenvectors().col(keep[a]) / std::sqrt(eg.eigenvalues()[keep[a]]);
  const Matrix T = Wt.transpose() * GV * Wt;
  Eigen::SelfAdjointEigenSolver<Matrix> et(T);
  Prop26Diagnostics d;
  d.eps_prime = std::max(std::abs(et.eigenvalues().minCoeff() - 1.0), std::abs(et.eigenvalues().maxCoeff() - 1.0));

  Matrix PA = Matrix::Zero(n, n);
  for (Index i = 0; i < m; ++i) PA += lambda[i] * B[i + 1];
  Eigen::BDCSVD<Matrix> svd(PA);
  const Vector sv = svd.singularValues();
  d.beta = sv[0];
  d.alpha = sv[n - 1];
  d.kappa = d.alpha > 0.0 ? d.beta / d.alpha : std::numeric_limits<double>::infinity();
  d.sketched2 = ((Matrix::Identity(n, n) - PA) * V).squaredNorm();
  d.applicable = d.eps_prime < 1.0;
  const double vn = V.squaredNorm();
  const double tol = slack * std::max(1.0, vn);
  const double e = d.eps_prime;
  const double a = d.alpha;
  d.lower_ok = (1.0 - e) * (1.0 - a) * (1.0 - a) <= d.sketched2 + tol;
  d.lower_inverse_form_ok = d.applicable && (1.0 - a) * (1.0 - a) / (1.0 - e) <= d.sketched2 + tol;
  d.upper_ok = d.sketched2 <= vn * (1.0 - (1.0 - e) * a * a) + tol;
  if (d.applicable && a > 0.0) {
    const double bound = std::sqrt(std::max(0.0, vn / (1.0 - e) - (static_cast<double>(n) - 1.0) * a * a)) / a;
    d.kappa_ok = d.kappa <= bound * (1.0 + slack) + slack;
  } else {
    d.kappa_ok = true;
  }
  return d;
}

}  // namespace paraprec

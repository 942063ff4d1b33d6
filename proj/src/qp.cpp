#include "paraprec/qp.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "paraprec/error.hpp"

namespace paraprec {

namespace {

// Minimum-norm least-squares solve of a small symmetric PSD system.
Vector psd_solve(const Matrix& A, const Vector& b) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const double scale = A.cwiseAbs().maxCoeff();
  cod.setThreshold(1e-13 * std::max<double>(1.0, static_cast<double>(A.rows())));
  if (scale == 0.0) return Vector::Zero(A.cols());
  return cod.solve(b);
}

}  // namespace

NnlsResult nnls_gram(const Matrix& M, const Vector& S, const Vector* warm_start) {
  const Index m = M.rows();
  if (M.cols() != m || S.size() != m) throw DimensionError("nnls: M must be m x m and S of length m");
  NnlsResult res;
  res.x = Vector::Zero(m);
  std::vector<char> passive(static_cast<std::size_t>(m), 0);
  if (warm_start) {
    if (warm_start->size() != m) throw DimensionError("nnls: warm start length mismatch");
    for (Index i = 0; i < m; ++i)
      if ((*warm_start)[i] > 0.0) {
        res.x[i] = (*warm_start)[i];
        passive[i] = 1;
      }
  }
  const double tol = 1e-13 * std::max({1.0, S.cwiseAbs().maxCoeff(), M.cwiseAbs().maxCoeff()});
  const int max_outer = static_cast<int>(10 * m + 50);

  auto solve_passive = [&](Vector& z) {
    std::vector<Index> idx;
    for (Index i = 0; i < m; ++i)
      if (passive[i]) idx.push_back(i);
    z = Vector::Zero(m);
    if (idx.empty()) return;
    const Index p = static_cast<Index>(idx.size());
    Matrix Mp(p, p);
    Vector Sp(p);
    for (Index a = 0; a < p; ++a) {
      Sp[a] = S[idx[a]];
      for (Index b = 0; b < p; ++b) Mp(a, b) = M(idx[a], idx[b]);
    }
    const Vector zp = psd_solve(Mp, Sp);
    for (Index a = 0; a < p; ++a) z[idx[a]] = zp[a];
  };

  // Inner feasibility loop shared by warm start and the main iteration.
  auto inner = [&] {
    for (int guard = 0; guard <= m + 1; ++guard) {
      Vector z;
      solve_passive(z);
      bool ok = true;
      for (Index i = 0; i < m; ++i)
        if (passive[i] && z[i] <= 0.0) ok = false;
      if (ok) {
        res.x = z;
        return;
      }
      double alpha = 1.0;
      for (Index i = 0; i < m; ++i)
        if (passive[i] && z[i] <= 0.0) {
          const double denom = res.x[i] - z[i];
          if (denom > 0.0) alpha = std::min(alpha, res.x[i] / denom);
        }
      res.x += alpha * (z - res.x);
      for (Index i = 0; i < m; ++i)
        if (passive[i] && res.x[i] <= tol * 1e-3) {
          passive[i] = 0;
          res.x[i] = 0.0;
        }
    }
    throw ConvergenceFailure("nnls inner loop did not terminate", {});
  };

  if (warm_start) inner();
  for (int outer = 0; outer < max_outer; ++outer) {
    res.iterations = outer;
    const Vector w = S - M * res.x;
    Index j = -1;
    double best = tol;
    for (Index i = 0; i < m; ++i)
      if (!passive[i] && w[i] > best) {
        best = w[i];
        j = i;
      }
    if (j < 0) return res;
    passive[j] = 1;
    inner();
  }
  throw ConvergenceFailure("nnls exceeded its iteration cap", std::vector<double>(res.x.data(), res.x.data() + m));
}

QpResult convex_qp(const Matrix& H, const Vector& c, const Matrix& G, const Vector& h, const Vector& x0) {
  const Index n = H.rows();
  const Index ng = G.rows();
  if (H.cols() != n || c.size() != n || x0.size() != n || (ng > 0 && G.cols() != n) || h.size() != ng)
    throw DimensionError("convex_qp: inconsistent sizes");
  // Constraint k < n is x_k >= 0, k >= n is row k-n of G.
  const Index nc = n + ng;
  auto row = [&](Index k) -> Vector {
    if (k < n) return Vector::Unit(n, k);
    return G.row(k - n).transpose();
  };
  auto rhs = [&](Index k) { return k < n ? 0.0 : h[k - n]; };
  const double scale = std::max({1.0, H.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});
  const double feas_tol = 1e-12 * std::max(1.0, ng ? G.cwiseAbs().maxCoeff() : 1.0) * std::max(1.0, x0.cwiseAbs().maxCoeff());

  Vector x = x0;
  for (Index k = 0; k < nc; ++k)
    if (row(k).dot(x) < rhs(k) - 1e3 * feas_tol) throw InvalidArgument("convex_qp: starting point is infeasible");

  std::vector<Index> work;
  auto work_matrix = [&] {
    Matrix A(static_cast<Index>(work.size()), n);
    for (std::size_t a = 0; a < work.size(); ++a) A.row(static_cast<Index>(a)) = row(work[a]).transpose();
    return A;
  };
  auto independent_of_work = [&](Index k) {
    if (work.empty()) return true;
    Matrix A(static_cast<Index>(work.size()) + 1, n);
    A.topRows(static_cast<Index>(work.size())) = work_matrix();
    A.bottomRows(1) = row(k).transpose();
    Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
    qr.setThreshold(1e-10);
    return qr.rank() == A.rows();
  };
  for (Index k = 0; k < nc; ++k)
    if (std::abs(row(k).dot(x) - rhs(k)) <= feas_tol && independent_of_work(k)) work.push_back(k);

  QpResult res;
  const int cap = static_cast<int>(50 * nc + 100);
  for (int it = 0; it < cap; ++it) {
    res.iterations = it;
    const Vector g = H * x - c;
    // Null space basis of the working set.
    Matrix Z;
    if (work.empty()) {
      Z = Matrix::Identity(n, n);
    } else {
      const Matrix A = work_matrix();
      Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
      svd.setThreshold(1e-10);
      const Index r = svd.rank();
      Z = svd.matrixV().rightCols(n - r);
    }
    Vector p = Vector::Zero(n);
    if (Z.cols() > 0) {
      const Matrix ZHZ = Z.transpose() * H * Z;
      const Vector pz = -psd_solve(ZHZ, Z.transpose() * g);
      p = Z * pz;
    }
    const double pnorm = p.norm();
    // A step that does not lower the objective is treated as zero.
    const double decrease = -(g.dot(p) + 0.5 * p.dot(H * p));
    if (pnorm <= 1e-13 * std::max(1.0, x.norm()) || decrease <= 1e-15 * scale * std::max(1.0, x.squaredNorm())) {
      // Stationary on the working set: check multipliers g = A_W^T mu.
      if (work.empty()) {
        res.x = x;
        res.multipliers = Vector::Zero(ng);
        return res;
      }
      const Matrix A = work_matrix();
      const Vector mu = (A * A.transpose()).ldlt().solve(A * g);
      Index worst = -1;
      double most_neg = -1e-11 * scale;
      for (Index a = 0; a < mu.size(); ++a)
        if (mu[a] < most_neg) {
          most_neg = mu[a];
          worst = a;
        }
      if (worst < 0) {
        res.x = x;
        res.multipliers = Vector::Zero(ng);
        for (std::size_t a = 0; a < work.size(); ++a)
          if (work[a] >= n) res.multipliers[work[a] - n] = mu[static_cast<Index>(a)];
        return res;
      }
      work.erase(work.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    Index blocking = -1;
    for (Index k = 0; k < nc; ++k) {
      if (std::find(work.begin(), work.end(), k) != work.end()) continue;
      const Vector a = row(k);
      const double ap = a.dot(p);
      if (ap < -1e-14 * pnorm * std::max(1.0, a.norm())) {
        const double step = std::max(0.0, (rhs(k) - a.dot(x)) / ap);
        if (step < alpha) {
          alpha = step;
          blocking = k;
        }
      }
    }
    x += alpha * p;
    for (Index k = 0; k < n; ++k)
      if (x[k] < 0.0) x[k] = 0.0;
    if (blocking >= 0) work.push_back(blocking);
  }
  throw ConvergenceFailure("convex_qp exceeded its iteration cap", std::vector<double>(x.data(), x.data() + n));
}

}  // namespace paraprec

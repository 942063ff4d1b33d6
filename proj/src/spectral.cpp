#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "paraprec/error.hpp"
#include "paraprec/parallel.hpp"
#include "paraprec/precond.hpp"
#include "paraprec/rng.hpp"

namespace paraprec {

namespace {

// Error estimate for a Ritz value: min(residual, residual^2 / gap).
double ritz_error(double residual, double gap) {
  if (gap <= 0.0) return residual;
  return std::min(residual, residual * residual / gap);
}

// |last component| of the unit eigenvector of the tridiagonal T for the Ritz
// value theta, by two steps of inverse iteration. The shifted solves use
// Gaussian elimination with partial pivoting (the dgtsv scheme).
double last_component(const Vector& diag, const Vector& sub, double theta) {
  const Index k = diag.size();
  if (k == 1) return 1.0;
  const double tiny = 1e-300 + std::numeric_limits<double>::epsilon() * (std::abs(theta) + sub.cwiseAbs().maxCoeff());
  Vector x = Vector::Ones(k);
  for (int it = 0; it < 2; ++it) {
    Vector d = diag.array() - theta, dl = sub, du = sub, du2 = Vector::Zero(k);
    Vector b = x;
    for (Index i = 0; i + 1 < k; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double f = dl[i] / d[i];
        d[i + 1] -= f * du[i];
        b[i + 1] -= f * b[i];
      } else {
        const double f = d[i] / dl[i];
        d[i] = dl[i];
        const double t = d[i + 1];
        d[i + 1] = du[i] - f * t;
        if (i + 2 < k) {
          du2[i] = du[i + 1];
          du[i + 1] = -f * du2[i];
        }
        du[i] = t;
        const double bt = b[i];
        b[i] = b[i + 1];
        b[i + 1] = bt - f * b[i + 1];
      }
    }
    if (d[k - 1] == 0.0) d[k - 1] = tiny;
    b[k - 1] /= d[k - 1];
    b[k - 2] = (b[k - 2] - du[k - 2] * b[k - 1]) / d[k - 2];
    for (Index i = k - 3; i >= 0; --i) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    const double nb = b.norm();
    if (!(nb > 0.0) || !std::isfinite(nb)) break;
    x = b / nb;
  }
  return std::abs(x[k - 1]) / x.norm();
}

}  // namespace

LanczosResult lanczos_extremes(const std::function<Vector(const Vector&)>& op, Index n, double tol, int max_iter,
                               std::uint64_t seed, LanczosTarget target) {
  if (n < 1) throw InvalidSize("lanczos needs n >= 1");
  SplitMix64 rng(seed);
  Vector q(n);
  for (Index i = 0; i < n; ++i) q[i] = rng.uniform() - 0.5;
  q.normalize();
  const Index kmax = std::min<Index>(n, std::max(1, max_iter));
  Matrix Q(n, kmax);
  std::vector<double> alpha, beta;
  LanczosResult res;
  for (Index k = 0; k < kmax; ++k) {
    Q.col(k) = q;
    Vector w = op(q);
    const double a = q.dot(w);
    w -= a * q;
    if (k > 0) w -= beta.back() * Q.col(k - 1);
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    const double b = w.norm();
    alpha.push_back(a);
    res.iterations = static_cast<int>(k + 1);

    const Index dim = k + 1;
    Vector diag = Eigen::Map<Vector>(alpha.data(), dim);
    Vector sub = dim > 1 ? Vector(Eigen::Map<Vector>(beta.data(), dim - 1)) : Vector();
    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Vector& th = tri.eigenvalues();
    res.min = th[0];
    res.max = th[dim - 1];
    const double scale = std::max(std::abs(res.min), std::abs(res.max));
    const bool exhausted = b <= 1e-13 * std::max(scale, 1e-300) || dim == n;
    if (exhausted) {
      res.converged = true;
      return res;
    }
    if (dim >= 2) {
      // Neighbouring Ritz values are poor gap estimates in the first steps.
      const bool use_gap = dim >= std::min<Index>(n, 8);
      auto err = [&](double r, double gap) { return use_gap ? ritz_error(r, gap) : r; };
      const double emax = err(b * last_component(diag, sub, th[dim - 1]), th[dim - 1] - th[dim - 2]);
      const double emin =
          target == LanczosTarget::both ? err(b * last_component(diag, sub, th[0]), th[1] - th[0]) : 0.0;
      if (emin <= tol * std::max(std::abs(res.min), 1e-300) && emax <= tol * std::max(std::abs(res.max), 1e-300)) {
        res.converged = true;
        return res;
      }
    }
    beta.push_back(b);
    q = w / b;
  }
  return res;
}

void spectral_constants_of(const std::function<Vector(const Vector&)>& apply,
                           const std::function<Vector(const Vector&)>& apply_t, Index n, double tol, int max_iter,
                           std::uint64_t seed, double& gamma_minus, double& gamma_plus, double& C) {
  auto sym = [&](const Vector& w) -> Vector { return 0.5 * (apply(w) + apply_t(w)); };
  auto gram = [&](const Vector& w) -> Vector { return apply_t(apply(w)); };
  const LanczosResult s = lanczos_extremes(sym, n, tol, max_iter, seed);
  const LanczosResult g =
      lanczos_extremes(gram, n, tol, max_iter, splitmix_mix(seed ^ 0xC0FFEEULL), LanczosTarget::largest);
  gamma_minus = s.min;
  gamma_plus = s.max;
  C = std::sqrt(std::max(0.0, g.max));
  // Ritz values lie inside the spectrum, so C can trail gamma+ by roundoff.
  C = std::max({C, gamma_plus, -gamma_minus});
  if (!s.converged || !g.converged)
    throw ConvergenceFailure("spectral constants did not reach tolerance " + std::to_string(tol) + " in " +
                                 std::to_string(max_iter) + " iterations",
                             {gamma_minus, gamma_plus, C});
}

SpectralConstants spectral_constants(const InverseBasis& basis, double tol, int max_iter, unsigned workers) {
  const Index m = static_cast<Index>(basis.size());
  SpectralConstants sc;
  sc.tol = tol;
  sc.max_iter = max_iter;
  sc.gamma_minus.resize(m);
  sc.gamma_plus.resize(m);
  sc.C.resize(m);
  parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t i) {
    const FactorizedInverse& P = basis[i];
    auto ap = [&P](const Vector& x) { return P.apply(x); };
    auto at = [&P](const Vector& x) { return P.apply(x, true); };
    double gm, gp, c;
    spectral_constants_of(ap, at, P.dim(), tol, max_iter, derive_seed(0x5eedULL, "lanczos") + i, gm, gp, c);
    sc.gamma_minus[static_cast<Index>(i)] = gm;
    sc.gamma_plus[static_cast<Index>(i)] = gp;
    sc.C[static_cast<Index>(i)] = c;
  });
  return sc;
}

}  // namespace paraprec

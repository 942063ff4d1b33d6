#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "paraprec/operators.hpp"
#include "paraprec/sketch.hpp"

namespace paraprec {

// Interpolation points and the factorized operator samples P_i = A(xi_i)^{-1}.
class InverseBasis {
 public:
  InverseBasis() = default;
  void add(Point xi, FactorizedInverse P);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  Index dim() const { return inverses_.empty() ? 0 : inverses_.front().dim(); }
  const PointSet& points() const { return points_; }
  const std::vector<FactorizedInverse>& inverses() const { return inverses_; }
  const FactorizedInverse& operator[](std::size_t i) const { return inverses_[i]; }
  // Index of a stored point equal to xi (to 1e-12), or -1.
  long find(const Point& xi) const;

 private:
  PointSet points_;
  std::vector<FactorizedInverse> inverses_;
};

InverseBasis build_basis(const AffineOperator& op, const PointSet& points);

// Sketched normal equations. When `factor` is present it is the upper
// triangular R of a QR factorization of [vec W_1 ... vec W_m, vec V], which
// gives the residual without the cancellation of the quadratic form.
struct NormalEq {
  Matrix M;
  Vector S;
  double vnorm2 = 0.0;
  std::optional<Matrix> factor;

  Index m() const { return S.size(); }
};

NormalEq assemble_normal_eq(const SparseMatrix& A, const InverseBasis& basis, const Matrix& V,
                            unsigned workers = 1, bool with_factor = true);
NormalEq assemble_normal_eq(const SparseMatrix& A, const InverseBasis& basis, const SketchMatrix& V,
                            unsigned workers = 1, bool with_factor = true);

enum class ConstraintMode { unconstrained, nonneg, kappa };

struct Constraint {
  ConstraintMode mode = ConstraintMode::unconstrained;
  double kappa_bar = 0.0;

  static Constraint none() { return {}; }
  static Constraint nonneg() { return {ConstraintMode::nonneg, 0.0}; }
  static Constraint kappa(double bound) { return {ConstraintMode::kappa, bound}; }
};

// "none", "nonneg" or "kappa:<value>".
Constraint parse_constraint(const std::string& text);
std::string to_string(const Constraint& c);

struct SpectralConstants {
  Vector gamma_minus;  // smallest eigenvalue of sym(P_i)
  Vector gamma_plus;   // largest eigenvalue of sym(P_i)
  Vector C;            // ||P_i||_2
  double tol = 1e-6;
  int max_iter = 500;

  Index size() const { return C.size(); }
  // Smallest admissible kappa bound, max_i C_i / gamma_minus_i.
  double kappa_threshold() const;
};

struct CoefficientSolution {
  Vector lambda;
  Vector lambda_plus, lambda_minus;  // kappa mode only
  ConstraintMode mode = ConstraintMode::unconstrained;
  double objective = 0.0;
  bool rank_deficient = false;
};

double objective_value(const NormalEq& ne, const Vector& lambda);
CoefficientSolution solve_unconstrained(const NormalEq& ne);
CoefficientSolution solve_nonneg(const NormalEq& ne);
CoefficientSolution solve_kappa_constrained(const NormalEq& ne, const SpectralConstants& sc, double kappa_bar);
CoefficientSolution solve_coefficients(const NormalEq& ne, const Constraint& c, const SpectralConstants* sc = nullptr);

// Slacks of the two linear constraints of the kappa-constrained set.
std::pair<double, double> kappa_constraint_slacks(const Vector& lambda_plus, const Vector& lambda_minus,
                                                  const SpectralConstants& sc, double kappa_bar);

// Extreme eigenvalues of a symmetric operator by Lanczos with full
// reorthogonalization. With `largest` only the top eigenvalue must converge;
// `min` is then just the current Ritz value.
enum class LanczosTarget { both, largest };
struct LanczosResult {
  double min = 0.0, max = 0.0;
  int iterations = 0;
  bool converged = false;
};
LanczosResult lanczos_extremes(const std::function<Vector(const Vector&)>& op, Index n, double tol, int max_iter,
                               std::uint64_t seed, LanczosTarget target = LanczosTarget::both);

// gamma-, gamma+, C for one implicit operator given by its action and the
// action of its transpose.
void spectral_constants_of(const std::function<Vector(const Vector&)>& apply,
                           const std::function<Vector(const Vector&)>& apply_t, Index n, double tol, int max_iter,
                           std::uint64_t seed, double& gamma_minus, double& gamma_plus, double& C);
SpectralConstants spectral_constants(const InverseBasis& basis, double tol = 1e-6, int max_iter = 500,
                                     unsigned workers = 1);

Vector precond_apply(const Vector& lambda, const InverseBasis& basis, const Vector& x);
Vector precond_apply_transpose(const Vector& lambda, const InverseBasis& basis, const Vector& x);

double frob_residual(const NormalEq& ne, const Vector& lambda);

// Dense checks of the spectral properties of P A for P the Frobenius
// projection. `frob_gap_ok` covers (1-a)^2 <= ||I-PA||_F^2 <= n(1-a^2) and the
// condition number bound.
struct Prop21Diagnostics {
  double alpha = 0.0, beta = 0.0, kappa = 0.0;
  double frob2 = 0.0;
  bool lower_ok = false, upper_ok = false, kappa_ok = false;
  bool frob_gap_ok = false;
};
Prop21Diagnostics diagnostics_prop21(const Matrix& A, const Matrix& P, double slack = 1e-8);

// Same checks for the sketched projection, with eps' measured on the
// realized V over span{I, P_1 A, ..., P_m A}. The lower bound is checked in
// the form implied by the concentration inequality, (1-eps')(1-a)^2; the
// variant with (1-eps')^{-1} is reported separately.
struct Prop26Diagnostics {
  double eps_prime = 0.0;
  double alpha = 0.0, beta = 0.0, kappa = 0.0;
  double sketched2 = 0.0;
  bool applicable = false;  // eps' < 1
  bool lower_ok = false, upper_ok = false, kappa_ok = false;
  bool lower_inverse_form_ok = false;
};
Prop26Diagnostics diagnostics_prop26(const Matrix& A, const std::vector<Matrix>& inverses, const Vector& lambda,
                                     const Matrix& V, double slack = 1e-8);

}  // namespace paraprec

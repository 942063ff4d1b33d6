#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "paraprec/preconditioner.hpp"

namespace paraprec {

// Reduced space X_r = range(U) with U^T R_X U = I, together with the affine
// problem it approximates. Offline blocks for a fixed inverse basis can be
// attached so that Petrov-Galerkin solves and residuals need no solves online.
class ReducedModel {
 public:
  ReducedModel() = default;
  ReducedModel(std::shared_ptr<const AffineOperator> op, std::shared_ptr<const AffineVector> rhs, NormMatrix RX);

  const AffineOperator& op() const { return *op_; }
  const AffineVector& rhs() const { return *rhs_; }
  const NormMatrix& norm() const { return RX_; }
  const Matrix& U() const { return U_; }
  Index dim() const { return U_.cols(); }
  Index n() const { return op_->dim(); }
  const PointSet& snapshot_points() const { return snapshot_points_; }
  std::string mode_tag;

  // Modified Gram-Schmidt in the X inner product with one reorthogonalization
  // pass. Returns false (and leaves U unchanged) when the snapshot is
  // numerically dependent: remaining norm below drop_tol * ||u||_X.
  bool add_snapshot(const Vector& u, const Point& xi, double drop_tol = 1e-12);
  // Replaces the basis; columns are X-orthonormalized.
  void set_basis(const Matrix& U, double drop_tol = 1e-12);

  // Galerkin blocks U^T A_k U and U^T b_k.
  Matrix galerkin_matrix(const Point& xi) const;
  Vector galerkin_rhs(const Point& xi) const;

  // Offline blocks P_i A_k U, P_i b_k, their projections U^T R_X (.), and
  // P_i^T R_X U for the given basis.
  void attach(const InverseBasis& basis, unsigned workers = 1);
  bool attached_to(const InverseBasis& basis) const;
  std::size_t attached_size() const { return attached_.size(); }

  // Fast Petrov-Galerkin with coefficients lambda over the attached basis.
  Vector petrov_galerkin_blocks(const Point& xi, const Vector& lambda) const;
  // P_m(xi)(A(xi) U a - b(xi)) from the blocks.
  Vector preconditioned_residual_blocks(const Point& xi, const Vector& lambda, const Vector& a) const;
  // P_m(xi)^T R_X U from the blocks.
  Matrix pt_rx_u_blocks(const Vector& lambda) const;

 private:
  void refresh_galerkin();

  std::shared_ptr<const AffineOperator> op_;
  std::shared_ptr<const AffineVector> rhs_;
  NormMatrix RX_;
  Matrix U_, RU_;
  PointSet snapshot_points_;
  std::vector<Matrix> AkU_;   // A_k U
  std::vector<Matrix> gal_A_;  // U^T A_k U
  std::vector<Vector> gal_b_;  // U^T b_k

  InverseBasis attached_;
  std::vector<std::vector<Matrix>> PAU_;  // [i][k] P_i A_k U
  std::vector<std::vector<Vector>> Pb_;   // [i][k] P_i b_k
  std::vector<std::vector<Matrix>> G_;    // U^T R_X P_i A_k U
  std::vector<std::vector<Vector>> h_;    // U^T R_X P_i b_k
  std::vector<Matrix> Z_;                 // P_i^T R_X U
};

Vector petrov_galerkin(const Point& xi, const ReducedModel& model, const LocalPreconditioner& P);
Vector petrov_galerkin(const Point& xi, const ReducedModel& model, const Preconditioner& P);
Vector galerkin(const Point& xi, const ReducedModel& model);
Vector best_approx(const Point& xi, const ReducedModel& model);
Vector best_approx_of(const Vector& u, const ReducedModel& model);

double delta_rm(const Point& xi, const ReducedModel& model, const LocalPreconditioner& P);
// delta from a precomputed P^T R_X U (n x r).
double delta_rm_from(const Point& xi, const ReducedModel& model, const Matrix& PtRU);
double quasi_opt_constant(double delta);

double preconditioned_residual_norm(const Point& xi, const Vector& u_r, const LocalPreconditioner& P,
                                    const ReducedModel& model);
double preconditioned_residual_norm(const Point& xi, const Vector& u_r, const LocalPreconditioner& P,
                                    const AffineOperator& op, const AffineVector& rhs, const NormMatrix& RX);
double dual_residual_norm(const Point& xi, const Vector& u_r, const AffineOperator& op, const AffineVector& rhs,
                          const NormMatrix& RX);

struct SingularBounds {
  double alpha = 0.0, beta = 0.0, kappa = 0.0;
};
// Extreme X-norm singular values of P A, dense (n <= 2000).
SingularBounds singular_bounds(const Point& xi, const LocalPreconditioner& P, const AffineOperator& op,
                               const NormMatrix& RX);

struct Effectivity {
  double eta = 1.0;
  bool exact = false;  // u_r == u, eta set to 1 by convention
};
Effectivity effectivity(const Point& xi, const Vector& u_r, const LocalPreconditioner& P, const Vector& exact_u,
                        const AffineOperator& op, const AffineVector& rhs, const NormMatrix& RX);

// Smallest interval [lo, hi] that contains ceil(p * N) of the values.
std::pair<double, double> confidence_interval(std::vector<double> values, double p);
// Empirical quantile with linear interpolation.
double quantile(std::vector<double> values, double p);

// X-orthonormal POD basis of rank r from snapshot columns.
Matrix pod_basis(const Matrix& snapshots, const NormMatrix& RX, Index r);

// ---- reduced basis greedy --------------------------------------------------

enum class RbMode { ideal, standard, precond_fixed, precond_reuse };
std::string to_string(RbMode mode);
RbMode parse_rb_mode(const std::string& name);

struct RbOptions {
  RbMode mode = RbMode::precond_reuse;
  Index R = 10;
  Index validation_stride = 5;  // every stride-th point is held out; 0 = validate on all of the grid
  const Preconditioner* fixed = nullptr;  // precond_fixed
  Matrix V;                               // precond_reuse sketch
  Constraint constraint;
  unsigned workers = 1;
  double drop_tol = 1e-12;
  double confidence = 0.97;
};

struct RbRecord {
  Index r = 0;
  Point xi;
  Index grid_index = -1;
  double score = 0.0;            // selection criterion at the chosen point
  double sup_rel_err = 0.0;      // validation subset
  double q97_rel_err = 0.0;      // validation subset
  double eff_lo = 0.0, eff_hi = 0.0;
  double sup_rel_err_all = 0.0;  // whole grid
};

struct GreedyTrace {
  std::vector<RbRecord> records;
  std::string status = "completed";  // completed | stagnated
};

struct RbResult {
  ReducedModel model;
  GreedyTrace trace;
  std::optional<Preconditioner> precond;
  std::vector<Vector> truth;  // u(xi) over the grid
};

RbResult rb_greedy(std::shared_ptr<const AffineOperator> op, std::shared_ptr<const AffineVector> rhs,
                   const PointSet& grid, const NormMatrix& RX, const RbOptions& options);

}  // namespace paraprec

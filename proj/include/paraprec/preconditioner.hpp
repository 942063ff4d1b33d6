#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "paraprec/eim.hpp"
#include "paraprec/precond.hpp"

namespace paraprec {

// A preconditioner frozen at one parameter value.
class LocalPreconditioner {
 public:
  enum class Kind { identity, norm_inverse, interpolated, exact };

  static LocalPreconditioner identity(Index n);
  static LocalPreconditioner norm_inverse(NormMatrix RX);
  static LocalPreconditioner interpolated(InverseBasis basis, Vector lambda);
  static LocalPreconditioner exact(FactorizedInverse F);

  Kind kind() const { return kind_; }
  Index dim() const { return n_; }
  const Vector& lambda() const { return lambda_; }
  const InverseBasis& basis() const { return basis_; }

  Vector apply(const Vector& x) const;
  Vector apply_transpose(const Vector& x) const;
  Matrix apply(const Matrix& X) const;
  Matrix apply_transpose(const Matrix& X) const;
  // Dense n x n matrix of the operator (diagnostics at small n).
  Matrix dense() const;

 private:
  Kind kind_ = Kind::identity;
  Index n_ = 0;
  InverseBasis basis_;
  Vector lambda_;
  NormMatrix RX_;
  FactorizedInverse F_;
};

struct GreedyRecord {
  Index m = 0;                // basis size after this step
  Point xi;                   // point added at this step
  Index grid_index = -1;      // index in the training grid, -1 if external
  double sup_residual = 0.0;  // sup over the grid of the sketched residual of P_m
  std::optional<double> sup_kappa;
  std::optional<double> score;  // selection score of the chosen point before it was added
};

// Interpolated inverse P_m(xi) = sum_i lambda_i(xi) A(xi_i)^{-1}, with the
// coefficients computed online from the EIM surrogate of the sketched normal
// equations.
class Preconditioner {
 public:
  Preconditioner() = default;
  Preconditioner(std::shared_ptr<const AffineOperator> op, Matrix V, Constraint constraint, EimPair models,
                 unsigned workers = 1);

  const AffineOperator& op() const { return *op_; }
  std::shared_ptr<const AffineOperator> op_ptr() const { return op_; }
  const InverseBasis& basis() const { return basis_; }
  const SurrogateNE& surrogate() const { return surrogate_; }
  const Constraint& constraint() const { return constraint_; }
  const std::optional<SpectralConstants>& spectral() const { return spectral_; }
  const Matrix& sketch() const { return V_; }
  const EimPair& eim_models() const { return models_; }
  std::size_t size() const { return basis_.size(); }

  std::vector<GreedyRecord> history;
  std::vector<std::string> warnings;
  std::string sketch_description;  // kind, K and seed of V for serialization

  // Adds one point (factorizing A(xi)) and rebuilds the surrogate.
  void add_point(const Point& xi);
  void add_factorized(const Point& xi, FactorizedInverse F);

  NormalEq normal_eq(const Point& xi) const;  // online
  CoefficientSolution coefficients(const Point& xi) const;
  double sketched_residual(const Point& xi) const;
  // ||(I - sum_i lambda_i P_i A(xi)) V||_F formed explicitly (m K solves).
  double direct_residual(const Point& xi, const Vector& lambda) const;
  // P_m(xi); the identity when the basis is empty.
  LocalPreconditioner at(const Point& xi) const;

 private:
  void refresh();

  std::shared_ptr<const AffineOperator> op_;
  Matrix V_;
  Constraint constraint_;
  EimPair models_;
  unsigned workers_ = 1;
  InverseBasis basis_;
  SurrogateNE surrogate_;
  std::optional<SpectralConstants> spectral_;
};

// Preconditioner with a prescribed set of interpolation points.
Preconditioner make_preconditioner(std::shared_ptr<const AffineOperator> op, const PointSet& grid,
                                   const PointSet& points, const Matrix& V, Constraint constraint,
                                   unsigned workers = 1);

}  // namespace paraprec

#pragma once

#include <vector>

#include "paraprec/operators.hpp"
#include "paraprec/precond.hpp"
#include "paraprec/sketch.hpp"

namespace paraprec {

// Empirical interpolation of a family of scalar functions tabulated on a
// discrete grid: table(i, g) = zeta_i(grid[g]).
struct EimModel {
  std::vector<Index> magic_grid;       // grid index of xi*_k
  PointSet magic_points;               // xi*_k
  std::vector<Index> magic_functions;  // i*_k
  Matrix Q;                            // Q(i, j) = zeta_{i*_i}(xi*_j)
  Matrix Qinv;
  std::vector<double> selected_residuals;  // e_k, one per retained point
  double final_residual = 0.0;             // max |R| after the last update
  Index family_size = 0;

  Index rank() const { return static_cast<Index>(magic_grid.size()); }
  // Interpolation weights Psi(xi) from the values of every family member at xi.
  Vector psi(const Vector& family_values) const;
  // Weights at a grid point; exact unit vectors at magic points.
  Vector psi_at_grid(const Matrix& table, Index g) const;
};

// Greedy residual maximization; stops when the largest residual is at most
// rel_tol times the first one, or when rank reaches the family size. Ties are
// broken towards the lowest (function, grid) index pair.
EimModel eim(const Matrix& table, const PointSet& grid, double rel_tol = 1e-14);

// Family tables for the normal equations: products Phi_a Phi_b (row a*m_A+b)
// and the coefficients Phi_a themselves.
Matrix coefficient_table(const AffineOperator& op, const PointSet& grid);
Matrix product_table(const AffineOperator& op, const PointSet& grid);
Vector product_values(const Vector& phi);

struct SurrogateNE {
  EimModel eim_M, eim_S;
  std::vector<Matrix> M_at;  // M^V at the M magic points
  std::vector<Vector> S_at;  // S^V at the S magic points
  double vnorm2 = 0.0;
  Index m = 0;

  Index m_M() const { return eim_M.rank(); }
  Index m_S() const { return eim_S.rank(); }
};

struct EimPair {
  EimModel M, S;
};
EimPair eim_for_operator(const AffineOperator& op, const PointSet& grid, double rel_tol = 1e-14);

SurrogateNE build_surrogate(const AffineOperator& op, const InverseBasis& basis, const SketchMatrix& V,
                            const PointSet& grid, unsigned workers = 1);
// Reuses EIM models computed once for (op, grid).
SurrogateNE build_surrogate(const AffineOperator& op, const InverseBasis& basis, const Matrix& V, const EimPair& models,
                            unsigned workers = 1);

NormalEq online_eval(const SurrogateNE& s, const AffineOperator& op, const Point& xi);

}  // namespace paraprec

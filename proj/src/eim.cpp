#include "paraprec/eim.hpp"

#include <Eigen/LU>
#include <cmath>
#include <map>

#include "paraprec/error.hpp"
#include "paraprec/parallel.hpp"

namespace paraprec {

Vector EimModel::psi(const Vector& family_values) const {
  if (family_values.size() != family_size) throw DimensionError("EIM: family value vector has the wrong length");
  const Index k = rank();
  Vector z(k);
  for (Index j = 0; j < k; ++j) z[j] = family_values[magic_functions[j]];
  return Qinv * z;
}

Vector EimModel::psi_at_grid(const Matrix& table, Index g) const {
  const Index k = rank();
  for (Index l = 0; l < k; ++l)
    if (magic_grid[l] == g) return Vector::Unit(k, l);
  return psi(table.col(g));
}

EimModel eim(const Matrix& table, const PointSet& grid, double rel_tol) {
  const Index nf = table.rows(), ng = table.cols();
  if (nf == 0) throw InvalidArgument("EIM needs a non-empty family");
  if (ng != static_cast<Index>(grid.size())) throw DimensionError("EIM: table columns must match the grid");
  EimModel model;
  model.family_size = nf;
  Matrix R = table;
  double e0 = -1.0;
  for (Index k = 0; k < nf; ++k) {
    // argmax |R|, lexicographic in (function, grid) on ties
    Index bi = 0, bg = 0;
    double best = -1.0;
    for (Index i = 0; i < nf; ++i)
      for (Index g = 0; g < ng; ++g) {
        const double v = std::abs(R(i, g));
        if (v > best) {
          best = v;
          bi = i;
          bg = g;
        }
      }
    if (e0 < 0.0) e0 = best;
    if (best <= 0.0 || best <= rel_tol * e0) {
      model.final_residual = best;
      break;
    }
    model.magic_functions.push_back(bi);
    model.magic_grid.push_back(bg);
    model.magic_points.push_back(grid[bg]);
    model.selected_residuals.push_back(best);
    const Vector col = R.col(bg);
    const Vector row = R.row(bi).transpose();
    const double pivot = R(bi, bg);
    R.noalias() -= col * (row.transpose() / pivot);
    model.final_residual = R.cwiseAbs().maxCoeff();
  }
  const Index k = model.rank();
  model.Q.resize(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) model.Q(i, j) = table(model.magic_functions[i], model.magic_grid[j]);
  model.Qinv = k > 0 ? Matrix(model.Q.inverse()) : Matrix();
  return model;
}

Matrix coefficient_table(const AffineOperator& op, const PointSet& grid) {
  Matrix T(static_cast<Index>(op.num_terms()), static_cast<Index>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) T.col(static_cast<Index>(g)) = op.coefficients(grid[g]);
  return T;
}

Vector product_values(const Vector& phi) {
  const Index mA = phi.size();
  Vector out(mA * mA);
  for (Index a = 0; a < mA; ++a)
    for (Index b = 0; b < mA; ++b) out[a * mA + b] = phi[a] * phi[b];
  return out;
}

Matrix product_table(const AffineOperator& op, const PointSet& grid) {
  const Index mA = static_cast<Index>(op.num_terms());
  Matrix T(mA * mA, static_cast<Index>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) T.col(static_cast<Index>(g)) = product_values(op.coefficients(grid[g]));
  return T;
}

EimPair eim_for_operator(const AffineOperator& op, const PointSet& grid, double rel_tol) {
  return {eim(product_table(op, grid), grid, rel_tol), eim(coefficient_table(op, grid), grid, rel_tol)};
}

SurrogateNE build_surrogate(const AffineOperator& op, const InverseBasis& basis, const Matrix& V, const EimPair& models,
                            unsigned workers) {
  SurrogateNE s;
  s.eim_M = models.M;
  s.eim_S = models.S;
  s.m = static_cast<Index>(basis.size());
  s.vnorm2 = V.squaredNorm();
  // One assembly per distinct magic point.
  std::map<Index, std::size_t> slot;
  PointSet pts;
  auto need = [&](Index g, const Point& xi) {
    if (slot.emplace(g, pts.size()).second) pts.push_back(xi);
  };
  for (Index k = 0; k < s.eim_M.rank(); ++k) need(s.eim_M.magic_grid[k], s.eim_M.magic_points[k]);
  for (Index k = 0; k < s.eim_S.rank(); ++k) need(s.eim_S.magic_grid[k], s.eim_S.magic_points[k]);
  std::vector<NormalEq> ne(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) ne[p] = assemble_normal_eq(op.eval(pts[p]), basis, V, workers, false);
  for (Index k = 0; k < s.eim_M.rank(); ++k) s.M_at.push_back(ne[slot.at(s.eim_M.magic_grid[k])].M);
  for (Index k = 0; k < s.eim_S.rank(); ++k) s.S_at.push_back(ne[slot.at(s.eim_S.magic_grid[k])].S);
  return s;
}

SurrogateNE build_surrogate(const AffineOperator& op, const InverseBasis& basis, const SketchMatrix& V,
                            const PointSet& grid, unsigned workers) {
  return build_surrogate(op, basis, V.dense(), eim_for_operator(op, grid), workers);
}

namespace {

Vector weights(const EimModel& model, const PointSet& pts, const Point& xi, const Vector& values) {
  // Exact unit weights at magic points keep online values bit-identical.
  for (Index l = 0; l < model.rank(); ++l)
    if (pts[l].size() == xi.size() && pts[l] == xi) return Vector::Unit(model.rank(), l);
  return model.psi(values);
}

}  // namespace

NormalEq online_eval(const SurrogateNE& s, const AffineOperator& op, const Point& xi) {
  const Vector phi = op.coefficients(xi);
  const Vector wm = weights(s.eim_M, s.eim_M.magic_points, xi, product_values(phi));
  const Vector ws = weights(s.eim_S, s.eim_S.magic_points, xi, phi);
  NormalEq ne;
  ne.vnorm2 = s.vnorm2;
  ne.M = Matrix::Zero(s.m, s.m);
  ne.S = Vector::Zero(s.m);
  for (Index k = 0; k < wm.size(); ++k)
    if (wm[k] != 0.0) ne.M += wm[k] * s.M_at[static_cast<std::size_t>(k)];
  for (Index k = 0; k < ws.size(); ++k)
    if (ws[k] != 0.0) ne.S += ws[k] * s.S_at[static_cast<std::size_t>(k)];
  return ne;
}

}  // namespace paraprec

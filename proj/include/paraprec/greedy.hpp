#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "paraprec/diagnostics.hpp"
#include "paraprec/preconditioner.hpp"
#include "paraprec/reduction.hpp"

namespace paraprec {

struct GreedyOptions {
  Index M_max = 10;
  Constraint constraint;
  std::optional<Point> seed_point;  // first point; default is the argmax rule from P_0 = I
  unsigned workers = 1;
  // Dense sup-kappa per step (n <= 2000). Empty kappa_at means every m.
  bool diagnostics = false;
  std::vector<Index> kappa_at;
  // Called after every basis growth with the scores of the new preconditioner.
  std::function<void(const Preconditioner&, const std::vector<double>&)> on_step;
};

// Greedy interpolation points by the sketched Frobenius residual
// ||(I - P_m(xi) A(xi)) V||_F over the grid. `resume` continues from an
// existing preconditioner built on the same operator and sketch.
Preconditioner greedy_frob(std::shared_ptr<const AffineOperator> op, const PointSet& grid, const Matrix& V,
                           const GreedyOptions& options, const Preconditioner* resume = nullptr);

// Same loop scored by delta_{r,m}(xi) for a fixed reduced space. Stops early
// once every score is below delta_tol.
Preconditioner greedy_delta(std::shared_ptr<const AffineOperator> op, const PointSet& grid, const ReducedModel& model,
                            const Matrix& V, const GreedyOptions& options, double delta_tol = 1e-12);

// Latin hypercube sample of m points in the box [lo, hi]^d (unit cube when
// lo/hi are empty).
PointSet lhs_points(int d, Index m, std::uint64_t seed, const Vector& lo = Vector(), const Vector& hi = Vector());

// History CSV: m, xi_selected, sup_sketch_residual, sup_kappa.
std::string history_csv(const Preconditioner& P);

}  // namespace paraprec

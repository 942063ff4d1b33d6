#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "paraprec/operators.hpp"

namespace paraprec {

struct BenchmarkProblem {
  std::shared_ptr<const AffineOperator> op;
  std::shared_ptr<const AffineVector> rhs;
  PointSet grid;
  NormMatrix RX;
  std::string name;
  std::string description;
  std::map<std::string, double> params;  // mesh_side, D, seed, ...
};

// Periodic advection-diffusion-reaction on the unit square with P1 elements:
// A(xi) = A0 + D cos(2 pi xi) A1 + D sin(2 pi xi) A2, A0 = stiffness + mass,
// A1/A2 the x/y advection matrices. b = M f for a Gaussian bump f. The grid
// is 250 equispaced points of [0, 1] and R_X = A0.
BenchmarkProblem assemble_adr(int mesh_side, double D = 50.0, Index grid_size = 250);

// The three P1 blocks of the ADR operator plus the mass matrix, unscaled.
struct AdrMatrices {
  SparseMatrix stiffness, mass, adv_x, adv_y;
};
AdrMatrices adr_matrices(int mesh_side);

// A(xi) = A0 + sum_k g_k(xi) A_k with A0 = L_0 + I + S (graph Laplacian plus a
// sparse skew part), A_k graph Laplacians of random subgraphs and g_k
// log-uniform on [lo, hi] in coordinate k-1. The symmetric part stays SPD for
// every parameter. Grid is a Latin hypercube of grid_size points.
BenchmarkProblem synthetic_multiparam(int d, Index n, int m_A, std::uint64_t seed, Index grid_size = 200,
                                      double lo = 0.1, double hi = 10.0);

// Inverse distance weights; e_i exactly at xi = xi_i.
Vector shepard_weights(const Point& xi, const PointSet& points, double s = 2.0);
// e_i for the nearest point, ties to the smallest index.
Vector nearest_weights(const Point& xi, const PointSet& points);

PointSet uniform_grid(double a, double b, Index count);

}  // namespace paraprec

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paraprec/operators.hpp"

namespace paraprec {

enum class SketchKind { partial_hadamard, rademacher, psrht, identity };

std::string to_string(SketchKind kind);
// Accepts "rescaled-partial-hadamard"/"hadamard", "rescaled-rademacher"/
// "rademacher", "psrht", "identity".
SketchKind parse_sketch_kind(const std::string& name);

// n x K sketch V, materialized densely. For psrht the structural factors are
// kept as well: V = K^{-1/2} (R H_s D)^T restricted to the first n rows.
class SketchMatrix {
 public:
  SketchMatrix() = default;

  SketchKind kind() const { return kind_; }
  Index rows() const { return V_.rows(); }
  Index cols() const { return V_.cols(); }
  std::uint64_t seed() const { return seed_; }
  const Matrix& dense() const { return V_; }
  // psrht only: sampled Hadamard rows and the sign diagonal.
  const std::vector<std::uint64_t>& sampled_rows() const { return rows_; }
  const std::vector<int>& signs() const { return signs_; }
  std::uint64_t hadamard_order() const { return s_; }

  double frobenius_norm2() const { return V_.squaredNorm(); }

  friend SketchMatrix make_sketch(SketchKind, Index, Index, std::uint64_t);

 private:
  SketchKind kind_ = SketchKind::identity;
  std::uint64_t seed_ = 0;
  std::uint64_t s_ = 0;
  Matrix V_;
  std::vector<std::uint64_t> rows_;
  std::vector<int> signs_;
};

// Sylvester Hadamard entry (-1)^{popcount(i & j)}.
inline int hadamard_entry(std::uint64_t i, std::uint64_t j) {
  return (__builtin_popcountll(i & j) & 1) ? -1 : 1;
}

Matrix hadamard(Index s);
Eigen::MatrixXi hadamard_int(Index s);
bool is_power_of_two(std::uint64_t s);
std::uint64_t next_power_of_two(std::uint64_t n);

SketchMatrix make_sketch(SketchKind kind, Index n, Index K, std::uint64_t seed = 0);

// sqrt(||I - V V^T||_F^2 / (n (n-1))).
double coherence_err(const SketchMatrix& V);
double coherence_err(const Matrix& V);
double welch_bound(Index n, Index K);

// Occupied diagonal offsets of V V^T (both signs, sorted) for a rescaled
// partial Hadamard sketch with K a power of two, computed in exact integer
// arithmetic.
std::vector<Index> vvt_pattern(const SketchMatrix& V);
// Offsets allowed by the structure: multiples of K within (-n, n).
std::vector<Index> vvt_allowed_offsets(Index n, Index K);

// P-SRHT subspace bound
//   K = 2 (eps^2 - eps^3/3)^{-1} (ln(c/delta) + L) (1 + sqrt(8 (ln(4n/delta) + L)))^2,
// L = (m+1) ln(9C/eps), with c = 8 for `table` and c = 4 for `printed`.
enum class SrhtBoundForm { table, printed };

struct SketchBound {
  Index K = 0;
  double K_real = 0.0;  // continuous minimum before rounding up
  double C = 0.0;       // minimizing net constant
  double eps = 0.0;     // per-net-point epsilon at the minimizer
};

// Smallest K such that the subspace embedding bound gives a quasi-optimality
// ratio sqrt((1+eps')/(1-eps')) <= ratio with probability >= 1 - delta.
SketchBound min_sketch_columns(SketchKind kind, double n, int m, double ratio, double delta,
                               SrhtBoundForm form = SrhtBoundForm::table);
// Bound evaluated at a given net constant C (continuous value).
double subspace_sketch_bound(SketchKind kind, double n, int m, double eps_prime, double C, double delta,
                             SrhtBoundForm form = SrhtBoundForm::table);
// Single-matrix (eps, delta) concentration bound.
Index concentration_columns(SketchKind kind, double n, double eps, double delta);

}  // namespace paraprec

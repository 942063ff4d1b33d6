#include "paraprec/bench.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "paraprec/error.hpp"
#include "paraprec/greedy.hpp"
#include "paraprec/rng.hpp"

namespace paraprec {

using Triplets = std::vector<Eigen::Triplet<double>>;

AdrMatrices adr_matrices(int N) {
  if (N < 4) throw InvalidArgument("mesh_side must be at least 4");
  const double h = 1.0 / N;
  const Index n = static_cast<Index>(N) * N;
  auto node = [N](int i, int j) { return static_cast<Index>(((i % N) + N) % N) + static_cast<Index>(N) * (((j % N) + N) % N); };
  Triplets K, M, Ax, Ay;
  // Two triangles per cell, split along (i,j)-(i+1,j+1).
  const std::array<std::array<std::array<int, 2>, 3>, 2> tris = {{{{{0, 0}, {1, 0}, {1, 1}}}, {{{0, 0}, {1, 1}, {0, 1}}}}};
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i)
      for (const auto& t : tris) {
        double x[3], y[3];
        Index id[3];
        for (int a = 0; a < 3; ++a) {
          x[a] = (i + t[a][0]) * h;
          y[a] = (j + t[a][1]) * h;
          id[a] = node(i + t[a][0], j + t[a][1]);
        }
        const double det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
        const double area = 0.5 * std::abs(det);
        // grad phi_a = (y_b - y_c, x_c - x_b) / det for (a,b,c) cyclic
        double gx[3], gy[3];
        for (int a = 0; a < 3; ++a) {
          const int b = (a + 1) % 3, c = (a + 2) % 3;
          gx[a] = (y[b] - y[c]) / det;
          gy[a] = (x[c] - x[b]) / det;
        }
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            K.emplace_back(id[a], id[b], area * (gx[a] * gx[b] + gy[a] * gy[b]));
            M.emplace_back(id[a], id[b], area / 12.0 * (a == b ? 2.0 : 1.0));
            Ax.emplace_back(id[a], id[b], area / 3.0 * gx[b]);
            Ay.emplace_back(id[a], id[b], area / 3.0 * gy[b]);
          }
      }
  AdrMatrices out;
  auto build = [n](SparseMatrix& S, const Triplets& t) {
    S.resize(n, n);
    S.setFromTriplets(t.begin(), t.end());
    S.prune(0.0);
    S.makeCompressed();
  };
  build(out.stiffness, K);
  build(out.mass, M);
  build(out.adv_x, Ax);
  build(out.adv_y, Ay);
  return out;
}

PointSet uniform_grid(double a, double b, Index count) {
  if (count < 1) throw InvalidArgument("grid needs at least one point");
  PointSet g;
  for (Index i = 0; i < count; ++i)
    g.push_back(make_point(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
  return g;
}

namespace {

void spot_check(const AffineOperator& op, const PointSet& grid, std::uint64_t seed) {
  SplitMix64 rng(derive_seed(seed, "spot-check"));
  const auto idx = sample_without_replacement(grid.size(), std::min<std::uint64_t>(10, grid.size()), rng);
  for (auto g : idx) factorize(op.eval(grid[g]), grid[g]);
}

}  // namespace

BenchmarkProblem assemble_adr(int mesh_side, double D, Index grid_size) {
  const AdrMatrices mats = adr_matrices(mesh_side);
  const SparseMatrix A0 = mats.stiffness + mats.mass;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<CoefficientFunction> coeffs = {CoefficientFunction::constant(1.0),
                                             CoefficientFunction::cosine(D, two_pi),
                                             CoefficientFunction::sine(D, two_pi)};
  auto op = std::make_shared<AffineOperator>(std::vector<SparseMatrix>{A0, mats.adv_x, mats.adv_y}, coeffs, 1);

  const Index n = A0.rows();
  Vector f(n);
  for (int j = 0; j < mesh_side; ++j)
    for (int i = 0; i < mesh_side; ++i) {
      const double x = static_cast<double>(i) / mesh_side - 0.5, y = static_cast<double>(j) / mesh_side - 0.5;
      f[i + static_cast<Index>(mesh_side) * j] = std::exp(-(x * x + y * y) / 0.01);
    }
  auto rhs = std::make_shared<AffineVector>(std::vector<Vector>{mats.mass * f},
                                            std::vector<CoefficientFunction>{CoefficientFunction::constant(1.0)}, 1);
  BenchmarkProblem p;
  p.op = op;
  p.rhs = rhs;
  p.grid = uniform_grid(0.0, 1.0, grid_size);
  p.RX = NormMatrix(A0);
  p.name = "adr";
  p.description = "periodic advection-diffusion-reaction, P1 elements";
  p.params = {{"mesh_side", mesh_side}, {"D", D}, {"grid_size", static_cast<double>(grid_size)}};
  spot_check(*op, p.grid, 0);
  return p;
}

namespace {

SparseMatrix laplacian(Index n, const std::vector<std::pair<Index, Index>>& edges, const std::vector<double>& w) {
  Triplets t;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    t.emplace_back(a, a, w[e]);
    t.emplace_back(b, b, w[e]);
    t.emplace_back(a, b, -w[e]);
    t.emplace_back(b, a, -w[e]);
  }
  SparseMatrix L(n, n);
  L.setFromTriplets(t.begin(), t.end());
  L.makeCompressed();
  return L;
}

std::vector<std::pair<Index, Index>> random_edges(Index n, Index count, SplitMix64& rng) {
  std::set<std::pair<Index, Index>> seen;
  std::vector<std::pair<Index, Index>> out;
  while (static_cast<Index>(out.size()) < count) {
    Index a = static_cast<Index>(rng.below(n)), b = static_cast<Index>(rng.below(n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) out.emplace_back(a, b);
  }
  return out;
}

}  // namespace

BenchmarkProblem synthetic_multiparam(int d, Index n, int m_A, std::uint64_t seed, Index grid_size, double lo,
                                      double hi) {
  if (d < 1) throw InvalidArgument("d must be at least 1");
  if (m_A < 2) throw InvalidArgument("m_A must be at least 2");
  if (m_A - 1 > d) throw InvalidArgument("each coefficient needs its own coordinate: m_A - 1 <= d");
  if (n < 4) throw InvalidArgument("n must be at least 4");
  if (!(lo > 0.0 && hi > 0.0)) throw InvalidArgument("coefficient range must be positive");

  PointSet grid = lhs_points(d, grid_size, derive_seed(seed, "grid"));
  double scale = 1.0;
  for (int attempt = 0; attempt < 5; ++attempt, scale *= 0.5) {
    SplitMix64 rng(derive_seed(seed, "synthetic"));
    // A0: ring plus random chords, identity shift and a sparse skew part.
    std::vector<std::pair<Index, Index>> ring;
    for (Index i = 0; i < n; ++i) ring.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
    auto chords = random_edges(n, n, rng);
    ring.insert(ring.end(), chords.begin(), chords.end());
    std::vector<double> w(ring.size());
    for (auto& x : w) x = 0.5 + rng.uniform();
    SparseMatrix I(n, n);
    I.setIdentity();
    SparseMatrix A0 = laplacian(n, ring, w) + I;
    Triplets skew;
    for (const auto& [a, b] : random_edges(n, n, rng)) {
      const double v = rng.uniform() - 0.5;
      skew.emplace_back(a, b, v);
      skew.emplace_back(b, a, -v);
    }
    SparseMatrix S(n, n);
    S.setFromTriplets(skew.begin(), skew.end());
    A0 += S;

    std::vector<SparseMatrix> terms{A0};
    std::vector<CoefficientFunction> coeffs{CoefficientFunction::constant(1.0)};
    for (int k = 1; k < m_A; ++k) {
      auto e = random_edges(n, n / 2 + 1, rng);
      std::vector<double> wk(e.size());
      for (auto& x : wk) x = scale * (0.5 + rng.uniform());
      terms.push_back(laplacian(n, e, wk));
      coeffs.push_back(CoefficientFunction::log_uniform(lo, hi, k - 1));
    }
    Vector b(n);
    for (Index i = 0; i < n; ++i) b[i] = rng.uniform() - 0.5;

    auto op = std::make_shared<AffineOperator>(terms, coeffs, d);
    try {
      spot_check(*op, grid, seed);
    } catch (const SingularOperator&) {
      continue;
    }
    BenchmarkProblem p;
    p.op = op;
    p.rhs = std::make_shared<AffineVector>(std::vector<Vector>{b},
                                           std::vector<CoefficientFunction>{CoefficientFunction::constant(1.0)}, d);
    p.grid = std::move(grid);
    SparseMatrix R = SparseMatrix(0.5 * (SparseMatrix(A0) + SparseMatrix(A0.transpose())));
    p.RX = NormMatrix(R);
    p.name = "synthetic";
    p.description = "synthetic multi-parameter affine problem";
    p.params = {{"d", d},
                {"n", static_cast<double>(n)},
                {"m_A", m_A},
                {"seed", static_cast<double>(seed)},
                {"grid_size", static_cast<double>(grid_size)},
                {"lo", lo},
                {"hi", hi}};
    return p;
  }
  throw GenerationFailed("synthetic problem stayed singular after 5 attempts");
}

Vector shepard_weights(const Point& xi, const PointSet& points, double s) {
  if (!(s > 0.0)) throw InvalidArgument("shepard exponent must be positive");
  if (points.empty()) throw InvalidArgument("no interpolation points");
  const Index m = static_cast<Index>(points.size());
  Vector w(m);
  for (Index i = 0; i < m; ++i) {
    const double dist = (xi - points[static_cast<std::size_t>(i)]).norm();
    if (dist == 0.0) {
      Vector e = Vector::Zero(m);
      e[i] = 1.0;
      return e;
    }
    w[i] = std::pow(dist, -s);
  }
  return w / w.sum();
}

Vector nearest_weights(const Point& xi, const PointSet& points) {
  if (points.empty()) throw InvalidArgument("no interpolation points");
  const Index m = static_cast<Index>(points.size());
  Index best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m; ++i) {
    const double dist = (xi - points[static_cast<std::size_t>(i)]).norm();
    if (dist < bd) {
      bd = dist;
      best = i;
    }
  }
  Vector e = Vector::Zero(m);
  e[best] = 1.0;
  return e;
}

}  // namespace paraprec

#include "paraprec/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "paraprec/error.hpp"
#include "paraprec/rng.hpp"

namespace paraprec {

std::string to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::partial_hadamard:
      return "rescaled-partial-hadamard";
    case SketchKind::rademacher:
      return "rescaled-rademacher";
    case SketchKind::psrht:
      return "psrht";
    case SketchKind::identity:
      return "identity";
  }
  return "unknown";
}

SketchKind parse_sketch_kind(const std::string& name) {
  if (name == "rescaled-partial-hadamard" || name == "hadamard" || name == "partial-hadamard")
    return SketchKind::partial_hadamard;
  if (name == "rescaled-rademacher" || name == "rademacher") return SketchKind::rademacher;
  if (name == "psrht" || name == "p-srht") return SketchKind::psrht;
  if (name == "identity") return SketchKind::identity;
  throw InvalidArgument("unknown sketch kind '" + name + "'");
}

bool is_power_of_two(std::uint64_t s) { return s != 0 && (s & (s - 1)) == 0; }

std::uint64_t next_power_of_two(std::uint64_t n) {
  std::uint64_t s = 1;
  while (s < n) s <<= 1;
  return s;
}

Eigen::MatrixXi hadamard_int(Index s) {
  if (s < 1 || !is_power_of_two(static_cast<std::uint64_t>(s)))
    throw InvalidSize("Hadamard order " + std::to_string(s) + " is not a power of two");
  Eigen::MatrixXi H(s, s);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) H(i, j) = hadamard_entry(i, j);
  return H;
}

Matrix hadamard(Index s) { return hadamard_int(s).cast<double>(); }

SketchMatrix make_sketch(SketchKind kind, Index n, Index K, std::uint64_t seed) {
  if (n < 1) throw InvalidSize("sketch needs n >= 1");
  if (K < 1) throw InvalidSize("sketch needs K >= 1");
  SketchMatrix S;
  S.kind_ = kind;
  S.seed_ = seed;
  const double scale = 1.0 / std::sqrt(static_cast<double>(K));
  switch (kind) {
    case SketchKind::identity:
      if (K != n) throw InvalidSize("identity sketch needs K = n");
      S.V_ = Matrix::Identity(n, n);
      break;
    case SketchKind::partial_hadamard: {
      if (K > n) throw InvalidSize("partial Hadamard sketch needs K <= n");
      S.s_ = next_power_of_two(static_cast<std::uint64_t>(n));
      S.V_.resize(n, K);
      for (Index j = 0; j < K; ++j)
        for (Index i = 0; i < n; ++i) S.V_(i, j) = scale * hadamard_entry(i, j);
      break;
    }
    case SketchKind::rademacher: {
      SplitMix64 rng(seed);
      S.V_.resize(n, K);
      for (Index j = 0; j < K; ++j)
        for (Index i = 0; i < n; ++i) S.V_(i, j) = scale * rng.sign();
      break;
    }
    case SketchKind::psrht: {
      S.s_ = next_power_of_two(static_cast<std::uint64_t>(n));
      if (static_cast<std::uint64_t>(K) > S.s_)
        throw InvalidSize("P-SRHT samples K = " + std::to_string(K) + " rows of a Hadamard matrix of order " +
                          std::to_string(S.s_));
      SplitMix64 rng(seed);
      S.signs_.resize(n);
      for (Index i = 0; i < n; ++i) S.signs_[i] = rng.sign();
      S.rows_ = sample_without_replacement(S.s_, static_cast<std::uint64_t>(K), rng);
      S.V_.resize(n, K);
      // Entry (i, j) of (R H D)^T is D_i H(r_j, i).
      for (Index j = 0; j < K; ++j)
        for (Index i = 0; i < n; ++i) S.V_(i, j) = scale * S.signs_[i] * hadamard_entry(S.rows_[j], i);
      break;
    }
  }
  return S;
}

double coherence_err(const Matrix& V) {
  const Index n = V.rows();
  if (n < 2) throw InvalidSize("coherence needs n >= 2");
  double off2;
  if (n <= 4096) {
    Matrix G = V * V.transpose();
    G.diagonal().array() -= 1.0;
    off2 = G.squaredNorm();
  } else {
    // ||I - V V^T||_F^2 = n - 2 ||V||_F^2 + ||V^T V||_F^2
    off2 = static_cast<double>(n) - 2.0 * V.squaredNorm() + (V.transpose() * V).squaredNorm();
  }
  return std::sqrt(std::max(0.0, off2) / (static_cast<double>(n) * static_cast<double>(n - 1)));
}

double coherence_err(const SketchMatrix& V) { return coherence_err(V.dense()); }

double welch_bound(Index n, Index K) {
  if (n < 2 || K < 1) throw InvalidSize("Welch bound needs n >= 2, K >= 1");
  if (K >= n) return 0.0;
  return std::sqrt(static_cast<double>(n - K) / (static_cast<double>(n - 1) * static_cast<double>(K)));
}

std::vector<Index> vvt_pattern(const SketchMatrix& V) {
  if (V.kind() != SketchKind::partial_hadamard) throw InvalidArgument("vvt_pattern needs a rescaled partial Hadamard sketch");
  const Index n = V.rows(), K = V.cols();
  if (!is_power_of_two(static_cast<std::uint64_t>(K))) throw InvalidSize("vvt_pattern needs K = 2^q");
  std::vector<char> occupied(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      if (occupied[j - i]) continue;
      long long dot = 0;
      for (Index c = 0; c < K; ++c) dot += hadamard_entry(i, c) * hadamard_entry(j, c);
      if (dot != 0) occupied[j - i] = 1;
    }
  std::vector<Index> out;
  for (Index d = n - 1; d >= 1; --d)
    if (occupied[d]) out.push_back(-d);
  for (Index d = 0; d < n; ++d)
    if (occupied[d]) out.push_back(d);
  return out;
}

std::vector<Index> vvt_allowed_offsets(Index n, Index K) {
  if (K < 1 || !is_power_of_two(static_cast<std::uint64_t>(K))) throw InvalidSize("vvt_allowed_offsets needs K = 2^q");
  std::vector<Index> out;
  for (Index d = -((n - 1) / K) * K; d < n; d += K) out.push_back(d);
  return out;
}

// ---- sketch size bounds ---------------------------------------------------

double subspace_sketch_bound(SketchKind kind, double n, int m, double eps_prime, double C, double delta,
                             SrhtBoundForm form) {
  const double eps = eps_prime * (C - 1.0) / (C + 1.0);
  if (!(eps > 0.0) || eps > 1.0) return std::numeric_limits<double>::infinity();
  const double L = (m + 1) * std::log(9.0 * C / eps);
  switch (kind) {
    case SketchKind::rademacher:
      return 6.0 / (eps * eps) * (std::log(2.0 * n / delta) + L);
    case SketchKind::psrht: {
      const double outer = (form == SrhtBoundForm::table ? std::log(8.0 / delta) : std::log(4.0 / delta)) + L;
      const double inner = 1.0 + std::sqrt(8.0 * (std::log(4.0 * n / delta) + L));
      return 2.0 / (eps * eps - eps * eps * eps / 3.0) * outer * inner * inner;
    }
    default:
      throw InvalidArgument("sketch bounds exist only for rademacher and psrht");
  }
}

SketchBound min_sketch_columns(SketchKind kind, double n, int m, double ratio, double delta, SrhtBoundForm form) {
  if (!(ratio > 1.0)) throw InvalidArgument("quasi-optimality ratio must exceed 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(n >= 1.0) || m < 0) throw InvalidArgument("need n >= 1 and m >= 0");
  if (kind != SketchKind::rademacher && kind != SketchKind::psrht)
    throw InvalidArgument("sketch bounds exist only for rademacher and psrht");
  // ratio^2 = (1+e)/(1-e)
  const double r2 = ratio * ratio;
  const double eps_prime = (r2 - 1.0) / (r2 + 1.0);
  auto f = [&](double logc) { return subspace_sketch_bound(kind, n, m, eps_prime, std::exp(logc), delta, form); };

  const int grid = 10000;
  const double a = std::log(1.0 + 1e-4), b = std::log(1e3);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double v = f(a + (b - a) * i / (grid - 1));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section refinement on the bracketing grid cells.
  double lo = a + (b - a) * std::max(0, best - 1) / (grid - 1);
  double hi = a + (b - a) * std::min(grid - 1, best + 1) / (grid - 1);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  double logc = 0.5 * (lo + hi);
  double val = f(logc);
  if (best_val < val) {
    val = best_val;
    logc = a + (b - a) * best / (grid - 1);
  }
  SketchBound out;
  out.K_real = val;
  out.K = static_cast<Index>(std::ceil(val));
  out.C = std::exp(logc);
  out.eps = eps_prime * (out.C - 1.0) / (out.C + 1.0);
  return out;
}

Index concentration_columns(SketchKind kind, double n, double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  double K;
  switch (kind) {
    case SketchKind::rademacher:
      K = 6.0 / (eps * eps) * std::log(2.0 * n / delta);
      break;
    case SketchKind::psrht: {
      const double inner = 1.0 + std::sqrt(8.0 * std::log(4.0 * n / delta));
      K = 2.0 / (eps * eps - eps * eps * eps / 3.0) * std::log(4.0 / delta) * inner * inner;
      break;
    }
    default:
      throw InvalidArgument("concentration bounds exist only for rademacher and psrht");
  }
  return static_cast<Index>(std::ceil(K));
}

}  // namespace paraprec

#include "paraprec/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "paraprec/error.hpp"
#include "paraprec/parallel.hpp"
#include "paraprec/rng.hpp"

namespace paraprec {

namespace {

Index grid_index_of(const PointSet& grid, const Point& xi) {
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (grid[g].size() == xi.size() && (grid[g] - xi).cwiseAbs().maxCoeff() <= 1e-12) return static_cast<Index>(g);
  return -1;
}

std::string format_point(const Point& xi) {
  std::string s;
  char buf[32];
  for (Index j = 0; j < xi.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", xi[j]);
    if (j) s += ';';
    s += buf;
  }
  return s;
}

using Scorer = std::function<double(const Preconditioner&, const Point&)>;

// Shared selection loop. Candidates are ranked by score (ties to the lowest
// grid index); already selected points are never proposed again and a point
// whose operator turns out to be singular is skipped with a warning.
Preconditioner run_greedy(Preconditioner P, const PointSet& grid, const GreedyOptions& opt, const Scorer& score,
                          double stop_below) {
  if (opt.M_max < 1) throw InvalidArgument("M_max must be at least 1");
  if (grid.empty()) throw InvalidArgument("empty training grid");
  const unsigned workers = std::max(1u, opt.workers);
  std::optional<KappaEvaluator> kev;
  if (opt.diagnostics) kev.emplace(P.op_ptr());
  auto wants_kappa = [&](Index m) {
    return opt.diagnostics &&
           (opt.kappa_at.empty() || std::find(opt.kappa_at.begin(), opt.kappa_at.end(), m) != opt.kappa_at.end());
  };

  auto sweep = [&]() {
    std::vector<double> s(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t g) { s[g] = score(P, grid[g]); });
    return s;
  };
  auto record = [&](const Point& xi, Index g, std::optional<double> chosen_score, const std::vector<double>& s) {
    GreedyRecord rec;
    rec.m = static_cast<Index>(P.size());
    rec.xi = xi;
    rec.grid_index = g;
    rec.sup_residual = *std::max_element(s.begin(), s.end());
    rec.score = chosen_score;
    if (wants_kappa(rec.m)) rec.sup_kappa = sup_kappa(P, grid, *kev, workers);
    P.history.push_back(rec);
    if (opt.on_step) opt.on_step(P, s);
  };

  if (opt.seed_point && P.size() == 0) {
    const Point& xi = *opt.seed_point;
    P.add_point(xi);
    record(xi, grid_index_of(grid, xi), std::nullopt, sweep());
  }

  std::vector<double> s = sweep();
  while (static_cast<Index>(P.size()) < opt.M_max) {
    if (*std::max_element(s.begin(), s.end()) <= stop_below) break;
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    bool added = false;
    for (std::size_t g : order) {
      if (P.basis().find(grid[g]) >= 0) continue;
      try {
        P.add_factorized(grid[g], factorize(P.op().eval(grid[g]), grid[g]));
      } catch (const SingularOperator& e) {
        P.warnings.push_back("skipped singular point " + format_point(grid[g]) + ": " + e.what());
        continue;
      }
      const double chosen = s[g];
      s = sweep();
      record(grid[g], static_cast<Index>(g), chosen, s);
      added = true;
      break;
    }
    if (!added) {
      P.warnings.push_back("no admissible candidate left on the grid");
      break;
    }
  }
  return P;
}

}  // namespace

Preconditioner greedy_frob(std::shared_ptr<const AffineOperator> op, const PointSet& grid, const Matrix& V,
                           const GreedyOptions& options, const Preconditioner* resume) {
  Preconditioner P = resume ? *resume
                            : Preconditioner(op, V, options.constraint, eim_for_operator(*op, grid), options.workers);
  return run_greedy(
      std::move(P), grid, options, [](const Preconditioner& p, const Point& xi) { return p.sketched_residual(xi); },
      -1.0);
}

Preconditioner greedy_delta(std::shared_ptr<const AffineOperator> op, const PointSet& grid, const ReducedModel& model,
                            const Matrix& V, const GreedyOptions& options, double delta_tol) {
  if (model.dim() == 0) throw InvalidArgument("greedy_delta needs a nonempty reduced space");
  Preconditioner P(op, V, options.constraint, eim_for_operator(*op, grid), options.workers);
  const Matrix RU = model.norm().apply(model.U());
  auto score = [&](const Preconditioner& p, const Point& xi) {
    try {
      return delta_rm_from(xi, model, p.at(xi).apply_transpose(RU));
    } catch (const DegenerateTestSpace&) {
      return 1.0;
    }
  };
  return run_greedy(std::move(P), grid, options, score, delta_tol);
}

PointSet lhs_points(int d, Index m, std::uint64_t seed, const Vector& lo, const Vector& hi) {
  if (m < 1) throw InvalidArgument("lhs_points: m must be at least 1");
  if (d < 1) throw InvalidArgument("lhs_points: d must be at least 1");
  if ((lo.size() && lo.size() != d) || (hi.size() && hi.size() != d)) throw DimensionError("lhs_points: bounds");
  SplitMix64 rng(derive_seed(seed, "lhs"));
  PointSet pts(static_cast<std::size_t>(m), Point(d));
  for (int j = 0; j < d; ++j) {
    const auto perm = sample_without_replacement(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(m), rng);
    const double a = lo.size() ? lo[j] : 0.0, b = hi.size() ? hi[j] : 1.0;
    for (Index i = 0; i < m; ++i) {
      const double t = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + rng.uniform()) / static_cast<double>(m);
      pts[static_cast<std::size_t>(i)][j] = a + (b - a) * t;
    }
  }
  return pts;
}

std::string history_csv(const Preconditioner& P) {
  std::ostringstream os;
  os << "# schema: paraprec-greedy-history/1\n";
  os << "m,xi_selected,sup_sketch_residual,sup_kappa\n";
  char buf[64];
  for (const auto& r : P.history) {
    os << r.m << ',' << format_point(r.xi) << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.sup_residual);
    os << buf << ',';
    if (r.sup_kappa) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.sup_kappa);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace paraprec

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "paraprec/error.hpp"
#include "paraprec/parallel.hpp"
#include "paraprec/reduction.hpp"

namespace paraprec {

std::string to_string(RbMode mode) {
  switch (mode) {
    case RbMode::ideal: return "ideal";
    case RbMode::standard: return "standard";
    case RbMode::precond_fixed: return "precond_fixed";
    case RbMode::precond_reuse: return "precond_reuse";
  }
  return "?";
}

RbMode parse_rb_mode(const std::string& name) {
  if (name == "ideal") return RbMode::ideal;
  if (name == "standard") return RbMode::standard;
  if (name == "precond_fixed") return RbMode::precond_fixed;
  if (name == "precond_reuse") return RbMode::precond_reuse;
  throw InvalidArgument("unknown rb mode '" + name + "'");
}

namespace {

struct Eval {
  double score = 0.0;  // selection criterion (error indicator)
  double rel_err = 0.0;
  double eta = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

RbResult rb_greedy(std::shared_ptr<const AffineOperator> op, std::shared_ptr<const AffineVector> rhs,
                   const PointSet& grid, const NormMatrix& RX, const RbOptions& opt) {
  if (!op || !rhs) throw InvalidArgument("rb_greedy needs an operator and a right-hand side");
  if (grid.empty()) throw InvalidArgument("rb_greedy: empty training grid");
  if (opt.R < 0) throw InvalidArgument("rb_greedy: R must be nonnegative");
  if (opt.validation_stride < 0) throw InvalidArgument("rb_greedy: validation stride must be nonnegative");
  if (opt.mode == RbMode::precond_fixed && (opt.fixed == nullptr || opt.fixed->size() == 0))
    throw InvalidArgument("precond_fixed needs a nonempty preconditioner");
  const unsigned workers = std::max(1u, opt.workers);
  const std::size_t N = grid.size();

  RbResult out;
  out.truth.resize(N);
  std::vector<double> unorm(N);
  parallel_for(N, workers, [&](std::size_t g) {
    const FactorizedInverse F = factorize(op->eval(grid[g]), grid[g]);
    out.truth[g] = F.apply(rhs->eval(grid[g]));
    unorm[g] = RX.xnorm(out.truth[g]);
  });

  std::vector<bool> is_valid(N, false), is_train(N, true);
  for (std::size_t g = 0; g < N; ++g) {
    const auto s = static_cast<std::size_t>(opt.validation_stride);
    is_valid[g] = s == 0 || g % s == s - 1;
    is_train[g] = s == 0 || !is_valid[g];
  }

  out.model = ReducedModel(op, rhs, RX);
  out.model.mode_tag = to_string(opt.mode);
  ReducedModel& model = out.model;
  if (opt.mode == RbMode::precond_reuse) {
    Matrix V = opt.V.size() ? opt.V : Matrix::Identity(op->dim(), op->dim());
    out.precond.emplace(op, std::move(V), opt.constraint, eim_for_operator(*op, grid), workers);
  }
  const Preconditioner* pre = opt.mode == RbMode::precond_fixed ? opt.fixed
                              : opt.mode == RbMode::precond_reuse ? &*out.precond
                                                                  : nullptr;

  auto evaluate = [&]() {
    std::vector<Eval> ev(N);
    parallel_for(N, workers, [&](std::size_t g) {
      const Point& xi = grid[g];
      const Vector& u = out.truth[g];
      Eval e;
      Vector a;
      double est = std::numeric_limits<double>::quiet_NaN();
      switch (opt.mode) {
        case RbMode::ideal:
          a = best_approx_of(u, model);
          break;
        case RbMode::standard: {
          a = galerkin(xi, model);
          est = dual_residual_norm(xi, model.U() * a, *op, *rhs, RX);
          break;
        }
        case RbMode::precond_fixed:
        case RbMode::precond_reuse: {
          if (pre->size() == 0) {
            // P_0 = I
            a = model.dim() ? galerkin(xi, model) : Vector();
            const Vector res = (model.dim() ? Vector(op->eval(xi) * (model.U() * a)) : Vector::Zero(op->dim())) -
                               rhs->eval(xi);
            est = RX.xnorm(res);
          } else {
            const Vector lambda = pre->coefficients(xi).lambda;
            a = model.dim() ? model.petrov_galerkin_blocks(xi, lambda) : Vector();
            est = RX.xnorm(model.preconditioned_residual_blocks(xi, lambda, a));
          }
          break;
        }
      }
      const Vector ur = model.dim() ? Vector(model.U() * a) : Vector::Zero(op->dim());
      const double err = RX.xnorm(u - ur);
      e.rel_err = unorm[g] > 0.0 ? err / unorm[g] : err;
      e.score = opt.mode == RbMode::ideal ? err : est;
      if (opt.mode != RbMode::ideal) e.eta = err > 0.0 ? est / err : 1.0;
      ev[g] = e;
    });
    return ev;
  };

  auto attach = [&]() {
    if (pre && pre->size() > 0 && model.dim() > 0) model.attach(pre->basis(), workers);
  };

  std::set<std::size_t> chosen;
  std::vector<Eval> ev = evaluate();
  for (Index r = 0; r < opt.R; ++r) {
    std::size_t best = N;
    for (std::size_t g = 0; g < N; ++g)
      if (is_train[g] && (best == N || ev[g].score > ev[best].score)) best = g;
    if (best == N) break;
    const double score = ev[best].score;
    if (chosen.count(best)) {
      out.trace.status = "stagnated";
      break;
    }
    if (!model.add_snapshot(out.truth[best], grid[best], opt.drop_tol)) {
      out.trace.status = "stagnated";
      break;
    }
    chosen.insert(best);
    if (opt.mode == RbMode::precond_reuse && out.precond->basis().find(grid[best]) < 0)
      out.precond->add_factorized(grid[best], factorize(op->eval(grid[best]), grid[best]));
    attach();
    ev = evaluate();

    RbRecord rec;
    rec.r = model.dim();
    rec.xi = grid[best];
    rec.grid_index = static_cast<Index>(best);
    rec.score = score;
    std::vector<double> errs, etas;
    for (std::size_t g = 0; g < N; ++g) {
      rec.sup_rel_err_all = std::max(rec.sup_rel_err_all, ev[g].rel_err);
      if (!is_valid[g]) continue;
      errs.push_back(ev[g].rel_err);
      if (std::isfinite(ev[g].eta)) etas.push_back(ev[g].eta);
    }
    rec.sup_rel_err = errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
    rec.q97_rel_err = quantile(errs, 0.97);
    const auto ci = confidence_interval(etas, opt.confidence);
    rec.eff_lo = ci.first;
    rec.eff_hi = ci.second;
    out.trace.records.push_back(rec);
  }
  return out;
}

}  // namespace paraprec

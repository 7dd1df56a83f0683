#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "twinflow/lp.hpp"

namespace twinflow {

struct BnbResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  long nodes = 0;
};

namespace detail {

struct BnbContext {
  const LpProblem& prob;
  const std::vector<std::size_t>& int_vars;
  double tol;
  double sign;  // +1 minimize, -1 maximize (compare sign * objective)
  BnbResult best;
  bool have_incumbent = false;
  long nodes = 0;
};

inline std::size_t most_fractional(const std::vector<double>& x,
                                   const std::vector<std::size_t>& int_vars,
                                   double tol) {
  std::size_t pick = SIZE_MAX;
  double best_frac = tol;
  for (std::size_t j : int_vars) {
    double f = x[j] - std::floor(x[j]);
    double dist = std::min(f, 1.0 - f);  // distance to nearest integer
    if (dist > best_frac) {
      best_frac = dist;
      pick = j;
    }
  }
  return pick;
}

inline void bnb_node(BnbContext& ctx, std::map<std::size_t, double>& fixed) {
  ++ctx.nodes;
  LpSolution relax;
  try {
    relax = solve_with_fixed(ctx.prob, fixed);
  } catch (const InfeasibleFixing&) {
    return;
  }
  if (relax.status == LpStatus::Infeasible) return;
  if (relax.status == LpStatus::Unbounded)
    throw NumericalBreakdown("unbounded relaxation in branch and bound");

  double bound = ctx.sign * relax.objective;
  if (ctx.have_incumbent && bound >= ctx.sign * ctx.best.objective - 1e-12)
    return;  // prune: relaxation cannot beat the incumbent

  std::size_t j = most_fractional(relax.x, ctx.int_vars, ctx.tol);
  if (j == SIZE_MAX) {
    // Integral: re-solve with the integers pinned at their rounded values so
    // the continuous part (and objective) is exact, then accept as incumbent.
    std::map<std::size_t, double> snapped = fixed;
    for (std::size_t v : ctx.int_vars) snapped[v] = std::round(relax.x[v]);
    LpSolution exact = solve_with_fixed(ctx.prob, snapped);
    if (exact.status != LpStatus::Optimal) return;
    if (!ctx.have_incumbent ||
        ctx.sign * exact.objective < ctx.sign * ctx.best.objective) {
      ctx.best.status = LpStatus::Optimal;
      ctx.best.x = exact.x;
      ctx.best.objective = exact.objective;
      ctx.have_incumbent = true;
    }
    return;
  }

  double lo = std::floor(relax.x[j]);
  // 0-branch (floor) first, then the ceil branch.
  fixed[j] = lo;
  bnb_node(ctx, fixed);
  fixed[j] = lo + 1.0;
  bnb_node(ctx, fixed);
  fixed.erase(j);
}

}  // namespace detail

// Depth-first branch and bound over the given integer variables:
// most-fractional branching, lower branch first, bound pruning against the
// incumbent. Exact for the small problems this project solves.
inline BnbResult branch_and_bound(const LpProblem& prob,
                                  const std::vector<std::size_t>& integer_vars,
                                  double integrality_tol = kIntegralityTol) {
  detail::BnbContext ctx{prob, integer_vars, integrality_tol,
                         prob.maximize ? -1.0 : 1.0, {}, false, 0};
  std::map<std::size_t, double> fixed;
  detail::bnb_node(ctx, fixed);
  ctx.best.nodes = ctx.nodes;
  if (!ctx.have_incumbent) ctx.best.status = LpStatus::Infeasible;
  return ctx.best;
}

}  // namespace twinflow

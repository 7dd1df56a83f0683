#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "twinflow/errors.hpp"

namespace twinflow {

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class LpStatus { Optimal, Infeasible, Unbounded };

constexpr double kLpFeasibilityTol = 1e-7;
constexpr double kLpPivotTol = 1e-11;
constexpr double kLpReducedCostTol = 1e-9;
constexpr double kIntegralityTol = 1e-6;

// Dense LP in row form: optimize c'x subject to A x {<=,=,>=} b and
// per-variable bounds (infinities allowed).
struct LpProblem {
  bool maximize = false;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<RowSense> senses;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  void check() const {
    if (rhs.size() != rows.size() || senses.size() != rows.size())
      throw DimensionMismatch("row arrays disagree");
    if (lower.size() != objective.size() || upper.size() != objective.size())
      throw DimensionMismatch("bound arrays disagree");
    for (const auto& r : rows)
      if (r.size() != objective.size())
        throw DimensionMismatch("row width disagrees with objective");
    for (std::size_t j = 0; j < lower.size(); ++j)
      if (lower[j] > upper[j]) throw DimensionMismatch("lower bound > upper");
  }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Two-phase dense tableau simplex with Bland's rule.
//
// Canonical form built here: minimize over nonnegative columns subject to
// equality rows with b >= 0. Original variables are shifted by their lower
// bound (split into a +/- pair when the lower bound is -inf); finite upper
// bounds become extra rows.
class SimplexTableau {
 public:
  explicit SimplexTableau(const LpProblem& p) : prob_(p) {
    p.check();
    build();
  }

  LpSolution solve() {
    LpSolution out;
    // Phase 1: minimize artificial mass.
    if (num_artificials_ > 0) {
      set_phase1_objective();
      if (!run_simplex()) throw NumericalBreakdown("phase-1 pivot failure");
      if (objective_value() > kLpFeasibilityTol) {
        out.status = LpStatus::Infeasible;
        return out;
      }
      drive_out_artificials();
    }
    set_phase2_objective();
    if (!run_simplex()) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    out.status = LpStatus::Optimal;
    out.x = extract_solution();
    double val = 0.0;
    for (std::size_t j = 0; j < prob_.num_vars(); ++j)
      val += prob_.objective[j] * out.x[j];
    out.objective = val;
    return out;
  }

 private:
  // Column layout: for each original var, one or two canonical columns,
  // then slack/surplus columns, then artificials.
  void build() {
    const std::size_t n = prob_.num_vars();
    col_of_.assign(n, 0);
    neg_col_of_.assign(n, SIZE_MAX);
    shift_.assign(n, 0.0);

    std::size_t cols = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (prob_.lower[j] == -kInf) {
        col_of_[j] = cols++;
        neg_col_of_[j] = cols++;  // x = x+ - x-
        shift_[j] = 0.0;
      } else {
        col_of_[j] = cols++;
        shift_[j] = prob_.lower[j];
      }
    }
    num_structural_ = cols;

    // Assemble rows: original rows plus upper-bound rows.
    struct RawRow {
      std::vector<double> a;
      double b;
      RowSense sense;
    };
    std::vector<RawRow> raw;
    raw.reserve(prob_.num_rows() + n);
    for (std::size_t i = 0; i < prob_.num_rows(); ++i) {
      RawRow r{std::vector<double>(num_structural_, 0.0), prob_.rhs[i],
               prob_.senses[i]};
      for (std::size_t j = 0; j < n; ++j) {
        double a = prob_.rows[i][j];
        if (a == 0.0) continue;
        r.a[col_of_[j]] += a;
        if (neg_col_of_[j] != SIZE_MAX) r.a[neg_col_of_[j]] -= a;
        r.b -= a * shift_[j];
      }
      raw.push_back(std::move(r));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (prob_.upper[j] == kInf) continue;
      RawRow r{std::vector<double>(num_structural_, 0.0),
               prob_.upper[j] - shift_[j], RowSense::LessEqual};
      r.a[col_of_[j]] = 1.0;
      if (neg_col_of_[j] != SIZE_MAX) r.a[neg_col_of_[j]] = -1.0;
      raw.push_back(std::move(r));
    }

    const std::size_t m = raw.size();
    // slack columns first, then artificials
    std::size_t slack_cols = 0;
    for (const auto& r : raw)
      if (r.sense != RowSense::Equal) ++slack_cols;

    num_cols_ = num_structural_ + slack_cols;
    tableau_.assign(m, std::vector<double>(num_cols_, 0.0));
    b_.assign(m, 0.0);
    basis_.assign(m, SIZE_MAX);

    std::size_t next_slack = num_structural_;
    std::vector<std::size_t> rows_needing_artificial;
    for (std::size_t i = 0; i < m; ++i) {
      auto& row = tableau_[i];
      for (std::size_t c = 0; c < num_structural_; ++c) row[c] = raw[i].a[c];
      b_[i] = raw[i].b;
      double slack_sign = 0.0;
      std::size_t slack_col = SIZE_MAX;
      if (raw[i].sense == RowSense::LessEqual) {
        slack_sign = 1.0;
        slack_col = next_slack++;
      } else if (raw[i].sense == RowSense::GreaterEqual) {
        slack_sign = -1.0;
        slack_col = next_slack++;
      }
      if (slack_col != SIZE_MAX) row[slack_col] = slack_sign;
      if (b_[i] < 0.0) {
        for (auto& v : row) v = -v;
        b_[i] = -b_[i];
        slack_sign = -slack_sign;
      }
      if (slack_col != SIZE_MAX && slack_sign > 0.0) {
        basis_[i] = slack_col;  // slack serves as the identity column
      } else {
        rows_needing_artificial.push_back(i);
      }
    }

    num_artificials_ = rows_needing_artificial.size();
    first_artificial_ = num_cols_;
    num_cols_ += num_artificials_;
    for (auto& row : tableau_) row.resize(num_cols_, 0.0);
    for (std::size_t k = 0; k < num_artificials_; ++k) {
      std::size_t i = rows_needing_artificial[k];
      std::size_t col = first_artificial_ + k;
      tableau_[i][col] = 1.0;
      basis_[i] = col;
    }

    cost_.assign(num_cols_, 0.0);
  }

  void set_phase1_objective() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t c = first_artificial_; c < num_cols_; ++c) cost_[c] = 1.0;
    phase1_ = true;
    reduce_costs();
  }

  void set_phase2_objective() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    const double sign = prob_.maximize ? -1.0 : 1.0;  // canonical min
    for (std::size_t j = 0; j < prob_.num_vars(); ++j) {
      double c = sign * prob_.objective[j];
      cost_[col_of_[j]] += c;
      if (neg_col_of_[j] != SIZE_MAX) cost_[neg_col_of_[j]] -= c;
    }
    phase1_ = false;
    reduce_costs();
  }

  // Recompute the reduced-cost row z from scratch for the current basis.
  void reduce_costs() {
    z_ = cost_;
    obj_ = 0.0;
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      obj_ -= cb * b_[i];
      for (std::size_t c = 0; c < num_cols_; ++c)
        z_[c] -= cb * tableau_[i][c];
    }
  }

  double objective_value() const { return -obj_; }

  // Bland's rule; returns false on unbounded (phase 2 only).
  bool run_simplex() {
    const std::size_t m = tableau_.size();
    // Generous anti-stall cap; Bland guarantees finite termination well below.
    const std::size_t max_iters = 2000 + 200 * (num_cols_ + m) * (num_cols_ + m);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
      std::size_t enter = SIZE_MAX;
      for (std::size_t c = 0; c < num_cols_; ++c) {
        if (phase1_ == false && c >= first_artificial_) break;
        if (z_[c] < -kLpReducedCostTol) {
          enter = c;
          break;
        }
      }
      if (enter == SIZE_MAX) return true;  // optimal

      std::size_t leave = SIZE_MAX;
      double best_ratio = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        double a = tableau_[i][enter];
        if (a > kLpPivotTol) {
          double ratio = b_[i] / a;
          if (ratio < best_ratio - 1e-12 ||
              (std::fabs(ratio - best_ratio) <= 1e-12 &&
               (leave == SIZE_MAX || basis_[i] < basis_[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == SIZE_MAX) {
        if (phase1_) throw NumericalBreakdown("phase-1 unbounded");
        return false;  // unbounded
      }
      pivot(leave, enter);
    }
    throw NumericalBreakdown("simplex iteration cap exceeded");
  }

  void pivot(std::size_t r, std::size_t c) {
    double piv = tableau_[r][c];
    if (std::fabs(piv) < kLpPivotTol)
      throw NumericalBreakdown("pivot below tolerance");
    double inv = 1.0 / piv;
    for (auto& v : tableau_[r]) v *= inv;
    b_[r] *= inv;
    tableau_[r][c] = 1.0;
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      if (i == r) continue;
      double f = tableau_[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < num_cols_; ++j)
        tableau_[i][j] -= f * tableau_[r][j];
      tableau_[i][c] = 0.0;
      b_[i] -= f * b_[r];
      if (b_[i] < 0.0 && b_[i] > -1e-12) b_[i] = 0.0;
    }
    double zf = z_[c];
    if (zf != 0.0) {
      for (std::size_t j = 0; j < num_cols_; ++j)
        z_[j] -= zf * tableau_[r][j];
      z_[c] = 0.0;
      obj_ -= zf * b_[r];
    }
    basis_[r] = c;
  }

  // After phase 1, pivot basic artificials (at value 0) out where possible;
  // rows where none of the structural entries survive are redundant and are
  // dropped so no artificial can drift positive during phase 2.
  void drive_out_artificials() {
    std::vector<std::size_t> drop;
    for (std::size_t i = 0; i < tableau_.size(); ++i) {
      if (basis_[i] < first_artificial_) continue;
      std::size_t c = SIZE_MAX;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (std::fabs(tableau_[i][j]) > kLpPivotTol) {
          c = j;
          break;
        }
      }
      if (c != SIZE_MAX)
        pivot(i, c);
      else
        drop.push_back(i);
    }
    for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
      tableau_.erase(tableau_.begin() + static_cast<std::ptrdiff_t>(*it));
      b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(*it));
      basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(*it));
    }
  }

  std::vector<double> extract_solution() const {
    std::vector<double> canon(num_cols_, 0.0);
    for (std::size_t i = 0; i < tableau_.size(); ++i) canon[basis_[i]] = b_[i];
    std::vector<double> x(prob_.num_vars(), 0.0);
    for (std::size_t j = 0; j < prob_.num_vars(); ++j) {
      double v = canon[col_of_[j]];
      if (neg_col_of_[j] != SIZE_MAX) v -= canon[neg_col_of_[j]];
      x[j] = v + shift_[j];
    }
    return x;
  }

  const LpProblem& prob_;
  std::vector<std::vector<double>> tableau_;
  std::vector<double> b_;
  std::vector<double> cost_;
  std::vector<double> z_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> col_of_;
  std::vector<std::size_t> neg_col_of_;
  std::vector<double> shift_;
  std::size_t num_structural_ = 0;
  std::size_t num_cols_ = 0;
  std::size_t num_artificials_ = 0;
  std::size_t first_artificial_ = 0;
  double obj_ = 0.0;
  bool phase1_ = false;
};

}  // namespace detail

inline LpSolution simplex_solve(const LpProblem& prob) {
  detail::SimplexTableau t(prob);
  return t.solve();
}

// Solve with selected variables pinned to values (branching support).
inline LpSolution solve_with_fixed(const LpProblem& prob,
                                   const std::map<std::size_t, double>& fixings) {
  LpProblem p = prob;
  for (const auto& [j, v] : fixings) {
    if (j >= p.num_vars()) throw IndexOutOfRange("fixing out of range");
    if (v < prob.lower[j] - 1e-12 || v > prob.upper[j] + 1e-12)
      throw InfeasibleFixing("fixed value violates variable bounds");
    p.lower[j] = v;
    p.upper[j] = v;
  }
  return simplex_solve(p);
}

}  // namespace twinflow

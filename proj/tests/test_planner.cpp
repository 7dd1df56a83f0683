#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "twinflow/bnb.hpp"
#include "twinflow/oracle.hpp"
#include "twinflow/planner.hpp"
#include "twinflow/rng.hpp"

using namespace twinflow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

AssociationProblem make_problem(int m, int n, std::vector<double> costs) {
  AssociationProblem ap;
  ap.num_bs = m;
  ap.num_mus = n;
  ap.costs = std::move(costs);
  return ap;
}

TEST(AssociationLp, SingleBsForcesFullAssociation) {
  auto ap = make_problem(1, 3, {2.0, 5.0, 1.0});
  auto r = solve_association(ap);
  for (int n = 0; n < 3; ++n) EXPECT_EQ(r.v[ap.pair(0, n)], 1);
  EXPECT_NEAR(r.objective, 5.0, 1e-9);  // eta = max_n cost
}

TEST(AssociationLp, EqualCostsYieldOneAssociationPerMu) {
  auto ap = make_problem(3, 4, std::vector<double>(12, 2.5));
  auto r = solve_association(ap);
  EXPECT_NEAR(r.objective, 2.5, 1e-9);
  for (int n = 0; n < 4; ++n) {
    int served = 0;
    for (int m = 0; m < 3; ++m) served += r.v[ap.pair(m, n)];
    EXPECT_GE(served, 1);
  }
}

TEST(AssociationLp, DiagonalCostsPickIdentityPairing) {
  auto ap = make_problem(2, 2, {1.0, 9.0, 9.0, 1.0});
  auto r = solve_association(ap);
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
  EXPECT_EQ(r.v[ap.pair(0, 0)], 1);
  EXPECT_EQ(r.v[ap.pair(1, 1)], 1);
  EXPECT_EQ(r.v[ap.pair(0, 1)], 0);
  EXPECT_EQ(r.v[ap.pair(1, 0)], 0);
  // matches full enumeration over the 9 nonempty patterns per MU
  auto ref = oracle::enumerate_associations(ap.costs, 2, 2);
  EXPECT_NEAR(r.objective, ref.objective, 1e-12);
}

TEST(AssociationLp, RelaxationAlreadyIntegralPassesThrough) {
  auto ap = make_problem(2, 2, {1.0, 2.0, 3.0, 4.0});
  LpProblem lp = build_association_lp(ap);
  auto relaxed = simplex_solve(lp);
  ASSERT_EQ(relaxed.status, LpStatus::Optimal);
  for (std::size_t j = 0; j + 1 < lp.num_vars(); ++j) {
    double f = relaxed.x[j] - std::floor(relaxed.x[j]);
    EXPECT_TRUE(f < 1e-6 || f > 1 - 1e-6);
  }
  auto r = solve_association(ap);
  EXPECT_NEAR(r.objective, relaxed.objective, 1e-9);
}

TEST(BranchAndBound, MatchesEnumerationOnRandomAssociations) {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 2, n = 2;
    std::vector<double> costs(static_cast<std::size_t>(m) * n);
    for (auto& c : costs) c = rng.uniform(0.1, 10.0);
    auto ap = make_problem(m, n, costs);
    auto mine = solve_association(ap);
    auto ref = oracle::enumerate_associations(costs, m, n);
    ASSERT_NEAR(mine.objective, ref.objective, 1e-9) << "trial " << trial;
    for (int nn = 0; nn < n; ++nn) {
      int served = 0;
      for (int mm = 0; mm < m; ++mm) served += mine.v[ap.pair(mm, nn)];
      ASSERT_GE(served, 1);
      ASSERT_LE(served, m);
    }
  }
}

TEST(BranchAndBound, TiedCostsMatchEnumerationObjective) {
  auto ap = make_problem(3, 3, std::vector<double>(9, 1.0));
  auto mine = solve_association(ap);
  auto ref = oracle::enumerate_associations(ap.costs, 3, 3);
  EXPECT_NEAR(mine.objective, ref.objective, 1e-12);
}

// Relaxation optimum is a lower bound for the integer optimum.
TEST(BranchAndBound, RelaxationBoundsIntegerOptimum) {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    auto ap = make_problem(3, 3, {});
    ap.costs.resize(9);
    for (auto& c : ap.costs) c = rng.uniform(0.1, 5.0);
    auto lp = build_association_lp(ap);
    auto relaxed = simplex_solve(lp);
    auto integer = solve_association(ap);
    ASSERT_EQ(relaxed.status, LpStatus::Optimal);
    ASSERT_LE(relaxed.objective, integer.objective + 1e-9);
  }
}

// A knapsack-style MILP with a genuinely fractional relaxation: exercises
// actual branching, compared against exhaustive 0/1 enumeration.
TEST(BranchAndBound, FractionalRelaxationsAreBranchedCorrectly) {
  Rng rng(606);
  for (int trial = 0; trial < 60; ++trial) {
    int n = rng.uniform_int(3, 8);
    LpProblem p;
    p.maximize = true;
    p.objective.resize(n);
    std::vector<double> weight(static_cast<std::size_t>(n));
    double wsum = 0;
    for (int j = 0; j < n; ++j) {
      p.objective[static_cast<std::size_t>(j)] = std::round(rng.uniform(1, 20));
      weight[static_cast<std::size_t>(j)] = std::round(rng.uniform(1, 10));
      wsum += weight[static_cast<std::size_t>(j)];
    }
    p.rows = {weight};
    p.rhs = {std::floor(wsum / 2)};
    p.senses = {RowSense::LessEqual};
    p.lower.assign(n, 0.0);
    p.upper.assign(n, 1.0);
    std::vector<std::size_t> int_vars(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) int_vars[static_cast<std::size_t>(j)] = j;

    auto mine = branch_and_bound(p, int_vars);
    ASSERT_EQ(mine.status, LpStatus::Optimal);

    double best = -1.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      double w = 0, val = 0;
      for (int j = 0; j < n; ++j)
        if ((mask >> j) & 1) {
          w += weight[static_cast<std::size_t>(j)];
          val += p.objective[static_cast<std::size_t>(j)];
        }
      if (w <= p.rhs[0] && val > best) best = val;
    }
    ASSERT_NEAR(mine.objective, best, 1e-9) << "trial " << trial;
  }
}

TEST(FrameAccuracy, PosteriorMean) {
  std::vector<double> constant(10, 0.9);
  EXPECT_DOUBLE_EQ(frame_accuracy_posterior(constant, 10), 0.9);
  std::vector<double> two{0.8, 1.0};
  EXPECT_DOUBLE_EQ(frame_accuracy_posterior(two, 2), 0.9);
  std::vector<double> ramp(10);
  for (int i = 0; i < 10; ++i) ramp[static_cast<std::size_t>(i)] = 0.80 + 0.01 * i;
  EXPECT_NEAR(frame_accuracy_posterior(ramp, 10), 0.845, 1e-12);
  EXPECT_THROW(frame_accuracy_posterior(two, 3), WrongSampleCount);
}

TEST(FrameAccuracy, PredictedAgainstClosedForm) {
  AccuracyModel m;
  m.decay_rate = 0.01;
  m.drift_gain = 0.0;
  // mean of c0 e^{-kt} over [0,100] = c0 (1 - e^{-1}) / 1
  EXPECT_NEAR(frame_accuracy_predicted(0.9, m, 0.0, 100.0),
              0.9 * (1.0 - std::exp(-1.0)), 1e-4);
  m.decay_rate = 0.0;
  EXPECT_NEAR(frame_accuracy_predicted(0.7, m, 0.0, 5.0), 0.7, 1e-12);
}

TEST(FrameAccuracy, NearLinearRegimeMatchesMidpoint) {
  AccuracyModel m;
  m.decay_rate = 1e-4;  // effectively linear over the window
  double pred = frame_accuracy_predicted(0.9, m, 0.0, 1.0);
  EXPECT_NEAR(pred, accuracy_curve(0.9, m, 0.0, 0.5), 1e-6);
}

TEST(RetrainDecision, ThresholdRule) {
  EXPECT_TRUE(retrain_decision(0.80, 0.85));
  EXPECT_FALSE(retrain_decision(0.95, 0.85));
  EXPECT_FALSE(retrain_decision(0.85, 0.85));  // boundary: no retrain
}

TEST(RetrainDecision, MonotoneInPrediction) {
  bool prev = retrain_decision(0.99, 0.85);
  for (double c = 0.99; c >= 0.0; c -= 0.01) {
    bool now = retrain_decision(c, 0.85);
    // lowering prediction can only turn retraining on, never off
    EXPECT_TRUE(!prev || now);
    prev = now;
  }
}

TEST(PairCosts, EwmaArithmetic) {
  PairCostEstimator est(1, 1, 3.0);
  est.observe(0, 0, 2.0);
  est.observe(0, 0, 2.0);
  EXPECT_DOUBLE_EQ(est.history(0, 0), 2.0);  // constant history is fixed point
  est.observe(0, 0, 8.0);
  double keep = std::pow(2.0, -1.0 / 3.0);
  double expected = keep * 2.0 + (1.0 - keep) * 8.0;
  EXPECT_NEAR(est.history(0, 0), expected, 1e-12);
  EXPECT_GT(est.history(0, 0), 2.0);
  EXPECT_LT(est.history(0, 0), 8.0);
}

TEST(PairCosts, FallbackRankingFollowsDistance) {
  ScenarioConfig raw;
  auto cfg = validate_config(raw).config;
  NetworkState st = make_network_state(cfg);
  st.active_mus = 1;
  st.bs_positions = {{0, 0}, {300, 0}, {800, 0}};
  st.mu_positions[0] = {100, 0};
  PairCostEstimator est(3, st.max_mus);
  auto costs = est.cost_matrix(st, cfg);
  auto at = [&](int m) { return costs[static_cast<std::size_t>(m) * st.max_mus]; };
  // distances 100 < 200 < 700: costs must rank the same way
  EXPECT_LT(at(0), at(1));
  EXPECT_LT(at(1), at(2));
}

}  // namespace

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "twinflow/accuracy.hpp"
#include "twinflow/config.hpp"
#include "twinflow/distribution.hpp"
#include "twinflow/oracle.hpp"
#include "twinflow/rng.hpp"

using namespace twinflow;

namespace {

ClassDistribution dist(std::initializer_list<double> v) {
  return ClassDistribution(std::vector<double>(v));
}

TEST(Kl, IdenticalIsZero) {
  auto p = dist({0.3, 0.2, 0.5});
  EXPECT_DOUBLE_EQ(kl_divergence(p, p), 0.0);
}

TEST(Kl, PointMassAgainstUniform) {
  EXPECT_NEAR(kl_divergence(dist({1.0, 0.0}), dist({0.5, 0.5})), std::log(2.0),
              1e-12);
}

TEST(Kl, SupportViolationIsInfinite) {
  EXPECT_TRUE(std::isinf(kl_divergence(dist({0.5, 0.5}), dist({1.0, 0.0}))));
}

TEST(Kl, NonnegativeAndZeroOnlyAtEquality) {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(4), b(4);
    double sa = 0, sb = 0;
    for (int k = 0; k < 4; ++k) {
      a[k] = rng.u01_open();
      b[k] = rng.u01_open();
      sa += a[k];
      sb += b[k];
    }
    for (int k = 0; k < 4; ++k) {
      a[k] /= sa;
      b[k] /= sb;
    }
    double kl = kl_divergence(ClassDistribution(a), ClassDistribution(b));
    ASSERT_GE(kl, 0.0);
  }
}

TEST(Kl, DimensionMismatchThrows) {
  EXPECT_THROW(kl_divergence(dist({0.5, 0.5}), dist({1.0})), DimensionMismatch);
}

TEST(OptimalGeneration, MemberOfSetIsItself) {
  std::vector<ClassDistribution> cands = {dist({0.9, 0.1}), dist({0.6, 0.4})};
  auto q = dist({0.6, 0.4});
  EXPECT_EQ(optimal_generation_index(q, cands), 1u);
}

TEST(OptimalGeneration, BruteForceCase) {
  std::vector<ClassDistribution> cands = {dist({0.9, 0.1}), dist({0.5, 0.5})};
  auto q = dist({0.6, 0.4});
  // KL(p0||q) = .9 ln(.9/.6)+.1 ln(.1/.4) > KL(p1||q)
  EXPECT_EQ(optimal_generation_index(q, cands), 1u);
}

TEST(OptimalGeneration, SingletonAndEmpty) {
  std::vector<ClassDistribution> one = {dist({0.2, 0.8})};
  EXPECT_EQ(&optimal_generation_distribution(dist({0.5, 0.5}), one), &one[0]);
  std::vector<ClassDistribution> none;
  EXPECT_THROW(optimal_generation_index(dist({0.5, 0.5}), none),
               EmptyCandidateSet);
}

TEST(OptimalGeneration, MatchesBruteForceOracleIncludingTies) {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    int k = rng.uniform_int(2, 5);
    int count = rng.uniform_int(1, 50);
    std::vector<ClassDistribution> cands;
    for (int i = 0; i < count; ++i) {
      std::vector<double> v(static_cast<std::size_t>(k));
      double s = 0;
      for (auto& x : v) {
        x = rng.u01_open();
        s += x;
      }
      for (auto& x : v) x /= s;
      cands.emplace_back(std::move(v));
    }
    // Inject exact duplicates to force ties.
    if (count >= 2 && trial % 3 == 0) cands[cands.size() - 1] = cands[0];
    std::vector<double> qv(static_cast<std::size_t>(k));
    double s = 0;
    for (auto& x : qv) {
      x = rng.u01_open();
      s += x;
    }
    for (auto& x : qv) x /= s;
    ClassDistribution q(qv);
    ASSERT_EQ(optimal_generation_index(q, cands),
              oracle::kl_argmin_brute_force(q, cands));
  }
}

TEST(ObserveDistribution, Cases) {
  std::vector<double> even{10.0, 10.0};
  auto q = observe_distribution(even);
  EXPECT_DOUBLE_EQ(q[0], 0.5);
  EXPECT_DOUBLE_EQ(q[1], 0.5);

  std::vector<double> skew{9.0, 1.0};
  auto q2 = observe_distribution(skew);
  EXPECT_NEAR(q2[0], 0.9, 1e-6);
  EXPECT_NEAR(q2[1], 0.1, 1e-6);

  std::vector<double> zero_first{0.0, 5.0};
  auto q3 = observe_distribution(zero_first);
  EXPECT_NEAR(q3[0], 2e-7, 1e-8);
  EXPECT_NEAR(q3[1], 1.0, 1e-6);

  std::vector<double> zeros{0.0, 0.0};
  EXPECT_THROW(observe_distribution(zeros), AllZeroCounts);
}

TEST(DtDataSize, Cases) {
  auto uniform2 = dist({0.5, 0.5});
  std::vector<double> none{3.0, 4.0};
  EXPECT_DOUBLE_EQ(dt_data_size(0.0, uniform2, none).size_bits, 0.0);

  // ||(3,4)||_2 = 5, delta 0.5 -> 2.5, split evenly
  auto g = dt_data_size(0.5, uniform2, none);
  EXPECT_DOUBLE_EQ(g.size_bits, 2.5);
  EXPECT_DOUBLE_EQ(g.size_bits * g.dist[0], 1.25);
  EXPECT_DOUBLE_EQ(g.size_bits * g.dist[1], 1.25);

  std::vector<double> single{10.0};
  auto g2 = dt_data_size(1.0, dist({1.0}), single);
  EXPECT_DOUBLE_EQ(g2.size_bits, 10.0);
}

TEST(DtDataSize, HomogeneousDegreeOne) {
  Rng rng(17);
  auto p = dist({0.25, 0.25, 0.5});
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v{rng.uniform(0, 9), rng.uniform(0, 9), rng.uniform(0, 9)};
    double delta = rng.uniform(0, 3);
    double k = rng.uniform(0.1, 10.0);
    std::vector<double> kv{k * v[0], k * v[1], k * v[2]};
    EXPECT_NEAR(dt_data_size(k * delta, p, v).size_bits,
                k * dt_data_size(delta, p, v).size_bits, 1e-9);
    EXPECT_NEAR(dt_data_size(delta, p, kv).size_bits,
                k * dt_data_size(delta, p, v).size_bits, 1e-6);
  }
}

TEST(AccuracyCurve, Cases) {
  AccuracyModel m;
  EXPECT_DOUBLE_EQ(accuracy_curve(0.9, m, 0.0, 0.0), 0.9);
  AccuracyModel frozen = m;
  frozen.decay_rate = 0.0;
  EXPECT_DOUBLE_EQ(accuracy_curve(0.9, frozen, 0.0, 1e6), 0.9);
  AccuracyModel slow = m;
  slow.decay_rate = 0.01;
  EXPECT_NEAR(accuracy_curve(0.9, slow, 0.0, 100.0), 0.9 * std::exp(-1.0),
              1e-12);
}

TEST(AccuracyCurve, MonotoneInTimeAndDrift) {
  AccuracyModel m;
  double prev = 1.0;
  for (double t = 0.0; t < 50.0; t += 0.5) {
    double a = accuracy_curve(0.95, m, 0.1, t);
    ASSERT_LE(a, prev + 1e-15);
    prev = a;
  }
  for (double drift = 0.0; drift < 2.0; drift += 0.1) {
    EXPECT_LE(accuracy_curve(0.95, m, drift + 0.1, 1.0),
              accuracy_curve(0.95, m, drift, 1.0) + 1e-15);
  }
}

TEST(ApplyRetrain, Cases) {
  AccuracyModel m;
  m.data_gain = 0.05;
  m.ref_size_bits = 1e8;
  EXPECT_DOUBLE_EQ(apply_retrain(0.8, 0.0, 0.0, m), 0.8);
  // real+gen = S_ref*(e-1): ln(e) = 1 -> jump = beta
  double bits = 1e8 * (std::exp(1.0) - 1.0);
  EXPECT_NEAR(apply_retrain(0.8, bits, 0.0, m), 0.85, 1e-12);
  EXPECT_DOUBLE_EQ(apply_retrain(0.8, 1e18, 0.0, m), m.c_max);
}

TEST(ApplyRetrain, MonotoneInData) {
  AccuracyModel m;
  double prev = 0.0;
  for (double bits = 0.0; bits < 1e9; bits += 1e7) {
    double a = apply_retrain(0.5, bits, bits * 0.5, m);
    ASSERT_GE(a, prev);
    prev = a;
  }
}

TEST(SimplexGrid, SmallCase) {
  auto grid = simplex_grid(2, 0.5);
  // (0,1), (0.5,0.5), (1,0)
  ASSERT_EQ(grid.size(), 3u);
  for (const auto& p : grid) {
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
}

}  // namespace

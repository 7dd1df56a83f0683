#include <gtest/gtest.h>

#include "twinflow/config.hpp"

using namespace twinflow;

namespace {

bool has_violation(const ValidatedConfig& v, ConfigViolationCode code) {
  for (const auto& viol : v.violations)
    if (viol.code == code) return true;
  return false;
}

TEST(Config, DefaultsAreAccepted) {
  ScenarioConfig cfg;
  auto v = validate_config(cfg);
  EXPECT_TRUE(v.ok()) << (v.violations.empty() ? "" : v.violations[0].message);
  // Table-style defaults survive untouched.
  EXPECT_EQ(v.config.num_bs, 3);
  EXPECT_EQ(v.config.mu_count_range.lo, 5);
  EXPECT_EQ(v.config.mu_count_range.hi, 10);
  EXPECT_DOUBLE_EQ(v.config.slot_duration_s, 0.005);
  EXPECT_EQ(v.config.slots_per_frame, 10);
  EXPECT_DOUBLE_EQ(v.config.accuracy_threshold, 0.85);
  EXPECT_DOUBLE_EQ(v.config.bs_compute_flops, 50e9);
  EXPECT_DOUBLE_EQ(v.config.task_size_bits.lo, 8e7);
  EXPECT_DOUBLE_EQ(v.config.task_size_bits.hi, 1.6e8);
  EXPECT_NEAR(v.config.tx_power_w, 1e-4, 1e-12);
  EXPECT_NEAR(v.config.noise_power_w, 1e-13, 1e-21);
}

TEST(Config, ThresholdOutOfRange) {
  ScenarioConfig cfg;
  cfg.accuracy_threshold = 1.5;
  auto v = validate_config(cfg);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(has_violation(v, ConfigViolationCode::ThresholdOutOfRange));
}

TEST(Config, NonNormalizedCandidatesAreFilteredToEmpty) {
  ScenarioConfig cfg;
  cfg.num_classes = 2;
  cfg.candidate_dists = {{0.5, 0.6}};  // sums to 1.1
  auto v = validate_config(cfg);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(has_violation(v, ConfigViolationCode::EmptyDistributionSet));
}

TEST(Config, ValidCandidateSurvivesFiltering) {
  ScenarioConfig cfg;
  cfg.num_classes = 2;
  cfg.candidate_dists = {{0.5, 0.6}, {0.25, 0.75}};
  auto v = validate_config(cfg);
  EXPECT_TRUE(v.ok());
  ASSERT_EQ(v.config.candidate_dists.size(), 1u);
  EXPECT_DOUBLE_EQ(v.config.candidate_dists[0][1], 0.75);
}

TEST(Config, NegativeParameterDetected) {
  ScenarioConfig cfg;
  cfg.bandwidth_hz = -1.0;
  auto v = validate_config(cfg);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(has_violation(v, ConfigViolationCode::NegativeParameter));
}

TEST(Config, MuCountRangeBounds) {
  ScenarioConfig cfg;
  cfg.mu_count_range = {0, 80};
  auto v = validate_config(cfg);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(has_violation(v, ConfigViolationCode::RangeInvalid));
}

TEST(Config, DefaultCandidateGrid) {
  ScenarioConfig cfg;
  auto v = validate_config(cfg);
  ASSERT_TRUE(v.ok());
  // K=4, step 0.1: compositions of 10 into 4 parts = C(13,3) = 286
  EXPECT_EQ(v.config.candidate_dists.size(), 286u);
  for (const auto& p : v.config.candidate_dists) {
    double sum = 0.0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Config, UnitHelpers) {
  EXPECT_DOUBLE_EQ(mb_to_bits(10.0), 8e7);
  EXPECT_DOUBLE_EQ(bits_to_mb(mb_to_bits(12.5)), 12.5);
  EXPECT_NEAR(dbm_to_watts(-10.0), 1e-4, 1e-12);
  EXPECT_NEAR(dbm_to_watts(-100.0), 1e-13, 1e-21);
}

}  // namespace

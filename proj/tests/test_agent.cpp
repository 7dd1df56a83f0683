#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "twinflow/agent.hpp"
#include "twinflow/config.hpp"

using namespace twinflow;

namespace {

TEST(ActionCatalog, OrderAndSize) {
  EXPECT_EQ(ActionCatalog::size(), 25);
  EXPECT_DOUBLE_EQ(ActionCatalog::phi(0), 0.0);
  EXPECT_DOUBLE_EQ(ActionCatalog::psi(0), 0.1);  // lowest index: null offload
  EXPECT_DOUBLE_EQ(ActionCatalog::phi(24), 1.0);
  EXPECT_DOUBLE_EQ(ActionCatalog::psi(24), 1.0);
}

TEST(DecodeAction, NullAction) {
  auto a = decode_action(0, 8e6, 50e9, 50e9);
  EXPECT_DOUBLE_EQ(a.offload_bits, 0.0);
  EXPECT_DOUBLE_EQ(a.compute_flops, 0.1 * 50e9);
}

TEST(DecodeAction, FullOffload) {
  int idx = 4 * 5 + 4;  // phi = 1.0, psi = 1.0
  auto a = decode_action(idx, 8e6, 50e9, 50e9);
  EXPECT_DOUBLE_EQ(a.offload_bits, 8e6);
  EXPECT_DOUBLE_EQ(a.compute_flops, 50e9);
}

TEST(DecodeAction, BudgetClipping) {
  int idx = 4 * 5 + 3;  // phi = 1.0, psi = 0.75
  auto a = decode_action(idx, 1e6, 50e9, 20e9);
  EXPECT_DOUBLE_EQ(a.compute_flops, 20e9);  // min(37.5e9, 20e9)
}

TEST(DecodeAction, ExhaustedBudgetMeansNoService) {
  int idx = 4 * 5 + 4;
  auto a = decode_action(idx, 1e6, 50e9, 0.0);
  EXPECT_DOUBLE_EQ(a.compute_flops, 0.0);
  EXPECT_DOUBLE_EQ(a.offload_bits, 0.0);  // bits stay queued
}

TEST(DecodeAction, OutOfRangeThrows) {
  EXPECT_THROW(decode_action(25, 1.0, 1.0, 1.0), IndexOutOfRange);
  EXPECT_THROW(decode_action(-1, 1.0, 1.0, 1.0), IndexOutOfRange);
}

TEST(DecodeAction, NeverExceedsRemainingBudget) {
  Rng rng(10);
  for (int t = 0; t < 2000; ++t) {
    double total = rng.uniform(1e9, 50e9);
    double remaining = rng.uniform(0.0, total);
    auto a = decode_action(rng.uniform_int(0, 24), rng.uniform(0, 1e8), total,
                           remaining);
    ASSERT_LE(a.compute_flops, remaining + 1e-9);
  }
}

TEST(SlotReward, PerfectConservation) {
  std::vector<double> task{1e6, 2e6};
  std::vector<double> local{2e5, 4e5};
  std::vector<double> offload{8e5, 16e5};
  EXPECT_DOUBLE_EQ(slot_reward(2.0, task, local, offload, 1e-6), -2.0);
}

TEST(SlotReward, UnallocatedMegabytePenalty) {
  // 1 MB = 8e6 bits unallocated at 1e-6 per bit -> penalty 8
  std::vector<double> task{mb_to_bits(10.0)};
  std::vector<double> local{mb_to_bits(2.0)};
  std::vector<double> offload{mb_to_bits(7.0)};
  EXPECT_NEAR(slot_reward(1.5, task, local, offload, 1e-6), -1.5 - 8.0, 1e-9);
}

TEST(SlotReward, AllZeroDecisionsPenalized) {
  std::vector<double> task{mb_to_bits(15.0)};
  std::vector<double> local{mb_to_bits(3.0)};
  std::vector<double> offload{0.0};
  double r = slot_reward(0.5, task, local, offload, 1e-6);
  EXPECT_LT(r, -90.0);  // 12 MB * 1e-6/bit = 96
}

TEST(SlotReward, MaximizedExactlyAtConservation) {
  std::vector<double> task{1e6};
  std::vector<double> local{2e5};
  for (double off = 0.0; off <= 1.6e6; off += 1e5) {
    std::vector<double> offload{off};
    double r = slot_reward(1.0, task, local, offload, 1e-6);
    if (std::fabs(off - 8e5) < 1e-9)
      EXPECT_DOUBLE_EQ(r, -1.0);
    else
      EXPECT_LT(r, -1.0);
  }
}

TEST(StateEncoder, PaddingAndNormalization) {
  ScenarioConfig raw;
  raw.num_bs = 2;
  raw.mu_count_range = {1, 3};
  raw.num_classes = 2;
  auto cfg = validate_config(raw).config;
  StateEncoder enc(cfg);
  EXPECT_EQ(enc.dim(), 2 * 3 + 2 * 3 + 2 * 3 * 2 + 2 * 2 + 2 * 3);

  std::vector<double> remaining{cfg.bs_compute_flops, cfg.bs_compute_flops};
  std::vector<double> pending(3, 0.0);
  pending[0] = 0.75 * cfg.task_size_bits.hi;
  std::vector<double> generation(2 * 3 * 2, 0.5);
  std::vector<int> load{2, 1};
  std::vector<int> left{1, 1};
  auto s = enc.encode(remaining, pending, generation, load, left, 1, 2);

  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(s[static_cast<std::size_t>(i)], 1.0);
  EXPECT_DOUBLE_EQ(s[6], 0.75);       // scaled pending
  EXPECT_DOUBLE_EQ(s[7], 0.0);        // padded inactive MU
  EXPECT_DOUBLE_EQ(s[9], 0.75 / 4);   // wide-range backlog block
  // one-hot block is the tail
  std::size_t hot = s.size() - 6 + 1 * 3 + 2;
  EXPECT_DOUBLE_EQ(s[hot], 1.0);
  double hot_sum = 0.0;
  for (std::size_t i = s.size() - 6; i < s.size(); ++i) hot_sum += s[i];
  EXPECT_DOUBLE_EQ(hot_sum, 1.0);
  // load blocks sit right before the one-hot tail
  EXPECT_DOUBLE_EQ(s[s.size() - 6 - 4], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s[s.size() - 6 - 2], 1.0 / 3.0);
  for (double v : s) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(StateEncoder, EmptyNetworkIsZeroMuBlock) {
  ScenarioConfig raw;
  raw.num_bs = 1;
  raw.mu_count_range = {1, 2};
  raw.num_classes = 2;
  auto cfg = validate_config(raw).config;
  StateEncoder enc(cfg);
  std::vector<double> remaining{cfg.bs_compute_flops};
  std::vector<double> pending(2, 0.0);
  std::vector<double> generation(4, 0.0);
  std::vector<int> load{0};
  std::vector<int> left{0};
  auto s = enc.encode(remaining, pending, generation, load, left, -1, -1);
  EXPECT_DOUBLE_EQ(s[1], 0.0);
  EXPECT_DOUBLE_EQ(s[2], 0.0);
  for (std::size_t i = s.size() - 2; i < s.size(); ++i)
    EXPECT_DOUBLE_EQ(s[i], 0.0);  // no current pair
}

TEST(DqnAgent, EpsilonSchedule) {
  AgentConfig acfg;
  acfg.hidden_units = 4;
  DqnAgent agent(3, acfg, Rng(1));
  agent.set_episode(0, 500);
  EXPECT_NEAR(agent.epsilon(), 1.0, 1e-12);
  agent.set_episode(400, 500);  // 80% point: fully annealed
  EXPECT_NEAR(agent.epsilon(), 0.05, 1e-12);
  agent.set_episode(500, 500);
  EXPECT_NEAR(agent.epsilon(), 0.05, 1e-12);
  agent.set_episode(200, 500);
  EXPECT_GT(agent.epsilon(), 0.05);
  EXPECT_LT(agent.epsilon(), 1.0);
}

}  // namespace

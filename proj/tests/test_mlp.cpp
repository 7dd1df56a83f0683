#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "twinflow/agent.hpp"
#include "twinflow/mlp.hpp"
#include "twinflow/oracle.hpp"
#include "twinflow/replay.hpp"

using namespace twinflow;

namespace {

std::vector<Experience> random_batch(const QNetwork& net, int count, Rng& rng) {
  std::vector<Experience> batch(static_cast<std::size_t>(count));
  for (auto& e : batch) {
    e.state.resize(static_cast<std::size_t>(net.input_dim()));
    for (auto& x : e.state) x = rng.uniform(-1, 1);
    e.action = rng.uniform_int(0, net.num_actions() - 1);
  }
  return batch;
}

TEST(Mlp, ZeroWeightsGiveZeroOutput) {
  QNetwork net(3, 4, 2);
  std::vector<double> x{1.0, -2.0, 0.5};
  auto q = net.forward(x);
  for (double v : q) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Mlp, IdentityPassThrough) {
  QNetwork net(1, 1, 1);
  net.layer(0).w = {1.0};
  net.layer(1).w = {1.0};
  net.layer(2).w = {1.0};
  std::vector<double> x{2.0};
  EXPECT_DOUBLE_EQ(net.forward(x)[0], 2.0);
}

TEST(Mlp, DimensionMismatchThrows) {
  QNetwork net(3, 4, 2);
  std::vector<double> x{1.0};
  EXPECT_THROW(net.forward(x), DimensionMismatch);
}

TEST(Mlp, MatchesNaiveReimplementation) {
  Rng rng(44);
  for (int t = 0; t < 20; ++t) {
    QNetwork net(rng.uniform_int(2, 6), rng.uniform_int(3, 16),
                 rng.uniform_int(2, 5));
    Rng wrng(rng.next_u64());
    net.init_weights(wrng);
    std::vector<double> x(static_cast<std::size_t>(net.input_dim()));
    for (auto& v : x) v = rng.uniform(-2, 2);
    auto a = net.forward(x);
    auto b = oracle::naive_mlp_forward(net, x);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Mlp, ZeroLossGradientGivesZeroGradients) {
  QNetwork net(3, 5, 2);
  Rng rng(7);
  net.init_weights(rng);
  MlpCache cache;
  std::vector<double> x{0.3, -0.4, 0.9};
  net.forward_cached(x, cache);
  auto grads = net.zero_gradients();
  std::vector<double> dl{0.0, 0.0};
  net.backward(cache, dl, grads);
  for (std::size_t p = 0; p < net.parameter_count(); ++p)
    ASSERT_DOUBLE_EQ(QNetwork::gradient_at(grads, p), 0.0);
}

TEST(Mlp, GradientsScaleLinearlyWithLoss) {
  QNetwork net(3, 5, 2);
  Rng rng(8);
  net.init_weights(rng);
  MlpCache cache;
  std::vector<double> x{0.3, -0.4, 0.9};
  net.forward_cached(x, cache);
  auto g1 = net.zero_gradients();
  auto g3 = net.zero_gradients();
  std::vector<double> dl1{1.0, -0.5};
  std::vector<double> dl3{3.0, -1.5};
  net.backward(cache, dl1, g1);
  net.backward(cache, dl3, g3);
  for (std::size_t p = 0; p < net.parameter_count(); ++p)
    ASSERT_NEAR(QNetwork::gradient_at(g3, p),
                3.0 * QNetwork::gradient_at(g1, p), 1e-12);
}

TEST(Mlp, AnalyticGradientsMatchFiniteDifferences) {
  Rng rng(1234);
  for (int t = 0; t < 10; ++t) {
    auto f = oracle::draw_gradient_fixture(rng);
    auto res = oracle::finite_difference_check(f.net, f.batch, f.targets);
    ASSERT_LE(res.max_rel_err, 1e-4) << "net " << t << " param " << res.worst_index;
  }
}

TEST(TdUpdate, BanditFixedPoint) {
  Rng rng(5);
  QNetwork net(2, 8, 3);
  net.init_weights(rng);
  QNetwork target = net;
  SgdMomentum opt(0.05, 0.0);
  Experience e;
  e.state = {0.5, 0.5};
  e.action = 1;
  e.reward = -2.0;
  e.next_state = {0.5, 0.5};
  e.terminal = true;
  std::vector<const Experience*> batch{&e};
  for (int i = 0; i < 1000; ++i) td_update(net, target, batch, 0.0, opt);
  EXPECT_NEAR(net.forward(e.state)[1], -2.0, 1e-3);
}

TEST(TdUpdate, ZeroStepSizeLeavesNetUnchanged) {
  Rng rng(6);
  QNetwork net(2, 4, 2);
  net.init_weights(rng);
  QNetwork before = net;
  QNetwork target = net;
  SgdMomentum opt(0.0, 0.9);
  Experience e;
  e.state = {1.0, 0.0};
  e.action = 0;
  e.reward = 3.0;
  e.next_state = {0.0, 1.0};
  std::vector<const Experience*> batch{&e};
  td_update(net, target, batch, 0.95, opt);
  for (std::size_t p = 0; p < net.parameter_count(); ++p)
    ASSERT_DOUBLE_EQ(net.get_parameter(p), before.get_parameter(p));
}

TEST(TdUpdate, LossIsNonnegative) {
  Rng rng(9);
  QNetwork net(3, 6, 4);
  net.init_weights(rng);
  QNetwork target = net;
  SgdMomentum opt(1e-3, 0.9);
  auto raw = random_batch(net, 16, rng);
  for (auto& e : raw) {
    e.reward = rng.uniform(-3, 3);
    e.next_state = e.state;
  }
  std::vector<const Experience*> batch;
  for (auto& e : raw) batch.push_back(&e);
  for (int i = 0; i < 10; ++i)
    ASSERT_GE(td_update(net, target, batch, 0.9, opt), 0.0);
}

TEST(Replay, RingEviction) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 4; ++i) {
    Experience e;
    e.reward = i;
    buf.push(std::move(e));
  }
  EXPECT_EQ(buf.size(), 3u);
  // oldest (reward 0) evicted
  bool saw_zero = false;
  for (std::size_t i = 0; i < buf.size(); ++i)
    if (buf.at(i).reward == 0.0) saw_zero = true;
  EXPECT_FALSE(saw_zero);
}

TEST(Replay, SingletonSampling) {
  ReplayBuffer buf(4);
  Experience e;
  e.reward = 7.5;
  buf.push(std::move(e));
  Rng rng(3);
  auto batch = buf.sample(5, rng);
  for (const auto* x : batch) EXPECT_DOUBLE_EQ(x->reward, 7.5);
}

TEST(Replay, EmptySampleThrows) {
  ReplayBuffer buf(4);
  Rng rng(3);
  EXPECT_THROW(buf.sample(1, rng), EmptyBuffer);
}

TEST(Replay, SamplingIsUniform) {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) {
    Experience e;
    e.action = i;
    buf.push(std::move(e));
  }
  Rng rng(2718);
  std::vector<long> counts(10, 0);
  for (int i = 0; i < 100000; ++i) {
    auto batch = buf.sample(1, rng);
    counts[static_cast<std::size_t>(batch[0]->action)]++;
  }
  EXPECT_LT(oracle::chi_square_uniform(counts), oracle::chi_square_crit_p01(9));
}

TEST(SelectAction, GreedyAndTies) {
  Rng rng(1);
  std::vector<double> q{0.1, 0.9, 0.9, 0.2};
  EXPECT_EQ(select_action(q, 0.0, rng), 1);  // lowest index among ties
  std::vector<double> flat{0.5, 0.5, 0.5};
  EXPECT_EQ(select_action(flat, 0.0, rng), 0);
}

TEST(SelectAction, FullyRandomIsUniform) {
  Rng rng(31415);
  std::vector<double> q(25, 0.0);
  q[3] = 100.0;  // argmax must not matter at eps = 1
  std::vector<long> counts(25, 0);
  for (int i = 0; i < 100000; ++i)
    counts[static_cast<std::size_t>(select_action(q, 1.0, rng))]++;
  EXPECT_LT(oracle::chi_square_uniform(counts), oracle::chi_square_crit_p01(24));
}

TEST(SelectAction, GreedyIsPureFunctionOfValues) {
  Rng r1(1), r2(999);
  std::vector<double> q{0.3, -0.2, 0.7, 0.7, 0.1};
  EXPECT_EQ(select_action(q, 0.0, r1), select_action(q, 0.0, r2));
}

}  // namespace

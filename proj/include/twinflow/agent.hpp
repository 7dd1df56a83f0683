#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "twinflow/config.hpp"
#include "twinflow/delay.hpp"
#include "twinflow/mlp.hpp"
#include "twinflow/replay.hpp"
#include "twinflow/state.hpp"

namespace twinflow {

// Discrete joint catalog: offload fraction x compute share, phi-major so the
// lowest index is (phi=0, psi=0.1).
struct ActionCatalog {
  static constexpr std::array<double, 5> kPhi{0.0, 0.25, 0.5, 0.75, 1.0};
  static constexpr std::array<double, 5> kPsi{0.1, 0.25, 0.5, 0.75, 1.0};
  static constexpr int size() {
    return static_cast<int>(kPhi.size() * kPsi.size());
  }
  static double phi(int index) {
    return kPhi[static_cast<std::size_t>(index) / kPsi.size()];
  }
  static double psi(int index) {
    return kPsi[static_cast<std::size_t>(index) % kPsi.size()];
  }
};

struct PairAllocation {
  double offload_bits = 0.0;
  double compute_flops = 0.0;
};

// Decode one catalog entry for one (MU, BS) pair. Clipping keeps Eq.-(6)
// feasibility by construction; a pair that cannot get compute serves nothing
// and the bits stay queued.
inline PairAllocation decode_action(int index, double pending_offload_bits,
                                    double bs_total_flops,
                                    double bs_remaining_flops) {
  if (index < 0 || index >= ActionCatalog::size())
    throw IndexOutOfRange("action index outside the catalog");
  PairAllocation a;
  a.compute_flops =
      std::min(ActionCatalog::psi(index) * bs_total_flops, bs_remaining_flops);
  if (a.compute_flops <= 0.0) {
    a.compute_flops = 0.0;
    return a;  // no compute, nothing offloaded
  }
  a.offload_bits = ActionCatalog::phi(index) * pending_offload_bits;
  return a;
}

// Slot reward: negative mean effective delay minus the absolute
// conservation mismatch penalty.
inline double slot_reward(double mean_effective_delay_s,
                          std::span<const double> task_bits,
                          std::span<const double> local_bits,
                          std::span<const double> offload_total_bits,
                          double penalty_per_bit) {
  double penalty = 0.0;
  for (std::size_t n = 0; n < task_bits.size(); ++n)
    penalty += std::fabs(task_bits[n] - local_bits[n] - offload_total_bits[n]);
  return -mean_effective_delay_s - penalty_per_bit * penalty;
}

// Epsilon-greedy, lowest index on value ties.
inline int select_action(std::span<const double> q_values, double epsilon,
                         Rng& rng) {
  if (!q_values.empty() && epsilon > 0.0 && rng.u01() < epsilon)
    return static_cast<int>(rng.below(q_values.size()));
  int best = 0;
  for (std::size_t i = 1; i < q_values.size(); ++i)
    if (q_values[i] > q_values[static_cast<std::size_t>(best)])
      best = static_cast<int>(i);
  return best;
}

// Fixed-length state encoding, every feature in [0,1]:
//   [per-pair remaining BS budget] [per-MU pending bits]
//   [per-MU backlog saturation] [per-pair generation distribution]
//   [per-BS association load] [per-BS pairs-still-to-decide]
//   [one-hot current pair]
// The backlog block widens the pending range so multi-task queues do not
// alias with single-task queues; the load blocks carry the contention
// information a fair compute split depends on.
struct StateEncoder {
  int num_bs = 0;
  int max_mus = 0;
  int num_classes = 0;
  double budget_scale = 1.0;
  double pending_scale = 1.0;

  StateEncoder() = default;
  explicit StateEncoder(const ScenarioConfig& cfg)
      : num_bs(cfg.num_bs),
        max_mus(cfg.mu_count_range.hi),
        num_classes(cfg.num_classes),
        budget_scale(cfg.bs_compute_flops),
        pending_scale(cfg.task_size_bits.hi) {}

  int dim() const {
    int pairs = num_bs * max_mus;
    return pairs + 2 * max_mus + pairs * num_classes + 2 * num_bs + pairs;
  }

  // `remaining` is per BS; `pending` per MU; `generation` is M*N*K;
  // `assoc_load` and `pairs_left` are per BS (decisions still to come,
  // including the current one).
  std::vector<double> encode(std::span<const double> remaining,
                             std::span<const double> pending,
                             std::span<const double> generation,
                             std::span<const int> assoc_load,
                             std::span<const int> pairs_left,
                             int current_bs, int current_mu) const {
    const int pairs = num_bs * max_mus;
    std::vector<double> s(static_cast<std::size_t>(dim()), 0.0);
    std::size_t at = 0;
    for (int m = 0; m < num_bs; ++m)
      for (int n = 0; n < max_mus; ++n)
        s[at++] = clamp01(remaining[static_cast<std::size_t>(m)] / budget_scale);
    for (int n = 0; n < max_mus; ++n)
      s[at++] = clamp01(pending[static_cast<std::size_t>(n)] / pending_scale);
    for (int n = 0; n < max_mus; ++n)
      s[at++] = clamp01(pending[static_cast<std::size_t>(n)] / (4.0 * pending_scale));
    for (std::size_t i = 0; i < static_cast<std::size_t>(pairs) * num_classes; ++i)
      s[at++] = clamp01(generation[i]);
    for (int m = 0; m < num_bs; ++m)
      s[at++] = clamp01(static_cast<double>(assoc_load[static_cast<std::size_t>(m)]) / max_mus);
    for (int m = 0; m < num_bs; ++m)
      s[at++] = clamp01(static_cast<double>(pairs_left[static_cast<std::size_t>(m)]) / max_mus);
    if (current_bs >= 0 && current_mu >= 0)
      s[at + static_cast<std::size_t>(current_bs) * max_mus + current_mu] = 1.0;
    return s;
  }
};

// One TD step on a uniformly sampled batch: squared TD error against the
// target network, mean over the batch.
inline double td_update(QNetwork& net, const QNetwork& target,
                        std::span<const Experience* const> batch,
                        double discount, SgdMomentum& opt) {
  if (batch.empty()) throw EmptyBuffer("td_update on empty batch");
  MlpGradients grads = net.zero_gradients();
  MlpCache cache;
  std::vector<double> dloss(static_cast<std::size_t>(net.num_actions()), 0.0);
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const Experience* e : batch) {
    double y = e->reward;
    if (!e->terminal) {
      std::vector<double> qn = target.forward(e->next_state);
      y += discount * *std::max_element(qn.begin(), qn.end());
    }
    std::vector<double> q = net.forward_cached(e->state, cache);
    double diff = q[static_cast<std::size_t>(e->action)] - y;
    loss += diff * diff * inv;
    std::fill(dloss.begin(), dloss.end(), 0.0);
    dloss[static_cast<std::size_t>(e->action)] = 2.0 * diff * inv;
    net.backward(cache, dloss, grads);
  }
  opt.step(net, grads);
  return loss;
}

// DQN agent: value network, frozen target copy, replay, epsilon schedule.
class DqnAgent {
 public:
  DqnAgent() = default;
  DqnAgent(int input_dim, const AgentConfig& cfg, Rng rng)
      : cfg_(cfg),
        net_(input_dim, cfg.hidden_units, ActionCatalog::size()),
        buffer_(static_cast<std::size_t>(cfg.buffer_capacity)),
        opt_(cfg.learning_rate, cfg.momentum, cfg.max_grad_norm),
        rng_(rng),
        epsilon_(cfg.eps_start) {
    net_.init_weights(rng_);
    target_ = net_;
  }

  int act(std::span<const double> state) {
    std::vector<double> q = net_.forward(state);
    return select_action(q, epsilon_, rng_);
  }

  int greedy(std::span<const double> state) {
    std::vector<double> q = net_.forward(state);
    return select_action(q, 0.0, rng_);
  }

  void observe(Experience e) {
    buffer_.push(std::move(e));
    ++transitions_;
    if (transitions_ % cfg_.update_every == 0) update();
  }

  void update() {
    if (buffer_.size() == 0) return;
    auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
    last_loss_ = td_update(net_, target_, batch, cfg_.discount, opt_);
    ++updates_;
    if (updates_ % cfg_.target_sync_every == 0) target_ = net_;
  }

  // Linear anneal toward eps_end, reached at 80% of the horizon.
  void set_episode(int episode, int horizon_episodes) {
    double end_at = 0.8 * std::max(1, horizon_episodes);
    double t = std::min(1.0, static_cast<double>(episode) / end_at);
    epsilon_ = cfg_.eps_start + (cfg_.eps_end - cfg_.eps_start) * t;
  }

  void set_epsilon(double eps) { epsilon_ = eps; }
  double epsilon() const { return epsilon_; }
  double last_loss() const { return last_loss_; }
  long updates() const { return updates_; }
  void clear_replay() { buffer_.clear(); }
  QNetwork& network() { return net_; }
  const QNetwork& network() const { return net_; }
  ReplayBuffer& replay() { return buffer_; }

 private:
  AgentConfig cfg_;
  QNetwork net_;
  QNetwork target_;
  ReplayBuffer buffer_{10000};
  SgdMomentum opt_;
  Rng rng_;
  double epsilon_ = 1.0;
  double last_loss_ = 0.0;
  long transitions_ = 0;
  long updates_ = 0;
};

}  // namespace twinflow

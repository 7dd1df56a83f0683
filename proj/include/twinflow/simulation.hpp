#pragma once

#include <cmath>
#include <vector>

#include "twinflow/channel.hpp"
#include "twinflow/config.hpp"
#include "twinflow/delay.hpp"
#include "twinflow/mobility.hpp"
#include "twinflow/rng.hpp"
#include "twinflow/state.hpp"
#include "twinflow/twin.hpp"

namespace twinflow {

// Physical-world core shared by every scheme: positions, fading, arrivals,
// class-distribution dynamics. Slot 0 of each frame is a control slot
// (planning only); tasks arrive on the remaining slots. All randomness is
// drawn in a fixed order from dedicated streams so paired runs of different
// schemes see identical environments.
class Environment {
 public:
  Environment(const ScenarioConfig& cfg, std::uint64_t env_seed)
      : cfg_(cfg),
        state_(make_network_state(cfg)),
        twin_(cfg),
        mobility_(cfg.arena_size_m, cfg.speed_range_mps),
        rng_mobility_(Rng(env_seed).derive(1)),
        rng_fading_(Rng(env_seed).derive(2)),
        rng_tasks_(Rng(env_seed).derive(3)),
        rng_drift_(Rng(env_seed).derive(4)),
        rng_count_(Rng(env_seed).derive(5)) {
    place_base_stations();
    mobility_.init(state_.mu_positions, rng_mobility_);
    init_true_distributions();
  }

  const ScenarioConfig& config() const { return cfg_; }
  NetworkState& state() { return state_; }
  const NetworkState& state() const { return state_; }
  DigitalTwin& twin() { return twin_; }
  const DigitalTwin& twin() const { return twin_; }

  bool is_control_slot(long t) const {
    return t % cfg_.slots_per_frame == 0;
  }

  // Frame boundary: resample the active-user count and evolve the true class
  // distributions (ambient drift plus the optional hard shift).
  void begin_frame(long frame) {
    state_.frame = frame;
    state_.active_mus =
        rng_count_.uniform_int(cfg_.mu_count_range.lo, cfg_.mu_count_range.hi);
    const int K = cfg_.num_classes;
    for (int n = 0; n < state_.max_mus; ++n) {
      if (cfg_.drift_mix_per_frame > 0.0) {
        std::vector<double> target(static_cast<std::size_t>(K));
        double sum = 0.0;
        for (auto& x : target) {
          x = rng_drift_.exponential();
          sum += x;
        }
        for (int k = 0; k < K; ++k) {
          double& q = true_dist_[mu_class(n, k)];
          q = (1.0 - cfg_.drift_mix_per_frame) * q +
              cfg_.drift_mix_per_frame * target[static_cast<std::size_t>(k)] / sum;
        }
      }
      if (frame == cfg_.shift_frame) {
        // Concentrate most of the mass on one class per MU.
        for (int k = 0; k < K; ++k)
          true_dist_[mu_class(n, k)] = k == n % K
                                           ? 0.7 + 0.3 / K
                                           : 0.3 / K;
      }
    }
  }

  // Control slot: time passes, nothing is served.
  void advance_control_slot(long slot) {
    state_.slot = slot;
    mobility_.step(state_.mu_positions, cfg_.slot_duration_s, rng_mobility_);
    age_models();
  }

  // Task slot: move, fade, and enqueue one task per active MU.
  void advance_task_slot(long slot) {
    state_.slot = slot;
    mobility_.step(state_.mu_positions, cfg_.slot_duration_s, rng_mobility_);
    for (int m = 0; m < state_.num_bs; ++m)
      for (int n = 0; n < state_.max_mus; ++n) {
        double d = std::max(
            pair_distance(state_.bs_positions[static_cast<std::size_t>(m)],
                          state_.mu_positions[static_cast<std::size_t>(n)]),
            1.0);
        state_.channel_gain[state_.pair(m, n)] =
            channel_gain(d, cfg_.pathloss, rng_fading_);
      }
    for (int n = 0; n < state_.max_mus; ++n) {
      TaskSample t = sample_task(cfg_, rng_tasks_);
      if (!state_.mu_active(n)) {
        state_.task_bits[static_cast<std::size_t>(n)] = 0.0;
        state_.local_bits[static_cast<std::size_t>(n)] = 0.0;
        continue;
      }
      state_.task_bits[static_cast<std::size_t>(n)] = t.total_bits;
      state_.local_bits[static_cast<std::size_t>(n)] = t.local_bits;
      state_.queue_bits[static_cast<std::size_t>(n)] += t.total_bits - t.local_bits;
    }
    age_models();
  }

  double uplink_rate_for(int m, int n) const {
    double r = snr(cfg_.tx_power_w, state_.channel_gain[state_.pair(m, n)],
                   cfg_.noise_power_w);
    return uplink_rate(cfg_.bandwidth_hz, state_.associated(m, n), r);
  }

  ClassDistribution true_distribution(int n) const {
    ClassDistribution d;
    d.p.assign(
        true_dist_.begin() + static_cast<std::ptrdiff_t>(mu_class(n, 0)),
        true_dist_.begin() + static_cast<std::ptrdiff_t>(mu_class(n, 0) + cfg_.num_classes));
    return d;
  }

  // Per-class composition of `bits` of this MU's data.
  std::vector<double> split_by_class(int n, double bits) const {
    std::vector<double> v(static_cast<std::size_t>(cfg_.num_classes));
    for (int k = 0; k < cfg_.num_classes; ++k)
      v[static_cast<std::size_t>(k)] = bits * true_dist_[mu_class(n, k)];
    return v;
  }

  void refresh_accuracy(int n) {
    state_.drift_nats[static_cast<std::size_t>(n)] = twin_.drift(n);
    state_.accuracy[static_cast<std::size_t>(n)] = accuracy_curve(
        state_.accuracy_base[static_cast<std::size_t>(n)], cfg_.accuracy,
        state_.drift_nats[static_cast<std::size_t>(n)],
        state_.model_age_s[static_cast<std::size_t>(n)]);
  }

 private:
  void place_base_stations() {
    const int M = state_.num_bs;
    int cols = 1;
    while (cols * cols < M) ++cols;
    int rows = (M + cols - 1) / cols;
    for (int i = 0; i < M; ++i) {
      int r = i / cols, c = i % cols;
      state_.bs_positions[static_cast<std::size_t>(i)] = {
          (c + 0.5) * cfg_.arena_size_m / cols,
          (r + 0.5) * cfg_.arena_size_m / rows};
    }
  }

  void init_true_distributions() {
    const int K = cfg_.num_classes;
    true_dist_.assign(static_cast<std::size_t>(state_.max_mus) * K, 1.0 / K);
    for (int n = 0; n < state_.max_mus; ++n) {
      std::vector<double> jitter(static_cast<std::size_t>(K));
      double sum = 0.0;
      for (auto& x : jitter) {
        x = rng_drift_.exponential();
        sum += x;
      }
      for (int k = 0; k < K; ++k) {
        double& q = true_dist_[mu_class(n, k)];
        q = 0.85 * q + 0.15 * jitter[static_cast<std::size_t>(k)] / sum;
      }
      twin_.replace_trained(n, true_distribution(n));
    }
  }

  void age_models() {
    for (int n = 0; n < state_.max_mus; ++n) {
      if (!state_.mu_active(n)) continue;
      state_.model_age_s[static_cast<std::size_t>(n)] += cfg_.slot_duration_s;
      refresh_accuracy(n);
    }
  }

  std::size_t mu_class(int n, int k) const {
    return static_cast<std::size_t>(n) * cfg_.num_classes +
           static_cast<std::size_t>(k);
  }

  ScenarioConfig cfg_;
  NetworkState state_;
  DigitalTwin twin_;
  MobilityModel mobility_;
  std::vector<double> true_dist_;  // N*K ground truth
  Rng rng_mobility_, rng_fading_, rng_tasks_, rng_drift_, rng_count_;
};

}  // namespace twinflow

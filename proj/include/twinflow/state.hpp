#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "twinflow/config.hpp"

namespace twinflow {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline double pair_distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Ground truth shared by every module, one instance per simulation.
// Pair matrices are M x N_max, row-major over (bs, mu).
struct NetworkState {
  long slot = 0;
  long frame = 0;
  int num_bs = 0;
  int max_mus = 0;
  int active_mus = 0;

  std::vector<Vec2> bs_positions;       // M
  std::vector<Vec2> mu_positions;       // N_max

  std::vector<double> channel_gain;     // M*N, h_{m,n} this slot
  std::vector<std::uint8_t> association;   // M*N, v_{m,n}
  std::vector<std::uint8_t> retrain_flag;  // M*N, c_{m,n} (per-MU broadcast)

  std::vector<double> task_bits;        // N, Q_n arriving this slot
  std::vector<double> local_bits;       // N, Q^L_n this slot
  std::vector<double> queue_bits;       // N, offloadable backlog

  std::vector<double> accuracy;         // N, c_n
  std::vector<double> accuracy_base;    // N, accuracy at last retrain
  std::vector<double> model_age_s;      // N, T^dur
  std::vector<double> drift_nats;       // N, KL(observed || trained)

  std::vector<double> observed_dist;    // M*N*K, q_{m,n} smoothed observations
  std::vector<double> budget_used;      // M, FLOP/s allocated this slot

  std::size_t pair(int m, int n) const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(max_mus) +
           static_cast<std::size_t>(n);
  }
  std::size_t pair_class(int m, int n, int k, int num_classes) const {
    return pair(m, n) * static_cast<std::size_t>(num_classes) +
           static_cast<std::size_t>(k);
  }
  bool associated(int m, int n) const { return association[pair(m, n)] != 0; }
  bool mu_active(int n) const { return n < active_mus; }
};

inline NetworkState make_network_state(const ScenarioConfig& cfg) {
  NetworkState s;
  s.num_bs = cfg.num_bs;
  s.max_mus = cfg.mu_count_range.hi;
  s.active_mus = 0;
  const std::size_t mn = static_cast<std::size_t>(s.num_bs) * s.max_mus;
  s.bs_positions.resize(static_cast<std::size_t>(s.num_bs));
  s.mu_positions.resize(static_cast<std::size_t>(s.max_mus));
  s.channel_gain.assign(mn, 0.0);
  s.association.assign(mn, 0);
  s.retrain_flag.assign(mn, 0);
  s.task_bits.assign(static_cast<std::size_t>(s.max_mus), 0.0);
  s.local_bits.assign(static_cast<std::size_t>(s.max_mus), 0.0);
  s.queue_bits.assign(static_cast<std::size_t>(s.max_mus), 0.0);
  s.accuracy.assign(static_cast<std::size_t>(s.max_mus), cfg.initial_accuracy);
  s.accuracy_base.assign(static_cast<std::size_t>(s.max_mus),
                         cfg.initial_accuracy);
  s.model_age_s.assign(static_cast<std::size_t>(s.max_mus), 0.0);
  s.drift_nats.assign(static_cast<std::size_t>(s.max_mus), 0.0);
  s.observed_dist.assign(mn * static_cast<std::size_t>(cfg.num_classes),
                         1.0 / cfg.num_classes);
  s.budget_used.assign(static_cast<std::size_t>(s.num_bs), 0.0);
  return s;
}

}  // namespace twinflow

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "twinflow/accuracy.hpp"
#include "twinflow/config.hpp"
#include "twinflow/distribution.hpp"
#include "twinflow/state.hpp"

namespace twinflow {

// Per-run digital-twin bookkeeping: what each model was trained on, the
// latest per-pair generation choices, and the raw-data store used by the
// full-retraining baseline.
class DigitalTwin {
 public:
  DigitalTwin() = default;
  DigitalTwin(const ScenarioConfig& cfg)
      : num_bs_(cfg.num_bs),
        max_mus_(cfg.mu_count_range.hi),
        num_classes_(cfg.num_classes),
        ref_mass_bits_(cfg.accuracy.ref_size_bits) {
    candidates_.reserve(cfg.candidate_dists.size());
    for (const auto& p : cfg.candidate_dists)
      candidates_.emplace_back(ClassDistribution(p));
    const std::size_t nk = static_cast<std::size_t>(max_mus_) * num_classes_;
    trained_dist_.assign(nk, 1.0 / num_classes_);
    mu_observed_.assign(nk, 1.0 / num_classes_);
    pair_generation_.assign(
        static_cast<std::size_t>(num_bs_) * max_mus_ * num_classes_,
        1.0 / num_classes_);
    store_bits_.assign(static_cast<std::size_t>(max_mus_), 0.0);
    store_dist_.assign(nk, 1.0 / num_classes_);
  }

  std::span<const ClassDistribution> candidates() const { return candidates_; }
  std::span<const double> generation_features() const {
    return pair_generation_;
  }
  double store_bits(int n) const { return store_bits_[static_cast<std::size_t>(n)]; }

  ClassDistribution trained(int n) const {
    return slice(trained_dist_, static_cast<std::size_t>(n));
  }
  ClassDistribution observed(int n) const {
    return slice(mu_observed_, static_cast<std::size_t>(n));
  }

  // Record a pair upload: refresh the pair's stored distribution and the
  // MU-level aggregate used for drift.
  void observe_upload(NetworkState& state, int m, int n,
                      std::span<const double> per_class_bits) {
    ClassDistribution q = observe_distribution(per_class_bits);
    for (int k = 0; k < num_classes_; ++k)
      state.observed_dist[state.pair_class(m, n, k, num_classes_)] = q[static_cast<std::size_t>(k)];
    for (int k = 0; k < num_classes_; ++k)
      mu_observed_[mu_class(n, k)] = q[static_cast<std::size_t>(k)];
  }

  double drift(int n) const {
    return kl_divergence(observed(n), trained(n));
  }

  ClassDistribution pair_observed(const NetworkState& state, int m, int n) const {
    ClassDistribution q;
    q.p.resize(static_cast<std::size_t>(num_classes_));
    for (int k = 0; k < num_classes_; ++k)
      q.p[static_cast<std::size_t>(k)] =
          state.observed_dist[state.pair_class(m, n, k, num_classes_)];
    return q;
  }

  // Pick the KL-optimal generation distribution for a pair and size the
  // synthetic batch from the slot's upload composition.
  GeneratedBatch generate(const NetworkState& state, int m, int n,
                          double upload_bits, double delta) {
    ClassDistribution q = pair_observed(state, m, n);
    std::size_t idx = optimal_generation_index(q, candidates_);
    const ClassDistribution& p = candidates_[idx];
    for (int k = 0; k < num_classes_; ++k)
      pair_generation_[pair_class(m, n, k)] = p[static_cast<std::size_t>(k)];
    std::vector<double> per_class(static_cast<std::size_t>(num_classes_));
    for (int k = 0; k < num_classes_; ++k)
      per_class[static_cast<std::size_t>(k)] = upload_bits * q[static_cast<std::size_t>(k)];
    return dt_data_size(delta, p, per_class);
  }

  // Equivalent synthetic size without committing a generation (sizing rule
  // shared with the physical-collection baseline).
  double equivalent_generation_bits(const NetworkState& state, int m, int n,
                                    double upload_bits, double delta) const {
    ClassDistribution q = pair_observed(state, m, n);
    double norm = 0.0;
    for (int k = 0; k < num_classes_; ++k) {
      double b = upload_bits * q[static_cast<std::size_t>(k)];
      norm += b * b;
    }
    return delta * std::sqrt(norm);
  }

  // Fold a retrain batch into the model's training distribution; the model
  // keeps a memory mass of ref_size_bits.
  void absorb_batch(int n, double batch_bits, const ClassDistribution& batch_dist) {
    if (batch_bits <= 0.0) return;
    double total = ref_mass_bits_ + batch_bits;
    for (int k = 0; k < num_classes_; ++k) {
      double blended = (ref_mass_bits_ * trained_dist_[mu_class(n, k)] +
                        batch_bits * batch_dist[static_cast<std::size_t>(k)]) /
                       total;
      trained_dist_[mu_class(n, k)] = blended;
    }
  }

  void replace_trained(int n, const ClassDistribution& dist) {
    for (int k = 0; k < num_classes_; ++k)
      trained_dist_[mu_class(n, k)] = dist[static_cast<std::size_t>(k)];
  }

  void accumulate_store(int n, double bits, const ClassDistribution& dist) {
    if (bits <= 0.0) return;
    double total = store_bits_[static_cast<std::size_t>(n)] + bits;
    for (int k = 0; k < num_classes_; ++k) {
      double blended = (store_bits_[static_cast<std::size_t>(n)] * store_dist_[mu_class(n, k)] +
                        bits * dist[static_cast<std::size_t>(k)]) /
                       total;
      store_dist_[mu_class(n, k)] = blended;
    }
    store_bits_[static_cast<std::size_t>(n)] = total;
  }

  ClassDistribution store_distribution(int n) const {
    return slice(store_dist_, static_cast<std::size_t>(n));
  }

  void reset_store(int n) {
    store_bits_[static_cast<std::size_t>(n)] = 0.0;
    for (int k = 0; k < num_classes_; ++k)
      store_dist_[mu_class(n, k)] = 1.0 / num_classes_;
  }

 private:
  std::size_t mu_class(int n, int k) const {
    return static_cast<std::size_t>(n) * num_classes_ + static_cast<std::size_t>(k);
  }
  std::size_t pair_class(int m, int n, int k) const {
    return (static_cast<std::size_t>(m) * max_mus_ + static_cast<std::size_t>(n)) *
               num_classes_ +
           static_cast<std::size_t>(k);
  }
  ClassDistribution slice(const std::vector<double>& flat, std::size_t n) const {
    ClassDistribution d;
    d.p.assign(flat.begin() + static_cast<std::ptrdiff_t>(n * num_classes_),
               flat.begin() + static_cast<std::ptrdiff_t>((n + 1) * num_classes_));
    return d;
  }

  int num_bs_ = 0;
  int max_mus_ = 0;
  int num_classes_ = 0;
  double ref_mass_bits_ = 1.0;
  std::vector<ClassDistribution> candidates_;
  std::vector<double> trained_dist_;     // N*K
  std::vector<double> mu_observed_;      // N*K
  std::vector<double> pair_generation_;  // M*N*K, feature block for the agent
  std::vector<double> store_bits_;       // N
  std::vector<double> store_dist_;       // N*K
};

}  // namespace twinflow

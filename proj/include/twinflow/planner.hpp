#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "twinflow/accuracy.hpp"
#include "twinflow/bnb.hpp"
#include "twinflow/channel.hpp"
#include "twinflow/lp.hpp"
#include "twinflow/state.hpp"

namespace twinflow {

// Frame-boundary association problem: per-pair expected effective delays,
// epigraph slack over per-MU costs, relaxed association variables.
struct AssociationProblem {
  int num_bs = 0;
  int num_mus = 0;
  std::vector<double> costs;  // M x N, a_{m,n}

  std::size_t pair(int m, int n) const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(num_mus) +
           static_cast<std::size_t>(n);
  }
};

// min eta  s.t.  sum_m a_{m,n} v_{m,n} <= eta,  1 <= sum_m v_{m,n} <= M,
// v in [0,1]. Columns: v_{m,n} (pair-major), then eta.
inline LpProblem build_association_lp(const AssociationProblem& ap) {
  const int M = ap.num_bs, N = ap.num_mus;
  const std::size_t nv = static_cast<std::size_t>(M) * N + 1;
  const std::size_t eta = nv - 1;
  LpProblem lp;
  lp.maximize = false;
  lp.objective.assign(nv, 0.0);
  lp.objective[eta] = 1.0;
  lp.lower.assign(nv, 0.0);
  lp.upper.assign(nv, 1.0);
  lp.upper[eta] = std::numeric_limits<double>::infinity();

  for (int n = 0; n < N; ++n) {
    std::vector<double> cost_row(nv, 0.0);
    std::vector<double> count_row(nv, 0.0);
    for (int m = 0; m < M; ++m) {
      cost_row[ap.pair(m, n)] = ap.costs[ap.pair(m, n)];
      count_row[ap.pair(m, n)] = 1.0;
    }
    cost_row[eta] = -1.0;
    lp.rows.push_back(cost_row);
    lp.rhs.push_back(0.0);
    lp.senses.push_back(RowSense::LessEqual);

    lp.rows.push_back(count_row);
    lp.rhs.push_back(1.0);
    lp.senses.push_back(RowSense::GreaterEqual);

    lp.rows.push_back(count_row);
    lp.rhs.push_back(static_cast<double>(M));
    lp.senses.push_back(RowSense::LessEqual);
  }
  return lp;
}

struct AssociationResult {
  std::vector<std::uint8_t> v;  // M x N integer association
  double objective = 0.0;       // optimal eta
  long nodes = 0;
};

inline AssociationResult solve_association(const AssociationProblem& ap) {
  LpProblem lp = build_association_lp(ap);
  std::vector<std::size_t> int_vars(static_cast<std::size_t>(ap.num_bs) *
                                    ap.num_mus);
  for (std::size_t j = 0; j < int_vars.size(); ++j) int_vars[j] = j;
  BnbResult r = branch_and_bound(lp, int_vars);
  if (r.status != LpStatus::Optimal)
    throw NumericalBreakdown("association problem must be feasible");
  AssociationResult out;
  out.v.resize(int_vars.size());
  for (std::size_t j = 0; j < int_vars.size(); ++j)
    out.v[j] = r.x[j] > 0.5 ? 1 : 0;
  out.objective = r.objective;
  out.nodes = r.nodes;
  return out;
}

// Posterior frame accuracy: mean of the frame's per-slot accuracies.
inline double frame_accuracy_posterior(std::span<const double> slot_accuracies,
                                       int slots_per_frame) {
  if (static_cast<int>(slot_accuracies.size()) != slots_per_frame)
    throw WrongSampleCount("expected one accuracy sample per frame slot");
  double sum = 0.0;
  for (double a : slot_accuracies) sum += a;
  return sum / slots_per_frame;
}

// Predicted frame accuracy: mean of the decay curve over the coming frame,
// 64-panel composite trapezoid.
inline double frame_accuracy_predicted(double c0, const AccuracyModel& model,
                                       double drift_nats, double frame_s) {
  if (frame_s <= 0.0) throw WrongSampleCount("frame length must be positive");
  constexpr int kPanels = 64;
  double h = frame_s / kPanels;
  double sum = 0.5 * (accuracy_curve(c0, model, drift_nats, 0.0) +
                      accuracy_curve(c0, model, drift_nats, frame_s));
  for (int i = 1; i < kPanels; ++i)
    sum += accuracy_curve(c0, model, drift_nats, i * h);
  return sum * h / frame_s;
}

// Retrain iff the predicted frame accuracy falls strictly below the
// threshold; equality means no retrain.
inline bool retrain_decision(double predicted, double threshold) {
  return predicted < threshold;
}

struct RetrainPlan {
  std::vector<std::uint8_t> retrain;   // per MU
  std::vector<double> predicted;       // per MU
};

// Exponentially weighted per-pair cost history (half-life in frames), with
// a path-loss based estimate standing in until a pair has been observed.
class PairCostEstimator {
 public:
  PairCostEstimator() = default;
  PairCostEstimator(int num_bs, int max_mus, double half_life_frames = 3.0)
      : num_bs_(num_bs),
        max_mus_(max_mus),
        keep_(std::pow(2.0, -1.0 / half_life_frames)),
        ewma_(static_cast<std::size_t>(num_bs) * max_mus, 0.0),
        seen_(static_cast<std::size_t>(num_bs) * max_mus, 0) {}

  void observe(int m, int n, double realized_delay_s) {
    std::size_t i = idx(m, n);
    if (!seen_[i]) {
      ewma_[i] = realized_delay_s;
      seen_[i] = 1;
    } else {
      ewma_[i] = keep_ * ewma_[i] + (1.0 - keep_) * realized_delay_s;
    }
  }

  bool has_history(int m, int n) const { return seen_[idx(m, n)] != 0; }
  double history(int m, int n) const { return ewma_[idx(m, n)]; }

  // Expected effective delay for the pair; falls back to a deterministic
  // path-loss estimate (fair-share compute) when nothing was observed yet.
  double estimate(const NetworkState& state, const ScenarioConfig& cfg, int m,
                  int n) const {
    std::size_t i = idx(m, n);
    if (seen_[i]) return ewma_[i];
    double d = pair_distance(state.bs_positions[static_cast<std::size_t>(m)],
                             state.mu_positions[static_cast<std::size_t>(n)]);
    double h = mean_channel_gain(std::max(d, 1.0), cfg.pathloss);
    double rate = uplink_rate(cfg.bandwidth_hz, true,
                              snr(cfg.tx_power_w, h, cfg.noise_power_w));
    double mean_task = 0.5 * (cfg.task_size_bits.lo + cfg.task_size_bits.hi);
    double offload = (1.0 - cfg.local_fraction) * mean_task;
    double fair_share = std::max(
        (cfg.bs_compute_flops - cfg.bs_reserved_flops) /
            std::max(1, state.active_mus),
        1.0);
    return (offload + cfg.downlink_bits) / std::max(rate, 1.0) +
           offload * cfg.flops_per_bit / fair_share;
  }

  std::vector<double> cost_matrix(const NetworkState& state,
                                  const ScenarioConfig& cfg) const {
    std::vector<double> a(static_cast<std::size_t>(num_bs_) * max_mus_, 0.0);
    for (int m = 0; m < num_bs_; ++m)
      for (int n = 0; n < max_mus_; ++n) a[idx(m, n)] = estimate(state, cfg, m, n);
    return a;
  }

 private:
  std::size_t idx(int m, int n) const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(max_mus_) +
           static_cast<std::size_t>(n);
  }
  int num_bs_ = 0;
  int max_mus_ = 0;
  double keep_ = std::pow(2.0, -1.0 / 3.0);
  std::vector<double> ewma_;
  std::vector<std::uint8_t> seen_;
};

}  // namespace twinflow

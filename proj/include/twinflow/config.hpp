#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "twinflow/accuracy.hpp"

namespace twinflow {

constexpr double kBitsPerMegabyte = 8e6;

inline double mb_to_bits(double mb) { return mb * kBitsPerMegabyte; }
inline double bits_to_mb(double bits) { return bits / kBitsPerMegabyte; }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

struct PathLossModel {
  double exponent = 3.5;
  double reference_gain = 5e-5;      // mean gain at the reference distance
  double reference_distance_m = 100.0;
};

struct AgentConfig {
  int hidden_units = 128;            // two hidden layers of this width
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double discount = 0.5;
  double eps_start = 1.0;
  double eps_end = 0.05;
  int eps_decay_episodes = 500;
  int buffer_capacity = 10000;
  int batch_size = 64;
  int target_sync_every = 100;       // updates between target-network syncs
  int update_every = 4;              // transitions between gradient steps
  int warmup_episodes = 24;          // training rollouts before the measured run
  int warmup_slots = 150;            // slots per training rollout
  double reward_scale = 0.05;        // training-side reward normalization
  double max_grad_norm = 5.0;        // global gradient clip per update
};

struct IntInterval {
  int lo = 0, hi = 0;
};
struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Every physical and learning parameter of a run. Data sizes are bits,
// powers are watts, compute is FLOP/s; the JSON loader accepts MB/dBm forms.
struct ScenarioConfig {
  int num_bs = 3;
  IntInterval mu_count_range{5, 10};
  double slot_duration_s = 0.005;
  int slots_per_frame = 10;
  long total_slots = 2000;

  double bandwidth_hz = 10e6;
  double tx_power_w = dbm_to_watts(-10.0);
  double noise_power_w = dbm_to_watts(-100.0);
  PathLossModel pathloss;

  double accuracy_threshold = 0.85;
  double bs_compute_flops = 50e9;
  double bs_reserved_flops = 0.0;
  double local_rate_s_per_bit = 2e-8;
  double downlink_bits = mb_to_bits(1.0);
  Interval task_size_bits{mb_to_bits(10.0), mb_to_bits(20.0)};
  double local_fraction = 0.2;       // pinned-local share of each task
  double flops_per_bit = 500.0;

  double dt_scale = 2.0;             // delta in the generated-size rule
  double reward_weight = 5e-8;       // delta_Q, penalty per unallocated bit
  int num_classes = 4;
  double candidate_grid_step = 0.1;  // builds the candidate set when empty
  std::vector<std::vector<double>> candidate_dists;

  AccuracyModel accuracy;
  double initial_accuracy = 0.95;

  double arena_size_m = 1000.0;
  Interval speed_range_mps{1.0, 10.0};

  double drift_mix_per_frame = 0.03;  // ambient distribution drift
  long shift_frame = -1;              // hard distribution shift (off when < 0)
  double physical_collection_fraction = 0.75;  // NoDT data haircut vs DT size

  double plan_overhead_s = 0.002;
  double breakout_penalty_factor = 10.0;

  AgentConfig agent;
  std::uint64_t rng_seed = 1;
  bool dump_twin_trace = false;
};

enum class ConfigViolationCode {
  NegativeParameter,
  ThresholdOutOfRange,
  EmptyDistributionSet,
  RangeInvalid,
};

struct ConfigViolation {
  ConfigViolationCode code;
  std::string field;
  std::string message;
};

inline const char* to_string(ConfigViolationCode c) {
  switch (c) {
    case ConfigViolationCode::NegativeParameter: return "NegativeParameter";
    case ConfigViolationCode::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case ConfigViolationCode::EmptyDistributionSet: return "EmptyDistributionSet";
    case ConfigViolationCode::RangeInvalid: return "RangeInvalid";
  }
  return "?";
}

struct ValidatedConfig {
  ScenarioConfig config;
  std::vector<ConfigViolation> violations;
  bool ok() const { return violations.empty(); }
};

// All compositions of the K-simplex with the given grid step, lexicographic.
inline std::vector<std::vector<double>> simplex_grid(int num_classes,
                                                     double step) {
  int levels = static_cast<int>(std::lround(1.0 / step));
  std::vector<std::vector<double>> out;
  std::vector<int> parts(static_cast<size_t>(num_classes), 0);
  // enumerate integer compositions of `levels` into num_classes parts
  auto rec = [&](auto&& self, int idx, int remaining) -> void {
    if (idx == num_classes - 1) {
      parts[static_cast<size_t>(idx)] = remaining;
      std::vector<double> v(parts.size());
      for (size_t i = 0; i < parts.size(); ++i) v[i] = parts[i] * step;
      out.push_back(std::move(v));
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      parts[static_cast<size_t>(idx)] = k;
      self(self, idx + 1, remaining - k);
    }
  };
  rec(rec, 0, levels);
  return out;
}

// Normalizes (candidate-set filtering, default candidate grid) and reports
// every violated invariant. The returned config is usable iff ok().
inline ValidatedConfig validate_config(const ScenarioConfig& raw) {
  ValidatedConfig v{raw, {}};
  ScenarioConfig& c = v.config;
  auto bad = [&](ConfigViolationCode code, const std::string& field,
                 const std::string& msg) {
    v.violations.push_back({code, field, msg});
  };
  auto positive = [&](double x, const char* field) {
    if (!(x > 0.0) || !std::isfinite(x))
      bad(ConfigViolationCode::NegativeParameter, field,
          std::string(field) + " must be strictly positive");
  };
  auto nonnegative = [&](double x, const char* field) {
    if (x < 0.0 || !std::isfinite(x))
      bad(ConfigViolationCode::NegativeParameter, field,
          std::string(field) + " must be >= 0");
  };

  if (c.num_bs < 1)
    bad(ConfigViolationCode::RangeInvalid, "num_bs", "need at least one BS");
  if (c.mu_count_range.lo < 1 || c.mu_count_range.hi > 64 ||
      c.mu_count_range.lo > c.mu_count_range.hi)
    bad(ConfigViolationCode::RangeInvalid, "mu_count_range",
        "must satisfy 1 <= lo <= hi <= 64");
  if (c.slots_per_frame < 1)
    bad(ConfigViolationCode::RangeInvalid, "slots_per_frame", "must be >= 1");
  if (c.total_slots < 1)
    bad(ConfigViolationCode::RangeInvalid, "total_slots", "must be >= 1");

  positive(c.slot_duration_s, "slot_duration_s");
  positive(c.bandwidth_hz, "bandwidth_hz");
  positive(c.tx_power_w, "tx_power_w");
  positive(c.noise_power_w, "noise_power_w");
  positive(c.bs_compute_flops, "bs_compute_flops");
  nonnegative(c.bs_reserved_flops, "bs_reserved_flops");
  positive(c.local_rate_s_per_bit, "local_rate_s_per_bit");
  nonnegative(c.downlink_bits, "downlink_bits");
  positive(c.task_size_bits.lo, "task_size_bits.lo");
  positive(c.task_size_bits.hi, "task_size_bits.hi");
  if (c.task_size_bits.lo > c.task_size_bits.hi)
    bad(ConfigViolationCode::RangeInvalid, "task_size_bits", "lo > hi");
  positive(c.flops_per_bit, "flops_per_bit");
  nonnegative(c.dt_scale, "dt_scale");
  nonnegative(c.reward_weight, "reward_weight");
  positive(c.arena_size_m, "arena_size_m");
  nonnegative(c.speed_range_mps.lo, "speed_range_mps.lo");
  if (c.speed_range_mps.lo > c.speed_range_mps.hi)
    bad(ConfigViolationCode::RangeInvalid, "speed_range_mps", "lo > hi");
  positive(c.pathloss.exponent, "pathloss.exponent");
  positive(c.pathloss.reference_gain, "pathloss.reference_gain");
  positive(c.pathloss.reference_distance_m, "pathloss.reference_distance_m");

  if (!(c.accuracy_threshold > 0.0 && c.accuracy_threshold < 1.0))
    bad(ConfigViolationCode::ThresholdOutOfRange, "accuracy_threshold",
        "must lie in (0, 1)");
  if (!(c.accuracy.c_max > 0.0 && c.accuracy.c_max <= 1.0))
    bad(ConfigViolationCode::ThresholdOutOfRange, "accuracy.c_max",
        "must lie in (0, 1]");
  if (!(c.initial_accuracy >= 0.0 && c.initial_accuracy <= 1.0))
    bad(ConfigViolationCode::ThresholdOutOfRange, "initial_accuracy",
        "must lie in [0, 1]");
  nonnegative(c.accuracy.decay_rate, "accuracy.decay_rate");
  nonnegative(c.accuracy.drift_gain, "accuracy.drift_gain");
  positive(c.accuracy.data_gain, "accuracy.data_gain");
  positive(c.accuracy.ref_size_bits, "accuracy.ref_size_bits");
  if (!(c.local_fraction >= 0.0 && c.local_fraction <= 1.0))
    bad(ConfigViolationCode::ThresholdOutOfRange, "local_fraction",
        "must lie in [0, 1]");
  if (!(c.physical_collection_fraction >= 0.0 &&
        c.physical_collection_fraction <= 1.0))
    bad(ConfigViolationCode::ThresholdOutOfRange,
        "physical_collection_fraction", "must lie in [0, 1]");
  if (c.num_classes < 2)
    bad(ConfigViolationCode::RangeInvalid, "num_classes", "must be >= 2");
  nonnegative(c.plan_overhead_s, "plan_overhead_s");
  positive(c.breakout_penalty_factor, "breakout_penalty_factor");

  // Candidate set: drop vectors that are not distributions, then fall back
  // to the grid; an empty result after filtering is an error.
  std::vector<std::vector<double>> kept;
  for (const auto& p : c.candidate_dists) {
    if (static_cast<int>(p.size()) != c.num_classes) continue;
    double sum = 0.0;
    bool valid = true;
    for (double x : p) {
      if (x < 0.0 || !std::isfinite(x)) valid = false;
      sum += x;
    }
    if (valid && std::fabs(sum - 1.0) <= 1e-9) kept.push_back(p);
  }
  if (!c.candidate_dists.empty() && kept.empty()) {
    bad(ConfigViolationCode::EmptyDistributionSet, "candidate_dists",
        "no candidate vector is a valid probability distribution");
  } else if (c.candidate_dists.empty()) {
    if (c.candidate_grid_step <= 0.0 || c.candidate_grid_step > 1.0) {
      bad(ConfigViolationCode::RangeInvalid, "candidate_grid_step",
          "must lie in (0, 1]");
    } else if (c.num_classes >= 2) {
      kept = simplex_grid(c.num_classes, c.candidate_grid_step);
    }
  }
  c.candidate_dists = std::move(kept);

  const AgentConfig& a = c.agent;
  if (a.hidden_units < 1 || a.buffer_capacity < 1 || a.batch_size < 1 ||
      a.target_sync_every < 1 || a.update_every < 1 || a.warmup_episodes < 0 ||
      a.warmup_slots < 1 || a.eps_decay_episodes < 1)
    bad(ConfigViolationCode::RangeInvalid, "agent", "agent counters invalid");
  positive(a.learning_rate, "agent.learning_rate");
  nonnegative(a.momentum, "agent.momentum");
  positive(a.reward_scale, "agent.reward_scale");
  positive(a.max_grad_norm, "agent.max_grad_norm");
  if (!(a.discount >= 0.0 && a.discount < 1.0))
    bad(ConfigViolationCode::ThresholdOutOfRange, "agent.discount",
        "must lie in [0, 1)");
  if (!(a.eps_start >= 0.0 && a.eps_start <= 1.0 && a.eps_end >= 0.0 &&
        a.eps_end <= a.eps_start))
    bad(ConfigViolationCode::ThresholdOutOfRange, "agent.epsilon",
        "need 0 <= eps_end <= eps_start <= 1");

  return v;
}

}  // namespace twinflow

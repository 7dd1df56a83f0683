#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "twinflow/errors.hpp"

namespace twinflow {

enum class SchemeKind {
  Proposed,
  NoIncrementalLearning,
  NoDigitalTwin,
  SingleTimescale,
};

inline const char* scheme_name(SchemeKind s) {
  switch (s) {
    case SchemeKind::Proposed: return "proposed";
    case SchemeKind::NoIncrementalLearning: return "no-il";
    case SchemeKind::NoDigitalTwin: return "no-dt";
    case SchemeKind::SingleTimescale: return "single-timescale";
  }
  return "?";
}

struct SlotRecord {
  long slot = 0;
  long frame = 0;
  SchemeKind scheme = SchemeKind::Proposed;
  std::uint64_t seed = 0;
  bool control_slot = false;
  std::vector<double> mu_delay_s;       // active MUs, effective delay
  std::vector<double> mu_accuracy;      // active MUs
  std::vector<double> budget_utilization;  // per BS
  double mean_delay_s = 0.0;
  double p95_delay_s = 0.0;
  double mean_accuracy = 0.0;
  double reward = 0.0;
  int retrain_events = 0;
  bool breakout = false;
  double conservation_residual_bits = 0.0;
};

struct PlanningRecord {
  long frame = 0;
  std::vector<std::uint8_t> association;  // M x N
  std::vector<double> predicted_accuracy;
  std::vector<std::uint8_t> retrain;
  double objective = 0.0;
};

struct TrainingEpisode {
  int episode = 0;
  double mean_reward = 0.0;
  double epsilon = 0.0;
};

struct AccuracySample {
  long slot = 0;
  int mu = 0;
  double accuracy = 0.0;
};

struct RunSummary {
  std::string scheme;
  std::uint64_t seed = 0;
  long slots = 0;
  double mean_delay_s = 0.0;
  double p95_delay_s = 0.0;
  double mean_accuracy = 0.0;
  long retrain_count = 0;
  long breakout_count = 0;
  long planning_events = 0;
  double total_reward = 0.0;
};

// Nearest-rank percentile on a copy.
inline double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw EmptyRun("percentile of nothing");
  std::sort(values.begin(), values.end());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(values.size())));
  if (rank == 0) rank = 1;
  return values[rank - 1];
}

inline RunSummary summarize(const std::vector<SlotRecord>& records) {
  if (records.empty()) throw EmptyRun("no slot records to summarize");
  RunSummary s;
  s.scheme = scheme_name(records.front().scheme);
  s.seed = records.front().seed;
  s.slots = static_cast<long>(records.size());
  std::vector<double> delays;
  delays.reserve(records.size());
  double acc_sum = 0.0;
  long acc_count = 0;
  for (const auto& r : records) {
    delays.push_back(r.mean_delay_s);
    s.mean_delay_s += r.mean_delay_s;
    if (!r.mu_accuracy.empty()) {
      acc_sum += r.mean_accuracy;
      ++acc_count;
    }
    s.retrain_count += r.retrain_events;
    s.breakout_count += r.breakout ? 1 : 0;
    s.planning_events += r.control_slot ? 1 : 0;
    s.total_reward += r.reward;
  }
  s.mean_delay_s /= static_cast<double>(records.size());
  s.mean_accuracy = acc_count > 0 ? acc_sum / acc_count : 0.0;
  s.p95_delay_s = percentile(delays, 95.0);
  return s;
}

}  // namespace twinflow

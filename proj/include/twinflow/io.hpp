#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinflow/config.hpp"
#include "twinflow/errors.hpp"
#include "twinflow/metrics.hpp"
#include "twinflow/orchestrator.hpp"

namespace twinflow {

using nlohmann::json;

// Compact, locale-independent float formatting for CSV/JSON payloads.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---- config <-> json -------------------------------------------------------

inline json config_to_json(const ScenarioConfig& c) {
  json j;
  j["num_bs"] = c.num_bs;
  j["mu_count_range"] = {c.mu_count_range.lo, c.mu_count_range.hi};
  j["slot_duration_s"] = c.slot_duration_s;
  j["slots_per_frame"] = c.slots_per_frame;
  j["total_slots"] = c.total_slots;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["tx_power_w"] = c.tx_power_w;
  j["noise_power_w"] = c.noise_power_w;
  j["pathloss"] = {{"exponent", c.pathloss.exponent},
                   {"reference_gain", c.pathloss.reference_gain},
                   {"reference_distance_m", c.pathloss.reference_distance_m}};
  j["accuracy_threshold"] = c.accuracy_threshold;
  j["bs_compute_flops"] = c.bs_compute_flops;
  j["bs_reserved_flops"] = c.bs_reserved_flops;
  j["local_rate_s_per_bit"] = c.local_rate_s_per_bit;
  j["downlink_size_mb"] = bits_to_mb(c.downlink_bits);
  j["task_size_mb_range"] = {bits_to_mb(c.task_size_bits.lo),
                             bits_to_mb(c.task_size_bits.hi)};
  j["local_fraction"] = c.local_fraction;
  j["flops_per_bit"] = c.flops_per_bit;
  j["dt_scale"] = c.dt_scale;
  j["reward_weight"] = c.reward_weight;
  j["num_classes"] = c.num_classes;
  j["candidate_grid_step"] = c.candidate_grid_step;
  j["candidate_dists"] = c.candidate_dists;
  j["accuracy_model"] = {{"c_max", c.accuracy.c_max},
                         {"decay_rate", c.accuracy.decay_rate},
                         {"drift_gain", c.accuracy.drift_gain},
                         {"data_gain", c.accuracy.data_gain},
                         {"ref_size_mb", bits_to_mb(c.accuracy.ref_size_bits)}};
  j["initial_accuracy"] = c.initial_accuracy;
  j["arena_size_m"] = c.arena_size_m;
  j["speed_range_mps"] = {c.speed_range_mps.lo, c.speed_range_mps.hi};
  j["drift_mix_per_frame"] = c.drift_mix_per_frame;
  j["shift_frame"] = c.shift_frame;
  j["physical_collection_fraction"] = c.physical_collection_fraction;
  j["plan_overhead_s"] = c.plan_overhead_s;
  j["breakout_penalty_factor"] = c.breakout_penalty_factor;
  j["rng_seed"] = c.rng_seed;
  j["dump_twin_trace"] = c.dump_twin_trace;
  j["agent"] = {{"hidden_units", c.agent.hidden_units},
                {"learning_rate", c.agent.learning_rate},
                {"momentum", c.agent.momentum},
                {"discount", c.agent.discount},
                {"eps_start", c.agent.eps_start},
                {"eps_end", c.agent.eps_end},
                {"eps_decay_episodes", c.agent.eps_decay_episodes},
                {"buffer_capacity", c.agent.buffer_capacity},
                {"batch_size", c.agent.batch_size},
                {"target_sync_every", c.agent.target_sync_every},
                {"update_every", c.agent.update_every},
                {"warmup_episodes", c.agent.warmup_episodes},
                {"warmup_slots", c.agent.warmup_slots},
                {"reward_scale", c.agent.reward_scale},
                {"max_grad_norm", c.agent.max_grad_norm}};
  return j;
}

// Overlay a JSON document onto the defaults; unknown keys are an error so
// typos do not silently fall back.
inline ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  static const char* known[] = {"num_bs", "mu_count_range", "slot_duration_s",
      "slots_per_frame", "total_slots", "bandwidth_hz", "tx_power_w",
      "tx_power_dbm", "noise_power_w", "noise_power_dbm", "pathloss",
      "accuracy_threshold", "bs_compute_flops", "bs_reserved_flops",
      "local_rate_s_per_bit", "downlink_size_mb", "task_size_mb_range",
      "local_fraction", "flops_per_bit", "dt_scale", "reward_weight",
      "num_classes", "candidate_grid_step", "candidate_dists",
      "accuracy_model", "initial_accuracy", "arena_size_m", "speed_range_mps",
      "drift_mix_per_frame", "shift_frame", "physical_collection_fraction",
      "plan_overhead_s", "breakout_penalty_factor", "rng_seed",
      "dump_twin_trace", "agent"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw ValidationError("unknown config key: " + it.key());
  }

  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).template get<std::decay_t<decltype(target)>>();
  };
  get("num_bs", c.num_bs);
  if (j.contains("mu_count_range")) {
    c.mu_count_range.lo = j["mu_count_range"].at(0).get<int>();
    c.mu_count_range.hi = j["mu_count_range"].at(1).get<int>();
  }
  get("slot_duration_s", c.slot_duration_s);
  get("slots_per_frame", c.slots_per_frame);
  get("total_slots", c.total_slots);
  get("bandwidth_hz", c.bandwidth_hz);
  get("tx_power_w", c.tx_power_w);
  if (j.contains("tx_power_dbm")) c.tx_power_w = dbm_to_watts(j["tx_power_dbm"].get<double>());
  get("noise_power_w", c.noise_power_w);
  if (j.contains("noise_power_dbm"))
    c.noise_power_w = dbm_to_watts(j["noise_power_dbm"].get<double>());
  if (j.contains("pathloss")) {
    const json& p = j["pathloss"];
    if (p.contains("exponent")) c.pathloss.exponent = p["exponent"].get<double>();
    if (p.contains("reference_gain"))
      c.pathloss.reference_gain = p["reference_gain"].get<double>();
    if (p.contains("reference_distance_m"))
      c.pathloss.reference_distance_m = p["reference_distance_m"].get<double>();
  }
  get("accuracy_threshold", c.accuracy_threshold);
  get("bs_compute_flops", c.bs_compute_flops);
  get("bs_reserved_flops", c.bs_reserved_flops);
  get("local_rate_s_per_bit", c.local_rate_s_per_bit);
  if (j.contains("downlink_size_mb"))
    c.downlink_bits = mb_to_bits(j["downlink_size_mb"].get<double>());
  if (j.contains("task_size_mb_range")) {
    c.task_size_bits.lo = mb_to_bits(j["task_size_mb_range"].at(0).get<double>());
    c.task_size_bits.hi = mb_to_bits(j["task_size_mb_range"].at(1).get<double>());
  }
  get("local_fraction", c.local_fraction);
  get("flops_per_bit", c.flops_per_bit);
  get("dt_scale", c.dt_scale);
  get("reward_weight", c.reward_weight);
  get("num_classes", c.num_classes);
  get("candidate_grid_step", c.candidate_grid_step);
  if (j.contains("candidate_dists"))
    c.candidate_dists = j["candidate_dists"].get<std::vector<std::vector<double>>>();
  if (j.contains("accuracy_model")) {
    const json& a = j["accuracy_model"];
    if (a.contains("c_max")) c.accuracy.c_max = a["c_max"].get<double>();
    if (a.contains("decay_rate")) c.accuracy.decay_rate = a["decay_rate"].get<double>();
    if (a.contains("drift_gain")) c.accuracy.drift_gain = a["drift_gain"].get<double>();
    if (a.contains("data_gain")) c.accuracy.data_gain = a["data_gain"].get<double>();
    if (a.contains("ref_size_mb"))
      c.accuracy.ref_size_bits = mb_to_bits(a["ref_size_mb"].get<double>());
  }
  get("initial_accuracy", c.initial_accuracy);
  get("arena_size_m", c.arena_size_m);
  if (j.contains("speed_range_mps")) {
    c.speed_range_mps.lo = j["speed_range_mps"].at(0).get<double>();
    c.speed_range_mps.hi = j["speed_range_mps"].at(1).get<double>();
  }
  get("drift_mix_per_frame", c.drift_mix_per_frame);
  get("shift_frame", c.shift_frame);
  get("physical_collection_fraction", c.physical_collection_fraction);
  get("plan_overhead_s", c.plan_overhead_s);
  get("breakout_penalty_factor", c.breakout_penalty_factor);
  get("rng_seed", c.rng_seed);
  get("dump_twin_trace", c.dump_twin_trace);
  if (j.contains("agent")) {
    const json& a = j["agent"];
    AgentConfig& g = c.agent;
    if (a.contains("hidden_units")) g.hidden_units = a["hidden_units"].get<int>();
    if (a.contains("learning_rate")) g.learning_rate = a["learning_rate"].get<double>();
    if (a.contains("momentum")) g.momentum = a["momentum"].get<double>();
    if (a.contains("discount")) g.discount = a["discount"].get<double>();
    if (a.contains("eps_start")) g.eps_start = a["eps_start"].get<double>();
    if (a.contains("eps_end")) g.eps_end = a["eps_end"].get<double>();
    if (a.contains("eps_decay_episodes"))
      g.eps_decay_episodes = a["eps_decay_episodes"].get<int>();
    if (a.contains("buffer_capacity")) g.buffer_capacity = a["buffer_capacity"].get<int>();
    if (a.contains("batch_size")) g.batch_size = a["batch_size"].get<int>();
    if (a.contains("target_sync_every"))
      g.target_sync_every = a["target_sync_every"].get<int>();
    if (a.contains("update_every")) g.update_every = a["update_every"].get<int>();
    if (a.contains("warmup_episodes")) g.warmup_episodes = a["warmup_episodes"].get<int>();
    if (a.contains("warmup_slots")) g.warmup_slots = a["warmup_slots"].get<int>();
    if (a.contains("reward_scale")) g.reward_scale = a["reward_scale"].get<double>();
    if (a.contains("max_grad_norm")) g.max_grad_norm = a["max_grad_norm"].get<double>();
  }
  return c;
}

// Parse failure carries line/column; validation failure carries the list.
inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" +
                     std::to_string(col) + ": " + e.what());
  }
  ScenarioConfig raw = config_from_json(j);
  ValidatedConfig v = validate_config(raw);
  if (!v.ok()) {
    std::string msg = "invalid config:";
    for (const auto& viol : v.violations)
      msg += "\n  [" + std::string(to_string(viol.code)) + "] " + viol.field +
             ": " + viol.message;
    throw ValidationError(msg);
  }
  return v.config;
}

// ---- metric files -----------------------------------------------------------

struct RunManifest {
  std::string scheme;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string output_dir;
  std::vector<std::pair<std::string, std::string>> files;  // name, digest

  json to_json() const {
    json j;
    j["scheme"] = scheme;
    j["seed"] = seed;
    j["config"] = config_path;
    j["output_dir"] = output_dir;
    json arr = json::array();
    for (const auto& [name, digest] : files)
      arr.push_back({{"name", name}, {"digest", digest}});
    j["files"] = arr;
    return j;
  }
};

inline std::string slots_csv(const std::vector<SlotRecord>& records) {
  std::string out =
      "slot,frame,scheme,seed,mean_delay_s,p95_delay_s,mean_accuracy,reward,"
      "retrain_events,breakout\n";
  for (const auto& r : records) {
    out += std::to_string(r.slot) + "," + std::to_string(r.frame) + "," +
           scheme_name(r.scheme) + "," + std::to_string(r.seed) + "," +
           fmt_double(r.mean_delay_s) + "," + fmt_double(r.p95_delay_s) + "," +
           fmt_double(r.mean_accuracy) + "," + fmt_double(r.reward) + "," +
           std::to_string(r.retrain_events) + "," +
           (r.breakout ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string training_csv(const std::vector<TrainingEpisode>& eps) {
  std::string out = "episode,mean_reward,epsilon\n";
  for (const auto& e : eps)
    out += std::to_string(e.episode) + "," + fmt_double(e.mean_reward) + "," +
           fmt_double(e.epsilon) + "\n";
  return out;
}

inline std::string accuracy_csv(const std::vector<AccuracySample>& samples) {
  std::string out = "slot,mu_id,accuracy\n";
  for (const auto& s : samples)
    out += std::to_string(s.slot) + "," + std::to_string(s.mu) + "," +
           fmt_double(s.accuracy) + "\n";
  return out;
}

inline json summary_to_json(const RunSummary& s) {
  json j;
  j["scheme"] = s.scheme;
  j["seed"] = s.seed;
  j["slots"] = s.slots;
  j["mean_delay_s"] = s.mean_delay_s;
  j["p95_delay_s"] = s.p95_delay_s;
  j["mean_accuracy"] = s.mean_accuracy;
  j["retrain_count"] = s.retrain_count;
  j["breakout_count"] = s.breakout_count;
  j["planning_events"] = s.planning_events;
  j["total_reward"] = s.total_reward;
  return j;
}

namespace detail_io {
inline void write_file(const std::filesystem::path& p, const std::string& data,
                       RunManifest& manifest) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << data;
  if (!out) throw IoError("short write to " + p.string());
  manifest.files.push_back({p.filename().string(), hex64(fnv1a64(data))});
}
}  // namespace detail_io

// Writes slots.csv, summary.json, training_curve.csv, accuracy_trace.csv,
// resolved_config.json and manifest.json (last). With zero records the CSVs
// are header-only and the summary is refused.
inline RunManifest write_metrics(const RunResult& result,
                                 const ScenarioConfig& cfg,
                                 const std::filesystem::path& dir,
                                 const std::string& config_path = "") {
  std::filesystem::create_directories(dir);
  RunManifest manifest;
  manifest.scheme = scheme_name(result.scheme);
  manifest.seed = result.seed;
  manifest.config_path = config_path;
  manifest.output_dir = dir.string();

  detail_io::write_file(dir / "slots.csv", slots_csv(result.slots), manifest);
  detail_io::write_file(dir / "training_curve.csv", training_csv(result.training),
                        manifest);
  detail_io::write_file(dir / "accuracy_trace.csv",
                        accuracy_csv(result.accuracy_trace), manifest);
  if (!result.slots.empty()) {
    detail_io::write_file(dir / "summary.json",
                          summary_to_json(result.summary).dump(2) + "\n",
                          manifest);
  }
  detail_io::write_file(dir / "resolved_config.json",
                        config_to_json(cfg).dump(2) + "\n", manifest);

  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  if (!mf) throw IoError("cannot write manifest");
  mf << manifest.to_json().dump(2) << "\n";
  return manifest;
}

}  // namespace twinflow

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "twinflow/agent.hpp"
#include "twinflow/delay.hpp"
#include "twinflow/metrics.hpp"
#include "twinflow/planner.hpp"
#include "twinflow/simulation.hpp"

namespace twinflow {

// What distinguishes the four schemes inside one loop.
struct SchemeTraits {
  bool per_slot_planning = false;      // association re-solved every slot
  bool instantaneous_retrain = false;  // per-slot threshold trigger
  bool learned_allocation = true;      // DQN vs frame-fixed fair share
  bool dt_generation = false;          // synthetic retraining data
  bool physical_collection = false;    // uplinked retraining data instead
  bool full_retrain = false;           // one-shot full-store retraining
  bool breakout_enabled = false;       // infeasible slots get penalized
};

inline SchemeTraits traits_for(SchemeKind scheme) {
  SchemeTraits t;
  switch (scheme) {
    case SchemeKind::Proposed:
      t.dt_generation = true;
      break;
    case SchemeKind::NoIncrementalLearning:
      t.full_retrain = true;
      break;
    case SchemeKind::NoDigitalTwin:
      t.learned_allocation = false;
      t.physical_collection = true;
      break;
    case SchemeKind::SingleTimescale:
      t.per_slot_planning = true;
      t.instantaneous_retrain = true;
      t.dt_generation = true;
      t.breakout_enabled = true;
      break;
  }
  return t;
}

struct RunResult {
  SchemeKind scheme = SchemeKind::Proposed;
  std::uint64_t seed = 0;
  std::vector<SlotRecord> slots;
  RunSummary summary;
  std::vector<TrainingEpisode> training;
  std::vector<PlanningRecord> planning;
  std::vector<AccuracySample> accuracy_trace;
  std::vector<long> action_histogram;  // measured run, agent schemes only
  std::vector<double> reward_by_phi;   // mean stored reward per phi level
};

namespace detail {

// Runs one scheme over one environment; owns the agent and planner state.
class SchemeRunner {
 public:
  SchemeRunner(const ScenarioConfig& cfg, SchemeKind scheme, std::uint64_t seed)
      : cfg_(cfg),
        scheme_(scheme),
        traits_(traits_for(scheme)),
        seed_(seed),
        encoder_(cfg),
        estimator_(cfg.num_bs, cfg.mu_count_range.hi) {
    if (traits_.learned_allocation) {
      Rng agent_rng =
          Rng(seed).derive(0x6a67 + static_cast<std::uint64_t>(scheme) * 131);
      agent_ = std::make_unique<DqnAgent>(encoder_.dim(), cfg.agent, agent_rng);
    }
  }

  RunResult run() {
    RunResult out;
    out.scheme = scheme_;
    out.seed = seed_;

    const int warmup = agent_ ? cfg_.agent.warmup_episodes : 0;
    for (int e = 0; e < warmup; ++e) {
      agent_->set_episode(e, warmup);
      Environment env(cfg_, Rng(seed_).derive(1000 + static_cast<std::uint64_t>(e)).next_u64());
      EpisodeStats stats = run_loop(env, cfg_.agent.warmup_slots, nullptr);
      finish_episode();
      agent_->clear_replay();  // Algorithm-2 buffer clear, per rollout
      out.training.push_back({e, stats.mean_reward(), agent_->epsilon()});
    }
    if (agent_) {
      if (warmup > 0)
        agent_->set_epsilon(cfg_.agent.eps_end);
      else
        agent_->set_episode(0, 1);  // pure online: anneal over the run below
    }

    // Measured rollout starts with cold planner state in every scheme.
    estimator_ = PairCostEstimator(cfg_.num_bs, cfg_.mu_count_range.hi);
    Environment env(cfg_, Rng(seed_).derive(0).next_u64());
    anneal_online_ = agent_ && warmup == 0;
    if (agent_) action_histogram_.assign(ActionCatalog::size(), 0);
    run_loop(env, cfg_.total_slots, &out);
    finish_episode();
    out.action_histogram = action_histogram_;
    out.reward_by_phi.assign(5, 0.0);
    for (int i = 0; i < 5; ++i)
      if (dbg_phi_count_[i] > 0)
        out.reward_by_phi[static_cast<std::size_t>(i)] =
            dbg_phi_reward_[i] / dbg_phi_count_[i];
    out.summary = summarize(out.slots);
    return out;
  }

 private:
  struct EpisodeStats {
    double reward_sum = 0.0;
    long reward_slots = 0;
    double mean_reward() const {
      return reward_slots > 0 ? reward_sum / reward_slots : 0.0;
    }
  };

  EpisodeStats run_loop(Environment& env, long slots, RunResult* out) {
    EpisodeStats stats;
    feasible_delays_.clear();
    frame_delay_sum_.assign(pair_count(), 0.0);
    frame_delay_count_.assign(pair_count(), 0);

    for (long t = 0; t < slots; ++t) {
      if (anneal_online_ && agent_)
        agent_->set_episode(static_cast<int>(t),
                            static_cast<int>(cfg_.total_slots));
      if (env.is_control_slot(t)) {
        long frame = t / cfg_.slots_per_frame;
        flush_frame_costs();
        env.begin_frame(frame);
        env.advance_control_slot(t);
        PlanningRecord plan;
        if (traits_.per_slot_planning)
          plan = plan_single_timescale(env);
        else
          plan = plan_frame(env);
        if (out) {
          out->planning.push_back(plan);
          out->slots.push_back(control_record(env, t));
          append_accuracy_trace(env, t, *out);
        }
      } else {
        env.advance_task_slot(t);
        if (traits_.per_slot_planning) plan_single_timescale(env);
        SlotRecord rec = task_slot(env, t);
        stats.reward_sum += rec.reward;
        ++stats.reward_slots;
        if (out) {
          out->slots.push_back(rec);
          append_accuracy_trace(env, t, *out);
        }
      }
    }
    return stats;
  }

  std::size_t pair_count() const {
    return static_cast<std::size_t>(cfg_.num_bs) * cfg_.mu_count_range.hi;
  }

  void append_accuracy_trace(const Environment& env, long t, RunResult& out) {
    const NetworkState& st = env.state();
    for (int n = 0; n < st.active_mus; ++n)
      out.accuracy_trace.push_back(
          {t, n, st.accuracy[static_cast<std::size_t>(n)]});
  }

  // ---- planning ----------------------------------------------------------

  void flush_frame_costs() {
    for (std::size_t i = 0; i < frame_delay_sum_.size(); ++i) {
      if (frame_delay_count_[i] == 0) continue;
      estimator_.observe(static_cast<int>(i / cfg_.mu_count_range.hi),
                         static_cast<int>(i % cfg_.mu_count_range.hi),
                         frame_delay_sum_[i] / frame_delay_count_[i]);
      frame_delay_sum_[i] = 0.0;
      frame_delay_count_[i] = 0;
    }
  }

  AssociationResult associate(Environment& env) {
    NetworkState& st = env.state();
    auto full = estimator_.cost_matrix(st, cfg_);
    AssociationProblem ap;
    ap.num_bs = cfg_.num_bs;
    ap.num_mus = st.active_mus;
    ap.costs.resize(static_cast<std::size_t>(ap.num_bs) * ap.num_mus);
    for (int m = 0; m < ap.num_bs; ++m)
      for (int n = 0; n < ap.num_mus; ++n)
        ap.costs[ap.pair(m, n)] =
            full[static_cast<std::size_t>(m) * cfg_.mu_count_range.hi + n];
    AssociationResult r = solve_association(ap);
    std::fill(st.association.begin(), st.association.end(), 0);
    for (int m = 0; m < ap.num_bs; ++m)
      for (int n = 0; n < ap.num_mus; ++n)
        st.association[st.pair(m, n)] = r.v[ap.pair(m, n)];
    return r;
  }

  void set_retrain_flags(NetworkState& st, const std::vector<std::uint8_t>& per_mu) {
    std::fill(st.retrain_flag.begin(), st.retrain_flag.end(), 0);
    for (int n = 0; n < st.active_mus; ++n) {
      if (!per_mu[static_cast<std::size_t>(n)]) continue;
      for (int m = 0; m < st.num_bs; ++m)
        if (st.associated(m, n)) st.retrain_flag[st.pair(m, n)] = 1;
    }
  }

  PlanningRecord plan_frame(Environment& env) {
    NetworkState& st = env.state();
    AssociationResult assoc = associate(env);

    RetrainPlan plan;
    plan.retrain.assign(static_cast<std::size_t>(st.active_mus), 0);
    plan.predicted.assign(static_cast<std::size_t>(st.active_mus), 0.0);
    const double frame_s = cfg_.slots_per_frame * cfg_.slot_duration_s;
    for (int n = 0; n < st.active_mus; ++n) {
      double decayed_base =
          st.accuracy_base[static_cast<std::size_t>(n)] *
          std::exp(-cfg_.accuracy.decay_rate *
                   st.model_age_s[static_cast<std::size_t>(n)]);
      double pred = frame_accuracy_predicted(
          decayed_base, cfg_.accuracy,
          st.drift_nats[static_cast<std::size_t>(n)], frame_s);
      plan.predicted[static_cast<std::size_t>(n)] = pred;
      plan.retrain[static_cast<std::size_t>(n)] =
          retrain_decision(pred, cfg_.accuracy_threshold) ? 1 : 0;
    }
    set_retrain_flags(st, plan.retrain);

    if (!traits_.learned_allocation) compute_fixed_shares(st);

    PlanningRecord rec;
    rec.frame = st.frame;
    rec.association = st.association;
    rec.predicted_accuracy = plan.predicted;
    rec.retrain = plan.retrain;
    rec.objective = assoc.objective;
    return rec;
  }

  PlanningRecord plan_single_timescale(Environment& env) {
    NetworkState& st = env.state();
    AssociationResult assoc = associate(env);
    std::vector<std::uint8_t> retrain(static_cast<std::size_t>(st.active_mus), 0);
    std::vector<double> inst(static_cast<std::size_t>(st.active_mus), 0.0);
    for (int n = 0; n < st.active_mus; ++n) {
      inst[static_cast<std::size_t>(n)] = st.accuracy[static_cast<std::size_t>(n)];
      retrain[static_cast<std::size_t>(n)] =
          retrain_decision(st.accuracy[static_cast<std::size_t>(n)],
                           cfg_.accuracy_threshold)
              ? 1
              : 0;
    }
    set_retrain_flags(st, retrain);
    PlanningRecord rec;
    rec.frame = st.frame;
    rec.association = st.association;
    rec.predicted_accuracy = inst;
    rec.retrain = retrain;
    rec.objective = assoc.objective;
    return rec;
  }

  void compute_fixed_shares(const NetworkState& st) {
    fixed_share_.assign(static_cast<std::size_t>(cfg_.num_bs), 0.0);
    for (int m = 0; m < cfg_.num_bs; ++m) {
      int count = 0;
      for (int n = 0; n < st.active_mus; ++n)
        if (st.associated(m, n)) ++count;
      if (count > 0)
        fixed_share_[static_cast<std::size_t>(m)] =
            (cfg_.bs_compute_flops - cfg_.bs_reserved_flops) / count;
    }
  }

  // ---- the short-timescale step ------------------------------------------

  SlotRecord control_record(const Environment& env, long t) {
    const NetworkState& st = env.state();
    SlotRecord rec;
    rec.slot = t;
    rec.frame = st.frame;
    rec.scheme = scheme_;
    rec.seed = seed_;
    rec.control_slot = true;
    rec.mean_delay_s = cfg_.plan_overhead_s;
    rec.p95_delay_s = cfg_.plan_overhead_s;
    fill_accuracy(rec, st);
    rec.budget_utilization.assign(static_cast<std::size_t>(cfg_.num_bs), 0.0);
    return rec;
  }

  void fill_accuracy(SlotRecord& rec, const NetworkState& st) {
    rec.mu_accuracy.clear();
    double sum = 0.0;
    for (int n = 0; n < st.active_mus; ++n) {
      rec.mu_accuracy.push_back(st.accuracy[static_cast<std::size_t>(n)]);
      sum += st.accuracy[static_cast<std::size_t>(n)];
    }
    rec.mean_accuracy = st.active_mus > 0 ? sum / st.active_mus : 0.0;
  }

  SlotRecord task_slot(Environment& env, long t) {
    NetworkState& st = env.state();
    const int M = st.num_bs;
    const int Nmax = st.max_mus;

    std::vector<double> queue_pre(st.queue_bits.begin(), st.queue_bits.end());
    // queue_pre was captured after arrival; reconstruct pre-arrival backlog
    for (int n = 0; n < st.active_mus; ++n)
      queue_pre[static_cast<std::size_t>(n)] -=
          st.task_bits[static_cast<std::size_t>(n)] -
          st.local_bits[static_cast<std::size_t>(n)];

    AllocationDecision alloc = decide(env);

    // Apply offloads to the queues and tally per-MU and per-BS totals.
    std::vector<double> offload_total(static_cast<std::size_t>(Nmax), 0.0);
    st.budget_used.assign(static_cast<std::size_t>(M), 0.0);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < st.active_mus; ++n) {
        double off = alloc.offload_bits[alloc.pair(m, n)];
        offload_total[static_cast<std::size_t>(n)] += off;
        st.budget_used[static_cast<std::size_t>(m)] +=
            alloc.compute_flops[alloc.pair(m, n)];
      }
    for (int n = 0; n < st.active_mus; ++n)
      st.queue_bits[static_cast<std::size_t>(n)] =
          std::max(0.0, st.queue_bits[static_cast<std::size_t>(n)] -
                            offload_total[static_cast<std::size_t>(n)]);

    // Observations feed the twin before any retraining is sized.
    for (int n = 0; n < st.active_mus; ++n) {
      for (int m = 0; m < M; ++m) {
        double up = alloc.offload_bits[alloc.pair(m, n)];
        if (up <= 0.0) continue;
        auto per_class = env.split_by_class(n, up);
        env.twin().observe_upload(st, m, n, per_class);
      }
      if (traits_.full_retrain && offload_total[static_cast<std::size_t>(n)] > 0.0)
        env.twin().accumulate_store(n, offload_total[static_cast<std::size_t>(n)],
                                    env.twin().observed(n));
      env.refresh_accuracy(n);
    }

    // Retraining work: synthetic generation, physical collection, or the
    // one-shot full retrain; all charged through the retrain/dt components.
    DelayBreakdown delays(M, Nmax);
    int retrain_events = 0;
    bool breakout = false;

    if (traits_.breakout_enabled && !retrain_demand_feasible(env, alloc))
      breakout = true;

    if (!breakout) retrain_events = run_retraining(env, alloc, delays);

    assemble_delays(env, alloc, delays);

    // Pair-level realized delays feed the planner's cost history.
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < st.active_mus; ++n) {
        if (!st.associated(m, n)) continue;
        std::size_t p = alloc.pair(m, n);
        double realized = delays.trans[p] + delays.comp[p] + delays.dt[p] +
                          delays.retrain[p];
        if (traits_.per_slot_planning) {
          estimator_.observe(m, n, realized);
        } else {
          frame_delay_sum_[p] += realized;
          frame_delay_count_[p] += 1;
        }
      }

    SlotRecord rec;
    rec.slot = t;
    rec.frame = st.frame;
    rec.scheme = scheme_;
    rec.seed = seed_;
    rec.retrain_events = retrain_events;
    rec.breakout = breakout;

    std::vector<double> mu_delays;
    for (int n = 0; n < st.active_mus; ++n)
      mu_delays.push_back(delays.effective[static_cast<std::size_t>(n)]);
    if (breakout) {
      double penalty = breakout_penalty();
      std::fill(mu_delays.begin(), mu_delays.end(), penalty);
    }
    rec.mu_delay_s = mu_delays;
    double mean_delay = 0.0;
    for (double d : mu_delays) mean_delay += d;
    mean_delay = mu_delays.empty() ? 0.0 : mean_delay / mu_delays.size();
    if (traits_.per_slot_planning) mean_delay += cfg_.plan_overhead_s;
    rec.mean_delay_s = mean_delay;
    rec.p95_delay_s = mu_delays.empty() ? mean_delay : percentile(mu_delays, 95.0);
    if (!breakout) feasible_delays_.push_back(mean_delay);

    fill_accuracy(rec, st);
    rec.budget_utilization.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
      rec.budget_utilization[static_cast<std::size_t>(m)] =
          st.budget_used[static_cast<std::size_t>(m)] / cfg_.bs_compute_flops;

    // Conservation residual: arrivals vs local + offload + queue delta.
    double worst_residual = 0.0;
    for (int n = 0; n < st.active_mus; ++n) {
      std::size_t i = static_cast<std::size_t>(n);
      double delta_queue = st.queue_bits[i] - queue_pre[i];
      double residual =
          st.task_bits[i] - st.local_bits[i] - offload_total[i] - delta_queue;
      worst_residual = std::max(worst_residual, std::fabs(residual));
    }
    rec.conservation_residual_bits = worst_residual;

    std::span<const double> tasks(st.task_bits.data(),
                                  static_cast<std::size_t>(st.active_mus));
    std::span<const double> locals(st.local_bits.data(),
                                   static_cast<std::size_t>(st.active_mus));
    std::span<const double> offs(offload_total.data(),
                                 static_cast<std::size_t>(st.active_mus));
    rec.reward = slot_reward(rec.mean_delay_s, tasks, locals, offs,
                             cfg_.reward_weight);

    // Training credit: exact per-MU decomposition of the slot reward. The
    // delay enters the objective as a mean (weight 1/N per MU), the
    // conservation mismatch as a sum (full weight per MU); budget-hogging
    // externalities reach earlier decisions through the bootstrap chain.
    std::vector<double> mu_cost(static_cast<std::size_t>(st.active_mus), 0.0);
    for (int n = 0; n < st.active_mus; ++n) {
      std::size_t i = static_cast<std::size_t>(n);
      double delay_share = mu_delays.empty()
                               ? 0.0
                               : mu_delays[i] / static_cast<double>(st.active_mus);
      double mismatch = std::fabs(st.task_bits[i] - st.local_bits[i] -
                                  offload_total[i]);
      mu_cost[i] = delay_share + cfg_.reward_weight * mismatch;
    }
    finish_slot_transitions(mu_cost);
    return rec;
  }

  // Sequential per-pair decisions; both the learned and the fixed policy
  // walk pairs in the same canonical order.
  AllocationDecision decide(Environment& env) {
    NetworkState& st = env.state();
    AllocationDecision alloc(st.num_bs, st.max_mus);
    std::vector<double> remaining(static_cast<std::size_t>(st.num_bs),
                                  cfg_.bs_compute_flops - cfg_.bs_reserved_flops);
    std::vector<double> pending(st.queue_bits.begin(), st.queue_bits.end());

    std::vector<int> assoc_load(static_cast<std::size_t>(st.num_bs), 0);
    for (int m = 0; m < st.num_bs; ++m)
      for (int n = 0; n < st.active_mus; ++n)
        if (st.associated(m, n)) ++assoc_load[static_cast<std::size_t>(m)];
    std::vector<int> pairs_left = assoc_load;

    for (int n = 0; n < st.active_mus; ++n) {
      int serving_left = 0;
      for (int m = 0; m < st.num_bs; ++m)
        if (st.associated(m, n)) ++serving_left;
      for (int m = 0; m < st.num_bs; ++m) {
        if (!st.associated(m, n)) continue;
        PairAllocation pa;
        if (agent_ && traits_.learned_allocation) {
          std::vector<double> s = encoder_.encode(
              remaining, pending, env.twin().generation_features(), assoc_load,
              pairs_left, m, n);
          int a = agent_->act(s);
          pa = decode_action(a, pending[static_cast<std::size_t>(n)],
                             cfg_.bs_compute_flops,
                             remaining[static_cast<std::size_t>(m)]);
          if (!action_histogram_.empty())
            ++action_histogram_[static_cast<std::size_t>(a)];
          record_transition(std::move(s), a, n, serving_left);
        } else {
          pa.compute_flops = std::min(fixed_share_[static_cast<std::size_t>(m)],
                                      remaining[static_cast<std::size_t>(m)]);
          pa.offload_bits = pa.compute_flops > 0.0
                                ? pending[static_cast<std::size_t>(n)] / serving_left
                                : 0.0;
        }
        alloc.offload_bits[alloc.pair(m, n)] = pa.offload_bits;
        alloc.compute_flops[alloc.pair(m, n)] = pa.compute_flops;
        remaining[static_cast<std::size_t>(m)] -= pa.compute_flops;
        pending[static_cast<std::size_t>(n)] -= pa.offload_bits;
        --pairs_left[static_cast<std::size_t>(m)];
        --serving_left;
      }
    }
    return alloc;
  }

  // Single-timescale feasibility: a per-slot retrain decision must complete
  // its training pass within the slot; the implied compute rate joins the
  // Eq.-(6) check.
  bool retrain_demand_feasible(Environment& env, const AllocationDecision& alloc) {
    NetworkState& st = env.state();
    bool any_demand = false;
    for (int m = 0; m < st.num_bs; ++m) {
      std::vector<double> allocs;
      double demand = 0.0;
      for (int n = 0; n < st.active_mus; ++n) {
        allocs.push_back(alloc.compute_flops[alloc.pair(m, n)]);
        if (!st.retrain_flag[st.pair(m, n)]) continue;
        double up = alloc.offload_bits[alloc.pair(m, n)];
        if (up <= 0.0) continue;
        double batch = up;
        if (traits_.dt_generation)
          batch += env.twin().equivalent_generation_bits(st, m, n, up,
                                                         cfg_.dt_scale);
        demand += batch * cfg_.flops_per_bit / cfg_.slot_duration_s;
      }
      if (demand <= 0.0) continue;
      any_demand = true;
      allocs.push_back(demand);
      if (!budget_check(allocs, cfg_.bs_compute_flops, cfg_.bs_reserved_flops))
        return false;
    }
    (void)any_demand;
    return true;
  }

  int run_retraining(Environment& env, AllocationDecision& alloc,
                     DelayBreakdown& delays) {
    NetworkState& st = env.state();
    int events = 0;
    for (int n = 0; n < st.active_mus; ++n) {
      bool flagged = false;
      for (int m = 0; m < st.num_bs; ++m)
        if (st.retrain_flag[st.pair(m, n)]) flagged = true;
      if (!flagged) continue;

      if (traits_.full_retrain) {
        events += full_retrain_event(env, alloc, delays, n) ? 1 : 0;
        continue;
      }

      double real_extra = 0.0, generated = 0.0;
      std::vector<double> batch_dist(static_cast<std::size_t>(cfg_.num_classes), 0.0);
      double batch_mass = 0.0;
      for (int m = 0; m < st.num_bs; ++m) {
        if (!st.retrain_flag[st.pair(m, n)]) continue;
        std::size_t p = alloc.pair(m, n);
        double up = alloc.offload_bits[p];
        double lambda = alloc.compute_flops[p];
        if (up <= 0.0 || lambda <= 0.0) continue;

        ClassDistribution q = env.twin().pair_observed(st, m, n);
        for (int k = 0; k < cfg_.num_classes; ++k) {
          batch_dist[static_cast<std::size_t>(k)] += up * q[static_cast<std::size_t>(k)];
        }
        batch_mass += up;

        if (traits_.dt_generation) {
          GeneratedBatch g = env.twin().generate(st, m, n, up, cfg_.dt_scale);
          delays.dt[p] = dt_compute_delay(g.size_bits, lambda, cfg_.flops_per_bit);
          generated += g.size_bits;
          for (int k = 0; k < cfg_.num_classes; ++k)
            batch_dist[static_cast<std::size_t>(k)] +=
                g.size_bits * g.dist[static_cast<std::size_t>(k)];
          batch_mass += g.size_bits;
        }
        if (traits_.physical_collection) {
          double collected = cfg_.physical_collection_fraction *
                             env.twin().equivalent_generation_bits(
                                 st, m, n, up, cfg_.dt_scale);
          alloc.upload_extra_bits[p] = collected;
          delays.retrain[p] =
              dt_compute_delay(collected, lambda, cfg_.flops_per_bit);
          real_extra += collected;
          for (int k = 0; k < cfg_.num_classes; ++k)
            batch_dist[static_cast<std::size_t>(k)] +=
                collected * q[static_cast<std::size_t>(k)];
          batch_mass += collected;
        }
      }

      double upload_total = 0.0;
      for (int m = 0; m < st.num_bs; ++m)
        upload_total += alloc.offload_bits[alloc.pair(m, n)];
      double real_bits = upload_total + real_extra;
      if (real_bits + generated <= 0.0) continue;  // no data, no update

      std::size_t i = static_cast<std::size_t>(n);
      double jump = apply_retrain(st.accuracy[i], real_bits, generated,
                                  cfg_.accuracy);
      st.accuracy_base[i] = jump;
      st.model_age_s[i] = 0.0;
      if (batch_mass > 0.0) {
        for (auto& x : batch_dist) x /= batch_mass;
        env.twin().absorb_batch(n, batch_mass, ClassDistribution(batch_dist));
      }
      env.refresh_accuracy(n);
      ++events;
    }
    return events;
  }

  bool full_retrain_event(Environment& env, const AllocationDecision& alloc,
                          DelayBreakdown& delays, int n) {
    NetworkState& st = env.state();
    double store = env.twin().store_bits(n);
    if (store <= 0.0) return false;
    double lambda_total = 0.0;
    for (int m = 0; m < st.num_bs; ++m)
      if (st.retrain_flag[st.pair(m, n)])
        lambda_total += alloc.compute_flops[alloc.pair(m, n)];
    if (lambda_total <= 0.0) return false;  // retry on a later slot

    for (int m = 0; m < st.num_bs; ++m) {
      if (!st.retrain_flag[st.pair(m, n)]) continue;
      std::size_t p = alloc.pair(m, n);
      double lambda = alloc.compute_flops[p];
      if (lambda <= 0.0) continue;
      double share = store * lambda / lambda_total;
      delays.retrain[p] = dt_compute_delay(share, lambda, cfg_.flops_per_bit);
    }

    std::size_t i = static_cast<std::size_t>(n);
    st.accuracy_base[i] =
        apply_retrain(st.accuracy[i], store, 0.0, cfg_.accuracy);
    st.model_age_s[i] = 0.0;
    env.twin().replace_trained(n, env.twin().store_distribution(n));
    env.twin().reset_store(n);
    env.refresh_accuracy(n);
    // Model is rebuilt: drop the flag for the remainder of the frame.
    for (int m = 0; m < st.num_bs; ++m) st.retrain_flag[st.pair(m, n)] = 0;
    return true;
  }

  void assemble_delays(Environment& env, const AllocationDecision& alloc,
                       DelayBreakdown& delays) {
    NetworkState& st = env.state();
    for (int n = 0; n < st.active_mus; ++n) {
      std::size_t i = static_cast<std::size_t>(n);
      delays.local[i] =
          local_delay(st.local_bits[i], cfg_.local_rate_s_per_bit);
      double service = delays.local[i];
      double retrain_part = 0.0;
      bool retraining = false;
      for (int m = 0; m < st.num_bs; ++m) {
        if (!st.associated(m, n)) continue;
        std::size_t p = alloc.pair(m, n);
        double bits_tx = alloc.offload_bits[p] + alloc.upload_extra_bits[p];
        delays.trans[p] = transmission_delay(bits_tx, cfg_.downlink_bits,
                                             env.uplink_rate_for(m, n), true);
        delays.comp[p] = bs_compute_delay(
            alloc.offload_bits[p], alloc.compute_flops[p], cfg_.flops_per_bit);
        service = std::max(service, delays.trans[p] + delays.comp[p]);
        if (st.retrain_flag[st.pair(m, n)]) retraining = true;
        retrain_part = std::max(retrain_part, delays.dt[p] + delays.retrain[p]);
      }
      // full-retrain events clear the flag but must still charge this slot
      if (retrain_part > 0.0) retraining = true;
      delays.effective[i] = effective_delay(service, retraining, retrain_part);
    }
    for (int m = 0; m < st.num_bs; ++m) {
      double worst = 0.0;
      for (int n = 0; n < st.active_mus; ++n) {
        if (!st.associated(m, n)) continue;
        std::size_t p = alloc.pair(m, n);
        worst = std::max(worst, delays.trans[p] + delays.comp[p]);
      }
      delays.bs_total[static_cast<std::size_t>(m)] = worst;
    }
  }

  double breakout_penalty() {
    double base = 1.0;
    if (!feasible_delays_.empty()) base = percentile(feasible_delays_, 95.0);
    return cfg_.breakout_penalty_factor * base;
  }

  // ---- experience wiring ---------------------------------------------------

  void record_transition(std::vector<double> state, int action, int mu,
                         int mu_pairs_left) {
    if (!agent_) return;
    if (dangling_) {
      dangling_->next_state = state;
      agent_->observe(std::move(*dangling_));
      dangling_.reset();
    }
    if (!slot_exps_.empty()) {
      slot_exps_.back().next_state = state;
    }
    Experience e;
    e.state = std::move(state);
    e.action = action;
    slot_exps_.push_back(std::move(e));
    exp_mu_.push_back(mu);
    // first decision for the MU sees the full remaining serving count
    if (static_cast<std::size_t>(mu) >= mu_pair_count_.size())
      mu_pair_count_.resize(static_cast<std::size_t>(mu) + 1, 0);
    mu_pair_count_[static_cast<std::size_t>(mu)] =
        std::max(mu_pair_count_[static_cast<std::size_t>(mu)], mu_pairs_left);
  }

  void finish_slot_transitions(std::span<const double> mu_cost) {
    if (!agent_ || slot_exps_.empty()) {
      slot_exps_.clear();
      exp_mu_.clear();
      mu_pair_count_.assign(mu_pair_count_.size(), 0);
      return;
    }
    // Training-side normalization; recorded rewards stay in natural units.
    for (std::size_t i = 0; i < slot_exps_.size(); ++i) {
      int n = exp_mu_[i];
      int pairs = std::max(1, mu_pair_count_[static_cast<std::size_t>(n)]);
      double own = static_cast<std::size_t>(n) < mu_cost.size()
                       ? mu_cost[static_cast<std::size_t>(n)] / pairs
                       : 0.0;
      slot_exps_[i].reward = -own * cfg_.agent.reward_scale;
      std::size_t phi_level = static_cast<std::size_t>(slot_exps_[i].action) / 5;
      dbg_phi_reward_[phi_level] += slot_exps_[i].reward;
      dbg_phi_count_[phi_level] += 1;
    }
    // all but the last have a next_state already
    for (std::size_t i = 0; i + 1 < slot_exps_.size(); ++i)
      agent_->observe(std::move(slot_exps_[i]));
    dangling_ = std::move(slot_exps_.back());
    slot_exps_.clear();
    exp_mu_.clear();
    mu_pair_count_.assign(mu_pair_count_.size(), 0);
  }

  void finish_episode() {
    if (!agent_) return;
    if (dangling_) {
      dangling_->terminal = true;
      dangling_->next_state = dangling_->state;
      agent_->observe(std::move(*dangling_));
      dangling_.reset();
    }
    slot_exps_.clear();
    exp_mu_.clear();
  }

  const ScenarioConfig cfg_;
  const SchemeKind scheme_;
  const SchemeTraits traits_;
  const std::uint64_t seed_;
  StateEncoder encoder_;
  PairCostEstimator estimator_;
  std::unique_ptr<DqnAgent> agent_;
  std::vector<double> fixed_share_;
  std::vector<double> frame_delay_sum_;
  std::vector<long> frame_delay_count_;
  std::vector<double> feasible_delays_;
  std::vector<Experience> slot_exps_;
  std::vector<int> exp_mu_;
  std::vector<int> mu_pair_count_;
  std::optional<Experience> dangling_;
  bool anneal_online_ = false;
  std::vector<long> action_histogram_;
  double dbg_phi_reward_[5] = {0, 0, 0, 0, 0};
  long dbg_phi_count_[5] = {0, 0, 0, 0, 0};
};

}  // namespace detail

inline RunResult run_simulation(const ScenarioConfig& cfg, SchemeKind scheme,
                                std::uint64_t seed) {
  detail::SchemeRunner runner(cfg, scheme, seed);
  return runner.run();
}

inline RunResult run_baseline_no_il(const ScenarioConfig& cfg, std::uint64_t seed) {
  return run_simulation(cfg, SchemeKind::NoIncrementalLearning, seed);
}
inline RunResult run_baseline_no_dt(const ScenarioConfig& cfg, std::uint64_t seed) {
  return run_simulation(cfg, SchemeKind::NoDigitalTwin, seed);
}
inline RunResult run_baseline_single_timescale(const ScenarioConfig& cfg,
                                               std::uint64_t seed) {
  return run_simulation(cfg, SchemeKind::SingleTimescale, seed);
}

}  // namespace twinflow

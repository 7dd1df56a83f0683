#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "twinflow/errors.hpp"
#include "twinflow/state.hpp"

namespace twinflow {

// Uplink time for one pair: (task chunk + fixed downlink) / rate.
inline double transmission_delay(double task_bits, double downlink_bits,
                                 double rate_bps, bool connected) {
  if (!connected) return 0.0;
  if (rate_bps <= 0.0)
    throw ZeroRateWhileConnected("connected pair with zero rate");
  return (task_bits + downlink_bits) / rate_bps;
}

inline double local_delay(double bits, double seconds_per_bit) {
  return bits * seconds_per_bit;
}

inline double bs_compute_delay(double bits, double flops, double flops_per_bit) {
  if (bits <= 0.0) return 0.0;
  if (flops <= 0.0)
    throw ZeroAllocationWithWork("work pending but zero compute allocated");
  return bits * flops_per_bit / flops;
}

// DT-generated (or retraining-batch) processing time, same arithmetic.
inline double dt_compute_delay(double bits, double flops, double flops_per_bit) {
  if (bits <= 0.0) return 0.0;
  if (flops <= 0.0)
    throw ZeroAllocationWithWork("retrain data pending but zero compute");
  return bits * flops_per_bit / flops;
}

// Per-BS compute budget: reserved + sum of allocations must fit.
inline bool budget_check(std::span<const double> allocations, double budget,
                         double reserved) {
  double total = reserved;
  for (double a : allocations) total += a;
  return total <= budget * (1.0 + 1e-12) + 1e-9;
}

// Parallel service at a BS: the slowest pair gates the total.
inline double bs_total_delay(std::span<const double> pair_delays) {
  double worst = 0.0;
  for (double d : pair_delays) worst = std::max(worst, d);
  return worst;
}

inline double effective_delay(double service_delay, bool retraining,
                              double retrain_delay) {
  return service_delay + (retraining ? retrain_delay : 0.0);
}

// Short-timescale decision variables, one entry per (bs, mu) pair.
struct AllocationDecision {
  int num_bs = 0;
  int max_mus = 0;
  std::vector<double> offload_bits;    // Q_{m,n}
  std::vector<double> compute_flops;   // lambda_{m,n}
  std::vector<double> upload_extra_bits;  // physically collected retrain data

  AllocationDecision() = default;
  AllocationDecision(int m, int n)
      : num_bs(m),
        max_mus(n),
        offload_bits(static_cast<std::size_t>(m) * n, 0.0),
        compute_flops(static_cast<std::size_t>(m) * n, 0.0),
        upload_extra_bits(static_cast<std::size_t>(m) * n, 0.0) {}

  std::size_t pair(int m, int n) const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(max_mus) +
           static_cast<std::size_t>(n);
  }
};

// Per-slot delay table. Pair matrices are M x N_max like NetworkState.
struct DelayBreakdown {
  int num_bs = 0;
  int max_mus = 0;
  std::vector<double> trans;      // M*N uplink (task chunk + any collected data)
  std::vector<double> comp;       // M*N task processing
  std::vector<double> dt;         // M*N DT-generated data processing
  std::vector<double> retrain;    // M*N physical retrain-batch processing
  std::vector<double> local;      // N
  std::vector<double> effective;  // N, service + retrain terms
  std::vector<double> bs_total;   // M, Eq.-(7)-style parallel max

  DelayBreakdown() = default;
  DelayBreakdown(int m, int n)
      : num_bs(m),
        max_mus(n),
        trans(static_cast<std::size_t>(m) * n, 0.0),
        comp(static_cast<std::size_t>(m) * n, 0.0),
        dt(static_cast<std::size_t>(m) * n, 0.0),
        retrain(static_cast<std::size_t>(m) * n, 0.0),
        local(static_cast<std::size_t>(n), 0.0),
        effective(static_cast<std::size_t>(n), 0.0),
        bs_total(static_cast<std::size_t>(m), 0.0) {}

  std::size_t pair(int m, int n) const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(max_mus) +
           static_cast<std::size_t>(n);
  }
};

}  // namespace twinflow

#pragma once

#include <cmath>

#include "twinflow/config.hpp"
#include "twinflow/errors.hpp"
#include "twinflow/rng.hpp"

namespace twinflow {

struct LinkBudget {
  double gain = 0.0;
  double snr = 0.0;
  double rate_bps = 0.0;
};

// Mean channel gain at distance d: log-distance path loss.
inline double mean_channel_gain(double distance_m, const PathLossModel& pl) {
  if (distance_m <= 0.0) throw ZeroDistance("distance must be > 0");
  return pl.reference_gain *
         std::pow(distance_m / pl.reference_distance_m, -pl.exponent);
}

// Path loss times Rayleigh power fading (Exp(1), strictly positive).
inline double channel_gain(double distance_m, const PathLossModel& pl,
                           Rng& rng) {
  return mean_channel_gain(distance_m, pl) * rng.exponential();
}

inline double snr(double tx_power_w, double gain, double noise_power_w) {
  return tx_power_w * gain / noise_power_w;
}

inline double uplink_rate(double bandwidth_hz, bool connected,
                          double snr_linear) {
  if (!connected) return 0.0;
  return bandwidth_hz * std::log2(1.0 + snr_linear);
}

inline LinkBudget make_link_budget(double distance_m, bool connected,
                                   const ScenarioConfig& cfg, Rng& rng) {
  LinkBudget lb;
  lb.gain = channel_gain(distance_m, cfg.pathloss, rng);
  lb.snr = snr(cfg.tx_power_w, lb.gain, cfg.noise_power_w);
  lb.rate_bps = uplink_rate(cfg.bandwidth_hz, connected, lb.snr);
  return lb;
}

}  // namespace twinflow

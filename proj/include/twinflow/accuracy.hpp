#pragma once

#include <algorithm>
#include <cmath>

namespace twinflow {

// Parametric model accuracy dynamics: exponential age decay, a penalty
// proportional to the divergence between the live data distribution and the
// one the model was trained on, and a logarithmic gain from retraining data.
struct AccuracyModel {
  double c_max = 0.95;          // attainable ceiling
  double decay_rate = 0.08;     // 1/s, age decay
  double drift_gain = 0.35;     // accuracy lost per nat of distribution drift
  double data_gain = 0.02;      // jump scale per retrain batch
  double ref_size_bits = 2e8;   // batch size that saturates the log gain
};

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Accuracy t seconds after a retrain that left the model at c0, under a
// current drift of `drift_nats`.
inline double accuracy_curve(double c0, const AccuracyModel& m,
                             double drift_nats, double t_s) {
  return clamp01(c0 * std::exp(-m.decay_rate * t_s) -
                 m.drift_gain * drift_nats);
}

// Incremental-learning jump. The caller resets the model age afterwards.
inline double apply_retrain(double accuracy, double real_bits,
                            double generated_bits, const AccuracyModel& m) {
  double batch = real_bits + generated_bits;
  return std::min(m.c_max,
                  accuracy + m.data_gain * std::log1p(batch / m.ref_size_bits));
}

}  // namespace twinflow

#pragma once

#include <vector>

#include "twinflow/rng.hpp"
#include "twinflow/state.hpp"

namespace twinflow {

// Random waypoint inside a square arena: each MU walks toward its target at
// a per-leg speed, drawing a fresh target (and speed) on arrival.
class MobilityModel {
 public:
  MobilityModel() = default;
  MobilityModel(double arena_m, Interval speed_mps)
      : arena_m_(arena_m), speed_(speed_mps) {}

  void init(std::vector<Vec2>& positions, Rng& rng) {
    waypoints_.resize(positions.size());
    speeds_.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      positions[i] = random_point(rng);
      waypoints_[i] = random_point(rng);
      speeds_[i] = rng.uniform(speed_.lo, speed_.hi);
    }
  }

  // Each MU moves at most speed * dt toward its waypoint.
  void step(std::vector<Vec2>& positions, double dt, Rng& rng) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
      Vec2& p = positions[i];
      const Vec2& w = waypoints_[i];
      double d = pair_distance(p, w);
      double reach = speeds_[i] * dt;
      if (d <= reach) {
        p = w;
        waypoints_[i] = random_point(rng);
        speeds_[i] = rng.uniform(speed_.lo, speed_.hi);
      } else if (d > 0.0) {
        p.x += (w.x - p.x) / d * reach;
        p.y += (w.y - p.y) / d * reach;
      }
    }
  }

  double arena_size() const { return arena_m_; }

 private:
  Vec2 random_point(Rng& rng) {
    return {rng.uniform(0.0, arena_m_), rng.uniform(0.0, arena_m_)};
  }

  double arena_m_ = 1000.0;
  Interval speed_{1.0, 10.0};
  std::vector<Vec2> waypoints_;
  std::vector<double> speeds_;
};

struct TaskSample {
  double total_bits = 0.0;
  double local_bits = 0.0;  // pinned-local share
};

inline TaskSample sample_task(const ScenarioConfig& cfg, Rng& rng) {
  TaskSample t;
  t.total_bits = rng.uniform(cfg.task_size_bits.lo, cfg.task_size_bits.hi);
  t.local_bits = cfg.local_fraction * t.total_bits;
  return t;
}

}  // namespace twinflow

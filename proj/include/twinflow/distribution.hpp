#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "twinflow/errors.hpp"

namespace twinflow {

// Discrete distribution over the K task classes.
struct ClassDistribution {
  std::vector<double> p;

  ClassDistribution() = default;
  explicit ClassDistribution(std::vector<double> probs) : p(std::move(probs)) {}
  static ClassDistribution uniform(int k) {
    return ClassDistribution(std::vector<double>(static_cast<std::size_t>(k),
                                                 1.0 / k));
  }
  std::size_t size() const { return p.size(); }
  double operator[](std::size_t i) const { return p[i]; }
};

// KL(p || q) in nats; +inf when q lacks support where p has mass.
inline double kl_divergence(const ClassDistribution& p,
                            const ClassDistribution& q) {
  if (p.size() != q.size())
    throw DimensionMismatch("KL of distributions with different supports");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;  // 0 * log(0/q) = 0
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

// argmin_{p in candidates} KL(p || q); ties break toward the lowest index.
inline std::size_t optimal_generation_index(
    const ClassDistribution& q, std::span<const ClassDistribution> candidates) {
  if (candidates.empty())
    throw EmptyCandidateSet("no candidate generation distributions");
  std::size_t best = 0;
  double best_kl = kl_divergence(candidates[0], q);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    double kl = kl_divergence(candidates[i], q);
    if (kl < best_kl) {
      best_kl = kl;
      best = i;
    }
  }
  return best;
}

inline const ClassDistribution& optimal_generation_distribution(
    const ClassDistribution& q, std::span<const ClassDistribution> candidates) {
  return candidates[optimal_generation_index(q, candidates)];
}

// Empirical class frequencies with additive smoothing.
inline ClassDistribution observe_distribution(std::span<const double> counts,
                                              double epsilon = 1e-6) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total <= 0.0) throw AllZeroCounts("no observed data to normalize");
  ClassDistribution q;
  q.p.resize(counts.size());
  double denom = total + epsilon * static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    q.p[i] = (counts[i] + epsilon) / denom;
  return q;
}

struct GeneratedBatch {
  double size_bits = 0.0;
  ClassDistribution dist;
};

// Generated size: delta times the Euclidean norm of the slot's per-class
// upload vector, spread over the classes by the chosen distribution.
inline GeneratedBatch dt_data_size(double delta, const ClassDistribution& p,
                                   std::span<const double> per_class_bits) {
  double norm = 0.0;
  for (double b : per_class_bits) norm += b * b;
  GeneratedBatch g;
  g.size_bits = delta * std::sqrt(norm);
  g.dist = p;
  return g;
}

}  // namespace twinflow

#pragma once

#include <vector>

#include "twinflow/errors.hpp"
#include "twinflow/rng.hpp"

namespace twinflow {

struct Experience {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// Fixed-capacity ring buffer with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {}

  void push(Experience e) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(e));
    } else {
      items_[head_] = std::move(e);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::vector<const Experience*> sample(std::size_t batch, Rng& rng) const {
    if (items_.empty()) throw EmptyBuffer("sample from empty replay buffer");
    std::vector<const Experience*> out(batch);
    for (auto& p : out) p = &items_[rng.below(items_.size())];
    return out;
  }

  const Experience& at(std::size_t i) const { return items_[i]; }
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  void clear() {
    items_.clear();
    head_ = 0;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Experience> items_;
};

}  // namespace twinflow

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "twinflow/errors.hpp"
#include "twinflow/rng.hpp"

namespace twinflow {

// Fully connected layer, weights row-major (out x in).
struct DenseLayer {
  int in = 0, out = 0;
  std::vector<double> w;
  std::vector<double> b;

  DenseLayer() = default;
  DenseLayer(int in_dim, int out_dim)
      : in(in_dim),
        out(out_dim),
        w(static_cast<std::size_t>(in_dim) * out_dim, 0.0),
        b(static_cast<std::size_t>(out_dim), 0.0) {}
};

struct MlpCache {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;  // per layer, pre-activation
  std::vector<std::vector<double>> act;  // per layer, post-activation
};

struct MlpGradients {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;
};

// Affine-ReLU-affine-ReLU-affine value network: two hidden layers (128 by
// default) and a linear head of one Q-value per action.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(int input_dim, int hidden, int actions)
      : layers_{DenseLayer(input_dim, hidden), DenseLayer(hidden, hidden),
                DenseLayer(hidden, actions)} {}

  void init_weights(Rng& rng) {
    for (auto& l : layers_) {
      double scale = std::sqrt(2.0 / l.in);
      for (auto& x : l.w) x = rng.normal() * scale;
      for (auto& x : l.b) x = 0.0;
    }
  }

  int input_dim() const { return layers_.front().in; }
  int num_actions() const { return layers_.back().out; }
  std::size_t num_layers() const { return layers_.size(); }
  DenseLayer& layer(std::size_t i) { return layers_[i]; }
  const DenseLayer& layer(std::size_t i) const { return layers_[i]; }

  std::vector<double> forward(std::span<const double> x) const {
    MlpCache scratch;
    return forward_cached(x, scratch);
  }

  std::vector<double> forward_cached(std::span<const double> x,
                                     MlpCache& cache) const {
    if (static_cast<int>(x.size()) != input_dim())
      throw DimensionMismatch("input width does not match the network");
    cache.input.assign(x.begin(), x.end());
    cache.pre.resize(layers_.size());
    cache.act.resize(layers_.size());
    const std::vector<double>* in = &cache.input;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const DenseLayer& l = layers_[li];
      auto& pre = cache.pre[li];
      pre.assign(static_cast<std::size_t>(l.out), 0.0);
      for (int o = 0; o < l.out; ++o) {
        double acc = l.b[static_cast<std::size_t>(o)];
        const double* wrow = &l.w[static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) acc += wrow[i] * (*in)[static_cast<std::size_t>(i)];
        pre[static_cast<std::size_t>(o)] = acc;
      }
      auto& act = cache.act[li];
      act = pre;
      if (li + 1 < layers_.size())  // hidden layers rectify, head is linear
        for (auto& v : act) v = v > 0.0 ? v : 0.0;
      in = &act;
    }
    return cache.act.back();
  }

  MlpGradients zero_gradients() const {
    MlpGradients g;
    g.dw.resize(layers_.size());
    g.db.resize(layers_.size());
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      g.dw[li].assign(layers_[li].w.size(), 0.0);
      g.db[li].assign(layers_[li].b.size(), 0.0);
    }
    return g;
  }

  // Accumulates exact gradients of the cached forward pass into `grads`,
  // given dLoss/dOutput of the head.
  void backward(const MlpCache& cache, std::span<const double> dloss_dout,
                MlpGradients& grads) const {
    if (dloss_dout.size() != static_cast<std::size_t>(num_actions()))
      throw DimensionMismatch("loss gradient width does not match the head");
    std::vector<double> delta(dloss_dout.begin(), dloss_dout.end());
    for (std::size_t li = layers_.size(); li-- > 0;) {
      const DenseLayer& l = layers_[li];
      const std::vector<double>& in =
          li == 0 ? cache.input : cache.act[li - 1];
      for (int o = 0; o < l.out; ++o) {
        double d = delta[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        grads.db[li][static_cast<std::size_t>(o)] += d;
        double* gw = &grads.dw[li][static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) gw[i] += d * in[static_cast<std::size_t>(i)];
      }
      if (li == 0) break;
      std::vector<double> prev(static_cast<std::size_t>(l.in), 0.0);
      for (int o = 0; o < l.out; ++o) {
        double d = delta[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        const double* wrow = &l.w[static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) prev[static_cast<std::size_t>(i)] += d * wrow[i];
      }
      const auto& pre_prev = cache.pre[li - 1];
      for (std::size_t i = 0; i < prev.size(); ++i)
        if (pre_prev[i] <= 0.0) prev[i] = 0.0;  // ReLU gate
      delta = std::move(prev);
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.w.size() + l.b.size();
    return n;
  }

  double get_parameter(std::size_t i) const {
    return *locate(const_cast<QNetwork&>(*this), i);
  }
  void set_parameter(std::size_t i, double v) { *locate(*this, i) = v; }

  static double gradient_at(const MlpGradients& g, std::size_t i) {
    for (std::size_t li = 0; li < g.dw.size(); ++li) {
      if (i < g.dw[li].size()) return g.dw[li][i];
      i -= g.dw[li].size();
      if (i < g.db[li].size()) return g.db[li][i];
      i -= g.db[li].size();
    }
    throw IndexOutOfRange("gradient index");
  }

 private:
  static double* locate(QNetwork& net, std::size_t i) {
    for (auto& l : net.layers_) {
      if (i < l.w.size()) return &l.w[i];
      i -= l.w.size();
      if (i < l.b.size()) return &l.b[i];
      i -= l.b.size();
    }
    throw IndexOutOfRange("parameter index");
  }

  std::vector<DenseLayer> layers_;
};

// SGD with momentum and optional global-norm gradient clipping.
class SgdMomentum {
 public:
  SgdMomentum() = default;
  SgdMomentum(double lr, double momentum, double max_grad_norm = 0.0)
      : lr_(lr), momentum_(momentum), max_norm_(max_grad_norm) {}

  void step(QNetwork& net, const MlpGradients& grads) {
    double scale = 1.0;
    if (max_norm_ > 0.0) {
      double sq = 0.0;
      for (const auto& g : grads.dw)
        for (double v : g) sq += v * v;
      for (const auto& g : grads.db)
        for (double v : g) sq += v * v;
      double norm = std::sqrt(sq);
      if (norm > max_norm_) scale = max_norm_ / norm;
    }
    if (vel_w_.empty()) {
      vel_w_.resize(net.num_layers());
      vel_b_.resize(net.num_layers());
      for (std::size_t li = 0; li < net.num_layers(); ++li) {
        vel_w_[li].assign(net.layer(li).w.size(), 0.0);
        vel_b_[li].assign(net.layer(li).b.size(), 0.0);
      }
    }
    for (std::size_t li = 0; li < net.num_layers(); ++li) {
      auto& l = net.layer(li);
      for (std::size_t i = 0; i < l.w.size(); ++i) {
        vel_w_[li][i] = momentum_ * vel_w_[li][i] - lr_ * scale * grads.dw[li][i];
        l.w[i] += vel_w_[li][i];
      }
      for (std::size_t i = 0; i < l.b.size(); ++i) {
        vel_b_[li][i] = momentum_ * vel_b_[li][i] - lr_ * scale * grads.db[li][i];
        l.b[i] += vel_b_[li][i];
      }
    }
  }

  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3;
  double momentum_ = 0.9;
  double max_norm_ = 0.0;
  std::vector<std::vector<double>> vel_w_, vel_b_;
};

}  // namespace twinflow

// Copyright 2026 The HCRMP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "hcrmp/common.hpp"

namespace hcrmp {

/// Fully connected network: tanh hidden layers, linear output.
/// Parameters live in one flat buffer, per layer W (out x in, row-major)
/// followed by b (out).
class Mlp {
 public:
  /// Per-sample activations kept for the backward pass.
  struct Tape {
    std::vector<std::vector<double>> act;  // act[0] input, act[l] output of layer l
  };

  Mlp() = default;

  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ContractViolation("Mlp needs at least an input and an output size");
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      w_off_.push_back(off);
      off += static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]);
      b_off_.push_back(off);
      off += static_cast<std::size_t>(sizes_[l + 1]);
    }
    params_.assign(off, 0.0);
  }

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; the output layer is
  /// additionally scaled by `output_scale`.
  void init(std::mt19937_64& rng, double output_scale = 0.01) {
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      const double scale = (l + 2 == sizes_.size()) ? output_scale : 1.0;
      std::uniform_real_distribution<double> u(-bound, bound);
      const std::size_t end = b_off_[l] + static_cast<std::size_t>(sizes_[l + 1]);
      for (std::size_t i = w_off_[l]; i < end; ++i) params_[i] = u(rng) * scale;
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::span<const double> forward(std::span<const double> x, Tape& tape) const {
    const std::size_t L = layer_count();
    tape.act.resize(L + 1);
    tape.act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < L; ++l) {
      const int in = sizes_[l], out = sizes_[l + 1];
      const double* W = params_.data() + w_off_[l];
      const double* b = params_.data() + b_off_[l];
      const double* a = tape.act[l].data();
      auto& z = tape.act[l + 1];
      z.resize(static_cast<std::size_t>(out));
      const bool hidden = l + 1 < L;
      for (int o = 0; o < out; ++o) {
        const double* row = W + static_cast<std::ptrdiff_t>(o) * in;
        double s = b[o];
        for (int i = 0; i < in; ++i) s += row[i] * a[i];
        z[static_cast<std::size_t>(o)] = hidden ? std::tanh(s) : s;
      }
    }
    return tape.act[L];
  }

  /// Accumulates dLoss/dparams into `grad` given dLoss/doutput.
  void backward(const Tape& tape, std::span<const double> d_out, std::span<double> grad) const {
    const std::size_t L = layer_count();
    std::vector<double> delta(d_out.begin(), d_out.end());
    std::vector<double> prev;
    for (std::size_t l = L; l-- > 0;) {
      const int in = sizes_[l], out = sizes_[l + 1];
      const double* W = params_.data() + w_off_[l];
      double* gW = grad.data() + w_off_[l];
      double* gb = grad.data() + b_off_[l];
      const double* a = tape.act[l].data();
      for (int o = 0; o < out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        gb[o] += d;
        double* grow = gW + static_cast<std::ptrdiff_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += d * a[i];
      }
      if (l == 0) break;
      prev.assign(static_cast<std::size_t>(in), 0.0);
      for (int o = 0; o < out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        const double* row = W + static_cast<std::ptrdiff_t>(o) * in;
        for (int i = 0; i < in; ++i) prev[static_cast<std::size_t>(i)] += row[i] * d;
      }
      for (int i = 0; i < in; ++i) {
        const double h = a[i];  // tanh output of layer l-1
        prev[static_cast<std::size_t>(i)] *= 1.0 - h * h;
      }
      delta.swap(prev);
    }
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> w_off_, b_off_;
  std::vector<double> params_;
};

/// Adam with bias correction.
class Adam {
 public:
  struct Config {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  Adam(std::size_t n, Config cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      params[i] -= cfg_.lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
    }
  }

  long steps() const { return t_; }

 private:
  Config cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// Scales `grad` in place so its L2 norm is at most `max_norm`. Returns the
/// pre-clip norm.
inline double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

}  // namespace hcrmp

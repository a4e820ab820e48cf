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

// Beta-distribution action head. Each action dimension d is
// a_d = 2 x_d - 1 with x_d ~ Beta(alpha_d, beta_d), and
// alpha, beta = 1 + min(softplus(raw), kBetaSaturation) so the density is
// always unimodal.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include "hcrmp/driveworld.hpp"

namespace hcrmp {

inline constexpr std::size_t kActionDim = 2;
inline constexpr std::size_t kActorOutputs = 2 * kActionDim;
inline constexpr double kBetaSaturation = 100.0;

/// psi(x) for x > 0: upward recurrence then the asymptotic series.
inline double digamma(double x) {
  double r = 0.0;
  while (x < 10.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return r + std::log(x) - 0.5 / x -
         f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
}

/// psi'(x) for x > 0.
inline double trigamma(double x) {
  double r = 0.0;
  while (x < 10.0) {
    r += 1.0 / (x * x);
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return r + 1.0 / x + 0.5 * f +
         (f / x) * (1.0 / 6 - f * (1.0 / 30 - f * (1.0 / 42 - f * (1.0 / 30 - f * (5.0 / 66)))));
}

inline double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct BetaParams {
  std::array<double, kActionDim> alpha{};
  std::array<double, kActionDim> beta{};
};

/// Maps the actor's four raw outputs (alpha_0, beta_0, alpha_1, beta_1).
inline BetaParams beta_head(std::span<const double> raw) {
  BetaParams bp;
  for (std::size_t d = 0; d < kActionDim; ++d) {
    bp.alpha[d] = 1.0 + std::min(softplus(raw[2 * d]), kBetaSaturation);
    bp.beta[d] = 1.0 + std::min(softplus(raw[2 * d + 1]), kBetaSaturation);
  }
  return bp;
}

/// d(param)/d(raw) of the head, zero where saturated.
inline double beta_head_slope(double raw) {
  return softplus(raw) >= kBetaSaturation ? 0.0 : sigmoid(raw);
}

inline constexpr double kUnitClamp = 1e-12;

inline double action_to_unit(double a) {
  return std::clamp(0.5 * (a + 1.0), kUnitClamp, 1.0 - kUnitClamp);
}

/// log density of an action under the affine-mapped Beta; includes -ln 2
/// per dimension for the change of variables.
inline double log_prob(const BetaParams& bp, std::span<const double> action) {
  double lp = 0.0;
  for (std::size_t d = 0; d < kActionDim; ++d) {
    const double x = action_to_unit(action[d]);
    const double a = bp.alpha[d], b = bp.beta[d];
    lp += (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b) -
          std::numbers::ln2;
  }
  return lp;
}

/// Differential entropy of the action distribution (nats).
inline double entropy(const BetaParams& bp) {
  double h = 0.0;
  for (std::size_t d = 0; d < kActionDim; ++d) {
    const double a = bp.alpha[d], b = bp.beta[d];
    h += log_beta_fn(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) +
         (a + b - 2.0) * digamma(a + b) + std::numbers::ln2;
  }
  return h;
}

/// Distribution mean mapped to action space, used for deterministic eval.
inline Action mean_action(const BetaParams& bp) {
  std::array<double, kActionDim> a{};
  for (std::size_t d = 0; d < kActionDim; ++d)
    a[d] = 2.0 * bp.alpha[d] / (bp.alpha[d] + bp.beta[d]) - 1.0;
  return {a[0], a[1]};
}

struct SampledAction {
  Action action;
  double log_prob = 0.0;
};

template <class Rng>
SampledAction sample_action(const BetaParams& bp, Rng& rng) {
  std::array<double, kActionDim> a{};
  for (std::size_t d = 0; d < kActionDim; ++d) {
    std::gamma_distribution<double> ga(bp.alpha[d], 1.0), gb(bp.beta[d], 1.0);
    const double u = ga(rng), v = gb(rng);
    const double x = u / (u + v);
    a[d] = std::clamp(2.0 * x - 1.0, -1.0, 1.0);
  }
  return {{a[0], a[1]}, log_prob(bp, a)};
}

}  // namespace hcrmp

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

// Multi-critic PPO: Beta actor, one value head per driving attribute,
// per-critic GAE, weight-integrated advantage and the clipped surrogate.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hcrmp/anchor.hpp"
#include "hcrmp/beta.hpp"
#include "hcrmp/nn.hpp"
#include "hcrmp/semantics.hpp"

namespace hcrmp {

inline constexpr int kHidden = 64;

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  int minibatch = 256;
  int rollout = 2048;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  Adam::Config adam{};
};

/// Actor 29-64-64-4 and kAttributes critics 29-64-64-1.
struct Networks {
  Mlp actor;
  std::array<Mlp, kAttributes> critics;

  static Networks make() {
    Networks n;
    n.actor = Mlp({static_cast<int>(kStateDim), kHidden, kHidden, static_cast<int>(kActorOutputs)});
    for (auto& c : n.critics) c = Mlp({static_cast<int>(kStateDim), kHidden, kHidden, 1});
    return n;
  }

  static Networks make(std::mt19937_64& rng, double output_scale = 0.01) {
    Networks n = make();
    n.actor.init(rng, output_scale);
    for (auto& c : n.critics) c.init(rng, output_scale);
    return n;
  }

  std::size_t param_count() const {
    std::size_t n = actor.param_count();
    for (const auto& c : critics) n += c.param_count();
    return n;
  }

  /// Network k: 0 is the actor, 1..N the critics.
  Mlp& net(std::size_t k) { return k == 0 ? actor : critics[k - 1]; }
  const Mlp& net(std::size_t k) const { return k == 0 ? actor : critics[k - 1]; }
  static constexpr std::size_t kNetCount = 1 + kAttributes;
};

using StateVec = std::array<double, kStateDim>;

inline BetaParams actor_forward(const Networks& nets, std::span<const double> state, Mlp::Tape& tape) {
  return beta_head(nets.actor.forward(state, tape));
}

inline BetaParams actor_forward(const Networks& nets, std::span<const double> state) {
  Mlp::Tape tape;
  return actor_forward(nets, state, tape);
}

inline std::array<double, kAttributes> critic_values(const Networks& nets, std::span<const double> state) {
  Mlp::Tape tape;
  std::array<double, kAttributes> v{};
  for (std::size_t i = 0; i < kAttributes; ++i) v[i] = nets.critics[i].forward(state, tape)[0];
  return v;
}

// ---------------------------------------------------------------------------
// Advantages

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;
};

/// Backward GAE over a rollout that may span several episodes.
/// `values[t]` = v(s_t); `bootstrap` = v(s_T) for the state after the last
/// step (ignored when that step is terminal).
inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                             std::span<const std::uint8_t> dones, double bootstrap, double gamma,
                             double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T)
    throw ContractViolation("compute_gae: rewards/values/dones length mismatch");
  GaeResult out{std::vector<double>(T), std::vector<double>(T)};
  double next_adv = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    const double not_done = dones[k] ? 0.0 : 1.0;
    const double next_v = k + 1 < T ? values[k + 1] : bootstrap;
    const double delta = rewards[k] + gamma * next_v * not_done - values[k];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    out.advantages[k] = next_adv;
    out.targets[k] = next_adv + values[k];
  }
  return out;
}

/// A_int[t] = sum_i lambda_i[t] * A_i[t], before standardization.
inline std::vector<double> integrate_advantages(
    const std::array<std::vector<double>, kAttributes>& per_attribute,
    std::span<const WeightVector> weights) {
  const std::size_t T = weights.size();
  for (const auto& a : per_attribute)
    if (a.size() != T) throw ContractViolation("integrate_advantages: length mismatch");
  std::vector<double> out(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < kAttributes; ++i) s += weights[t].lambda[i] * per_attribute[i][t];
    out[t] = s;
  }
  return out;
}

/// Zero mean, unit variance (population), eps-guarded.
inline void standardize(std::span<double> x, double eps = 1e-8) {
  if (x.empty()) return;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (double& v : x) v = (v - mean) / (sd + eps);
}

/// Discounted return sum_t gamma^t r_t.
inline double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0, discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Loss

/// One training sample after advantage integration.
struct PpoSample {
  StateVec state{};
  std::array<double, kActionDim> action{};
  double old_log_prob = 0.0;
  double advantage = 0.0;  // standardized integrated advantage
  std::array<double, kAttributes> target{};
};

struct LossReport {
  double total = 0.0;
  double surrogate = 0.0;  // L_clip (to be maximized)
  std::array<double, kAttributes> value_loss{};
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
};

/// Gradient buffers, one per network in Networks::net order.
struct Gradients {
  std::array<std::vector<double>, Networks::kNetCount> g;

  static Gradients zeros_like(const Networks& n) {
    Gradients out;
    for (std::size_t k = 0; k < Networks::kNetCount; ++k) out.g[k].assign(n.net(k).param_count(), 0.0);
    return out;
  }
};

/// Per-sample clipped objective min(r A, clip(r) A).
inline double clipped_objective(double ratio, double adv, double clip) {
  return std::min(ratio * adv, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv);
}

inline constexpr unsigned kAllNets = (1u << Networks::kNetCount) - 1;

/// total = -L_clip + value_coef * sum_i MSE_i / N - entropy_coef * mean(H).
/// Fills `grad` (accumulating) when non-null. The loss is a sum of one term
/// per network; `net_mask` (bit k = Networks::net(k)) selects which terms
/// are evaluated, skipped terms contribute zero.
inline LossReport evaluate_loss(const Networks& nets, std::span<const PpoSample> batch,
                                std::span<const std::size_t> idx, const PpoConfig& cfg,
                                Gradients* grad, unsigned net_mask = kAllNets) {
  LossReport rep;
  const double B = static_cast<double>(idx.size());
  const double N = static_cast<double>(kAttributes);
  Mlp::Tape tape;
  std::array<double, kActorOutputs> d_raw{};
  double d_v[1];
  for (std::size_t j : idx) {
    const PpoSample& s = batch[j];

    // Actor.
    if (net_mask & 1u) {
    const auto raw = nets.actor.forward(s.state, tape);
    const BetaParams bp = beta_head(raw);
    const double lp = log_prob(bp, s.action);
    const double ratio = std::exp(lp - s.old_log_prob);
    const double unclipped = ratio * s.advantage;
    const double obj = clipped_objective(ratio, s.advantage, cfg.clip);
    const double H = entropy(bp);
    rep.surrogate += obj / B;
    rep.entropy += H / B;
    rep.mean_ratio += ratio / B;
    if (std::abs(ratio - 1.0) > cfg.clip) rep.clip_fraction += 1.0 / B;

    if (grad) {
      // d total / d logp: only the unclipped branch depends on theta.
      const double g_lp = (unclipped <= obj) ? -unclipped / B : 0.0;
      const double g_h = -cfg.entropy_coef / B;
      for (std::size_t d = 0; d < kActionDim; ++d) {
        const double a = bp.alpha[d], b = bp.beta[d];
        const double x = action_to_unit(s.action[d]);
        const double psi_ab = digamma(a + b), tri_ab = trigamma(a + b);
        const double dlp_da = std::log(x) - digamma(a) + psi_ab;
        const double dlp_db = std::log1p(-x) - digamma(b) + psi_ab;
        const double dh_da = -(a - 1.0) * trigamma(a) + (a + b - 2.0) * tri_ab;
        const double dh_db = -(b - 1.0) * trigamma(b) + (a + b - 2.0) * tri_ab;
        d_raw[2 * d] = (g_lp * dlp_da + g_h * dh_da) * beta_head_slope(raw[2 * d]);
        d_raw[2 * d + 1] = (g_lp * dlp_db + g_h * dh_db) * beta_head_slope(raw[2 * d + 1]);
      }
      nets.actor.backward(tape, d_raw, grad->g[0]);
    }
    }

    // Critics.
    for (std::size_t i = 0; i < kAttributes; ++i) {
      if (!(net_mask & (1u << (1 + i)))) continue;
      const double v = nets.critics[i].forward(s.state, tape)[0];
      const double err = v - s.target[i];
      rep.value_loss[i] += err * err / B;
      if (grad) {
        d_v[0] = cfg.value_coef * 2.0 * err / (B * N);
        nets.critics[i].backward(tape, d_v, grad->g[1 + i]);
      }
    }
  }
  double vsum = 0.0;
  for (double v : rep.value_loss) vsum += v;
  rep.total = -rep.surrogate + cfg.value_coef * vsum / N - cfg.entropy_coef * rep.entropy;
  return rep;
}

// ---------------------------------------------------------------------------
// Update

class UpdateAborted : public std::runtime_error {
 public:
  UpdateAborted(int epoch, int minibatch)
      : std::runtime_error("non-finite loss or gradient in epoch " + std::to_string(epoch) +
                           ", minibatch " + std::to_string(minibatch)),
        epoch(epoch), minibatch(minibatch) {}
  int epoch;
  int minibatch;
};

struct UpdateStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  std::array<double, kAttributes> value_loss{};
  double entropy = 0.0;
  double surrogate = 0.0;
  int minibatches = 0;
};

/// Networks plus optimizer state; one Adam per network.
struct Learner {
  Networks nets;
  std::array<Adam, Networks::kNetCount> optim;
  PpoConfig cfg;

  Learner(Networks n, PpoConfig c) : nets(std::move(n)), cfg(c) {
    for (std::size_t k = 0; k < Networks::kNetCount; ++k) optim[k] = Adam(nets.net(k).param_count(), cfg.adam);
  }
};

/// Clipped-surrogate update: `epochs` passes over shuffled minibatches.
/// Gradient norms are clipped per network (actor and each critic
/// separately) so critic updates stay independent of one another.
/// On a non-finite loss or gradient the networks and optimizer state are
/// restored and UpdateAborted is thrown.
template <class Rng>
UpdateStats ppo_update(std::span<const PpoSample> batch, Learner& learner, Rng& rng) {
  const PpoConfig& cfg = learner.cfg;
  const Networks nets_before = learner.nets;
  const auto optim_before = learner.optim;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  UpdateStats st;
  Gradients grad = Gradients::zeros_like(learner.nets);

  const std::size_t mb = static_cast<std::size_t>(std::max(1, cfg.minibatch));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    int mb_index = 0;
    for (std::size_t start = 0; start < order.size(); start += mb, ++mb_index) {
      const std::size_t end = std::min(order.size(), start + mb);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      for (auto& g : grad.g) std::fill(g.begin(), g.end(), 0.0);
      const LossReport rep = evaluate_loss(learner.nets, batch, idx, cfg, &grad);

      bool finite = std::isfinite(rep.total);
      for (const auto& g : grad.g)
        for (double x : g) finite = finite && std::isfinite(x);
      if (!finite) {
        learner.nets = nets_before;
        learner.optim = optim_before;
        throw UpdateAborted(epoch, mb_index);
      }

      for (std::size_t k = 0; k < Networks::kNetCount; ++k) {
        clip_grad_norm(grad.g[k], cfg.max_grad_norm);
        learner.optim[k].step(learner.nets.net(k).params(), grad.g[k]);
      }
      st.mean_ratio += rep.mean_ratio;
      st.clip_fraction += rep.clip_fraction;
      st.entropy += rep.entropy;
      st.surrogate += rep.surrogate;
      for (std::size_t i = 0; i < kAttributes; ++i) st.value_loss[i] += rep.value_loss[i];
      ++st.minibatches;
    }
  }
  if (st.minibatches > 0) {
    const double n = st.minibatches;
    st.mean_ratio /= n;
    st.clip_fraction /= n;
    st.entropy /= n;
    st.surrogate /= n;
    for (double& v : st.value_loss) v /= n;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Checkpoints: "HCRMPCKP", u32 version, u32 network count, then per network
// u32 layer count and u32 sizes, then all parameters as float64, network by
// network, row-major. Native (little-endian) byte order.

inline constexpr char kCheckpointMagic[8] = {'H', 'C', 'R', 'M', 'P', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::string& path, const Networks& nets) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_u32(kCheckpointVersion);
  put_u32(static_cast<std::uint32_t>(Networks::kNetCount));
  for (std::size_t k = 0; k < Networks::kNetCount; ++k) {
    const auto& sizes = nets.net(k).sizes();
    put_u32(static_cast<std::uint32_t>(sizes.size() - 1));
    for (int s : sizes) put_u32(static_cast<std::uint32_t>(s));
  }
  for (std::size_t k = 0; k < Networks::kNetCount; ++k) {
    const auto& p = nets.net(k).params();
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

inline Networks load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw ConfigError("truncated checkpoint '" + path + "'");
    return v;
  };
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw ConfigError("'" + path + "' is not a checkpoint");
  if (get_u32() != kCheckpointVersion) throw ConfigError("unsupported checkpoint version in '" + path + "'");
  Networks nets = Networks::make();
  if (get_u32() != Networks::kNetCount) throw ConfigError("checkpoint network count mismatch");
  for (std::size_t k = 0; k < Networks::kNetCount; ++k) {
    const auto& expect = nets.net(k).sizes();
    const std::uint32_t layers = get_u32();
    if (layers + 1 != expect.size()) throw ConfigError("checkpoint shape mismatch");
    for (int s : expect)
      if (get_u32() != static_cast<std::uint32_t>(s)) throw ConfigError("checkpoint shape mismatch");
  }
  for (std::size_t k = 0; k < Networks::kNetCount; ++k) {
    auto& p = nets.net(k).params();
    in.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!in) throw ConfigError("truncated checkpoint '" + path + "'");
  }
  if (in.peek() != std::ifstream::traits_type::eof()) throw ConfigError("trailing bytes in checkpoint");
  return nets;
}

}  // namespace hcrmp

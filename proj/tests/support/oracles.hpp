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

// Test-only reference implementations. Nothing here shares code paths with
// the library routines they check.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hcrmp/anchor.hpp"
#include "hcrmp/cache.hpp"
#include "hcrmp/policy.hpp"

namespace hcrmp::oracle {

// --- geometry --------------------------------------------------------------

using Pt = std::array<double, 2>;

inline std::array<Pt, 4> rect_corners(double cx, double cy, double h, double len, double wid) {
  const double c = std::cos(h), s = std::sin(h);
  const double hl = len / 2, hw = wid / 2;
  const Pt local[4] = {{hl, hw}, {hl, -hw}, {-hl, -hw}, {-hl, hw}};
  std::array<Pt, 4> out{};
  for (int i = 0; i < 4; ++i)
    out[i] = {cx + local[i][0] * c - local[i][1] * s, cy + local[i][0] * s + local[i][1] * c};
  return out;
}

inline double cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline bool segments_cross(const Pt& p1, const Pt& p2, const Pt& q1, const Pt& q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

inline bool strictly_inside(const Pt& p, const std::array<Pt, 4>& poly) {
  bool pos = false, neg = false;
  for (int i = 0; i < 4; ++i) {
    const double c = cross(poly[i], poly[(i + 1) % 4], p);
    if (c > 0) pos = true;
    if (c < 0) neg = true;
    if (c == 0) return false;
  }
  return !(pos && neg);
}

/// Brute-force polygon overlap: any proper edge crossing, or containment.
inline bool polygons_overlap(const std::array<Pt, 4>& a, const std::array<Pt, 4>& b) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (segments_cross(a[i], a[(i + 1) % 4], b[j], b[(j + 1) % 4])) return true;
  for (const auto& p : a)
    if (strictly_inside(p, b)) return true;
  for (const auto& p : b)
    if (strictly_inside(p, a)) return true;
  return false;
}

// --- special functions -----------------------------------------------------

/// Lanczos (g = 7, n = 9) log-gamma with reflection below 0.5.
inline double lgamma_lanczos(double x) {
  static constexpr double g = 7.0;
  static constexpr double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                  771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                  -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) return std::log(std::numbers::pi / std::abs(std::sin(std::numbers::pi * x))) - lgamma_lanczos(1 - x);
  x -= 1.0;
  double a = c[0];
  const double t = x + g + 0.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return 0.5 * std::log(2 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

/// Beta log-density of action a in [-1, 1] under (alpha, beta), computed
/// from scratch with the Lanczos log-gamma.
inline double beta_action_logpdf(double action, double alpha, double beta) {
  const double x = (action + 1.0) / 2.0;
  const double log_b = lgamma_lanczos(alpha) + lgamma_lanczos(beta) - lgamma_lanczos(alpha + beta);
  // 0 * log 0 taken as 0 so unit exponents stay finite at the boundary
  const double lx = alpha == 1.0 ? 0.0 : (alpha - 1.0) * std::log(x);
  const double l1x = beta == 1.0 ? 0.0 : (beta - 1.0) * std::log(1.0 - x);
  return lx + l1x - log_b - std::log(2.0);
}

// --- advantages ------------------------------------------------------------

/// Direct double loop: A_t = sum_l (gamma*lambda)^l delta_{t+l}, stopping
/// after the first terminal step.
inline std::vector<double> gae_bruteforce(std::span<const double> r, std::span<const double> v,
                                          std::span<const std::uint8_t> done, double bootstrap,
                                          double gamma, double lambda) {
  const std::size_t T = r.size();
  std::vector<double> delta(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double next = t + 1 < T ? v[t + 1] : bootstrap;
    delta[t] = r[t] + (done[t] ? 0.0 : gamma * next) - v[t];
  }
  std::vector<double> out(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double coef = 1.0;
    for (std::size_t k = t; k < T; ++k) {
      out[t] += coef * delta[k];
      if (done[k]) break;
      coef *= gamma * lambda;
    }
  }
  return out;
}

/// Reversed Horner evaluation of sum_t gamma^t r_t.
inline double discounted_return_horner(std::span<const double> r, double gamma) {
  double acc = 0.0;
  for (std::size_t k = r.size(); k-- > 0;) acc = r[k] + gamma * acc;
  return acc;
}

// --- retrieval -------------------------------------------------------------

/// Full sort of (similarity desc, id asc), truncated to k.
inline std::vector<std::string> topk_full_sort(const Embedding& q, std::span<const KnowledgeDoc> corpus,
                                               std::size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& d : corpus) {
    double dot = 0, nq = 0, nd = 0;
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
      dot += q[i] * d.embedding[i];
      nq += q[i] * q[i];
      nd += d.embedding[i] * d.embedding[i];
    }
    scored.emplace_back(dot / std::sqrt(nq * nd), d.id);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) ids.push_back(scored[i].second);
  return ids;
}

/// Linear scan returning the bank position of the nearest entry, ties to the
/// larger tick and then the later position.
inline std::size_t nearest_linear_scan(const Embedding& q, const std::deque<MemoryEntry>& bank) {
  std::size_t best = 0;
  double best_sim = -2.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    double dot = 0, nq = 0, nk = 0;
    for (std::size_t j = 0; j < kEmbeddingDim; ++j) {
      dot += q[j] * bank[i].key[j];
      nq += q[j] * q[j];
      nk += bank[i].key[j] * bank[i].key[j];
    }
    const double sim = dot / std::sqrt(nq * nk);
    const bool better = sim > best_sim || (sim == best_sim && bank[i].tick >= bank[best].tick);
    if (better) {
      best = i;
      best_sim = sim;
    }
  }
  return best;
}

template <class Rng>
Embedding random_unit(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Embedding e{};
  double s = 0;
  for (double& x : e) {
    x = n(rng);
    s += x * x;
  }
  for (double& x : e) x /= std::sqrt(s);
  return e;
}

// --- gradients -------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;       // worst per-tensor error (the pass metric)
  double max_elem_rel_error = 0.0;  // worst single scalar, informational
  std::size_t worst_net = 0;
  std::size_t worst_tensor = 0;     // 2*layer for weights, 2*layer+1 for biases
  std::size_t checked = 0;
};

/// Central differences of the total loss against every parameter of every
/// network. Errors are measured per parameter tensor (each layer's weight
/// matrix and bias vector): |a - n|_2 / max(|a|_2, |n|_2, floor). Scalars
/// with |grad| ~ 1e-8 sit at the roundoff level of an O(1) loss at h = 1e-5,
/// so a per-scalar ratio there measures the difference quotient, not the
/// backward pass.
inline GradCheckResult finite_difference_check(Networks nets, std::span<const PpoSample> batch,
                                               const PpoConfig& cfg, double h = 1e-5,
                                               double floor = 1e-12) {
  std::vector<std::size_t> idx(batch.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Gradients g = Gradients::zeros_like(nets);
  evaluate_loss(nets, batch, idx, cfg, &g);

  GradCheckResult res;
  for (std::size_t k = 0; k < Networks::kNetCount; ++k) {
    // Only network k's term of the (separable) total depends on its params.
    const unsigned mask = 1u << k;
    auto& p = nets.net(k).params();
    std::vector<double> numeric(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = evaluate_loss(nets, batch, idx, cfg, nullptr, mask).total;
      p[i] = saved - h;
      const double down = evaluate_loss(nets, batch, idx, cfg, nullptr, mask).total;
      p[i] = saved;
      numeric[i] = (up - down) / (2 * h);
      const double a = g.g[k][i];
      res.max_elem_rel_error = std::max(
          res.max_elem_rel_error, std::abs(a - numeric[i]) / std::max({std::abs(a), std::abs(numeric[i]), 1e-8}));
      ++res.checked;
    }
    // Tensor boundaries follow the Mlp layout: W_0, b_0, W_1, b_1, ...
    const auto& sizes = nets.net(k).sizes();
    std::size_t off = 0, tensor = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const std::size_t fan_in = static_cast<std::size_t>(sizes[l]), fan_out = static_cast<std::size_t>(sizes[l + 1]);
      for (std::size_t len : {fan_in * fan_out, fan_out}) {
        double diff = 0.0, na = 0.0, nn = 0.0;
        for (std::size_t i = off; i < off + len; ++i) {
          const double a = g.g[k][i];
          diff += (a - numeric[i]) * (a - numeric[i]);
          na += a * a;
          nn += numeric[i] * numeric[i];
        }
        const double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), floor});
        if (rel > res.max_rel_error) {
          res.max_rel_error = rel;
          res.worst_net = k;
          res.worst_tensor = tensor;
        }
        off += len;
        ++tensor;
      }
    }
  }
  return res;
}

}  // namespace hcrmp::oracle

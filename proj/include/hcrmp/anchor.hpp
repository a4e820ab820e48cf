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

// Contextual stability anchor: hashing text embedder, exact top-3 retrieval
// over a rule corpus, query templating, and the simplex guard that repairs
// attribute weights coming back from a hint provider.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcrmp/common.hpp"
#include "hcrmp/semantics.hpp"

namespace hcrmp {

inline constexpr std::size_t kEmbeddingDim = 256;

using Embedding = std::array<double, kEmbeddingDim>;

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Lowercases ASCII and splits on every non-alphanumeric byte.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Signed feature hashing over unigrams and space-joined bigrams, then L2
/// normalization. The all-zero vector maps to e_1.
inline Embedding embed(std::string_view text) {
  Embedding v{};
  const auto tokens = tokenize(text);
  auto add = [&v](std::string_view tok) {
    const std::uint64_t h = fnv1a64(tok);
    v[h % kEmbeddingDim] += (h >> 63) ? -1.0 : 1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

inline double cosine(const Embedding& a, const Embedding& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

struct KnowledgeDoc {
  std::string id;
  std::string text;
  Embedding embedding{};
};

/// Loads a flat corpus: one fragment per line, id = 1-based line number.
/// Blank lines are skipped but still consume a line number.
inline std::vector<KnowledgeDoc> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file '" + path + "'");
  std::vector<KnowledgeDoc> docs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    docs.push_back({std::to_string(lineno), line, embed(line)});
  }
  if (docs.empty()) throw ConfigError("corpus file '" + path + "' has no fragments");
  return docs;
}

struct Retrieved {
  std::string id;
  double similarity = 0.0;
};

/// Exact cosine search. Results sorted by descending similarity, ties by
/// ascending id.
inline std::vector<Retrieved> retrieve_top_k(const Embedding& query,
                                             std::span<const KnowledgeDoc> corpus,
                                             std::size_t k) {
  if (corpus.empty()) throw ConfigError("retrieval corpus is empty");
  std::vector<Retrieved> all;
  all.reserve(corpus.size());
  for (const auto& d : corpus) all.push_back({d.id, cosine(query, d.embedding)});
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const Retrieved& a, const Retrieved& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.id < b.id;
                    });
  all.resize(n);
  return all;
}

inline std::vector<Retrieved> retrieve_top3(const Embedding& query,
                                            std::span<const KnowledgeDoc> corpus) {
  return retrieve_top_k(query, corpus, 3);
}

// ---------------------------------------------------------------------------
// Attribute weights

/// Point on the probability simplex, ordered (safety, efficiency, comfort).
struct WeightVector {
  std::array<double, kAttributes> lambda{};

  static WeightVector uniform() {
    WeightVector w;
    w.lambda.fill(1.0 / static_cast<double>(kAttributes));
    return w;
  }

  double operator[](std::size_t i) const { return lambda[i]; }
  bool operator==(const WeightVector&) const = default;
};

inline bool on_simplex(const WeightVector& w, double tol = 1e-9) {
  double sum = 0.0;
  for (double x : w.lambda) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

enum class WeightRepair { none, non_finite, wrong_arity, clamped, degenerate, renormalized };

inline std::string_view to_string(WeightRepair r) {
  switch (r) {
    case WeightRepair::none: return "none";
    case WeightRepair::non_finite: return "non_finite";
    case WeightRepair::wrong_arity: return "wrong_arity";
    case WeightRepair::clamped: return "clamped";
    case WeightRepair::degenerate: return "degenerate";
    case WeightRepair::renormalized: return "renormalized";
  }
  return "?";
}

struct ValidatedWeights {
  WeightVector weights;
  WeightRepair repair = WeightRepair::none;
};

/// Maps any raw provider output onto the simplex: non-finite input falls
/// back to uniform; otherwise clamp each component to [0, 1], fall back to
/// uniform when the clamped mass is below 1e-6, else divide by the sum.
/// A vector already on the simplex (sum within 1e-12) is returned as-is,
/// which makes the guard idempotent bit for bit.
inline ValidatedWeights validate_weights(std::span<const double> raw) {
  if (raw.size() != kAttributes) return {WeightVector::uniform(), WeightRepair::wrong_arity};
  if (!std::all_of(raw.begin(), raw.end(), [](double x) { return std::isfinite(x); }))
    return {WeightVector::uniform(), WeightRepair::non_finite};

  WeightVector w;
  bool clamped = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < kAttributes; ++i) {
    w.lambda[i] = std::clamp(raw[i], 0.0, 1.0);
    clamped = clamped || w.lambda[i] != raw[i];
    sum += w.lambda[i];
  }
  if (sum < 1e-6) return {WeightVector::uniform(), WeightRepair::degenerate};
  if (std::abs(sum - 1.0) <= 1e-12) return {w, clamped ? WeightRepair::clamped : WeightRepair::none};
  for (double& x : w.lambda) x /= sum;
  return {w, clamped ? WeightRepair::clamped : WeightRepair::renormalized};
}

inline ValidatedWeights validate_weights(const WeightVector& w) {
  return validate_weights(std::span<const double>(w.lambda));
}

// ---------------------------------------------------------------------------
// Query context

/// What the hint query is rendered from: the semantic digest plus flags the
/// digest cannot carry.
struct QueryInputs {
  ScenarioVector scenario;
  ObjectVector objects;
  Density density = Density::low;
  bool pedestrian = false;
  bool short_ttc = false;

  std::array<double, kLlmDim> digest() const {
    std::array<double, kLlmDim> d{};
    std::copy(scenario.v.begin(), scenario.v.end(), d.begin());
    std::copy(objects.v.begin(), objects.v.end(), d.begin() + kScenarioDim);
    return d;
  }
};

inline QueryInputs query_inputs(const WorldSnapshot& snap, const ScenarioVector& sv,
                                const ObjectVector& ov) {
  return {sv, ov, snap.density, has_pedestrian(snap), compute_ttc(snap) < kHazardTtc};
}

/// One-line, run-stable description of the driving context, e.g.
/// "scenario=cruise density=low hazard=none nearest=inf".
/// Nearest distance is bucketed to 5 m so near-identical contexts share text.
inline std::string build_query(const QueryInputs& q) {
  std::string hazard;
  if (q.pedestrian) hazard = "pedestrian";
  if (q.short_ttc) hazard += hazard.empty() ? "short_ttc" : ",short_ttc";
  if (hazard.empty()) hazard = "none";

  std::size_t nearest = kSectors;
  double best = 1.0;
  for (std::size_t s = 0; s < kSectors; ++s) {
    if (q.objects.sector(s) < best) {
      best = q.objects.sector(s);
      nearest = s;
    }
  }
  std::string near = "inf";
  if (nearest < kSectors) {
    const int bucket = static_cast<int>(std::round(best * kSensingRange / 5.0)) * 5;
    near = std::string(kSectorNames[nearest]) + "_" + std::to_string(bucket) + "m";
  }
  std::string out = "scenario=";
  out += to_string(q.scenario.category());
  out += " density=";
  out += to_string(q.density);
  out += " hazard=" + hazard + " nearest=" + near;
  return out;
}

/// Context handed to a hint provider.
struct HintContext {
  std::string query_text;
  std::vector<Retrieved> retrieved;         // descending similarity
  std::vector<std::string> fragments;       // texts of `retrieved`, same order
  std::array<double, kLlmDim> digest{};
  bool pedestrian_present = false;

  SceneCategory category() const {
    return static_cast<SceneCategory>(std::max_element(digest.begin(), digest.begin() + kScenarioDim) -
                                      digest.begin());
  }
};

inline HintContext make_context(const QueryInputs& q, std::span<const KnowledgeDoc> corpus) {
  HintContext ctx;
  ctx.query_text = build_query(q);
  ctx.digest = q.digest();
  ctx.pedestrian_present = q.pedestrian;
  if (!corpus.empty()) {
    ctx.retrieved = retrieve_top3(embed(ctx.query_text), corpus);
    for (const auto& r : ctx.retrieved) {
      const auto it = std::find_if(corpus.begin(), corpus.end(),
                                   [&](const KnowledgeDoc& d) { return d.id == r.id; });
      ctx.fragments.push_back(it->text);
    }
  }
  return ctx;
}

}  // namespace hcrmp

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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "hcrmp/anchor.hpp"
#include "oracles.hpp"

namespace hcrmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<KnowledgeDoc> random_corpus(std::mt19937_64& rng, std::size_t n) {
  std::vector<KnowledgeDoc> docs;
  for (std::size_t i = 0; i < n; ++i) docs.push_back({std::to_string(i + 1), "", oracle::random_unit(rng)});
  return docs;
}

// --- embedding -------------------------------------------------------------

TEST(Embed, Deterministic) {
  EXPECT_EQ(embed("keep a safe following distance"), embed("keep a safe following distance"));
}

TEST(Embed, EmptyTextIsFirstBasisVector) {
  Embedding e1{};
  e1[0] = 1.0;
  EXPECT_EQ(embed(""), e1);
  EXPECT_EQ(embed("  ,.;  "), e1);
}

TEST(Embed, UnitNorm) {
  for (const char* t : {"a", "merge early", "Reduce speed near schools and crossings"}) {
    const auto e = embed(t);
    double n = 0;
    for (double x : e) n += x * x;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
}

// Frozen from tests/oracles/embed_oracle.py.
TEST(Embed, HashBucketsMatchIndependentScript) {
  const auto e = embed("pedestrian");
  EXPECT_EQ(e[252], -1.0);
  const auto f = embed("Yield, to pedestrian!");
  const double c = 1.0 / std::sqrt(5.0);
  EXPECT_NEAR(f[164], c, 1e-12);
  EXPECT_NEAR(f[165], -c, 1e-12);
  EXPECT_NEAR(f[207], c, 1e-12);
  EXPECT_NEAR(f[238], c, 1e-12);
  EXPECT_NEAR(f[252], -c, 1e-12);
}

TEST(Embed, RelatedTextIsCloser) {
  const auto q = embed("yield to pedestrian");
  const double near = cosine(q, embed("yield to pedestrian crossing"));
  const double far = cosine(q, embed("maximum highway speed"));
  EXPECT_NEAR(near, 0.84515425472851646, 1e-15);
  EXPECT_NEAR(far, 0.0, 1e-15);
  EXPECT_GT(near, far);
}

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Stop-and-Go, 50km/h"), (std::vector<std::string>{"stop", "and", "go", "50km", "h"}));
}

// --- corpus / retrieval ----------------------------------------------------

TEST(Corpus, LineNumbersAreIds) {
  const auto path = std::filesystem::path(HCRMP_TEST_TMP) / "corpus_ids.txt";
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << "first rule\n\n  \nsecond rule\n";
  const auto docs = load_corpus(path.string());
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "1");
  EXPECT_EQ(docs[1].id, "4");
  EXPECT_EQ(docs[1].text, "second rule");
}

TEST(Corpus, MissingOrEmptyIsConfigError) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.txt"), ConfigError);
  const auto path = std::filesystem::path(HCRMP_TEST_TMP) / "corpus_empty.txt";
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << "\n\n";
  EXPECT_THROW(load_corpus(path.string()), ConfigError);
}

TEST(Corpus, ShippedCorpusLoads) { EXPECT_GE(load_corpus(HCRMP_DEFAULT_CORPUS).size(), 30u); }

TEST(Retrieve, EmptyCorpusIsConfigError) {
  EXPECT_THROW(retrieve_top3(embed("x"), std::span<const KnowledgeDoc>{}), ConfigError);
}

TEST(Retrieve, SingleDocCorpus) {
  const std::vector<KnowledgeDoc> docs{{"1", "merge early", embed("merge early")}};
  const auto q = embed("merge late");
  const auto r = retrieve_top3(q, docs);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, "1");
  EXPECT_DOUBLE_EQ(r[0].similarity, cosine(q, docs[0].embedding));
}

TEST(Retrieve, ExactMatchRanksFirst) {
  const auto docs = load_corpus(HCRMP_DEFAULT_CORPUS);
  const auto& target = docs[7];
  const auto r = retrieve_top3(target.embedding, docs);
  EXPECT_EQ(r[0].id, target.id);
  EXPECT_NEAR(r[0].similarity, 1.0, 1e-12);
}

TEST(Retrieve, TiesBrokenByAscendingId) {
  const auto e = embed("same text");
  const std::vector<KnowledgeDoc> docs{{"3", "", e}, {"1", "", e}, {"2", "", e}, {"0", "", embed("other")}};
  const auto r = retrieve_top3(e, docs);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].id, "1");
  EXPECT_EQ(r[1].id, "2");
  EXPECT_EQ(r[2].id, "3");
}

TEST(Retrieve, MatchesFullSortOracle) {
  std::mt19937_64 rng(21);
  const auto docs = random_corpus(rng, 100);
  for (int q = 0; q < 50; ++q) {
    const auto query = oracle::random_unit(rng);
    const auto got = retrieve_top3(query, docs);
    const auto want = oracle::topk_full_sort(query, docs, 3);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_EQ(got[i].id, want[i]);
  }
}

// --- weight guard ----------------------------------------------------------

void expect_weights(const WeightVector& w, std::array<double, 3> want, double tol = 1e-15) {
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(w.lambda[i], want[i], tol) << i;
}

TEST(Validate, OnSimplexUnchanged) {
  const double raw[] = {0.5, 0.3, 0.2};
  const auto v = validate_weights(raw);
  EXPECT_EQ(v.weights.lambda, (std::array<double, 3>{0.5, 0.3, 0.2}));
  EXPECT_EQ(v.repair, WeightRepair::none);
}

TEST(Validate, NonFiniteFallsBackToUniform) {
  const double raw[] = {kNaN, 0.5, 0.5};
  const auto v = validate_weights(raw);
  EXPECT_EQ(v.weights, WeightVector::uniform());
  EXPECT_EQ(v.repair, WeightRepair::non_finite);
}

TEST(Validate, ClampThenNormalize) {
  const double raw[] = {2.0, 1.0, 1.0};
  const auto v = validate_weights(raw);
  expect_weights(v.weights, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_EQ(v.repair, WeightRepair::clamped);
}

TEST(Validate, NegativeComponentClampedToZero) {
  const double raw[] = {-0.7, 0.15, 0.15};
  expect_weights(validate_weights(raw).weights, {0.0, 0.5, 0.5});
}

TEST(Validate, OverscaleIsRenormalized) {
  const double raw[] = {0.08, 0.035, 0.015};  // sum 0.13
  expect_weights(validate_weights(raw).weights, {0.08 / 0.13, 0.035 / 0.13, 0.015 / 0.13}, 1e-15);
}

TEST(Validate, DegenerateMassIsUniform) {
  const double raw[] = {0.0, -1.0, 1e-9};
  const auto v = validate_weights(raw);
  EXPECT_EQ(v.weights, WeightVector::uniform());
  EXPECT_EQ(v.repair, WeightRepair::degenerate);
}

TEST(Validate, WrongArityIsUniform) {
  const double raw[] = {0.5, 0.5};
  EXPECT_EQ(validate_weights(raw).repair, WeightRepair::wrong_arity);
}

TEST(Validate, FuzzAlwaysOnSimplexAndIdempotent) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 9);
  for (int i = 0; i < 20000; ++i) {
    std::array<double, 3> raw{};
    for (double& x : raw) {
      switch (pick(rng)) {
        case 0: x = kNaN; break;
        case 1: x = kInf; break;
        case 2: x = -kInf; break;
        case 3: x = 10.0 * u(rng); break;
        default: x = u(rng);
      }
    }
    const auto v = validate_weights(raw);
    ASSERT_TRUE(on_simplex(v.weights)) << raw[0] << ' ' << raw[1] << ' ' << raw[2];
    ASSERT_EQ(validate_weights(v.weights).weights, v.weights);
  }
}

// --- query -----------------------------------------------------------------

QueryInputs cruise_low() {
  QueryInputs q;
  q.scenario.v = {1, 0, 0, 0};
  q.objects.v = {0, 1, 1, 1, 1, 1, 1, 1, 1};
  q.density = Density::low;
  return q;
}

TEST(Query, EmptyFieldsTemplate) {
  EXPECT_EQ(build_query(cruise_low()), "scenario=cruise density=low hazard=none nearest=inf");
}

TEST(Query, PedestrianNamedInHazardField) {
  auto q = cruise_low();
  q.scenario.v = {0, 0, 0, 1};
  q.pedestrian = true;
  q.objects.v[1] = 0.5;
  const auto s = build_query(q);
  EXPECT_EQ(s, "scenario=hazard density=low hazard=pedestrian nearest=front_25m");
  const auto toks = tokenize(s);
  EXPECT_NE(std::find(toks.begin(), toks.end(), "pedestrian"), toks.end());
}

TEST(Query, Deterministic) {
  auto q = cruise_low();
  q.short_ttc = true;
  q.objects.v[4] = 0.37;
  EXPECT_EQ(build_query(q), build_query(q));
}

TEST(Query, ContextCarriesRetrievedFragments) {
  const auto docs = load_corpus(HCRMP_DEFAULT_CORPUS);
  auto q = cruise_low();
  q.scenario.v = {0, 0, 0, 1};
  q.pedestrian = true;
  const auto ctx = make_context(q, docs);
  ASSERT_EQ(ctx.retrieved.size(), 3u);
  ASSERT_EQ(ctx.fragments.size(), 3u);
  EXPECT_EQ(ctx.category(), SceneCategory::hazard);
  EXPECT_TRUE(ctx.pedestrian_present);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_GE(ctx.retrieved[i - 1].similarity, ctx.retrieved[i].similarity);
}

}  // namespace
}  // namespace hcrmp

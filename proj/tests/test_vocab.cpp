/*
 * Copyright 2026 The tldr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "test_util.hpp"
#include "tldr/stats.hpp"
#include "tldr/vocab.hpp"

namespace tldr {
namespace {

// Bank with `templates` rows per word; the anchor row holds `vec`, the other
// rows hold a scrambled copy so a wrong row index shows up.
TextEmbeddingBank make_bank(const std::vector<std::pair<std::string, std::vector<double>>>& words,
                            int templates = 3, int anchor = 1) {
  const auto d = static_cast<Eigen::Index>(words.front().second.size());
  EmbeddingMatrix data(static_cast<Eigen::Index>(words.size()) * templates, d);
  std::vector<std::string> names;
  for (std::size_t w = 0; w < words.size(); ++w) {
    names.push_back(words[w].first);
    for (int k = 0; k < templates; ++k) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double v = words[w].second[static_cast<std::size_t>(j)];
        data(static_cast<Eigen::Index>(w) * templates + k, j) = k == anchor ? v : -v + 7.0 * k;
      }
    }
  }
  return TextEmbeddingBank(data, names, templates, anchor);
}

Projector<double> identity_projector(Eigen::Index d) {
  Projector<double> p;
  p.W = EmbeddingMatrix::Identity(d, d);
  p.b = VectorXr::Zero(d);
  return p;
}

LinearHead<double> identity_head(Eigen::Index d) {
  LinearHead<double> h;
  h.W = EmbeddingMatrix::Identity(d, d);
  h.b = VectorXr::Zero(d);
  return h;
}

TEST(Dedup, CaseAndWhitespaceInsensitiveFirstWins) {
  EXPECT_EQ(normalize_word("  Water Bird\t"), "water bird");
  EXPECT_EQ(normalize_word("   "), "");
  Vocabulary v;
  v.classes = {{"bird", {"Sparrow", " sparrow ", "SPARROW", "gull", "Gull"}}};
  v.attributes = {{"water", {"lake", "lake"}}};
  v.partitions = {{0}};
  const auto out = dedup(v);
  EXPECT_EQ(out.classes[0].words, (std::vector<std::string>{"Sparrow", "gull"}));
  EXPECT_EQ(out.attributes[0].words, (std::vector<std::string>{"lake"}));
  EXPECT_EQ(out.partitions, v.partitions);
}

TEST(Dedup, IdempotentAndOrderPreservingProperty) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> pool{"a", "A", " a", "b", "B ", "c", "cc", "C"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), len(1, 12);
  for (int trial = 0; trial < 100; ++trial) {
    Vocabulary v;
    v.classes = {{"x", {}}};
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) v.classes[0].words.push_back(pool[pick(rng)]);
    const auto once = dedup(v);
    EXPECT_EQ(dedup(once).classes[0].words, once.classes[0].words);
    // Output is a subsequence of the input with unique normalized forms.
    std::vector<std::string> norms;
    std::size_t cursor = 0;
    for (const auto& w : once.classes[0].words) {
      norms.push_back(normalize_word(w));
      while (cursor < n && v.classes[0].words[cursor] != w) ++cursor;
      ASSERT_LT(cursor, n);
      ++cursor;
    }
    std::sort(norms.begin(), norms.end());
    EXPECT_EQ(std::adjacent_find(norms.begin(), norms.end()), norms.end());
  }
}

TEST(Bank, LayoutAndMissingEmbeddings) {
  const auto bank = make_bank({{"x", {1, 0}}, {"y", {0, 1}}}, 4, 2);
  EXPECT_EQ(bank.row_index("y", 3), 7);
  EXPECT_EQ(bank.anchor("y"), (Eigen::RowVector2d(0, 1)));
  EXPECT_THROW(bank.row_index("z", 0), MissingEmbeddingError);
  EXPECT_THROW(bank.row_index("x", 4), MissingEmbeddingError);
  EXPECT_THROW(TextEmbeddingBank(EmbeddingMatrix::Zero(5, 2), {"x", "y"}, 2), PairingError);
  EXPECT_THROW(TextEmbeddingBank(EmbeddingMatrix::Zero(4, 2), {"x", "x"}, 2), SchemaError);
  EXPECT_THROW(TextEmbeddingBank(EmbeddingMatrix::Zero(4, 2), {"x", "y"}, 2, 2), SchemaError);
}

TEST(Bank, LoadsFromIndexFile) {
  tldr_test::TempDir dir;
  EmbeddingMatrix data(6, 2);
  data << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  save_matrix(data, dir.path() / "bank.npy");
  {
    std::ofstream f(dir.path() / "bank_index.json");
    f << bank_index_json({"p", "q", "r"}, 2, 1, 2);
  }
  const auto bank = load_bank(dir.path() / "bank.npy", dir.path() / "bank_index.json");
  EXPECT_EQ(bank.anchor("q"), (Eigen::RowVector2d(7, 8)));
  {
    std::ofstream f(dir.path() / "bad_index.json");
    f << bank_index_json({"p", "q", "r"}, 2, 1, 3);
  }
  EXPECT_THROW(load_bank(dir.path() / "bank.npy", dir.path() / "bad_index.json"), PairingError);
}

TEST(SemanticFilter, KeepsOnlyStrictNearestAnchor) {
  const auto bank = make_bank({{"cat", {1, 0}},
                               {"dog", {0, 1}},
                               {"kitten", {2, 0.5}},
                               {"puppy", {0.2, 3}},
                               {"between", {1, 1}}});
  const std::vector<std::string> anchors{"cat", "dog"};
  const std::vector<std::string> words{"kitten", "puppy", "between"};
  const auto d = semantic_scores(words, anchors, 0, bank);
  EXPECT_TRUE(d[0].kept);
  EXPECT_FALSE(d[1].kept);
  EXPECT_FALSE(d[2].kept);  // a tie is not a strict win
  EXPECT_NEAR(d[0].score, (2 - 0.5) / std::hypot(2, 0.5), 1e-14);
  EXPECT_NEAR(d[2].score, 0, 1e-15);
  EXPECT_EQ(semantic_filter(words, anchors, 1, bank), (std::vector<std::string>{"puppy"}));
  EXPECT_THROW(semantic_scores(words, anchors, 2, bank), SchemaError);
}

TEST(SemanticFilter, ScaleInvariantProperty) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> s(0.1, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, std::vector<double>>> a, b;
    for (const char* w : {"A", "B", "C", "w1", "w2", "w3", "w4"}) {
      std::vector<double> v{n(rng), n(rng), n(rng)};
      a.emplace_back(w, v);
      const double k = s(rng);
      for (auto& x : v) x *= k;
      b.emplace_back(w, v);
    }
    const std::vector<std::string> anchors{"A", "B", "C"}, words{"w1", "w2", "w3", "w4"};
    EXPECT_EQ(semantic_filter(words, anchors, 1, make_bank(a)),
              semantic_filter(words, anchors, 1, make_bank(b)));
  }
}

TEST(LogitFilter, StrictArgmaxOfProjectedAnchor) {
  const auto bank = make_bank({{"good", {3, 1}}, {"bad", {1, 3}}, {"tie", {2, 2}}});
  const auto p = identity_projector(2);
  const auto h = identity_head(2);
  const auto d = logit_scores({"good", "bad", "tie"}, bank, p, h, 0, false);
  EXPECT_TRUE(d[0].kept);
  EXPECT_FALSE(d[1].kept);
  EXPECT_FALSE(d[2].kept);
  EXPECT_DOUBLE_EQ(d[0].score, 2);
  EXPECT_DOUBLE_EQ(d[1].score, -2);
  EXPECT_EQ(logit_filter({"good", "bad"}, bank, p, h, 1, false), (std::vector<std::string>{"bad"}));
  EXPECT_THROW(logit_scores({"good"}, bank, p, h, 2, false), ShapeError);
}

TEST(LogitFilter, ReluChangesTheDecision) {
  // Projected (-5, -1): class 1 wins raw, but ReLU flattens it to a tie.
  const auto bank = make_bank({{"w", {-5, -1}}});
  const auto d_raw = logit_scores({"w"}, bank, identity_projector(2), identity_head(2), 1, false);
  const auto d_relu = logit_scores({"w"}, bank, identity_projector(2), identity_head(2), 1, true);
  EXPECT_TRUE(d_raw[0].kept);
  EXPECT_FALSE(d_relu[0].kept);
}

TEST(TTestFilter, PValuesMatchIndependentComputation) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0, 1);
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  std::vector<std::pair<std::string, int>> class_words;
  for (int i = 0; i < 12; ++i) {
    const int y = i % 2;
    std::vector<double> v{n(rng), n(rng), n(rng)};
    v[static_cast<std::size_t>(y)] += 2;
    const std::string w = "c" + std::to_string(i);
    entries.emplace_back(w, v);
    class_words.emplace_back(w, y);
  }
  const std::vector<std::string> attrs{"a0", "a1", "a2"};
  entries.push_back({"a0", {4, 0, 0}});
  entries.push_back({"a1", {0.1, -0.2, 1}});
  entries.push_back({"a2", {0, 4, 0}});
  const auto bank = make_bank(entries);

  Projector<double> p;
  p.W = EmbeddingMatrix::Zero(3, 2);
  p.W << 1, 0.2, -0.1, 1, 0.3, 0.3;
  p.b = (VectorXr(2) << 0.5, -0.5).finished();
  LinearHead<double> h = identity_head(2);
  h.b << 0.1, 0;

  auto prob = [&](const VectorXr& e, int y) {
    VectorXr f = p.W.transpose() * e + p.b;
    f = f.cwiseMax(0.0);
    const VectorXr z = h.W.transpose() * f + h.b;
    const double m = z.maxCoeff();
    return std::exp(z[y] - m) / (std::exp(z[0] - m) + std::exp(z[1] - m));
  };
  std::vector<double> expected;
  for (const auto& a : attrs) {
    std::vector<double> x, z;
    for (const auto& [w, y] : class_words) {
      const VectorXr t = bank.anchor(w).transpose();
      x.push_back(prob(t, y));
      z.push_back(prob(VectorXr(0.5 * (t + bank.anchor(a).transpose())), y));
    }
    expected.push_back(stats::paired_t_test(x, z).p_value);
  }
  const auto d = ttest_scores(class_words, attrs, bank, p, h, true, 0.05);
  const auto reject = stats::bh_correct(expected, 0.05);
  for (std::size_t j = 0; j < attrs.size(); ++j) {
    EXPECT_NEAR(d[j].score, expected[j], 1e-12 + 1e-9 * expected[j]);
    EXPECT_EQ(d[j].kept, !reject[j]);
  }
}

TEST(TTestFilter, DropsClassLeakingWordAndKeepsInertOne) {
  // Margins are large enough that probabilities saturate at 0 or 1, so
  // mixing with an inert word leaves them untouched while a word carrying
  // class-0 content flips every class-1 prediction.
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  std::vector<std::pair<std::string, int>> class_words;
  for (int i = 0; i < 20; ++i) {
    const int y = i % 2;
    std::vector<double> v{0, 0};
    v[static_cast<std::size_t>(y)] = 200 + 10 * i;
    entries.emplace_back("c" + std::to_string(i), v);
    class_words.emplace_back("c" + std::to_string(i), y);
  }
  entries.push_back({"inert", {0, 0}});
  entries.push_back({"leaky", {900, 0}});
  const auto bank = make_bank(entries);
  const auto d = ttest_scores(class_words, {"inert", "leaky"}, bank, identity_projector(2),
                              identity_head(2), false, 0.05);
  EXPECT_TRUE(d[0].kept);
  EXPECT_EQ(d[0].score, 1);
  EXPECT_FALSE(d[1].kept);
  EXPECT_LT(d[1].score, 1e-3);
  EXPECT_EQ(ttest_filter(class_words, {"inert", "leaky"}, bank, identity_projector(2),
                         identity_head(2), false),
            (std::vector<std::string>{"inert"}));
}

TEST(TTestFilter, Errors) {
  const auto bank = make_bank({{"c", {1, 0}}, {"a", {0, 1}}});
  const auto p = identity_projector(2);
  const auto h = identity_head(2);
  EXPECT_THROW(ttest_scores({{"c", 0}}, {"a"}, bank, p, h, false, 0.05), InsufficientSamplesError);
  EXPECT_THROW(ttest_scores({{"c", 0}, {"c", 1}}, {"a"}, bank, p, h, false, 1.5), DomainError);
  EXPECT_THROW(ttest_scores({{"c", 0}, {"c", 3}}, {"a"}, bank, p, h, false, 0.05), ShapeError);
}

// Two classes and two attributes in one partition, 2-d everything.
struct PipelineFixture {
  Vocabulary vocab;
  TextEmbeddingBank bank;
  Projector<double> p = identity_projector(4);
  LinearHead<double> head;

  PipelineFixture() {
    vocab.classes = {{"bird", {"sparrow", "Sparrow", "owl", "kennel"}},
                     {"dog", {"terrier", "confusing"}}};
    vocab.attributes = {{"land", {"field", "lake"}}, {"water", {"pond"}}};
    vocab.partitions = {{0, 1}};
    bank = make_bank({{"bird", {5, 0, 0, 0}},
                      {"dog", {0, 5, 0, 0}},
                      {"land", {0, 0, 5, 0}},
                      {"water", {0, 0, 0, 5}},
                      {"sparrow", {4, 0.5, 0, 0}},
                      {"owl", {4, 0.2, 0.3, 0}},
                      {"kennel", {0.5, 4, 0, 0}},
                      {"terrier", {0.5, 4, 0, 0}},
                      // Nearest to "dog" by cosine, but the head prefers bird.
                      {"confusing", {2.5, 3, 0, 0}},
                      {"field", {0, 0, 4, 0.5}},
                      {"lake", {0, 0, 0.5, 4}},
                      {"pond", {0, 0, 0.2, 4}}});
    head.W = EmbeddingMatrix::Zero(4, 2);
    head.W(0, 0) = 2;
    head.W(1, 1) = 1;
    head.b = VectorXr::Zero(2);
  }
};

TEST(FilterPipeline, AuditRecordsEveryWordWithItsReason) {
  PipelineFixture fx;
  const auto fv = run_filter_pipeline(fx.vocab, fx.bank, fx.p, fx.head, FilterOptions{});
  EXPECT_EQ(fv.vocab.classes[0].words, (std::vector<std::string>{"sparrow", "owl"}));
  EXPECT_EQ(fv.vocab.classes[1].words, (std::vector<std::string>{"terrier"}));
  EXPECT_EQ(fv.vocab.attributes[0].words, (std::vector<std::string>{"field"}));
  EXPECT_EQ(fv.vocab.attributes[1].words, (std::vector<std::string>{"pond"}));

  std::map<std::string, DropReason> reason;
  for (const auto& r : fv.audit) {
    EXPECT_EQ(r.kept, r.reason == DropReason::kKept) << r.word;
    if (r.word != "Sparrow") reason[r.word] = r.reason;
  }
  EXPECT_EQ(fv.audit.size(), 9u);
  EXPECT_EQ(reason.at("kennel"), DropReason::kSemantic);
  EXPECT_EQ(reason.at("confusing"), DropReason::kLogit);
  EXPECT_EQ(reason.at("lake"), DropReason::kSemantic);
  EXPECT_EQ(reason.at("owl"), DropReason::kKept);
  const auto dup = std::find_if(fv.audit.begin(), fv.audit.end(),
                                [](const AuditRecord& r) { return r.word == "Sparrow"; });
  ASSERT_NE(dup, fv.audit.end());
  EXPECT_EQ(dup->reason, DropReason::kDuplicate);
}

TEST(FilterPipeline, FilteredIsSubsetAndJsonRoundTrips) {
  PipelineFixture fx;
  const auto fv = run_filter_pipeline(fx.vocab, fx.bank, fx.p, fx.head, FilterOptions{});
  for (std::size_t c = 0; c < fv.vocab.classes.size(); ++c) {
    for (const auto& w : fv.vocab.classes[c].words) {
      EXPECT_NE(std::find(fx.vocab.classes[c].words.begin(), fx.vocab.classes[c].words.end(), w),
                fx.vocab.classes[c].words.end());
    }
  }
  const auto back = parse_filtered(filtered_to_json(fv));
  EXPECT_EQ(back.vocab.classes[0].words, fv.vocab.classes[0].words);
  EXPECT_EQ(back.vocab.partitions, fv.vocab.partitions);
  ASSERT_EQ(back.audit.size(), fv.audit.size());
  for (std::size_t i = 0; i < fv.audit.size(); ++i) {
    EXPECT_EQ(back.audit[i].word, fv.audit[i].word);
    EXPECT_EQ(back.audit[i].reason, fv.audit[i].reason);
    EXPECT_EQ(back.audit[i].score, fv.audit[i].score);
  }
  const auto v2 = parse_vocabulary(vocabulary_to_json(fx.vocab));
  EXPECT_EQ(v2.attributes[0].words, fx.vocab.attributes[0].words);
}

TEST(FilterPipeline, EmptyCategoryIsAnError) {
  PipelineFixture fx;
  fx.vocab.classes[1].words = {"confusing"};
  try {
    run_filter_pipeline(fx.vocab, fx.bank, fx.p, fx.head, FilterOptions{});
    FAIL() << "expected EmptyCategoryError";
  } catch (const EmptyCategoryError& e) {
    EXPECT_NE(std::string(e.what()).find("dog"), std::string::npos);
  }
}

TEST(FilterPipeline, MissingEmbeddingAndShapeErrors) {
  PipelineFixture fx;
  fx.vocab.attributes[1].words.push_back("unseen");
  EXPECT_THROW(run_filter_pipeline(fx.vocab, fx.bank, fx.p, fx.head, FilterOptions{}),
               MissingEmbeddingError);
  PipelineFixture fy;
  fy.head.W = EmbeddingMatrix::Zero(4, 3);
  fy.head.b = VectorXr::Zero(3);
  EXPECT_THROW(run_filter_pipeline(fy.vocab, fy.bank, fy.p, fy.head, FilterOptions{}), ShapeError);
}

TEST(VocabularyJson, SchemaErrors) {
  EXPECT_THROW(parse_vocabulary("{not json"), FormatError);
  EXPECT_THROW(parse_vocabulary(R"({"classes": []})"), SchemaError);
  EXPECT_THROW(parse_vocabulary(
                   R"({"classes":[{"name":"a","words":["x"]},{"name":"a","words":["y"]}],
                       "attributes":[{"name":"b","words":["z"]}]})"),
               SchemaError);
  EXPECT_THROW(parse_vocabulary(R"({"classes":[{"name":"a","words":["x"]}],
                                    "attributes":[{"name":"b","words":["z"]},{"name":"c","words":["w"]}],
                                    "partitions":[[0],[0,1]]})"),
               SchemaError);
}

}  // namespace
}  // namespace tldr

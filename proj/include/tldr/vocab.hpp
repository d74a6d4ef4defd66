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

// Generated vocabularies and the filters that prune them before they are used
// to build the synthetic text training set.

#ifndef TLDR_VOCAB_HPP_
#define TLDR_VOCAB_HPP_

#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tldr/embedding_store.hpp"
#include "tldr/head.hpp"
#include "tldr/projector.hpp"

namespace tldr {

struct Category {
  std::string name;
  std::vector<std::string> words;
};

struct Vocabulary {
  std::vector<Category> classes;
  std::vector<Category> attributes;
  // Disjoint attribute-index sets covering every attribute. Attribute words
  // only compete with anchors of their own partition.
  std::vector<std::vector<int>> partitions;

  // Throws SchemaError on empty/duplicate names or a bad partition cover.
  void validate() const;
  // Index into `partitions` holding attribute `a`.
  std::size_t partition_of(int a) const;
};

enum class DropReason { kKept, kDuplicate, kSemantic, kLogit, kTTest };
std::string to_string(DropReason r);

struct AuditRecord {
  std::string word;
  std::string category;
  bool kept = true;
  DropReason reason = DropReason::kKept;
  // Semantic: cosine margin over the best rival anchor. Logit: logit margin.
  // t-test: two-sided p-value. Duplicate: 0.
  double score = 0;
};

struct FilteredVocabulary {
  Vocabulary vocab;
  std::vector<AuditRecord> audit;
};

// Text embeddings indexed by (word, template). Row layout is word-major:
// row = word_index * template_count + k.
class TextEmbeddingBank {
 public:
  TextEmbeddingBank() = default;
  TextEmbeddingBank(EmbeddingMatrix data, std::vector<std::string> words, int template_count,
                    int anchor_template = 0);

  Eigen::Index dim() const { return data_.cols(); }
  int template_count() const { return template_count_; }
  int anchor_template() const { return anchor_template_; }
  const std::vector<std::string>& words() const { return words_; }
  const EmbeddingMatrix& data() const { return data_; }

  bool contains(const std::string& word) const { return index_.count(word) != 0; }
  // Throws MissingEmbeddingError.
  Eigen::Index row_index(const std::string& word, int k) const;
  auto row(const std::string& word, int k) const { return data_.row(row_index(word, k)); }
  // Embedding under the anchor template ("a photo of a {c}.").
  auto anchor(const std::string& word) const { return row(word, anchor_template_); }

 private:
  EmbeddingMatrix data_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, Eigen::Index> index_;
  int template_count_ = 1;
  int anchor_template_ = 0;
};

TextEmbeddingBank load_bank(const std::filesystem::path& npy, const std::filesystem::path& index_json);
std::string bank_index_json(const std::vector<std::string>& words, int template_count,
                            int anchor_template, Eigen::Index dim,
                            const std::vector<std::string>& templates = {});

struct FilterOptions {
  bool relu = false;   // ReLU after projection, as at retrain time
  bool ttest = false;  // paired t-test filter on attribute words
  double fdr_q = 0.05;
};

struct WordDecision {
  bool kept = false;
  double score = 0;
};

// Case-insensitive, whitespace-trimmed duplicate removal within each
// category. First occurrence (with its original spelling) wins.
Vocabulary dedup(const Vocabulary& v);
std::string normalize_word(const std::string& w);

// Keeps a word iff its anchor-template embedding is strictly closest, in
// cosine, to anchors[own_index] among `anchors`.
std::vector<WordDecision> semantic_scores(const std::vector<std::string>& words,
                                          const std::vector<std::string>& anchors,
                                          std::size_t own_index, const TextEmbeddingBank& bank);
std::vector<std::string> semantic_filter(const std::vector<std::string>& words,
                                         const std::vector<std::string>& anchors,
                                         std::size_t own_index, const TextEmbeddingBank& bank);

// Keeps a class-y word iff the head's strict argmax on its projected anchor
// embedding is y.
std::vector<WordDecision> logit_scores(const std::vector<std::string>& words,
                                       const TextEmbeddingBank& bank, const Projector<double>& p,
                                       const LinearHead<double>& head, int y, bool relu);
std::vector<std::string> logit_filter(const std::vector<std::string>& words,
                                      const TextEmbeddingBank& bank, const Projector<double>& p,
                                      const LinearHead<double>& head, int y, bool relu);

// Paired t-test per attribute word over all (class word, class) pairs:
// x_i = P(y_i | t^y_i), z_i = P(y_i | average of t^y_i and the attribute
// word). p-values are Benjamini-Hochberg corrected together at level q and
// rejected words are dropped. Scores are the raw p-values.
std::vector<WordDecision> ttest_scores(const std::vector<std::pair<std::string, int>>& class_words,
                                       const std::vector<std::string>& attr_words,
                                       const TextEmbeddingBank& bank, const Projector<double>& p,
                                       const LinearHead<double>& head, bool relu, double fdr_q);
std::vector<std::string> ttest_filter(const std::vector<std::pair<std::string, int>>& class_words,
                                      const std::vector<std::string>& attr_words,
                                      const TextEmbeddingBank& bank, const Projector<double>& p,
                                      const LinearHead<double>& head, bool relu, double fdr_q = 0.05);

// dedup -> semantic (classes over all classes, attributes within their
// partition) -> logit (classes) -> optional t-test (attributes).
// Throws EmptyCategoryError if any category ends up empty.
FilteredVocabulary run_filter_pipeline(const Vocabulary& v, const TextEmbeddingBank& bank,
                                       const Projector<double>& p, const LinearHead<double>& head,
                                       const FilterOptions& opts);

Vocabulary parse_vocabulary(const std::string& json_text, const std::string& origin = "<memory>");
Vocabulary load_vocabulary(const std::filesystem::path& path);
std::string vocabulary_to_json(const Vocabulary& v);
std::string filtered_to_json(const FilteredVocabulary& fv);
FilteredVocabulary parse_filtered(const std::string& json_text, const std::string& origin = "<memory>");

}  // namespace tldr

#endif  // TLDR_VOCAB_HPP_

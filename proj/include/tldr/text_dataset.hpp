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

// Group-keyed training set of averaged (class word, attribute word) text
// embeddings. Nothing is materialized up front; items are fetched lazily with
// a randomly drawn prompt template.

#ifndef TLDR_TEXT_DATASET_HPP_
#define TLDR_TEXT_DATASET_HPP_

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tldr/embedding_store.hpp"
#include "tldr/vocab.hpp"

namespace tldr {

using Rng = std::mt19937_64;

struct GroupSpec {
  int num_classes = 0;
  int num_attributes = 0;
  std::vector<Group> groups;    // valid (y, a) pairs
  std::vector<double> weights;  // one per group, for mean accuracy

  // Full Cartesian product with uniform weights.
  static GroupSpec cartesian(int num_classes, int num_attributes);
  void validate() const;
  // Position of `g` in `groups`, or -1.
  int index_of(Group g) const;
};

GroupSpec parse_group_spec(const std::string& json_text, const std::string& origin = "<memory>");
GroupSpec load_group_spec(const std::filesystem::path& path);
std::string group_spec_to_json(const GroupSpec& spec);

struct PromptTemplateSet {
  std::vector<std::string> templates;  // each has exactly one "{c}"

  std::string render(std::size_t k, const std::string& word) const;
};

PromptTemplateSet load_templates(const std::filesystem::path& path);
// --templates flag, then TLDR_TEMPLATES, then the asset shipped with the build.
std::filesystem::path resolve_templates_path(const std::string& flag_value = {});

struct GroupPairs {
  Group group;
  std::vector<std::string> class_words;
  std::vector<std::string> attr_words;

  std::size_t size() const { return class_words.size() * attr_words.size(); }
};

struct TextPairDataset {
  std::vector<GroupPairs> groups;
  const TextEmbeddingBank* bank = nullptr;
  int template_count = 1;  // templates are drawn from [0, template_count)

  std::size_t min_group_size() const;
};

// One training item: group position and flat pair index i * |attr words| + j.
struct EpochItem {
  std::size_t group = 0;
  std::size_t pair = 0;
  friend bool operator==(const EpochItem&, const EpochItem&) = default;
};

// Cross product of filtered class and attribute words for every group of
// `spec`. `template_count` <= 0 means "all templates in the bank".
// Throws EmptyCategoryError / MissingEmbeddingError.
TextPairDataset build_dataset(const FilteredVocabulary& fv, const GroupSpec& spec,
                              const TextEmbeddingBank& bank, int template_count = 0);

// (z_{P_k}(t^y_i) + z_{P_k}(t^a_j)) / 2 with one k drawn uniformly per call.
VectorXr fetch(const TextPairDataset& ds, std::size_t group, std::size_t i, std::size_t j, Rng& rng);
VectorXr fetch(const TextPairDataset& ds, const EpochItem& item, Rng& rng);

// min-group-size draws per group without replacement, globally shuffled.
std::vector<EpochItem> sample_epoch(const TextPairDataset& ds, Rng& rng);

}  // namespace tldr

#endif  // TLDR_TEXT_DATASET_HPP_

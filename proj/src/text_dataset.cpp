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

#include "tldr/text_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

#include "json.hpp"

#ifndef TLDR_ASSET_DIR
#define TLDR_ASSET_DIR "assets"
#endif

namespace tldr {

using nlohmann::json;

GroupSpec GroupSpec::cartesian(int num_classes, int num_attributes) {
  GroupSpec s;
  s.num_classes = num_classes;
  s.num_attributes = num_attributes;
  for (int y = 0; y < num_classes; ++y) {
    for (int a = 0; a < num_attributes; ++a) s.groups.push_back({y, a});
  }
  s.weights.assign(s.groups.size(), s.groups.empty() ? 0.0 : 1.0 / s.groups.size());
  return s;
}

void GroupSpec::validate() const {
  if (num_classes < 1 || num_attributes < 1) throw SchemaError("group spec needs |Y|, |A| >= 1");
  if (groups.empty()) throw SchemaError("group spec lists no groups");
  std::set<Group> seen;
  for (const Group& g : groups) {
    if (g.y < 0 || g.y >= num_classes || g.a < 0 || g.a >= num_attributes) {
      throw SchemaError("group (" + std::to_string(g.y) + "," + std::to_string(g.a) +
                        ") outside |Y| x |A|");
    }
    if (!seen.insert(g).second) throw SchemaError("group spec repeats a group");
  }
  if (weights.size() != groups.size()) throw SchemaError("group weights and groups differ in length");
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw SchemaError("group weights must be non-negative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw SchemaError("group weights must sum to 1");
}

int GroupSpec::index_of(Group g) const {
  const auto it = std::find(groups.begin(), groups.end(), g);
  return it == groups.end() ? -1 : static_cast<int>(it - groups.begin());
}

GroupSpec parse_group_spec(const std::string& json_text, const std::string& origin) {
  GroupSpec s;
  try {
    const json j = json::parse(json_text);
    s.num_classes = j.at("num_classes").get<int>();
    s.num_attributes = j.at("num_attributes").get<int>();
    if (j.contains("groups")) {
      for (const auto& g : j["groups"]) s.groups.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
    } else {
      s.groups = GroupSpec::cartesian(s.num_classes, s.num_attributes).groups;
    }
    if (j.contains("weights")) {
      s.weights = j["weights"].get<std::vector<double>>();
    } else {
      s.weights.assign(s.groups.size(), s.groups.empty() ? 0.0 : 1.0 / s.groups.size());
    }
  } catch (const json::parse_error& e) {
    throw FormatError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  s.validate();
  return s;
}

GroupSpec load_group_spec(const std::filesystem::path& path) {
  return parse_group_spec(read_file(path), path.string());
}

std::string group_spec_to_json(const GroupSpec& spec) {
  nlohmann::ordered_json j;
  j["num_classes"] = spec.num_classes;
  j["num_attributes"] = spec.num_attributes;
  auto arr = nlohmann::ordered_json::array();
  for (const Group& g : spec.groups) arr.push_back({g.y, g.a});
  j["groups"] = arr;
  j["weights"] = spec.weights;
  return j.dump(1) + "\n";
}

std::string PromptTemplateSet::render(std::size_t k, const std::string& word) const {
  std::string t = templates.at(k);
  const auto pos = t.find("{c}");
  t.replace(pos, 3, word);
  return t;
}

PromptTemplateSet load_templates(const std::filesystem::path& path) {
  PromptTemplateSet set;
  try {
    set.templates = json::parse(read_file(path)).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  if (set.templates.empty()) throw SchemaError(path.string() + ": no templates");
  for (const auto& t : set.templates) {
    const auto first = t.find("{c}");
    if (first == std::string::npos || t.find("{c}", first + 1) != std::string::npos) {
      throw SchemaError(path.string() + ": template '" + t + "' must contain exactly one {c}");
    }
  }
  return set;
}

std::filesystem::path resolve_templates_path(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("TLDR_TEMPLATES"); env && *env) return env;
  return std::filesystem::path(TLDR_ASSET_DIR) / "templates" / "openai_80.json";
}

std::size_t TextPairDataset::min_group_size() const {
  std::size_t n = groups.empty() ? 0 : groups.front().size();
  for (const auto& g : groups) n = std::min(n, g.size());
  return n;
}

TextPairDataset build_dataset(const FilteredVocabulary& fv, const GroupSpec& spec,
                              const TextEmbeddingBank& bank, int template_count) {
  spec.validate();
  if (static_cast<int>(fv.vocab.classes.size()) != spec.num_classes ||
      static_cast<int>(fv.vocab.attributes.size()) != spec.num_attributes) {
    throw SchemaError("vocabulary has " + std::to_string(fv.vocab.classes.size()) + " classes and " +
                      std::to_string(fv.vocab.attributes.size()) + " attributes; group spec says " +
                      std::to_string(spec.num_classes) + " and " + std::to_string(spec.num_attributes));
  }
  TextPairDataset ds;
  ds.bank = &bank;
  ds.template_count = template_count > 0 ? template_count : bank.template_count();
  if (ds.template_count > bank.template_count()) {
    throw MissingEmbeddingError("dataset asks for " + std::to_string(ds.template_count) +
                                " templates but the bank holds " +
                                std::to_string(bank.template_count()));
  }
  for (const Group& g : spec.groups) {
    GroupPairs gp{g, fv.vocab.classes[g.y].words, fv.vocab.attributes[g.a].words};
    if (gp.class_words.empty()) {
      throw EmptyCategoryError("class '" + fv.vocab.classes[g.y].name + "' has no words");
    }
    if (gp.attr_words.empty()) {
      throw EmptyCategoryError("attribute '" + fv.vocab.attributes[g.a].name + "' has no words");
    }
    for (const auto* words : {&gp.class_words, &gp.attr_words}) {
      for (const auto& w : *words) {
        if (!bank.contains(w)) throw MissingEmbeddingError("no bank embedding for '" + w + "'");
      }
    }
    ds.groups.push_back(std::move(gp));
  }
  return ds;
}

VectorXr fetch(const TextPairDataset& ds, std::size_t group, std::size_t i, std::size_t j, Rng& rng) {
  const GroupPairs& gp = ds.groups.at(group);
  if (i >= gp.class_words.size() || j >= gp.attr_words.size()) {
    throw ShapeError("pair index out of range");
  }
  std::uniform_int_distribution<int> pick(0, ds.template_count - 1);
  const int k = pick(rng);
  return 0.5 * (ds.bank->row(gp.class_words[i], k) + ds.bank->row(gp.attr_words[j], k)).transpose();
}

VectorXr fetch(const TextPairDataset& ds, const EpochItem& item, Rng& rng) {
  const std::size_t n_attr = ds.groups.at(item.group).attr_words.size();
  return fetch(ds, item.group, item.pair / n_attr, item.pair % n_attr, rng);
}

std::vector<EpochItem> sample_epoch(const TextPairDataset& ds, Rng& rng) {
  const std::size_t n_min = ds.min_group_size();
  std::vector<EpochItem> items;
  items.reserve(n_min * ds.groups.size());
  std::vector<std::size_t> pool;
  for (std::size_t g = 0; g < ds.groups.size(); ++g) {
    pool.resize(ds.groups[g].size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first n_min slots become a uniform draw.
    for (std::size_t s = 0; s < n_min; ++s) {
      std::uniform_int_distribution<std::size_t> pick(s, pool.size() - 1);
      std::swap(pool[s], pool[pick(rng)]);
      items.push_back({g, pool[s]});
    }
  }
  std::shuffle(items.begin(), items.end(), rng);
  return items;
}

}  // namespace tldr

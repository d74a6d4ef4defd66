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

#include "tldr/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "tldr/stats.hpp"

namespace tldr {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(DropReason r) {
  switch (r) {
    case DropReason::kKept: return "kept";
    case DropReason::kDuplicate: return "duplicate";
    case DropReason::kSemantic: return "semantic";
    case DropReason::kLogit: return "logit";
    case DropReason::kTTest: return "t-test";
  }
  return "kept";
}

namespace {

DropReason reason_from_string(const std::string& s) {
  for (DropReason r : {DropReason::kKept, DropReason::kDuplicate, DropReason::kSemantic,
                       DropReason::kLogit, DropReason::kTTest}) {
    if (to_string(r) == s) return r;
  }
  throw SchemaError("unknown audit reason '" + s + "'");
}

std::vector<Category> parse_categories(const json& arr) {
  std::vector<Category> out;
  for (const auto& c : arr) {
    out.push_back({c.at("name").get<std::string>(), c.at("words").get<std::vector<std::string>>()});
  }
  return out;
}

ordered_json categories_to_json(const std::vector<Category>& cats) {
  auto arr = ordered_json::array();
  for (const auto& c : cats) {
    ordered_json o;
    o["name"] = c.name;
    o["words"] = c.words;
    arr.push_back(o);
  }
  return arr;
}

// Projected (and optionally rectified) anchor-template embeddings of `words`.
EmbeddingMatrix projected_anchors(const std::vector<std::string>& words,
                                  const TextEmbeddingBank& bank, const Projector<double>& p,
                                  bool relu) {
  EmbeddingMatrix z(static_cast<Eigen::Index>(words.size()), bank.dim());
  for (std::size_t i = 0; i < words.size(); ++i) z.row(static_cast<Eigen::Index>(i)) = bank.anchor(words[i]);
  EmbeddingMatrix f = project(p, z);
  if (relu) f = apply_relu(f);
  return f;
}

void check_head(const Projector<double>& p, const LinearHead<double>& head) {
  if (head.input_dim() != p.d_feat()) {
    throw ShapeError("head expects dim " + std::to_string(head.input_dim()) +
                     " but the projector emits " + std::to_string(p.d_feat()));
  }
}

}  // namespace

void Vocabulary::validate() const {
  std::set<std::string> names;
  auto check = [&](const std::vector<Category>& cats, const char* kind) {
    for (const auto& c : cats) {
      if (c.name.empty()) throw SchemaError(std::string(kind) + " category with empty name");
      if (!names.insert(c.name).second) {
        throw SchemaError("category name '" + c.name + "' is not unique");
      }
    }
  };
  check(classes, "class");
  check(attributes, "attribute");
  std::vector<int> seen(attributes.size(), 0);
  for (const auto& part : partitions) {
    for (int a : part) {
      if (a < 0 || static_cast<std::size_t>(a) >= attributes.size()) {
        throw SchemaError("partition references attribute " + std::to_string(a));
      }
      if (seen[a]++) throw SchemaError("attribute " + std::to_string(a) + " is in two partitions");
    }
  }
  for (std::size_t a = 0; a < seen.size(); ++a) {
    if (!seen[a]) throw SchemaError("attribute " + std::to_string(a) + " is in no partition");
  }
}

std::size_t Vocabulary::partition_of(int a) const {
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    if (std::find(partitions[i].begin(), partitions[i].end(), a) != partitions[i].end()) return i;
  }
  throw SchemaError("attribute " + std::to_string(a) + " is in no partition");
}

TextEmbeddingBank::TextEmbeddingBank(EmbeddingMatrix data, std::vector<std::string> words,
                                     int template_count, int anchor_template)
    : data_(std::move(data)),
      words_(std::move(words)),
      template_count_(template_count),
      anchor_template_(anchor_template) {
  if (template_count_ < 1) throw SchemaError("bank template_count must be >= 1");
  if (anchor_template_ < 0 || anchor_template_ >= template_count_) {
    throw SchemaError("bank anchor_template out of range");
  }
  const auto expected = static_cast<Eigen::Index>(words_.size()) * template_count_;
  if (data_.rows() != expected) {
    throw PairingError("bank has " + std::to_string(data_.rows()) + " rows but index implies " +
                       std::to_string(words_.size()) + " words x " +
                       std::to_string(template_count_) + " templates");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<Eigen::Index>(i)).second) {
      throw SchemaError("bank index lists '" + words_[i] + "' twice");
    }
  }
}

Eigen::Index TextEmbeddingBank::row_index(const std::string& word, int k) const {
  const auto it = index_.find(word);
  if (it == index_.end()) throw MissingEmbeddingError("no bank embedding for '" + word + "'");
  if (k < 0 || k >= template_count_) {
    throw MissingEmbeddingError("template " + std::to_string(k) + " missing for '" + word + "'");
  }
  return it->second * template_count_ + k;
}

TextEmbeddingBank load_bank(const std::filesystem::path& npy, const std::filesystem::path& index_json) {
  EmbeddingMatrix data = load_matrix(npy);
  json j;
  try {
    j = json::parse(read_file(index_json));
    auto words = j.at("words").get<std::vector<std::string>>();
    const int k = j.at("template_count").get<int>();
    const int anchor = j.value("anchor_template", 0);
    if (j.contains("dim") && j["dim"].get<Eigen::Index>() != data.cols()) {
      throw PairingError(index_json.string() + " declares dim " + j["dim"].dump() + " but " +
                         npy.string() + " has " + std::to_string(data.cols()) + " columns");
    }
    return TextEmbeddingBank(std::move(data), std::move(words), k, anchor);
  } catch (const json::exception& e) {
    throw SchemaError(index_json.string() + ": " + e.what());
  }
}

std::string bank_index_json(const std::vector<std::string>& words, int template_count,
                            int anchor_template, Eigen::Index dim,
                            const std::vector<std::string>& templates) {
  ordered_json j;
  j["template_count"] = template_count;
  j["anchor_template"] = anchor_template;
  if (dim >= 0) j["dim"] = dim;
  j["layout"] = "row = word_index * template_count + template_index";
  j["words"] = words;
  if (!templates.empty()) j["templates"] = templates;
  return j.dump(1) + "\n";
}

std::string normalize_word(const std::string& w) {
  const auto first = w.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = w.find_last_not_of(" \t\r\n");
  std::string out = w.substr(first, last - first + 1);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Vocabulary dedup(const Vocabulary& v) {
  auto one = [](const Category& c) {
    Category out{c.name, {}};
    std::unordered_set<std::string> seen;
    for (const auto& w : c.words) {
      if (seen.insert(normalize_word(w)).second) out.words.push_back(w);
    }
    return out;
  };
  Vocabulary out;
  out.partitions = v.partitions;
  for (const auto& c : v.classes) out.classes.push_back(one(c));
  for (const auto& c : v.attributes) out.attributes.push_back(one(c));
  return out;
}

std::vector<WordDecision> semantic_scores(const std::vector<std::string>& words,
                                          const std::vector<std::string>& anchors,
                                          std::size_t own_index, const TextEmbeddingBank& bank) {
  if (own_index >= anchors.size()) throw SchemaError("own category index outside the anchor set");
  std::vector<VectorXr> anchor_dirs;
  for (const auto& a : anchors) {
    VectorXr e = bank.anchor(a).transpose();
    const double n = e.norm();
    anchor_dirs.push_back(n > 0 ? VectorXr(e / n) : e);
  }
  std::vector<WordDecision> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    VectorXr e = bank.anchor(w).transpose();
    const double n = e.norm();
    if (n > 0) e /= n;
    VectorXr cos(static_cast<Eigen::Index>(anchors.size()));
    for (std::size_t k = 0; k < anchors.size(); ++k) cos[static_cast<Eigen::Index>(k)] = e.dot(anchor_dirs[k]);
    const auto arg = strict_argmax(cos);
    double rival = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      if (k != own_index) rival = std::max(rival, cos[static_cast<Eigen::Index>(k)]);
    }
    const double own = cos[static_cast<Eigen::Index>(own_index)];
    out.push_back({arg && static_cast<std::size_t>(*arg) == own_index,
                   anchors.size() > 1 ? own - rival : own});
  }
  return out;
}

std::vector<std::string> semantic_filter(const std::vector<std::string>& words,
                                         const std::vector<std::string>& anchors,
                                         std::size_t own_index, const TextEmbeddingBank& bank) {
  const auto d = semantic_scores(words, anchors, own_index, bank);
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (d[i].kept) kept.push_back(words[i]);
  }
  return kept;
}

std::vector<WordDecision> logit_scores(const std::vector<std::string>& words,
                                       const TextEmbeddingBank& bank, const Projector<double>& p,
                                       const LinearHead<double>& head, int y, bool relu) {
  check_head(p, head);
  if (y < 0 || y >= head.num_classes()) throw ShapeError("class index outside the head's outputs");
  const EmbeddingMatrix z = logits(head, projected_anchors(words, bank, p, relu));
  std::vector<WordDecision> out;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto arg = strict_argmax(z.row(i));
    double rival = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      if (k != y) rival = std::max(rival, z(i, k));
    }
    out.push_back({arg && *arg == y, z.cols() > 1 ? z(i, y) - rival : z(i, y)});
  }
  return out;
}

std::vector<std::string> logit_filter(const std::vector<std::string>& words,
                                      const TextEmbeddingBank& bank, const Projector<double>& p,
                                      const LinearHead<double>& head, int y, bool relu) {
  const auto d = logit_scores(words, bank, p, head, y, relu);
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (d[i].kept) kept.push_back(words[i]);
  }
  return kept;
}

std::vector<WordDecision> ttest_scores(const std::vector<std::pair<std::string, int>>& class_words,
                                       const std::vector<std::string>& attr_words,
                                       const TextEmbeddingBank& bank, const Projector<double>& p,
                                       const LinearHead<double>& head, bool relu, double fdr_q) {
  check_head(p, head);
  if (!(fdr_q > 0 && fdr_q < 1)) throw DomainError("fdr_q must lie in (0, 1)");
  const std::size_t n = class_words.size();
  if (n < 2) {
    throw InsufficientSamplesError("t-test filter needs at least 2 class words, got " +
                                   std::to_string(n));
  }
  for (const auto& [w, y] : class_words) {
    if (y < 0 || y >= head.num_classes()) throw ShapeError("class index outside the head's outputs");
  }

  auto class_prob = [&](const EmbeddingMatrix& z) {
    EmbeddingMatrix f = project(p, z);
    if (relu) f = apply_relu(f);
    const EmbeddingMatrix prob = softmax_rows(logits(head, f));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = prob(static_cast<Eigen::Index>(i), class_words[i].second);
    return out;
  };

  EmbeddingMatrix base(static_cast<Eigen::Index>(n), bank.dim());
  for (std::size_t i = 0; i < n; ++i) base.row(static_cast<Eigen::Index>(i)) = bank.anchor(class_words[i].first);
  const std::vector<double> x = class_prob(base);

  std::vector<double> pvalues;
  pvalues.reserve(attr_words.size());
  for (const auto& aw : attr_words) {
    EmbeddingMatrix mixed = base;
    mixed.rowwise() += bank.anchor(aw);
    mixed *= 0.5;
    const std::vector<double> z = class_prob(mixed);
    pvalues.push_back(stats::paired_t_test(x, z).p_value);
  }
  const std::vector<bool> reject = stats::bh_correct(pvalues, fdr_q);
  std::vector<WordDecision> out;
  for (std::size_t j = 0; j < attr_words.size(); ++j) out.push_back({!reject[j], pvalues[j]});
  return out;
}

std::vector<std::string> ttest_filter(const std::vector<std::pair<std::string, int>>& class_words,
                                      const std::vector<std::string>& attr_words,
                                      const TextEmbeddingBank& bank, const Projector<double>& p,
                                      const LinearHead<double>& head, bool relu, double fdr_q) {
  const auto d = ttest_scores(class_words, attr_words, bank, p, head, relu, fdr_q);
  std::vector<std::string> kept;
  for (std::size_t j = 0; j < attr_words.size(); ++j) {
    if (d[j].kept) kept.push_back(attr_words[j]);
  }
  return kept;
}

FilteredVocabulary run_filter_pipeline(const Vocabulary& v, const TextEmbeddingBank& bank,
                                       const Projector<double>& p, const LinearHead<double>& head,
                                       const FilterOptions& opts) {
  v.validate();
  check_head(p, head);
  if (static_cast<Eigen::Index>(v.classes.size()) != head.num_classes()) {
    throw ShapeError("vocabulary has " + std::to_string(v.classes.size()) +
                     " classes but the head has " + std::to_string(head.num_classes()) + " outputs");
  }
  if (bank.dim() != p.d_clip()) {
    throw ShapeError("bank dim " + std::to_string(bank.dim()) + " differs from projector input dim " +
                     std::to_string(p.d_clip()));
  }

  FilteredVocabulary fv;
  fv.vocab = dedup(v);

  // One audit record per original word, in original order.
  auto seed_audit = [&](const std::vector<Category>& orig) {
    std::vector<std::unordered_map<std::string, std::size_t>> where(orig.size());
    for (std::size_t c = 0; c < orig.size(); ++c) {
      std::unordered_set<std::string> seen;
      for (const auto& w : orig[c].words) {
        AuditRecord rec{w, orig[c].name, true, DropReason::kKept, 0.0};
        if (!seen.insert(normalize_word(w)).second) {
          rec.kept = false;
          rec.reason = DropReason::kDuplicate;
          fv.audit.push_back(rec);
          continue;
        }
        where[c][w] = fv.audit.size();
        fv.audit.push_back(rec);
      }
    }
    return where;
  };
  auto class_slots = seed_audit(v.classes);
  auto attr_slots = seed_audit(v.attributes);

  auto apply = [&](Category& cat, std::unordered_map<std::string, std::size_t>& slots,
                   const std::vector<WordDecision>& d, DropReason reason) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < cat.words.size(); ++i) {
      AuditRecord& rec = fv.audit[slots.at(cat.words[i])];
      rec.score = d[i].score;
      if (d[i].kept) {
        kept.push_back(cat.words[i]);
      } else {
        rec.kept = false;
        rec.reason = reason;
      }
    }
    cat.words = std::move(kept);
  };

  std::vector<std::string> class_anchors;
  for (const auto& c : fv.vocab.classes) class_anchors.push_back(c.name);
  for (std::size_t y = 0; y < fv.vocab.classes.size(); ++y) {
    Category& cat = fv.vocab.classes[y];
    apply(cat, class_slots[y], semantic_scores(cat.words, class_anchors, y, bank), DropReason::kSemantic);
    apply(cat, class_slots[y],
          logit_scores(cat.words, bank, p, head, static_cast<int>(y), opts.relu), DropReason::kLogit);
  }

  for (std::size_t a = 0; a < fv.vocab.attributes.size(); ++a) {
    const auto& part = fv.vocab.partitions[fv.vocab.partition_of(static_cast<int>(a))];
    std::vector<std::string> anchors;
    std::size_t own = 0;
    for (std::size_t k = 0; k < part.size(); ++k) {
      if (part[k] == static_cast<int>(a)) own = k;
      anchors.push_back(fv.vocab.attributes[part[k]].name);
    }
    Category& cat = fv.vocab.attributes[a];
    apply(cat, attr_slots[a], semantic_scores(cat.words, anchors, own, bank), DropReason::kSemantic);
  }

  if (opts.ttest) {
    std::vector<std::pair<std::string, int>> class_words;
    for (std::size_t y = 0; y < fv.vocab.classes.size(); ++y) {
      for (const auto& w : fv.vocab.classes[y].words) class_words.emplace_back(w, static_cast<int>(y));
    }
    for (std::size_t a = 0; a < fv.vocab.attributes.size(); ++a) {
      Category& cat = fv.vocab.attributes[a];
      if (cat.words.empty()) continue;
      apply(cat, attr_slots[a],
            ttest_scores(class_words, cat.words, bank, p, head, opts.relu, opts.fdr_q),
            DropReason::kTTest);
    }
  }

  for (const auto* cats : {&fv.vocab.classes, &fv.vocab.attributes}) {
    for (const auto& c : *cats) {
      if (c.words.empty()) throw EmptyCategoryError("filtering emptied category '" + c.name + "'");
    }
  }
  return fv;
}

Vocabulary parse_vocabulary(const std::string& json_text, const std::string& origin) {
  Vocabulary v;
  try {
    const json j = json::parse(json_text);
    v.classes = parse_categories(j.at("classes"));
    v.attributes = parse_categories(j.at("attributes"));
    if (j.contains("partitions") && !j["partitions"].is_null()) {
      v.partitions = j["partitions"].get<std::vector<std::vector<int>>>();
    } else {
      std::vector<int> all(v.attributes.size());
      for (std::size_t a = 0; a < all.size(); ++a) all[a] = static_cast<int>(a);
      v.partitions = {all};
    }
  } catch (const json::parse_error& e) {
    throw FormatError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  v.validate();
  return v;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  return parse_vocabulary(read_file(path), path.string());
}

std::string vocabulary_to_json(const Vocabulary& v) {
  ordered_json j;
  j["classes"] = categories_to_json(v.classes);
  j["attributes"] = categories_to_json(v.attributes);
  j["partitions"] = v.partitions;
  return j.dump(1) + "\n";
}

std::string filtered_to_json(const FilteredVocabulary& fv) {
  ordered_json j;
  j["classes"] = categories_to_json(fv.vocab.classes);
  j["attributes"] = categories_to_json(fv.vocab.attributes);
  j["partitions"] = fv.vocab.partitions;
  auto audit = ordered_json::array();
  for (const auto& r : fv.audit) {
    ordered_json o;
    o["word"] = r.word;
    o["category"] = r.category;
    o["kept"] = r.kept;
    o["reason"] = to_string(r.reason);
    o["score"] = r.score;
    audit.push_back(o);
  }
  j["audit"] = audit;
  return j.dump(1) + "\n";
}

FilteredVocabulary parse_filtered(const std::string& json_text, const std::string& origin) {
  FilteredVocabulary fv;
  fv.vocab = parse_vocabulary(json_text, origin);
  try {
    const json j = json::parse(json_text);
    if (j.contains("audit")) {
      for (const auto& r : j["audit"]) {
        fv.audit.push_back({r.at("word").get<std::string>(), r.at("category").get<std::string>(),
                            r.at("kept").get<bool>(), reason_from_string(r.at("reason").get<std::string>()),
                            r.at("score").get<double>()});
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  return fv;
}

}  // namespace tldr

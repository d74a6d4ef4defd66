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

#include "tldr/eval.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"

namespace tldr {

WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "train" || s == "spec") return WeightMode::kSpec;
  if (s == "uniform") return WeightMode::kUniform;
  if (s == "test") return WeightMode::kTest;
  throw UsageError("unknown weight mode '" + s + "' (want uniform|test|train)");
}

EvalReport evaluate_predictions(std::span<const int> predictions, std::span<const int> labels,
                                std::span<const Group> groups, const GroupSpec& spec,
                                WeightMode mode) {
  spec.validate();
  if (predictions.size() != labels.size() || labels.size() != groups.size()) {
    throw PairingError("predictions, labels and groups differ in length");
  }
  if (labels.empty()) throw EmptyInputError("evaluation set is empty");

  std::vector<std::int64_t> count(spec.groups.size(), 0);
  std::vector<std::int64_t> correct(spec.groups.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (groups[i].y != labels[i]) {
      throw SchemaError("row " + std::to_string(i) + ": group class disagrees with label");
    }
    const int g = spec.index_of(groups[i]);
    if (g < 0) {
      throw SchemaError("row " + std::to_string(i) + ": group (" + std::to_string(groups[i].y) +
                        "," + std::to_string(groups[i].a) + ") not in the group spec");
    }
    ++count[g];
    if (predictions[i] == labels[i]) ++correct[g];
  }

  EvalReport r;
  std::vector<double> raw_weights;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    if (count[g] == 0) {
      r.missing.push_back(spec.groups[g]);
      continue;
    }
    r.per_group.push_back({spec.groups[g], count[g],
                           static_cast<double>(correct[g]) / static_cast<double>(count[g])});
    switch (mode) {
      case WeightMode::kSpec: raw_weights.push_back(spec.weights[g]); break;
      case WeightMode::kUniform: raw_weights.push_back(1.0); break;
      case WeightMode::kTest: raw_weights.push_back(static_cast<double>(count[g])); break;
    }
  }
  double total = 0;
  for (double w : raw_weights) total += w;
  if (!(total > 0)) {
    // Every present group has zero spec weight; fall back to uniform.
    std::fill(raw_weights.begin(), raw_weights.end(), 1.0);
    total = static_cast<double>(raw_weights.size());
  }
  r.wga = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.per_group.size(); ++k) {
    r.weights.push_back(raw_weights[k] / total);
    r.mean_acc += r.weights.back() * r.per_group[k].acc;
    r.wga = std::min(r.wga, r.per_group[k].acc);
  }
  return r;
}

EvalReport evaluate(const LinearHead<double>& head, const EmbeddingMatrix& features,
                    std::span<const int> labels, std::span<const Group> groups,
                    const GroupSpec& spec, WeightMode mode) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw PairingError("features have " + std::to_string(features.rows()) + " rows but " +
                       std::to_string(labels.size()) + " labels");
  }
  const EmbeddingMatrix z = logits(head, features);
  std::vector<int> pred(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto arg = strict_argmax(z.row(i));
    pred[static_cast<std::size_t>(i)] = arg ? static_cast<int>(*arg) : -1;
  }
  return evaluate_predictions(pred, labels, groups, spec, mode);
}

ReportDelta compare_reports(const EvalReport& a, const EvalReport& b) {
  if (a.per_group.size() != b.per_group.size()) {
    throw SchemaError("reports cover " + std::to_string(a.per_group.size()) + " and " +
                      std::to_string(b.per_group.size()) + " groups");
  }
  ReportDelta d;
  for (std::size_t k = 0; k < a.per_group.size(); ++k) {
    if (a.per_group[k].group != b.per_group[k].group) {
      throw SchemaError("reports list different groups at position " + std::to_string(k));
    }
    d.per_group.push_back({a.per_group[k].group, a.per_group[k].acc, b.per_group[k].acc,
                           b.per_group[k].acc - a.per_group[k].acc});
  }
  d.wga_delta = b.wga - a.wga;
  d.mean_acc_delta = b.mean_acc - a.mean_acc;
  return d;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& g : r.per_group) {
    nlohmann::ordered_json o;
    o["y"] = g.group.y;
    o["a"] = g.group.a;
    o["n"] = g.n;
    o["acc"] = g.acc;
    arr.push_back(o);
  }
  j["per_group"] = arr;
  j["wga"] = r.wga;
  j["mean_acc"] = r.mean_acc;
  j["weights_used"] = r.weights;
  if (!r.missing.empty()) {
    auto miss = nlohmann::ordered_json::array();
    for (const Group& g : r.missing) miss.push_back({g.y, g.a});
    j["missing_groups"] = miss;
  }
  if (!r.head_meta.empty()) j["head_meta"] = r.head_meta;
  return j.dump(1) + "\n";
}

EvalReport parse_report(const std::string& json_text, const std::string& origin) {
  EvalReport r;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& o : j.at("per_group")) {
      r.per_group.push_back({{o.at("y").get<int>(), o.at("a").get<int>()},
                             o.at("n").get<std::int64_t>(), o.at("acc").get<double>()});
    }
    r.wga = j.at("wga").get<double>();
    r.mean_acc = j.at("mean_acc").get<double>();
    r.weights = j.at("weights_used").get<std::vector<double>>();
    if (j.contains("missing_groups")) {
      for (const auto& g : j["missing_groups"]) r.missing.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
    }
    if (j.contains("head_meta")) r.head_meta = j["head_meta"].get<std::string>();
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(origin + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  return r;
}

std::string delta_to_json(const ReportDelta& d) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& g : d.per_group) {
    nlohmann::ordered_json o;
    o["y"] = g.group.y;
    o["a"] = g.group.a;
    o["acc_a"] = g.acc_a;
    o["acc_b"] = g.acc_b;
    o["delta"] = g.delta;
    arr.push_back(o);
  }
  j["per_group"] = arr;
  j["wga_delta"] = d.wga_delta;
  j["mean_acc_delta"] = d.mean_acc_delta;
  return j.dump(1) + "\n";
}

}  // namespace tldr

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

// Per-group accuracy, worst-group accuracy and weighted mean accuracy.

#ifndef TLDR_EVAL_HPP_
#define TLDR_EVAL_HPP_

#include <span>
#include <string>
#include <vector>

#include "tldr/embedding_store.hpp"
#include "tldr/head.hpp"
#include "tldr/text_dataset.hpp"

namespace tldr {

struct GroupAccuracy {
  Group group;
  std::int64_t n = 0;
  double acc = 0;
};

struct EvalReport {
  std::vector<GroupAccuracy> per_group;  // groups present in the data, spec order
  std::vector<Group> missing;            // spec groups with no samples
  double wga = 0;
  double mean_acc = 0;
  std::vector<double> weights;  // aligned with per_group, renormalized over present groups
  std::string head_meta;        // free-form provenance
};

enum class WeightMode { kSpec, kUniform, kTest };
WeightMode weight_mode_from_string(const std::string& s);

// Predictions use the strict argmax of the head's logits; ties are wrong.
EvalReport evaluate(const LinearHead<double>& head, const EmbeddingMatrix& features,
                    std::span<const int> labels, std::span<const Group> groups,
                    const GroupSpec& spec, WeightMode mode = WeightMode::kSpec);

// Same, from precomputed predictions (-1 for a tie).
EvalReport evaluate_predictions(std::span<const int> predictions, std::span<const int> labels,
                                std::span<const Group> groups, const GroupSpec& spec,
                                WeightMode mode = WeightMode::kSpec);

struct GroupDelta {
  Group group;
  double acc_a = 0;
  double acc_b = 0;
  double delta = 0;  // b - a
};

struct ReportDelta {
  std::vector<GroupDelta> per_group;
  double wga_delta = 0;
  double mean_acc_delta = 0;
};

// Throws SchemaError if the reports cover different groups.
ReportDelta compare_reports(const EvalReport& a, const EvalReport& b);

std::string report_to_json(const EvalReport& r);
EvalReport parse_report(const std::string& json_text, const std::string& origin = "<memory>");
std::string delta_to_json(const ReportDelta& d);

}  // namespace tldr

#endif  // TLDR_EVAL_HPP_

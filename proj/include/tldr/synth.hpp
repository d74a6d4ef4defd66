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

// Desk-scale synthetic worlds with a planted constant modality gap, a known
// gap-orthogonal linear map into feature space and a spurious attribute, plus
// the reference solvers the tests compare against.
//
// Geometry of the joint space (all directions mutually orthonormal):
//   image  z_I = mean_norm * m + class_scale * u_y + attr_scale * v_a + content + g
//   text   z_T = z_I - g + pair jitter
//   word   e(t, k) = mean_norm * m + 2 * scale * concept(t) + word jitter + template jitter
// so the average of a class word and an attribute word sits where the text of
// an image from that group would. Image features are
//   f = ReLU(W_true^T z_I + b_true + map noise),  W_true^T g = 0,
// with W_true^T m carrying a positive offset so the ReLU rarely clips.

#ifndef TLDR_SYNTH_HPP_
#define TLDR_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tldr/embedding_store.hpp"
#include "tldr/head.hpp"
#include "tldr/projector.hpp"
#include "tldr/text_dataset.hpp"
#include "tldr/train.hpp"
#include "tldr/vocab.hpp"

namespace tldr::synth {

struct SynthWorld {
  std::uint64_t seed = 0;
  int d_clip = 32;
  int d_feat = 24;

  GroupSpec spec;                       // groups and class/attribute counts
  std::vector<int> majority_attribute;  // per class
  std::vector<std::vector<int>> partitions;
  std::vector<std::string> class_names;
  std::vector<std::string> attribute_names;

  double minority_fraction = 0.05;  // rho, train split; val and test are group-balanced

  double mean_norm = 4.0;
  double gap_norm = 3.0;
  double class_scale = 1.0;
  double attr_scale = 1.5;
  double content_sigma = 0.35;         // per-dim image content spread
  double content_sigma_shared = 0.003; // spread along the shared mean and gap directions
  double pair_sigma = 0.1;             // sigma_j, per-dim text-vs-image jitter
  double map_sigma = 0.05;             // sigma_m, per-dim feature noise
  double feature_offset = 3.0;         // W_true^T (mean_norm m)
  double word_sigma = 0.05;
  double template_sigma = 0.05;
  double leak_scale = 2.0;  // class content carried by class-leaking attribute words

  int n_train = 2000;
  int n_val = 400;
  int n_test = 1000;
  int n_gap_pairs = 1000;
  int words_per_class = 20;
  int words_per_attribute = 20;
  int mislabeled_per_category = 2;  // semantic-filter targets
  int logit_bad_per_class = 2;      // logit-filter targets
  int leaking_per_attribute = 2;    // t-test targets
  int duplicates_per_category = 1;

  int template_count = 80;
  int anchor_template = 39;  // "a photo of a {c}." in the shipped template list

  TrainConfig erm;  // trainer settings for the biased initial head

  void validate() const;
};

// tiny, waterbirds-like, spuco-like
SynthWorld preset(const std::string& name, std::uint64_t seed);

struct PairedSplit {
  EmbeddingMatrix clip_image;
  EmbeddingMatrix clip_text;
  EmbeddingMatrix features;
  std::vector<int> labels;
  std::vector<Group> groups;
};

struct PlantedTruth {
  std::vector<std::string> mislabeled_class_words;
  std::vector<std::string> logit_bad_class_words;
  std::vector<std::string> mislabeled_attribute_words;
  std::vector<std::string> leaking_attribute_words;
  std::vector<std::string> duplicate_words;
};

struct SynthBundle {
  SynthWorld world;
  EmbeddingMatrix W_true;
  VectorXr b_true;
  VectorXr g_true;

  EmbeddingMatrix gap_images;  // generic image-text pairs for gap estimation
  EmbeddingMatrix gap_texts;

  PairedSplit train, val, test;

  Vocabulary vocab;
  TextEmbeddingBank bank;
  PlantedTruth truth;
  LinearHead<double> head_init;  // ERM on the imbalanced training split
};

SynthBundle generate(const SynthWorld& world);

// Writes every artifact in the formats the CLI consumes.
void write_bundle(const SynthBundle& b, const std::filesystem::path& dir);

ValidationSet validation_set(const SynthBundle& b);

struct KktSolution {
  EmbeddingMatrix W;
  VectorXr b;
  VectorXr nu;  // one multiplier per output column
};

// Solves the stacked stationarity + constraint system
//   [2(X^T X + lambda I)  g] [W_j ]   [2 X^T Y_j]
//   [        g^T         0] [nu_j] = [    0    ]
// column by column with a pivoted LU. Throws SingularMatrixError.
KktSolution kkt_oracle(const EmbeddingMatrix& X, const EmbeddingMatrix& Y, const VectorXr& g,
                       double lambda);

// Projected gradient descent on the same problem.
EmbeddingMatrix projected_gradient_oracle(const EmbeddingMatrix& X, const EmbeddingMatrix& Y,
                                          const VectorXr& g, double lambda, int iterations);

// Same trainer as text retraining, fed group-balanced real image features.
LinearHead<double> balanced_retrain_oracle(const EmbeddingMatrix& features,
                                           std::span<const int> labels,
                                           std::span<const Group> groups,
                                           const LinearHead<double>& head_init,
                                           const ValidationSet& val, const TrainConfig& cfg);

// Mean per-dim L1 distance between image features and projected paired texts.
double cross_modal_distance(const Projector<double>& p, const PairedSplit& split, bool relu);

}  // namespace tldr::synth

#endif  // TLDR_SYNTH_HPP_

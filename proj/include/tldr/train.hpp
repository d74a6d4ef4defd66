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

// Minibatch retraining of the last linear layer with early stopping on
// validation worst-group accuracy.

#ifndef TLDR_TRAIN_HPP_
#define TLDR_TRAIN_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tldr/eval.hpp"
#include "tldr/head.hpp"
#include "tldr/projector.hpp"
#include "tldr/text_dataset.hpp"

namespace tldr {

enum class OptimizerKind { kSgd, kAdamW };
enum class SchedulerKind { kNone, kCosine };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double lr = 1e-2;
  double weight_decay = 0;
  double momentum = 0;  // SGD only
  int batch_size = 128;
  int epochs = 10;
  SchedulerKind scheduler = SchedulerKind::kNone;
  bool relu_on_projection = false;
  std::uint64_t seed = 0;
  // Project the whole bank once instead of per fetch.
  bool cache_projected = false;

  void validate() const;
};

std::string config_to_json(const TrainConfig& cfg);
TrainConfig parse_train_config(const std::string& json_text, const std::string& origin = "<memory>");

struct ValidationSet {
  EmbeddingMatrix features;
  std::vector<int> labels;
  std::vector<Group> groups;
  GroupSpec spec;
};

struct LossAndGrad {
  double loss = 0;
  Matrix<double> grad_W;
  VectorXr grad_b;
};

// Mean softmax cross-entropy and its exact gradient.
LossAndGrad forward_loss(const LinearHead<double>& head, const EmbeddingMatrix& batch,
                         std::span<const int> labels);

// Learning rate used during `epoch` (0-based).
double scheduled_lr(const TrainConfig& cfg, int epoch);

class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& cfg);
  // SGD adds weight decay to the gradient; AdamW decays the weights directly.
  void step(LinearHead<double>& head, const LossAndGrad& g, double lr);

 private:
  TrainConfig cfg_;
  long step_count_ = 0;
  Matrix<double> m_W_, v_W_;
  VectorXr m_b_, v_b_;
};

// Produces one epoch of training rows at a time.
class EpochSource {
 public:
  virtual ~EpochSource() = default;
  // Draws the epoch's item order; returns the number of items.
  virtual std::size_t begin_epoch(Rng& rng) = 0;
  // Materializes items [begin, end) of the current epoch.
  virtual void batch(std::size_t begin, std::size_t end, Rng& rng, EmbeddingMatrix& features,
                     std::vector<int>& labels) = 0;
};

// Averaged text embeddings pushed through the projector (and ReLU).
class TextEpochSource : public EpochSource {
 public:
  TextEpochSource(const TextPairDataset& ds, const Projector<double>& p, bool relu, bool cache);
  std::size_t begin_epoch(Rng& rng) override;
  void batch(std::size_t begin, std::size_t end, Rng& rng, EmbeddingMatrix& features,
             std::vector<int>& labels) override;

 private:
  const TextPairDataset& ds_;
  const Projector<double>& p_;
  bool relu_;
  EmbeddingMatrix projected_bank_;  // filled when caching
  bool cached_ = false;
  std::vector<EpochItem> items_;
};

// Real feature rows; either every row per epoch or a group-balanced draw.
class FeatureEpochSource : public EpochSource {
 public:
  FeatureEpochSource(const EmbeddingMatrix& features, std::span<const int> labels,
                     std::span<const Group> groups, bool group_balanced);
  std::size_t begin_epoch(Rng& rng) override;
  void batch(std::size_t begin, std::size_t end, Rng& rng, EmbeddingMatrix& features,
             std::vector<int>& labels) override;

 private:
  const EmbeddingMatrix& features_;
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> by_group_;
  bool balanced_;
  std::vector<std::size_t> order_;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0;
  double val_wga = 0;
  double lr = 0;
};

struct TrainResult {
  LinearHead<double> head_best;
  LinearHead<double> head_final;  // weights after the last epoch
  int best_epoch = -1;
  double best_val_wga = -1;
  std::vector<EpochRecord> history;
};

// Generic loop: per epoch draw items, step per minibatch, evaluate validation
// WGA on raw features and keep the head with the strictly best WGA (earliest
// epoch wins ties). Throws DivergenceError on a non-finite loss.
TrainResult train_head(const LinearHead<double>& head_init, EpochSource& source,
                       const ValidationSet& val, const TrainConfig& cfg);

// Last-layer retraining on the synthetic text dataset.
TrainResult retrain(const LinearHead<double>& head_init, const TextPairDataset& ds,
                    const Projector<double>& p, const ValidationSet& val, const TrainConfig& cfg);

std::string history_to_jsonl(const std::vector<EpochRecord>& history);
void save_train_result(const TrainResult& r, const TrainConfig& cfg, const std::filesystem::path& dir);

}  // namespace tldr

#endif  // TLDR_TRAIN_HPP_

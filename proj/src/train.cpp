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

#include "tldr/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "json.hpp"

namespace tldr {

void TrainConfig::validate() const {
  if (!(lr >= 0) || !std::isfinite(lr)) throw UsageError("learning rate must be finite and >= 0");
  if (!(weight_decay >= 0)) throw UsageError("weight decay must be >= 0");
  if (!(momentum >= 0 && momentum < 1)) throw UsageError("momentum must lie in [0, 1)");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
}

std::string config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["optimizer"] = cfg.optimizer == OptimizerKind::kSgd ? "sgd" : "adamw";
  j["lr"] = cfg.lr;
  j["weight_decay"] = cfg.weight_decay;
  j["momentum"] = cfg.momentum;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["scheduler"] = cfg.scheduler == SchedulerKind::kNone ? "none" : "cosine";
  j["relu_on_projection"] = cfg.relu_on_projection;
  j["seed"] = cfg.seed;
  j["cache_projected"] = cfg.cache_projected;
  return j.dump();
}

TrainConfig parse_train_config(const std::string& json_text, const std::string& origin) {
  TrainConfig cfg;
  try {
    const auto j = nlohmann::json::parse(json_text);
    const std::string opt = j.value("optimizer", "sgd");
    if (opt == "sgd") {
      cfg.optimizer = OptimizerKind::kSgd;
    } else if (opt == "adamw") {
      cfg.optimizer = OptimizerKind::kAdamW;
    } else {
      throw SchemaError(origin + ": unknown optimizer '" + opt + "'");
    }
    cfg.lr = j.value("lr", cfg.lr);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    const std::string sched = j.value("scheduler", "none");
    if (sched == "none") {
      cfg.scheduler = SchedulerKind::kNone;
    } else if (sched == "cosine") {
      cfg.scheduler = SchedulerKind::kCosine;
    } else {
      throw SchemaError(origin + ": unknown scheduler '" + sched + "'");
    }
    cfg.relu_on_projection = j.value("relu_on_projection", cfg.relu_on_projection);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.cache_projected = j.value("cache_projected", cfg.cache_projected);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

LossAndGrad forward_loss(const LinearHead<double>& head, const EmbeddingMatrix& batch,
                         std::span<const int> labels) {
  if (batch.rows() == 0) throw EmptyInputError("forward_loss on an empty batch");
  if (static_cast<std::size_t>(batch.rows()) != labels.size()) {
    throw PairingError("batch has " + std::to_string(batch.rows()) + " rows but " +
                       std::to_string(labels.size()) + " labels");
  }
  const Matrix<double> z = logits(head, batch);
  const Eigen::Index n = z.rows();
  const Eigen::Index c = z.cols();
  Matrix<double> dz(n, c);
  double loss = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= c) throw ShapeError("label " + std::to_string(y) + " outside the head's classes");
    const double mx = z.row(i).maxCoeff();
    const auto e = (z.row(i).array() - mx).exp();
    const double sum = e.sum();
    loss += std::log(sum) + mx - z(i, y);
    dz.row(i) = e / sum;
    dz(i, y) -= 1.0;
  }
  dz /= static_cast<double>(n);
  LossAndGrad out;
  out.loss = loss / static_cast<double>(n);
  out.grad_W = batch.transpose() * dz;
  out.grad_b = dz.colwise().sum().transpose();
  return out;
}

double scheduled_lr(const TrainConfig& cfg, int epoch) {
  if (cfg.scheduler == SchedulerKind::kNone) return cfg.lr;
  return 0.5 * cfg.lr * (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs));
}

Optimizer::Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}

void Optimizer::step(LinearHead<double>& head, const LossAndGrad& g, double lr) {
  if (m_W_.size() == 0) {
    m_W_ = Matrix<double>::Zero(head.W.rows(), head.W.cols());
    v_W_ = m_W_;
    m_b_ = VectorXr::Zero(head.b.size());
    v_b_ = m_b_;
  }
  ++step_count_;
  if (cfg_.optimizer == OptimizerKind::kSgd) {
    Matrix<double> gW = g.grad_W + cfg_.weight_decay * head.W;
    VectorXr gb = g.grad_b + cfg_.weight_decay * head.b;
    if (cfg_.momentum > 0) {
      if (step_count_ == 1) {
        m_W_ = gW;
        m_b_ = gb;
      } else {
        m_W_ = cfg_.momentum * m_W_ + gW;
        m_b_ = cfg_.momentum * m_b_ + gb;
      }
      gW = m_W_;
      gb = m_b_;
    }
    head.W -= lr * gW;
    head.b -= lr * gb;
    return;
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  head.W *= (1.0 - lr * cfg_.weight_decay);
  head.b *= (1.0 - lr * cfg_.weight_decay);
  m_W_ = kBeta1 * m_W_ + (1 - kBeta1) * g.grad_W;
  v_W_ = kBeta2 * v_W_ + (1 - kBeta2) * g.grad_W.cwiseAbs2();
  m_b_ = kBeta1 * m_b_ + (1 - kBeta1) * g.grad_b;
  v_b_ = kBeta2 * v_b_ + (1 - kBeta2) * g.grad_b.cwiseAbs2();
  const double bc1 = 1 - std::pow(kBeta1, static_cast<double>(step_count_));
  const double bc2 = 1 - std::pow(kBeta2, static_cast<double>(step_count_));
  head.W.array() -= lr * (m_W_.array() / bc1) / ((v_W_.array() / bc2).sqrt() + kEps);
  head.b.array() -= lr * (m_b_.array() / bc1) / ((v_b_.array() / bc2).sqrt() + kEps);
}

TextEpochSource::TextEpochSource(const TextPairDataset& ds, const Projector<double>& p, bool relu,
                                 bool cache)
    : ds_(ds), p_(p), relu_(relu) {
  if (ds_.bank == nullptr) throw SchemaError("text dataset has no embedding bank");
  if (ds_.bank->dim() != p_.d_clip()) {
    throw ShapeError("bank dim " + std::to_string(ds_.bank->dim()) + " differs from projector input dim " +
                     std::to_string(p_.d_clip()));
  }
  if (cache) {
    projected_bank_ = project(p_, ds_.bank->data());
    cached_ = true;
  }
}

std::size_t TextEpochSource::begin_epoch(Rng& rng) {
  items_ = sample_epoch(ds_, rng);
  return items_.size();
}

void TextEpochSource::batch(std::size_t begin, std::size_t end, Rng& rng,
                            EmbeddingMatrix& features, std::vector<int>& labels) {
  const auto n = static_cast<Eigen::Index>(end - begin);
  labels.resize(end - begin);
  if (cached_) {
    features.resize(n, p_.d_feat());
    std::uniform_int_distribution<int> pick(0, ds_.template_count - 1);
    for (std::size_t r = begin; r < end; ++r) {
      const EpochItem& it = items_[r];
      const GroupPairs& gp = ds_.groups[it.group];
      const std::size_t n_attr = gp.attr_words.size();
      const int k = pick(rng);
      const auto row = static_cast<Eigen::Index>(r - begin);
      features.row(row) = 0.5 * (projected_bank_.row(ds_.bank->row_index(gp.class_words[it.pair / n_attr], k)) +
                                 projected_bank_.row(ds_.bank->row_index(gp.attr_words[it.pair % n_attr], k)));
      labels[r - begin] = gp.group.y;
    }
  } else {
    EmbeddingMatrix z(n, ds_.bank->dim());
    for (std::size_t r = begin; r < end; ++r) {
      z.row(static_cast<Eigen::Index>(r - begin)) = fetch(ds_, items_[r], rng).transpose();
      labels[r - begin] = ds_.groups[items_[r].group].group.y;
    }
    features = project(p_, z);
  }
  if (relu_) features = apply_relu(features);
}

FeatureEpochSource::FeatureEpochSource(const EmbeddingMatrix& features, std::span<const int> labels,
                                       std::span<const Group> groups, bool group_balanced)
    : features_(features), labels_(labels.begin(), labels.end()), balanced_(group_balanced) {
  if (static_cast<std::size_t>(features.rows()) != labels.size() || labels.size() != groups.size()) {
    throw PairingError("features, labels and groups differ in length");
  }
  if (labels.empty()) throw EmptyInputError("no training rows");
  std::vector<Group> keys;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto it = std::find(keys.begin(), keys.end(), groups[i]);
    if (it == keys.end()) {
      keys.push_back(groups[i]);
      by_group_.emplace_back();
      it = keys.end() - 1;
    }
    by_group_[static_cast<std::size_t>(it - keys.begin())].push_back(i);
  }
}

std::size_t FeatureEpochSource::begin_epoch(Rng& rng) {
  order_.clear();
  if (!balanced_) {
    order_.resize(labels_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  } else {
    std::size_t n_min = by_group_.front().size();
    for (const auto& g : by_group_) n_min = std::min(n_min, g.size());
    for (auto pool : by_group_) {
      for (std::size_t s = 0; s < n_min; ++s) {
        std::uniform_int_distribution<std::size_t> pick(s, pool.size() - 1);
        std::swap(pool[s], pool[pick(rng)]);
        order_.push_back(pool[s]);
      }
    }
  }
  std::shuffle(order_.begin(), order_.end(), rng);
  return order_.size();
}

void FeatureEpochSource::batch(std::size_t begin, std::size_t end, Rng&, EmbeddingMatrix& features,
                               std::vector<int>& labels) {
  features.resize(static_cast<Eigen::Index>(end - begin), features_.cols());
  labels.resize(end - begin);
  for (std::size_t r = begin; r < end; ++r) {
    features.row(static_cast<Eigen::Index>(r - begin)) = features_.row(static_cast<Eigen::Index>(order_[r]));
    labels[r - begin] = labels_[order_[r]];
  }
}

TrainResult train_head(const LinearHead<double>& head_init, EpochSource& source,
                       const ValidationSet& val, const TrainConfig& cfg) {
  cfg.validate();
  if (val.features.rows() == 0) throw EmptyInputError("validation set is empty");
  if (val.features.cols() != head_init.input_dim()) {
    throw ShapeError("validation features have dim " + std::to_string(val.features.cols()) +
                     " but the head expects " + std::to_string(head_init.input_dim()));
  }

  Rng rng(cfg.seed);
  LinearHead<double> head = head_init;
  Optimizer opt(cfg);
  TrainResult result;
  result.head_best = head_init;

  EmbeddingMatrix xb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = scheduled_lr(cfg, epoch);
    const std::size_t n = source.begin_epoch(rng);
    double loss_sum = 0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const std::size_t end = std::min(n, begin + static_cast<std::size_t>(cfg.batch_size));
      source.batch(begin, end, rng, xb, yb);
      const LossAndGrad g = forward_loss(head, xb, yb);
      if (!std::isfinite(g.loss)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index));
      }
      loss_sum += g.loss * static_cast<double>(end - begin);
      opt.step(head, g, lr);
    }
    const EvalReport rep = evaluate(head, val.features, val.labels, val.groups, val.spec);
    EpochRecord rec{epoch, n ? loss_sum / static_cast<double>(n) : 0.0, rep.wga, lr};
    result.history.push_back(rec);
    if (rep.wga > result.best_val_wga) {
      result.best_val_wga = rep.wga;
      result.best_epoch = epoch;
      result.head_best = head;
    }
  }
  result.head_final = head;
  return result;
}

TrainResult retrain(const LinearHead<double>& head_init, const TextPairDataset& ds,
                    const Projector<double>& p, const ValidationSet& val, const TrainConfig& cfg) {
  if (p.d_feat() != head_init.input_dim()) {
    throw ShapeError("projector emits dim " + std::to_string(p.d_feat()) + " but the head expects " +
                     std::to_string(head_init.input_dim()));
  }
  TextEpochSource source(ds, p, cfg.relu_on_projection, cfg.cache_projected);
  return train_head(head_init, source, val, cfg);
}

std::string history_to_jsonl(const std::vector<EpochRecord>& history) {
  std::string out;
  for (const auto& r : history) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["loss"] = r.loss;
    j["val_wga"] = r.val_wga;
    j["lr"] = r.lr;
    out += j.dump() + "\n";
  }
  return out;
}

void save_train_result(const TrainResult& r, const TrainConfig& cfg, const std::filesystem::path& dir) {
  save_head(r.head_best, dir);
  nlohmann::ordered_json meta;
  meta["best_epoch"] = r.best_epoch;
  meta["best_val_wga"] = r.best_val_wga;
  meta["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
  write_file(dir / "meta.json", meta.dump(1) + "\n");
  write_file(dir / "history.jsonl", history_to_jsonl(r.history));
}

}  // namespace tldr

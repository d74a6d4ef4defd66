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

#include "tldr/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "json.hpp"

namespace tldr::synth {
namespace {

EmbeddingMatrix gaussian(Eigen::Index rows, Eigen::Index cols, double sigma, Rng& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  EmbeddingMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  }
  return m;
}

VectorXr gaussian_vector(Eigen::Index n, double sigma, Rng& rng) {
  return gaussian(n, 1, sigma, rng).col(0);
}

std::string padded(int i, int width) {
  std::string s = std::to_string(i);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

// Train proportions: each class is equally likely, its majority attribute
// takes 1 - rho and the remaining compatible attributes share rho.
std::vector<double> train_weights(const SynthWorld& w) {
  std::vector<double> out;
  const double per_class = 1.0 / w.spec.num_classes;
  for (const Group& g : w.spec.groups) {
    int compatible = 0;
    for (const Group& h : w.spec.groups) compatible += h.y == g.y;
    if (compatible == 1) {
      out.push_back(per_class);
    } else if (g.a == w.majority_attribute[static_cast<std::size_t>(g.y)]) {
      out.push_back(per_class * (1.0 - w.minority_fraction));
    } else {
      out.push_back(per_class * w.minority_fraction / (compatible - 1));
    }
  }
  return out;
}

struct Geometry {
  VectorXr m, g_hat;
  std::vector<VectorXr> u, v;
};

class World {
 public:
  World(const SynthWorld& w, Rng& rng) : w_(w), rng_(rng) {
    const int d = w.d_clip;
    const Eigen::HouseholderQR<EmbeddingMatrix> qr(gaussian(d, d, 1.0, rng));
    const EmbeddingMatrix q = qr.householderQ();
    geo_.m = q.col(0);
    geo_.g_hat = q.col(1);
    for (int y = 0; y < w.spec.num_classes; ++y) geo_.u.push_back(q.col(2 + y));
    for (int a = 0; a < w.spec.num_attributes; ++a) geo_.v.push_back(q.col(2 + w.spec.num_classes + a));
    g_true_ = w.gap_norm * geo_.g_hat;

    // Random map with a positive response to the shared mean direction, then
    // projected onto the gap's orthogonal complement.
    EmbeddingMatrix w0 = gaussian(d, w.d_feat, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    w0 -= geo_.m * (geo_.m.transpose() * w0);
    std::uniform_real_distribution<double> jitter(0.75, 1.25);
    for (int j = 0; j < w.d_feat; ++j) w0.col(j) += geo_.m * (w.feature_offset * jitter(rng) / w.mean_norm);
    W_true_ = w0 - geo_.g_hat * (geo_.g_hat.transpose() * w0);
    b_true_ = VectorXr::Zero(w.d_feat);
  }

  const Geometry& geo() const { return geo_; }
  const EmbeddingMatrix& W_true() const { return W_true_; }
  const VectorXr& b_true() const { return b_true_; }
  const VectorXr& g_true() const { return g_true_; }

  VectorXr content() {
    VectorXr c = gaussian_vector(w_.d_clip, w_.content_sigma, rng_);
    const double shrink = w_.content_sigma_shared / w_.content_sigma - 1.0;
    c += geo_.m * (geo_.m.dot(c) * shrink) + geo_.g_hat * (geo_.g_hat.dot(c) * shrink);
    return c;
  }

  VectorXr image(Group grp) {
    return w_.mean_norm * geo_.m + w_.class_scale * geo_.u[static_cast<std::size_t>(grp.y)] +
           w_.attr_scale * geo_.v[static_cast<std::size_t>(grp.a)] + content() + g_true_;
  }

  VectorXr generic_image() {
    VectorXr z = w_.mean_norm * geo_.m + content() + g_true_;
    std::normal_distribution<double> n(0.0, 1.0);
    for (const auto& u : geo_.u) z += w_.class_scale * n(rng_) * u;
    for (const auto& v : geo_.v) z += w_.attr_scale * n(rng_) * v;
    return z;
  }

  VectorXr paired_text(const VectorXr& image) {
    return image - g_true_ + gaussian_vector(w_.d_clip, w_.pair_sigma, rng_);
  }

  VectorXr features(const VectorXr& image) {
    VectorXr f = W_true_.transpose() * image + b_true_ + gaussian_vector(w_.d_feat, w_.map_sigma, rng_);
    return f.cwiseMax(0.0);
  }

  PairedSplit split(const std::vector<Group>& groups) {
    const auto n = static_cast<Eigen::Index>(groups.size());
    PairedSplit s;
    s.clip_image.resize(n, w_.d_clip);
    s.clip_text.resize(n, w_.d_clip);
    s.features.resize(n, w_.d_feat);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Group grp = groups[static_cast<std::size_t>(i)];
      const VectorXr z = image(grp);
      s.clip_image.row(i) = z.transpose();
      s.clip_text.row(i) = paired_text(z).transpose();
      s.features.row(i) = features(z).transpose();
      s.labels.push_back(grp.y);
      s.groups.push_back(grp);
    }
    return s;
  }

 private:
  const SynthWorld& w_;
  Rng& rng_;
  Geometry geo_;
  EmbeddingMatrix W_true_;
  VectorXr b_true_, g_true_;
};

std::vector<Group> draw_train_groups(const SynthWorld& w, Rng& rng) {
  std::uniform_int_distribution<int> cls(0, w.spec.num_classes - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Group> out;
  for (int i = 0; i < w.n_train; ++i) {
    const int y = cls(rng);
    const int maj = w.majority_attribute[static_cast<std::size_t>(y)];
    std::vector<int> others;
    for (const Group& g : w.spec.groups) {
      if (g.y == y && g.a != maj) others.push_back(g.a);
    }
    int a = maj;
    if (!others.empty() && unit(rng) < w.minority_fraction) {
      std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
      a = others[pick(rng)];
    }
    out.push_back({y, a});
  }
  return out;
}

std::vector<Group> balanced_groups(const SynthWorld& w, int n, Rng& rng) {
  const int per = std::max(1, n / static_cast<int>(w.spec.groups.size()));
  std::vector<Group> out;
  for (const Group& g : w.spec.groups) out.insert(out.end(), static_cast<std::size_t>(per), g);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Word lists are built as (name, base vector) before the bank is rendered.
struct WordEntry {
  std::string name;
  VectorXr base;
  int logit_target = -1;  // for logit-filter targets: the class the word is pushed to
};

std::string shouted(const std::string& w) {
  std::string s = w;
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return " " + s + " ";
}

}  // namespace

void SynthWorld::validate() const {
  spec.validate();
  const int Y = spec.num_classes;
  const int A = spec.num_attributes;
  if (static_cast<int>(majority_attribute.size()) != Y) {
    throw UsageError("majority_attribute needs one entry per class");
  }
  for (int y = 0; y < Y; ++y) {
    if (spec.index_of({y, majority_attribute[static_cast<std::size_t>(y)]}) < 0) {
      throw UsageError("majority group of class " + std::to_string(y) + " is not in the group spec");
    }
  }
  if (static_cast<int>(class_names.size()) != Y || static_cast<int>(attribute_names.size()) != A) {
    throw UsageError("category names do not match the group spec");
  }
  if (d_clip < 2 + 2 * (Y + A) + 2) {
    throw UsageError("d_clip = " + std::to_string(d_clip) + " is too small for " + std::to_string(Y) +
                     " classes and " + std::to_string(A) + " attributes");
  }
  if (d_feat < 1) throw UsageError("d_feat must be positive");
  if (!(minority_fraction >= 0 && minority_fraction <= 1)) throw UsageError("rho must lie in [0, 1]");
  if (n_train < d_clip || n_val < 1 || n_test < 1 || n_gap_pairs < 1) {
    throw UsageError("split sizes are too small (n_train must be at least d_clip)");
  }
  if (words_per_class < 2 || words_per_attribute < 1) throw UsageError("too few words per category");
  if (mislabeled_per_category < 0 || logit_bad_per_class < 0 || leaking_per_attribute < 0 ||
      duplicates_per_category < 0) {
    throw UsageError("planted word counts must be non-negative");
  }
  if (!(content_sigma > 0) || !(content_sigma_shared > 0) || !(mean_norm > 0) || !(gap_norm > 0)) {
    throw UsageError("scales must be positive");
  }
  if (template_count < 1 || anchor_template < 0 || anchor_template >= template_count) {
    throw UsageError("anchor template outside [0, template_count)");
  }
  erm.validate();
}

SynthWorld preset(const std::string& name, std::uint64_t seed) {
  SynthWorld w;
  w.seed = seed;
  w.erm.optimizer = OptimizerKind::kSgd;
  w.erm.lr = 0.05;
  w.erm.momentum = 0.9;
  w.erm.batch_size = 64;
  w.erm.epochs = 30;
  w.erm.seed = seed ^ 0x5eedULL;
  if (name == "tiny") {
    w.d_clip = 16;
    w.d_feat = 12;
    w.spec = GroupSpec::cartesian(2, 2);
    w.majority_attribute = {0, 1};
    w.partitions = {{0, 1}};
    w.class_names = {"landbird", "waterbird"};
    w.attribute_names = {"land", "water"};
    w.n_train = 600;
    w.n_val = 200;
    w.n_test = 400;
    w.n_gap_pairs = 200;
    w.words_per_class = 8;
    w.words_per_attribute = 8;
    w.mislabeled_per_category = 1;
    w.logit_bad_per_class = 1;
    w.leaking_per_attribute = 1;
    w.erm.epochs = 15;
  } else if (name == "waterbirds-like") {
    w.d_clip = 48;
    w.d_feat = 32;
    w.spec = GroupSpec::cartesian(2, 2);
    w.majority_attribute = {0, 1};
    w.partitions = {{0, 1}};
    w.class_names = {"landbird", "waterbird"};
    w.attribute_names = {"land", "water"};
    w.n_train = 4000;
    w.n_val = 2000;
    w.n_test = 8000;
    w.words_per_class = 24;
    w.words_per_attribute = 24;
    w.mislabeled_per_category = 3;
    w.logit_bad_per_class = 3;
    w.leaking_per_attribute = 3;
  } else if (name == "spuco-like") {
    w.d_clip = 64;
    w.d_feat = 40;
    w.spec.num_classes = 4;
    w.spec.num_attributes = 4;
    w.spec.groups = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}, {2, 3}, {3, 2}, {3, 3}};
    w.majority_attribute = {0, 1, 2, 3};
    w.partitions = {{0, 1}, {2, 3}};
    w.class_names = {"landbird", "waterbird", "small dog", "big dog"};
    w.attribute_names = {"land", "water", "indoors", "outdoors"};
    w.n_train = 6000;
    w.n_val = 1200;
    w.n_test = 2400;
    w.words_per_class = 20;
    w.words_per_attribute = 20;
    w.mislabeled_per_category = 2;
    w.logit_bad_per_class = 2;
    w.leaking_per_attribute = 2;
  } else {
    throw UsageError("unknown preset '" + name + "' (want tiny|waterbirds-like|spuco-like)");
  }
  w.spec.weights = train_weights(w);
  return w;
}

SynthBundle generate(const SynthWorld& world) {
  world.validate();
  Rng rng(world.seed);
  World w(world, rng);
  const Geometry& geo = w.geo();

  SynthBundle b;
  b.world = world;
  b.world.spec.weights = train_weights(world);
  b.W_true = w.W_true();
  b.b_true = w.b_true();
  b.g_true = w.g_true();

  b.gap_images.resize(world.n_gap_pairs, world.d_clip);
  b.gap_texts.resize(world.n_gap_pairs, world.d_clip);
  for (int i = 0; i < world.n_gap_pairs; ++i) {
    const VectorXr z = w.generic_image();
    b.gap_images.row(i) = z.transpose();
    b.gap_texts.row(i) = w.paired_text(z).transpose();
  }

  b.train = w.split(draw_train_groups(world, rng));
  b.val = w.split(balanced_groups(world, world.n_val, rng));
  b.test = w.split(balanced_groups(world, world.n_test, rng));

  // Biased starting head: plain ERM on the imbalanced split, last epoch.
  {
    LinearHead<double> zero{EmbeddingMatrix::Zero(world.d_feat, world.spec.num_classes),
                            VectorXr::Zero(world.spec.num_classes)};
    FeatureEpochSource src(b.train.features, b.train.labels, b.train.groups, false);
    b.head_init = train_head(zero, src, validation_set(b), world.erm).head_final;
  }

  const int Y = world.spec.num_classes;
  const int A = world.spec.num_attributes;
  auto class_base = [&](int y) { return VectorXr(world.mean_norm * geo.m + 2 * world.class_scale * geo.u[static_cast<std::size_t>(y)]); };
  auto attr_base = [&](int a) { return VectorXr(world.mean_norm * geo.m + 2 * world.attr_scale * geo.v[static_cast<std::size_t>(a)]); };
  auto word_noise = [&] { return gaussian_vector(world.d_clip, world.word_sigma, rng); };

  // Template offsets shared by every word, plus a small per-row term.
  std::vector<VectorXr> tau;
  for (int k = 0; k < world.template_count; ++k) tau.push_back(gaussian_vector(world.d_clip, world.template_sigma, rng));
  auto render = [&](const VectorXr& base, int k) {
    return VectorXr(base + tau[static_cast<std::size_t>(k)] + gaussian_vector(world.d_clip, world.template_sigma / 2, rng));
  };

  std::vector<std::vector<WordEntry>> class_words(static_cast<std::size_t>(Y));
  std::vector<std::vector<WordEntry>> attr_words(static_cast<std::size_t>(A));
  std::uniform_int_distribution<int> other_class(1, std::max(1, Y - 1));
  for (int y = 0; y < Y; ++y) {
    const std::string& cname = world.class_names[static_cast<std::size_t>(y)];
    int serial = 0;
    auto next_name = [&] { return cname + " term " + padded(serial++, 2); };
    auto& list = class_words[static_cast<std::size_t>(y)];
    for (int i = 0; i < world.words_per_class; ++i) list.push_back({next_name(), class_base(y) + word_noise()});
    for (int i = 0; i < world.mislabeled_per_category; ++i) {
      const int other = (y + other_class(rng)) % Y;
      list.push_back({next_name(), class_base(other) + word_noise()});
      b.truth.mislabeled_class_words.push_back(list.back().name);
    }
    for (int i = 0; i < world.logit_bad_per_class; ++i) {
      const int other = (y + other_class(rng)) % Y;
      list.push_back({next_name(), class_base(y) + word_noise(), other});
      b.truth.logit_bad_class_words.push_back(list.back().name);
    }
    std::shuffle(list.begin(), list.end(), rng);
  }
  for (int a = 0; a < A; ++a) {
    const std::string& aname = world.attribute_names[static_cast<std::size_t>(a)];
    int serial = 0;
    auto next_name = [&] { return aname + " term " + padded(serial++, 2); };
    auto& list = attr_words[static_cast<std::size_t>(a)];
    for (int i = 0; i < world.words_per_attribute; ++i) list.push_back({next_name(), attr_base(a) + word_noise()});
    std::vector<int> peers;
    for (const auto& part : world.partitions) {
      if (std::find(part.begin(), part.end(), a) != part.end()) {
        for (int p : part) {
          if (p != a) peers.push_back(p);
        }
      }
    }
    if (!peers.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, peers.size() - 1);
      for (int i = 0; i < world.mislabeled_per_category; ++i) {
        list.push_back({next_name(), attr_base(peers[pick(rng)]) + word_noise()});
        b.truth.mislabeled_attribute_words.push_back(list.back().name);
      }
    }
    // Leaking words carry content of the class this attribute usually co-occurs with.
    int leak_class = 0;
    for (int y = 0; y < Y; ++y) {
      if (world.majority_attribute[static_cast<std::size_t>(y)] == a) leak_class = y;
    }
    for (int i = 0; i < world.leaking_per_attribute; ++i) {
      list.push_back({next_name(), attr_base(a) + world.leak_scale * geo.u[static_cast<std::size_t>(leak_class)] + word_noise()});
      b.truth.leaking_attribute_words.push_back(list.back().name);
    }
    std::shuffle(list.begin(), list.end(), rng);
  }

  // Render the bank. Category names come first and act as anchors.
  std::vector<std::string> names;
  std::vector<VectorXr> bases;
  for (int y = 0; y < Y; ++y) {
    names.push_back(world.class_names[static_cast<std::size_t>(y)]);
    bases.push_back(class_base(y));
  }
  for (int a = 0; a < A; ++a) {
    names.push_back(world.attribute_names[static_cast<std::size_t>(a)]);
    bases.push_back(attr_base(a));
  }
  const std::size_t anchor_count = names.size();
  std::vector<int> logit_target;
  logit_target.assign(anchor_count, -1);
  for (const auto& list : class_words) {
    for (const auto& e : list) {
      names.push_back(e.name);
      bases.push_back(e.base);
      logit_target.push_back(e.logit_target);
    }
  }
  for (const auto& list : attr_words) {
    for (const auto& e : list) {
      names.push_back(e.name);
      bases.push_back(e.base);
      logit_target.push_back(-1);
    }
  }
  const int K = world.template_count;
  EmbeddingMatrix data(static_cast<Eigen::Index>(names.size()) * K, world.d_clip);
  for (std::size_t t = 0; t < names.size(); ++t) {
    for (int k = 0; k < K; ++k) data.row(static_cast<Eigen::Index>(t) * K + k) = render(bases[t], k).transpose();
  }

  // Logit-filter targets: push each one along a direction orthogonal to every
  // anchor row (so cosine rankings against anchors are untouched) until the
  // starting head, applied through the true map, prefers the target class.
  {
    const Eigen::Index extra = 2 + Y + A;
    EmbeddingMatrix span(world.d_clip, static_cast<Eigen::Index>(anchor_count) + extra);
    for (std::size_t t = 0; t < anchor_count; ++t) {
      span.col(static_cast<Eigen::Index>(t)) = data.row(static_cast<Eigen::Index>(t) * K + world.anchor_template).transpose();
    }
    Eigen::Index c = static_cast<Eigen::Index>(anchor_count);
    span.col(c++) = geo.m;
    span.col(c++) = geo.g_hat;
    for (const auto& u : geo.u) span.col(c++) = u;
    for (const auto& v : geo.v) span.col(c++) = v;
    const Eigen::HouseholderQR<EmbeddingMatrix> qr(span);
    const EmbeddingMatrix basis = EmbeddingMatrix(qr.householderQ()).leftCols(span.cols());

    const EmbeddingMatrix& H = b.head_init.W;
    for (std::size_t t = anchor_count; t < names.size(); ++t) {
      const int target = logit_target[t];
      if (target < 0) continue;
      // Ascend the margin (piecewise linear through the ReLU) inside the
      // free subspace, in steps of fixed length.
      const VectorXr anchor_row = data.row(static_cast<Eigen::Index>(t) * K + world.anchor_template).transpose();
      VectorXr delta = VectorXr::Zero(world.d_clip);
      bool reached = false;
      for (int step = 0; step < 4000 && !reached; ++step) {
        const VectorXr pre = b.W_true.transpose() * (anchor_row + delta) + b.b_true;
        const VectorXr l = H.transpose() * pre.cwiseMax(0.0) + b.head_init.b;
        int rival = -1;
        for (int k = 0; k < Y; ++k) {
          if (k != target && (rival < 0 || l[k] > l[rival])) rival = k;
        }
        if (l[target] - l[rival] >= 2.0) {
          reached = true;
          break;
        }
        const VectorXr active = (pre.array() > 0).cast<double>().matrix();
        VectorXr grad = b.W_true * active.cwiseProduct(H.col(target) - H.col(rival));
        grad -= basis * (basis.transpose() * grad);
        if (!(grad.norm() > 1e-12)) break;
        delta += 0.1 * grad.normalized();
      }
      if (!reached) throw SearchFailedError("could not steer a logit-filter word to its target");
      for (int k = 0; k < K; ++k) data.row(static_cast<Eigen::Index>(t) * K + k) += delta.transpose();
    }
  }
  b.bank = TextEmbeddingBank(std::move(data), names, K, world.anchor_template);

  // Vocabulary with case/whitespace duplicates appended.
  auto to_category = [&](const std::string& name, const std::vector<WordEntry>& list) {
    Category c{name, {}};
    for (const auto& e : list) c.words.push_back(e.name);
    for (int i = 0; i < world.duplicates_per_category && i < static_cast<int>(list.size()); ++i) {
      c.words.push_back(shouted(list[static_cast<std::size_t>(i)].name));
      b.truth.duplicate_words.push_back(c.words.back());
    }
    return c;
  };
  for (int y = 0; y < Y; ++y) {
    b.vocab.classes.push_back(to_category(world.class_names[static_cast<std::size_t>(y)], class_words[static_cast<std::size_t>(y)]));
  }
  for (int a = 0; a < A; ++a) {
    b.vocab.attributes.push_back(to_category(world.attribute_names[static_cast<std::size_t>(a)], attr_words[static_cast<std::size_t>(a)]));
  }
  b.vocab.partitions = world.partitions;
  b.vocab.validate();
  return b;
}

ValidationSet validation_set(const SynthBundle& b) {
  return {b.val.features, b.val.labels, b.val.groups, b.world.spec};
}

namespace {

Manifest split_manifest(const SynthWorld& w, const PairedSplit& s, Role role, const std::string& prefix,
                        Eigen::Index dim) {
  Manifest m;
  m.count = static_cast<std::int64_t>(s.labels.size());
  m.dim = dim;
  m.role = role;
  for (std::size_t i = 0; i < s.labels.size(); ++i) m.ids.push_back(prefix + "-" + padded(static_cast<int>(i), 6));
  m.labels = s.labels;
  m.groups = s.groups;
  m.num_classes = w.spec.num_classes;
  m.num_attributes = w.spec.num_attributes;
  return m;
}

void write_split(const SynthBundle& b, const PairedSplit& s, const std::string& name,
                 const std::filesystem::path& dir) {
  const auto d = dir / name;
  std::filesystem::create_directories(d);
  save_matrix(s.clip_image, d / "clip_image.npy");
  save_manifest(split_manifest(b.world, s, Role::kClipImage, name, s.clip_image.cols()), d / "clip_image.json");
  save_matrix(s.clip_text, d / "clip_text.npy");
  save_manifest(split_manifest(b.world, s, Role::kClipText, name, s.clip_text.cols()), d / "clip_text.json");
  save_matrix(s.features, d / "features.npy");
  save_manifest(split_manifest(b.world, s, Role::kImageFeatures, name, s.features.cols()), d / "features.json");
}

}  // namespace

void write_bundle(const SynthBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "gap_pairs");
  Manifest gm;
  gm.count = b.gap_images.rows();
  gm.dim = b.gap_images.cols();
  for (Eigen::Index i = 0; i < gm.count; ++i) gm.ids.push_back("pair-" + padded(static_cast<int>(i), 6));
  gm.role = Role::kClipImage;
  save_matrix(b.gap_images, dir / "gap_pairs" / "images.npy");
  save_manifest(gm, dir / "gap_pairs" / "images.json");
  gm.role = Role::kClipText;
  save_matrix(b.gap_texts, dir / "gap_pairs" / "texts.npy");
  save_manifest(gm, dir / "gap_pairs" / "texts.json");

  write_split(b, b.train, "train", dir);
  write_split(b, b.val, "val", dir);
  write_split(b, b.test, "test", dir);

  write_file(dir / "groups.json", group_spec_to_json(b.world.spec));
  write_file(dir / "vocab.json", vocabulary_to_json(b.vocab));
  save_matrix(b.bank.data(), dir / "bank.npy");
  write_file(dir / "bank_index.json", bank_index_json(b.bank.words(), b.bank.template_count(),
                                                      b.bank.anchor_template(), b.bank.dim()));
  save_head(b.head_init, dir / "head_init");

  const auto truth = dir / "truth";
  std::filesystem::create_directories(truth);
  save_matrix(b.W_true, truth / "W_true.npy");
  save_vector(b.b_true, truth / "b_true.npy");
  save_vector(b.g_true, truth / "g_true.npy");
  nlohmann::ordered_json j;
  j["seed"] = b.world.seed;
  j["d_clip"] = b.world.d_clip;
  j["d_feat"] = b.world.d_feat;
  j["minority_fraction"] = b.world.minority_fraction;
  j["pair_sigma"] = b.world.pair_sigma;
  j["map_sigma"] = b.world.map_sigma;
  j["gap_norm"] = b.world.gap_norm;
  j["planted"]["mislabeled_class_words"] = b.truth.mislabeled_class_words;
  j["planted"]["logit_bad_class_words"] = b.truth.logit_bad_class_words;
  j["planted"]["mislabeled_attribute_words"] = b.truth.mislabeled_attribute_words;
  j["planted"]["leaking_attribute_words"] = b.truth.leaking_attribute_words;
  j["planted"]["duplicate_words"] = b.truth.duplicate_words;
  write_file(truth / "truth.json", j.dump(1) + "\n");
}

KktSolution kkt_oracle(const EmbeddingMatrix& X, const EmbeddingMatrix& Y, const VectorXr& g,
                       double lambda) {
  if (X.rows() != Y.rows()) throw PairingError("X and Y row counts differ");
  const Eigen::Index d = X.cols();
  if (g.size() != d) throw ShapeError("gap dim does not match X");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + 1, d + 1);
  K.topLeftCorner(d, d) = 2.0 * (X.transpose() * X);
  K.topLeftCorner(d, d).diagonal().array() += 2.0 * lambda;
  K.topRightCorner(d, 1) = g;
  K.bottomLeftCorner(1, d) = g.transpose();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(d + 1, Y.cols());
  rhs.topRows(d) = 2.0 * (X.transpose() * Y);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (lu.rank() < d + 1) throw SingularMatrixError("KKT system is singular");
  const Eigen::MatrixXd sol = lu.solve(rhs);
  KktSolution out;
  out.W = sol.topRows(d);
  out.nu = sol.row(d).transpose();
  out.b = (Y - X * out.W).colwise().mean().transpose();
  return out;
}

EmbeddingMatrix projected_gradient_oracle(const EmbeddingMatrix& X, const EmbeddingMatrix& Y,
                                          const VectorXr& g, double lambda, int iterations) {
  if (!(g.norm() > 0)) throw DegenerateGapError("zero gap");
  const VectorXr g_hat = g.normalized();
  const Eigen::MatrixXd G = X.transpose() * X;
  const Eigen::MatrixXd C = X.transpose() * Y;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  const double L = 2.0 * (eig.eigenvalues().maxCoeff() + lambda);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(X.cols(), Y.cols());
  for (int it = 0; it < iterations; ++it) {
    W -= (2.0 * (G * W - C) + 2.0 * lambda * W) / L;
    W -= g_hat * (g_hat.transpose() * W);
  }
  return W;
}

LinearHead<double> balanced_retrain_oracle(const EmbeddingMatrix& features,
                                           std::span<const int> labels,
                                           std::span<const Group> groups,
                                           const LinearHead<double>& head_init,
                                           const ValidationSet& val, const TrainConfig& cfg) {
  FeatureEpochSource src(features, labels, groups, true);
  return train_head(head_init, src, val, cfg).head_best;
}

double cross_modal_distance(const Projector<double>& p, const PairedSplit& split, bool relu) {
  EmbeddingMatrix f = project(p, split.clip_text);
  if (relu) f = apply_relu(f);
  if (f.rows() != split.features.rows() || f.cols() != split.features.cols()) {
    throw ShapeError("projected texts and image features differ in shape");
  }
  return (f - split.features).cwiseAbs().mean();
}

}  // namespace tldr::synth

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

// The classifier's last linear layer and the small amount of dense math
// shared by the filters, the trainer and the evaluator.

#ifndef TLDR_HEAD_HPP_
#define TLDR_HEAD_HPP_

#include <filesystem>
#include <optional>

#include <Eigen/Dense>

#include "tldr/embedding_store.hpp"
#include "tldr/errors.hpp"

namespace tldr {

template <typename Scalar>
struct LinearHead {
  Matrix<Scalar> W;  // d_feat x num_classes
  Vector<Scalar> b;  // num_classes

  Eigen::Index input_dim() const { return W.rows(); }
  Eigen::Index num_classes() const { return W.cols(); }
};

template <typename Scalar, typename Derived>
Matrix<Scalar> logits(const LinearHead<Scalar>& head, const Eigen::MatrixBase<Derived>& features) {
  if (features.cols() != head.input_dim()) {
    throw ShapeError("features have dim " + std::to_string(features.cols()) +
                     " but the head expects " + std::to_string(head.input_dim()));
  }
  Matrix<Scalar> out = features * head.W;
  out.rowwise() += head.b.transpose();
  return out;
}

// Row-wise softmax, shifted by the row max.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& z) {
  Matrix<typename Derived::Scalar> p = z;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    p.row(i).array() -= p.row(i).maxCoeff();
    p.row(i) = p.row(i).array().exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

// Index of the unique largest entry; nullopt when the maximum is shared.
template <typename Derived>
std::optional<Eigen::Index> strict_argmax(const Eigen::MatrixBase<Derived>& row) {
  if (row.size() == 0) return std::nullopt;
  Eigen::Index best = 0;
  bool tie = false;
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row(k) > row(best)) {
      best = k;
      tie = false;
    } else if (row(k) == row(best)) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return best;
}

template <typename Derived>
Matrix<typename Derived::Scalar> apply_relu(const Eigen::MatrixBase<Derived>& z) {
  return z.cwiseMax(typename Derived::Scalar(0));
}

// W_head.npy, b_head.npy; meta.json is written by the caller.
void save_head(const LinearHead<double>& head, const std::filesystem::path& dir);
LinearHead<double> load_head(const std::filesystem::path& dir);

}  // namespace tldr

#endif  // TLDR_HEAD_HPP_

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

// Embedding matrices on disk: NPY v1.0 payloads with a JSON sidecar manifest.

#ifndef TLDR_EMBEDDING_STORE_HPP_
#define TLDR_EMBEDDING_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tldr/errors.hpp"

namespace tldr {

// Dense types. Row-major so one row is one embedding and the NPY payload maps
// onto the storage directly.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using EmbeddingMatrix = Matrix<double>;
using VectorXr = Vector<double>;

// (class index, attribute index)
struct Group {
  int y = 0;
  int a = 0;
  friend auto operator<=>(const Group&, const Group&) = default;
};

enum class Role { kImageFeatures, kClipImage, kClipText, kGap };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct Manifest {
  std::int64_t count = 0;
  std::int64_t dim = 0;
  Role role = Role::kImageFeatures;
  std::vector<std::string> ids;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<Group>> groups;
  std::optional<int> num_classes;
  std::optional<int> num_attributes;
};

// Reads a 2-D little-endian NPY v1.0 array of f4 or f8 in C order, widened to
// double. Throws FormatError, ShapeError, DataError or IoError.
EmbeddingMatrix load_matrix(const std::filesystem::path& path);

// Writes NPY v1.0, '<f8', C order.
void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path);

// Serialized NPY bytes of `m`, as save_matrix would write them.
std::string encode_npy(const EmbeddingMatrix& m);
EmbeddingMatrix decode_npy(const std::string& bytes, const std::string& origin = "<memory>");

// Bias and gap vectors are 1-D NPY arrays of shape (n,). load_vector also
// accepts (1, n) and (n, 1).
VectorXr load_vector(const std::filesystem::path& path);
void save_vector(const VectorXr& v, const std::filesystem::path& path);

Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& json_text, const std::string& origin = "<memory>");
std::string manifest_to_json(const Manifest& man);
void save_manifest(const Manifest& man, const std::filesystem::path& path);

// Counts and dims of `m` and `man` must agree. PairingError otherwise.
void validate_pairing(const EmbeddingMatrix& m, const Manifest& man,
                      const std::string& matrix_name = "matrix",
                      const std::string& manifest_name = "manifest");

// Throws DataError naming the first non-finite entry.
void require_finite(const EmbeddingMatrix& m, const std::string& origin);

// Unit-norm rows (zero rows stay zero). Only for reproducing normalized-space
// diagnostics; the pipeline itself works on raw embeddings.
template <typename Derived>
Matrix<typename Derived::Scalar> l2_normalize_rows(const Eigen::MatrixBase<Derived>& m) {
  Matrix<typename Derived::Scalar> out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const auto n = out.row(i).norm();
    if (n > 0) out.row(i) /= n;
  }
  return out;
}

// Convenience for the common pair of files "<stem>.npy" + "<stem>.json".
struct LabeledMatrix {
  EmbeddingMatrix data;
  Manifest manifest;
};
LabeledMatrix load_labeled(const std::filesystem::path& npy, const std::filesystem::path& json);

// Writes `bytes` to `path` atomically (temporary file then rename).
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace tldr

#endif  // TLDR_EMBEDDING_STORE_HPP_

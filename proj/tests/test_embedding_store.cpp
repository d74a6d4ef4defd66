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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "test_util.hpp"
#include "tldr/embedding_store.hpp"

namespace tldr {
namespace {

namespace fs = std::filesystem;

fs::path fixture(const std::string& name) { return fs::path(TLDR_TEST_DATA_DIR) / name; }

TEST(Npy, ReadsNumpyFloat64) {
  const EmbeddingMatrix m = load_matrix(fixture("numpy_f8_2x3.npy"));
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 3);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(m(i / 3, i % 3), i / 4.0);
}

TEST(Npy, ReadsNumpyFloat32AndVersion2) {
  const EmbeddingMatrix f4 = load_matrix(fixture("numpy_f4_2x3.npy"));
  const EmbeddingMatrix v2 = load_matrix(fixture("numpy_v2_2x3.npy"));
  const EmbeddingMatrix ref = load_matrix(fixture("numpy_f8_2x3.npy"));
  EXPECT_EQ(f4, ref);
  EXPECT_EQ(v2, ref);
}

TEST(Npy, WritesBytesIdenticalToNumpy) {
  const EmbeddingMatrix ref = load_matrix(fixture("numpy_f8_2x3.npy"));
  EXPECT_EQ(encode_npy(ref), read_file(fixture("numpy_f8_2x3.npy")));
  const VectorXr v = load_vector(fixture("numpy_vec5.npy"));
  tldr_test::TempDir dir;
  save_vector(v, dir.path() / "v.npy");
  EXPECT_EQ(read_file(dir.path() / "v.npy"), read_file(fixture("numpy_vec5.npy")));
}

TEST(Npy, RejectsFortranOrderAndNonFinite) {
  EXPECT_THROW(load_matrix(fixture("numpy_fortran.npy")), ShapeError);
  EXPECT_THROW(load_matrix(fixture("numpy_nan.npy")), DataError);
}

TEST(Npy, RejectsGarbage) {
  EXPECT_THROW(decode_npy("not an npy file"), FormatError);
  std::string bytes = encode_npy(EmbeddingMatrix::Ones(3, 3));
  bytes.resize(bytes.size() - 8);
  EXPECT_THROW(decode_npy(bytes), FormatError);
}

TEST(Npy, RoundTripPropertyOverRandomShapes) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(0, 40);
  std::normal_distribution<double> n(0, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingMatrix m(dim(rng), dim(rng) + 1);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    const std::string bytes = encode_npy(m);
    EXPECT_EQ(bytes.find('\n'), 63u + 64u * ((bytes.find('\n') - 63) / 64));  // header padded to 64
    EXPECT_EQ(decode_npy(bytes), m);
  }
}

Manifest small_manifest() {
  Manifest m;
  m.count = 3;
  m.dim = 2;
  m.role = Role::kImageFeatures;
  m.ids = {"a", "b", "c"};
  m.labels = std::vector<int>{0, 1, 1};
  m.groups = std::vector<Group>{{0, 0}, {1, 0}, {1, 1}};
  m.num_classes = 2;
  m.num_attributes = 2;
  return m;
}

TEST(Manifest, RoundTrip) {
  const Manifest m = small_manifest();
  const Manifest back = parse_manifest(manifest_to_json(m));
  EXPECT_EQ(back.ids, m.ids);
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.groups, m.groups);
  EXPECT_EQ(back.role, m.role);
}

TEST(Manifest, RejectsInconsistentEntries) {
  Manifest m = small_manifest();
  m.ids.pop_back();
  EXPECT_THROW(parse_manifest(manifest_to_json(m)), PairingError);
  m = small_manifest();
  (*m.groups)[0] = {0, 5};
  EXPECT_THROW(parse_manifest(manifest_to_json(m)), SchemaError);
  m = small_manifest();
  (*m.groups)[1] = {0, 0};
  EXPECT_THROW(parse_manifest(manifest_to_json(m)), SchemaError);
  EXPECT_THROW(parse_manifest("{"), FormatError);
  EXPECT_THROW(parse_manifest(R"({"count": 1})"), SchemaError);
  EXPECT_THROW(role_from_string("audio"), SchemaError);
}

TEST(Manifest, PairingErrorNamesBothFiles) {
  const Manifest m = small_manifest();
  try {
    validate_pairing(EmbeddingMatrix::Zero(4, 2), m, "feats.npy", "feats.json");
    FAIL() << "expected PairingError";
  } catch (const PairingError& e) {
    EXPECT_NE(std::string(e.what()).find("feats.npy"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("feats.json"), std::string::npos);
  }
}

TEST(Manifest, LoadLabeledValidatesShape) {
  tldr_test::TempDir dir;
  save_matrix(EmbeddingMatrix::Ones(3, 2), dir.path() / "x.npy");
  save_manifest(small_manifest(), dir.path() / "x.json");
  const LabeledMatrix lm = load_labeled(dir.path() / "x.npy", dir.path() / "x.json");
  EXPECT_EQ(lm.data.rows(), 3);
  save_matrix(EmbeddingMatrix::Ones(2, 2), dir.path() / "y.npy");
  EXPECT_THROW(load_labeled(dir.path() / "y.npy", dir.path() / "x.json"), PairingError);
  EXPECT_THROW(load_matrix(dir.path() / "missing.npy"), IoError);
}

}  // namespace
}  // namespace tldr

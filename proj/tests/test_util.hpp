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

// Shared helpers for the test binaries.

#ifndef TLDR_TESTS_TEST_UTIL_HPP_
#define TLDR_TESTS_TEST_UTIL_HPP_

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "tldr/embedding_store.hpp"

namespace tldr_test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tldr-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline tldr::EmbeddingMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                           double sigma = 1.0) {
  std::normal_distribution<double> n(0.0, sigma);
  tldr::EmbeddingMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline tldr::VectorXr random_vector(Eigen::Index n, std::mt19937_64& rng, double sigma = 1.0) {
  return random_matrix(n, 1, rng, sigma).col(0);
}

}  // namespace tldr_test

#endif  // TLDR_TESTS_TEST_UTIL_HPP_

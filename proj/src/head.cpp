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

#include "tldr/head.hpp"

namespace tldr {

void save_head(const LinearHead<double>& head, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_matrix(head.W, dir / "W_head.npy");
  save_vector(head.b, dir / "b_head.npy");
}

LinearHead<double> load_head(const std::filesystem::path& dir) {
  LinearHead<double> head{load_matrix(dir / "W_head.npy"), load_vector(dir / "b_head.npy")};
  if (head.b.size() != head.W.cols()) {
    throw ShapeError(dir.string() + ": b_head has " + std::to_string(head.b.size()) +
                     " entries but W_head has " + std::to_string(head.W.cols()) + " columns");
  }
  return head;
}

}  // namespace tldr

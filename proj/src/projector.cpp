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

#include "tldr/projector.hpp"

#include <cstring>

#include "json.hpp"
#include "tldr/digest.hpp"

namespace tldr {

namespace fs = std::filesystem;

std::string gap_digest(const VectorXr& g) {
  std::string bytes(static_cast<std::size_t>(g.size()) * sizeof(double), '\0');
  if (g.size()) std::memcpy(bytes.data(), g.data(), bytes.size());
  return sha256_hex(bytes);
}

void save_projector(const Projector<double>& p, const fs::path& dir) {
  fs::create_directories(dir);
  save_matrix(p.W, dir / "W.npy");
  save_vector(p.b, dir / "b.npy");
  nlohmann::ordered_json meta;
  meta["lambda"] = p.lambda;
  meta["constrained"] = p.gap_used.has_value();
  if (p.ortho_residual) {
    meta["ortho_l1_per_dim"] = *p.ortho_residual;
  } else {
    meta["ortho_l1_per_dim"] = nullptr;
  }
  if (p.gap_used) {
    meta["gap_sha256"] = gap_digest(*p.gap_used);
    save_vector(*p.gap_used, dir / "gap.npy");
  }
  write_file(dir / "meta.json", meta.dump(1) + "\n");
}

Projector<double> load_projector(const fs::path& dir) {
  Projector<double> p;
  p.W = load_matrix(dir / "W.npy");
  p.b = load_vector(dir / "b.npy");
  if (p.b.size() != p.W.cols()) {
    throw ShapeError(dir.string() + ": b has dim " + std::to_string(p.b.size()) + " but W has " +
                     std::to_string(p.W.cols()) + " columns");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    p.lambda = meta.at("lambda").get<double>();
    if (meta.contains("ortho_l1_per_dim") && !meta["ortho_l1_per_dim"].is_null()) {
      p.ortho_residual = meta["ortho_l1_per_dim"].get<double>();
    }
    if (meta.at("constrained").get<bool>()) {
      p.gap_used = load_vector(dir / "gap.npy");
      if (p.gap_used->size() != p.W.rows()) throw ShapeError(dir.string() + ": gap dim mismatch");
      if (meta.contains("gap_sha256") && meta["gap_sha256"].get<std::string>() != gap_digest(*p.gap_used)) {
        throw DataError(dir.string() + ": gap.npy does not match gap_sha256 in meta.json");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(dir.string() + "/meta.json: " + e.what());
  }
  return p;
}

void save_gap(const GapEstimate<double>& est, const std::vector<std::string>& pair_ids,
              const fs::path& dir) {
  fs::create_directories(dir);
  save_vector(est.g, dir / "gap.npy");
  nlohmann::ordered_json stats;
  stats["pair_count"] = est.pair_count;
  stats["magnitude_mean"] = est.magnitude_mean;
  stats["magnitude_std"] = est.magnitude_std;
  stats["direction_mean"] = est.direction_mean;
  stats["direction_std"] = est.direction_std;
  stats["gap_norm"] = est.g.norm();
  stats["gap_sha256"] = gap_digest(est.g);
  stats["pair_ids"] = pair_ids;
  write_file(dir / "gap_stats.json", stats.dump(1) + "\n");
}

}  // namespace tldr

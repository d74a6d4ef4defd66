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

// Drives the full command-line pipeline on a synthetic world.

#ifndef TLDR_TESTS_PIPELINE_HPP_
#define TLDR_TESTS_PIPELINE_HPP_

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "tldr/cli.hpp"

namespace tldr_test {

struct StageResult {
  std::string stage;
  int code = 0;
  std::string out;
  std::string err;
};

inline StageResult run_stage(const std::string& stage, const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = tldr::run_cli(args, out, err);
  return {stage, code, out.str(), err.str()};
}

// Runs synth -> gap-estimate -> fit-projector -> filter -> retrain -> evaluate
// under `root`. Stops at the first failing stage and returns every result.
inline std::vector<StageResult> run_pipeline(const std::filesystem::path& root, const std::string& preset,
                                             const std::string& seed, const std::string& threads,
                                             const std::vector<std::string>& retrain_flags = {"--epochs", "5"}) {
  const std::string w = (root / "world").string();
  auto at = [&](const std::string& rel) { return (root / rel).string(); };
  auto in_world = [&](const std::string& rel) { return w + "/" + rel; };
  std::vector<std::string> retrain = {"--seed", seed, "--threads", threads, "--out", at("retrain"), "retrain",
                                      "--filtered", at("filter/filtered_vocab.json"),
                                      "--groups", in_world("groups.json"),
                                      "--bank", in_world("bank.npy"),
                                      "--bank-index", in_world("bank_index.json"),
                                      "--projector", at("projector"),
                                      "--head", in_world("head_init"),
                                      "--val-features", in_world("val/features.npy")};
  retrain.insert(retrain.end(), retrain_flags.begin(), retrain_flags.end());
  const std::vector<std::pair<std::string, std::vector<std::string>>> stages = {
      {"synth", {"--seed", seed, "--out", w, "synth", "--preset", preset}},
      {"gap-estimate",
       {"--seed", seed, "--out", at("gap"), "gap-estimate", "--images", in_world("gap_pairs/images.npy"),
        "--texts", in_world("gap_pairs/texts.npy")}},
      {"fit-projector",
       {"--seed", seed, "--threads", threads, "--out", at("projector"), "fit-projector",
        "--x", in_world("train/clip_image.npy"), "--y", in_world("train/features.npy"),
        "--val-x", in_world("val/clip_image.npy"), "--val-y", in_world("val/features.npy"),
        "--gap", at("gap/gap.npy"), "--lambda-grid", "0.001,0.01,0.1,1,10,100"}},
      {"filter",
       {"--seed", seed, "--out", at("filter"), "filter", "--vocab", in_world("vocab.json"),
        "--bank", in_world("bank.npy"), "--bank-index", in_world("bank_index.json"),
        "--projector", at("projector"), "--head", in_world("head_init")}},
      {"retrain", retrain},
      {"evaluate",
       {"--seed", seed, "--out", at("eval"), "evaluate", "--head", at("retrain"),
        "--features", in_world("test/features.npy"), "--groups", in_world("groups.json")}},
  };
  std::vector<StageResult> results;
  for (const auto& [name, args] : stages) {
    results.push_back(run_stage(name, args));
    if (results.back().code != 0) break;
  }
  return results;
}

}  // namespace tldr_test

#endif  // TLDR_TESTS_PIPELINE_HPP_

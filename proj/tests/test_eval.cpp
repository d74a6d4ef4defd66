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

#include <random>

#include "tldr/eval.hpp"

namespace tldr {
namespace {

TEST(Evaluate, TiesCountAsWrong) {
  LinearHead<double> h{EmbeddingMatrix::Identity(2, 2), VectorXr::Zero(2)};
  EmbeddingMatrix X(4, 2);
  X << 1, 1,  // tie
      2, 0,   // class 0
      0, 3,   // class 1
      5, 5;   // tie
  const std::vector<int> y{0, 0, 1, 1};
  const std::vector<Group> g{{0, 0}, {0, 0}, {1, 0}, {1, 0}};
  GroupSpec spec;
  spec.num_classes = 2;
  spec.num_attributes = 1;
  spec.groups = {{0, 0}, {1, 0}};
  spec.weights = {0.5, 0.5};
  const auto r = evaluate(h, X, y, g, spec);
  ASSERT_EQ(r.per_group.size(), 2u);
  EXPECT_EQ(r.per_group[0].acc, 0.5);
  EXPECT_EQ(r.per_group[1].acc, 0.5);
  EXPECT_EQ(r.wga, 0.5);
}

TEST(Evaluate, WeightModesAndMissingGroups) {
  // Group (0,1) has no rows; group (1,0) has 3, group (0,0) has 1.
  const std::vector<int> pred{0, 1, 1, 0};
  const std::vector<int> y{0, 1, 1, 1};
  const std::vector<Group> g{{0, 0}, {1, 0}, {1, 0}, {1, 0}};
  GroupSpec spec = GroupSpec::cartesian(2, 2);
  spec.weights = {0.1, 0.2, 0.3, 0.4};
  const auto spec_r = evaluate_predictions(pred, y, g, spec, WeightMode::kSpec);
  EXPECT_EQ(spec_r.missing, (std::vector<Group>{{0, 1}, {1, 1}}));
  ASSERT_EQ(spec_r.per_group.size(), 2u);
  EXPECT_NEAR(spec_r.weights[0], 0.25, 1e-15);
  EXPECT_NEAR(spec_r.weights[1], 0.75, 1e-15);
  EXPECT_NEAR(spec_r.mean_acc, 0.25 * 1 + 0.75 * (2.0 / 3), 1e-15);
  EXPECT_NEAR(spec_r.wga, 2.0 / 3, 1e-15);

  const auto uni = evaluate_predictions(pred, y, g, spec, WeightMode::kUniform);
  EXPECT_NEAR(uni.mean_acc, 0.5 * (1 + 2.0 / 3), 1e-15);
  const auto test = evaluate_predictions(pred, y, g, spec, WeightMode::kTest);
  EXPECT_NEAR(test.mean_acc, 0.75, 1e-15);  // plain accuracy
  EXPECT_EQ(weight_mode_from_string("train"), WeightMode::kSpec);
  EXPECT_THROW(weight_mode_from_string("bogus"), UsageError);
}

TEST(Evaluate, WgaIsMinimumAndBoundsMeanProperty) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cls(0, 2), att(0, 1), coin(0, 1);
  const GroupSpec spec = GroupSpec::cartesian(3, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> pred, y;
    std::vector<Group> g;
    for (int i = 0; i < 60; ++i) {
      const int yy = cls(rng);
      y.push_back(yy);
      g.push_back({yy, att(rng)});
      pred.push_back(coin(rng) ? yy : -1);
    }
    for (auto mode : {WeightMode::kSpec, WeightMode::kUniform, WeightMode::kTest}) {
      const auto r = evaluate_predictions(pred, y, g, spec, mode);
      double mn = 1;
      for (const auto& pg : r.per_group) mn = std::min(mn, pg.acc);
      EXPECT_EQ(r.wga, mn);
      EXPECT_LE(r.wga, r.mean_acc + 1e-15);
      double wsum = 0;
      for (double w : r.weights) wsum += w;
      EXPECT_NEAR(wsum, 1, 1e-12);
    }
  }
}

TEST(Evaluate, InputErrors) {
  const GroupSpec spec = GroupSpec::cartesian(2, 2);
  const std::vector<int> one{0};
  EXPECT_THROW(evaluate_predictions(one, one, std::vector<Group>{{1, 0}}, spec), SchemaError);
  EXPECT_THROW(evaluate_predictions(one, one, std::vector<Group>{{0, 3}}, spec), SchemaError);
  EXPECT_THROW(evaluate_predictions(one, std::vector<int>{0, 0}, std::vector<Group>{{0, 0}}, spec),
               PairingError);
  EXPECT_THROW(evaluate_predictions({}, {}, {}, spec), EmptyInputError);
}

TEST(Reports, JsonRoundTripAndDelta) {
  const std::vector<int> y{0, 1, 1, 0};
  const std::vector<Group> g{{0, 0}, {1, 1}, {1, 1}, {0, 1}};
  const GroupSpec spec = GroupSpec::cartesian(2, 2);
  auto a = evaluate_predictions(std::vector<int>{0, 0, 1, 1}, y, g, spec);
  a.head_meta = "W_head sha256 abc";
  const auto b = evaluate_predictions(std::vector<int>{0, 1, 1, 0}, y, g, spec);
  const auto back = parse_report(report_to_json(a));
  EXPECT_EQ(back.wga, a.wga);
  EXPECT_EQ(back.mean_acc, a.mean_acc);
  EXPECT_EQ(back.weights, a.weights);
  EXPECT_EQ(back.missing, a.missing);
  EXPECT_EQ(back.head_meta, a.head_meta);
  const auto d = compare_reports(a, b);
  EXPECT_EQ(d.wga_delta, b.wga - a.wga);
  EXPECT_EQ(d.per_group[1].delta, 1.0);  // group (0,1): 0 -> 1
  const auto other = evaluate_predictions(std::vector<int>{0}, std::vector<int>{0},
                                          std::vector<Group>{{0, 0}}, spec);
  EXPECT_THROW(compare_reports(a, other), SchemaError);
}

}  // namespace
}  // namespace tldr

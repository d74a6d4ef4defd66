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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "tldr/errors.hpp"
#include "tldr/stats.hpp"

namespace tldr::stats {
namespace {

// Reference values from scipy.stats.t (cdf, 2 * sf) and scipy.special.betainc.
struct TCase {
  double t, df, cdf, p;
};
constexpr TCase kTCases[] = {
    {0.5, 1, 0.64758361765043326, 0.70483276469913358},
    {1.0, 2, 0.78867513459481287, 0.42264973081037427},
    {2.5, 5, 0.97275495032881187, 0.054490099342376204},
    {-1.3, 10, 0.11138290860342223, 0.22276581720684446},
    {3.0, 30, 0.99730501796717397, 0.0053899640656519436},
    {0.0, 4, 0.5, 1},
    {8.0, 3, 0.99796171120610733, 0.0040765775877854666},
    {-12.0, 7, 3.1791551890925472e-06, 6.3583103781850944e-06},
    {1.96, 1000, 0.97486340752212564, 0.050273184955748708},
};

struct BetaCase {
  double a, b, x, value;
};
constexpr BetaCase kBetaCases[] = {
    {0.5, 0.5, 0.3, 0.36901011956554536}, {2, 3, 0.4, 0.52479999999999993},
    {10, 2, 0.9, 0.6973568802000002},     {1, 1, 0.25, 0.25},
    {50, 60, 0.45, 0.46423529143060444},
};

TEST(StudentT, MatchesReferenceTable) {
  for (const auto& c : kTCases) {
    EXPECT_NEAR(student_t_cdf(c.t, c.df), c.cdf, 1e-12 * std::max(1.0, c.cdf))
        << "t=" << c.t << " df=" << c.df;
    EXPECT_NEAR(student_t_two_sided_p(c.t, c.df) / c.p, 1.0, 1e-9) << "t=" << c.t << " df=" << c.df;
  }
}

TEST(StudentT, InfiniteAndInvalid) {
  EXPECT_EQ(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 3), 0);
  EXPECT_EQ(student_t_cdf(-std::numeric_limits<double>::infinity(), 3), 0);
  EXPECT_THROW(student_t_two_sided_p(1.0, 0), DomainError);
  EXPECT_THROW(student_t_two_sided_p(std::nan(""), 3), DomainError);
}

TEST(IncompleteBeta, MatchesReferenceTable) {
  for (const auto& c : kBetaCases) {
    EXPECT_NEAR(incomplete_beta(c.a, c.b, c.x), c.value, 1e-12) << c.a << "," << c.b << "," << c.x;
  }
  EXPECT_EQ(incomplete_beta(2, 3, 0), 0);
  EXPECT_EQ(incomplete_beta(2, 3, 1), 1);
  EXPECT_THROW(incomplete_beta(0, 1, 0.5), DomainError);
  EXPECT_THROW(incomplete_beta(1, 1, 1.5), DomainError);
}

TEST(IncompleteBeta, SymmetryProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ab(0.2, 30), xs(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double a = ab(rng), b = ab(rng), x = xs(rng);
    EXPECT_NEAR(incomplete_beta(a, b, x) + incomplete_beta(b, a, 1 - x), 1.0, 1e-11);
  }
}

TEST(PairedTTest, MatchesReference) {
  const std::vector<double> x{0.9, 0.8, 0.95, 0.7, 0.85, 0.6};
  const std::vector<double> z{0.5, 0.7, 0.6, 0.65, 0.8, 0.3};
  const auto r = paired_t_test(x, z);
  EXPECT_NEAR(r.t, 3.200921998322399, 1e-12);
  EXPECT_NEAR(r.p_value, 0.02397047111849769, 1e-12);
  EXPECT_EQ(r.df, 5);
}

TEST(PairedTTest, ZeroVarianceRules) {
  const std::vector<double> x{1, 2, 3};
  auto r = paired_t_test(x, x);
  EXPECT_EQ(r.t, 0);
  EXPECT_EQ(r.p_value, 1);
  const std::vector<double> up{2, 3, 4}, down{0, 1, 2};
  r = paired_t_test(up, x);
  EXPECT_EQ(r.t, std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.p_value, 0);
  r = paired_t_test(down, x);
  EXPECT_EQ(r.t, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.p_value, 0);
}

TEST(PairedTTest, SizeErrors) {
  const std::vector<double> one{1}, two{1, 2};
  EXPECT_THROW(paired_t_test(one, one), InsufficientSamplesError);
  EXPECT_THROW(paired_t_test(one, two), ShapeError);
}

TEST(PairedTTest, SignAntisymmetryAndShiftInvariance) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(12), z(12), xs(12), zs(12);
    for (int i = 0; i < 12; ++i) {
      x[i] = n(rng);
      z[i] = n(rng) + 0.3;
      xs[i] = x[i] + 5;
      zs[i] = z[i] + 5;
    }
    const auto a = paired_t_test(x, z), b = paired_t_test(z, x), c = paired_t_test(xs, zs);
    EXPECT_NEAR(a.t, -b.t, 1e-12);
    EXPECT_NEAR(a.p_value, b.p_value, 1e-12);
    EXPECT_NEAR(a.t, c.t, 1e-9);
  }
}

// Tries every k from m down and returns the first satisfying the step-up rule.
std::vector<bool> bh_brute(const std::vector<double>& p, double q) {
  const std::size_t m = p.size();
  std::vector<bool> out(m, false);
  for (std::size_t k = m; k >= 1; --k) {
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(m)) {
      for (std::size_t i = 0; i < m; ++i) out[i] = p[i] <= sorted[k - 1];
      return out;
    }
  }
  return out;
}

TEST(BenjaminiHochberg, SmallExamples) {
  EXPECT_EQ(bh_correct(std::vector<double>{0.01, 0.04, 0.03, 0.5}, 0.05),
            (std::vector<bool>{true, false, false, false}));
  // Step-up: p_(3) = 0.03 <= 3 * 0.05 / 3 rescues the larger ones.
  EXPECT_EQ(bh_correct(std::vector<double>{0.03, 0.02, 0.01}, 0.05),
            (std::vector<bool>{true, true, true}));
  EXPECT_EQ(bh_correct(std::vector<double>{0.001, 0.2, 0.9}, 0.05),
            (std::vector<bool>{true, false, false}));
  EXPECT_TRUE(bh_correct(std::vector<double>{}, 0.05).empty());
  EXPECT_THROW(bh_correct(std::vector<double>{0.1}, 0.0), DomainError);
  EXPECT_THROW(bh_correct(std::vector<double>{0.1}, 1.0), DomainError);
  EXPECT_THROW(bh_correct(std::vector<double>{1.5}, 0.05), DomainError);
}

TEST(BenjaminiHochberg, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  std::exponential_distribution<double> e(300);
  std::uniform_int_distribution<int> size(1, 30);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = size(rng);
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& v : p) v = u(rng) < 0.4 ? std::min(1.0, e(rng)) : u(rng);
    if (trial % 7 == 0 && m > 1) p[1] = p[0];  // exercise ties
    const double q = 0.01 + 0.2 * u(rng);
    EXPECT_EQ(bh_correct(p, q), bh_brute(p, q)) << "trial " << trial;
  }
}

TEST(BenjaminiHochberg, MonotoneInLevel) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0, 0.2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(20);
    for (auto& v : p) v = u(rng);
    const auto lo = bh_correct(p, 0.05), hi = bh_correct(p, 0.1);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LE(lo[i], hi[i]);
  }
}

}  // namespace
}  // namespace tldr::stats

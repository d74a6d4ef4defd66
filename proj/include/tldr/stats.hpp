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

#ifndef TLDR_STATS_HPP_
#define TLDR_STATS_HPP_

#include <span>
#include <vector>

namespace tldr::stats {

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
// Continued fraction (modified Lentz), evaluated on whichever of x and 1-x
// converges faster.
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with `df` > 0 degrees of freedom.
double student_t_cdf(double t, double df);

// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

struct PairedTTest {
  double mean_diff = 0;
  double sd_diff = 0;
  double t = 0;       // +-inf when sd_diff == 0 and mean_diff != 0, 0 when both vanish
  double df = 0;
  double p_value = 1; // two-sided
};

// Paired two-sided t-test on d_i = x_i - z_i. Requires x.size() == z.size() >= 2.
PairedTTest paired_t_test(std::span<const double> x, std::span<const double> z);

// Benjamini-Hochberg step-up: reject the k smallest p-values, k being the
// largest rank with p_(k) <= k q / m. Mask is in input order.
std::vector<bool> bh_correct(std::span<const double> pvalues, double q);

}  // namespace tldr::stats

#endif  // TLDR_STATS_HPP_

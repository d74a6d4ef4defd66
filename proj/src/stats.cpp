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

#include "tldr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tldr/errors.hpp"

namespace tldr::stats {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxIter = 1000;

// Continued fraction for I_x(a, b) without the prefactor.
double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge (a=" +
                    std::to_string(a) + ", b=" + std::to_string(b) + ", x=" + std::to_string(x) +
                    ")");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw DomainError("incomplete beta needs a, b > 0");
  if (!(x >= 0 && x <= 1)) throw DomainError("incomplete beta needs x in [0, 1]");
  if (x == 0) return 0;
  if (x == 1) return 1;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0)) throw DomainError("degrees of freedom must be positive");
  if (std::isnan(t)) throw DomainError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t >= 0 ? 1.0 - tail : tail;
}

PairedTTest paired_t_test(std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) throw ShapeError("paired samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) {
    throw InsufficientSamplesError("paired t-test needs at least 2 pairs, got " +
                                   std::to_string(n));
  }
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - z[i];
  mean /= static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (x[i] - z[i]) - mean;
    ss += r * r;
  }
  PairedTTest out;
  out.mean_diff = mean;
  out.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
  out.df = static_cast<double>(n - 1);
  if (out.sd_diff == 0) {
    if (mean == 0) {
      out.t = 0;
      out.p_value = 1;
    } else {
      out.t = mean > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      out.p_value = 0;
    }
    return out;
  }
  out.t = mean / (out.sd_diff / std::sqrt(static_cast<double>(n)));
  out.p_value = student_t_two_sided_p(out.t, out.df);
  return out;
}

std::vector<bool> bh_correct(std::span<const double> pvalues, double q) {
  if (!(q > 0 && q < 1)) throw DomainError("FDR level q must lie in (0, 1)");
  for (double p : pvalues) {
    if (!(p >= 0 && p <= 1)) throw DomainError("p-value " + std::to_string(p) + " outside [0, 1]");
  }
  const std::size_t m = pvalues.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return pvalues[i] < pvalues[j]; });
  std::size_t k = 0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    if (pvalues[order[rank - 1]] <= static_cast<double>(rank) * q / static_cast<double>(m)) {
      k = rank;
      break;
    }
  }
  std::vector<bool> reject(m, false);
  for (std::size_t r = 0; r < k; ++r) reject[order[r]] = true;
  return reject;
}

}  // namespace tldr::stats

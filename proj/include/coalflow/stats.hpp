// Copyright 2026 The Coalflow Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COALFLOW_STATS_HPP
#define COALFLOW_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace coalflow {

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730950488016887242097);
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / 2.5066282746310005024157652848110;
}

// Sum with a fixed binary reduction tree; the result does not depend on how
// the input was produced, only on its order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

struct MeanVar {
  long long n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased

  double stderr_mean() const {
    return n > 1 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
  }
};

inline MeanVar mean_var(std::span<const double> v) {
  MeanVar r;
  r.n = static_cast<long long>(v.size());
  if (r.n == 0) return r;
  r.mean = pairwise_sum(v) / static_cast<double>(r.n);
  if (r.n > 1) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double d = v[i] - r.mean;
      sq[i] = d * d;
    }
    r.variance = pairwise_sum(sq) / static_cast<double>(r.n - 1);
  }
  return r;
}

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 1e-10) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample KS statistic against a continuous CDF.
inline double ks_statistic_vs_cdf(std::vector<double> sample,
                                  const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

// Composite Gauss-Legendre on [lo, hi] with 16 nodes per panel.
inline double gauss_legendre(const std::function<double(double)>& f, double lo,
                             double hi, int panels = 4) {
  static const double xs[8] = {
      0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
      0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
      0.9445750230732326, 0.9894009349916499};
  static const double ws[8] = {
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
      0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
      0.0622535239386479, 0.0271524594117541};
  if (hi <= lo) return 0.0;
  double total = 0.0;
  double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    double a = lo + p * width;
    double c = a + 0.5 * width;
    double hw = 0.5 * width;
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
      s += ws[i] * (f(c - hw * xs[i]) + f(c + hw * xs[i]));
    }
    total += s * hw;
  }
  return total;
}

}  // namespace coalflow

#endif  // COALFLOW_STATS_HPP

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

#ifndef COALFLOW_SDE_HPP
#define COALFLOW_SDE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "coalflow/coefficient_field.hpp"
#include "coalflow/discrete_flow.hpp"
#include "coalflow/errors.hpp"
#include "coalflow/rng.hpp"
#include "coalflow/stats.hpp"

namespace coalflow {

// Finitely many coalescing diffusions on the circle.  Paths carry the
// unwrapped lift and use independent driving noise until the first time two
// of them agree mod 1; from then on the larger-index path equals the
// smaller-index one up to a constant integer offset.
struct CoalescingEnsemble {
  std::vector<std::pair<double, double>> starts;  // (s_k, x_k)
  double dt = 0.0;
  double t_end = 0.0;
  std::uint64_t seed = 0;
  std::vector<FlowPath> paths;

  struct Coalescence {
    int survivor;       // smaller index
    int absorbed;       // larger index
    double time;        // first grid time at or after the crossing
    double lift_offset; // integer: Z_absorbed - Z_survivor afterwards
  };
  std::vector<Coalescence> coalescences;
  std::vector<int> merged_into;  // -1 while free

  // Collision time of the pair (j, k), or +inf.
  double collision_time(int j, int k) const {
    for (const Coalescence& c : coalescences) {
      if ((c.survivor == j && c.absorbed == k) ||
          (c.survivor == k && c.absorbed == j)) {
        return c.time;
      }
    }
    return std::numeric_limits<double>::infinity();
  }
};

// Euler-Maruyama with dX = b dt + sqrt(a dt) N(0,1); a is the quadratic
// variation density.  Coalescence triggers when the circular difference of
// two live paths crosses or lands on an integer between consecutive steps.
inline CoalescingEnsemble simulate_ensemble(
    const CoefficientField& field,
    const std::vector<std::pair<double, double>>& starts, double dt,
    double t_end, std::uint64_t seed) {
  if (starts.empty()) throw std::invalid_argument("no starting points");
  double dt_max = std::min(1e-3, field.a_star /
                                     (10.0 * field.b_upper * field.b_upper + 1.0));
  if (dt > dt_max) {
    throw StepTooLarge("dt=" + std::to_string(dt) + " exceeds " +
                       std::to_string(dt_max));
  }

  CoalescingEnsemble ens;
  ens.starts = starts;
  ens.dt = dt;
  ens.t_end = t_end;
  ens.seed = seed;
  const int np = static_cast<int>(starts.size());
  ens.merged_into.assign(np, -1);
  ens.paths.resize(np);

  double t0 = starts[0].first;
  for (const auto& s : starts) t0 = std::min(t0, s.first);

  std::vector<Rng> noise;
  noise.reserve(np);
  for (int k = 0; k < np; ++k) {
    noise.emplace_back(derive_seed(seed, kStreamSdeNoise, k));
  }

  std::vector<double> pos(np, 0.0);
  std::vector<bool> active(np, false);
  std::vector<double> offset(np, 0.0);  // lift offset vs merge master
  std::vector<int> root(np);
  for (int k = 0; k < np; ++k) root[k] = k;

  auto find_root = [&](int k) {
    while (root[k] != k) k = root[k];
    return k;
  };

  auto merge = [&](int j, int k, double m, double when) {
    pos[k] = pos[j] - m;
    root[k] = j;
    offset[k] = -m;
    ens.merged_into[k] = j;
    ens.coalescences.push_back({j, k, when, -m});
    // Re-route anything previously merged into k.
    for (int l = 0; l < np; ++l) {
      if (l != k && ens.merged_into[l] == k) offset[l] += offset[k];
    }
  };

  long long n_steps = static_cast<long long>(std::ceil((t_end - t0) / dt - 1e-9));
  for (long long step = 0; step <= n_steps; ++step) {
    double t = t0 + step * dt;
    bool last = (step == n_steps);

    // Activate paths whose start time has been reached.
    for (int k = 0; k < np; ++k) {
      if (!active[k] && starts[k].first <= t + 1e-12) {
        active[k] = true;
        pos[k] = starts[k].second;
        ens.paths[k].start_time = t;
        ens.paths[k].start_x = starts[k].second;
        ens.paths[k].times.push_back(t);
        ens.paths[k].values.push_back(pos[k]);
      }
    }

    // Paths that are already together coalesce before stepping; this covers
    // identical starting points (collision time equal to the start time).
    for (int j = 0; j < np; ++j) {
      if (!active[j] || find_root(j) != j) continue;
      for (int k = j + 1; k < np; ++k) {
        if (!active[k] || find_root(k) != k) continue;
        double dd = pos[j] - pos[k];
        double m = std::round(dd);
        if (std::abs(dd - m) <= 1e-9) merge(j, k, m, t);
      }
    }
    if (last) break;

    std::vector<double> prev = pos;
    double step_dt = std::min(dt, t_end - t);
    for (int k = 0; k < np; ++k) {
      if (!active[k]) continue;
      if (find_root(k) != k) continue;  // slaves mirror their root below
      double b = field.eval_b(t, pos[k]);
      double a = field.eval_a(t, pos[k]);
      pos[k] += b * step_dt + std::sqrt(a * step_dt) * noise[k].normal();
    }

    // Crossing detection among live roots.
    for (int j = 0; j < np; ++j) {
      if (!active[j] || find_root(j) != j) continue;
      for (int k = j + 1; k < np; ++k) {
        if (!active[k] || find_root(k) != k) continue;
        double dp = prev[j] - prev[k];
        double dn = pos[j] - pos[k];
        double m = std::round(dn);
        bool hit = std::abs(dn - m) <= 1e-9;
        bool crossed = std::floor(dp) != std::floor(dn);
        if (hit || crossed) {
          if (!hit) m = std::max(std::floor(dp), std::floor(dn));
          merge(j, k, m, t + step_dt);
        }
      }
    }

    double t_next = t + step_dt;
    for (int k = 0; k < np; ++k) {
      if (!active[k]) continue;
      int r = find_root(k);
      if (r != k) pos[k] = pos[r] + offset[k];
      ens.paths[k].times.push_back(t_next);
      ens.paths[k].values.push_back(pos[k]);
    }
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Local quadratic model: the coefficient pair
//   a~(x) = (a'^2 / 4a) (x - y + 2a/a')^2,
//   b~(x) = (b a' / 2a) (x - y + 2a/a')
// frozen from (a, a', b) at a base point y, which the transform
//   f(z) = (2 sqrt(a)/a') log(1 + (a'/2a)(z - y))
// turns into a unit-diffusivity constant-drift motion.
// ---------------------------------------------------------------------------

struct QuadraticModelParams {
  double a = 1.0;
  double a_prime = 0.0;
  double b = 0.0;
  double h = 0.0;  // horizon
  double y = 0.0;  // base point
  double x = 0.0;  // start point
};

inline double quadratic_a(const QuadraticModelParams& p, double z) {
  if (p.a_prime == 0.0) return p.a;
  double u = z - p.y + 2.0 * p.a / p.a_prime;
  return (p.a_prime * p.a_prime / (4.0 * p.a)) * u * u;
}

inline double quadratic_b(const QuadraticModelParams& p, double z) {
  if (p.a_prime == 0.0) return p.b;
  double u = z - p.y + 2.0 * p.a / p.a_prime;
  return (p.b * p.a_prime / (2.0 * p.a)) * u;
}

// f(z) - f(y); finite whenever 1 + (a'/2a)(z - y) > 0.
inline double quadratic_log_transform(const QuadraticModelParams& p, double z) {
  if (p.a_prime == 0.0) return (z - p.y) / std::sqrt(p.a);
  double arg = (0.5 * p.a_prime / p.a) * (z - p.y);
  if (arg <= -1.0) {
    throw DomainError("log transform argument is non-positive");
  }
  return (2.0 * std::sqrt(p.a) / p.a_prime) * std::log1p(arg);
}

inline double quadratic_transformed_drift(const QuadraticModelParams& p) {
  return (p.b - 0.25 * p.a_prime) / std::sqrt(p.a);
}

// P(X_h(x) > y) for the quadratic model based at y:
//   Phi( (2 sqrt(a)/(a' sqrt(h))) log(1 + (a'/2a)(x-y)) + sqrt(h/a)(b - a'/4) ).
// Monotone in x; a' = 0 reduces to the constant-coefficient Gaussian tail.
inline double analytic_transition_cdf(const QuadraticModelParams& p, double x,
                                      double y) {
  QuadraticModelParams q = p;
  q.y = y;
  double arg = quadratic_log_transform(q, x) / std::sqrt(p.h) +
               std::sqrt(p.h) * quadratic_transformed_drift(p);
  return normal_cdf(arg);
}

// P(X_h(start) <= z) for the model based at p.y; closes the family under
// moving the threshold, since rebasing the quadratic pair at z reproduces
// the same SDE.
inline double quadratic_model_cdf(const QuadraticModelParams& p, double start,
                                  double z) {
  double arg = (quadratic_log_transform(p, z) - quadratic_log_transform(p, start)) /
                   std::sqrt(p.h) -
               std::sqrt(p.h) * quadratic_transformed_drift(p);
  return normal_cdf(arg);
}

// Euler simulation of the quadratic model over [0, h]; returns X_h samples.
inline std::vector<double> simulate_quadratic_model(
    const QuadraticModelParams& p, long long n_samples, int n_steps,
    std::uint64_t seed) {
  std::vector<double> out(static_cast<std::size_t>(n_samples));
  double dt = p.h / n_steps;
  for (long long i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(seed, kStreamSdeNoise, static_cast<std::uint64_t>(i)));
    double z = p.x;
    for (int s = 0; s < n_steps; ++s) {
      double a = quadratic_a(p, z);
      double b = quadratic_b(p, z);
      z += b * dt + std::sqrt(std::max(0.0, a) * dt) * rng.normal();
    }
    out[static_cast<std::size_t>(i)] = z;
  }
  return out;
}

struct LogTransformReport {
  double mean = 0.0;
  double target_mean = 0.0;
  double mean_z = 0.0;       // z-score of the sample mean vs target
  double variance = 0.0;
  double target_variance = 0.0;
  double ks = 0.0;           // KS vs N(target_mean, h)
  long long samples = 0;
  bool mean_ok = false;
  bool variance_ok = false;
  bool ks_ok = false;
  bool pass() const { return mean_ok && variance_ok && ks_ok; }
};

// Simulates the quadratic model, applies the log transform, and tests that
// f(X_h) is Gaussian with mean f(x) + (h/sqrt(a))(b - a'/4) and variance h.
inline LogTransformReport log_transform_check(const QuadraticModelParams& p,
                                              long long n_samples,
                                              std::uint64_t seed) {
  std::vector<double> xs = simulate_quadratic_model(p, n_samples, 200, seed);
  std::vector<double> fs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fs[i] = quadratic_log_transform(p, xs[i]);
  }
  LogTransformReport rep;
  rep.samples = n_samples;
  rep.target_mean =
      quadratic_log_transform(p, p.x) + p.h * quadratic_transformed_drift(p);
  rep.target_variance = p.h;
  MeanVar mv = mean_var(fs);
  rep.mean = mv.mean;
  rep.variance = mv.variance;
  rep.mean_z = (mv.mean - rep.target_mean) / mv.stderr_mean();
  double sigma = std::sqrt(p.h);
  rep.ks = ks_statistic_vs_cdf(fs, [&](double v) {
    return normal_cdf((v - rep.target_mean) / sigma);
  });
  rep.mean_ok = std::abs(rep.mean_z) < 4.0;
  rep.variance_ok = std::abs(rep.variance / p.h - 1.0) < 0.05;
  rep.ks_ok = rep.ks < 0.01;
  return rep;
}

}  // namespace coalflow

#endif  // COALFLOW_SDE_HPP

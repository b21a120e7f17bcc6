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

#ifndef COALFLOW_VERIFY_HPP
#define COALFLOW_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "coalflow/coefficient_field.hpp"
#include "coalflow/discrete_flow.hpp"
#include "coalflow/disturbance.hpp"
#include "coalflow/io.hpp"
#include "coalflow/parallel.hpp"
#include "coalflow/rng.hpp"
#include "coalflow/sde.hpp"
#include "coalflow/stats.hpp"

namespace coalflow {

// ---------------------------------------------------------------------------
// Martingale residual test: on each time window the path increments minus
// the integrated drift should average to zero at CLT scale.
// ---------------------------------------------------------------------------

struct ZScoreReport {
  std::vector<double> window_z;
  double max_abs_z = 0.0;
  long long samples = 0;
  bool pass(double threshold = 4.0) const { return max_abs_z < threshold; }
};

namespace detail {

// Trapezoid quadrature of b(t, Z_t) dt along a sampled path over [lo, hi].
inline double integrate_drift(const FlowPath& p, const CoefficientField& field,
                              double lo, double hi) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.times.size(); ++i) {
    double a = std::max(p.times[i], lo);
    double b = std::min(p.times[i + 1], hi);
    if (b <= a) continue;
    double va = field.eval_b(p.times[i], p.values[i]);
    double vb = field.eval_b(p.times[i + 1], p.values[i + 1]);
    total += 0.5 * (va + vb) * (b - a);
  }
  return total;
}

}  // namespace detail

inline ZScoreReport martingale_residual_test(const std::vector<FlowPath>& paths,
                                             const CoefficientField& field,
                                             int window_count) {
  if (paths.size() < 1000) {
    throw InsufficientSamples("martingale residual test needs >= 1e3 paths");
  }
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const FlowPath& p : paths) {
    lo = std::max(lo, p.times.front());
    hi = std::min(hi, p.times.back());
  }
  ZScoreReport rep;
  rep.samples = static_cast<long long>(paths.size());
  for (int w = 0; w < window_count; ++w) {
    double wa = lo + (hi - lo) * w / window_count;
    double wb = lo + (hi - lo) * (w + 1) / window_count;
    std::vector<double> residuals(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const FlowPath& p = paths[i];
      double dz = p.at(wb) - p.at(wa);
      residuals[i] = dz - detail::integrate_drift(p, field, wa, wb);
    }
    MeanVar mv = mean_var(residuals);
    double z = mv.stderr_mean() > 0 ? mv.mean / mv.stderr_mean() : 0.0;
    rep.window_z.push_back(z);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Cross-product test on two-path ensembles: before collision the increment
// covariance vanishes and the compensated product
//   Z^j Z^k - int (Z^j b(Z^k) + Z^k b(Z^j)) dr - int_{T^{jk} and t}^t a(Z^j) dr
// has zero-mean increments; after collision the increments are identical and
// their covariance rate matches a along the path.
// ---------------------------------------------------------------------------

struct CrossProductReport {
  struct Window {
    double t_lo = 0.0, t_hi = 0.0;
    long long n_pre = 0;
    double pre_cov_rate = 0.0;
    double pre_cov_z = 0.0;  // covariance of increments vs zero
    long long n_post = 0;
    double post_cov_rate = 0.0;  // increment covariance rate, merged pairs
    double post_target = 0.0;    // mean a along the merged path
    double compensated_z = 0.0;  // compensated product increments vs zero
  };
  std::vector<Window> windows;
  double max_abs_z = 0.0;
  long long seeds = 0;
  bool pass(double threshold = 4.0) const { return max_abs_z < threshold; }
};

inline CrossProductReport cross_product_test(
    const CoefficientField& field, std::pair<double, double> start_a,
    std::pair<double, double> start_b, double dt, double t_end,
    long long n_seeds, std::uint64_t seed, int window_count, int jobs = 1) {
  if (n_seeds < 1000) {
    throw InsufficientSamples("cross product test needs >= 1e3 seeds");
  }
  double t0 = std::min(start_a.first, start_b.first);
  struct SeedData {
    std::vector<double> dzj, dzk;  // per-window increments
    std::vector<double> comp;      // compensated product increments
    std::vector<double> a_mean;    // mean a along path j per window
    double t_coal = 0.0;
  };
  struct Slot {
    std::vector<SeedData> data;
  };
  std::size_t n = static_cast<std::size_t>(n_seeds);
  auto slots = parallel_chunks<Slot>(
      n, jobs, [&](std::size_t first, std::size_t last, Slot& out) {
        for (std::size_t s = first; s < last; ++s) {
          CoalescingEnsemble ens = simulate_ensemble(
              field, {start_a, start_b}, dt, t_end, derive_seed(seed, 0x77, s));
          const FlowPath& pj = ens.paths[0];
          const FlowPath& pk = ens.paths[1];
          double tc = ens.collision_time(0, 1);
          SeedData sd;
          sd.t_coal = tc;
          for (int w = 0; w < window_count; ++w) {
            double wa = t0 + (t_end - t0) * w / window_count;
            double wb = t0 + (t_end - t0) * (w + 1) / window_count;
            sd.dzj.push_back(pj.at(wb) - pj.at(wa));
            sd.dzk.push_back(pk.at(wb) - pk.at(wa));
            // Compensated product increment over [wa, wb].
            double m_b = pj.at(wb) * pk.at(wb);
            double m_a = pj.at(wa) * pk.at(wa);
            double drift = 0.0;
            double quad = 0.0;
            double a_sum = 0.0;
            long long a_n = 0;
            for (std::size_t i = 0; i + 1 < pj.times.size(); ++i) {
              double a = std::max(pj.times[i], wa);
              double b = std::min(pj.times[i + 1], wb);
              if (b <= a) continue;
              double t = pj.times[i];
              double zj = pj.values[i], zk = pk.values[i];
              drift += (zj * field.eval_b(t, zk) + zk * field.eval_b(t, zj)) *
                       (b - a);
              double av = field.eval_a(t, zj);
              a_sum += av;
              ++a_n;
              if (t >= tc) quad += av * (b - a);
            }
            sd.comp.push_back(m_b - m_a - drift - quad);
            sd.a_mean.push_back(a_n > 0 ? a_sum / a_n : 0.0);
          }
          out.data.push_back(std::move(sd));
        }
      });

  CrossProductReport rep;
  rep.seeds = n_seeds;
  for (int w = 0; w < window_count; ++w) {
    double wa = t0 + (t_end - t0) * w / window_count;
    double wb = t0 + (t_end - t0) * (w + 1) / window_count;
    std::vector<double> pre_j, pre_k, post_prod, comp, post_target;
    for (const Slot& slot : slots) {
      for (const SeedData& sd : slot.data) {
        if (sd.t_coal > wb) {
          pre_j.push_back(sd.dzj[w]);
          pre_k.push_back(sd.dzk[w]);
        } else if (sd.t_coal <= wa) {
          post_prod.push_back(sd.dzj[w] * sd.dzk[w]);
          post_target.push_back(sd.a_mean[w]);
        }
        comp.push_back(sd.comp[w]);
      }
    }
    CrossProductReport::Window win;
    win.t_lo = wa;
    win.t_hi = wb;
    win.n_pre = static_cast<long long>(pre_j.size());
    win.n_post = static_cast<long long>(post_prod.size());
    if (win.n_pre > 1) {
      MeanVar mj = mean_var(pre_j);
      MeanVar mk = mean_var(pre_k);
      std::vector<double> prod(pre_j.size());
      for (std::size_t i = 0; i < pre_j.size(); ++i) {
        prod[i] = (pre_j[i] - mj.mean) * (pre_k[i] - mk.mean);
      }
      MeanVar mp = mean_var(prod);
      win.pre_cov_rate = mp.mean / (wb - wa);
      win.pre_cov_z = mp.stderr_mean() > 0 ? mp.mean / mp.stderr_mean() : 0.0;
    }
    if (win.n_post > 0) {
      MeanVar mpost = mean_var(post_prod);
      MeanVar mt = mean_var(post_target);
      win.post_cov_rate = mpost.mean / (wb - wa);
      win.post_target = mt.mean;
    }
    MeanVar mc = mean_var(comp);
    win.compensated_z = mc.stderr_mean() > 0 ? mc.mean / mc.stderr_mean() : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z,
                             std::max(std::abs(win.pre_cov_z),
                                      std::abs(win.compensated_z)));
    rep.windows.push_back(win);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov.
// ---------------------------------------------------------------------------

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 1000 || b.size() < 1000) {
    throw InsufficientSamples("two-sample KS needs >= 1e3 points per side");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double va = a[i], vb = b[j];
    if (va <= vb) ++i;
    if (vb <= va) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  double ne = std::sqrt(na * nb / (na + nb));
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

// ---------------------------------------------------------------------------
// Streaming disturbance-path sampling.  Walks positions through the closed
// form displacements in the exact randomness order of
// build_disturbance_flow, so the values agree with
// extract_path(build_disturbance_flow(...)) without materializing maps.
// ---------------------------------------------------------------------------

// Value at t_eval of the forward path started at (t_lo, x).
inline double disturbance_path_value(const CoefficientField& field, double h,
                                     double t_lo, double t_hi, double x,
                                     std::uint64_t seed, double t_eval,
                                     bool collapse_only = false) {
  Rng clock(derive_seed(seed, kStreamClock));
  Rng thetas(derive_seed(seed, kStreamTheta));
  double pos = x;
  double t = t_lo;
  for (;;) {
    t += clock.exponential(h);
    if (t > t_hi) break;
    double theta = thetas.uniform01();
    if (t <= t_eval) {
      DisturbanceGeometry g =
          disturbance_geometry(field, h, t, theta, collapse_only);
      pos += forward_displacement(g, pos, Side::right);
    }
  }
  return pos;
}

// Reversed-flow path from (0, x) sampled on a uniform delta-grid over
// [0, span]: the forward flow lives on (-span, 0] and the reversed path
// applies inverted disturbances in decreasing forward time.  Output has
// span/delta + 1 values, value[i] at reversed time i * delta.
inline std::vector<double> reversed_disturbance_path_grid(
    const CoefficientField& field, double h, double span, double delta,
    double x, std::uint64_t seed, bool collapse_only = false) {
  DisturbanceEvents ev =
      sample_disturbance_events(h, -span, 0.0, seed);
  std::size_t n_grid = static_cast<std::size_t>(std::llround(span / delta));
  std::vector<double> out;
  out.reserve(n_grid + 1);
  double pos = x;
  std::size_t g = 0;
  auto emit_until = [&](double tau) {
    while (g <= n_grid && static_cast<double>(g) * delta < tau + 1e-15) {
      out.push_back(pos);
      ++g;
    }
  };
  for (std::size_t i = ev.clock.times.size(); i-- > 0;) {
    double tau = -ev.clock.times[i];  // reversed event time, ascending
    emit_until(tau);
    DisturbanceGeometry geo = disturbance_geometry(
        field, h, ev.clock.times[i], ev.thetas[i], collapse_only);
    pos += inverse_displacement(geo, pos, Side::right);
  }
  emit_until(span + delta);
  return out;
}

// ---------------------------------------------------------------------------
// Weak convergence of one-point marginals: disturbance-flow values at t_eval
// against an Euler reference, for a ladder of h values.
// ---------------------------------------------------------------------------

struct ConvergenceRung {
  double h = 0.0;
  double ks = 0.0;
  double p_value = 0.0;
  long long seeds = 0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRung> rungs;
  bool decreasing = true;
  double final_ks = 0.0;
};

inline ConvergenceReport single_path_convergence_test(
    const CoefficientField& field, const std::vector<double>& h_ladder,
    std::pair<double, double> e, double t_eval, long long n_seeds,
    std::uint64_t seed, double dt_ref = 1e-3, int jobs = 1,
    bool collapse_only = false) {
  std::size_t n = static_cast<std::size_t>(n_seeds);

  // Common Euler reference sample.
  std::vector<double> ref(n);
  {
    auto slots = parallel_chunks<std::vector<std::pair<std::size_t, double>>>(
        n, jobs,
        [&](std::size_t first, std::size_t last,
            std::vector<std::pair<std::size_t, double>>& out) {
          for (std::size_t i = first; i < last; ++i) {
            Rng rng(derive_seed(seed, kStreamEulerRef, i));
            double z = e.second;
            double t = e.first;
            while (t < t_eval - 1e-12) {
              double dt = std::min(dt_ref, t_eval - t);
              z += field.eval_b(t, z) * dt +
                   std::sqrt(field.eval_a(t, z) * dt) * rng.normal();
              t += dt;
            }
            out.push_back({i, z});
          }
        });
    for (const auto& slot : slots) {
      for (const auto& [i, z] : slot) ref[i] = z;
    }
  }

  ConvergenceReport rep;
  for (std::size_t r = 0; r < h_ladder.size(); ++r) {
    double h = h_ladder[r];
    check_disturbance_regime(field, h, e.first, t_eval, collapse_only);
    std::vector<double> vals(n);
    auto slots = parallel_chunks<std::vector<std::pair<std::size_t, double>>>(
        n, jobs,
        [&](std::size_t first, std::size_t last,
            std::vector<std::pair<std::size_t, double>>& out) {
          for (std::size_t i = first; i < last; ++i) {
            std::uint64_t s = derive_seed(seed, 0x1000 + r, i);
            out.push_back(
                {i, disturbance_path_value(field, h, e.first, t_eval, e.second,
                                           s, t_eval, collapse_only)});
          }
        });
    for (const auto& slot : slots) {
      for (const auto& [i, z] : slot) vals[i] = z;
    }
    KsResult ks = ks_two_sample(vals, ref);
    rep.rungs.push_back({h, ks.statistic, ks.p_value, n_seeds});
  }
  for (std::size_t r = 1; r < rep.rungs.size(); ++r) {
    if (!(rep.rungs[r].ks < rep.rungs[r - 1].ks)) rep.decreasing = false;
  }
  if (!rep.rungs.empty()) rep.final_ks = rep.rungs.back().ks;
  return rep;
}

// ---------------------------------------------------------------------------
// The flagship experiment: reversed disturbance flows should have drift
// -b + a'/2 and diffusivity a.  Drift and variance rates are estimated from
// increments over horizon delta, binned by (time, position mod 1), and
// compared bin-wise against the bin-averaged targets.
// ---------------------------------------------------------------------------

struct DriftBin {
  double t_center = 0.0;
  double x_center = 0.0;
  long long n = 0;
  double drift_rate = 0.0;
  double drift_target = 0.0;
  double var_rate = 0.0;
  double var_target = 0.0;
  double ci_radius = 0.0;  // one standard error of the drift rate
  bool pass = false;
};

struct DriftTable {
  std::vector<DriftBin> bins;
  double delta = 0.0;
  double tolerance_floor = 0.05;
  bool all_pass = true;

  std::string to_csv() const {
    std::ostringstream out;
    out << "t_center,x_center,n,drift_rate,drift_target,var_rate,var_target,"
           "ci_radius,pass\n";
    for (const DriftBin& b : bins) {
      out << format_double(b.t_center) << "," << format_double(b.x_center)
          << "," << b.n << "," << format_double(b.drift_rate) << ","
          << format_double(b.drift_target) << "," << format_double(b.var_rate)
          << "," << format_double(b.var_target) << ","
          << format_double(b.ci_radius) << "," << (b.pass ? 1 : 0) << "\n";
    }
    return out.str();
  }
};

struct ReversalOptions {
  int n_t_bins = 2;
  int n_x_bins = 4;
  int start_grid = 48;     // reversed paths per seed, evenly spaced starts
  double delta = 0.0;      // increment horizon; 0 means 10 h
  std::uint64_t seed = 1;
  int jobs = 1;
  bool collapse_only = false;
  double tolerance_floor = 0.05;
};

inline DriftTable reversal_drift_experiment(const CoefficientField& field,
                                            double h, double span,
                                            long long n_seeds,
                                            const ReversalOptions& opts = {}) {
  double delta = opts.delta > 0 ? opts.delta : 10.0 * h;
  check_disturbance_regime(field, h, -span, 0.0, opts.collapse_only);
  std::size_t n_grid = static_cast<std::size_t>(std::llround(span / delta));
  int nt = opts.n_t_bins, nx = opts.n_x_bins;

  struct BinSums {
    std::vector<double> s0, s1, s2;
    void init(int bins) {
      s0.assign(bins, 0.0);
      s1.assign(bins, 0.0);
      s2.assign(bins, 0.0);
    }
  };
  std::size_t n = static_cast<std::size_t>(n_seeds);
  const int np = opts.start_grid;
  auto slots = parallel_chunks<BinSums>(
      n, opts.jobs, [&](std::size_t first, std::size_t last, BinSums& out) {
        out.init(nt * nx);
        std::vector<double> pos(np), prev(np);
        for (std::size_t s = first; s < last; ++s) {
          std::uint64_t sd = derive_seed(opts.seed, 0x2000, s);
          DisturbanceEvents ev = sample_disturbance_events(h, -span, 0.0, sd);
          for (int p = 0; p < np; ++p) {
            pos[p] = prev[p] = static_cast<double>(p) / np;
          }
          std::size_t g = 0;
          // Emits delta-grid samples before reversed time tau; positions are
          // piecewise constant between reversed events.
          auto advance_grid = [&](double tau) {
            while (g <= n_grid &&
                   static_cast<double>(g) * delta < tau + 1e-15) {
              if (g > 0) {
                double t_start = (g - 1) * delta;
                int bt = std::min<int>(nt - 1,
                                       static_cast<int>(t_start / span * nt));
                for (int p = 0; p < np; ++p) {
                  double inc = pos[p] - prev[p];
                  int bx = std::min<int>(
                      nx - 1,
                      static_cast<int>(wrap01(prev[p] + 0.5 / nx) * nx));
                  int bin = bt * nx + bx;
                  out.s0[bin] += 1.0;
                  out.s1[bin] += inc;
                  out.s2[bin] += inc * inc;
                }
              }
              prev = pos;
              ++g;
            }
          };
          // The disturbance geometry depends on the event only, so it is
          // computed once and applied to every tracked start.
          for (std::size_t i = ev.clock.times.size(); i-- > 0;) {
            advance_grid(-ev.clock.times[i]);
            DisturbanceGeometry geo =
                disturbance_geometry(field, h, ev.clock.times[i],
                                     ev.thetas[i], opts.collapse_only);
            for (int p = 0; p < np; ++p) {
              pos[p] += inverse_displacement(geo, pos[p], Side::right);
            }
          }
          advance_grid(span + delta);
        }
      });

  BinSums total;
  total.init(nt * nx);
  for (const BinSums& s : slots) {
    if (s.s0.empty()) continue;
    for (int b = 0; b < nt * nx; ++b) {
      total.s0[b] += s.s0[b];
      total.s1[b] += s.s1[b];
      total.s2[b] += s.s2[b];
    }
  }

  DriftTable table;
  table.delta = delta;
  table.tolerance_floor = opts.tolerance_floor;
  for (int bt = 0; bt < nt; ++bt) {
    for (int bx = 0; bx < nx; ++bx) {
      int bin = bt * nx + bx;
      DriftBin b;
      b.t_center = span * (bt + 0.5) / nt;
      b.x_center = static_cast<double>(bx) / nx;
      b.n = static_cast<long long>(total.s0[bin]);
      // Bin-averaged targets: the reversed drift -b + a'/2 and diffusivity a
      // at forward time -t_center, averaged over the x bin.
      double t_fwd = -b.t_center;
      double xlo = b.x_center - 0.5 / nx;
      double xhi = b.x_center + 0.5 / nx;
      b.drift_target = gauss_legendre(
                           [&](double xx) {
                             double ap = field.eval_a_prime(t_fwd, xx);
                             double bb = field.eval_b(t_fwd, xx);
                             return opts.collapse_only ? -0.5 * ap
                                                       : -bb + 0.5 * ap;
                           },
                           xlo, xhi, 2) *
                       nx;
      b.var_target = gauss_legendre(
                         [&](double xx) { return field.eval_a(t_fwd, xx); },
                         xlo, xhi, 2) *
                     nx;
      if (b.n > 1) {
        double mean = total.s1[bin] / total.s0[bin];
        double var = std::max(0.0, total.s2[bin] / total.s0[bin] - mean * mean);
        b.drift_rate = mean / delta;
        b.var_rate = var / delta;
        b.ci_radius = std::sqrt(var / total.s0[bin]) / delta;
        double tol_drift =
            std::max(opts.tolerance_floor, 3.0 * b.ci_radius);
        double var_ci = std::sqrt(2.0 / total.s0[bin]) * var / delta;
        double tol_var = std::max(opts.tolerance_floor, 3.0 * var_ci);
        b.pass = std::abs(b.drift_rate - b.drift_target) <= tol_drift &&
                 std::abs(b.var_rate - b.var_target) <= tol_var;
      }
      table.all_pass = table.all_pass && b.pass;
      table.bins.push_back(b);
    }
  }
  return table;
}

}  // namespace coalflow

#endif  // COALFLOW_VERIFY_HPP

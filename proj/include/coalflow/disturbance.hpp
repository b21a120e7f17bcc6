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

#ifndef COALFLOW_DISTURBANCE_HPP
#define COALFLOW_DISTURBANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "coalflow/circle_map.hpp"
#include "coalflow/coefficient_field.hpp"
#include "coalflow/discrete_flow.hpp"
#include "coalflow/errors.hpp"
#include "coalflow/parallel.hpp"
#include "coalflow/rng.hpp"
#include "coalflow/stats.hpp"

namespace coalflow {

inline double wrap01(double u) {
  double v = u - std::floor(u);
  return v >= 1.0 ? v - 1.0 : v;
}

// Nearest-representative lift of a circular offset into [-1/2, 1/2).
inline double wrap_half(double u) {
  double v = u - std::round(u);
  return v >= 0.5 ? v - 1.0 : v;
}

// ---------------------------------------------------------------------------
// The explicit disturbance family.
//
// One disturbance centered at theta collapses the arc (theta-w, theta+w) to
// the point theta, where w = (3 a(t,theta) h / 2)^(1/3), and shifts the
// antipodal band (x - theta) in (1/2 - h^(1/3), 1/2 + h^(1/3)) by
// r = (h^(2/3)/2) (b - a') evaluated at the band center theta - 1/2, with a
// flat reconnector of width |r| on the side determined by the sign of r.
// Identity everywhere else.
// ---------------------------------------------------------------------------

struct DisturbanceGeometry {
  double theta;  // reduced to [0,1)
  double w;      // collapse half-width
  double hc;     // h^(1/3), band half-width
  double r;      // band shift (0 for the collapse-only family)
};

inline DisturbanceGeometry disturbance_geometry(const CoefficientField& field,
                                                double h, double t,
                                                double theta,
                                                bool collapse_only = false) {
  DisturbanceGeometry g;
  g.theta = wrap01(theta);
  g.hc = std::cbrt(h);
  double a = field.eval_a(t, g.theta);
  g.w = std::cbrt(1.5 * a * h);
  if (collapse_only) {
    g.r = 0.0;
  } else {
    double center = wrap01(g.theta - 0.5);
    g.r = 0.5 * g.hc * g.hc *
          (field.eval_b(t, center) - field.eval_a_prime(t, center));
  }
  if (!(g.w > 0.0) || !(g.w < 0.25)) {
    throw ParamsOutOfRegime("collapse half-width w=" + std::to_string(g.w) +
                            " outside (0, 1/4); reduce h");
  }
  if (!collapse_only) {
    if (!(std::abs(g.r) < g.hc) || !(g.w + g.hc + std::abs(g.r) < 0.5)) {
      throw ParamsOutOfRegime("band shift r=" + std::to_string(g.r) +
                              " too large for h=" + std::to_string(h));
    }
  }
  return g;
}

// Verifies the regime on a (t, theta) grid before building flows or
// estimating moments for a given h.
inline void check_disturbance_regime(const CoefficientField& field, double h,
                                     double t_lo, double t_hi,
                                     bool collapse_only = false) {
  int nt = (t_hi > t_lo) ? 9 : 1;
  for (int it = 0; it < nt; ++it) {
    double t = (nt == 1) ? t_lo : t_lo + (t_hi - t_lo) * it / (nt - 1);
    for (int k = 0; k < 129; ++k) {
      disturbance_geometry(field, h, t, k / 129.0, collapse_only);
    }
  }
}

struct ExplicitDisturbanceParams {
  const CoefficientField* field = nullptr;
  double h = 0.0;
  double t = 0.0;
  double theta = 0.0;
  bool collapse_only = false;
};

// The disturbance as an exact CircleMap.
inline CircleMap sample_explicit_map(const ExplicitDisturbanceParams& p) {
  DisturbanceGeometry g =
      disturbance_geometry(*p.field, p.h, p.t, p.theta, p.collapse_only);
  double th = g.theta;
  std::vector<Breakpoint> bps;
  bps.push_back({th - g.w, th - g.w, th});  // identity jumps onto the flat
  bps.push_back({th + g.w, th, th + g.w});  // and jumps back off it
  if (g.r != 0.0) {
    double blo = th + 0.5 - g.hc;
    double bhi = th + 0.5 + g.hc;
    if (g.r > 0.0) {
      bps.push_back({blo, blo, blo + g.r});
      bps.push_back({bhi, bhi + g.r, bhi + g.r});
      bps.push_back({bhi + g.r, bhi + g.r, bhi + g.r});
    } else {
      bps.push_back({blo + g.r, blo + g.r, blo + g.r});
      bps.push_back({blo, blo + g.r, blo + g.r});
      bps.push_back({bhi, bhi + g.r, bhi});
    }
  }
  return CircleMap(std::move(bps));
}

// F(x) - x from the case analysis, without building a CircleMap.  Agrees
// with evaluate(sample_explicit_map(...), x, side) - x exactly.
inline double forward_displacement(const DisturbanceGeometry& g, double x,
                                   Side side) {
  double d = wrap_half(x - g.theta);
  if (d >= -g.w && d <= g.w) {
    if (d == -g.w) return side == Side::right ? g.w : 0.0;
    if (d == g.w) return side == Side::left ? -g.w : 0.0;
    return -d;
  }
  if (g.r == 0.0) return 0.0;
  double e = wrap_half(x - g.theta - 0.5);
  if (g.r > 0.0) {
    if (e < -g.hc || e > g.hc + g.r) return 0.0;
    if (e == -g.hc) return side == Side::right ? g.r : 0.0;
    if (e <= g.hc) return g.r;
    if (e == g.hc + g.r) return 0.0;
    return g.hc + g.r - e;  // reconnector flat
  }
  // r < 0
  if (e < -g.hc + g.r || e > g.hc) return 0.0;
  if (e == -g.hc + g.r) return 0.0;
  if (e < -g.hc) return -g.hc + g.r - e;  // reconnector flat
  if (e == g.hc) return side == Side::left ? g.r : 0.0;
  return g.r;
}

// F^{-1}(y) - y for the same disturbance: the collapse flat becomes a jump
// at theta, the collapse jumps become flats pinned at theta -+ w, and the
// band inverts to a shift by -r with the reconnector on the opposite side.
inline double inverse_displacement(const DisturbanceGeometry& g, double y,
                                   Side side) {
  double e = wrap_half(y - g.theta);
  if (e >= -g.w && e <= g.w) {
    if (e == -g.w || e == g.w) return 0.0;
    if (e == 0.0) return side == Side::left ? -g.w : g.w;
    return e < 0.0 ? -g.w - e : g.w - e;
  }
  if (g.r == 0.0) return 0.0;
  double e2 = wrap_half(y - g.theta - 0.5);
  if (g.r > 0.0) {
    if (e2 < -g.hc || e2 > g.hc + g.r) return 0.0;
    if (e2 == -g.hc) return 0.0;
    if (e2 < -g.hc + g.r) return -g.hc - e2;  // inverse of the edge jump
    if (e2 < g.hc + g.r) return -g.r;
    return side == Side::left ? -g.r : 0.0;  // e2 == hc + r
  }
  // r < 0
  if (e2 < -g.hc + g.r || e2 > g.hc) return 0.0;
  if (e2 == -g.hc + g.r) return side == Side::right ? -g.r : 0.0;
  if (e2 <= g.hc + g.r) return -g.r;
  if (e2 == g.hc) return 0.0;
  return g.hc - e2;  // inverse reconnector: flat of G at theta + 1/2 + hc
}

inline double explicit_displacement(const CoefficientField& field, double h,
                                    double t, double theta, double x,
                                    Side side, bool reversed,
                                    bool collapse_only = false) {
  DisturbanceGeometry g =
      disturbance_geometry(field, h, t, theta, collapse_only);
  return reversed ? inverse_displacement(g, x, side)
                  : forward_displacement(g, x, side);
}

// ---------------------------------------------------------------------------
// Poisson clock and flow assembly.
// ---------------------------------------------------------------------------

struct PoissonClock {
  double h = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::vector<double> times;  // strictly increasing, in (t_lo, t_hi]
};

inline PoissonClock build_clock(double h, double t_lo, double t_hi,
                                std::uint64_t seed) {
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
  if (!(t_hi >= t_lo)) throw std::invalid_argument("bad clock window");
  PoissonClock clock{h, t_lo, t_hi, {}};
  Rng rng(derive_seed(seed, kStreamClock));
  double t = t_lo;
  for (;;) {
    t += rng.exponential(h);
    if (t > t_hi) break;
    clock.times.push_back(t);
  }
  return clock;
}

struct DisturbanceEvents {
  PoissonClock clock;
  std::vector<double> thetas;  // one uniform draw per clock time
};

// The randomness underlying a disturbance flow, in the exact draw order used
// by build_disturbance_flow, so streaming consumers reproduce the flow
// without materializing maps.
inline DisturbanceEvents sample_disturbance_events(double h, double t_lo,
                                                   double t_hi,
                                                   std::uint64_t seed) {
  DisturbanceEvents ev;
  ev.clock = build_clock(h, t_lo, t_hi, seed);
  Rng rng(derive_seed(seed, kStreamTheta));
  ev.thetas.reserve(ev.clock.times.size());
  for (std::size_t i = 0; i < ev.clock.times.size(); ++i) {
    ev.thetas.push_back(rng.uniform01());
  }
  return ev;
}

inline DiscreteFlow build_disturbance_flow(const CoefficientField& field,
                                           double h, double t_lo, double t_hi,
                                           std::uint64_t seed,
                                           bool collapse_only = false) {
  check_disturbance_regime(field, h, t_lo, t_hi, collapse_only);
  DisturbanceEvents ev = sample_disturbance_events(h, t_lo, t_hi, seed);
  std::vector<FlowEvent> events;
  events.reserve(ev.clock.times.size());
  for (std::size_t i = 0; i < ev.clock.times.size(); ++i) {
    events.push_back(
        {ev.clock.times[i],
         sample_explicit_map(
             {&field, h, ev.clock.times[i], ev.thetas[i], collapse_only})});
  }
  return DiscreteFlow(t_lo, t_hi, std::move(events));
}

// The flow assembled directly from the reversed disturbances
// G_{h,t} = F^{-1}_{h,-t} on the negated window with the reversed clock.
// Event-by-event it equals time_reverse(build_disturbance_flow(...)) with
// the same seed.
inline DiscreteFlow build_reversed_disturbance_flow(
    const CoefficientField& field, double h, double t_lo, double t_hi,
    std::uint64_t seed, bool collapse_only = false) {
  check_disturbance_regime(field, h, t_lo, t_hi, collapse_only);
  DisturbanceEvents ev = sample_disturbance_events(h, t_lo, t_hi, seed);
  std::vector<FlowEvent> events;
  events.reserve(ev.clock.times.size());
  for (std::size_t i = ev.clock.times.size(); i-- > 0;) {
    double t = ev.clock.times[i];
    events.push_back(
        {-t, invert(sample_explicit_map(
                 {&field, h, t, ev.thetas[i], collapse_only}))});
  }
  return DiscreteFlow(-t_hi, -t_lo, std::move(events));
}

// ---------------------------------------------------------------------------
// Moment estimators.
//
// The headline b_h, a_h are Monte-Carlo means over theta draws; the sup
// quantities B_h, A_h and the localization lambda_h are computed by exact
// quadrature in theta: for a fixed evaluation point the displacement is
// piecewise smooth with boundaries on known curves, so the integral is a sum
// of Gauss panels between boundary roots found by fixed-point iteration.
// ---------------------------------------------------------------------------

struct MomentReport {
  double h = 0.0;
  double t = 0.0;
  double x = 0.0;
  double b_h = 0.0;
  double a_h = 0.0;
  double M_h = 0.0;
  double lambda_h = 0.0;
  double B_h = 0.0;
  double A_h = 0.0;
  double ci_radius = 0.0;  // 99% level, max over the b and a estimators
  long long samples = 0;
  // Deterministic quadrature values of the same moments at (t, x).
  double b_h_quadrature = 0.0;
  double a_h_quadrature = 0.0;
  bool reversed = false;
};

struct MomentOptions {
  bool collapse_only = false;
  int grid_x = 17;         // sup grid for B_h / A_h
  int grid_t = 5;
  int grid_theta = 257;    // sup grid for M_h
  int lambda_x_grid = 8;
  int lambda_d_grid = 200;
  int jobs = 1;
};

namespace detail {

// Solves theta = target(theta) by fixed-point iteration; the boundary curves
// all have contraction factors O(w') or O(r'), far below 1 in regime.
template <class F>
double boundary_fixed_point(F target, double start) {
  double th = start;
  for (int i = 0; i < 40; ++i) {
    double next = target(th);
    if (next == th) break;
    th = next;
  }
  return th;
}

// Piece boundaries (in the theta lift near x resp. x - 1/2) of the
// displacement integrand.
inline std::vector<double> displacement_cuts(const CoefficientField& field,
                                             double h, double t, double x,
                                             bool collapse_only) {
  std::vector<double> cuts;
  double hc = std::cbrt(h);
  auto w_at = [&](double th) {
    return std::cbrt(1.5 * field.eval_a(t, wrap01(th)) * h);
  };
  auto r_at = [&](double th) {
    if (collapse_only) return 0.0;
    double c = wrap01(wrap01(th) - 0.5);
    return 0.5 * hc * hc * (field.eval_b(t, c) - field.eval_a_prime(t, c));
  };
  // Collapse boundaries |x - theta| = w(theta); the center theta = x is a
  // kink of the inverse displacement.
  cuts.push_back(
      boundary_fixed_point([&](double th) { return x - w_at(th); }, x));
  cuts.push_back(
      boundary_fixed_point([&](double th) { return x + w_at(th); }, x));
  cuts.push_back(x);
  if (!collapse_only) {
    double base = x - 0.5;
    cuts.push_back(base - hc);
    cuts.push_back(base + hc);
    cuts.push_back(boundary_fixed_point(
        [&](double th) { return base - hc - r_at(th); }, base - hc));
    cuts.push_back(boundary_fixed_point(
        [&](double th) { return base + hc - r_at(th); }, base + hc));
    cuts.push_back(boundary_fixed_point(
        [&](double th) { return base - hc + r_at(th); }, base - hc));
    cuts.push_back(boundary_fixed_point(
        [&](double th) { return base + hc + r_at(th); }, base + hc));
  }
  return cuts;
}

// Integrates f over [lo, hi] split at the given cuts, Gauss panels on each
// smooth piece.
template <class F>
double integrate_with_cuts(F f, double lo, double hi,
                           const std::vector<double>& cuts, int panels = 3) {
  std::vector<double> edges;
  edges.push_back(lo);
  for (double c : cuts) {
    if (c > lo && c < hi) edges.push_back(c);
  }
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i + 1] - edges[i] < 1e-15) continue;
    total += gauss_legendre(f, edges[i], edges[i + 1], panels);
  }
  return total;
}

}  // namespace detail

// Deterministic quadrature of (E F~(x), E F~(x)^2) / h at one (t, x), for
// the forward or inverse disturbance.
inline std::pair<double, double> displacement_moments_quadrature(
    const CoefficientField& field, double h, double t, double x, bool reversed,
    bool collapse_only = false) {
  double hc = std::cbrt(h);
  double w_up = std::cbrt(1.5 * field.a_upper * h);
  double rho_max =
      collapse_only
          ? 0.0
          : 0.5 * hc * hc * (field.b_upper + field.a_prime_upper);
  std::vector<double> cuts =
      detail::displacement_cuts(field, h, t, x, collapse_only);

  auto disp = [&](double th) {
    DisturbanceGeometry g =
        disturbance_geometry(field, h, t, th, collapse_only);
    return reversed ? inverse_displacement(g, x, Side::right)
                    : forward_displacement(g, x, Side::right);
  };

  double m1 = 0.0, m2 = 0.0;
  auto add_window = [&](double center, double halfwidth) {
    double lo = center - halfwidth, hi = center + halfwidth;
    m1 += detail::integrate_with_cuts(disp, lo, hi, cuts);
    m2 += detail::integrate_with_cuts(
        [&](double th) {
          double d = disp(th);
          return d * d;
        },
        lo, hi, cuts);
  };
  add_window(x, w_up + rho_max + 1e-9);
  if (!collapse_only && rho_max > 0.0) {
    add_window(x - 0.5, hc + 2.0 * rho_max + 1e-9);
  }
  return {m1 / h, m2 / h};
}

// Largest displacement magnitude sup |F~| over a (t, theta) grid; for this
// family it equals max(w, |r|) pointwise.
inline double moment_sup_displacement(const CoefficientField& field, double h,
                                      const MomentOptions& opts) {
  double best = 0.0;
  int nt = (field.t_hi > field.t_lo) ? opts.grid_t : 1;
  for (int it = 0; it < nt; ++it) {
    double t = (nt == 1) ? field.t_lo
                         : field.t_lo + (field.t_hi - field.t_lo) * it / (nt - 1);
    for (int k = 0; k < opts.grid_theta; ++k) {
      DisturbanceGeometry g = disturbance_geometry(
          field, h, t, static_cast<double>(k) / opts.grid_theta,
          opts.collapse_only);
      best = std::max(best, std::max(g.w, std::abs(g.r)));
    }
  }
  return best;
}

// Smallest grid lambda such that lambda <= |x-y| <= 1-lambda implies
// (1/h) E|F~(x) F~(y)| < lambda, by quadrature of the product displacement
// over the overlap of the two active windows.
inline double localization_lambda(const CoefficientField& field, double h,
                                  bool reversed, const MomentOptions& opts) {
  double hc = std::cbrt(h);
  double w_up = std::cbrt(1.5 * field.a_upper * h);
  double rho_max = opts.collapse_only
                       ? 0.0
                       : 0.5 * hc * hc * (field.b_upper + field.a_prime_upper);
  double half1 = w_up + rho_max + 1e-9;          // collapse window half-width
  double half2 = hc + 2.0 * rho_max + 1e-9;      // band window half-width

  int nd = opts.lambda_d_grid;
  int nx = opts.lambda_x_grid;
  int nt = (field.t_hi > field.t_lo) ? 3 : 1;
  std::vector<double> q(nd / 2 + 1, 0.0);

  for (int jt = 0; jt < nt; ++jt) {
    double t = (nt == 1)
                   ? field.t_lo
                   : field.t_lo + (field.t_hi - field.t_lo) * jt / (nt - 1);
    for (int jx = 0; jx < nx; ++jx) {
      double x = static_cast<double>(jx) / nx;
      std::vector<double> cuts_x =
          detail::displacement_cuts(field, h, t, x, opts.collapse_only);
      for (int jd = 1; jd <= nd / 2; ++jd) {
        double d = static_cast<double>(jd) / nd;
        double y = x + d;
        auto prod = [&](double th) {
          DisturbanceGeometry g =
              disturbance_geometry(field, h, t, th, opts.collapse_only);
          double gx = reversed ? inverse_displacement(g, x, Side::right)
                               : forward_displacement(g, x, Side::right);
          if (gx == 0.0) return 0.0;
          double gy = reversed ? inverse_displacement(g, y, Side::right)
                               : forward_displacement(g, y, Side::right);
          return std::abs(gx * gy);
        };
        // Candidate overlap windows of the two active sets (circular).
        double centers_x[2] = {x, x - 0.5};
        double centers_y[2] = {y, y - 0.5};
        double halves[2] = {half1, half2};
        int n_win = opts.collapse_only ? 1 : 2;
        double total = 0.0;
        std::vector<double> cuts_y;
        bool have_cuts_y = false;
        for (int ax = 0; ax < n_win; ++ax) {
          for (int ay = 0; ay < n_win; ++ay) {
            double c1 = centers_x[ax];
            double c2 = c1 + wrap_half(centers_y[ay] - c1);
            double lo = std::max(c1 - halves[ax], c2 - halves[ay]);
            double hi = std::min(c1 + halves[ax], c2 + halves[ay]);
            if (hi <= lo) continue;
            if (!have_cuts_y) {
              cuts_y = detail::displacement_cuts(field, h, t, y,
                                                 opts.collapse_only);
              have_cuts_y = true;
            }
            // Lift every known boundary into this window's frame.
            double mid = 0.5 * (lo + hi);
            std::vector<double> cuts;
            cuts.reserve(2 * (cuts_x.size() + cuts_y.size()));
            for (double c : cuts_x) cuts.push_back(mid + wrap_half(c - mid));
            for (double c : cuts_y) cuts.push_back(mid + wrap_half(c - mid));
            total += detail::integrate_with_cuts(prod, lo, hi, cuts);
          }
        }
        q[jd] = std::max(q[jd], total / h);
      }
    }
  }

  for (int k = 1; k <= nd / 2; ++k) {
    double lambda = static_cast<double>(k) / nd;
    double worst = 0.0;
    for (int j = k; j <= nd / 2; ++j) worst = std::max(worst, q[j]);
    if (worst < lambda) return lambda;
  }
  return 0.5;
}

namespace detail {

inline MomentReport estimate_moments_impl(const CoefficientField& field,
                                          double h, double t, double x,
                                          long long n_samples,
                                          std::uint64_t seed,
                                          const MomentOptions& opts,
                                          bool reversed) {
  if (n_samples < 10000) {
    throw InsufficientSamples("moment estimation needs >= 1e4 samples");
  }
  check_disturbance_regime(field, h, field.t_lo, field.t_hi,
                           opts.collapse_only);

  MomentReport rep;
  rep.h = h;
  rep.t = t;
  rep.x = x;
  rep.samples = n_samples;
  rep.reversed = reversed;

  // Monte Carlo headline estimates.  Chunk count is fixed so results do not
  // depend on the worker count.
  struct Sums {
    double s1 = 0, s2 = 0, s4 = 0;
  };
  constexpr std::size_t kChunks = 256;
  std::size_t n = static_cast<std::size_t>(n_samples);
  std::size_t per = (n + kChunks - 1) / kChunks;
  auto slots = parallel_chunks<Sums>(
      kChunks, opts.jobs, [&](std::size_t first, std::size_t last, Sums& out) {
        for (std::size_t c = first; c < last; ++c) {
          std::size_t i0 = c * per;
          std::size_t i1 = std::min(n, i0 + per);
          if (i0 >= i1) continue;
          Rng rng(derive_seed(seed, kStreamMoments, c));
          for (std::size_t i = i0; i < i1; ++i) {
            double theta = rng.uniform01();
            double d = explicit_displacement(field, h, t, theta, x,
                                             Side::right, reversed,
                                             opts.collapse_only);
            out.s1 += d;
            double d2 = d * d;
            out.s2 += d2;
            out.s4 += d2 * d2;
          }
        }
      });
  Sums total;
  for (const Sums& s : slots) {
    total.s1 += s.s1;
    total.s2 += s.s2;
    total.s4 += s.s4;
  }
  double dn = static_cast<double>(n);
  double mean1 = total.s1 / dn;
  double mean2 = total.s2 / dn;
  double mean4 = total.s4 / dn;
  rep.b_h = mean1 / h;
  rep.a_h = mean2 / h;
  double var1 = std::max(0.0, mean2 - mean1 * mean1);
  double var2 = std::max(0.0, mean4 - mean2 * mean2);
  double z99 = 2.5758293035489004;
  double ci_b = z99 * std::sqrt(var1 / dn) / h;
  double ci_a = z99 * std::sqrt(var2 / dn) / h;
  rep.ci_radius = std::max(ci_b, ci_a);

  auto [bq, aq] =
      displacement_moments_quadrature(field, h, t, x, reversed,
                                      opts.collapse_only);
  rep.b_h_quadrature = bq;
  rep.a_h_quadrature = aq;

  // Drift target of this family: the full family tracks b (and the reversed
  // one -b + a'/2); without the band the collapse alone contributes a'
  // forward and -a'/2 reversed.
  auto drift_target = [&](double tt, double xx) {
    double ap = field.eval_a_prime(tt, xx);
    double bb = field.eval_b(tt, xx);
    if (opts.collapse_only) return reversed ? -0.5 * ap : ap;
    return reversed ? -bb + 0.5 * ap : bb;
  };

  int ngt = (field.t_hi > field.t_lo) ? opts.grid_t : 1;
  for (int it = 0; it < ngt; ++it) {
    double tt = (ngt == 1)
                    ? field.t_lo
                    : field.t_lo + (field.t_hi - field.t_lo) * it / (ngt - 1);
    for (int ix = 0; ix < opts.grid_x; ++ix) {
      double xx = static_cast<double>(ix) / opts.grid_x;
      auto [bqq, aqq] = displacement_moments_quadrature(
          field, h, tt, xx, reversed, opts.collapse_only);
      rep.B_h = std::max(rep.B_h, std::abs(bqq - drift_target(tt, xx)));
      rep.A_h = std::max(rep.A_h, std::abs(aqq - field.eval_a(tt, xx)));
    }
  }

  rep.M_h = moment_sup_displacement(field, h, opts);
  rep.lambda_h = localization_lambda(field, h, reversed, opts);
  return rep;
}

}  // namespace detail

inline MomentReport estimate_moments(const CoefficientField& field, double h,
                                     double t, double x, long long n_samples,
                                     std::uint64_t seed,
                                     const MomentOptions& opts = {}) {
  return detail::estimate_moments_impl(field, h, t, x, n_samples, seed, opts,
                                       /*reversed=*/false);
}

inline MomentReport estimate_reversed_moments(const CoefficientField& field,
                                              double h, double t, double x,
                                              long long n_samples,
                                              std::uint64_t seed,
                                              const MomentOptions& opts = {}) {
  return detail::estimate_moments_impl(field, h, t, x, n_samples, seed, opts,
                                       /*reversed=*/true);
}

}  // namespace coalflow

#endif  // COALFLOW_DISTURBANCE_HPP

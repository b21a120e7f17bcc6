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

#ifndef COALFLOW_CIRCLE_MAP_HPP
#define COALFLOW_CIRCLE_MAP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "coalflow/errors.hpp"

namespace coalflow {

enum class Side { left, right };

// Tolerance for canonicalization decisions (merging breakpoints, dropping
// collinear interior points, flat-on-jump detection).  Evaluation itself
// never snaps.
inline constexpr double kMapTol = 1e-12;

// A monotone degree-1 map of the line, stored as the pair {f-, f+} of left-
// and right-continuous modifications of one non-decreasing graph.  The data
// is one period of breakpoints: at position x the map takes the value
// y_minus from the left and y_plus from the right (y_minus <= y_plus; a
// strict gap is an upward jump).  Between consecutive breakpoints the graph
// is the straight segment from (x_i, y_plus_i) to (x_{i+1}, y_minus_{i+1});
// the last breakpoint connects to the first one shifted by (+1, +1), which
// realizes f(x + n) = f(x) + n.
//
// Construction canonicalizes: positions are reduced mod 1 into [0,1),
// sub-tolerance jumps are closed, collinear interior points are removed, and
// a pure translation is re-anchored at x = 0.  Structural equality of
// canonical maps is therefore meaningful, and invert/compose/d_map are exact
// piecewise-linear algebra rather than grid approximations.
struct Breakpoint {
  double x;
  double y_minus;
  double y_plus;

  friend bool operator==(const Breakpoint& a, const Breakpoint& b) {
    return a.x == b.x && a.y_minus == b.y_minus && a.y_plus == b.y_plus;
  }
};

class CircleMap {
 public:
  // Identity map.
  CircleMap() : bps_{{0.0, 0.0, 0.0}} {}

  explicit CircleMap(std::vector<Breakpoint> bps) : bps_(std::move(bps)) {
    canonicalize();
    validate();
  }

  static CircleMap identity() { return CircleMap(); }

  static CircleMap shift(double c) {
    return CircleMap({{0.0, c, c}});
  }

  const std::vector<Breakpoint>& breakpoints() const { return bps_; }

  bool is_identity() const {
    return bps_.size() == 1 && bps_[0].x == 0.0 && bps_[0].y_minus == 0.0 &&
           bps_[0].y_plus == 0.0;
  }

  friend bool operator==(const CircleMap& a, const CircleMap& b) {
    return a.bps_ == b.bps_;
  }

  // One fundamental period of the graph as a polyline from (x0, y-_0) to
  // (x0+1, y-_0+1), with vertical runs at jumps and horizontal runs at flats.
  std::vector<std::array<double, 2>> period_polyline() const {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(2 * bps_.size() + 1);
    auto push = [&](double u, double v) {
      if (!pts.empty() && pts.back()[0] == u && pts.back()[1] == v) return;
      pts.push_back({u, v});
    };
    for (const Breakpoint& b : bps_) {
      push(b.x, b.y_minus);
      push(b.x, b.y_plus);
    }
    push(bps_.front().x + 1.0, bps_.front().y_minus + 1.0);
    return pts;
  }

  // Rebuilds a map from a period polyline (monotone in both coordinates,
  // last point = first point + (1,1)).
  static CircleMap from_polyline(const std::vector<std::array<double, 2>>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("polyline too short");
    std::vector<Breakpoint> bps;
    std::size_t i = 0;
    std::size_t last = pts.size() - 1;  // closing point, excluded
    while (i < last) {
      double u = pts[i][0];
      double v_lo = pts[i][1];
      double v_hi = v_lo;
      std::size_t j = i;
      while (j + 1 <= last && pts[j + 1][0] == u) {
        ++j;
        v_hi = pts[j][1];
      }
      bps.push_back({u, v_lo, v_hi});
      i = j + 1;
    }
    return CircleMap(std::move(bps));
  }

 private:
  void canonicalize() {
    if (bps_.empty()) throw std::invalid_argument("empty breakpoint list");
    for (Breakpoint& b : bps_) {
      if (!std::isfinite(b.x) || !std::isfinite(b.y_minus) ||
          !std::isfinite(b.y_plus)) {
        throw std::invalid_argument("non-finite breakpoint");
      }
      double k = std::floor(b.x);
      b.x -= k;
      if (b.x >= 1.0) {  // guard against floor rounding at the seam
        b.x -= 1.0;
        k += 1.0;
      }
      b.y_minus -= k;
      b.y_plus -= k;
      if (b.y_plus - b.y_minus <= kMapTol) {
        b.y_plus = b.y_minus = 0.5 * (b.y_minus + b.y_plus);
      }
    }
    std::sort(bps_.begin(), bps_.end(),
              [](const Breakpoint& a, const Breakpoint& b) { return a.x < b.x; });

    // Merge breakpoints at (numerically) the same position.
    std::vector<Breakpoint> merged;
    for (const Breakpoint& b : bps_) {
      if (!merged.empty() && b.x - merged.back().x <= kMapTol) {
        merged.back().y_minus = std::min(merged.back().y_minus, b.y_minus);
        merged.back().y_plus = std::max(merged.back().y_plus, b.y_plus);
      } else {
        merged.push_back(b);
      }
    }
    bps_ = std::move(merged);

    // Drop interior points that lie on the chord of their neighbours.
    bool changed = true;
    while (changed && bps_.size() > 1) {
      changed = false;
      for (std::size_t i = 0; i < bps_.size() && bps_.size() > 1; ++i) {
        const Breakpoint& cur = bps_[i];
        if (cur.y_plus != cur.y_minus) continue;  // jumps always stay
        std::size_t ip = (i + bps_.size() - 1) % bps_.size();
        std::size_t in = (i + 1) % bps_.size();
        double px = bps_[ip].x, py = bps_[ip].y_plus;
        double nx = bps_[in].x, ny = bps_[in].y_minus;
        if (ip >= i) {  // previous wraps below
          px -= 1.0;
          py -= 1.0;
        }
        if (in <= i) {  // next wraps above
          nx += 1.0;
          ny += 1.0;
        }
        double t = (cur.x - px) / (nx - px);
        double pred = py + t * (ny - py);
        if (std::abs(cur.y_minus - pred) <= kMapTol) {
          bps_.erase(bps_.begin() + static_cast<std::ptrdiff_t>(i));
          changed = true;
          --i;
        }
      }
    }

    // A single jump-free breakpoint means the map is the translation
    // x + (y - x); anchor it at 0 so translations compare equal.
    if (bps_.size() == 1 && bps_[0].y_minus == bps_[0].y_plus &&
        bps_[0].x != 0.0) {
      double c = bps_[0].y_minus - bps_[0].x;
      bps_[0] = {0.0, c, c};
    }
  }

  void validate() const {
    for (std::size_t i = 0; i < bps_.size(); ++i) {
      const Breakpoint& b = bps_[i];
      if (b.x < 0.0 || b.x >= 1.0) {
        throw std::invalid_argument("breakpoint position outside [0,1)");
      }
      if (b.y_plus < b.y_minus) {
        throw std::invalid_argument("downward jump at breakpoint");
      }
      double next_y = (i + 1 < bps_.size()) ? bps_[i + 1].y_minus
                                            : bps_.front().y_minus + 1.0;
      if (next_y < b.y_plus - kMapTol) {
        throw std::invalid_argument("decreasing segment between breakpoints");
      }
    }
  }

  std::vector<Breakpoint> bps_;
};

// f-(x) or f+(x).  The degree-1 extension adds the integer part back after
// evaluating in the fundamental domain, so f(x + n) - f(x) = n holds exactly
// whenever x and x + n are exactly representable.
inline double evaluate(const CircleMap& m, double x, Side side) {
  const auto& bps = m.breakpoints();
  double k = std::floor(x);
  double u = x - k;
  if (u >= 1.0) {
    u -= 1.0;
    k += 1.0;
  }
  // Last breakpoint with position <= u; may wrap to the previous period.
  auto it = std::upper_bound(
      bps.begin(), bps.end(), u,
      [](double value, const Breakpoint& b) { return value < b.x; });
  double xa, ya;
  std::size_t next_idx;
  if (it == bps.begin()) {
    const Breakpoint& lastb = bps.back();
    xa = lastb.x - 1.0;
    ya = lastb.y_plus - 1.0;
    next_idx = 0;
  } else {
    std::size_t idx = static_cast<std::size_t>(it - bps.begin()) - 1;
    const Breakpoint& b = bps[idx];
    if (u == b.x) {
      return (side == Side::left ? b.y_minus : b.y_plus) + k;
    }
    xa = b.x;
    ya = b.y_plus;
    next_idx = idx + 1;
  }
  double xb, yb;
  if (next_idx < bps.size()) {
    xb = bps[next_idx].x;
    yb = bps[next_idx].y_minus;
  } else {
    xb = bps.front().x + 1.0;
    yb = bps.front().y_minus + 1.0;
  }
  double slope = (yb - ya) / (xb - xa);
  return ya + (u - xa) * slope + k;
}

// The inverse pair {(f+)^-1, (f-)^-1}: reflect the graph across the diagonal.
// Jumps become flats and flats become jumps; the operation is an exact
// involution on canonical maps.
inline CircleMap invert(const CircleMap& m) {
  auto pts = m.period_polyline();
  for (auto& p : pts) std::swap(p[0], p[1]);
  return CircleMap::from_polyline(pts);
}

namespace detail {

// True iff g has a genuine jump at value v (positions compared mod 1).
inline bool has_jump_at(const CircleMap& g, double v) {
  double u = v - std::floor(v);
  if (u >= 1.0) u -= 1.0;
  for (const Breakpoint& b : g.breakpoints()) {
    if (b.y_plus - b.y_minus <= kMapTol) continue;
    double d = std::abs(b.x - u);
    if (d <= kMapTol || std::abs(d - 1.0) <= kMapTol) return true;
  }
  return false;
}

}  // namespace detail

// Pairwise composition {g- o f-, g+ o f+}.  Valid whenever no flat of the
// inner map sits at a jump position of the outer map; otherwise throws
// AmbiguousComposition.  Result breakpoints are the inner breakpoints plus
// the preimages of outer breakpoints under the inner map, so the composition
// is exact piecewise-linear data.
inline CircleMap compose(const CircleMap& outer, const CircleMap& inner) {
  const auto& fb = inner.breakpoints();
  std::vector<double> xs;
  xs.reserve(fb.size() * 3);
  for (const Breakpoint& b : fb) xs.push_back(b.x);

  const auto& gb = outer.breakpoints();
  for (std::size_t i = 0; i < fb.size(); ++i) {
    // Open segment from (xa, va) to (xb, vb).
    double xa = fb[i].x, va = fb[i].y_plus;
    double xb, vb;
    if (i + 1 < fb.size()) {
      xb = fb[i + 1].x;
      vb = fb[i + 1].y_minus;
    } else {
      xb = fb.front().x + 1.0;
      vb = fb.front().y_minus + 1.0;
    }
    if (vb - va <= kMapTol) {
      // Flat (or near-flat) segment: its value must avoid jumps of the outer
      // map, else the pairwise composition is ambiguous.
      if (xb - xa > kMapTol && detail::has_jump_at(outer, va)) {
        throw AmbiguousComposition(
            "flat of inner map at value " + std::to_string(va) +
            " meets a jump of the outer map");
      }
      continue;
    }
    double slope = (vb - va) / (xb - xa);
    // Pull back every outer breakpoint with value strictly inside (va, vb).
    for (const Breakpoint& g : gb) {
      for (double n = std::ceil(va - g.x); g.x + n < vb; n += 1.0) {
        double w = g.x + n;
        if (w > va && w < vb) {
          xs.push_back(xa + (w - va) / slope);
        }
      }
    }
  }

  std::vector<Breakpoint> out;
  out.reserve(xs.size());
  for (double x : xs) {
    double ym = evaluate(outer, evaluate(inner, x, Side::left), Side::left);
    double yp = evaluate(outer, evaluate(inner, x, Side::right), Side::right);
    out.push_back({x, ym, yp});
  }
  return CircleMap(std::move(out));
}

// A continuous 1-periodic piecewise-affine function with slopes in [-1, 1];
// the image of a circle map under the 45-degree graph rotation.
class ChiFunction {
 public:
  struct Node {
    double t;
    double value;
  };

  explicit ChiFunction(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("empty chi function");
    for (Node& n : nodes_) {
      double k = std::floor(n.t);
      n.t -= k;
      if (n.t >= 1.0) n.t -= 1.0;
    }
    std::sort(nodes_.begin(), nodes_.end(),
              [](const Node& a, const Node& b) { return a.t < b.t; });
    std::vector<Node> merged;
    for (const Node& n : nodes_) {
      if (!merged.empty() && n.t - merged.back().t <= kMapTol) continue;
      merged.push_back(n);
    }
    nodes_ = std::move(merged);
  }

  const std::vector<Node>& nodes() const { return nodes_; }

  double operator()(double t) const {
    double k = std::floor(t);
    double u = t - k;
    if (u >= 1.0) u -= 1.0;
    auto it = std::upper_bound(
        nodes_.begin(), nodes_.end(), u,
        [](double value, const Node& n) { return value < n.t; });
    double ta, va, tb, vb;
    if (it == nodes_.begin()) {
      ta = nodes_.back().t - 1.0;
      va = nodes_.back().value;
      tb = nodes_.front().t;
      vb = nodes_.front().value;
    } else {
      std::size_t idx = static_cast<std::size_t>(it - nodes_.begin()) - 1;
      if (u == nodes_[idx].t) return nodes_[idx].value;
      ta = nodes_[idx].t;
      va = nodes_[idx].value;
      if (idx + 1 < nodes_.size()) {
        tb = nodes_[idx + 1].t;
        vb = nodes_[idx + 1].value;
      } else {
        tb = nodes_.front().t + 1.0;
        vb = nodes_.front().value;
      }
    }
    return va + (u - ta) * (vb - va) / (tb - ta);
  }

  // Largest |slope| over all segments including the wrap segment.
  double max_abs_slope() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      double ta = nodes_[i].t, va = nodes_[i].value;
      double tb, vb;
      if (i + 1 < nodes_.size()) {
        tb = nodes_[i + 1].t;
        vb = nodes_[i + 1].value;
      } else {
        tb = nodes_.front().t + 1.0;
        vb = nodes_.front().value;
      }
      worst = std::max(worst, std::abs((vb - va) / (tb - ta)));
    }
    return worst;
  }

 private:
  std::vector<Node> nodes_;
};

// Rotated graph coordinates: each graph point (x, f(x)) becomes
// (t, chi(t)) = ((x + f(x))/2, (f(x) - x)/2).  Jumps and flats turn into
// slope +-1 segments, so chi is 1-Lipschitz; degree 1 makes it 1-periodic.
inline ChiFunction chi_transform(const CircleMap& m) {
  auto pts = m.period_polyline();
  std::vector<ChiFunction::Node> nodes;
  nodes.reserve(pts.size());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {  // closing point repeats
    nodes.push_back({0.5 * (pts[i][0] + pts[i][1]),
                     0.5 * (pts[i][1] - pts[i][0])});
  }
  return ChiFunction(std::move(nodes));
}

// sup_t |chi_f - chi_g|.  The difference of two piecewise-affine functions is
// piecewise affine with nodes in the union of node sets, so the supremum is
// attained at one of the merged nodes and the value below is exact.
inline double d_map(const CircleMap& f, const CircleMap& g) {
  ChiFunction cf = chi_transform(f);
  ChiFunction cg = chi_transform(g);
  double best = 0.0;
  for (const auto& n : cf.nodes()) {
    best = std::max(best, std::abs(n.value - cg(n.t)));
  }
  for (const auto& n : cg.nodes()) {
    best = std::max(best, std::abs(cf(n.t) - n.value));
  }
  return best;
}

inline bool approx_equal(const CircleMap& a, const CircleMap& b,
                         double tol = 1e-9) {
  const auto& ba = a.breakpoints();
  const auto& bb = b.breakpoints();
  if (ba.size() != bb.size()) return false;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    if (std::abs(ba[i].x - bb[i].x) > tol ||
        std::abs(ba[i].y_minus - bb[i].y_minus) > tol ||
        std::abs(ba[i].y_plus - bb[i].y_plus) > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace coalflow

#endif  // COALFLOW_CIRCLE_MAP_HPP

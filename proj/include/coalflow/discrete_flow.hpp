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

#ifndef COALFLOW_DISCRETE_FLOW_HPP
#define COALFLOW_DISCRETE_FLOW_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "coalflow/circle_map.hpp"

namespace coalflow {

// A bounded interval with explicit endpoint membership.  Default is (lo, hi],
// the shape used when composing a flow over "events strictly after s, up to
// and including t".
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_lo = false;
  bool closed_hi = true;

  static Interval open_closed(double lo, double hi) {
    return {lo, hi, false, true};
  }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  static Interval point(double t) { return {t, t, true, true}; }

  bool empty() const {
    if (lo > hi) return true;
    if (lo == hi) return !(closed_lo && closed_hi);
    return false;
  }

  bool contains(double t) const {
    if (t < lo || t > hi) return false;
    if (t == lo && !closed_lo) return false;
    if (t == hi && !closed_hi) return false;
    return true;
  }

  // -I: negation swaps and mirrors the endpoints.
  Interval negated() const { return {-hi, -lo, closed_hi, closed_lo}; }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo == b.lo && a.hi == b.hi && a.closed_lo == b.closed_lo &&
           a.closed_hi == b.closed_hi;
  }
};

struct FlowEvent {
  double time;
  CircleMap map;
};

// A flow over a finite window driven by finitely many atomic events: the map
// over an interval is the exact composition of the event maps inside it, so
// the weak-flow inequality holds with equality.
class DiscreteFlow {
 public:
  DiscreteFlow(double t_lo, double t_hi, std::vector<FlowEvent> events = {})
      : t_lo_(t_lo), t_hi_(t_hi), events_(std::move(events)) {
    if (!(t_hi_ >= t_lo_)) throw std::invalid_argument("bad flow window");
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (events_[i].time < t_lo_ || events_[i].time > t_hi_) {
        throw std::invalid_argument("event time outside window");
      }
      if (i > 0 && !(events_[i].time > events_[i - 1].time)) {
        throw std::invalid_argument("event times must strictly increase");
      }
    }
  }

  double window_lo() const { return t_lo_; }
  double window_hi() const { return t_hi_; }
  const std::vector<FlowEvent>& events() const { return events_; }

  bool covers(const Interval& i) const {
    return i.lo >= t_lo_ && i.hi <= t_hi_;
  }

 private:
  double t_lo_, t_hi_;
  std::vector<FlowEvent> events_;
};

// Composition of the event maps with times in the interval, later events
// outermost.  The empty interval gives the identity.
inline CircleMap flow_map(const DiscreteFlow& flow, const Interval& interval) {
  if (!flow.covers(interval)) {
    throw std::invalid_argument("interval not contained in the flow window");
  }
  CircleMap result = CircleMap::identity();
  for (const FlowEvent& e : flow.events()) {
    if (e.time > interval.hi) break;
    if (interval.contains(e.time)) {
      result = compose(e.map, result);
    }
  }
  return result;
}

// Window and event times are negated, every map is inverted, and the event
// order flips.  Applying it twice restores the original flow exactly.
inline DiscreteFlow time_reverse(const DiscreteFlow& flow) {
  std::vector<FlowEvent> rev;
  rev.reserve(flow.events().size());
  for (auto it = flow.events().rbegin(); it != flow.events().rend(); ++it) {
    rev.push_back({-it->time, invert(it->map)});
  }
  return DiscreteFlow(-flow.window_hi(), -flow.window_lo(), std::move(rev));
}

struct WeakFlowSplit {
  Interval whole;
  Interval first;   // earlier piece
  Interval second;  // later piece
};

struct WeakFlowReport {
  struct Violation {
    std::size_t split_index;
    double x;
    std::string what;
  };
  std::vector<Violation> violations;
  int checks = 0;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline bool is_disjoint_adjacent_union(const WeakFlowSplit& s) {
  const Interval &i = s.whole, &a = s.first, &b = s.second;
  if (a.empty() || b.empty()) return false;
  if (!(a.hi <= b.lo)) return false;
  if (a.hi == b.lo && a.closed_hi && b.closed_lo) return false;  // overlap
  if (a.hi != b.lo) return false;  // gap: union is not an interval
  if (a.hi == b.lo && !a.closed_hi && !b.closed_lo) return false;  // hole
  if (i.lo != a.lo || i.closed_lo != a.closed_lo) return false;
  if (i.hi != b.hi || i.closed_hi != b.closed_hi) return false;
  return true;
}

}  // namespace detail

// Checks phi-_2 o phi-_1 <= phi-_I <= phi+_I <= phi+_2 o phi+_1 pointwise on
// a grid per split.  For a DiscreteFlow the outer comparisons should hold
// with equality; tolerance is the canonicalization tolerance.
inline WeakFlowReport check_weak_flow(const DiscreteFlow& flow,
                                      const std::vector<WeakFlowSplit>& splits,
                                      int grid_points = 256) {
  WeakFlowReport report;
  for (std::size_t si = 0; si < splits.size(); ++si) {
    const WeakFlowSplit& s = splits[si];
    if (!detail::is_disjoint_adjacent_union(s)) {
      report.violations.push_back(
          {si, 0.0, "split is not a disjoint adjacent union of the interval"});
      continue;
    }
    CircleMap m1 = flow_map(flow, s.first);
    CircleMap m2 = flow_map(flow, s.second);
    CircleMap m = flow_map(flow, s.whole);
    for (int g = 0; g < grid_points; ++g) {
      double x = static_cast<double>(g) / grid_points;
      double lo = evaluate(m2, evaluate(m1, x, Side::left), Side::left);
      double ml = evaluate(m, x, Side::left);
      double mr = evaluate(m, x, Side::right);
      double hi = evaluate(m2, evaluate(m1, x, Side::right), Side::right);
      ++report.checks;
      if (lo > ml + kMapTol) {
        report.violations.push_back({si, x, "lower composition exceeds phi-"});
      }
      if (ml > mr) {
        report.violations.push_back({si, x, "phi- exceeds phi+"});
      }
      if (mr > hi + kMapTol) {
        report.violations.push_back({si, x, "phi+ exceeds upper composition"});
      }
    }
  }
  return report;
}

// A cadlag sampled trajectory: the value stored at an event time is the
// post-event value, and the path is constant between samples.  Positions are
// the unwrapped degree-1 lift; reduce mod 1 only for display.
struct FlowPath {
  double start_time = 0.0;
  double start_x = 0.0;
  std::vector<double> times;
  std::vector<double> values;

  // Value at time t under the cadlag convention.
  double at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return values.front();
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
  }
};

// The trajectory t -> phi_(s,t](x) for t in [s, window end].
inline FlowPath extract_path(const DiscreteFlow& flow, double s, double x,
                             Side side) {
  if (s < flow.window_lo() || s > flow.window_hi()) {
    throw std::invalid_argument("start time outside flow window");
  }
  FlowPath path;
  path.start_time = s;
  path.start_x = x;
  path.times.push_back(s);
  path.values.push_back(x);
  double pos = x;
  for (const FlowEvent& e : flow.events()) {
    if (e.time <= s) continue;
    pos = evaluate(e.map, pos, side);
    path.times.push_back(e.time);
    path.values.push_back(pos);
  }
  return path;
}

// Extends extract_path backwards: for t < s the value is the inverse
// composition (phi^{-1})_(t,s](x), so the path covers the whole window.
inline FlowPath extract_bidirectional_path(const DiscreteFlow& flow, double s,
                                           double x, Side side) {
  FlowPath forward = extract_path(flow, s, x, side);
  FlowPath path;
  path.start_time = s;
  path.start_x = x;

  std::vector<double> back_times, back_values;
  double pos = x;
  const auto& events = flow.events();
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    if (it->time > s) continue;
    // Value at the event time itself excludes the event.
    back_times.push_back(it->time);
    back_values.push_back(pos);
    pos = evaluate(invert(it->map), pos, side);
  }
  if (back_times.empty() || back_times.back() != flow.window_lo()) {
    back_times.push_back(flow.window_lo());
    back_values.push_back(pos);
  }

  for (std::size_t i = back_times.size(); i-- > 0;) {
    if (back_times[i] == s) continue;  // forward part supplies (s, x)
    path.times.push_back(back_times[i]);
    path.values.push_back(back_values[i]);
  }
  path.times.insert(path.times.end(), forward.times.begin(),
                    forward.times.end());
  path.values.insert(path.values.end(), forward.values.begin(),
                     forward.values.end());
  return path;
}

namespace detail {

// Distinct event times of both flows inside (lo, hi), plus midpoints of the
// gaps and near-boundary points.  Taking interval endpoints from this set
// realizes every distinct interval map of the two discrete flows.
inline std::vector<double> metric_time_grid(const DiscreteFlow& a,
                                            const DiscreteFlow& b, double lo,
                                            double hi, int grid) {
  std::vector<double> ts;
  for (const auto& e : a.events()) {
    if (e.time > lo && e.time < hi) ts.push_back(e.time);
  }
  for (const auto& e : b.events()) {
    if (e.time > lo && e.time < hi) ts.push_back(e.time);
  }
  for (int i = 0; i < grid; ++i) {
    ts.push_back(lo + (hi - lo) * (i + 0.5) / grid);
  }
  ts.push_back(lo + (hi - lo) * 1e-9);
  ts.push_back(hi - (hi - lo) * 1e-9);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  std::vector<double> out;
  out.reserve(2 * ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out.push_back(ts[i]);
    if (i + 1 < ts.size()) out.push_back(0.5 * (ts[i] + ts[i + 1]));
  }
  return out;
}

}  // namespace detail

// sup over (s, t] with s < t drawn from the metric grid of
// d_map(Phi^A_(s,t], Phi^B_(s,t]).  Because the grid contains all event
// times and all gap midpoints, the supremum is exact for discrete flows;
// for coarser grids it is a lower bound converging from below.
inline double flow_distance_c(const DiscreteFlow& a, const DiscreteFlow& b,
                              int n, int grid = 16) {
  Interval span = Interval::open_closed(-n, n);
  if (!a.covers(span) || !b.covers(span)) {
    throw std::invalid_argument("flow windows must cover (-n, n)");
  }
  std::vector<double> ts = detail::metric_time_grid(a, b, -n, n, grid);
  double best = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CircleMap ma = CircleMap::identity();
    CircleMap mb = CircleMap::identity();
    std::size_t ea = 0, eb = 0;
    // Advance event cursors past s once.
    while (ea < a.events().size() && a.events()[ea].time <= ts[i]) ++ea;
    while (eb < b.events().size() && b.events()[eb].time <= ts[i]) ++eb;
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      while (ea < a.events().size() && a.events()[ea].time <= ts[j]) {
        ma = compose(a.events()[ea].map, ma);
        ++ea;
      }
      while (eb < b.events().size() && b.events()[eb].time <= ts[j]) {
        mb = compose(b.events()[eb].map, mb);
        ++eb;
      }
      best = std::max(best, d_map(ma, mb));
    }
  }
  return best;
}

// Upper bound for the cadlag-flow distance with the time change fixed to the
// identity.  For discrete flows the inner supremum over intervals is attained
// on a closed interval whose endpoints are event times (any larger interval
// holds the same events but a smaller cutoff weight), so scanning all event
// runs of the merged event set evaluates it exactly.
inline double flow_distance_d_upper(const DiscreteFlow& a,
                                    const DiscreteFlow& b, int n) {
  Interval span = Interval::closed(-n - 1.0, n + 1.0);
  if (!a.covers(span) || !b.covers(span)) {
    throw std::invalid_argument("flow windows must cover [-n-1, n+1]");
  }
  std::vector<double> ts;
  for (const auto& e : a.events()) {
    if (std::max(e.time, -e.time) < n + 1.0) ts.push_back(e.time);
  }
  for (const auto& e : b.events()) {
    if (std::max(e.time, -e.time) < n + 1.0) ts.push_back(e.time);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  double best = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CircleMap ma = CircleMap::identity();
    CircleMap mb = CircleMap::identity();
    std::size_t ea = 0, eb = 0;
    while (ea < a.events().size() && a.events()[ea].time < ts[i]) ++ea;
    while (eb < b.events().size() && b.events()[eb].time < ts[i]) ++eb;
    for (std::size_t j = i; j < ts.size(); ++j) {
      while (ea < a.events().size() && a.events()[ea].time <= ts[j]) {
        ma = compose(a.events()[ea].map, ma);
        ++ea;
      }
      while (eb < b.events().size() && b.events()[eb].time <= ts[j]) {
        mb = compose(b.events()[eb].map, mb);
        ++eb;
      }
      double r = std::max(ts[j], -ts[i]);
      double weight = std::clamp(n + 1.0 - r, 0.0, 1.0);
      if (weight > 0.0) best = std::max(best, weight * d_map(ma, mb));
    }
  }
  return best;
}

}  // namespace coalflow

#endif  // COALFLOW_DISCRETE_FLOW_HPP

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

#include <catch2/catch_amalgamated.hpp>

#include "coalflow/circle_map.hpp"
#include "coalflow/io.hpp"
#include "support/random_maps.hpp"

using namespace coalflow;
using Catch::Approx;

namespace {

// Independent oracle for the left-continuous inverse: the sup definition
// evaluated on a fine grid.
double grid_inverse_left(const CircleMap& m, double y, int n = 10000) {
  double best = -2.0;
  for (int i = -n; i <= 2 * n; ++i) {
    double x = static_cast<double>(i) / n;
    if (evaluate(m, x, Side::right) < y) best = std::max(best, x);
  }
  return best;
}

// Grid oracle for the rotated-coordinate transform: finds the x bracketing
// a given t by bisection on the strictly increasing map x -> (x + f(x))/2.
double chi_oracle(const CircleMap& m, double t) {
  double lo = t - 2.0, hi = t + 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double g_lo = 0.5 * (mid + evaluate(m, mid, Side::left));
    double g_hi = 0.5 * (mid + evaluate(m, mid, Side::right));
    if (g_hi < t) {
      lo = mid;
    } else if (g_lo > t) {
      hi = mid;
    } else {
      return t - mid;  // bracketing inequality holds at mid
    }
  }
  return t - 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("evaluate on identity and translations") {
  CircleMap id = CircleMap::identity();
  CHECK(evaluate(id, 0.3, Side::right) == 0.3);
  CHECK(evaluate(id, 0.3, Side::left) == 0.3);

  CircleMap shift = CircleMap::shift(0.25);
  CHECK(evaluate(shift, 0.9, Side::right) == Approx(1.15).margin(1e-15));
  CHECK(evaluate(shift, -1.1, Side::left) == Approx(-0.85).margin(1e-15));
}

TEST_CASE("evaluate at a jump reads the stored one-sided values") {
  CircleMap m(std::vector<Breakpoint>{{0.0, 0.0, 0.0}, {0.5, 0.5, 0.7}});
  CHECK(evaluate(m, 0.5, Side::left) == 0.5);
  CHECK(evaluate(m, 0.5, Side::right) == 0.7);
  // Grid-limit oracle: approach from both sides.
  CHECK(evaluate(m, 0.5 - 1e-9, Side::right) == Approx(0.5).margin(1e-8));
  CHECK(evaluate(m, 0.5 + 1e-9, Side::right) == Approx(0.7).margin(1e-8));
}

TEST_CASE("degree-1 wrap is exact on dyadic inputs") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    CircleMap m = testing::random_map(rng);
    for (int i = 0; i < 20; ++i) {
      double x = static_cast<int>(rng.uniform01() * 4096) / 4096.0;
      for (Side s : {Side::left, Side::right}) {
        CHECK(evaluate(m, x + 1.0, s) - evaluate(m, x, s) == 1.0);
        CHECK(evaluate(m, x - 2.0, s) - evaluate(m, x, s) == -2.0);
      }
    }
  }
}

TEST_CASE("evaluate is monotone in x") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    CircleMap m = testing::random_map(rng);
    for (int i = 0; i < 25; ++i) {
      double x1 = rng.uniform(-1.0, 2.0);
      double x2 = x1 + rng.uniform01();
      CHECK(evaluate(m, x1, Side::left) <= evaluate(m, x2, Side::left));
      CHECK(evaluate(m, x1, Side::right) <= evaluate(m, x2, Side::right));
    }
  }
}

TEST_CASE("invert matches the sup-definition grid oracle") {
  // Flat on (0.2, 0.4) at value 0.3 inverts to a jump at 0.3.
  CircleMap m(std::vector<Breakpoint>{
      {0.0, 0.0, 0.0}, {0.2, 0.3, 0.3}, {0.4, 0.3, 0.3}});
  CircleMap inv = invert(m);
  bool found = false;
  for (const Breakpoint& b : inv.breakpoints()) {
    if (b.x == 0.3) {
      found = true;
      CHECK(b.y_minus == Approx(0.2));
      CHECK(b.y_plus == Approx(0.4));
    }
  }
  CHECK(found);

  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    CircleMap f = testing::random_map(rng);
    CircleMap g = invert(f);
    for (int i = 0; i < 8; ++i) {
      double y = rng.uniform(0.0, 1.0);
      CHECK(evaluate(g, y, Side::left) ==
            Approx(grid_inverse_left(f, y)).margin(2e-4));
    }
  }
}

TEST_CASE("inversion is an exact involution") {
  CHECK(invert(CircleMap::identity()) == CircleMap::identity());
  CHECK(invert(CircleMap::shift(0.25)) == CircleMap::shift(-0.25));

  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    CircleMap m = testing::random_map(rng);
    CHECK(invert(invert(m)) == m);
  }
}

TEST_CASE("inverse swaps jumps and flats") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    CircleMap m = testing::random_map(rng);
    int jumps = 0, inv_flat_corners = 0;
    for (const Breakpoint& b : m.breakpoints()) {
      if (b.y_plus > b.y_minus) ++jumps;
    }
    CircleMap g = invert(m);
    // Each jump of m produces a flat segment of g and vice versa.
    const auto& gb = g.breakpoints();
    for (std::size_t i = 0; i < gb.size(); ++i) {
      double y_next = (i + 1 < gb.size()) ? gb[i + 1].y_minus
                                          : gb.front().y_minus + 1.0;
      if (y_next == gb[i].y_plus) ++inv_flat_corners;
    }
    CHECK(inv_flat_corners >= jumps);
  }
}

TEST_CASE("compose basics") {
  Rng rng(3);
  CircleMap id = CircleMap::identity();
  for (int trial = 0; trial < 25; ++trial) {
    CircleMap m = testing::random_map(rng);
    CHECK(compose(id, m) == m);
    CHECK(compose(m, id) == m);
  }
  CHECK(compose(CircleMap::shift(0.2), CircleMap::shift(0.3)) ==
        CircleMap::shift(0.5));
}

TEST_CASE("composition agrees with nested evaluation") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    CircleMap f = testing::random_map(rng, /*allow_jumps=*/false,
                                      /*allow_flats=*/false);
    CircleMap g = testing::random_map(rng, /*allow_jumps=*/false,
                                      /*allow_flats=*/false);
    CircleMap gf = compose(g, f);
    for (int i = 0; i < 34; ++i) {
      double x = rng.uniform(-1.0, 2.0);
      double nested = evaluate(g, evaluate(f, x, Side::right), Side::right);
      CHECK(evaluate(gf, x, Side::right) == Approx(nested).margin(1e-12));
    }
  }
}

TEST_CASE("flat landing on a jump is ambiguous") {
  // Inner map has a flat at value 0.5; outer map jumps at 0.5.
  CircleMap inner(std::vector<Breakpoint>{
      {0.0, 0.0, 0.0}, {0.4, 0.5, 0.5}, {0.6, 0.5, 0.5}});
  CircleMap outer(std::vector<Breakpoint>{{0.0, 0.0, 0.0}, {0.5, 0.5, 0.6}});
  CHECK_THROWS_AS(compose(outer, inner), AmbiguousComposition);
  // Moving the jump elsewhere makes the composition fine.
  CircleMap outer_ok(std::vector<Breakpoint>{{0.0, 0.0, 0.0}, {0.8, 0.8, 0.9}});
  CHECK_NOTHROW(compose(outer_ok, inner));
}

TEST_CASE("chi transform of simple maps") {
  ChiFunction chi_id = chi_transform(CircleMap::identity());
  for (double t : {0.0, 0.1, 0.77}) {
    CHECK(chi_id(t) == Approx(0.0).margin(1e-15));
  }
  ChiFunction chi_shift = chi_transform(CircleMap::shift(0.5));
  for (double t : {0.0, 0.3, 0.9}) {
    CHECK(chi_shift(t) == Approx(0.25).margin(1e-15));
  }
}

TEST_CASE("chi transform matches the bracketing-inequality oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    CircleMap m = testing::random_map(rng);
    ChiFunction chi = chi_transform(m);
    for (int i = 0; i < 12; ++i) {
      double t = rng.uniform01();
      CHECK(chi(t) == Approx(chi_oracle(m, t)).margin(1e-9));
    }
  }
}

TEST_CASE("chi is 1-Lipschitz and periodic") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    CircleMap m = testing::random_map(rng);
    ChiFunction chi = chi_transform(m);
    CHECK(chi.max_abs_slope() <= 1.0 + 1e-12);
    double t = rng.uniform01();
    CHECK(chi(t + 1.0) == Approx(chi(t)).margin(1e-12));
  }
}

TEST_CASE("chi of the inverse is the negation") {
  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    CircleMap m = testing::random_map(rng);
    ChiFunction c = chi_transform(m);
    ChiFunction ci = chi_transform(invert(m));
    for (int i = 0; i < 10; ++i) {
      double t = rng.uniform01();
      CHECK(ci(t) == Approx(-c(t)).margin(1e-12));
    }
  }
}

TEST_CASE("d_map basic values") {
  Rng rng(41);
  CircleMap id = CircleMap::identity();
  for (int trial = 0; trial < 20; ++trial) {
    CircleMap m = testing::random_map(rng);
    CHECK(d_map(m, m) == 0.0);
  }
  CHECK(d_map(id, CircleMap::shift(0.5)) == Approx(0.25));
  // Symmetry and triangle inequality on random triples.
  for (int trial = 0; trial < 50; ++trial) {
    CircleMap a = testing::random_map(rng);
    CircleMap b = testing::random_map(rng);
    CircleMap c = testing::random_map(rng);
    double ab = d_map(a, b), ba = d_map(b, a);
    CHECK(ab == ba);
    CHECK(d_map(a, c) <= ab + d_map(b, c) + 1e-12);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("inversion is a d_map isometry") {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    CircleMap a = testing::random_map(rng);
    CircleMap b = testing::random_map(rng);
    CHECK(d_map(invert(a), invert(b)) == Approx(d_map(a, b)).margin(1e-12));
  }
}

TEST_CASE("json round trip") {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    CircleMap m = testing::random_map(rng);
    CircleMap back = map_from_json(map_to_json(m));
    CHECK(back == m);
  }
}

TEST_CASE("constructor rejects invalid data") {
  CHECK_THROWS_AS(CircleMap(std::vector<Breakpoint>{{0.0, 0.5, 0.2}}),
                  std::invalid_argument);  // downward jump
  CHECK_THROWS_AS(
      CircleMap(std::vector<Breakpoint>{{0.0, 0.0, 0.0}, {0.5, -0.5, -0.5}}),
      std::invalid_argument);  // decreasing segment
}

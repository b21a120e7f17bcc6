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

#ifndef COALFLOW_TESTS_RANDOM_MAPS_HPP
#define COALFLOW_TESTS_RANDOM_MAPS_HPP

#include <vector>

#include "coalflow/circle_map.hpp"
#include "coalflow/rng.hpp"

namespace coalflow::testing {

// Random valid maps on a dyadic grid (positions and values are multiples of
// 2^-16), so breakpoint data is exactly representable and algebraic
// identities can be asserted without tolerance.
inline CircleMap random_map(Rng& rng, bool allow_jumps = true,
                            bool allow_flats = true) {
  constexpr double kGrid = 1.0 / 65536.0;
  int n = 2 + static_cast<int>(rng.uniform01() * 5);
  // Distinct dyadic positions.
  std::vector<int> ticks;
  while (static_cast<int>(ticks.size()) < n) {
    int t = static_cast<int>(rng.uniform01() * 65536);
    bool dup = false;
    for (int u : ticks) {
      if (std::abs(u - t) < 64) dup = true;
    }
    if (!dup) ticks.push_back(t);
  }
  std::sort(ticks.begin(), ticks.end());

  // Monotone values: distribute a total rise of 1 across jumps and segments.
  std::vector<Breakpoint> bps;
  int total_units = 65536;
  int used = 0;
  std::vector<int> rises(2 * n, 0);  // alternate jump, segment
  for (int i = 0; i < 2 * n; ++i) {
    bool is_jump = (i % 2 == 0);
    if (is_jump && !allow_jumps) continue;
    if (!is_jump && rng.uniform01() < 0.25 && allow_flats) continue;  // flat
    rises[i] = 1 + static_cast<int>(rng.uniform01() * 200);
    used += rises[i];
  }
  // Scale roughly into the budget, keeping at least the flats at zero.
  double scale = used > 0 ? static_cast<double>(total_units) / used : 0.0;
  int acc = 0;
  for (int i = 0; i < 2 * n; ++i) {
    rises[i] = static_cast<int>(rises[i] * scale);
    acc += rises[i];
  }
  rises[2 * n - 1] += total_units - acc;  // land exactly on +1 per period
  if (rises[2 * n - 1] < 0) {
    // Push the remainder into the first positive entry instead.
    for (int i = 0; i < 2 * n; ++i) {
      if (rises[i] + rises[2 * n - 1] >= 0 && rises[i] > 0 && i != 2 * n - 1) {
        rises[i] += rises[2 * n - 1];
        rises[2 * n - 1] = 0;
        break;
      }
    }
  }

  int y_units = static_cast<int>(rng.uniform01() * 2000) - 1000;
  for (int i = 0; i < n; ++i) {
    double x = ticks[i] * kGrid;
    double y_minus = y_units * kGrid;
    y_units += rises[2 * i];
    double y_plus = y_units * kGrid;
    bps.push_back({x, y_minus, y_plus});
    y_units += rises[2 * i + 1];
  }
  return CircleMap(std::move(bps));
}

}  // namespace coalflow::testing

#endif  // COALFLOW_TESTS_RANDOM_MAPS_HPP

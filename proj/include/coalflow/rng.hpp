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

#ifndef COALFLOW_RNG_HPP
#define COALFLOW_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace coalflow {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// One master seed fans out into independent substreams keyed by (tag, index),
// so parallel workers never touch shared generator state and reductions are
// reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  std::uint64_t s = seed ^ (0x632be59bd9b4e019ull * (tag + 1));
  s ^= 0xd1342543de82ef95ull * (index + 1);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// Stream tags used across the library.
enum : std::uint64_t {
  kStreamClock = 0x11,
  kStreamTheta = 0x12,
  kStreamSdeNoise = 0x21,
  kStreamMoments = 0x31,
  kStreamEulerRef = 0x41,
};

// Deterministic generator: mt19937_64 is fully specified by the standard, and
// all distributions below are hand-rolled so results do not depend on the
// stdlib implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; one value cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform01();  // (0,1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Exponential with the given mean.
  double exponential(double mean) {
    return -mean * std::log1p(-uniform01());
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace coalflow

#endif  // COALFLOW_RNG_HPP

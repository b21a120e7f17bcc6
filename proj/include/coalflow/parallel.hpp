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

#ifndef COALFLOW_PARALLEL_HPP
#define COALFLOW_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace coalflow {

// Deterministic fan-out: [0, n) is split into fixed contiguous chunks, each
// chunk fills its own slot, and the caller reduces the slots in index order.
// The result is therefore independent of thread scheduling.
//
// fn(first, last, slot) processes items [first, last) into slot.
template <class Slot, class Fn>
std::vector<Slot> parallel_chunks(std::size_t n, int jobs, Fn fn) {
  if (jobs < 1) jobs = 1;
  std::size_t n_chunks = static_cast<std::size_t>(jobs) * 4;
  if (n_chunks > n) n_chunks = n > 0 ? n : 1;
  std::vector<Slot> slots(n_chunks);
  if (n == 0) return slots;

  std::size_t per = (n + n_chunks - 1) / n_chunks;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      std::size_t first = c * per;
      std::size_t last = std::min(n, first + per);
      if (first >= last) continue;
      fn(first, last, slots[c]);
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (int i = 0; i < jobs; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return slots;
}

inline int default_jobs() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace coalflow

#endif  // COALFLOW_PARALLEL_HPP

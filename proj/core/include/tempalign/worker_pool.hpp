// Copyright 2026 The tempalign Authors.
//
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tempalign {

// Fixed-size group of workers for data-parallel sharding. Each call splits
// [0, n) into contiguous shards, one per worker, and blocks until all finish.
// Shard boundaries depend only on n and the worker count; callers that need
// worker-count-invariant output must merge shard results in shard order.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers = 1)
      : workers_(std::max<std::size_t>(1, workers)) {}

  std::size_t size() const { return workers_; }

  // fn(begin, end, shard_index)
  void for_each_shard(
      std::size_t n,
      const std::function<void(std::size_t, std::size_t, std::size_t)>& fn)
      const {
    if (n == 0) return;
    const std::size_t shards = std::min(workers_, n);
    if (shards == 1) {
      fn(0, n, 0);
      return;
    }
    std::vector<std::exception_ptr> errors(shards);
    {
      std::vector<std::jthread> threads;
      threads.reserve(shards);
      for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t begin = n * s / shards;
        const std::size_t end = n * (s + 1) / shards;
        threads.emplace_back([&, begin, end, s] {
          try {
            fn(begin, end, s);
          } catch (...) {
            errors[s] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Per-item convenience wrapper.
  void for_each(std::size_t n,
                const std::function<void(std::size_t)>& fn) const {
    for_each_shard(n, [&](std::size_t b, std::size_t e, std::size_t) {
      for (std::size_t i = b; i < e; ++i) fn(i);
    });
  }

 private:
  std::size_t workers_;
};

}  // namespace tempalign

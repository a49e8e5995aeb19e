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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tempalign/eval.hpp"
#include "tempalign/ingest.hpp"
#include "tempalign/worker_pool.hpp"

namespace tempalign {

struct GeneratorConfig {
  std::size_t n_shared = 100;
  std::size_t n_exclusive_per_channel = 0;
  Timestamp duration = 30 * 86400;
  double rate_min = 10.0;  // events per entity per day
  double rate_max = 10.0;
  double dropout = 0.0;
  double jitter_sigma = 0.0;  // seconds
  ChannelCatalog channels{std::vector<std::string>{"a", "b"}};
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedData {
  std::vector<std::vector<Event>> events;  // per catalog channel, by time
  GroundTruth truth;
};

// Latent entities are shared (present in both channels) or exclusive to one.
// Each emits a homogeneous Poisson process; shared events project into both
// channels with independent dropout and timestamp jitter. Deterministic in
// the seed regardless of the worker count.
GeneratedData generate(const GeneratorConfig& config,
                       const WorkerPool* pool = nullptr);

}  // namespace tempalign

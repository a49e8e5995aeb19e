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
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tempalign/features.hpp"
#include "tempalign/superpoint.hpp"
#include "tempalign/worker_pool.hpp"

namespace tempalign {

using PairKey = std::pair<std::string, std::string>;

struct Match {
  std::string a;  // entity in channel_a
  std::string b;  // entity in channel_b
  double value = 0.0;

  bool operator==(const Match&) const = default;
};

// Cross-channel pairs sorted by (a, b), no duplicates. `value` is a cosine
// similarity unless the set came out of likelihood-score thresholding.
struct MatchSet {
  enum class ValueKind { kSimilarity, kScore };

  std::string channel_a;
  std::string channel_b;
  ValueKind kind = ValueKind::kSimilarity;
  std::vector<Match> matches;

  std::size_t size() const { return matches.size(); }
  bool empty() const { return matches.empty(); }
  bool contains(const std::string& a, const std::string& b) const;

  // Sorts by (a, b); throws ContractError on duplicates.
  void normalize();

  bool operator==(const MatchSet&) const = default;
};

struct AlignConfig {
  double threshold = 0.5;
  std::size_t top_n = 1;
  std::size_t sub_tasks = 22;

  void validate() const;
};

// Cosine similarity of two sparse count vectors; 0 when either is zero.
double cosine_sim(const BinnedTimeSeries& u, const BinnedTimeSeries& v);

struct DirectionalResult {
  MatchSet matches;
  std::uint64_t comparisons = 0;  // pairwise similarity evaluations
  std::vector<std::string> zero_sources;  // excluded all-zero source entities
};

// For every non-zero source entity keep the top_n destination entities by
// similarity (ties -> smaller destination id) whose similarity is at least
// the threshold. With an assignment, only destinations sharing the source's
// cluster id are compared.
DirectionalResult align_directional(const ChannelFeatures& src,
                                    const ChannelFeatures& dst,
                                    const ClusterAssignment* assignment,
                                    const AlignConfig& config,
                                    const WorkerPool* pool = nullptr);

// Pairs present in `forward` (A->B) whose reverse is in `backward` (B->A).
MatchSet reconcile(const MatchSet& forward, const MatchSet& backward);

// Match file: CSV `entity_a,entity_b,channel_a,channel_b,similarity` (last
// column is `score` for score-thresholded sets).
void write_matches(std::ostream& out, const MatchSet& matches);
MatchSet read_matches(std::istream& in);

}  // namespace tempalign

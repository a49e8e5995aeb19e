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
#include <set>
#include <string>

#include "tempalign/align.hpp"

namespace tempalign {

// Known cross-channel identities; may be one-to-many either way.
struct GroundTruth {
  std::set<PairKey> pairs;

  std::size_t size() const { return pairs.size(); }
  bool contains(const std::string& a, const std::string& b) const {
    return pairs.count({a, b}) != 0;
  }
};

// Truth file: CSV `entity_a,entity_b`.
void write_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_truth(std::istream& in);

// Fraction of predicted pairs absent from the truth; 0 for an empty
// prediction.
double incorrectly_matched(const MatchSet& predicted, const GroundTruth& truth);

enum class Direction { kForward, kBackward };
enum class MissCounting { kEntity, kPair };

// kEntity: fraction of truth entities on one side that appear in no predicted
// pair. kPair: fraction of truth pairs absent from the prediction.
double incorrectly_not_matched(const MatchSet& predicted,
                               const GroundTruth& truth, Direction direction,
                               MissCounting counting = MissCounting::kEntity);

struct MetricsReport {
  double i_m = 0.0;
  double i_nm_forward = 0.0;
  double i_nm_backward = 0.0;
  double ma = 1.0;
  double fnma = 1.0;
  double bnma = 1.0;
  std::size_t matched_count = 0;
  std::size_t truth_count = 0;
  bool empty_prediction = false;
  std::uint64_t comparisons_performed = 0;
  double runtime_seconds = 0.0;
};

MetricsReport build_report(const MatchSet& predicted, const GroundTruth& truth,
                           MissCounting counting = MissCounting::kEntity);

// `key=value` lines.
void write_report(std::ostream& out, const MetricsReport& report);

}  // namespace tempalign

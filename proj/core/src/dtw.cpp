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

#include "tempalign/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tempalign/error.hpp"

namespace tempalign {

double dtw(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractError("dtw of an empty series");
  if (b.size() > a.size()) std::swap(a, b);
  // Rolling rows over the shorter series.
  const std::size_t m = b.size();
  std::vector<double> prev(m), cur(m);
  prev[0] = std::fabs(a[0] - b[0]);
  for (std::size_t j = 1; j < m; ++j)
    prev[j] = prev[j - 1] + std::fabs(a[0] - b[j]);
  for (std::size_t i = 1; i < a.size(); ++i) {
    cur[0] = prev[0] + std::fabs(a[i] - b[0]);
    for (std::size_t j = 1; j < m; ++j) {
      const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = best + std::fabs(a[i] - b[j]);
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

}  // namespace tempalign

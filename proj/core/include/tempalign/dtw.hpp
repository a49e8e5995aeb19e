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

#include <span>

namespace tempalign {

// Unconstrained dynamic time warping with local cost |a_i - b_j| and steps
// (1,0), (0,1), (1,1). O(|a|*|b|) time, O(min(|a|,|b|)) memory.
// Throws ContractError if either series is empty.
double dtw(std::span<const double> a, std::span<const double> b);

}  // namespace tempalign

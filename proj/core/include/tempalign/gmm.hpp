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
#include <optional>
#include <span>
#include <vector>

#include "tempalign/kmeans.hpp"

namespace tempalign {

struct GmmOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-4;  // change in mean per-point log-likelihood
  double covariance_floor = 1e-6;
  // Consecutive iterations with a floored variance or an empty component
  // before the fit is declared degenerate.
  std::size_t max_collapse_iterations = 3;
};

// Gaussian mixture with per-component diagonal covariance.
struct DiagonalGmm {
  std::vector<double> mixing;  // sums to 1
  PointMatrix means;
  PointMatrix variances;
  double mean_log_likelihood = 0.0;
  std::size_t iterations = 0;

  std::size_t components() const { return mixing.size(); }
  double log_density(std::span<const double> x) const;
};

// EM initialised from K-Means. Returns nullopt when the fit degenerates.
std::optional<DiagonalGmm> fit_diagonal_gmm(const PointMatrix& points,
                                            std::size_t k, std::uint64_t seed,
                                            const GmmOptions& options = {});

// Draws `per_component` points from every component; rows are grouped by
// component in component order.
PointMatrix sample_components(const DiagonalGmm& gmm, std::size_t per_component,
                              std::uint64_t seed);

}  // namespace tempalign

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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tempalign/worker_pool.hpp"

namespace tempalign {

// W[i][j] = exp(-dtw(x_i, x_j) / tau) off the diagonal, 0 on it.
struct SimilarityMatrix {
  Eigen::MatrixXd w;
  double tau = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(w.rows()); }
};

// When `tau` is empty it defaults to the mean off-diagonal DTW distance
// (falling back to 1 when every distance is zero).
SimilarityMatrix build_similarity(std::span<const std::vector<double>> series,
                                  std::optional<double> tau = {},
                                  const WorkerPool* pool = nullptr);

// Builds W from a precomputed symmetric distance matrix.
SimilarityMatrix similarity_from_distances(const Eigen::MatrixXd& distances,
                                           double tau);

Eigen::MatrixXd graph_laplacian(const SimilarityMatrix& w);

struct EmbeddedFeature {
  Eigen::MatrixXd coordinates;      // n x p, one row per entity
  std::vector<double> eigenvalues;  // ascending, all > 0
};

// Laplacian eigenmap: eigenvectors of L = D - W for the p smallest
// eigenvalues above 1e-8 * lambda_max. Each eigenvector's sign is fixed so its
// largest-magnitude entry is positive.
EmbeddedFeature laplacian_embed(const SimilarityMatrix& w, std::size_t p);

}  // namespace tempalign

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
#include <span>
#include <vector>

namespace tempalign {

// Dense row-major point storage.
class PointMatrix {
 public:
  PointMatrix() = default;
  PointMatrix(std::size_t rows, std::size_t dim)
      : dim_(dim), data_(rows * dim, 0.0) {}

  std::size_t rows() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  // The first push on an empty matrix fixes the dimension.
  void push_back(std::span<const double> point);

  const std::vector<double>& data() const { return data_; }

  bool operator==(const PointMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

// Index of the nearest centroid; ties go to the lowest index.
std::uint32_t nearest_centroid(std::span<const double> point,
                               const PointMatrix& centroids);

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-4;  // relative inertia improvement
};

struct KMeansResult {
  PointMatrix centroids;
  std::vector<std::uint32_t> labels;  // nearest-centroid labels
  std::vector<double> cluster_weight;  // total weight per label
  double inertia = 0.0;                // weighted sum of squared distances
  std::size_t iterations = 0;
};

// Weighted Lloyd's K-Means with k-means++ seeding. `weights` may be empty
// (unit weights). Labels always equal the nearest-centroid assignment against
// the returned centroids. An emptied cluster is reseeded at the point farthest
// from its previous centroid.
KMeansResult kmeans(const PointMatrix& points, std::span<const double> weights,
                    std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

// Sum of squared distances of each point to the mean of its label group.
double within_cluster_ss(const PointMatrix& points,
                         std::span<const std::uint32_t> labels, std::size_t k);

}  // namespace tempalign

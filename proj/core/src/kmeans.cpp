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

#include "tempalign/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "tempalign/error.hpp"
#include "tempalign/random.hpp"

namespace tempalign {

void PointMatrix::push_back(std::span<const double> point) {
  if (dim_ == 0 && data_.empty()) dim_ = point.size();
  if (point.size() != dim_)
    throw ContractError("point dimension " + std::to_string(point.size()) +
                        " does not match " + std::to_string(dim_));
  data_.insert(data_.end(), point.begin(), point.end());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::uint32_t nearest_centroid(std::span<const double> point,
                               const PointMatrix& centroids) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

namespace {

// Picks i with probability mass[i] / sum(mass).
std::size_t pick_weighted(std::span<const double> mass, double total,
                          std::mt19937_64& rng) {
  const double r = unit_double(rng) * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    cum += mass[i];
    last_positive = i;
    if (r < cum) return i;
  }
  return last_positive;
}

PointMatrix seed_plus_plus(const PointMatrix& points,
                           std::span<const double> w, std::size_t k,
                           std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  PointMatrix centroids;
  double wsum = 0.0;
  for (double x : w) wsum += x;
  std::size_t first = pick_weighted(w, wsum, rng);
  centroids.push_back(points.row(first));

  std::vector<double> d2(n), mass(n);
  for (std::size_t i = 0; i < n; ++i)
    d2[i] = squared_distance(points.row(i), points.row(first));
  while (centroids.rows() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass[i] = w[i] * d2[i];
      total += mass[i];
    }
    const std::size_t next = total > 0.0 ? pick_weighted(mass, total, rng)
                                         : pick_weighted(w, wsum, rng);
    centroids.push_back(points.row(next));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points.row(i), points.row(next)));
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const PointMatrix& points, std::span<const double> weights,
                    std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.dim();
  if (k == 0) throw ParameterError("k must be >= 1");
  if (n < k)
    throw ContractError("K-Means needs at least k=" + std::to_string(k) +
                        " points, got " + std::to_string(n));
  std::vector<double> w(weights.begin(), weights.end());
  if (w.empty()) w.assign(n, 1.0);
  if (w.size() != n) throw ContractError("weight count does not match points");
  for (double x : w)
    if (!(x > 0.0)) throw ContractError("K-Means weights must be positive");

  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids = seed_plus_plus(points, w, k, rng);
  auto& centroids = result.centroids;
  auto& labels = result.labels;
  labels.assign(n, std::numeric_limits<std::uint32_t>::max());

  auto assign = [&] {
    std::size_t changes = 0;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t c = nearest_centroid(points.row(i), centroids);
      if (c != labels[i]) ++changes;
      labels[i] = c;
      inertia += w[i] * squared_distance(points.row(i), centroids.row(c));
    }
    result.inertia = inertia;
    return changes;
  };

  bool settled = false;
  double prev = 0.0;
  std::vector<double> sums(k * dim), mass(k);
  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    const std::size_t changes = assign();
    result.iterations = iter;
    if (iter > 1 &&
        (changes == 0 || prev - result.inertia <= options.tolerance * prev)) {
      settled = true;
      break;
    }
    prev = result.inertia;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) sums[labels[i] * dim + d] += w[i] * row[d];
      mass[labels[i]] += w[i];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      auto centroid = centroids.row(c);
      if (mass[c] > 0.0) {
        for (std::size_t d = 0; d < dim; ++d) centroid[d] = sums[c * dim + d] / mass[c];
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double d = squared_distance(points.row(i), centroid);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[far] = true;
      std::copy_n(points.row(far).begin(), dim, centroid.begin());
    }
  }
  if (!settled) assign();

  result.cluster_weight.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) result.cluster_weight[labels[i]] += w[i];
  return result;
}

double within_cluster_ss(const PointMatrix& points,
                         std::span<const std::uint32_t> labels, std::size_t k) {
  const std::size_t dim = points.dim();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) sums[labels[i] * dim + d] += points.row(i)[d];
    count[labels[i]] += 1.0;
  }
  for (std::size_t c = 0; c < k; ++c)
    if (count[c] > 0)
      for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] /= count[c];
  double ss = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    ss += squared_distance(points.row(i),
                           std::span<const double>(sums.data() + labels[i] * dim, dim));
  return ss;
}

}  // namespace tempalign

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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tempalign/kmeans.hpp"
#include "tempalign/worker_pool.hpp"

namespace tempalign {

// Weighted representative of one sub-task cluster.
struct SuperPoint {
  std::vector<double> position;
  double weight = 0.0;
  std::string source_channel;
  std::size_t source_partition = 0;

  bool operator==(const SuperPoint&) const = default;
};

struct ClusterModel {
  PointMatrix centroids;  // sorted lexicographically by coordinates
  std::size_t k() const { return centroids.rows(); }
};

enum class Clusterer { kKMeans, kGmm };

Clusterer parse_clusterer(const std::string& text);
std::string to_string(Clusterer c);

struct SuperPointConfig {
  std::size_t k = 5;
  std::size_t workers = 22;
  std::size_t partition_size = 1000;
  Clusterer clusterer = Clusterer::kKMeans;
  std::size_t gmm_samples_per_component = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

// Points to cluster, tagged with (channel, entity index) of their owner.
struct ClusterInput {
  std::vector<std::string> channels;
  std::vector<std::uint32_t> channel_of;  // per row, index into `channels`
  std::vector<std::uint32_t> entity_of;   // per row, EntityIndex position
  PointMatrix features;

  std::size_t size() const { return features.rows(); }
};

// Cluster id per (channel, entity index).
struct ClusterAssignment {
  static constexpr std::uint32_t kUnlabeled = 0xffffffffu;

  std::size_t k = 0;
  std::map<std::string, std::vector<std::uint32_t>> labels;

  std::uint32_t label(const std::string& channel, std::size_t entity) const;
  std::size_t total() const;
};

// Seed used for the sub-task that clusters `channel` inside `partition`.
std::uint64_t subtask_seed(std::uint64_t seed, std::size_t partition,
                           std::size_t channel);
// Seed used for the global pass.
std::uint64_t global_seed(std::uint64_t seed);

// Uniform random split of [0, n) into ceil(n / partition_size) disjoint
// partitions of partition_size (last may be smaller). Deterministic in seed.
std::vector<std::vector<std::size_t>> partition_uniform(
    std::size_t n, const SuperPointConfig& config);

// One super-point per non-empty K-Means cluster: position is the centroid,
// weight the member count.
std::vector<SuperPoint> cluster_partition_kmeans(
    const PointMatrix& partition, std::size_t k, std::uint64_t seed,
    const std::string& channel = {}, std::size_t partition_ordinal = 0);

// Fits a diagonal GMM and emits `samples_per_component` samples per
// component, weighted by mixture density and normalised to sum to the
// partition size. Falls back to the K-Means variant when EM degenerates.
std::vector<SuperPoint> cluster_partition_gmm(
    const PointMatrix& partition, std::size_t k,
    std::size_t samples_per_component, std::uint64_t seed,
    const std::string& channel = {}, std::size_t partition_ordinal = 0);

// Weighted K-Means over super-point positions.
ClusterModel cluster_global(std::span<const SuperPoint> superpoints,
                            std::size_t k, std::uint64_t seed);

// Nearest-centroid labels for every input row in one pass.
ClusterAssignment label_all(const ClusterInput& input,
                            const ClusterModel& model,
                            const WorkerPool* pool = nullptr);

struct SuperPointResult {
  std::vector<std::vector<std::size_t>> partitions;
  std::vector<SuperPoint> superpoints;  // ordered by partition, then channel
  ClusterModel model;
  ClusterAssignment assignment;
};

// Full split-apply-combine run. When `partitions` is given it is used as-is
// (it must be a disjoint cover of the input rows).
SuperPointResult run_superpoint(
    const ClusterInput& input, const SuperPointConfig& config,
    const WorkerPool& pool,
    std::optional<std::vector<std::vector<std::size_t>>> partitions = {});

// Cluster assignment cache: CSV `channel,entity,cluster`.
void write_assignment(std::ostream& out, const ClusterAssignment& assignment,
                      const std::map<std::string, std::vector<std::string>>&
                          entity_names);

}  // namespace tempalign

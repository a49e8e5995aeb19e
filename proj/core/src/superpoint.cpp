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

#include "tempalign/superpoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <glog/logging.h>

#include "tempalign/error.hpp"
#include "tempalign/gmm.hpp"
#include "tempalign/random.hpp"

namespace tempalign {

Clusterer parse_clusterer(const std::string& text) {
  if (text == "kmeans") return Clusterer::kKMeans;
  if (text == "gmm") return Clusterer::kGmm;
  throw ParameterError("unknown clusterer '" + text + "'");
}

std::string to_string(Clusterer c) {
  return c == Clusterer::kGmm ? "gmm" : "kmeans";
}

void SuperPointConfig::validate() const {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (workers < 1) throw ParameterError("workers must be >= 1");
  if (partition_size < k) throw ParameterError("partition_size must be >= k");
  if (clusterer == Clusterer::kGmm && gmm_samples_per_component < 1)
    throw ParameterError("gmm_samples_per_component must be >= 1");
}

std::uint32_t ClusterAssignment::label(const std::string& channel,
                                       std::size_t entity) const {
  auto it = labels.find(channel);
  if (it == labels.end() || entity >= it->second.size()) return kUnlabeled;
  return it->second[entity];
}

std::size_t ClusterAssignment::total() const {
  std::size_t n = 0;
  for (const auto& [_, v] : labels)
    n += static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [](auto l) { return l != kUnlabeled; }));
  return n;
}

std::uint64_t subtask_seed(std::uint64_t seed, std::size_t partition,
                           std::size_t channel) {
  return derive_seed(seed, 0x7375627461736bULL + partition, channel + 1);
}

std::uint64_t global_seed(std::uint64_t seed) {
  return derive_seed(seed, 0x6c6f62616cULL);
}

std::vector<std::vector<std::size_t>> partition_uniform(
    std::size_t n, const SuperPointConfig& config) {
  if (n == 0) throw ContractError("cannot partition an empty feature set");
  if (config.partition_size == 0) throw ParameterError("partition_size must be > 0");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(derive_seed(config.seed, 0x7061727469ULL));
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[uniform_index(rng, i + 1)]);

  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += config.partition_size) {
    const std::size_t end = std::min(n, start + config.partition_size);
    std::vector<std::size_t> part(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                  perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(part.begin(), part.end());
    out.push_back(std::move(part));
  }
  return out;
}

std::vector<SuperPoint> cluster_partition_kmeans(const PointMatrix& partition,
                                                 std::size_t k,
                                                 std::uint64_t seed,
                                                 const std::string& channel,
                                                 std::size_t partition_ordinal) {
  if (partition.rows() < k)
    throw ContractError("partition of " + std::to_string(partition.rows()) +
                        " points is smaller than k=" + std::to_string(k));
  const KMeansResult r = kmeans(partition, {}, k, seed);
  std::vector<SuperPoint> out;
  for (std::size_t c = 0; c < k; ++c) {
    if (r.cluster_weight[c] <= 0.0) continue;
    const auto pos = r.centroids.row(c);
    out.push_back({std::vector<double>(pos.begin(), pos.end()),
                   r.cluster_weight[c], channel, partition_ordinal});
  }
  return out;
}

std::vector<SuperPoint> cluster_partition_gmm(const PointMatrix& partition,
                                              std::size_t k,
                                              std::size_t samples_per_component,
                                              std::uint64_t seed,
                                              const std::string& channel,
                                              std::size_t partition_ordinal) {
  if (partition.rows() < k)
    throw ContractError("partition of " + std::to_string(partition.rows()) +
                        " points is smaller than k=" + std::to_string(k));
  if (samples_per_component == 0)
    throw ParameterError("samples_per_component must be >= 1");
  const auto gmm = fit_diagonal_gmm(partition, k, seed);
  if (!gmm) {
    LOG(WARNING) << "GMM degenerated on partition " << partition_ordinal
                 << " channel '" << channel << "'; using K-Means super-points";
    return cluster_partition_kmeans(partition, k, seed, channel,
                                    partition_ordinal);
  }
  const PointMatrix samples =
      sample_components(*gmm, samples_per_component, derive_seed(seed, 0x73616dULL));
  std::vector<double> logd(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i)
    logd[i] = gmm->log_density(samples.row(i));
  const double top = *std::max_element(logd.begin(), logd.end());
  double total = 0.0;
  for (double& v : logd) {
    v = std::max(std::exp(v - top), 1e-300);
    total += v;
  }
  const double scale = static_cast<double>(partition.rows()) / total;
  std::vector<SuperPoint> out;
  out.reserve(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto pos = samples.row(i);
    out.push_back({std::vector<double>(pos.begin(), pos.end()), logd[i] * scale,
                   channel, partition_ordinal});
  }
  return out;
}

ClusterModel cluster_global(std::span<const SuperPoint> superpoints,
                            std::size_t k, std::uint64_t seed) {
  if (superpoints.size() < k)
    throw ContractError("global clustering needs at least k=" +
                        std::to_string(k) + " super-points, got " +
                        std::to_string(superpoints.size()));
  PointMatrix positions;
  std::vector<double> weights;
  weights.reserve(superpoints.size());
  for (const auto& sp : superpoints) {
    positions.push_back(sp.position);
    weights.push_back(sp.weight);
  }
  const KMeansResult r = kmeans(positions, weights, k, seed);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = r.centroids.row(a), rb = r.centroids.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  ClusterModel model;
  for (std::size_t c : order) model.centroids.push_back(r.centroids.row(c));
  return model;
}

ClusterAssignment label_all(const ClusterInput& input, const ClusterModel& model,
                            const WorkerPool* pool) {
  if (model.k() == 0) throw ContractError("cluster model has no centroids");
  if (input.size() > 0 && input.features.dim() != model.centroids.dim())
    throw ContractError("feature dimension does not match the cluster model");
  ClusterAssignment out;
  out.k = model.k();
  std::vector<std::size_t> sizes(input.channels.size(), 0);
  for (std::size_t i = 0; i < input.size(); ++i)
    sizes[input.channel_of[i]] =
        std::max<std::size_t>(sizes[input.channel_of[i]], input.entity_of[i] + 1);
  for (std::size_t c = 0; c < input.channels.size(); ++c)
    out.labels[input.channels[c]].assign(sizes[c], ClusterAssignment::kUnlabeled);

  std::vector<std::uint32_t> labels(input.size());
  auto label_row = [&](std::size_t i) {
    labels[i] = nearest_centroid(input.features.row(i), model.centroids);
  };
  if (pool)
    pool->for_each(input.size(), label_row);
  else
    for (std::size_t i = 0; i < input.size(); ++i) label_row(i);

  for (std::size_t i = 0; i < input.size(); ++i)
    out.labels[input.channels[input.channel_of[i]]][input.entity_of[i]] = labels[i];
  return out;
}

SuperPointResult run_superpoint(
    const ClusterInput& input, const SuperPointConfig& config,
    const WorkerPool& pool,
    std::optional<std::vector<std::vector<std::size_t>>> partitions) {
  config.validate();
  SuperPointResult result;
  result.partitions =
      partitions ? std::move(*partitions) : partition_uniform(input.size(), config);

  struct Task {
    std::size_t partition;
    std::size_t channel;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < result.partitions.size(); ++p)
    for (std::size_t c = 0; c < input.channels.size(); ++c) tasks.push_back({p, c});

  std::vector<std::vector<SuperPoint>> produced(tasks.size());
  pool.for_each(tasks.size(), [&](std::size_t t) {
    const auto [p, c] = tasks[t];
    PointMatrix members;
    for (std::size_t row : result.partitions[p])
      if (input.channel_of[row] == c) members.push_back(input.features.row(row));
    if (members.rows() == 0) return;
    const std::size_t k = std::min(config.k, members.rows());
    const std::uint64_t seed = subtask_seed(config.seed, p, c);
    produced[t] = config.clusterer == Clusterer::kGmm
                      ? cluster_partition_gmm(members, k,
                                              config.gmm_samples_per_component,
                                              seed, input.channels[c], p)
                      : cluster_partition_kmeans(members, k, seed,
                                                 input.channels[c], p);
  });
  for (auto& sps : produced)
    for (auto& sp : sps) result.superpoints.push_back(std::move(sp));

  std::size_t k = config.k;
  if (result.superpoints.size() < k) {
    LOG(WARNING) << "only " << result.superpoints.size()
                 << " super-points for k=" << k << "; reducing k";
    k = result.superpoints.size();
  }
  result.model = cluster_global(result.superpoints, k, global_seed(config.seed));
  result.assignment = label_all(input, result.model, &pool);
  return result;
}

void write_assignment(
    std::ostream& out, const ClusterAssignment& assignment,
    const std::map<std::string, std::vector<std::string>>& entity_names) {
  out << "channel,entity,cluster\n";
  for (const auto& [channel, labels] : assignment.labels) {
    const auto& names = entity_names.at(channel);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != ClusterAssignment::kUnlabeled)
        out << channel << ',' << names.at(i) << ',' << labels[i] << '\n';
  }
}

}  // namespace tempalign

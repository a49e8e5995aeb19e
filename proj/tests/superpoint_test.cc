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
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "tempalign/error.hpp"

namespace tempalign {
namespace {

PointMatrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointMatrix m(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (auto& v : m.row(i)) v = u(rng);
  return m;
}

ClusterInput single_channel_input(const PointMatrix& pts) {
  ClusterInput in;
  in.channels = {"a"};
  in.features = pts;
  for (std::uint32_t i = 0; i < pts.rows(); ++i) {
    in.channel_of.push_back(0);
    in.entity_of.push_back(i);
  }
  return in;
}

// True if a and b induce the same partition of indices.
bool same_up_to_permutation(const std::vector<std::uint32_t>& a,
                            const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::uint32_t, std::uint32_t> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it, fresh] = ab.emplace(a[i], b[i]);
    if (!fresh && it->second != b[i]) return false;
    auto [jt, fresh2] = ba.emplace(b[i], a[i]);
    if (!fresh2 && jt->second != a[i]) return false;
  }
  return true;
}

TEST(PartitionUniform, Counting) {
  SuperPointConfig cfg;
  cfg.k = 1;
  cfg.partition_size = 2;
  const auto parts = partition_uniform(6, cfg);
  ASSERT_EQ(parts.size(), 3u);
  std::set<std::size_t> all;
  for (const auto& p : parts) {
    EXPECT_EQ(p.size(), 2u);
    all.insert(p.begin(), p.end());
  }
  EXPECT_EQ(all.size(), 6u);

  cfg.partition_size = 4;
  const auto uneven = partition_uniform(6, cfg);
  ASSERT_EQ(uneven.size(), 2u);
  EXPECT_EQ(uneven[1].size(), 2u);

  cfg.partition_size = 10;
  const auto whole = partition_uniform(6, cfg);
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0], (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_THROW(partition_uniform(0, cfg), ContractError);
}

TEST(PartitionUniform, SeedDeterminism) {
  SuperPointConfig cfg;
  cfg.partition_size = 5;
  cfg.seed = 1;
  const auto a = partition_uniform(50, cfg);
  EXPECT_EQ(a, partition_uniform(50, cfg));
  cfg.seed = 2;
  EXPECT_NE(a, partition_uniform(50, cfg));
}

TEST(ClusterPartitionKMeans, SingleClusterIsMean) {
  PointMatrix pts;
  pts.push_back(std::vector<double>{1, 2});
  pts.push_back(std::vector<double>{3, 2});
  pts.push_back(std::vector<double>{2, 5});
  const auto sps = cluster_partition_kmeans(pts, 1, 0, "a", 4);
  ASSERT_EQ(sps.size(), 1u);
  EXPECT_DOUBLE_EQ(sps[0].position[0], 2.0);
  EXPECT_DOUBLE_EQ(sps[0].position[1], 3.0);
  EXPECT_EQ(sps[0].weight, 3.0);
  EXPECT_EQ(sps[0].source_channel, "a");
  EXPECT_EQ(sps[0].source_partition, 4u);
  EXPECT_THROW(cluster_partition_kmeans(pts, 4, 0), ContractError);
}

TEST(ClusterPartitionKMeans, WellSeparated) {
  PointMatrix pts;
  for (auto p : std::vector<std::vector<double>>{{0, 0}, {0, 1}, {10, 10}, {10, 11}})
    pts.push_back(p);
  auto sps = cluster_partition_kmeans(pts, 2, 8);
  ASSERT_EQ(sps.size(), 2u);
  std::sort(sps.begin(), sps.end(),
            [](const auto& x, const auto& y) { return x.position < y.position; });
  EXPECT_EQ(sps[0].position, (std::vector<double>{0, 0.5}));
  EXPECT_EQ(sps[1].position, (std::vector<double>{10, 10.5}));
  EXPECT_EQ(sps[0].weight, 2.0);
  EXPECT_EQ(sps[1].weight, 2.0);
}

TEST(ClusterPartitionKMeans, IdenticalPoints) {
  PointMatrix pts;
  for (int i = 0; i < 4; ++i) pts.push_back(std::vector<double>{7, 7});
  const auto sps = cluster_partition_kmeans(pts, 2, 0);
  EXPECT_LE(sps.size(), 2u);
  double total = 0;
  for (const auto& s : sps) total += s.weight;
  EXPECT_EQ(total, 4.0);
}

TEST(ClusterPartitionGmm, NormalisationAndDeterminism) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(5.0, 0.01);
  PointMatrix pts;
  for (int i = 0; i < 40; ++i) pts.push_back(std::vector<double>{n(rng), n(rng)});
  const auto sps = cluster_partition_gmm(pts, 1, 10, 3);
  ASSERT_EQ(sps.size(), 10u);
  double total = 0;
  for (const auto& s : sps) {
    total += s.weight;
    EXPECT_GT(s.weight, 0.0);
    EXPECT_NEAR(s.position[0], 5.0, 0.1);
  }
  EXPECT_NEAR(total, 40.0, 1e-9);
  EXPECT_EQ(sps, cluster_partition_gmm(pts, 1, 10, 3));
}

TEST(ClusterPartitionGmm, TwoBlobs) {
  const double sigma = 0.5;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(100 + seed);
    std::normal_distribution<double> n(0.0, sigma);
    PointMatrix pts;
    for (int i = 0; i < 50; ++i) pts.push_back(std::vector<double>{n(rng), n(rng)});
    for (int i = 0; i < 50; ++i) pts.push_back(std::vector<double>{10 + n(rng), 10 + n(rng)});
    const auto sps = cluster_partition_gmm(pts, 2, 10, seed);
    ASSERT_EQ(sps.size(), 20u);
    int near0 = 0, near10 = 0;
    for (const auto& s : sps) {
      if (std::hypot(s.position[0], s.position[1]) <= 3 * sigma) ++near0;
      if (std::hypot(s.position[0] - 10, s.position[1] - 10) <= 3 * sigma) ++near10;
    }
    EXPECT_GE(near0, 9);
    EXPECT_GE(near10, 9);
  }
}

TEST(ClusterPartitionGmm, DegenerateFallsBackToKMeans) {
  PointMatrix pts;
  for (int i = 0; i < 6; ++i) pts.push_back(std::vector<double>{1, 1});
  const auto sps = cluster_partition_gmm(pts, 2, 10, 0);
  EXPECT_LE(sps.size(), 2u);  // K-Means super-points, not samples
}

TEST(ClusterGlobal, Examples) {
  std::vector<SuperPoint> same(4, SuperPoint{{2.0, 2.0}, 1.0, "a", 0});
  const auto m = cluster_global(same, 3, 0);
  for (std::size_t c = 0; c < 3; ++c)
    EXPECT_EQ(std::vector<double>(m.centroids.row(c).begin(), m.centroids.row(c).end()),
              (std::vector<double>{2.0, 2.0}));

  const std::vector<SuperPoint> two = {{{0.0}, 1.0, "a", 0}, {{4.0}, 3.0, "b", 0}};
  EXPECT_DOUBLE_EQ(cluster_global(two, 1, 0).centroids.row(0)[0], 3.0);
  EXPECT_THROW(cluster_global(two, 3, 0), ContractError);
}

TEST(ClusterGlobal, EqualWeightsMatchUnweightedKMeans) {
  const auto pts = random_points(60, 2, 5);
  std::vector<SuperPoint> sps;
  for (std::size_t i = 0; i < pts.rows(); ++i)
    sps.push_back({{pts.row(i)[0], pts.row(i)[1]}, 2.5, "a", 0});
  const auto model = cluster_global(sps, 4, 9);
  auto direct = kmeans(pts, {}, 4, 9).centroids;
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < 4; ++c) rows.emplace_back(direct.row(c).begin(), direct.row(c).end());
  std::sort(rows.begin(), rows.end());
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t d = 0; d < 2; ++d)
      EXPECT_NEAR(model.centroids.row(c)[d], rows[c][d], 1e-12);
}

TEST(ClusterGlobal, SortedAndSplitWeightInvariant) {
  // Three well-separated groups; splitting a weight-2 point into two unit
  // copies must not move the centroids.
  std::vector<SuperPoint> merged = {{{0.0, 0.0}, 2.0, "a", 0}, {{0.2, 0.0}, 1.0, "a", 0},
                                    {{9.0, 9.0}, 1.0, "a", 0}, {{9.0, 9.4}, 3.0, "b", 0},
                                    {{-8.0, 5.0}, 1.0, "b", 0}};
  std::vector<SuperPoint> split = merged;
  split[0].weight = 1.0;
  split.push_back(split[0]);
  const auto a = cluster_global(merged, 3, 1);
  const auto b = cluster_global(split, 3, 1);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t d = 0; d < 2; ++d)
      EXPECT_NEAR(a.centroids.row(c)[d], b.centroids.row(c)[d], 1e-9);
    if (c > 0) EXPECT_LT(a.centroids.row(c - 1)[0], a.centroids.row(c)[0]);
  }
  EXPECT_NEAR(a.centroids.row(1)[0], 0.2 / 3.0, 1e-12);
}

TEST(LabelAll, Examples) {
  const auto pts = random_points(20, 2, 3);
  ClusterModel one;
  one.centroids.push_back(std::vector<double>{0.5, 0.5});
  const auto a = label_all(single_channel_input(pts), one);
  for (auto l : a.labels.at("a")) EXPECT_EQ(l, 0u);
  EXPECT_EQ(a.total(), 20u);

  ClusterModel three;
  for (auto c : std::vector<std::vector<double>>{{-1.0}, {3.0}, {1.0}}) three.centroids.push_back(c);
  PointMatrix mid;
  mid.push_back(std::vector<double>{0.0});
  EXPECT_EQ(label_all(single_channel_input(mid), three).labels.at("a")[0], 0u);
}

TEST(LabelAll, BruteForceOracle) {
  const auto pts = random_points(1000, 3, 21);
  const auto cents = random_points(5, 3, 22);
  ClusterModel model{cents};
  const WorkerPool pool(4);
  const auto got = label_all(single_channel_input(pts), model, &pool);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    std::uint32_t best = 0;
    double bd = 1e300;
    for (std::uint32_t c = 0; c < 5; ++c) {
      double d = 0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double diff = pts.row(i)[k] - cents.row(c)[k];
        d += diff * diff;
      }
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    EXPECT_EQ(got.labels.at("a")[i], best);
  }
}

TEST(RunSuperPoint, DegenerateSinglePartition) {
  const auto pts = random_points(500, 3, 33);
  SuperPointConfig cfg;
  cfg.k = 5;
  cfg.partition_size = 500;
  cfg.seed = 77;
  const WorkerPool pool(3);
  const auto input = single_channel_input(pts);
  const auto r = run_superpoint(input, cfg, pool);
  ASSERT_EQ(r.partitions.size(), 1u);
  // The lone sub-task is seeded with subtask_seed(seed, 0, 0).
  const auto direct = kmeans(pts, {}, 5, subtask_seed(cfg.seed, 0, 0));
  const auto& labels = r.assignment.labels.at("a");
  EXPECT_TRUE(same_up_to_permutation(labels, direct.labels));
  EXPECT_NEAR(within_cluster_ss(pts, labels, 5), within_cluster_ss(pts, direct.labels, 5),
              1e-9);
}

TEST(RunSuperPoint, TwoChannelsCompleteAndWorkerInvariant) {
  const auto pts = random_points(900, 3, 44);
  ClusterInput in;
  in.channels = {"a", "b"};
  in.features = pts;
  for (std::uint32_t i = 0; i < pts.rows(); ++i) {
    in.channel_of.push_back(i % 2);
    in.entity_of.push_back(i / 2);
  }
  SuperPointConfig cfg;
  cfg.k = 5;
  cfg.partition_size = 100;
  cfg.seed = 5;
  const auto r1 = run_superpoint(in, cfg, WorkerPool(1));
  const auto r8 = run_superpoint(in, cfg, WorkerPool(8));
  EXPECT_EQ(r1.superpoints, r8.superpoints);
  EXPECT_EQ(r1.assignment.labels, r8.assignment.labels);
  EXPECT_EQ(r1.assignment.total(), 900u);
  EXPECT_LE(r1.superpoints.size(), cfg.k * r1.partitions.size() * 2);
  for (const auto& [ch, labels] : r1.assignment.labels)
    for (auto l : labels) EXPECT_LT(l, 5u);

  std::ostringstream out;
  std::map<std::string, std::vector<std::string>> names;
  for (int i = 0; i < 450; ++i) {
    names["a"].push_back("a" + std::to_string(i));
    names["b"].push_back("b" + std::to_string(i));
  }
  write_assignment(out, r1.assignment, names);
  EXPECT_EQ(out.str().rfind("channel,entity,cluster\na,a0,", 0), 0u);
}

TEST(SuperPointConfig, Validation) {
  SuperPointConfig cfg;
  cfg.k = 10;
  cfg.partition_size = 5;
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg.partition_size = 10;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(parse_clusterer("gmm"), Clusterer::kGmm);
  EXPECT_THROW(parse_clusterer("dbscan"), ParameterError);
}

}  // namespace
}  // namespace tempalign

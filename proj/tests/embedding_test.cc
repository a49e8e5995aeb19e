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

#include "tempalign/embedding.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tempalign/error.hpp"

namespace tempalign {
namespace {

SimilarityMatrix random_similarity(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> series(n);
  for (auto& s : series) {
    s.resize(3 + rng() % 6);
    for (auto& v : s) v = static_cast<double>(rng() % 10);
  }
  return build_similarity(series);
}

TEST(BuildSimilarity, IdenticalSeries) {
  const std::vector<std::vector<double>> s = {{1, 2, 3}, {1, 2, 3}};
  const auto w = build_similarity(s, 0.7);
  EXPECT_EQ(w.w(0, 0), 0.0);
  EXPECT_EQ(w.w(0, 1), 1.0);
  EXPECT_EQ(w.w(1, 0), 1.0);
  EXPECT_EQ(w.w(1, 1), 0.0);
}

TEST(BuildSimilarity, DistanceEqualToTau) {
  const std::vector<std::vector<double>> s = {{0}, {5}};
  const auto w = build_similarity(s, 5.0);
  EXPECT_NEAR(w.w(0, 1), 0.367879, 1e-6);
  EXPECT_DOUBLE_EQ(w.w(0, 1), std::exp(-1.0));
}

TEST(BuildSimilarity, InvariantsAndDefaultTau) {
  const std::vector<std::vector<double>> s = {{0}, {2}, {6}};
  const auto w = build_similarity(s);
  EXPECT_DOUBLE_EQ(w.tau, (2.0 + 6.0 + 4.0) / 3.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(w.w(i, i), 0.0);
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(w.w(i, j), w.w(j, i));
      if (i != j) {
        EXPECT_GT(w.w(i, j), 0.0);
        EXPECT_LE(w.w(i, j), 1.0);
        EXPECT_DOUBLE_EQ(w.w(i, j),
                         std::exp(-testing_oracle::naive_dtw(s[i], s[j]) / w.tau));
      }
    }
  }
  EXPECT_THROW(build_similarity(s, 0.0), ParameterError);
  EXPECT_THROW(build_similarity(s, -1.0), ParameterError);
  EXPECT_THROW(build_similarity(std::vector<std::vector<double>>{{1}}), ContractError);
}

TEST(BuildSimilarity, PoolDoesNotChangeResult) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> series(30);
  for (auto& s : series) {
    s.resize(10);
    for (auto& v : s) v = static_cast<double>(rng() % 4);
  }
  const WorkerPool pool(4);
  EXPECT_EQ(build_similarity(series).w, build_similarity(series, {}, &pool).w);
}

TEST(LaplacianEmbed, TwoEntityHandExample) {
  const std::vector<std::vector<double>> s = {{4, 0, 1}, {4, 0, 1}};
  const auto w = build_similarity(s, 1.0);
  const Eigen::MatrixXd l = graph_laplacian(w);
  EXPECT_EQ(l(0, 0), 1.0);
  EXPECT_EQ(l(0, 1), -1.0);
  const auto emb = laplacian_embed(w, 1);
  ASSERT_EQ(emb.eigenvalues.size(), 1u);
  EXPECT_NEAR(emb.eigenvalues[0], 2.0, 1e-12);
  EXPECT_NEAR(std::abs(emb.coordinates(0, 0)), 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(emb.coordinates(0, 0), -emb.coordinates(1, 0), 1e-9);
}

TEST(LaplacianEmbed, RandomMatrixProperties) {
  const auto w = random_similarity(50, 17);
  const Eigen::MatrixXd l = graph_laplacian(w);
  for (Eigen::Index i = 0; i < l.rows(); ++i) EXPECT_LE(std::abs(l.row(i).sum()), 1e-9);
  EXPECT_TRUE(l.isApprox(l.transpose(), 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  EXPECT_GE(solver.eigenvalues().minCoeff(), -1e-9);

  const auto emb = laplacian_embed(w, 5);
  for (std::size_t i = 0; i < emb.eigenvalues.size(); ++i) {
    EXPECT_GT(emb.eigenvalues[i], 0.0);
    if (i > 0) EXPECT_LE(emb.eigenvalues[i - 1], emb.eigenvalues[i]);
  }
  const Eigen::MatrixXd gram = emb.coordinates.transpose() * emb.coordinates;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      EXPECT_NEAR(gram(i, j), i == j ? 1.0 : 0.0, 1e-6);
  // Each retained column is an eigenvector: L u = lambda u.
  for (Eigen::Index c = 0; c < emb.coordinates.cols(); ++c) {
    const Eigen::VectorXd u = emb.coordinates.col(c);
    EXPECT_LE((l * u - emb.eigenvalues[c] * u).norm(), 1e-8);
  }
}

TEST(LaplacianEmbed, Deficit) {
  // Two disconnected pairs leave a second zero eigenvalue.
  Eigen::MatrixXd d(4, 4);
  d << 0, 0, 1e6, 1e6, 0, 0, 1e6, 1e6, 1e6, 1e6, 0, 0, 1e6, 1e6, 0, 0;
  const auto w = similarity_from_distances(d, 1.0);
  EXPECT_NO_THROW(laplacian_embed(w, 2));
  try {
    laplacian_embed(w, 3);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("deficit 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(laplacian_embed(w, 4), ContractError);
}

}  // namespace
}  // namespace tempalign

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
#include <string>

#include <Eigen/Eigenvalues>

#include "tempalign/dtw.hpp"
#include "tempalign/error.hpp"

namespace tempalign {

SimilarityMatrix similarity_from_distances(const Eigen::MatrixXd& distances,
                                           double tau) {
  if (!(tau > 0.0)) throw ParameterError("tau must be > 0");
  const Eigen::Index n = distances.rows();
  SimilarityMatrix out;
  out.tau = tau;
  out.w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-distances(i, j) / tau);
      out.w(i, j) = v;
      out.w(j, i) = v;
    }
  return out;
}

SimilarityMatrix build_similarity(std::span<const std::vector<double>> series,
                                  std::optional<double> tau,
                                  const WorkerPool* pool) {
  const std::size_t n = series.size();
  if (n < 2) throw ContractError("similarity matrix needs at least 2 series");
  if (tau && !(*tau > 0.0)) throw ParameterError("tau must be > 0");

  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  auto row = [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j)
      dist(i, j) = dtw(series[i], series[j]);
  };
  if (pool)
    pool->for_each(n, row);
  else
    for (std::size_t i = 0; i < n; ++i) row(i);

  double t = 0.0;
  if (tau) {
    t = *tau;
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sum += dist(i, j);
    t = sum / (static_cast<double>(n) * (n - 1) / 2.0);
    if (!(t > 0.0)) t = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist(j, i) = dist(i, j);
  return similarity_from_distances(dist, t);
}

Eigen::MatrixXd graph_laplacian(const SimilarityMatrix& w) {
  Eigen::MatrixXd l = -w.w;
  for (Eigen::Index i = 0; i < w.w.rows(); ++i) l(i, i) += w.w.row(i).sum();
  return l;
}

EmbeddedFeature laplacian_embed(const SimilarityMatrix& w, std::size_t p) {
  const auto n = static_cast<std::size_t>(w.w.rows());
  if (p == 0) throw ParameterError("embedding dimension must be > 0");
  if (p >= n)
    throw ContractError("embedding dimension " + std::to_string(p) +
                        " must be below the entity count " + std::to_string(n));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(graph_laplacian(w));
  if (solver.info() != Eigen::Success)
    throw NumericError("Laplacian eigen-decomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const double cutoff = 1e-8 * std::max(0.0, values(values.size() - 1));

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < values.size() && keep.size() < p; ++i)
    if (values(i) > cutoff) keep.push_back(i);
  if (keep.size() < p)
    throw NumericError("need " + std::to_string(p) +
                       " nontrivial eigenvalues, found " +
                       std::to_string(keep.size()) + " (deficit " +
                       std::to_string(p - keep.size()) + ")");

  EmbeddedFeature out;
  out.coordinates.resize(static_cast<Eigen::Index>(n),
                         static_cast<Eigen::Index>(p));
  for (std::size_t c = 0; c < p; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(keep[c]);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
      if (std::fabs(v(i)) > std::fabs(v(arg))) arg = i;
    if (v(arg) < 0) v = -v;
    out.coordinates.col(static_cast<Eigen::Index>(c)) = v;
    out.eigenvalues.push_back(values(keep[c]));
  }
  return out;
}

}  // namespace tempalign

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

#include "tempalign/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tempalign/error.hpp"
#include "tempalign/random.hpp"

namespace tempalign {

namespace {

double component_log_density(std::span<const double> x,
                             std::span<const double> mean,
                             std::span<const double> var) {
  constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - mean[d];
    s += kLog2Pi + std::log(var[d]) + diff * diff / var[d];
  }
  return -0.5 * s;
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double DiagonalGmm::log_density(std::span<const double> x) const {
  std::vector<double> terms(components());
  for (std::size_t c = 0; c < components(); ++c)
    terms[c] = std::log(mixing[c]) +
               component_log_density(x, means.row(c), variances.row(c));
  return log_sum_exp(terms);
}

std::optional<DiagonalGmm> fit_diagonal_gmm(const PointMatrix& points,
                                            std::size_t k, std::uint64_t seed,
                                            const GmmOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.dim();
  if (k == 0) throw ParameterError("k must be >= 1");
  if (n < k) throw ContractError("GMM needs at least k points");

  const KMeansResult init = kmeans(points, {}, k, seed);
  DiagonalGmm gmm;
  gmm.means = init.centroids;
  gmm.variances = PointMatrix(k, dim);
  gmm.mixing.assign(k, 0.0);
  {
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = init.labels[i];
      count[c] += 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = points.row(i)[d] - gmm.means.row(c)[d];
        gmm.variances.row(c)[d] += diff * diff;
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      gmm.mixing[c] = std::max(count[c], 1.0) / static_cast<double>(n);
      for (std::size_t d = 0; d < dim; ++d) {
        auto& v = gmm.variances.row(c)[d];
        v = std::max(count[c] > 0 ? v / count[c] : 0.0, options.covariance_floor);
      }
    }
    double total = 0.0;
    for (double m : gmm.mixing) total += m;
    for (double& m : gmm.mixing) m /= total;
  }

  std::vector<double> resp(n * k);
  std::vector<double> terms(k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  std::size_t collapse_streak = 0;
  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    // E-step.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c)
        terms[c] = std::log(gmm.mixing[c]) +
                   component_log_density(points.row(i), gmm.means.row(c),
                                         gmm.variances.row(c));
      const double lse = log_sum_exp(terms);
      ll += lse;
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(terms[c] - lse);
    }
    ll /= static_cast<double>(n);
    gmm.mean_log_likelihood = ll;
    gmm.iterations = iter;
    if (!std::isfinite(ll)) return std::nullopt;
    if (iter > 1 && std::fabs(ll - prev_ll) < options.tolerance) {
      // Converging onto a floored variance is still a collapse.
      if (collapse_streak > 0) return std::nullopt;
      break;
    }
    prev_ll = ll;

    // M-step.
    bool collapsed = false;
    for (std::size_t c = 0; c < k; ++c) {
      double nc = 0.0;
      for (std::size_t i = 0; i < n; ++i) nc += resp[i * k + c];
      if (nc < 1e-10) {
        collapsed = true;
        continue;
      }
      auto mean = gmm.means.row(c);
      std::fill(mean.begin(), mean.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d)
          mean[d] += resp[i * k + c] * points.row(i)[d];
      for (double& m : mean) m /= nc;
      auto var = gmm.variances.row(c);
      std::fill(var.begin(), var.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = points.row(i)[d] - mean[d];
          var[d] += resp[i * k + c] * diff * diff;
        }
      for (double& v : var) {
        v /= nc;
        if (v < options.covariance_floor) {
          v = options.covariance_floor;
          collapsed = true;
        }
      }
      gmm.mixing[c] = nc / static_cast<double>(n);
    }
    double total = 0.0;
    for (double& m : gmm.mixing) {
      m = std::max(m, 1e-300);
      total += m;
    }
    for (double& m : gmm.mixing) m /= total;

    collapse_streak = collapsed ? collapse_streak + 1 : 0;
    if (collapse_streak >= options.max_collapse_iterations) return std::nullopt;
  }
  return gmm;
}

PointMatrix sample_components(const DiagonalGmm& gmm, std::size_t per_component,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t dim = gmm.means.dim();
  PointMatrix out;
  std::vector<double> x(dim);
  for (std::size_t c = 0; c < gmm.components(); ++c)
    for (std::size_t s = 0; s < per_component; ++s) {
      for (std::size_t d = 0; d < dim; ++d)
        x[d] = gmm.means.row(c)[d] +
               std::sqrt(gmm.variances.row(c)[d]) * standard_normal(rng);
      out.push_back(x);
    }
  return out;
}

}  // namespace tempalign

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
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tempalign/align.hpp"
#include "tempalign/eval.hpp"
#include "tempalign/features.hpp"

namespace tempalign {

struct RayleighParams {
  double sigma = 1.0;
};

double rayleigh_log_pdf(double x, double sigma);
double rayleigh_pdf(double x, double sigma);

// Closed-form MLE sigma = sqrt(sum x^2 / (2n)). Non-positive samples are
// clamped to 1e-9. Throws ContractError for fewer than 2 samples.
RayleighParams rayleigh_mle(std::span<const double> samples);

// Labelled subsets of both channels used to fit the hypothesis models.
struct TrainingSet {
  std::vector<std::string> ids_a;
  std::vector<BinnedTimeSeries> features_a;
  std::vector<std::string> ids_b;
  std::vector<BinnedTimeSeries> features_b;
  std::set<PairKey> true_pairs;

  void validate() const;
};

// Samples `fraction` of the truth pairs whose endpoints are both indexed
// (at least `min_pairs`, capped by what is available). features_b receives
// every sampled counterpart.
TrainingSet select_training_set(const ChannelFeatures& a,
                                const ChannelFeatures& b,
                                const GroundTruth& truth, double fraction,
                                std::size_t min_pairs, std::uint64_t seed);

// Rayleigh fit of max_v sim(u, v) per training row.
RayleighParams fit_h1(const TrainingSet& train);

// Rayleigh fit of the maximum over `null_draws` random non-counterparts per
// training row. null_draws == 0 selects min(100, candidate count).
RayleighParams fit_h0(const TrainingSet& train, std::size_t null_draws,
                      std::uint64_t seed);

struct HypothesisModel {
  RayleighParams h1;
  RayleighParams h0;
  double overlap = 0.0;
};

// Overlap coefficient of two Rayleigh densities, integrated numerically.
double compute_overlap(double sigma_h1, double sigma_h0);
double compute_overlap(const HypothesisModel& model);

HypothesisModel fit_model(const TrainingSet& train, std::size_t null_draws,
                          std::uint64_t seed);

// ln f(s; sigma_h1) - ln f(s; sigma_h0) with s clamped to [1e-9, 1].
double score_pair(double similarity, const HypothesisModel& model);

using ScoreMap = std::map<PairKey, double>;

ScoreMap score_matches(const MatchSet& matches, const HypothesisModel& model);

struct ScoreTable {
  struct Entry {
    double score = 0.0;
    std::size_t chunks = 0;  // chunks that contributed a term

    bool operator==(const Entry&) const = default;
  };

  std::map<PairKey, Entry> entries;
  std::size_t chunk_count = 0;

  bool operator==(const ScoreTable&) const = default;
};

ScoreTable accumulate(ScoreTable previous, const ScoreMap& chunk_scores);

MatchSet threshold_scores(const ScoreTable& table, double theta,
                          const std::string& channel_a = {},
                          const std::string& channel_b = {});

// Score table file: CSV `entity_a,entity_b,score,chunks`, sorted by pair.
// Scores are written with round-trip precision.
void write_score_table(std::ostream& out, const ScoreTable& table);
ScoreTable read_score_table(std::istream& in, std::size_t chunk_count);

}  // namespace tempalign

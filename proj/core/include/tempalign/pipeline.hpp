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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempalign/align.hpp"
#include "tempalign/eval.hpp"
#include "tempalign/features.hpp"
#include "tempalign/ingest.hpp"
#include "tempalign/likelihood.hpp"
#include "tempalign/superpoint.hpp"

namespace tempalign {

enum class ClusterFeature { kNone, kRedF, kEmbF };

ClusterFeature parse_cluster_feature(const std::string& text);
std::string to_string(ClusterFeature f);

struct LikelihoodSettings {
  bool enabled = false;
  double train_fraction = 0.01;
  std::size_t min_train_pairs = 20;
  std::size_t null_draws = 0;  // 0: min(100, candidates)
  double score_threshold = 0.0;
  bool refit_per_chunk = false;
};

struct EmbeddingSettings {
  std::size_t dims = 3;
  std::size_t segments = 64;  // DTW resolution
  std::size_t max_entities = 5000;
  std::optional<double> tau;
};

struct PipelineConfig {
  std::string channel_a = "a";
  std::string channel_b = "b";
  Timestamp delta_t = 3;
  ActivityMode activity_mode = ActivityMode::kBoth;
  ClusterFeature cluster_feature = ClusterFeature::kNone;
  SuperPointConfig superpoint;
  AlignConfig align;
  LikelihoodSettings likelihood;
  EmbeddingSettings embedding;
  Timestamp chunk_length = 7 * 86400;
  std::optional<Timestamp> chunk_origin;
  std::optional<Timestamp> window_start;
  std::optional<Timestamp> window_end;
  std::size_t workers = 22;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct SingleRunResult {
  FeatureSet features;
  std::optional<ClusterAssignment> assignment;
  MatchSet forward;
  MatchSet backward;
  MatchSet matches;  // reconciled
  std::uint64_t comparisons = 0;
  std::optional<HypothesisModel> model;
  ScoreMap scores;  // filled when likelihood scoring ran
  std::optional<MetricsReport> report;  // when truth was supplied
  std::vector<StageTiming> timings;
  double wall_seconds = 0.0;
};

struct SingleRunInputs {
  std::span<const Event> events;
  const GroundTruth* truth = nullptr;  // evaluation
  const GroundTruth* seeds = nullptr;  // training pairs for the model
  std::optional<BinningSpec> spec;     // default: span of the events
  const HypothesisModel* model = nullptr;  // reuse instead of fitting
};

// bin -> [cluster] -> forward -> backward -> reconcile -> [score] -> metrics.
// Failures are rethrown as StageError naming the stage.
SingleRunResult run_single(const PipelineConfig& config,
                           const SingleRunInputs& inputs);

struct ChunkedOptions {
  std::optional<std::filesystem::path> checkpoint_dir;
  bool resume = false;
  // Stop after this many chunks have been completed in total.
  std::optional<std::size_t> stop_after;
};

struct ChunkedResult {
  MatchSet final_matches;
  ScoreTable table;
  HypothesisModel model;
  std::vector<ScoreMap> chunk_scores;         // chunks run by this call
  std::vector<MetricsReport> per_chunk;       // reconciled match per chunk
  std::vector<MetricsReport> cumulative;      // threshold_scores after chunk
  std::size_t chunks_completed = 0;
  std::size_t resumed_from = 0;
};

// Runs each chunk with chunk-local binning, scores the reconciled matches and
// accumulates them. With a checkpoint directory the score table and model are
// persisted after every chunk; `resume` continues from the persisted state.
ChunkedResult run_chunked(const PipelineConfig& config,
                          std::span<const Chunk> chunks,
                          const GroundTruth& seeds, const GroundTruth* truth,
                          const ChunkedOptions& options = {});

// Checkpoint state file (`key=value`).
struct CheckpointState {
  std::size_t chunks_completed = 0;
  HypothesisModel model;
};
void write_checkpoint_state(std::ostream& out, const CheckpointState& state);
CheckpointState read_checkpoint_state(std::istream& in);

}  // namespace tempalign

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

#include "tempalign/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include <glog/logging.h>

#include "tempalign/csv.hpp"
#include "tempalign/embedding.hpp"
#include "tempalign/error.hpp"
#include "tempalign/worker_pool.hpp"

namespace tempalign {

namespace fs = std::filesystem;

ClusterFeature parse_cluster_feature(const std::string& text) {
  if (text == "none") return ClusterFeature::kNone;
  if (text == "redf") return ClusterFeature::kRedF;
  if (text == "embf") return ClusterFeature::kEmbF;
  throw ParameterError("unknown cluster feature '" + text + "'");
}

std::string to_string(ClusterFeature f) {
  switch (f) {
    case ClusterFeature::kNone: return "none";
    case ClusterFeature::kRedF: return "redf";
    case ClusterFeature::kEmbF: return "embf";
  }
  return "none";
}

void PipelineConfig::validate() const {
  if (channel_a.empty() || channel_b.empty() || channel_a == channel_b)
    throw ParameterError("the channel pair needs two distinct channels");
  if (delta_t <= 0) throw ParameterError("delta_t must be > 0");
  if (workers < 1) throw ParameterError("workers must be >= 1");
  if (chunk_length <= 0) throw ParameterError("chunk_length must be > 0");
  if (window_start && window_end && *window_end <= *window_start)
    throw ParameterError("run window is empty");
  align.validate();
  if (cluster_feature != ClusterFeature::kNone) superpoint.validate();
  if (cluster_feature == ClusterFeature::kEmbF) {
    if (embedding.dims < 1) throw ParameterError("embedding dims must be >= 1");
    if (embedding.segments < 1) throw ParameterError("embedding segments must be >= 1");
    if (superpoint.partition_size > embedding.max_entities)
      throw ParameterError("partition_size exceeds the EmbF entity cap of " +
                           std::to_string(embedding.max_entities));
    if (embedding.tau && !(*embedding.tau > 0.0))
      throw ParameterError("tau must be > 0");
  }
  if (likelihood.enabled) {
    if (!(likelihood.train_fraction > 0.0 && likelihood.train_fraction <= 1.0))
      throw ParameterError("train_fraction must lie in (0, 1]");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class StageRunner {
 public:
  explicit StageRunner(std::vector<StageTiming>& timings) : timings_(timings) {}

  template <typename F>
  decltype(auto) operator()(const std::string& stage, F&& fn) {
    const auto start = Clock::now();
    struct Record {
      std::vector<StageTiming>& timings;
      const std::string& stage;
      Clock::time_point start;
      ~Record() { timings.push_back({stage, seconds_since(start)}); }
    } record{timings_, stage, start};
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

 private:
  std::vector<StageTiming>& timings_;
};

ClusterInput make_cluster_input(const FeatureSet& features,
                                const std::vector<std::string>& channels) {
  ClusterInput input;
  input.channels = channels;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& cf = features.at(channels[c]);
    for (std::size_t i = 0; i < cf.size(); ++i) {
      if (cf.series[i].empty()) continue;
      input.channel_of.push_back(static_cast<std::uint32_t>(c));
      input.entity_of.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return input;
}

const BinnedTimeSeries& series_of(const FeatureSet& features,
                                  const ClusterInput& input, std::size_t row) {
  return features.at(input.channels[input.channel_of[row]])
      .series[input.entity_of[row]];
}

void fill_redf(ClusterInput& input, const FeatureSet& features,
               const BinningSpec& spec) {
  std::vector<const BinnedTimeSeries*> rows;
  rows.reserve(input.channel_of.size());
  for (std::size_t r = 0; r < input.channel_of.size(); ++r)
    rows.push_back(&series_of(features, input, r));
  const auto redf = compute_redf(std::span<const BinnedTimeSeries* const>(rows), spec);
  for (const auto& f : redf) input.features.push_back(std::vector<double>{f.aec, f.dec, f.ie});
}

// Laplacian-eigenmap coordinates computed independently inside each
// partition. Returns the partitions used so clustering reuses them.
std::vector<std::vector<std::size_t>> fill_embf(ClusterInput& input,
                                                const FeatureSet& features,
                                                const BinningSpec& spec,
                                                const PipelineConfig& config,
                                                const WorkerPool& pool) {
  const std::size_t n = input.channel_of.size();
  SuperPointConfig sp = config.superpoint;
  sp.seed = config.seed;
  auto partitions = partition_uniform(n, sp);
  const std::size_t dims = config.embedding.dims;
  if (partitions.size() > 1 && partitions.back().size() <= dims + 1) {
    auto tail = std::move(partitions.back());
    partitions.pop_back();
    partitions.back().insert(partitions.back().end(), tail.begin(), tail.end());
    std::sort(partitions.back().begin(), partitions.back().end());
  }
  for (const auto& p : partitions) {
    if (p.size() <= dims)
      throw ContractError("EmbF partition of " + std::to_string(p.size()) +
                          " entities cannot hold a " + std::to_string(dims) +
                          "-dimensional embedding");
    if (p.size() > config.embedding.max_entities)
      throw ContractError("EmbF partition exceeds the entity cap");
  }

  input.features = PointMatrix(n, dims);
  for (const auto& part : partitions) {
    std::vector<std::vector<double>> rendered;
    rendered.reserve(part.size());
    for (std::size_t row : part)
      rendered.push_back(render_segments(series_of(features, input, row), spec.t_bar,
                                         config.embedding.segments));
    const SimilarityMatrix w = build_similarity(rendered, config.embedding.tau, &pool);
    const EmbeddedFeature emb = laplacian_embed(w, dims);
    for (std::size_t i = 0; i < part.size(); ++i)
      for (std::size_t d = 0; d < dims; ++d)
        input.features.row(part[i])[d] =
            emb.coordinates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
  }
  return partitions;
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

SingleRunResult run_single(const PipelineConfig& config,
                           const SingleRunInputs& inputs) {
  config.validate();
  const auto wall_start = Clock::now();
  SingleRunResult result;
  StageRunner stage(result.timings);
  const WorkerPool pool(config.workers);

  const ChannelCatalog catalog({config.channel_a, config.channel_b});
  BinningSpec spec;
  EntityIndex index;
  stage("ingest", [&] {
    // Copy only when something has to be dropped.
    std::span<const Event> view = inputs.events;
    std::vector<Event> kept;
    const bool windowed = config.window_start || config.window_end;
    const bool foreign = std::any_of(view.begin(), view.end(), [&](const Event& e) {
      return e.channel != config.channel_a && e.channel != config.channel_b;
    });
    if (foreign || windowed) {
      for (const auto& e : view)
        if (e.channel == config.channel_a || e.channel == config.channel_b)
          kept.push_back(e);
      if (windowed) kept = filter_window(kept, config.window_start, config.window_end);
      view = kept;
    }
    if (inputs.spec)
      spec = *inputs.spec;
    else
      spec = BinningSpec::for_events(view, config.delta_t);
    index = build_index(view, catalog, config.activity_mode);
    result.features = bin_events(view, spec, index, config.activity_mode);
  });
  const ChannelFeatures& fa = result.features.at(config.channel_a);
  const ChannelFeatures& fb = result.features.at(config.channel_b);

  if (config.cluster_feature != ClusterFeature::kNone) {
    stage("cluster", [&] {
      ClusterInput input =
          make_cluster_input(result.features, {config.channel_a, config.channel_b});
      if (input.channel_of.empty()) throw ContractError("no active entities to cluster");
      std::optional<std::vector<std::vector<std::size_t>>> partitions;
      if (config.cluster_feature == ClusterFeature::kRedF)
        fill_redf(input, result.features, spec);
      else
        partitions = fill_embf(input, result.features, spec, config, pool);
      SuperPointConfig sp = config.superpoint;
      sp.seed = config.seed;
      sp.workers = config.workers;
      result.assignment =
          run_superpoint(input, sp, pool, std::move(partitions)).assignment;
    });
  }
  const ClusterAssignment* assignment =
      result.assignment ? &*result.assignment : nullptr;

  std::uint64_t comparisons = 0;
  stage("align_forward", [&] {
    auto r = align_directional(fa, fb, assignment, config.align, &pool);
    comparisons += r.comparisons;
    if (!r.zero_sources.empty())
      VLOG(1) << r.zero_sources.size() << " all-zero entities skipped in "
              << fa.channel;
    result.forward = std::move(r.matches);
  });
  stage("align_backward", [&] {
    auto r = align_directional(fb, fa, assignment, config.align, &pool);
    comparisons += r.comparisons;
    result.backward = std::move(r.matches);
  });
  result.comparisons = comparisons;
  stage("reconcile", [&] { result.matches = reconcile(result.forward, result.backward); });

  if (config.likelihood.enabled) {
    stage("likelihood", [&] {
      if (inputs.model) {
        result.model = *inputs.model;
      } else {
        if (!inputs.seeds)
          throw ContractError("likelihood scoring needs seed alignments");
        const TrainingSet train = select_training_set(
            fa, fb, *inputs.seeds, config.likelihood.train_fraction,
            config.likelihood.min_train_pairs, config.seed);
        result.model = fit_model(train, config.likelihood.null_draws, config.seed);
      }
      result.scores = score_matches(result.matches, *result.model);
    });
  }

  if (inputs.truth) {
    stage("metrics", [&] {
      result.report = build_report(result.matches, *inputs.truth);
      result.report->comparisons_performed = result.comparisons;
    });
  }
  result.wall_seconds = seconds_since(wall_start);
  if (result.report) result.report->runtime_seconds = result.wall_seconds;
  return result;
}

void write_checkpoint_state(std::ostream& out, const CheckpointState& state) {
  out << "chunks_completed=" << state.chunks_completed << '\n'
      << "sigma_h1=" << csv::format_double(state.model.h1.sigma) << '\n'
      << "sigma_h0=" << csv::format_double(state.model.h0.sigma) << '\n'
      << "overlap=" << csv::format_double(state.model.overlap) << '\n';
}

CheckpointState read_checkpoint_state(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (csv::read_line(in, line)) {
    ++line_no;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(line_no, "missing key '" + key + "'");
    return it->second;
  };
  CheckpointState state;
  std::uint64_t completed = 0;
  if (!csv::parse_uint(get("chunks_completed"), completed) ||
      !csv::parse_double(get("sigma_h1"), state.model.h1.sigma) ||
      !csv::parse_double(get("sigma_h0"), state.model.h0.sigma) ||
      !csv::parse_double(get("overlap"), state.model.overlap))
    throw ParseError(line_no, "malformed checkpoint value");
  state.chunks_completed = completed;
  return state;
}

ChunkedResult run_chunked(const PipelineConfig& config,
                          std::span<const Chunk> chunks,
                          const GroundTruth& seeds, const GroundTruth* truth,
                          const ChunkedOptions& options) {
  config.validate();
  if (!config.likelihood.enabled)
    throw ContractError("chunked runs need likelihood scoring enabled");

  ChunkedResult result;
  bool have_model = false;
  const fs::path dir = options.checkpoint_dir.value_or(fs::path());
  const fs::path state_path = dir / "state.txt";
  const fs::path table_path = dir / "scores.csv";

  if (options.checkpoint_dir) {
    fs::create_directories(dir);
    if (options.resume && fs::exists(state_path)) {
      try {
        std::ifstream sin(state_path);
        const CheckpointState state = read_checkpoint_state(sin);
        std::ifstream tin(table_path);
        if (!tin) throw Error("missing score table");
        result.table = read_score_table(tin, state.chunks_completed);
        result.model = state.model;
        result.chunks_completed = state.chunks_completed;
        have_model = state.chunks_completed > 0;
      } catch (const std::exception& e) {
        throw Error("corrupt checkpoint in " + dir.string() + ": " + e.what());
      }
      if (result.chunks_completed > chunks.size())
        throw Error("checkpoint in " + dir.string() + " is ahead of the chunk list");
      LOG(INFO) << "resuming after chunk " << result.chunks_completed;
    }
  }
  result.resumed_from = result.chunks_completed;

  for (std::size_t i = result.chunks_completed; i < chunks.size(); ++i) {
    if (options.stop_after && result.chunks_completed >= *options.stop_after) break;
    const Chunk& chunk = chunks[i];
    ScoreMap scores;
    MatchSet chunk_matches;
    chunk_matches.channel_a = config.channel_a;
    chunk_matches.channel_b = config.channel_b;
    std::uint64_t comparisons = 0;

    bool has_pair_events = false;
    for (const auto& e : chunk.events)
      if (e.channel == config.channel_a || e.channel == config.channel_b) {
        has_pair_events = true;
        break;
      }
    if (has_pair_events) {
      SingleRunInputs in;
      in.events = chunk.events;
      in.seeds = &seeds;
      in.spec = BinningSpec::for_chunk(chunk.spec, config.delta_t);
      const bool reuse = have_model && !config.likelihood.refit_per_chunk;
      if (reuse) in.model = &result.model;
      SingleRunResult run = run_single(config, in);
      result.model = *run.model;
      have_model = true;
      scores = std::move(run.scores);
      chunk_matches = std::move(run.matches);
      comparisons = run.comparisons;
    }

    result.table = accumulate(std::move(result.table), scores);
    result.chunks_completed = i + 1;
    if (truth) {
      MetricsReport per = build_report(chunk_matches, *truth);
      per.comparisons_performed = comparisons;
      result.per_chunk.push_back(per);
      result.cumulative.push_back(build_report(
          threshold_scores(result.table, config.likelihood.score_threshold,
                           config.channel_a, config.channel_b),
          *truth));
    }
    result.chunk_scores.push_back(std::move(scores));

    if (options.checkpoint_dir) {
      std::ostringstream table_text, state_text;
      write_score_table(table_text, result.table);
      write_checkpoint_state(state_text, {result.chunks_completed, result.model});
      write_atomically(table_path, table_text.str());
      write_atomically(state_path, state_text.str());
    }
  }
  result.final_matches =
      threshold_scores(result.table, config.likelihood.score_threshold,
                       config.channel_a, config.channel_b);
  return result;
}

}  // namespace tempalign

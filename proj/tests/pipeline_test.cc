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
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "tempalign/error.hpp"
#include "tempalign/synthgen.hpp"

namespace tempalign {
namespace {

namespace fs = std::filesystem;

std::vector<Event> merged(const GeneratedData& d) {
  std::vector<Event> all;
  for (const auto& ch : d.events) all.insert(all.end(), ch.begin(), ch.end());
  std::stable_sort(all.begin(), all.end(),
                   [](const Event& x, const Event& y) { return x.timestamp < y.timestamp; });
  return all;
}

GeneratedData dataset(std::uint64_t seed, double days = 14, double dropout = 0.2,
                      double jitter = 1.0) {
  GeneratorConfig g;
  g.n_shared = 150;
  g.n_exclusive_per_channel = 30;
  g.duration = static_cast<Timestamp>(days * 86400);
  g.rate_min = 4;
  g.rate_max = 12;
  g.dropout = dropout;
  g.jitter_sigma = jitter;
  g.seed = seed;
  return generate(g);
}

PipelineConfig base_config(std::size_t workers = 2) {
  PipelineConfig c;
  c.workers = workers;
  c.superpoint.partition_size = 100;
  c.align.threshold = 0.2;
  c.seed = 3;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("tempalign_" + name);
  fs::remove_all(p);
  return p;
}

std::string table_text(const ScoreTable& t) {
  std::ostringstream out;
  write_score_table(out, t);
  return out.str();
}

TEST(RunSingle, UnclusteredComparesAllPairs) {
  const auto d = dataset(1, 3);
  const auto events = merged(d);
  SingleRunInputs in;
  in.events = events;
  in.truth = &d.truth;
  const auto r = run_single(base_config(), in);
  std::uint64_t na = 0, nb = 0;
  for (const auto& s : r.features.at("a").series) na += !s.empty();
  for (const auto& s : r.features.at("b").series) nb += !s.empty();
  EXPECT_EQ(r.comparisons, 2 * na * nb);
  ASSERT_TRUE(r.report.has_value());
  EXPECT_EQ(r.report->comparisons_performed, r.comparisons);
  EXPECT_GT(r.report->ma, 0.8);
}

TEST(RunSingle, SelfAlignmentIsIdentity) {
  const auto d = dataset(2, 3);
  std::vector<Event> events = d.events[0];
  for (const auto& e : d.events[0]) events.push_back({e.source, e.target, "b", e.timestamp});
  GroundTruth identity;
  for (const auto& e : d.events[0]) {
    identity.pairs.insert({e.source, e.source});
    identity.pairs.insert({e.target, e.target});
  }
  auto cfg = base_config();
  cfg.align.threshold = 0.5;
  SingleRunInputs in;
  in.events = events;
  in.truth = &identity;
  const auto r = run_single(cfg, in);
  EXPECT_EQ(r.report->ma, 1.0);
  EXPECT_EQ(r.report->fnma, 1.0);
  for (const auto& m : r.matches.matches) EXPECT_EQ(m.a, m.b);
}

TEST(RunSingle, NoiselessGeneratorIsRecovered) {
  GeneratorConfig g;
  g.n_shared = 120;
  g.duration = 86400;
  g.rate_min = 0.5;
  g.rate_max = 6;
  g.seed = 11;
  const auto d = generate(g);
  const auto events = merged(d);
  auto cfg = base_config();
  cfg.align.threshold = 0.99;
  SingleRunInputs in;
  in.events = events;
  in.truth = &d.truth;
  const auto r = run_single(cfg, in);
  EXPECT_EQ(r.report->ma, 1.0);
  std::set<std::string> active;
  for (const auto& e : d.events[0]) {
    active.insert(e.source);
    active.insert(e.target);
  }
  const double silent = static_cast<double>(120 - active.size()) / 120.0;
  EXPECT_DOUBLE_EQ(r.report->i_nm_forward, silent);
}

TEST(RunSingle, ClusteringPrunesAndTimingsCoverWall) {
  const auto d = dataset(3, 7);
  const auto events = merged(d);
  SingleRunInputs in;
  in.events = events;
  in.truth = &d.truth;
  auto cfg = base_config();
  const auto plain = run_single(cfg, in);
  for (auto feature : {ClusterFeature::kRedF, ClusterFeature::kEmbF}) {
    cfg.cluster_feature = feature;
    const auto r = run_single(cfg, in);
    ASSERT_TRUE(r.assignment.has_value());
    EXPECT_LT(r.comparisons, plain.comparisons) << to_string(feature);
    double staged = 0;
    for (const auto& t : r.timings) staged += t.seconds;
    EXPECT_GE(staged, 0.95 * r.wall_seconds);
    EXPECT_LE(staged, 1.05 * r.wall_seconds);
  }
  cfg.cluster_feature = ClusterFeature::kRedF;
  cfg.superpoint.clusterer = Clusterer::kGmm;
  EXPECT_NO_THROW(run_single(cfg, in));
}

TEST(RunSingle, WorkerCountInvariant) {
  const auto d = dataset(4, 5);
  const auto events = merged(d);
  SingleRunInputs in;
  in.events = events;
  in.seeds = &d.truth;
  for (auto feature : {ClusterFeature::kNone, ClusterFeature::kRedF, ClusterFeature::kEmbF}) {
    auto cfg = base_config(1);
    cfg.cluster_feature = feature;
    cfg.likelihood.enabled = true;
    const auto r1 = run_single(cfg, in);
    for (std::size_t w : {4u, 8u}) {
      cfg.workers = w;
      const auto rw = run_single(cfg, in);
      EXPECT_EQ(rw.matches, r1.matches);
      EXPECT_EQ(rw.forward, r1.forward);
      EXPECT_EQ(rw.backward, r1.backward);
      EXPECT_EQ(rw.scores, r1.scores);
      EXPECT_EQ(rw.comparisons, r1.comparisons);
      if (r1.assignment) EXPECT_EQ(rw.assignment->labels, r1.assignment->labels);
    }
  }
}

TEST(RunSingle, StageErrorsNameTheStage) {
  const auto d = dataset(5, 2);
  const auto events = merged(d);
  auto cfg = base_config();
  cfg.likelihood.enabled = true;
  SingleRunInputs in;
  in.events = events;
  try {
    run_single(cfg, in);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "likelihood");
  }
  auto bad = base_config();
  bad.align.threshold = 2.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = base_config();
  bad.channel_b = bad.channel_a;
  EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(RunChunked, SingleChunkMatchesBatch) {
  const auto d = dataset(6, 5);
  const auto events = merged(d);
  auto cfg = base_config();
  cfg.likelihood.enabled = true;
  cfg.likelihood.score_threshold = 1.0;
  cfg.chunk_length = 10 * 86400;
  const auto chunks = partition_chunks(events, cfg.chunk_length);
  ASSERT_EQ(chunks.size(), 1u);
  const auto chunked = run_chunked(cfg, chunks, d.truth, &d.truth);

  SingleRunInputs in;
  in.events = events;
  in.seeds = &d.truth;
  in.spec = BinningSpec::for_chunk(chunks[0].spec, cfg.delta_t);
  const auto single = run_single(cfg, in);
  const auto expected = threshold_scores(accumulate({}, single.scores), 1.0, "a", "b");
  EXPECT_EQ(chunked.final_matches, expected);
}

TEST(RunChunked, RestartReproducesTable) {
  const auto d = dataset(7, 21);
  const auto events = merged(d);
  auto cfg = base_config();
  cfg.likelihood.enabled = true;
  const auto chunks = partition_chunks(events, cfg.chunk_length);
  ASSERT_EQ(chunks.size(), 3u);

  const auto full = run_chunked(cfg, chunks, d.truth, &d.truth);
  for (const auto& [pair, e] : full.table.entries) {
    double sum = 0;
    for (const auto& c : full.chunk_scores)
      if (auto it = c.find(pair); it != c.end()) sum += it->second;
    EXPECT_EQ(e.score, sum);
  }

  const auto dir = scratch("restart");
  ChunkedOptions first;
  first.checkpoint_dir = dir;
  first.stop_after = 2;
  const auto part = run_chunked(cfg, chunks, d.truth, nullptr, first);
  EXPECT_EQ(part.chunks_completed, 2u);
  ChunkedOptions second;
  second.checkpoint_dir = dir;
  second.resume = true;
  const auto rest = run_chunked(cfg, chunks, d.truth, nullptr, second);
  EXPECT_EQ(rest.resumed_from, 2u);
  EXPECT_EQ(rest.chunks_completed, 3u);
  EXPECT_EQ(table_text(rest.table), table_text(full.table));
  EXPECT_EQ(rest.final_matches, full.final_matches);

  // Resuming a finished run is a no-op.
  const auto done = run_chunked(cfg, chunks, d.truth, nullptr, second);
  EXPECT_EQ(table_text(done.table), table_text(full.table));
}

TEST(RunChunked, CorruptTableNamesPath) {
  const auto d = dataset(8, 14);
  const auto events = merged(d);
  auto cfg = base_config();
  cfg.likelihood.enabled = true;
  const auto chunks = partition_chunks(events, cfg.chunk_length);
  const auto dir = scratch("corrupt");
  ChunkedOptions opts;
  opts.checkpoint_dir = dir;
  opts.stop_after = 1;
  run_chunked(cfg, chunks, d.truth, nullptr, opts);
  std::ofstream(dir / "scores.csv", std::ios::app) << "broken line\n";
  opts.resume = true;
  opts.stop_after.reset();
  try {
    run_chunked(cfg, chunks, d.truth, nullptr, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(dir.string()), std::string::npos) << e.what();
  }
  auto off = cfg;
  off.likelihood.enabled = false;
  EXPECT_THROW(run_chunked(off, chunks, d.truth, nullptr), ContractError);
}

TEST(RunChunked, CorrectMatchesGrowOverWeeks) {
  const auto d = dataset(9, 63, 0.3, 2.0);
  const auto events = merged(d);
  auto cfg = base_config();
  cfg.likelihood.enabled = true;
  cfg.likelihood.score_threshold = 5.0;
  const auto chunks = partition_chunks(events, cfg.chunk_length);
  ASSERT_EQ(chunks.size(), 9u);
  const auto r = run_chunked(cfg, chunks, d.truth, &d.truth);
  ASSERT_EQ(r.cumulative.size(), 9u);
  double prev = -1;
  for (const auto& rep : r.cumulative) {
    const double correct = rep.ma * static_cast<double>(rep.matched_count);
    EXPECT_GE(correct + 1e-9, prev);
    prev = correct;
  }
}

TEST(Checkpoint, StateRoundTrip) {
  CheckpointState s;
  s.chunks_completed = 4;
  s.model.h1.sigma = 0.1 + 0.2;
  s.model.h0.sigma = 1.0 / 3.0;
  s.model.overlap = 0.0123;
  std::stringstream io;
  write_checkpoint_state(io, s);
  const auto back = read_checkpoint_state(io);
  EXPECT_EQ(back.chunks_completed, 4u);
  EXPECT_EQ(back.model.h1.sigma, s.model.h1.sigma);
  EXPECT_EQ(back.model.h0.sigma, s.model.h0.sigma);
  EXPECT_EQ(back.model.overlap, s.model.overlap);
  std::istringstream bad("chunks_completed=x\n");
  EXPECT_THROW(read_checkpoint_state(bad), ParseError);
}

TEST(ClusterFeature, ParseRoundTrip) {
  for (auto f : {ClusterFeature::kNone, ClusterFeature::kRedF, ClusterFeature::kEmbF})
    EXPECT_EQ(parse_cluster_feature(to_string(f)), f);
  EXPECT_THROW(parse_cluster_feature("pca"), ParameterError);
}

}  // namespace
}  // namespace tempalign

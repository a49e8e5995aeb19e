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

// Command-line front end: generate, run, run-chunked, evaluate, inspect-model.
//
// Every pipeline flag doubles as a key in the flat `key=value` file passed
// with --config; flags given on the command line win over file values.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <glog/logging.h>

#include "CLI11.hpp"
#include "tempalign/csv.hpp"
#include "tempalign/error.hpp"
#include "tempalign/pipeline.hpp"
#include "tempalign/synthgen.hpp"

namespace fs = std::filesystem;
using namespace tempalign;

namespace {

struct CommonFlags {
  std::uint64_t seed = 0;
  std::size_t workers = 22;
};

struct PipelineFlags {
  PipelineConfig config;
  std::string activity_mode = "both";
  std::string cluster_feature = "none";
  std::string clusterer = "kmeans";
  std::vector<std::string> catalog;
  std::string events_path;
  std::string truth_path;
  std::string seeds_path;
  std::string out_dir = ".";
  double tau = 0.0;

  PipelineConfig resolve(const CommonFlags& common) {
    PipelineConfig c = config;
    c.seed = common.seed;
    c.workers = common.workers;
    c.superpoint.workers = common.workers;
    c.align.sub_tasks = common.workers;
    c.activity_mode = parse_activity_mode(activity_mode);
    c.cluster_feature = parse_cluster_feature(cluster_feature);
    c.superpoint.clusterer = parse_clusterer(clusterer);
    if (tau > 0.0) c.embedding.tau = tau;
    c.validate();
    return c;
  }
};

// Flat config files carry no sections; route their keys to whichever
// subcommand was selected on the command line.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  explicit SubcommandConfig(const CLI::App* root) : root_(root) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    const auto subs = root_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items)
      if (item.parents.empty()) item.parents = {subs.front()->get_name()};
    return items;
  }

 private:
  const CLI::App* root_;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  app->add_option("--workers,-w", f.workers, "Worker count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_pipeline(CLI::App* app, PipelineFlags& f) {
  auto& c = f.config;
  app->add_option("--events", f.events_path, "Event CSV")->required();
  app->add_option("--truth", f.truth_path, "Truth CSV used for metrics");
  app->add_option("--seeds", f.seeds_path, "Known pairs used to fit the score model");
  app->add_option("--out-dir,--out_dir", f.out_dir, "Output directory")->capture_default_str();
  app->add_option("--catalog", f.catalog, "Channels present in the event file")->delimiter(',');
  app->add_option("--channel-a,--channel_a", c.channel_a)->capture_default_str();
  app->add_option("--channel-b,--channel_b", c.channel_b)->capture_default_str();
  app->add_option("--delta-t,--delta_t", c.delta_t, "Bin width in seconds")->capture_default_str();
  app->add_option("--activity-mode,--activity_mode", f.activity_mode,
                  "source_only | target_only | both")
      ->capture_default_str();
  app->add_option("--cluster-feature,--cluster_feature", f.cluster_feature,
                  "none | redf | embf")
      ->capture_default_str();
  app->add_option("--clusterer", f.clusterer, "kmeans | gmm")->capture_default_str();
  app->add_option("--k", c.superpoint.k, "Cluster count")->capture_default_str();
  app->add_option("--partition-size,--partition_size", c.superpoint.partition_size)
      ->capture_default_str();
  app->add_option("--gmm-samples,--gmm_samples", c.superpoint.gmm_samples_per_component)
      ->capture_default_str();
  app->add_option("--embed-dims,--embed_dims", c.embedding.dims)->capture_default_str();
  app->add_option("--embed-segments,--embed_segments", c.embedding.segments)
      ->capture_default_str();
  app->add_option("--tau", f.tau, "EmbF kernel width (default: mean distance)");
  app->add_option("--threshold", c.align.threshold, "Similarity threshold")
      ->capture_default_str();
  app->add_option("--top-n,--top_n", c.align.top_n)->capture_default_str();
  app->add_flag("--likelihood", c.likelihood.enabled, "Score matches");
  app->add_option("--train-fraction,--train_fraction", c.likelihood.train_fraction)
      ->capture_default_str();
  app->add_option("--min-train-pairs,--min_train_pairs", c.likelihood.min_train_pairs)
      ->capture_default_str();
  app->add_option("--null-draws,--null_draws", c.likelihood.null_draws,
                  "0 picks min(100, candidates)")
      ->capture_default_str();
  app->add_option("--score-threshold,--score_threshold", c.likelihood.score_threshold)
      ->capture_default_str();
  app->add_flag("--refit-per-chunk,--refit_per_chunk", c.likelihood.refit_per_chunk);
  app->add_option("--chunk-length,--chunk_length", c.chunk_length, "Seconds")
      ->capture_default_str();
  app->add_option("--chunk-origin,--chunk_origin", c.chunk_origin);
  app->add_option("--window-start,--window_start", c.window_start);
  app->add_option("--window-end,--window_end", c.window_end);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<Event> load_events(const PipelineFlags& f, const PipelineConfig& c) {
  std::vector<std::string> names = f.catalog;
  if (names.empty()) names = {c.channel_a, c.channel_b};
  try {
    auto in = open_in(f.events_path);
    return parse_events(in, ChannelCatalog(names));
  } catch (const std::exception& e) {
    throw StageError("ingest", f.events_path + ": " + e.what());
  }
}

std::optional<GroundTruth> load_truth(const std::string& path) {
  if (path.empty()) return std::nullopt;
  try {
    auto in = open_in(path);
    return read_truth(in);
  } catch (const std::exception& e) {
    throw StageError("ingest", path + ": " + e.what());
  }
}

void write_model(std::ostream& out, const HypothesisModel& m) {
  out << "sigma_h1=" << csv::format_double(m.h1.sigma) << '\n'
      << "sigma_h0=" << csv::format_double(m.h0.sigma) << '\n'
      << "overlap=" << csv::format_double(m.overlap) << '\n';
}

int cmd_run(PipelineFlags& f, const CommonFlags& common) {
  const PipelineConfig config = f.resolve(common);
  const auto events = load_events(f, config);
  const auto truth = load_truth(f.truth_path);
  const auto seeds = load_truth(f.seeds_path);
  SingleRunInputs in;
  in.events = events;
  in.truth = truth ? &*truth : nullptr;
  in.seeds = seeds ? &*seeds : (truth ? &*truth : nullptr);
  const SingleRunResult r = run_single(config, in);

  fs::create_directories(f.out_dir);
  const fs::path dir(f.out_dir);
  {
    auto out = open_out(dir / "matches.csv");
    write_matches(out, r.matches);
  }
  {
    auto out = open_out(dir / "timings.txt");
    for (const auto& t : r.timings)
      out << t.stage << '=' << csv::format_double(t.seconds) << '\n';
    out << "wall=" << csv::format_double(r.wall_seconds) << '\n';
  }
  if (r.model) {
    auto out = open_out(dir / "model.txt");
    write_model(out, *r.model);
    auto scores = open_out(dir / "scores.csv");
    write_score_table(scores, accumulate({}, r.scores));
  }
  if (r.report) {
    auto out = open_out(dir / "report.txt");
    write_report(out, *r.report);
    write_report(std::cout, *r.report);
  }
  std::cout << "matches=" << r.matches.matches.size() << '\n'
            << "comparisons=" << r.comparisons << '\n';
  return 0;
}

int cmd_run_chunked(PipelineFlags& f, const CommonFlags& common,
                    const std::string& checkpoint_dir, bool resume,
                    std::optional<std::size_t> stop_after) {
  PipelineConfig config = f.resolve(common);
  if (!config.likelihood.enabled) {
    LOG(INFO) << "run-chunked enables likelihood scoring";
    config.likelihood.enabled = true;
  }
  const auto events = load_events(f, config);
  const auto truth = load_truth(f.truth_path);
  auto seeds = load_truth(f.seeds_path);
  if (!seeds) {
    if (!truth) throw Error("run-chunked needs --seeds or --truth");
    seeds = truth;
  }
  const auto chunks = partition_chunks(events, config.chunk_length, config.chunk_origin);
  ChunkedOptions opts;
  if (!checkpoint_dir.empty()) opts.checkpoint_dir = checkpoint_dir;
  opts.resume = resume;
  opts.stop_after = stop_after;
  const ChunkedResult r =
      run_chunked(config, chunks, *seeds, truth ? &*truth : nullptr, opts);

  fs::create_directories(f.out_dir);
  const fs::path dir(f.out_dir);
  {
    auto out = open_out(dir / "matches.csv");
    write_matches(out, r.final_matches);
  }
  {
    auto out = open_out(dir / "scores.csv");
    write_score_table(out, r.table);
  }
  {
    auto out = open_out(dir / "model.txt");
    write_model(out, r.model);
  }
  if (truth && !r.cumulative.empty()) {
    auto out = open_out(dir / "chunk_reports.csv");
    out << "chunk,chunk_ma,chunk_fnma,chunk_bnma,cumulative_ma,cumulative_fnma,"
           "cumulative_bnma,cumulative_matched\n";
    for (std::size_t i = 0; i < r.cumulative.size(); ++i) {
      const auto& p = r.per_chunk[i];
      const auto& c = r.cumulative[i];
      out << r.resumed_from + i << ',' << csv::format_double(p.ma) << ','
          << csv::format_double(p.fnma) << ',' << csv::format_double(p.bnma) << ','
          << csv::format_double(c.ma) << ',' << csv::format_double(c.fnma) << ','
          << csv::format_double(c.bnma) << ',' << c.matched_count << '\n';
    }
    write_report(std::cout, build_report(r.final_matches, *truth));
  }
  std::cout << "chunks_completed=" << r.chunks_completed << " of " << chunks.size()
            << '\n'
            << "matches=" << r.final_matches.matches.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Temporal entity alignment across event channels"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Flat key=value configuration file");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));

  // generate
  CommonFlags gen_common;
  GeneratorConfig gen;
  std::vector<std::string> gen_channels{"a", "b"};
  double gen_days = 30;
  std::string gen_out = ".";
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
  add_common(gen_cmd, gen_common);
  gen_cmd->add_option("--out-dir,--out_dir", gen_out)->capture_default_str();
  gen_cmd->add_option("--shared", gen.n_shared)->capture_default_str();
  gen_cmd->add_option("--exclusive", gen.n_exclusive_per_channel,
                      "Exclusive entities per channel")
      ->capture_default_str();
  gen_cmd->add_option("--days", gen_days)->capture_default_str();
  gen_cmd->add_option("--rate-min,--rate_min", gen.rate_min, "Events per day")
      ->capture_default_str();
  gen_cmd->add_option("--rate-max,--rate_max", gen.rate_max)->capture_default_str();
  gen_cmd->add_option("--dropout", gen.dropout)->capture_default_str();
  gen_cmd->add_option("--jitter", gen.jitter_sigma, "Timestamp jitter sigma, seconds")
      ->capture_default_str();
  gen_cmd->add_option("--channels", gen_channels)->delimiter(',');

  // run / run-chunked
  CommonFlags run_common;
  PipelineFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Align one batch of events");
  add_common(run_cmd, run_common);
  add_pipeline(run_cmd, run_flags);

  CommonFlags chunk_common;
  PipelineFlags chunk_flags;
  std::string checkpoint_dir;
  bool resume = false;
  std::optional<std::size_t> stop_after;
  auto* chunk_cmd =
      app.add_subcommand("run-chunked", "Align chunk by chunk, accumulating scores");
  add_common(chunk_cmd, chunk_common);
  add_pipeline(chunk_cmd, chunk_flags);
  chunk_cmd->add_option("--checkpoint-dir,--checkpoint_dir", checkpoint_dir);
  chunk_cmd->add_flag("--resume", resume, "Continue from the checkpoint");
  chunk_cmd->add_option("--stop-after,--stop_after", stop_after,
                        "Stop once this many chunks are complete");

  // evaluate
  CommonFlags eval_common;
  std::string eval_matches, eval_truth, eval_counting = "entity";
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a match file against truth");
  add_common(eval_cmd, eval_common);
  eval_cmd->add_option("--matches", eval_matches)->required();
  eval_cmd->add_option("--truth", eval_truth)->required();
  eval_cmd->add_option("--miss-counting,--miss_counting", eval_counting, "entity | pair")
      ->check(CLI::IsMember({"entity", "pair"}))
      ->capture_default_str();

  // inspect-model
  CommonFlags model_common;
  PipelineFlags model_flags;
  std::string model_checkpoint;
  auto* model_cmd = app.add_subcommand(
      "inspect-model", "Print sigma_h1, sigma_h0 and overlap of a fitted model");
  add_common(model_cmd, model_common);
  model_cmd->add_option("--checkpoint-dir,--checkpoint_dir", model_checkpoint,
                        "Read the model from a chunked-run checkpoint");
  model_cmd->add_option("--events", model_flags.events_path, "Fit from events");
  model_cmd->add_option("--seeds", model_flags.seeds_path, "Known pairs to fit on");
  model_cmd->add_option("--catalog", model_flags.catalog)->delimiter(',');
  model_cmd->add_option("--channel-a,--channel_a", model_flags.config.channel_a);
  model_cmd->add_option("--channel-b,--channel_b", model_flags.config.channel_b);
  model_cmd->add_option("--delta-t,--delta_t", model_flags.config.delta_t);
  model_cmd->add_option("--train-fraction,--train_fraction",
                        model_flags.config.likelihood.train_fraction);
  model_cmd->add_option("--min-train-pairs,--min_train_pairs",
                        model_flags.config.likelihood.min_train_pairs);
  model_cmd->add_option("--null-draws,--null_draws", model_flags.config.likelihood.null_draws);

  CLI11_PARSE(app, argc, argv);

  const char* stage = "cli";
  try {
    if (*gen_cmd) {
      stage = "generate";
      gen.duration = static_cast<Timestamp>(gen_days * 86400.0);
      gen.channels = ChannelCatalog(gen_channels);
      gen.seed = gen_common.seed;
      const WorkerPool pool(gen_common.workers);
      const GeneratedData data = generate(gen, &pool);
      std::vector<Event> merged;
      for (const auto& ch : data.events) merged.insert(merged.end(), ch.begin(), ch.end());
      std::stable_sort(merged.begin(), merged.end(), [](const Event& x, const Event& y) {
        return x.timestamp < y.timestamp;
      });
      fs::create_directories(gen_out);
      auto ev = open_out(fs::path(gen_out) / "events.csv");
      write_events(ev, merged);
      for (std::size_t c = 0; c < data.events.size(); ++c) {
        auto per = open_out(fs::path(gen_out) / ("events_" + gen_channels[c] + ".csv"));
        write_events(per, data.events[c]);
      }
      auto tr = open_out(fs::path(gen_out) / "truth.csv");
      write_truth(tr, data.truth);
      std::cout << "events=" << merged.size() << "\ntruth_pairs=" << data.truth.size()
                << '\n';
      return 0;
    }
    if (*run_cmd) return cmd_run(run_flags, run_common);
    if (*chunk_cmd)
      return cmd_run_chunked(chunk_flags, chunk_common, checkpoint_dir, resume, stop_after);
    if (*eval_cmd) {
      stage = "evaluate";
      auto min = open_in(eval_matches);
      const MatchSet matches = read_matches(min);
      auto tin = open_in(eval_truth);
      const GroundTruth truth = read_truth(tin);
      write_report(std::cout, build_report(matches, truth,
                                           eval_counting == "pair" ? MissCounting::kPair
                                                                   : MissCounting::kEntity));
      return 0;
    }
    if (*model_cmd) {
      stage = "inspect-model";
      if (!model_checkpoint.empty()) {
        const fs::path path = fs::path(model_checkpoint) / "state.txt";
        auto in = open_in(path.string());
        const CheckpointState state = read_checkpoint_state(in);
        if (state.chunks_completed == 0) throw Error(path.string() + " holds no model");
        write_model(std::cout, state.model);
        return 0;
      }
      if (model_flags.events_path.empty() || model_flags.seeds_path.empty())
        throw Error("give --checkpoint-dir, or --events with --seeds");
      PipelineConfig config = model_flags.resolve(model_common);
      config.likelihood.enabled = true;
      const auto events = load_events(model_flags, config);
      const auto seeds = load_truth(model_flags.seeds_path);
      SingleRunInputs in;
      in.events = events;
      in.seeds = &*seeds;
      const SingleRunResult r = run_single(config, in);
      write_model(std::cout, *r.model);
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

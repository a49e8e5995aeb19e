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

#include "tempalign/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <glog/logging.h>

#include "tempalign/csv.hpp"
#include "tempalign/error.hpp"
#include "tempalign/random.hpp"

namespace tempalign {

namespace {

constexpr double kMinValue = 1e-9;
constexpr std::string_view kScoreTableHeader = "entity_a,entity_b,score,chunks";

// Composite Simpson rule with an even number of intervals.
template <typename F>
double simpson(F f, double lo, double hi, std::size_t intervals) {
  if (hi <= lo) return 0.0;
  if (intervals % 2) ++intervals;
  const double h = (hi - lo) / static_cast<double>(intervals);
  double s = f(lo) + f(hi);
  for (std::size_t i = 1; i < intervals; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(lo + h * static_cast<double>(i));
  return s * h / 3.0;
}

}  // namespace

double rayleigh_log_pdf(double x, double sigma) {
  const double s2 = sigma * sigma;
  return std::log(x) - std::log(s2) - x * x / (2.0 * s2);
}

double rayleigh_pdf(double x, double sigma) {
  if (x <= 0.0) return 0.0;
  const double s2 = sigma * sigma;
  return x / s2 * std::exp(-x * x / (2.0 * s2));
}

RayleighParams rayleigh_mle(std::span<const double> samples) {
  if (samples.empty()) throw ContractError("Rayleigh fit of an empty sample");
  if (samples.size() < 2)
    throw ContractError("Rayleigh fit needs at least 2 samples");
  double sum_sq = 0.0;
  for (double x : samples) {
    const double v = x > 0.0 ? x : kMinValue;
    sum_sq += v * v;
  }
  return {std::sqrt(sum_sq / (2.0 * static_cast<double>(samples.size())))};
}

void TrainingSet::validate() const {
  if (features_a.empty() || features_b.empty())
    throw ContractError("training subsets must be non-empty");
  if (ids_a.size() != features_a.size() || ids_b.size() != features_b.size())
    throw ContractError("training ids and features differ in length");
  for (const auto& [a, b] : true_pairs)
    if (std::find(ids_a.begin(), ids_a.end(), a) == ids_a.end() ||
        std::find(ids_b.begin(), ids_b.end(), b) == ids_b.end())
      throw ContractError("true pair (" + a + ", " + b +
                          ") is not inside the training subsets");
}

TrainingSet select_training_set(const ChannelFeatures& a,
                                const ChannelFeatures& b,
                                const GroundTruth& truth, double fraction,
                                std::size_t min_pairs, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ParameterError("training fraction must lie in (0, 1]");
  auto lookup = [](const ChannelFeatures& f, const std::string& id)
      -> const BinnedTimeSeries* {
    auto it = std::lower_bound(f.entities.begin(), f.entities.end(), id);
    if (it == f.entities.end() || *it != id) return nullptr;
    const auto& s = f.series[static_cast<std::size_t>(it - f.entities.begin())];
    return s.empty() ? nullptr : &s;
  };

  std::vector<PairKey> eligible;
  for (const auto& p : truth.pairs)
    if (lookup(a, p.first) && lookup(b, p.second)) eligible.push_back(p);
  if (eligible.size() < 2)
    throw ContractError("fewer than 2 seed pairs have activity in this range");

  std::mt19937_64 rng(derive_seed(seed, 0x747261696eULL));
  for (std::size_t i = eligible.size() - 1; i > 0; --i)
    std::swap(eligible[i], eligible[uniform_index(rng, i + 1)]);
  const auto wanted = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(eligible.size())));
  eligible.resize(std::min(eligible.size(), std::max(wanted, min_pairs)));

  std::set<std::string> ids_a, ids_b;
  for (const auto& [x, y] : eligible) {
    ids_a.insert(x);
    ids_b.insert(y);
  }
  TrainingSet train;
  for (const auto& id : ids_a) {
    train.ids_a.push_back(id);
    train.features_a.push_back(*lookup(a, id));
  }
  for (const auto& id : ids_b) {
    train.ids_b.push_back(id);
    train.features_b.push_back(*lookup(b, id));
  }
  for (const auto& p : truth.pairs)
    if (ids_a.count(p.first) && ids_b.count(p.second)) train.true_pairs.insert(p);
  return train;
}

RayleighParams fit_h1(const TrainingSet& train) {
  train.validate();
  std::vector<double> maxima;
  maxima.reserve(train.features_a.size());
  bool any = false;
  for (const auto& u : train.features_a) {
    double best = 0.0;
    for (const auto& v : train.features_b) best = std::max(best, cosine_sim(u, v));
    any = any || best > 0.0;
    maxima.push_back(best);
  }
  if (!any) throw NumericError("every aligned-hypothesis maximum is zero");
  return rayleigh_mle(maxima);
}

RayleighParams fit_h0(const TrainingSet& train, std::size_t null_draws,
                      std::uint64_t seed) {
  train.validate();
  std::vector<std::vector<std::size_t>> candidates(train.features_a.size());
  std::size_t fewest = SIZE_MAX;
  for (std::size_t i = 0; i < train.features_a.size(); ++i) {
    for (std::size_t j = 0; j < train.features_b.size(); ++j)
      if (!train.true_pairs.count({train.ids_a[i], train.ids_b[j]}))
        candidates[i].push_back(j);
    fewest = std::min(fewest, candidates[i].size());
  }
  const std::size_t m = null_draws == 0 ? std::min<std::size_t>(100, fewest) : null_draws;
  if (m == 0 || fewest < m)
    throw ContractError("need " + std::to_string(std::max<std::size_t>(m, 1)) +
                        " non-matching candidates per row, have " +
                        std::to_string(fewest));

  std::mt19937_64 rng(derive_seed(seed, 0x6e756c6cULL));
  std::vector<double> maxima;
  maxima.reserve(train.features_a.size());
  bool any = false;
  for (std::size_t i = 0; i < train.features_a.size(); ++i) {
    auto& pool = candidates[i];
    double best = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
      const std::size_t pick = d + uniform_index(rng, pool.size() - d);
      std::swap(pool[d], pool[pick]);
      best = std::max(best, cosine_sim(train.features_a[i], train.features_b[pool[d]]));
    }
    any = any || best > 0.0;
    maxima.push_back(best);
  }
  if (!any)
    LOG(WARNING) << "every null-hypothesis maximum is zero; the H0 fit is "
                    "degenerate";
  return rayleigh_mle(maxima);
}

double compute_overlap(double s1, double s0) {
  if (!(s1 > 0.0 && s0 > 0.0)) throw ContractError("Rayleigh sigma must be > 0");
  const double hi = 6.0 * std::max(s1, s0);
  auto integrand = [&](double x) {
    return std::min(rayleigh_pdf(x, s1), rayleigh_pdf(x, s0));
  };
  constexpr std::size_t kIntervals = 20000;
  if (s1 == s0) return simpson(integrand, 0.0, hi, kIntervals);
  // Split at the density crossing so each piece is smooth.
  const double lo_s = std::min(s1, s0), hi_s = std::max(s1, s0);
  const double cross = std::sqrt(4.0 * std::log(hi_s / lo_s) /
                                 (1.0 / (lo_s * lo_s) - 1.0 / (hi_s * hi_s)));
  const double mid = std::min(cross, hi);
  return std::clamp(simpson(integrand, 0.0, mid, kIntervals) +
                        simpson(integrand, mid, hi, kIntervals),
                    0.0, 1.0);
}

double compute_overlap(const HypothesisModel& model) {
  return compute_overlap(model.h1.sigma, model.h0.sigma);
}

HypothesisModel fit_model(const TrainingSet& train, std::size_t null_draws,
                          std::uint64_t seed) {
  HypothesisModel model;
  model.h1 = fit_h1(train);
  model.h0 = fit_h0(train, null_draws, seed);
  model.overlap = compute_overlap(model);
  if (model.h1.sigma <= model.h0.sigma)
    LOG(WARNING) << "aligned-hypothesis sigma " << model.h1.sigma
                 << " does not exceed null sigma " << model.h0.sigma;
  return model;
}

double score_pair(double similarity, const HypothesisModel& model) {
  const double s = std::clamp(similarity, kMinValue, 1.0);
  return rayleigh_log_pdf(s, model.h1.sigma) - rayleigh_log_pdf(s, model.h0.sigma);
}

ScoreMap score_matches(const MatchSet& matches, const HypothesisModel& model) {
  ScoreMap out;
  for (const auto& m : matches.matches) out[{m.a, m.b}] = score_pair(m.value, model);
  return out;
}

ScoreTable accumulate(ScoreTable previous, const ScoreMap& chunk_scores) {
  for (const auto& [pair, score] : chunk_scores) {
    auto& entry = previous.entries[pair];
    entry.score += score;
    entry.chunks += 1;
  }
  previous.chunk_count += 1;
  return previous;
}

MatchSet threshold_scores(const ScoreTable& table, double theta,
                          const std::string& channel_a,
                          const std::string& channel_b) {
  MatchSet out;
  out.channel_a = channel_a;
  out.channel_b = channel_b;
  out.kind = MatchSet::ValueKind::kScore;
  for (const auto& [pair, entry] : table.entries)
    if (entry.score >= theta) out.matches.push_back({pair.first, pair.second, entry.score});
  return out;
}

void write_score_table(std::ostream& out, const ScoreTable& table) {
  out << kScoreTableHeader << '\n';
  for (const auto& [pair, entry] : table.entries)
    out << pair.first << ',' << pair.second << ','
        << csv::format_double(entry.score) << ',' << entry.chunks << '\n';
}

ScoreTable read_score_table(std::istream& in, std::size_t chunk_count) {
  csv::expect_header(in, kScoreTableHeader);
  ScoreTable table;
  table.chunk_count = chunk_count;
  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError(line_no, "expected 4 fields");
    ScoreTable::Entry entry;
    std::uint64_t chunks = 0;
    if (f[0].empty() || f[1].empty()) throw ParseError(line_no, "empty entity id");
    if (!csv::parse_double(f[2], entry.score) || !std::isfinite(entry.score))
      throw ParseError(line_no, "bad score '" + std::string(f[2]) + "'");
    if (!csv::parse_uint(f[3], chunks))
      throw ParseError(line_no, "bad chunk count '" + std::string(f[3]) + "'");
    entry.chunks = chunks;
    if (!table.entries.emplace(PairKey{std::string(f[0]), std::string(f[1])}, entry)
             .second)
      throw ParseError(line_no, "duplicate pair");
  }
  return table;
}

}  // namespace tempalign

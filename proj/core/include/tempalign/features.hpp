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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tempalign/ingest.hpp"

namespace tempalign {

// Fixed-width time bins starting at t0. Bin i covers
// [t0 + i*delta_t, t0 + (i+1)*delta_t).
struct BinningSpec {
  Timestamp delta_t = 1;
  Timestamp t0 = 0;
  std::size_t t_bar = 0;  // number of bins

  // Smallest grid starting at t0 whose last bin contains `last`.
  static BinningSpec covering(Timestamp t0, Timestamp last, Timestamp delta_t);
  // Grid over [min timestamp, max timestamp] of `events`.
  static BinningSpec for_events(std::span<const Event> events,
                                Timestamp delta_t);
  // Grid over [chunk.start, chunk.end).
  static BinningSpec for_chunk(const ChunkSpec& chunk, Timestamp delta_t);

  std::size_t bin_of(Timestamp t) const {
    return static_cast<std::size_t>((t - t0) / delta_t);
  }

  bool operator==(const BinningSpec&) const = default;
};

struct BinCount {
  std::uint32_t bin = 0;
  std::uint32_t count = 0;

  bool operator==(const BinCount&) const = default;
};

// Sparse event-count vector. Zero bins are implicit.
class BinnedTimeSeries {
 public:
  BinnedTimeSeries() = default;
  // `entries` must be strictly increasing in bin with positive counts.
  // `first_offset` is the first event time minus t0, when known.
  explicit BinnedTimeSeries(std::vector<BinCount> entries,
                            std::optional<Timestamp> first_offset = {});

  // Builds from a dense count vector; zero entries are dropped.
  static BinnedTimeSeries from_dense(std::span<const std::uint32_t> counts);

  const std::vector<BinCount>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::uint64_t total() const { return total_; }
  std::uint64_t sum_squares() const { return sum_squares_; }
  double norm() const { return norm_; }
  std::optional<Timestamp> first_offset() const { return first_offset_; }

  std::vector<double> dense(std::size_t t_bar) const;

  bool operator==(const BinnedTimeSeries& o) const {
    return entries_ == o.entries_;
  }

 private:
  std::vector<BinCount> entries_;
  std::uint64_t total_ = 0;
  std::uint64_t sum_squares_ = 0;
  double norm_ = 0.0;
  std::optional<Timestamp> first_offset_;
};

// Binned series for every indexed entity of one channel; position i belongs
// to entities[i], which matches the channel's EntityIndex.
struct ChannelFeatures {
  std::string channel;
  BinningSpec spec;
  std::vector<std::string> entities;
  std::vector<BinnedTimeSeries> series;

  std::size_t size() const { return entities.size(); }
};

using FeatureSet = std::map<std::string, ChannelFeatures>;

// Single pass over `events`. Every event must fall inside `spec`.
FeatureSet bin_events(std::span<const Event> events, const BinningSpec& spec,
                      const EntityIndex& index, ActivityMode mode);

// Three scaled scalar summaries of a binned series, each in [0, 1].
struct ReducedFeature {
  double aec = 0.0;  // events per bin
  double dec = 0.0;  // mean absolute change between consecutive bins
  double ie = 0.0;   // first event offset from t0

  bool operator==(const ReducedFeature&) const = default;
};

// Unscaled components, exposed for tests and diagnostics.
ReducedFeature raw_reduced_feature(const BinnedTimeSeries& series,
                                   const BinningSpec& spec);

// Each component is divided by its maximum over `series` (0/0 -> 0).
// Throws ContractError when no series has an event.
std::vector<ReducedFeature> compute_redf(
    std::span<const BinnedTimeSeries* const> series, const BinningSpec& spec);
std::vector<ReducedFeature> compute_redf(
    std::span<const BinnedTimeSeries> series, const BinningSpec& spec);

// Sums bins into `segments` equal groups; returns the dense series unchanged
// when segments >= t_bar. Used to bound DTW cost on long spans.
std::vector<double> render_segments(const BinnedTimeSeries& series,
                                    std::size_t t_bar, std::size_t segments);

// Feature cache: one line per entity,
//   <entity> <channel> <bin>:<count> <bin>:<count> ...
void write_feature_cache(std::ostream& out, const FeatureSet& features);

struct CachedSeries {
  std::string entity;
  std::string channel;
  BinnedTimeSeries series;
};
std::vector<CachedSeries> read_feature_cache(std::istream& in);

}  // namespace tempalign

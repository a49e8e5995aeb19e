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

#include "tempalign/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tempalign/csv.hpp"
#include "tempalign/error.hpp"

namespace tempalign {

BinningSpec BinningSpec::covering(Timestamp t0, Timestamp last,
                                  Timestamp delta_t) {
  if (delta_t <= 0) throw ParameterError("delta_t must be > 0");
  if (last < t0) throw ContractError("binning span ends before it starts");
  BinningSpec spec;
  spec.delta_t = delta_t;
  spec.t0 = t0;
  spec.t_bar = static_cast<std::size_t>((last - t0) / delta_t) + 1;
  return spec;
}

BinningSpec BinningSpec::for_events(std::span<const Event> events,
                                    Timestamp delta_t) {
  if (events.empty()) throw ContractError("cannot bin an empty event list");
  Timestamp lo = std::numeric_limits<Timestamp>::max();
  Timestamp hi = std::numeric_limits<Timestamp>::min();
  for (const auto& e : events) {
    lo = std::min(lo, e.timestamp);
    hi = std::max(hi, e.timestamp);
  }
  return covering(lo, hi, delta_t);
}

BinningSpec BinningSpec::for_chunk(const ChunkSpec& chunk, Timestamp delta_t) {
  if (chunk.end <= chunk.start) throw ContractError("empty chunk span");
  return covering(chunk.start, chunk.end - 1, delta_t);
}

BinnedTimeSeries::BinnedTimeSeries(std::vector<BinCount> entries,
                                   std::optional<Timestamp> first_offset)
    : entries_(std::move(entries)), first_offset_(first_offset) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].count == 0)
      throw ContractError("binned series holds an explicit zero count");
    if (i > 0 && entries_[i].bin <= entries_[i - 1].bin)
      throw ContractError("binned series entries are not strictly increasing");
    total_ += entries_[i].count;
    sum_squares_ +=
        static_cast<std::uint64_t>(entries_[i].count) * entries_[i].count;
  }
  norm_ = std::sqrt(static_cast<double>(sum_squares_));
}

BinnedTimeSeries BinnedTimeSeries::from_dense(
    std::span<const std::uint32_t> counts) {
  std::vector<BinCount> entries;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0)
      entries.push_back({static_cast<std::uint32_t>(i), counts[i]});
  return BinnedTimeSeries(std::move(entries));
}

std::vector<double> BinnedTimeSeries::dense(std::size_t t_bar) const {
  std::vector<double> out(t_bar, 0.0);
  for (const auto& e : entries_) {
    if (e.bin >= t_bar) throw ContractError("bin index beyond t_bar");
    out[e.bin] = e.count;
  }
  return out;
}

FeatureSet bin_events(std::span<const Event> events, const BinningSpec& spec,
                      const EntityIndex& index, ActivityMode mode) {
  if (spec.delta_t <= 0) throw ParameterError("delta_t must be > 0");
  struct Acc {
    const EntityIndex::ChannelEntities* entities;
    std::vector<std::vector<std::uint32_t>> bins;
    std::vector<Timestamp> first;
  };
  std::map<std::string, Acc> acc;
  for (const auto& channel : index.channel_names()) {
    const auto& entities = index.channel(channel);
    acc[channel] = Acc{&entities,
                       std::vector<std::vector<std::uint32_t>>(entities.names.size()),
                       std::vector<Timestamp>(entities.names.size(),
                                              std::numeric_limits<Timestamp>::max())};
  }

  auto touch = [](Acc& a, const std::string& id, std::uint32_t bin,
                  Timestamp offset) {
    auto it = a.entities->lookup.find(id);
    if (it == a.entities->lookup.end())
      throw ContractError("entity '" + id + "' missing from the index");
    a.bins[it->second].push_back(bin);
    a.first[it->second] = std::min(a.first[it->second], offset);
  };

  for (const auto& e : events) {
    auto it = acc.find(e.channel);
    if (it == acc.end()) continue;
    if (e.timestamp < spec.t0)
      throw ContractError("event at " + std::to_string(e.timestamp) +
                          " precedes t0 " + std::to_string(spec.t0));
    const std::size_t bin = spec.bin_of(e.timestamp);
    if (bin >= spec.t_bar)
      throw ContractError("event at " + std::to_string(e.timestamp) +
                          " lies beyond the last bin");
    const Timestamp offset = e.timestamp - spec.t0;
    const auto b = static_cast<std::uint32_t>(bin);
    if (mode != ActivityMode::kTargetOnly) touch(it->second, e.source, b, offset);
    if (mode != ActivityMode::kSourceOnly) touch(it->second, e.target, b, offset);
  }

  FeatureSet out;
  for (auto& [channel, a] : acc) {
    ChannelFeatures cf;
    cf.channel = channel;
    cf.spec = spec;
    cf.entities = a.entities->names;
    cf.series.reserve(a.bins.size());
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
      auto& bins = a.bins[i];
      std::sort(bins.begin(), bins.end());
      std::vector<BinCount> entries;
      for (std::size_t j = 0; j < bins.size();) {
        std::size_t k = j;
        while (k < bins.size() && bins[k] == bins[j]) ++k;
        entries.push_back({bins[j], static_cast<std::uint32_t>(k - j)});
        j = k;
      }
      std::optional<Timestamp> first;
      if (!entries.empty()) first = a.first[i];
      cf.series.emplace_back(std::move(entries), first);
      std::vector<std::uint32_t>().swap(bins);
    }
    out.emplace(channel, std::move(cf));
  }
  return out;
}

ReducedFeature raw_reduced_feature(const BinnedTimeSeries& series,
                                   const BinningSpec& spec) {
  ReducedFeature raw;
  if (series.empty() || spec.t_bar == 0) return raw;
  raw.aec = static_cast<double>(series.total()) / static_cast<double>(spec.t_bar);

  // Mean |x[t+1] - x[t]| over all t_bar - 1 consecutive pairs; zero runs
  // between stored bins contribute a drop to 0 and a rise from 0.
  if (spec.t_bar > 1) {
    const auto& entries = series.entries();
    std::uint64_t delta = 0;
    if (entries.front().bin > 0) delta += entries.front().count;
    for (std::size_t j = 1; j < entries.size(); ++j) {
      const auto& prev = entries[j - 1];
      const auto& cur = entries[j];
      if (cur.bin == prev.bin + 1)
        delta += cur.count > prev.count ? cur.count - prev.count
                                        : prev.count - cur.count;
      else
        delta += static_cast<std::uint64_t>(prev.count) + cur.count;
    }
    if (entries.back().bin + 1 < spec.t_bar) delta += entries.back().count;
    raw.dec = static_cast<double>(delta) / static_cast<double>(spec.t_bar - 1);
  }

  const Timestamp first = series.first_offset().value_or(
      static_cast<Timestamp>(series.entries().front().bin) * spec.delta_t);
  raw.ie = static_cast<double>(first);
  return raw;
}

std::vector<ReducedFeature> compute_redf(
    std::span<const BinnedTimeSeries* const> series, const BinningSpec& spec) {
  std::vector<ReducedFeature> out;
  out.reserve(series.size());
  bool any = false;
  ReducedFeature max;
  for (const auto* s : series) {
    any = any || !s->empty();
    out.push_back(raw_reduced_feature(*s, spec));
    max.aec = std::max(max.aec, out.back().aec);
    max.dec = std::max(max.dec, out.back().dec);
    max.ie = std::max(max.ie, out.back().ie);
  }
  if (!any) throw ContractError("compute_redf needs at least one non-empty series");
  auto scale = [](double v, double m) { return m > 0.0 ? v / m : 0.0; };
  for (auto& f : out) {
    f.aec = scale(f.aec, max.aec);
    f.dec = scale(f.dec, max.dec);
    f.ie = scale(f.ie, max.ie);
  }
  return out;
}

std::vector<ReducedFeature> compute_redf(
    std::span<const BinnedTimeSeries> series, const BinningSpec& spec) {
  std::vector<const BinnedTimeSeries*> ptrs;
  ptrs.reserve(series.size());
  for (const auto& s : series) ptrs.push_back(&s);
  return compute_redf(std::span<const BinnedTimeSeries* const>(ptrs), spec);
}

std::vector<double> render_segments(const BinnedTimeSeries& series,
                                    std::size_t t_bar, std::size_t segments) {
  if (segments == 0) throw ParameterError("segments must be > 0");
  if (segments >= t_bar) return series.dense(t_bar);
  std::vector<double> out(segments, 0.0);
  for (const auto& e : series.entries()) {
    if (e.bin >= t_bar) throw ContractError("bin index beyond t_bar");
    const auto s = static_cast<std::size_t>(
        static_cast<unsigned __int128>(e.bin) * segments / t_bar);
    out[s] += e.count;
  }
  return out;
}

void write_feature_cache(std::ostream& out, const FeatureSet& features) {
  for (const auto& [channel, cf] : features) {
    for (std::size_t i = 0; i < cf.size(); ++i) {
      out << cf.entities[i] << ' ' << channel;
      for (const auto& e : cf.series[i].entries())
        out << ' ' << e.bin << ':' << e.count;
      out << '\n';
    }
  }
}

std::vector<CachedSeries> read_feature_cache(std::istream& in) {
  std::vector<CachedSeries> out;
  std::string line;
  std::size_t line_no = 0;
  while (csv::read_line(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    CachedSeries record;
    if (!(fields >> record.entity >> record.channel))
      throw ParseError(line_no, "expected entity and channel");
    std::vector<BinCount> entries;
    std::string token;
    while (fields >> token) {
      const auto colon = token.find(':');
      std::uint64_t bin = 0, count = 0;
      if (colon == std::string::npos ||
          !csv::parse_uint(std::string_view(token).substr(0, colon), bin) ||
          !csv::parse_uint(std::string_view(token).substr(colon + 1), count) ||
          count == 0 || bin > 0xffffffffu || count > 0xffffffffu)
        throw ParseError(line_no, "bad bin:count token '" + token + "'");
      if (!entries.empty() && bin <= entries.back().bin)
        throw ParseError(line_no, "bins not strictly increasing");
      entries.push_back({static_cast<std::uint32_t>(bin),
                         static_cast<std::uint32_t>(count)});
    }
    record.series = BinnedTimeSeries(std::move(entries));
    out.push_back(std::move(record));
  }
  return out;
}

}  // namespace tempalign

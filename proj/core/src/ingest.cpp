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

#include "tempalign/ingest.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include <glog/logging.h>

#include "tempalign/csv.hpp"
#include "tempalign/error.hpp"

namespace tempalign {

namespace {
constexpr std::string_view kEventHeader = "source,target,channel,timestamp";
}  // namespace

ChannelCatalog::ChannelCatalog(std::vector<std::string> channels)
    : channels_(std::move(channels)) {
  std::set<std::string> seen;
  for (const auto& c : channels_) {
    if (c.empty()) throw ValidationError("empty channel identifier");
    if (!seen.insert(c).second)
      throw ValidationError("duplicate channel identifier '" + c + "'");
  }
}

bool ChannelCatalog::contains(const std::string& channel) const {
  return std::find(channels_.begin(), channels_.end(), channel) !=
         channels_.end();
}

std::size_t ChannelCatalog::ordinal(const std::string& channel) const {
  auto it = std::find(channels_.begin(), channels_.end(), channel);
  if (it == channels_.end())
    throw ValidationError("unknown channel '" + channel + "'");
  return static_cast<std::size_t>(it - channels_.begin());
}

ActivityMode parse_activity_mode(const std::string& text) {
  if (text == "source_only") return ActivityMode::kSourceOnly;
  if (text == "target_only") return ActivityMode::kTargetOnly;
  if (text == "both") return ActivityMode::kBoth;
  throw ParameterError("unknown activity mode '" + text + "'");
}

std::string to_string(ActivityMode mode) {
  switch (mode) {
    case ActivityMode::kSourceOnly: return "source_only";
    case ActivityMode::kTargetOnly: return "target_only";
    case ActivityMode::kBoth: return "both";
  }
  return "both";
}

void EntityIndex::add_channel(const std::string& channel,
                              std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  ChannelEntities entities;
  entities.lookup.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    entities.lookup.emplace(ids[i], static_cast<std::uint32_t>(i));
  entities.names = std::move(ids);
  channels_[channel] = std::move(entities);
}

bool EntityIndex::has_channel(const std::string& channel) const {
  return channels_.count(channel) != 0;
}

const EntityIndex::ChannelEntities& EntityIndex::channel(
    const std::string& channel) const {
  auto it = channels_.find(channel);
  if (it == channels_.end())
    throw ContractError("channel '" + channel + "' is not indexed");
  return it->second;
}

std::size_t EntityIndex::count(const std::string& channel) const {
  auto it = channels_.find(channel);
  return it == channels_.end() ? 0 : it->second.names.size();
}

std::optional<std::uint32_t> EntityIndex::find(const std::string& channel,
                                               const std::string& entity) const {
  auto it = channels_.find(channel);
  if (it == channels_.end()) return std::nullopt;
  auto jt = it->second.lookup.find(entity);
  if (jt == it->second.lookup.end()) return std::nullopt;
  return jt->second;
}

std::vector<std::string> EntityIndex::channel_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : channels_) out.push_back(name);
  return out;
}

bool EntityIndex::operator==(const EntityIndex& other) const {
  if (channels_.size() != other.channels_.size()) return false;
  for (const auto& [name, entities] : channels_) {
    auto it = other.channels_.find(name);
    if (it == other.channels_.end() || it->second.names != entities.names)
      return false;
  }
  return true;
}

std::vector<Event> parse_events(std::istream& in,
                                const ChannelCatalog& catalog) {
  csv::expect_header(in, kEventHeader);
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(line_no, "blank line");
    const auto fields = csv::split(line);
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 fields, got " +
                                    std::to_string(fields.size()));
    Event e;
    e.source = std::string(fields[0]);
    e.target = std::string(fields[1]);
    e.channel = std::string(fields[2]);
    if (e.source.empty() || e.target.empty())
      throw ParseError(line_no, "empty entity identifier");
    if (!csv::parse_int(fields[3], e.timestamp) || e.timestamp < 0)
      throw ParseError(line_no, "timestamp '" + std::string(fields[3]) +
                                    "' is not a non-negative integer");
    if (!catalog.contains(e.channel))
      throw ValidationError("line " + std::to_string(line_no) +
                            ": unknown channel '" + e.channel + "'");
    events.push_back(std::move(e));
  }
  return events;
}

void write_events(std::ostream& out, std::span<const Event> events) {
  out << kEventHeader << '\n';
  for (const auto& e : events)
    out << e.source << ',' << e.target << ',' << e.channel << ','
        << e.timestamp << '\n';
}

std::vector<Event> filter_window(std::span<const Event> events,
                                 std::optional<Timestamp> start,
                                 std::optional<Timestamp> end,
                                 std::size_t* dropped) {
  std::vector<Event> kept;
  kept.reserve(events.size());
  std::size_t n_dropped = 0;
  for (const auto& e : events) {
    if ((start && e.timestamp < *start) || (end && e.timestamp >= *end)) {
      ++n_dropped;
      continue;
    }
    kept.push_back(e);
  }
  if (n_dropped > 0)
    LOG(WARNING) << "dropped " << n_dropped
                 << " events outside the run window";
  if (dropped) *dropped = n_dropped;
  return kept;
}

std::vector<Chunk> partition_chunks(std::span<const Event> events,
                                    Timestamp chunk_length,
                                    std::optional<Timestamp> origin) {
  if (chunk_length <= 0) throw ParameterError("chunk_length must be > 0");
  if (events.empty()) return {};
  Timestamp lo = std::numeric_limits<Timestamp>::max();
  Timestamp hi = std::numeric_limits<Timestamp>::min();
  for (const auto& e : events) {
    lo = std::min(lo, e.timestamp);
    hi = std::max(hi, e.timestamp);
  }
  const Timestamp t0 = origin.value_or(lo);
  if (lo < t0)
    throw ContractError("event at " + std::to_string(lo) +
                        " precedes chunk origin " + std::to_string(t0));
  const auto first = static_cast<std::size_t>((lo - t0) / chunk_length);
  const auto last = static_cast<std::size_t>((hi - t0) / chunk_length);
  std::vector<Chunk> chunks(last - first + 1);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto slot = static_cast<Timestamp>(first + i);
    chunks[i].spec = {t0 + slot * chunk_length,
                      t0 + (slot + 1) * chunk_length, i};
  }
  for (const auto& e : events) {
    const auto slot = static_cast<std::size_t>((e.timestamp - t0) / chunk_length);
    chunks[slot - first].events.push_back(e);
  }
  return chunks;
}

EntityIndex build_index(std::span<const Event> events,
                        const ChannelCatalog& catalog, ActivityMode mode) {
  std::map<std::string, std::vector<std::string>> ids;
  for (const auto& c : catalog.channels()) ids[c];
  for (const auto& e : events) {
    auto it = ids.find(e.channel);
    if (it == ids.end()) continue;
    if (mode != ActivityMode::kTargetOnly) it->second.push_back(e.source);
    if (mode != ActivityMode::kSourceOnly) it->second.push_back(e.target);
  }
  EntityIndex index;
  for (auto& [channel, list] : ids) index.add_channel(channel, std::move(list));
  return index;
}

}  // namespace tempalign

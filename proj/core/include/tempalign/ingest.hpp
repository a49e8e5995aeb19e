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
#include <unordered_map>
#include <vector>

namespace tempalign {

using Timestamp = std::int64_t;

// One directed information exchange between two entities on a channel.
struct Event {
  std::string source;
  std::string target;
  std::string channel;
  Timestamp timestamp = 0;

  bool operator==(const Event&) const = default;
};

// Ordered set of channel identifiers known to a run.
class ChannelCatalog {
 public:
  ChannelCatalog() = default;
  // Throws ValidationError on duplicate or empty identifiers.
  explicit ChannelCatalog(std::vector<std::string> channels);

  const std::vector<std::string>& channels() const { return channels_; }
  std::size_t size() const { return channels_.size(); }
  bool contains(const std::string& channel) const;
  // Position in the catalog; throws ValidationError when unknown.
  std::size_t ordinal(const std::string& channel) const;

 private:
  std::vector<std::string> channels_;
};

// Which side of an event counts towards an entity's activity.
enum class ActivityMode { kSourceOnly, kTargetOnly, kBoth };

ActivityMode parse_activity_mode(const std::string& text);
std::string to_string(ActivityMode mode);

struct ChunkSpec {
  Timestamp start = 0;  // inclusive
  Timestamp end = 0;    // exclusive
  std::size_t ordinal = 0;

  bool operator==(const ChunkSpec&) const = default;
};

struct Chunk {
  ChunkSpec spec;
  std::vector<Event> events;
};

// Per-channel bijection between entity identifiers and dense indices.
// Indices are assigned in lexicographic identifier order.
class EntityIndex {
 public:
  struct ChannelEntities {
    std::vector<std::string> names;  // index -> id, sorted
    std::unordered_map<std::string, std::uint32_t> lookup;
  };

  void add_channel(const std::string& channel, std::vector<std::string> ids);

  bool has_channel(const std::string& channel) const;
  const ChannelEntities& channel(const std::string& channel) const;
  std::size_t count(const std::string& channel) const;
  std::optional<std::uint32_t> find(const std::string& channel,
                                    const std::string& entity) const;
  std::vector<std::string> channel_names() const;

  bool operator==(const EntityIndex& other) const;

 private:
  std::map<std::string, ChannelEntities> channels_;
};

// Parses the event CSV. Every row must name a catalog channel.
//   header: source,target,channel,timestamp
std::vector<Event> parse_events(std::istream& in,
                                const ChannelCatalog& catalog);

void write_events(std::ostream& out, std::span<const Event> events);

// Keeps events with start <= timestamp < end. The number of dropped events is
// returned through `dropped` and logged as a warning when nonzero.
std::vector<Event> filter_window(std::span<const Event> events,
                                 std::optional<Timestamp> start,
                                 std::optional<Timestamp> end,
                                 std::size_t* dropped = nullptr);

// Splits events into consecutive [origin + i*len, origin + (i+1)*len) chunks.
// `origin` defaults to the earliest timestamp. Chunks between the first and
// last populated one are emitted even when empty. Event order inside a chunk
// follows input order.
std::vector<Chunk> partition_chunks(std::span<const Event> events,
                                    Timestamp chunk_length,
                                    std::optional<Timestamp> origin = {});

EntityIndex build_index(std::span<const Event> events,
                        const ChannelCatalog& catalog, ActivityMode mode);

}  // namespace tempalign

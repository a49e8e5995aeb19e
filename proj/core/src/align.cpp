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

#include "tempalign/align.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "tempalign/csv.hpp"
#include "tempalign/error.hpp"

namespace tempalign {

namespace {

constexpr std::string_view kSimilarityHeader =
    "entity_a,entity_b,channel_a,channel_b,similarity";
constexpr std::string_view kScoreHeader =
    "entity_a,entity_b,channel_a,channel_b,score";

bool pair_less(const Match& x, const Match& y) {
  return std::tie(x.a, x.b) < std::tie(y.a, y.b);
}

std::uint64_t sparse_dot(const BinnedTimeSeries& u, const BinnedTimeSeries& v) {
  const auto& short_side = u.entries().size() <= v.entries().size() ? u : v;
  const auto& long_side = &short_side == &u ? v : u;
  const auto& le = long_side.entries();
  std::uint64_t dot = 0;
  auto it = le.begin();
  for (const auto& e : short_side.entries()) {
    it = std::lower_bound(it, le.end(), e.bin,
                          [](const BinCount& x, std::uint32_t b) { return x.bin < b; });
    if (it == le.end()) break;
    if (it->bin == e.bin) dot += static_cast<std::uint64_t>(e.count) * it->count;
  }
  return dot;
}

// Cosine from an exact integer dot product; shared by the pairwise and the
// inverted-index paths so both produce bit-identical values.
double cosine_from_dot(std::uint64_t dot, double norm_u, double norm_v) {
  return static_cast<double>(dot) / (norm_u * norm_v);
}

// Destination entities of one cluster, inverted by bin.
struct Postings {
  std::vector<std::uint32_t> members;  // non-zero dst indices, ascending
  std::vector<std::uint32_t> bins;     // unique bins, ascending
  std::vector<std::size_t> offsets;    // bins.size() + 1
  std::vector<std::uint32_t> dst;
  std::vector<std::uint32_t> count;

  void build(const ChannelFeatures& features) {
    struct Item {
      std::uint32_t bin, dst, count;
    };
    std::vector<Item> items;
    for (auto v : members)
      for (const auto& e : features.series[v].entries())
        items.push_back({e.bin, v, e.count});
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
      return x.bin != y.bin ? x.bin < y.bin : x.dst < y.dst;
    });
    dst.reserve(items.size());
    count.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i == 0 || items[i].bin != items[i - 1].bin) {
        bins.push_back(items[i].bin);
        offsets.push_back(i);
      }
      dst.push_back(items[i].dst);
      count.push_back(items[i].count);
    }
    offsets.push_back(items.size());
  }
};

}  // namespace

bool MatchSet::contains(const std::string& a, const std::string& b) const {
  Match probe{a, b, 0.0};
  auto it = std::lower_bound(matches.begin(), matches.end(), probe, pair_less);
  return it != matches.end() && it->a == a && it->b == b;
}

void MatchSet::normalize() {
  std::sort(matches.begin(), matches.end(), pair_less);
  for (std::size_t i = 1; i < matches.size(); ++i)
    if (matches[i].a == matches[i - 1].a && matches[i].b == matches[i - 1].b)
      throw ContractError("duplicate match (" + matches[i].a + ", " +
                          matches[i].b + ")");
}

void AlignConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ParameterError("alignment threshold must lie in [0, 1]");
  if (top_n < 1) throw ParameterError("top_n must be >= 1");
  if (sub_tasks < 1) throw ParameterError("sub_tasks must be >= 1");
}

double cosine_sim(const BinnedTimeSeries& u, const BinnedTimeSeries& v) {
  if (u.empty() || v.empty()) return 0.0;
  return cosine_from_dot(sparse_dot(u, v), u.norm(), v.norm());
}

DirectionalResult align_directional(const ChannelFeatures& src,
                                    const ChannelFeatures& dst,
                                    const ClusterAssignment* assignment,
                                    const AlignConfig& config,
                                    const WorkerPool* pool) {
  config.validate();
  if (!(src.spec == dst.spec))
    throw ContractError("source and destination use different binning specs");

  auto cluster_of = [&](const ChannelFeatures& f, std::size_t i) -> std::uint32_t {
    return assignment ? assignment->label(f.channel, i) : 0u;
  };

  std::map<std::uint32_t, Postings> groups;
  for (std::size_t v = 0; v < dst.size(); ++v)
    if (!dst.series[v].empty())
      groups[cluster_of(dst, v)].members.push_back(static_cast<std::uint32_t>(v));
  for (auto& [_, g] : groups) g.build(dst);

  DirectionalResult result;
  result.matches.channel_a = src.channel;
  result.matches.channel_b = dst.channel;
  for (std::size_t u = 0; u < src.size(); ++u)
    if (src.series[u].empty()) result.zero_sources.push_back(src.entities[u]);

  struct ShardOut {
    std::vector<Match> matches;
    std::uint64_t comparisons = 0;
  };
  const WorkerPool local(1);
  const WorkerPool& workers = pool ? *pool : local;
  std::vector<ShardOut> shards(std::min(workers.size(), std::max<std::size_t>(1, src.size())));

  workers.for_each_shard(src.size(), [&](std::size_t begin, std::size_t end,
                                         std::size_t shard) {
    ShardOut& out = shards[shard];
    std::vector<std::uint64_t> acc(dst.size(), 0);
    std::vector<std::uint32_t> touched;
    struct Cand {
      double sim;
      std::uint32_t v;
    };
    std::vector<Cand> cands;
    for (std::size_t u = begin; u < end; ++u) {
      const auto& su = src.series[u];
      if (su.empty()) continue;
      auto git = groups.find(cluster_of(src, u));
      if (git == groups.end()) continue;
      const Postings& g = git->second;
      out.comparisons += g.members.size();

      touched.clear();
      auto bit = g.bins.begin();
      for (const auto& e : su.entries()) {
        bit = std::lower_bound(bit, g.bins.end(), e.bin);
        if (bit == g.bins.end()) break;
        if (*bit != e.bin) continue;
        const auto slot = static_cast<std::size_t>(bit - g.bins.begin());
        for (std::size_t p = g.offsets[slot]; p < g.offsets[slot + 1]; ++p) {
          if (acc[g.dst[p]] == 0) touched.push_back(g.dst[p]);
          acc[g.dst[p]] += static_cast<std::uint64_t>(e.count) * g.count[p];
        }
      }

      cands.clear();
      for (auto v : touched) {
        const double sim = cosine_from_dot(acc[v], su.norm(), dst.series[v].norm());
        acc[v] = 0;
        if (sim >= config.threshold) cands.push_back({sim, v});
      }
      auto better = [](const Cand& x, const Cand& y) {
        return x.sim != y.sim ? x.sim > y.sim : x.v < y.v;
      };
      if (cands.size() > config.top_n) {
        std::partial_sort(cands.begin(),
                          cands.begin() + static_cast<std::ptrdiff_t>(config.top_n),
                          cands.end(), better);
        cands.resize(config.top_n);
      }
      // Untouched members have similarity exactly 0; they only qualify when
      // the threshold admits 0.
      if (cands.size() < config.top_n && config.threshold <= 0.0) {
        std::sort(touched.begin(), touched.end());
        for (auto v : g.members) {
          if (cands.size() >= config.top_n) break;
          if (!std::binary_search(touched.begin(), touched.end(), v))
            cands.push_back({0.0, v});
        }
      }
      std::sort(cands.begin(), cands.end(),
                [](const Cand& x, const Cand& y) { return x.v < y.v; });
      for (const auto& c : cands)
        out.matches.push_back({src.entities[u], dst.entities[c.v], c.sim});
    }
  });

  for (auto& s : shards) {
    result.comparisons += s.comparisons;
    for (auto& m : s.matches) result.matches.matches.push_back(std::move(m));
  }
  result.matches.normalize();
  return result;
}

MatchSet reconcile(const MatchSet& forward, const MatchSet& backward) {
  if (forward.channel_a != backward.channel_b ||
      forward.channel_b != backward.channel_a)
    throw ContractError("backward match set is not the reverse orientation of "
                        "the forward set");
  std::vector<PairKey> reversed;
  reversed.reserve(backward.size());
  for (const auto& m : backward.matches) reversed.emplace_back(m.b, m.a);
  std::sort(reversed.begin(), reversed.end());

  MatchSet out;
  out.channel_a = forward.channel_a;
  out.channel_b = forward.channel_b;
  for (const auto& m : forward.matches)
    if (std::binary_search(reversed.begin(), reversed.end(), PairKey{m.a, m.b}))
      out.matches.push_back(m);
  out.normalize();
  return out;
}

void write_matches(std::ostream& out, const MatchSet& matches) {
  out << (matches.kind == MatchSet::ValueKind::kScore ? kScoreHeader
                                                      : kSimilarityHeader)
      << '\n';
  for (const auto& m : matches.matches)
    out << m.a << ',' << m.b << ',' << matches.channel_a << ','
        << matches.channel_b << ',' << csv::format_double(m.value) << '\n';
}

MatchSet read_matches(std::istream& in) {
  MatchSet out;
  std::string line;
  if (!csv::read_line(in, line)) throw ParseError(1, "missing header");
  if (line == kScoreHeader)
    out.kind = MatchSet::ValueKind::kScore;
  else if (line != kSimilarityHeader)
    throw ParseError(1, "unexpected match header '" + line + "'");
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    const auto f = csv::split(line);
    if (f.size() != 5) throw ParseError(line_no, "expected 5 fields");
    Match m{std::string(f[0]), std::string(f[1]), 0.0};
    if (m.a.empty() || m.b.empty()) throw ParseError(line_no, "empty entity id");
    if (!csv::parse_double(f[4], m.value))
      throw ParseError(line_no, "bad value '" + std::string(f[4]) + "'");
    if (out.matches.empty() && out.channel_a.empty()) {
      out.channel_a = std::string(f[2]);
      out.channel_b = std::string(f[3]);
    } else if (f[2] != out.channel_a || f[3] != out.channel_b) {
      throw ParseError(line_no, "channel pair differs from earlier rows");
    }
    out.matches.push_back(std::move(m));
  }
  out.normalize();
  return out;
}

}  // namespace tempalign

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

#include "tempalign/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "tempalign/error.hpp"
#include "tempalign/random.hpp"

namespace tempalign {

void GeneratorConfig::validate() const {
  if (channels.size() != 2)
    throw ParameterError("the generator needs exactly 2 channels");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw ParameterError("dropout must lie in [0, 1)");
  if (!(rate_min > 0.0 && rate_max >= rate_min))
    throw ParameterError("rates must be positive with rate_min <= rate_max");
  if (duration <= 0) throw ParameterError("duration must be > 0");
  if (!(jitter_sigma >= 0.0)) throw ParameterError("jitter_sigma must be >= 0");
}

namespace {

std::string padded(std::size_t value, std::size_t width) {
  std::string digits = std::to_string(value);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

}  // namespace

GeneratedData generate(const GeneratorConfig& config, const WorkerPool* pool) {
  config.validate();
  const std::size_t shared = config.n_shared;
  const std::size_t excl = config.n_exclusive_per_channel;
  const std::size_t latent = shared + 2 * excl;
  const std::size_t per_channel = shared + excl;
  const auto& channels = config.channels.channels();

  // Latent l lives in channel c at local slot l (shared) or shared + offset
  // (exclusive); each channel shuffles its slots into public names.
  auto in_channel = [&](std::size_t l, std::size_t c) {
    if (l < shared) return true;
    return (l - shared) / excl == c;
  };
  auto local_slot = [&](std::size_t l) {
    return l < shared ? l : shared + (l - shared) % excl;
  };
  const std::size_t width = std::to_string(per_channel > 0 ? per_channel - 1 : 0).size();
  std::vector<std::vector<std::string>> names(2);
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<std::size_t> perm(per_channel);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(derive_seed(config.seed, 0x6e616d6573ULL, c));
    for (std::size_t i = per_channel; i > 1; --i)
      std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    names[c].resize(per_channel);
    for (std::size_t s = 0; s < per_channel; ++s)
      names[c][s] = channels[c] + "-" + padded(perm[s], width);
  }

  const double seconds_per_day = 86400.0;
  const auto duration = static_cast<double>(config.duration);
  std::vector<std::array<std::vector<Event>, 2>> produced(latent);

  auto emit = [&](std::size_t l) {
    std::mt19937_64 rng(derive_seed(config.seed, 0x656e74ULL, l));
    const double rate =
        config.rate_min + (config.rate_max - config.rate_min) * unit_double(rng);
    const std::uint64_t n = poisson(rng, rate * duration / seconds_per_day);

    // Targets: other entities present in every channel the source is in.
    const bool is_shared = l < shared;
    const std::size_t own_channel = is_shared ? 0 : (l - shared) / excl;
    const std::size_t pool_size = is_shared ? shared - 1 : per_channel - 1;
    if (pool_size == 0) return;
    auto target_of = [&](std::uint64_t draw) -> std::size_t {
      // Index into the source's target pool, skipping the source itself.
      if (is_shared) return draw >= l ? draw + 1 : draw;
      const std::size_t self = local_slot(l);
      const std::size_t slot = draw >= self ? draw + 1 : draw;
      return slot < shared ? slot : shared + own_channel * excl + (slot - shared);
    };

    for (std::uint64_t e = 0; e < n; ++e) {
      const auto t = static_cast<Timestamp>(std::floor(unit_double(rng) * duration));
      const std::size_t target = target_of(uniform_index(rng, pool_size));
      for (std::size_t c = 0; c < 2; ++c) {
        if (!in_channel(l, c)) continue;
        if (config.dropout > 0.0 && unit_double(rng) < config.dropout) continue;
        Timestamp tc = t;
        if (config.jitter_sigma > 0.0)
          tc = std::clamp<Timestamp>(
              std::llround(static_cast<double>(t) +
                           config.jitter_sigma * standard_normal(rng)),
              0, config.duration);
        produced[l][c].push_back({names[c][local_slot(l)],
                                  names[c][local_slot(target)], channels[c], tc});
      }
    }
  };
  if (pool)
    pool->for_each(latent, emit);
  else
    for (std::size_t l = 0; l < latent; ++l) emit(l);

  GeneratedData out;
  out.events.resize(2);
  for (std::size_t c = 0; c < 2; ++c) {
    std::size_t total = 0;
    for (const auto& p : produced) total += p[c].size();
    out.events[c].reserve(total);
    for (auto& p : produced) {
      for (auto& e : p[c]) out.events[c].push_back(std::move(e));
      std::vector<Event>().swap(p[c]);
    }
    std::stable_sort(out.events[c].begin(), out.events[c].end(),
                     [](const Event& x, const Event& y) {
                       return x.timestamp < y.timestamp;
                     });
  }
  for (std::size_t l = 0; l < shared; ++l)
    out.truth.pairs.emplace(names[0][l], names[1][l]);
  return out;
}

}  // namespace tempalign

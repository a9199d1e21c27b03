/*
 * Copyright (c) 2026, The culsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "culsim/workload.hpp"

#include <array>
#include <random>

#include "culsim/types.hpp"

namespace culsim {
namespace {

constexpr std::array<std::pair<WorkloadKind, std::string_view>, 6> kNames{{
    {WorkloadKind::Private, "private"},
    {WorkloadKind::ProducerConsumer, "producer_consumer"},
    {WorkloadKind::Migratory, "migratory"},
    {WorkloadKind::FalseSharing, "false_sharing"},
    {WorkloadKind::ReadMostly, "read_mostly"},
    {WorkloadKind::UniformRandom, "uniform_random"},
}};

// Plain modulo and bit slicing keep the streams identical across standard
// libraries, which is not guaranteed for the <random> distributions.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  std::uint64_t below(std::uint64_t n) { return rng_() % n; }
  bool chance(double p) {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::string_view to_string(WorkloadKind k) {
  for (const auto& [kind, name] : kNames)
    if (kind == k) return name;
  return "?";
}

std::optional<WorkloadKind> parse_workload_kind(std::string_view text) {
  for (const auto& [kind, name] : kNames)
    if (name == text) return kind;
  return std::nullopt;
}

Streams gen_workload(const WorkloadSpec& spec, const SimConfig& config) {
  config.validate();
  if (spec.working_set == 0) throw ConfigError("working_set", "must be at least 1");
  if (!(spec.sharing_fraction >= 0.0 && spec.sharing_fraction <= 1.0))
    throw ConfigError("sharing_fraction", "must lie in [0, 1]");

  const std::uint32_t n = config.n_cores;
  const std::uint32_t wpl = config.words_per_line();
  const std::uint32_t ls = config.line_size;
  const std::uint64_t ws = spec.working_set;

  Streams streams(n);
  for (CoreId c = 0; c < n; ++c) {
    Draw draw(spec.seed ^ (0x9E3779B97F4A7C15ull * (c + 1)));
    Stream& s = streams[c];
    s.reserve(spec.ops_per_core);
    auto value = [&] {
      return static_cast<Word>(((c + 1u) << 24) | (s.size() & 0xFFFFFFu));
    };
    auto shared = [&](std::uint64_t line, std::uint32_t word) {
      return kSharedBase + line * ls + word * kWordBytes;
    };
    // A shared word's writer is its global word index modulo the core count.
    auto owns = [&](std::uint64_t line, std::uint32_t word) {
      return (line * wpl + word) % n == c;
    };

    while (s.size() < spec.ops_per_core) {
      const bool to_shared =
          spec.kind != WorkloadKind::Private && draw.chance(spec.sharing_fraction);
      if (!to_shared) {
        const Addr a = kPrivateBase + c * kPrivateStride + draw.below(ws) * ls +
                       draw.below(wpl) * kWordBytes;
        s.push_back(draw.chance(0.5) ? CoreOp::store(a, value()) : CoreOp::load(a));
        continue;
      }

      const std::uint64_t line = draw.below(ws);
      switch (spec.kind) {
        case WorkloadKind::Private:
          break;
        case WorkloadKind::ProducerConsumer: {
          // Each line has one producer; everyone else only consumes it.
          const Addr a = shared(line, static_cast<std::uint32_t>(draw.below(wpl)));
          s.push_back(line % n == c ? CoreOp::store(a, value()) : CoreOp::load(a));
          break;
        }
        case WorkloadKind::Migratory: {
          // Read-modify-write of a word this core owns, so the whole line
          // travels between cores.
          std::uint32_t mine = wpl;
          for (std::uint32_t w = 0, k = static_cast<std::uint32_t>(draw.below(wpl)); w < wpl;
               ++w) {
            const std::uint32_t cand = (k + w) % wpl;
            if (owns(line, cand)) {
              mine = cand;
              break;
            }
          }
          if (mine == wpl) {
            s.push_back(CoreOp::load(shared(line, 0)));
            break;
          }
          s.push_back(CoreOp::load(shared(line, mine)));
          if (s.size() < spec.ops_per_core) s.push_back(CoreOp::store(shared(line, mine), value()));
          break;
        }
        case WorkloadKind::FalseSharing: {
          const std::uint32_t word = c % wpl;
          const Addr a = shared(line, word);
          s.push_back(c < wpl && draw.chance(0.5) ? CoreOp::store(a, value()) : CoreOp::load(a));
          break;
        }
        case WorkloadKind::ReadMostly:
        case WorkloadKind::UniformRandom: {
          const auto word = static_cast<std::uint32_t>(draw.below(wpl));
          const double p = spec.kind == WorkloadKind::ReadMostly ? 0.1 : 0.5;
          const Addr a = shared(line, word);
          s.push_back(owns(line, word) && draw.chance(p) ? CoreOp::store(a, value())
                                                         : CoreOp::load(a));
          break;
        }
      }
    }
  }
  return streams;
}

}  // namespace culsim

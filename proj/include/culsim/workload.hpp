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

#ifndef CULSIM_WORKLOAD_HPP_
#define CULSIM_WORKLOAD_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "culsim/config.hpp"
#include "culsim/sim.hpp"

namespace culsim {

enum class WorkloadKind {
  Private,
  ProducerConsumer,
  Migratory,
  FalseSharing,
  ReadMostly,
  UniformRandom,
};

std::string_view to_string(WorkloadKind k);
std::optional<WorkloadKind> parse_workload_kind(std::string_view text);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::ProducerConsumer;
  std::uint64_t ops_per_core = 1000;
  /// Lines in the shared region, and in each core's private region.
  std::uint32_t working_set = 16;
  /// Fraction of operations aimed at the shared region (ignored by Private).
  double sharing_fraction = 0.5;
  std::uint64_t seed = 1;
};

inline constexpr Addr kSharedBase = 0x100000;
inline constexpr Addr kPrivateBase = 0x200000;
inline constexpr Addr kPrivateStride = 0x100000;

/**
 * Deterministic synthetic streams. Every word is written by at most one
 * core, so the final memory image does not depend on how cores interleave
 * and two models can be compared image for image.
 */
Streams gen_workload(const WorkloadSpec& spec, const SimConfig& config);

}  // namespace culsim

#endif  // CULSIM_WORKLOAD_HPP_

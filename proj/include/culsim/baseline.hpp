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

#ifndef CULSIM_BASELINE_HPP_
#define CULSIM_BASELINE_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "culsim/config.hpp"
#include "culsim/memory.hpp"
#include "culsim/sim.hpp"
#include "culsim/view.hpp"

namespace culsim {

enum class DirState { Uncached, SharedBy, OwnedBy };
std::string_view to_string(DirState s);

struct DirectoryEntry {
  DirState state = DirState::Uncached;
  std::set<CoreId> sharers;  // SharedBy only
  CoreId owner = 0;          // OwnedBy only

  friend bool operator==(const DirectoryEntry&, const DirectoryEntry&) = default;
};

enum class HopKind {
  ToDirectory,
  MemoryRead,
  ForwardToOwner,
  OwnerToRequester,
  Invalidate,
  InvalidateAck,
  DataReturn,
};
std::string_view to_string(HopKind h);

struct Hop {
  HopKind kind;
  std::optional<CoreId> peer;

  friend bool operator==(const Hop&, const Hop&) = default;
};

struct DirRequest {
  CoreId requester = 0;
  bool store = false;
  /// The requester already holds the line Shared (an upgrade).
  bool upgrade = false;
};

struct DirAccess {
  std::vector<Hop> hops;
  DirectoryEntry next;
  /// Line state granted to the requester (MESI: no Owned).
  LineState granted = LineState::Invalid;
  /// Cores whose copies are invalidated, and the owner that downgrades.
  std::vector<CoreId> invalidated;
  std::optional<CoreId> downgraded;

  /// Cycles from the request leaving the L1 to the data arriving back.
  /// Invalidations to several sharers travel in parallel and overlap with a
  /// memory read when both are needed.
  Cycle latency(const Latencies& lat) const;
};

/// The hop sequence of one load or store miss (or upgrade) at the home node.
DirAccess dir_access(const DirectoryEntry& entry, const DirRequest& req);

/**
 * MESI directory co-located with memory. Each miss is resolved atomically
 * when it is processed at the directory; per-line busy windows serialize
 * same-line misses and the directory accepts one request per cycle.
 * Instruction fetches bypass the directory and are never invalidated.
 */
class DirectorySimulation {
 public:
  explicit DirectorySimulation(const SimConfig& config, bool check = false);

  void preload(const std::vector<MemoryImageEntry>& image);
  SimStats run(Streams streams);

  CoherenceView snapshot_invariants() const;
  MemoryImage final_memory_image() const;
  const DirectoryEntry& entry(Addr line) const;
  LineState state_of(CoreId core, Addr address) const;

 private:
  struct Line {
    Addr tag = 0;
    LineState state = LineState::Invalid;
    LineData data;
  };
  struct PrivateCache {
    std::vector<Line> lines;
    std::vector<std::uint32_t> rr;
  };

  Line* find(PrivateCache& c, Addr line, bool include_invalid);
  const Line* find(const PrivateCache& c, Addr line) const;
  Line& allocate(CoreId core, PrivateCache& c, Addr line, bool coherent);
  LineData read_memory(Addr line);
  void write_memory(Addr line, const LineData& data);
  Cycle access(CoreId core, const CoreOp& op, Cycle at);
  void note_store(Addr address, Word value);
  void monitor(Cycle at) const;

  SimConfig config_;
  bool check_;
  std::uint32_t sets_;
  std::vector<PrivateCache> dcache_;
  std::vector<PrivateCache> icache_;
  std::map<Addr, DirectoryEntry> dir_;
  std::map<Addr, LineData> memory_;
  std::map<Addr, LineData> ghost_;
  std::map<Addr, Cycle> busy_until_;
  Cycle dir_free_ = 0;
  std::vector<CoreStats> stats_;
  std::uint64_t mem_reads_ = 0;
  std::uint64_t mem_writes_ = 0;
  std::uint64_t busy_stalls_ = 0;
  std::uint64_t forwards_ = 0;
  std::uint64_t miss_latency_total_ = 0;
  std::uint64_t completed_misses_ = 0;
};

}  // namespace culsim

#endif  // CULSIM_BASELINE_HPP_

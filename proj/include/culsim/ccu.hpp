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

#ifndef CULSIM_CCU_HPP_
#define CULSIM_CCU_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "culsim/channel.hpp"
#include "culsim/config.hpp"
#include "culsim/memory.hpp"
#include "culsim/protocol.hpp"

namespace culsim {

using TxnId = std::uint64_t;

/// ACE DEMUX decision.
enum class Path { Coherent, Memory };
Path route(CoherentKind kind);

/**
 * ACE MUX arbitration. `arrival[c]` holds the cycle at which core c's
 * request arrived, or nullopt when c has nothing pending. The earliest
 * arrival wins; equal arrivals go round-robin starting after
 * `last_granted`. At least one entry must be set.
 */
CoreId mux_grant(std::span<const std::optional<Cycle>> arrival, CoreId last_granted);

/// Lines with a coherent transaction past the decoder.
class CollisionTable {
 public:
  enum class Verdict { Proceed, Stall };

  CollisionTable(std::size_t capacity, std::uint32_t line_size)
      : capacity_(capacity), line_size_(line_size) {}

  /// Stall on a same-line hit or when full; otherwise inserts the line.
  Verdict check(Addr address);
  void remove(Addr address);
  bool contains(Addr address) const { return lines_.count(line(address)) != 0; }
  std::size_t size() const { return lines_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::vector<Addr> lines() const { return {lines_.begin(), lines_.end()}; }

 private:
  Addr line(Addr a) const { return a & ~static_cast<Addr>(line_size_ - 1); }
  std::size_t capacity_;
  std::uint32_t line_size_;
  std::set<Addr> lines_;
};

/// Snooped caches for a transaction: every agent except the initiator;
/// instruction caches only when they are coherent.
std::vector<AgentId> snoop_targets(AgentId initiator, std::uint32_t n_cores,
                                   bool coherent_ifetch);

struct Aggregate {
  bool any_is_shared = false;
  bool any_pass_dirty = false;
  std::optional<AgentId> data_source;  // nullopt: memory (or no data)
};

/// Folds one CR into the aggregate; the first data-carrying responder wins.
void collect_cr(Aggregate& agg, const SnoopResponse& resp, AgentId from);

enum class TxnPhase { Decoded, Snooping, Responding, MemAccess, Done };
std::string_view to_string(TxnPhase p);

struct CcuTransaction {
  TxnId id = 0;
  AgentId initiator;
  CoherentKind kind = CoherentKind::ReadShared;
  Addr line = 0;
  TxnPhase phase = TxnPhase::Decoded;
  unsigned cr_pending = 0;
  Aggregate aggregate;
  std::optional<LineData> buffered;  // first responder's CD burst
  Cycle accepted_at = 0;
};

struct WritebackEntry {
  Addr line = 0;
  LineData data;
};

/// Snooped write-backs awaiting the memory port.
class WritebackFifo {
 public:
  explicit WritebackFifo(std::size_t depth) : depth_(depth) {}
  bool full() const { return q_.size() >= depth_; }
  bool empty() const { return q_.empty(); }
  void push(WritebackEntry e) { q_.push_back(std::move(e)); }
  WritebackEntry pop() {
    WritebackEntry e = std::move(q_.front());
    q_.pop_front();
    return e;
  }
  bool holds(Addr line) const;
  std::size_t size() const { return q_.size(); }

 private:
  std::size_t depth_;
  std::deque<WritebackEntry> q_;
};

struct CcuStats {
  std::uint64_t collision_stalls = 0;
  std::uint64_t cache_to_cache_transfers = 0;
  std::uint64_t transactions = 0;
  std::uint64_t snooped_writebacks = 0;
  std::uint64_t max_inflight = 0;
};

/**
 * The cache coherency unit: demux, round-robin mux, decoder with collision
 * checker, snoop unit and memory unit. Stages talk through bounded queues so
 * that a new snoop can be issued while earlier responses are outstanding.
 */
class Ccu {
 public:
  Ccu(const SimConfig& config, Fabric& fabric, MemoryModel& memory);

  void tick(Cycle now);
  /// Memory completions delivered after the memory model's tick.
  void on_memory(std::vector<MemoryModel::Completion> completions);

  bool idle() const;
  /// Number of transactions that reached Done (progress indicator).
  std::uint64_t completed() const { return completed_; }
  const CcuStats& stats() const { return stats_; }

  std::vector<Addr> inflight_lines() const;
  /// Whether dirty data for `line` is travelling anywhere outside the caches.
  bool dirty_in_flight(Addr line) const;
  const std::map<TxnId, CcuTransaction>& transactions() const { return txns_; }
  const CollisionTable& collisions() const { return collisions_; }
  std::string dump() const;

 private:
  struct Pending {
    CoherentRequest req;
    Cycle arrival;
  };
  struct NoncoherentRead {
    CoreId core;
    Addr line;
  };

  void accept_acks(Cycle now);
  void accept_memory(Cycle now);
  void snoop_unit(Cycle now);
  void resolve(Cycle now);
  void decode(Cycle now);
  void demux_and_mux(Cycle now);
  void memory_unit(Cycle now);
  bool pending_write(Addr line) const;
  void respond(CcuTransaction& txn, Cycle now, std::optional<LineData> data,
               bool from_cache);

  SimConfig config_;
  Fabric* fabric_;
  MemoryModel* memory_;

  std::vector<std::optional<Pending>> pending_;  // per core, awaiting the mux
  CoreId last_granted_;
  Channel<CoherentRequest> decode_q_;
  CollisionTable collisions_;
  std::map<TxnId, CcuTransaction> txns_;
  std::vector<std::deque<TxnId>> cr_order_;  // per agent
  WritebackFifo wb_fifo_;
  std::deque<CoherentRequest> noncoherent_;
  std::deque<TxnId> mem_reads_;
  std::map<MemoryModel::Tag, NoncoherentRead> nc_reads_;
  std::vector<MemoryModel::Completion> mem_done_;
  TxnId next_id_ = 1;
  MemoryModel::Tag next_nc_tag_ = 1ull << 62;
  std::uint64_t completed_ = 0;
  CcuStats stats_;
};

}  // namespace culsim

#endif  // CULSIM_CCU_HPP_

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

#ifndef CULSIM_CACHE_HPP_
#define CULSIM_CACHE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "culsim/channel.hpp"
#include "culsim/config.hpp"
#include "culsim/protocol.hpp"
#include "culsim/types.hpp"

namespace culsim {

struct CacheLine {
  Addr tag = 0;
  LineState state = LineState::Invalid;
  LineData data;

  LineFlags flags() const { return flags_of_state(state); }
};

/// Requesters of the data cache SRAM port, highest priority first.
enum class RequesterId : std::uint8_t {
  MissHandler,
  SnoopCtrl,
  Ptw,
  LoadUnit,
  Accelerator,
  StoreUnit,
};

inline constexpr std::array<RequesterId, 6> kAllRequesters = {
    RequesterId::MissHandler, RequesterId::SnoopCtrl,   RequesterId::Ptw,
    RequesterId::LoadUnit,    RequesterId::Accelerator, RequesterId::StoreUnit};

std::string_view to_string(RequesterId r);

/// Static-priority arbitration of the single SRAM port. `requests` must be
/// non-empty.
RequesterId arbitrate(std::span<const RequesterId> requests);
inline RequesterId arbitrate(std::initializer_list<RequesterId> requests) {
  return arbitrate(std::span<const RequesterId>(requests.begin(), requests.size()));
}

RequesterId requester_for(Port port);

struct MissStatus {
  Addr address = 0;  // line address
  CoherentKind kind = CoherentKind::ReadShared;
  bool unique_sought = false;
  bool snoop_read_seen = false;
  bool invalidated_by_snoop = false;
  Cycle waiting_since = 0;
  CoreOp op;
  CacheKind target = CacheKind::Data;
  unsigned retries = 0;
};

struct Served {
  std::optional<Word> value;  // loads and fetches
};
struct NeedsMiss {
  CoherentKind kind;
};
using AccessResult = std::variant<Served, NeedsMiss>;

struct LookupHit {
  std::uint32_t way;
  const CacheLine* line;
};

struct Writeback {
  Addr line = 0;
  LineData data;
};

struct SnoopResult {
  SnoopResponse resp;
  std::optional<SnoopData> data;
  /// Raised toward controllers seeking unique access on the snooped line.
  bool snoop_read_signal = false;
  /// Raised with the address whenever a valid line was invalidated.
  std::optional<Addr> invalidation_signal;
};

struct MissOutcome {
  bool retried = false;
  CoherentKind retry_kind = CoherentKind::ReadUnique;
  LineState installed = LineState::Invalid;
  std::optional<Word> value;
  /// Eviction victim, or dirty data dropped by a retry.
  std::optional<Writeback> writeback;
};

/**
 * Functional model of one core's L1: the write-back data cache, the
 * instruction cache and the miss handler's single MissStatus. Every state
 * change is driven by a ProtocolTable so the verifier can substitute broken
 * variants.
 *
 * Timing lives in CacheSubsystem; this class performs one SRAM access per
 * call.
 */
class Cache {
 public:
  Cache(const SimConfig& config, const ProtocolTable& table,
        bool retry_rule = true);

  std::optional<LookupHit> lookup(Addr address,
                                  CacheKind kind = CacheKind::Data) const;
  LineState state_of(Addr address, CacheKind kind = CacheKind::Data) const;

  /// Serves a core request or records the miss it needs.
  AccessResult core_access(const CoreOp& op, Cycle now);
  AccessResult ifetch(Addr address, Cycle now);

  SnoopResult handle_snoop(const SnoopRequest& req,
                           CacheKind kind = CacheKind::Data);

  /// Installs the response of the outstanding miss, or re-arms the miss when
  /// a unique fetch was interfered with by a snoop.
  MissOutcome miss_complete(const ReadResponse& resp);

  /// Makes room in a full set. Returns the write-back for a dirty victim.
  std::optional<Writeback> evict(std::uint32_t set,
                                 CacheKind kind = CacheKind::Data);

  /// Places a line directly, bypassing the protocol. Test setup only.
  void install(Addr address, LineState state, LineData data,
               CacheKind kind = CacheKind::Data);

  const std::optional<MissStatus>& miss() const { return miss_; }
  bool coherent_ifetch() const { return coherent_ifetch_; }

  std::uint32_t set_of(Addr address) const;
  std::uint32_t sets() const { return sets_; }
  std::uint32_t ways() const { return ways_; }

  /// Stores performed since the last call, as (byte address, value).
  std::vector<std::pair<Addr, Word>> take_commits();

  template <class F>
  void for_each_valid(CacheKind kind, F&& f) const {
    const auto& arr = array(kind);
    for (std::uint32_t s = 0; s < sets_; ++s)
      for (std::uint32_t w = 0; w < ways_; ++w) {
        const CacheLine& l = arr[s * ways_ + w];
        if (is_valid(l.state)) f(line_address(s, l.tag), l);
      }
  }

 private:
  std::vector<CacheLine>& array(CacheKind k) { return k == CacheKind::Data ? data_ : instr_; }
  const std::vector<CacheLine>& array(CacheKind k) const {
    return k == CacheKind::Data ? data_ : instr_;
  }
  std::vector<std::uint32_t>& rr(CacheKind k) {
    return k == CacheKind::Data ? rr_data_ : rr_instr_;
  }
  void check_range(Addr address) const;
  Addr tag_of(Addr address) const;
  Addr line_address(std::uint32_t set, Addr tag) const;
  CacheLine* find(Addr address, CacheKind kind, bool include_invalid);
  CacheLine& allocate(Addr line, CacheKind kind, std::optional<Writeback>& victim);
  Word perform(CacheLine& line, const CoreOp& op);

  SimConfig config_;
  const ProtocolTable* table_;
  bool retry_rule_;
  bool coherent_ifetch_;
  std::uint32_t sets_;
  std::uint32_t ways_;
  std::vector<CacheLine> data_;
  std::vector<CacheLine> instr_;
  std::vector<std::uint32_t> rr_data_;
  std::vector<std::uint32_t> rr_instr_;
  std::optional<MissStatus> miss_;
  std::vector<std::pair<Addr, Word>> commits_;
};

struct CoreStats {
  std::uint64_t ops = 0;
  std::uint64_t loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t ifetches = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t snoop_served_misses = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t retries = 0;
  std::uint64_t stall_cycles = 0;

  friend bool operator==(const CoreStats&, const CoreStats&) = default;
};

/// One retired core operation.
struct OpRecord {
  std::size_t index = 0;
  CoreOp op;
  std::optional<Word> value;
  Cycle issued = 0;
  Cycle completed = 0;
  bool hit = false;
};

/**
 * The timed cache subsystem of one core: port controllers, snoop controller
 * and miss handler contending for the SRAM port each cycle, wired to the CCU
 * through the Fabric.
 */
class CacheSubsystem {
 public:
  CacheSubsystem(CoreId core, const SimConfig& config, const ProtocolTable& table,
                 bool retry_rule, Fabric& fabric);

  bool can_issue() const { return !op_.has_value(); }
  void issue(const CoreOp& op, std::size_t index, Cycle now);

  void tick(Cycle now);

  /// Operations retired since the last call.
  std::vector<OpRecord> take_retired();
  bool idle() const { return !op_ && !cache_.miss(); }

  Cache& cache() { return cache_; }
  const Cache& cache() const { return cache_; }
  const CoreStats& stats() const { return stats_; }
  std::uint64_t miss_latency_total() const { return miss_latency_total_; }
  std::uint64_t completed_misses() const { return completed_misses_; }
  /// Largest number of SRAM accesses granted in any single cycle.
  unsigned max_port_accesses() const { return max_port_accesses_; }
  std::string dump() const;

 private:
  enum class Phase { WaitingPort, Busy, Miss };
  struct PendingOp {
    CoreOp op;
    std::size_t index;
    Cycle issued;
    Phase phase;
    Cycle done_at;
    bool hit;
    std::optional<Word> value;
  };

  unsigned tick_data(Cycle now);
  void tick_instr(Cycle now);
  void access(Cycle now);
  void retire(Cycle now, std::optional<Word> value);
  void finish_miss(Cycle now);

  CoreId core_;
  SimConfig config_;
  Fabric* fabric_;
  Cache cache_;
  std::optional<PendingOp> op_;
  std::vector<OpRecord> retired_;
  CoreStats stats_;
  std::uint64_t miss_latency_total_ = 0;
  std::uint64_t completed_misses_ = 0;
  unsigned max_port_accesses_ = 0;
};

}  // namespace culsim

#endif  // CULSIM_CACHE_HPP_

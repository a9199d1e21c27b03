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

#ifndef CULSIM_SIM_HPP_
#define CULSIM_SIM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "culsim/cache.hpp"
#include "culsim/ccu.hpp"
#include "culsim/channel.hpp"
#include "culsim/config.hpp"
#include "culsim/memory.hpp"
#include "culsim/protocol.hpp"
#include "culsim/view.hpp"

namespace culsim {

/// One core's program, executed in order with one operation in flight.
using Stream = std::vector<CoreOp>;
using Streams = std::vector<Stream>;

struct SimStats {
  std::vector<CoreStats> cores;
  Cycle cycles = 0;
  std::uint64_t mem_reads = 0;
  std::uint64_t mem_writes = 0;
  std::uint64_t ccu_collision_stalls = 0;
  std::uint64_t cache_to_cache_transfers = 0;
  std::uint64_t miss_latency_total = 0;
  std::uint64_t completed_misses = 0;

  /// Mean cycles from miss to install, rounded half-up to two decimals.
  std::string avg_miss_latency() const;

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

/// Final memory contents with every dirty cached line folded in; all-zero
/// lines are omitted.
using MemoryImage = std::map<Addr, LineData>;

struct SimOptions {
  bool retry_rule = true;
  /// Run the coherence monitors every cycle; violations throw
  /// InvariantViolation.
  bool check = false;
};

class Simulation {
 public:
  explicit Simulation(const SimConfig& config,
                      const ProtocolTable& table = ProtocolTable::canonical(),
                      SimOptions options = {});
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void preload(const std::vector<MemoryImageEntry>& image);
  void load(Streams streams);

  void step();
  bool done() const;
  /// Loads `streams` and steps until everything has drained.
  SimStats run(Streams streams);

  Cycle cycle() const { return now_; }
  SimStats stats() const;
  CoherenceView snapshot_invariants() const;
  MemoryImage final_memory_image() const;
  const std::vector<std::vector<OpRecord>>& records() const { return records_; }

  const SimConfig& config() const { return config_; }
  CacheSubsystem& core(CoreId c) { return *cores_.at(c); }
  const CacheSubsystem& core(CoreId c) const { return *cores_.at(c); }
  const Ccu& ccu() const { return *ccu_; }
  const MemoryModel& memory() const { return memory_; }
  std::string dump() const;

 private:
  void monitor();
  void note_commits();

  SimConfig config_;
  ProtocolTable table_;
  SimOptions options_;
  MemoryModel memory_;
  Fabric fabric_;
  std::vector<std::unique_ptr<CacheSubsystem>> cores_;
  std::unique_ptr<Ccu> ccu_;

  Streams streams_;
  std::vector<std::size_t> next_;
  std::vector<std::vector<OpRecord>> records_;
  Cycle now_ = 0;
  Cycle last_progress_ = 0;
  std::uint64_t last_completed_ = 0;
  std::map<Addr, LineData> ghost_;
};

std::string format_hundredths(std::uint64_t numerator, std::uint64_t denominator);

/// FNV-1a over the image, for compact equality reporting.
std::uint64_t image_hash(const MemoryImage& image);

}  // namespace culsim

#endif  // CULSIM_SIM_HPP_

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

#ifndef CULSIM_CONFIG_HPP_
#define CULSIM_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "culsim/types.hpp"

namespace culsim {

struct Latencies {
  Cycle l1_hit = 1;
  /// One traversal of the snoop channels (AC out, or CR/CD back).
  Cycle snoop_hop = 4;
  /// Each CCU stage and the local request/response channels of the L1s.
  Cycle ccu_stage = 1;
  Cycle mem_read = 20;
  Cycle mem_write = 20;
};

struct FifoDepths {
  std::size_t writeback = 4;
  std::size_t handshake = 2;
  std::size_t collision_capacity = 8;
};

struct SimConfig {
  std::uint32_t n_cores = 2;
  std::uint32_t line_size = 16;
  std::uint32_t cache_size = 8192;
  std::uint32_t ways = 4;
  std::uint32_t address_bits = 32;
  bool coherent_ifetch = false;
  Latencies latencies;
  FifoDepths fifo_depths;
  std::uint64_t seed = 1;
  /// Cycles without any completed operation or transaction before the run
  /// is declared deadlocked.
  Cycle watchdog_cycles = 100000;
  /// Debug: the CCU decodes a transaction only when no other is in flight.
  bool serialize = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  std::uint32_t sets() const { return cache_size / (ways * line_size); }
  std::uint32_t words_per_line() const {
    return line_size / static_cast<std::uint32_t>(kWordBytes);
  }
  Addr line_of(Addr a) const { return a & ~static_cast<Addr>(line_size - 1); }
  std::size_t word_of(Addr a) const { return (a & (line_size - 1)) / kWordBytes; }
};

/// Applies `key = value` lines. Unknown keys, malformed values and
/// duplicate keys are errors.
SimConfig parse_config(std::string_view text, const std::string& source,
                       SimConfig base = {});
SimConfig load_config(const std::string& path, SimConfig base = {});

/// Sets one dotted field by name; throws ConfigError for unknown keys.
void set_config_field(SimConfig& config, std::string_view key,
                      std::string_view value);

/// All field names accepted by set_config_field, in declaration order.
std::vector<std::string> config_field_names();

}  // namespace culsim

#endif  // CULSIM_CONFIG_HPP_

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

#ifndef CULSIM_MEMORY_HPP_
#define CULSIM_MEMORY_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "culsim/types.hpp"

namespace culsim {

/**
 * Flat backing store standing in for the shared LLC and DRAM. Every access
 * takes a fixed latency; accesses to the same line complete in issue order
 * even when the read and write latencies differ.
 */
class MemoryModel {
 public:
  using Tag = std::uint64_t;

  struct Completion {
    Tag tag = 0;
    bool is_read = false;
    Addr line = 0;
    LineData data;  // reads only
    Cycle at = 0;
  };

  MemoryModel(std::uint32_t line_size, Cycle read_latency, Cycle write_latency);

  /// Returns the cycle at which the data will be available.
  Cycle read(Addr line, Cycle now, Tag tag = 0);
  Cycle write(Addr line, LineData data, Cycle now, Tag tag = 0);

  /// Retires all operations due at or before `now`, oldest first.
  std::vector<Completion> tick(Cycle now);

  /// Committed contents; unwritten lines read as zero.
  LineData peek(Addr line) const;
  void poke(Addr line, LineData data);
  void load_bytes(Addr address, const std::vector<std::uint8_t>& bytes);

  bool write_pending(Addr line) const;
  bool idle() const { return inflight_.empty(); }

  std::uint64_t reads() const { return reads_; }
  std::uint64_t writes() const { return writes_; }
  std::uint64_t reads_of(Addr line) const;
  const std::map<Addr, LineData>& contents() const { return contents_; }
  std::uint32_t line_size() const { return line_size_; }

 private:
  struct Pending {
    Cycle done;
    std::uint64_t seq;
    Tag tag;
    bool is_read;
    Addr line;
    LineData data;
  };

  void check_aligned(Addr line) const;
  Cycle schedule(Addr line, Cycle ready);

  std::uint32_t line_size_;
  Cycle read_latency_;
  Cycle write_latency_;
  std::map<Addr, LineData> contents_;
  std::deque<Pending> inflight_;
  std::unordered_map<Addr, Cycle> last_done_;
  std::unordered_map<Addr, std::uint64_t> reads_by_line_;
  std::uint64_t seq_ = 0;
  std::uint64_t reads_ = 0;
  std::uint64_t writes_ = 0;
};

struct MemoryImageEntry {
  Addr address = 0;
  std::vector<std::uint8_t> bytes;
};

/// `<addr_hex> <byte_hex...>` per line; `#` comments and blank lines skipped.
std::vector<MemoryImageEntry> parse_memory_image(std::string_view text,
                                                 const std::string& source);
std::vector<MemoryImageEntry> load_memory_image(const std::string& path);

}  // namespace culsim

#endif  // CULSIM_MEMORY_HPP_

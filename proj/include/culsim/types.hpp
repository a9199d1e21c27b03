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

#ifndef CULSIM_TYPES_HPP_
#define CULSIM_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace culsim {

using Addr = std::uint64_t;
using Word = std::uint32_t;
using Cycle = std::uint64_t;
using CoreId = std::uint32_t;

inline constexpr std::size_t kWordBytes = sizeof(Word);
inline constexpr std::size_t kMaxCores = 4;

/// Contents of one cache line, one entry per 32-bit word.
using LineData = std::vector<Word>;

/// Each core owns a data cache and an instruction cache; both are snoop
/// targets (the latter only with coherent instruction fetch enabled).
enum class CacheKind : std::uint8_t { Data = 0, Instr = 1 };

struct AgentId {
  CoreId core = 0;
  CacheKind kind = CacheKind::Data;

  std::size_t index() const {
    return static_cast<std::size_t>(core) * 2 + static_cast<std::size_t>(kind);
  }
  static AgentId from_index(std::size_t i) {
    return {static_cast<CoreId>(i / 2), static_cast<CacheKind>(i % 2)};
  }
  friend bool operator==(const AgentId&, const AgentId&) = default;
};

std::string to_string(AgentId agent);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A message arrived that the receiving block cannot attribute, e.g. a snoop
/// response with no outstanding snoop request.
class ProtocolFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeadlockError : public std::runtime_error {
 public:
  DeadlockError(const std::string& what, std::string dump)
      : std::runtime_error(what), dump_(std::move(dump)) {}
  const std::string& dump() const { return dump_; }

 private:
  std::string dump_;
};

class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(Cycle cycle, const std::string& what)
      : std::runtime_error("cycle " + std::to_string(cycle) + ": " + what),
        cycle_(cycle) {}
  Cycle cycle() const { return cycle_; }

 private:
  Cycle cycle_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace culsim

#endif  // CULSIM_TYPES_HPP_

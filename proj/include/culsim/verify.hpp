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

#ifndef CULSIM_VERIFY_HPP_
#define CULSIM_VERIFY_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "culsim/protocol.hpp"
#include "culsim/types.hpp"

namespace culsim {

// ---------------------------------------------------------------------------
// Explorer

inline constexpr unsigned kExplorerLines = 2;
inline constexpr unsigned kExplorerWords = 2;
inline constexpr unsigned kExplorerRegs = 6;
inline constexpr unsigned kExplorerMaxOps = 6;
/// Bytes per abstract line; litmus addresses are mapped onto this geometry.
inline constexpr unsigned kExplorerLineBytes = kExplorerWords * kWordBytes;

struct AbstractOp {
  OpKind kind = OpKind::Load;
  std::uint8_t line = 0;
  std::uint8_t word = 0;
  std::uint8_t value = 0;  // Store
  std::uint8_t reg = 0;    // Load / IFetch

  static AbstractOp load(unsigned line, unsigned word, unsigned reg);
  static AbstractOp store(unsigned line, unsigned word, unsigned value);
  static AbstractOp ifetch(unsigned line, unsigned word, unsigned reg);
};
using AbstractProgram = std::vector<AbstractOp>;

using AbstractMemory = std::array<std::array<std::uint8_t, kExplorerWords>, kExplorerLines>;

struct ExploreConfig {
  unsigned n_cores = 2;
  bool coherent_ifetch = false;
  /// Lines each cache can hold; 1 forces evictions.
  unsigned capacity = 2;
  bool retry_rule = true;
  ProtocolTable table = ProtocolTable::canonical();
  AbstractMemory init{};
  std::uint64_t state_budget = 4'000'000;
  unsigned workers = 1;
  /// Stop expanding once a violation has been found; traces stay minimal.
  bool stop_on_violation = true;
};

struct Coverage {
  std::array<std::array<bool, 3>, 5> initiator{};  // [state][op]
  std::array<std::array<bool, 4>, 5> snoopee{};    // [state][snoop]

  void merge(const Coverage& other);
  friend bool operator==(const Coverage&, const Coverage&) = default;
};

/// Final register file and memory (dirty cached lines folded in).
struct Observation {
  std::array<std::uint8_t, kExplorerRegs> regs{};
  AbstractMemory memory{};

  friend auto operator<=>(const Observation&, const Observation&) = default;
};

struct Counterexample {
  std::string message;
  std::vector<std::string> trace;  // numbered atomic steps
  Coverage implicated;             // table entries exercised along the trace

  std::string format() const;
};

struct ExploreResult {
  std::uint64_t reachable_states = 0;
  std::uint64_t transitions = 0;
  bool exhaustive = true;
  std::vector<Counterexample> violations;
  std::set<Observation> outcomes;
  Coverage coverage;
};

using ForbiddenPredicate = std::function<std::optional<std::string>(const Observation&)>;

/**
 * Breadth-first enumeration of every interleaving of the untimed protocol
 * abstraction: issue, decode, snoop delivery, CR collection, completion and
 * write-back drain are atomic steps; the CR slots and the write-back FIFO
 * have depth 1. Results do not depend on `workers`.
 */
ExploreResult explore(const std::vector<AbstractProgram>& programs,
                      const ExploreConfig& config,
                      const ForbiddenPredicate& forbidden = nullptr);

// ---------------------------------------------------------------------------
// Litmus

struct LitmusAtom {
  bool is_memory = false;
  std::uint8_t index = 0;  // register, or byte address for memory
  std::uint8_t value = 0;
};
/// Conjunction of atoms; a test forbids any of its conditions.
using LitmusCondition = std::vector<LitmusAtom>;

struct LitmusTest {
  std::string name;
  std::vector<AbstractProgram> programs;
  std::vector<std::string> reg_names;
  AbstractMemory init{};
  std::vector<LitmusCondition> forbidden;
  std::vector<std::uint8_t> addresses;  // byte addresses the programs touch

  unsigned n_cores() const { return static_cast<unsigned>(programs.size()); }
  bool matches(const Observation& o, const LitmusCondition& c) const;
  std::string format(const Observation& o) const;
};

struct LitmusResult {
  std::set<std::string> observed_outcomes;
  bool forbidden_seen = false;
  std::vector<Counterexample> counterexamples;
  std::uint64_t states = 0;
  bool exhaustive = true;
  /// Invariant violations or deadlocks, independent of the forbidden set.
  bool protocol_violation = false;
};

/// CoRR, CoWW, CoRW1 and CoWR for `n_cores` cores.
std::vector<LitmusTest> builtin_litmus(unsigned n_cores);
/// core0 stores to a code line and a flag; core1 reads the flag and fetches
/// the code line before and after.
LitmusTest smc_litmus();

std::vector<LitmusTest> parse_litmus(std::string_view text, const std::string& source);
std::vector<LitmusTest> load_litmus(const std::string& path);

LitmusResult run_litmus(const LitmusTest& test, ExploreConfig config);

// ---------------------------------------------------------------------------
// Oracle tables and mutations

enum class PairStatus { Certified, Vacuous, Uncovered, Failed };
std::string_view to_string(PairStatus s);

struct OracleCase {
  std::string name;
  unsigned n_cores = 2;
  bool coherent_ifetch = false;
  unsigned capacity = 2;
  std::vector<AbstractProgram> programs;
};

/// The generator programs whose interleavings cover every table entry.
std::vector<OracleCase> oracle_cases();

struct OracleReport {
  std::array<std::array<PairStatus, 3>, 5> initiator{};
  std::array<std::array<PairStatus, 4>, 5> snoopee{};
  std::vector<std::pair<std::string, Counterexample>> failures;  // case name
  std::uint64_t states = 0;
  bool exhaustive = true;

  bool all_certified() const;
  std::string format() const;
};

OracleReport oracle_tables(const ProtocolTable& table = ProtocolTable::canonical(),
                           bool retry_rule = true, unsigned workers = 1,
                           std::uint64_t state_budget = 4'000'000);

/**
 * A deliberate corruption of the protocol. Syntax:
 *   snoopee:<St>:<Snoop>:<St|keep|nodata|nopass>
 *   initiator:<St>:<Op>:hit|<Kind>
 *   completion:<Kind>:exclusive|shared|ignorepassdirty
 *   retry:off
 */
struct Mutation {
  std::string text;
  ProtocolTable table = ProtocolTable::canonical();
  bool retry_rule = true;
};

/// Throws std::invalid_argument on malformed text.
Mutation parse_mutation(std::string_view text);
std::vector<std::string> shipped_mutations();

struct MutationVerdict {
  std::string mutation;
  bool caught = false;
  std::string caught_by;  // oracle case or litmus test name
  std::optional<Counterexample> witness;
};

MutationVerdict check_mutation(const Mutation& m, unsigned workers = 1,
                               std::uint64_t state_budget = 4'000'000);

}  // namespace culsim

#endif  // CULSIM_VERIFY_HPP_

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

#ifndef CULSIM_PROTOCOL_HPP_
#define CULSIM_PROTOCOL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "culsim/types.hpp"

namespace culsim {

/**
 * MOESI line state. The ACE names are provided as aliases; the two
 * vocabularies describe the same five states.
 */
enum class LineState : std::uint8_t { Modified, Owned, Exclusive, Shared, Invalid };

inline constexpr LineState kUniqueDirty = LineState::Modified;
inline constexpr LineState kSharedDirty = LineState::Owned;
inline constexpr LineState kUniqueClean = LineState::Exclusive;
inline constexpr LineState kSharedClean = LineState::Shared;

inline constexpr std::array<LineState, 5> kAllStates = {
    LineState::Modified, LineState::Owned, LineState::Exclusive,
    LineState::Shared, LineState::Invalid};

/// Status bits stored next to the tag in the cache SRAM.
struct LineFlags {
  bool valid = false;
  bool shared = false;
  bool dirty = false;

  friend bool operator==(const LineFlags&, const LineFlags&) = default;
};

LineFlags flags_of_state(LineState state);
LineState state_of_flags(LineFlags flags);

inline bool is_valid(LineState s) { return s != LineState::Invalid; }
inline bool is_dirty(LineState s) {
  return s == LineState::Modified || s == LineState::Owned;
}
inline bool is_unique(LineState s) {
  return s == LineState::Modified || s == LineState::Exclusive;
}

enum class CoherentKind : std::uint8_t {
  ReadShared,
  ReadUnique,
  CleanUnique,
  ReadOnce,
  WriteBack,
  ReadNoSnoop,
  WriteNoSnoop,
};

/// The kinds that are broadcast on the snoop channel, in table order.
inline constexpr std::array<CoherentKind, 4> kSnoopKinds = {
    CoherentKind::ReadShared, CoherentKind::ReadUnique,
    CoherentKind::CleanUnique, CoherentKind::ReadOnce};

bool generates_snoop(CoherentKind kind);
/// Snoops that let the snoopee keep a copy.
bool is_read_class(CoherentKind kind);
bool seeks_unique(CoherentKind kind);
/// Whether the initiator needs a line of data back.
bool needs_data(CoherentKind kind);

enum class OpKind : std::uint8_t { Load, Store, IFetch };
inline constexpr std::array<OpKind, 3> kAllOps = {OpKind::Load, OpKind::Store,
                                                   OpKind::IFetch};

/// Request ports of the core side; the data cache has one controller per port.
enum class Port : std::uint8_t { LoadUnit, StoreUnit, Ptw, Accelerator, IFetch };

struct CoreOp {
  OpKind kind = OpKind::Load;
  Addr address = 0;
  Word value = 0;  // Store only
  Port port = Port::LoadUnit;

  static CoreOp load(Addr a, Port p = Port::LoadUnit) {
    return {OpKind::Load, a, 0, p};
  }
  static CoreOp store(Addr a, Word v, Port p = Port::StoreUnit) {
    return {OpKind::Store, a, v, p};
  }
  static CoreOp ifetch(Addr a) { return {OpKind::IFetch, a, 0, Port::IFetch}; }

  friend bool operator==(const CoreOp&, const CoreOp&) = default;
};

struct SnoopRequest {
  CoherentKind kind = CoherentKind::ReadShared;
  Addr address = 0;
};

/// CR channel payload.
struct SnoopResponse {
  bool data_transfer = false;
  bool pass_dirty = false;
  bool is_shared = false;
  bool error = false;

  friend bool operator==(const SnoopResponse&, const SnoopResponse&) = default;
};

/// CD channel payload: one line worth of beats.
struct SnoopData {
  LineData beats;
};

struct Hit {
  LineState next;
  friend bool operator==(const Hit&, const Hit&) = default;
};
struct Issue {
  CoherentKind kind;
  friend bool operator==(const Issue&, const Issue&) = default;
};
using Action = std::variant<Hit, Issue>;

struct SnoopOutcome {
  LineState next;
  SnoopResponse resp;
  friend bool operator==(const SnoopOutcome&, const SnoopOutcome&) = default;
};

/// How the initiator derives its install state from the aggregated response.
enum class CompletionRule : std::uint8_t {
  Canonical,
  AlwaysExclusive,  // ignores is_shared; test mutation only
  AlwaysShared,
  IgnorePassDirty,
};

/**
 * The complete MOESI transition function as data, so the explorer can check
 * deliberately broken variants against the same machinery.
 *
 * canonical() is what the cache, the CCU and the verifier use by default.
 */
class ProtocolTable {
 public:
  static ProtocolTable canonical();

  Action initiator(LineState state, OpKind op) const;
  SnoopOutcome snoopee(LineState state, CoherentKind snoop) const;
  LineState completion(CoherentKind kind, bool any_is_shared,
                       bool any_pass_dirty, bool store_follows) const;

  void set_initiator(LineState state, OpKind op, Action action);
  void set_snoopee(LineState state, CoherentKind snoop, SnoopOutcome outcome);
  void set_completion(CoherentKind kind, CompletionRule rule);

  friend bool operator==(const ProtocolTable&, const ProtocolTable&) = default;

 private:
  std::array<std::array<Action, 3>, 5> initiator_{};
  std::array<std::array<SnoopOutcome, 4>, 5> snoopee_{};
  std::array<CompletionRule, 4> completion_{};
};

Action initiator_action(LineState state, OpKind op);
SnoopOutcome snoopee_transition(LineState state, CoherentKind snoop);
LineState completion_state(CoherentKind kind, bool any_is_shared,
                           bool any_pass_dirty, bool store_follows);

std::size_t snoop_index(CoherentKind kind);

std::string_view to_string(LineState s);
std::string_view ace_name(LineState s);
std::string_view short_name(LineState s);
std::string_view to_string(CoherentKind k);
std::string_view to_string(OpKind k);
std::string_view to_string(Port p);
std::string to_string(const SnoopResponse& r);
std::string to_string(const Action& a);

/// Accepts full MOESI names, ACE names and single letters.
std::optional<LineState> parse_state(std::string_view text);
std::optional<CoherentKind> parse_kind(std::string_view text);
std::optional<OpKind> parse_op(std::string_view text);

}  // namespace culsim

#endif  // CULSIM_PROTOCOL_HPP_

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

#include "culsim/protocol.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace culsim {

std::string to_string(AgentId agent) {
  return "core" + std::to_string(agent.core) +
         (agent.kind == CacheKind::Data ? ".d" : ".i");
}

LineFlags flags_of_state(LineState state) {
  switch (state) {
    case LineState::Modified:
      return {true, false, true};
    case LineState::Owned:
      return {true, true, true};
    case LineState::Exclusive:
      return {true, false, false};
    case LineState::Shared:
      return {true, true, false};
    case LineState::Invalid:
      break;
  }
  return {false, false, false};
}

LineState state_of_flags(LineFlags flags) {
  if (!flags.valid) return LineState::Invalid;
  if (flags.dirty) return flags.shared ? LineState::Owned : LineState::Modified;
  return flags.shared ? LineState::Shared : LineState::Exclusive;
}

bool generates_snoop(CoherentKind kind) {
  switch (kind) {
    case CoherentKind::ReadShared:
    case CoherentKind::ReadUnique:
    case CoherentKind::CleanUnique:
    case CoherentKind::ReadOnce:
      return true;
    default:
      return false;
  }
}

bool is_read_class(CoherentKind kind) {
  return kind == CoherentKind::ReadShared || kind == CoherentKind::ReadOnce;
}

bool seeks_unique(CoherentKind kind) {
  return kind == CoherentKind::ReadUnique || kind == CoherentKind::CleanUnique;
}

bool needs_data(CoherentKind kind) {
  return kind == CoherentKind::ReadShared || kind == CoherentKind::ReadUnique ||
         kind == CoherentKind::ReadOnce || kind == CoherentKind::ReadNoSnoop;
}

std::size_t snoop_index(CoherentKind kind) {
  switch (kind) {
    case CoherentKind::ReadShared:
      return 0;
    case CoherentKind::ReadUnique:
      return 1;
    case CoherentKind::CleanUnique:
      return 2;
    case CoherentKind::ReadOnce:
      return 3;
    default:
      throw std::invalid_argument(std::string(to_string(kind)) +
                                  " is not a snooping transaction");
  }
}

namespace {

std::size_t state_index(LineState s) { return static_cast<std::size_t>(s); }
std::size_t op_index(OpKind op) { return static_cast<std::size_t>(op); }

constexpr SnoopResponse kNoData{false, false, false, false};
constexpr SnoopResponse kShareData{true, false, true, false};
constexpr SnoopResponse kCleanData{true, false, false, false};
constexpr SnoopResponse kDirtyData{true, true, false, false};

}  // namespace

ProtocolTable ProtocolTable::canonical() {
  using S = LineState;
  using K = CoherentKind;
  ProtocolTable t;

  for (S s : kAllStates) {
    // Reads hit on any valid copy without changing it.
    t.set_initiator(s, OpKind::Load,
                    is_valid(s) ? Action{Hit{s}} : Action{Issue{K::ReadShared}});
    t.set_initiator(s, OpKind::IFetch,
                    is_valid(s) ? Action{Hit{s}} : Action{Issue{K::ReadOnce}});
  }
  t.set_initiator(S::Modified, OpKind::Store, Hit{S::Modified});
  t.set_initiator(S::Exclusive, OpKind::Store, Hit{S::Modified});
  t.set_initiator(S::Owned, OpKind::Store, Issue{K::CleanUnique});
  t.set_initiator(S::Shared, OpKind::Store, Issue{K::CleanUnique});
  t.set_initiator(S::Invalid, OpKind::Store, Issue{K::ReadUnique});

  for (K k : {K::ReadShared, K::ReadOnce}) {
    t.set_snoopee(S::Modified, k, {S::Owned, kShareData});
    t.set_snoopee(S::Owned, k, {S::Owned, kShareData});
    t.set_snoopee(S::Exclusive, k, {S::Shared, kShareData});
    t.set_snoopee(S::Shared, k, {S::Shared, kShareData});
    t.set_snoopee(S::Invalid, k, {S::Invalid, kNoData});
  }

  t.set_snoopee(S::Modified, K::ReadUnique, {S::Invalid, kDirtyData});
  t.set_snoopee(S::Owned, K::ReadUnique, {S::Invalid, kDirtyData});
  t.set_snoopee(S::Exclusive, K::ReadUnique, {S::Invalid, kCleanData});
  t.set_snoopee(S::Shared, K::ReadUnique, {S::Invalid, kCleanData});
  t.set_snoopee(S::Invalid, K::ReadUnique, {S::Invalid, kNoData});

  // A dirty snoopee hands its line to the CCU, which writes it back; the
  // initiator may have lost its own copy by the time it is acknowledged.
  t.set_snoopee(S::Modified, K::CleanUnique, {S::Invalid, kDirtyData});
  t.set_snoopee(S::Owned, K::CleanUnique, {S::Invalid, kDirtyData});
  t.set_snoopee(S::Exclusive, K::CleanUnique, {S::Invalid, kNoData});
  t.set_snoopee(S::Shared, K::CleanUnique, {S::Invalid, kNoData});
  t.set_snoopee(S::Invalid, K::CleanUnique, {S::Invalid, kNoData});

  t.completion_.fill(CompletionRule::Canonical);
  return t;
}

Action ProtocolTable::initiator(LineState state, OpKind op) const {
  return initiator_[state_index(state)][op_index(op)];
}

SnoopOutcome ProtocolTable::snoopee(LineState state, CoherentKind snoop) const {
  return snoopee_[state_index(state)][snoop_index(snoop)];
}

LineState ProtocolTable::completion(CoherentKind kind, bool any_is_shared,
                                    bool any_pass_dirty,
                                    bool store_follows) const {
  if (kind == CoherentKind::ReadNoSnoop) return LineState::Shared;
  switch (completion_[snoop_index(kind)]) {
    case CompletionRule::AlwaysExclusive:
      return LineState::Exclusive;
    case CompletionRule::AlwaysShared:
      return LineState::Shared;
    case CompletionRule::IgnorePassDirty:
      any_pass_dirty = false;
      break;
    case CompletionRule::Canonical:
      break;
  }
  switch (kind) {
    case CoherentKind::ReadShared:
      if (any_pass_dirty) return LineState::Owned;
      return any_is_shared ? LineState::Shared : LineState::Exclusive;
    case CoherentKind::ReadUnique:
    case CoherentKind::CleanUnique:
      return (any_pass_dirty || store_follows) ? LineState::Modified
                                               : LineState::Exclusive;
    default:  // ReadOnce installs into the instruction cache
      return LineState::Shared;
  }
}

void ProtocolTable::set_initiator(LineState state, OpKind op, Action action) {
  initiator_[state_index(state)][op_index(op)] = action;
}

void ProtocolTable::set_snoopee(LineState state, CoherentKind snoop,
                                SnoopOutcome outcome) {
  snoopee_[state_index(state)][snoop_index(snoop)] = outcome;
}

void ProtocolTable::set_completion(CoherentKind kind, CompletionRule rule) {
  completion_[snoop_index(kind)] = rule;
}

namespace {
const ProtocolTable& canonical_table() {
  static const ProtocolTable table = ProtocolTable::canonical();
  return table;
}
}  // namespace

Action initiator_action(LineState state, OpKind op) {
  return canonical_table().initiator(state, op);
}

SnoopOutcome snoopee_transition(LineState state, CoherentKind snoop) {
  return canonical_table().snoopee(state, snoop);
}

LineState completion_state(CoherentKind kind, bool any_is_shared,
                           bool any_pass_dirty, bool store_follows) {
  return canonical_table().completion(kind, any_is_shared, any_pass_dirty,
                                      store_follows);
}

std::string_view to_string(LineState s) {
  switch (s) {
    case LineState::Modified:
      return "Modified";
    case LineState::Owned:
      return "Owned";
    case LineState::Exclusive:
      return "Exclusive";
    case LineState::Shared:
      return "Shared";
    case LineState::Invalid:
      return "Invalid";
  }
  return "?";
}

std::string_view ace_name(LineState s) {
  switch (s) {
    case LineState::Modified:
      return "UniqueDirty";
    case LineState::Owned:
      return "SharedDirty";
    case LineState::Exclusive:
      return "UniqueClean";
    case LineState::Shared:
      return "SharedClean";
    case LineState::Invalid:
      return "Invalid";
  }
  return "?";
}

std::string_view short_name(LineState s) { return to_string(s).substr(0, 1); }

std::string_view to_string(CoherentKind k) {
  switch (k) {
    case CoherentKind::ReadShared:
      return "ReadShared";
    case CoherentKind::ReadUnique:
      return "ReadUnique";
    case CoherentKind::CleanUnique:
      return "CleanUnique";
    case CoherentKind::ReadOnce:
      return "ReadOnce";
    case CoherentKind::WriteBack:
      return "WriteBack";
    case CoherentKind::ReadNoSnoop:
      return "ReadNoSnoop";
    case CoherentKind::WriteNoSnoop:
      return "WriteNoSnoop";
  }
  return "?";
}

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::Load:
      return "Load";
    case OpKind::Store:
      return "Store";
    case OpKind::IFetch:
      return "IFetch";
  }
  return "?";
}

std::string_view to_string(Port p) {
  switch (p) {
    case Port::LoadUnit:
      return "LoadUnit";
    case Port::StoreUnit:
      return "StoreUnit";
    case Port::Ptw:
      return "Ptw";
    case Port::Accelerator:
      return "Accelerator";
    case Port::IFetch:
      return "IFetch";
  }
  return "?";
}

std::string to_string(const SnoopResponse& r) {
  std::ostringstream os;
  os << "{data=" << r.data_transfer << " pass_dirty=" << r.pass_dirty
     << " shared=" << r.is_shared;
  if (r.error) os << " error=1";
  os << "}";
  return os.str();
}

std::string to_string(const Action& a) {
  if (const auto* hit = std::get_if<Hit>(&a)) {
    return "Hit(" + std::string(to_string(hit->next)) + ")";
  }
  return "Issue(" + std::string(to_string(std::get<Issue>(a).kind)) + ")";
}

namespace {
bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}
}  // namespace

std::optional<LineState> parse_state(std::string_view text) {
  for (LineState s : kAllStates) {
    if (iequals(text, to_string(s)) || iequals(text, ace_name(s)) ||
        text == short_name(s))
      return s;
  }
  return std::nullopt;
}

std::optional<CoherentKind> parse_kind(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(CoherentKind::WriteNoSnoop); ++i) {
    auto k = static_cast<CoherentKind>(i);
    if (iequals(text, to_string(k))) return k;
  }
  return std::nullopt;
}

std::optional<OpKind> parse_op(std::string_view text) {
  for (OpKind k : kAllOps) {
    if (iequals(text, to_string(k))) return k;
  }
  if (text == "R") return OpKind::Load;
  if (text == "W") return OpKind::Store;
  if (text == "IF") return OpKind::IFetch;
  return std::nullopt;
}

}  // namespace culsim

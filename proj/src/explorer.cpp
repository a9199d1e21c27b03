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

#include <algorithm>
#include <atomic>
#include <cstring>
#include <sstream>
#include <thread>
#include <type_traits>

#include "culsim/verify.hpp"

namespace culsim {

AbstractOp AbstractOp::load(unsigned line, unsigned word, unsigned reg) {
  return {OpKind::Load, static_cast<std::uint8_t>(line), static_cast<std::uint8_t>(word),
          0, static_cast<std::uint8_t>(reg)};
}
AbstractOp AbstractOp::store(unsigned line, unsigned word, unsigned value) {
  return {OpKind::Store, static_cast<std::uint8_t>(line), static_cast<std::uint8_t>(word),
          static_cast<std::uint8_t>(value), 0};
}
AbstractOp AbstractOp::ifetch(unsigned line, unsigned word, unsigned reg) {
  return {OpKind::IFetch, static_cast<std::uint8_t>(line),
          static_cast<std::uint8_t>(word), 0, static_cast<std::uint8_t>(reg)};
}

void Coverage::merge(const Coverage& o) {
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t k = 0; k < 3; ++k) initiator[s][k] |= o.initiator[s][k];
    for (std::size_t k = 0; k < 4; ++k) snoopee[s][k] |= o.snoopee[s][k];
  }
}

std::string Counterexample::format() const {
  std::ostringstream os;
  os << message << "\n";
  for (const auto& step : trace) os << "  " << step << "\n";
  return os.str();
}

namespace {

constexpr unsigned kAgents = 2 * kMaxCores;
using u8 = std::uint8_t;

enum MissPhase : u8 { kNoMiss, kQueued, kInTxn };

// Every field is a byte so the raw representation is the canonical form.
struct State {
  u8 st[kAgents][kExplorerLines];
  u8 data[kAgents][kExplorerLines][kExplorerWords];
  u8 pc[kMaxCores];
  u8 miss_phase[kMaxCores];
  u8 miss_line[kMaxCores];
  u8 miss_kind[kMaxCores];
  u8 miss_target[kMaxCores];
  u8 miss_unique[kMaxCores];
  u8 miss_read_seen[kMaxCores];
  u8 miss_inval[kMaxCores];
  u8 regs[kExplorerRegs];
  u8 txn_active[kExplorerLines];
  u8 txn_core[kExplorerLines];
  u8 txn_undelivered[kExplorerLines];  // agent mask
  u8 txn_uncollected[kExplorerLines];  // agent mask
  u8 txn_shared[kExplorerLines];
  u8 txn_dirty[kExplorerLines];
  u8 txn_has_data[kExplorerLines];
  u8 txn_data[kExplorerLines][kExplorerWords];
  u8 cr_full[kAgents];
  u8 cr_line[kAgents];
  u8 cr_dt[kAgents];
  u8 cr_pd[kAgents];
  u8 cr_sh[kAgents];
  u8 cr_data[kAgents][kExplorerWords];
  u8 wb_full;
  u8 wb_line;
  u8 wb_data[kExplorerWords];
  u8 mem[kExplorerLines][kExplorerWords];
  u8 ghost[kExplorerLines][kExplorerWords];
};
static_assert(std::has_unique_object_representations_v<State>);
static_assert(std::is_trivially_copyable_v<State>);

enum class StepKind : u8 { Issue, Decode, Deliver, Collect, Complete, Drain };
struct Step {
  StepKind kind;
  u8 a = 0;
  u8 b = 0;
};

LineState S(u8 v) { return static_cast<LineState>(v); }
u8 B(LineState s) { return static_cast<u8>(s); }
u8 B(CoherentKind k) { return static_cast<u8>(k); }
CoherentKind K(u8 v) { return static_cast<CoherentKind>(v); }
constexpr u8 kInvalid = static_cast<u8>(LineState::Invalid);

std::string line_name(unsigned l) { return l == 0 ? "x" : "y"; }
std::string agent_name(unsigned a) { return to_string(AgentId::from_index(a)); }

class Model {
 public:
  Model(const std::vector<AbstractProgram>& programs, const ExploreConfig& config)
      : programs_(programs), config_(config) {
    if (config.n_cores < 1 || config.n_cores > kMaxCores)
      throw std::invalid_argument("explorer supports 1 to 4 cores");
    if (programs.size() > config.n_cores)
      throw std::invalid_argument("more programs than cores");
    if (config.capacity < 1 || config.capacity > kExplorerLines)
      throw std::invalid_argument("explorer cache capacity must be 1 or 2");
    programs_.resize(config.n_cores);
    for (const auto& p : programs_) {
      if (p.size() > kExplorerMaxOps)
        throw std::invalid_argument("explorer programs hold at most 6 operations");
      for (const auto& op : p) {
        if (op.line >= kExplorerLines || op.word >= kExplorerWords ||
            op.reg >= kExplorerRegs)
          throw std::invalid_argument("explorer operation out of bounds");
      }
    }
  }

  State initial() const {
    State s;
    std::memset(&s, 0, sizeof s);
    for (auto& agent : s.st)
      for (auto& l : agent) l = kInvalid;
    for (unsigned l = 0; l < kExplorerLines; ++l)
      for (unsigned w = 0; w < kExplorerWords; ++w)
        s.mem[l][w] = s.ghost[l][w] = config_.init[l][w];
    return s;
  }

  bool terminal(const State& s) const {
    for (unsigned c = 0; c < config_.n_cores; ++c)
      if (s.pc[c] < programs_[c].size() || s.miss_phase[c] != kNoMiss) return false;
    for (unsigned l = 0; l < kExplorerLines; ++l)
      if (s.txn_active[l]) return false;
    return !s.wb_full;
  }

  Observation observe(const State& s) const {
    Observation o;
    std::memcpy(o.regs.data(), s.regs, kExplorerRegs);
    for (unsigned l = 0; l < kExplorerLines; ++l)
      for (unsigned w = 0; w < kExplorerWords; ++w) o.memory[l][w] = s.mem[l][w];
    for (unsigned c = 0; c < config_.n_cores; ++c) {
      const unsigned a = 2 * c;
      for (unsigned l = 0; l < kExplorerLines; ++l)
        if (is_dirty(S(s.st[a][l])))
          for (unsigned w = 0; w < kExplorerWords; ++w) o.memory[l][w] = s.data[a][l][w];
    }
    return o;
  }

  /// Enumerates enabled steps in a fixed order.
  template <class F>
  void for_each_step(const State& s, F&& f) const {
    for (unsigned c = 0; c < config_.n_cores; ++c)
      if (s.pc[c] < programs_[c].size() && s.miss_phase[c] == kNoMiss)
        f(Step{StepKind::Issue, static_cast<u8>(c)});
    for (unsigned c = 0; c < config_.n_cores; ++c)
      if (s.miss_phase[c] == kQueued && !s.txn_active[s.miss_line[c]])
        f(Step{StepKind::Decode, static_cast<u8>(c)});
    for (unsigned l = 0; l < kExplorerLines; ++l) {
      if (!s.txn_active[l]) continue;
      for (unsigned a = 0; a < 2 * config_.n_cores; ++a)
        if ((s.txn_undelivered[l] >> a & 1) && !s.cr_full[a])
          f(Step{StepKind::Deliver, static_cast<u8>(l), static_cast<u8>(a)});
    }
    for (unsigned a = 0; a < 2 * config_.n_cores; ++a) {
      if (!s.cr_full[a]) continue;
      const unsigned l = s.cr_line[a];
      const bool absorb = K(s.miss_kind[s.txn_core[l]]) == CoherentKind::CleanUnique &&
                          s.cr_pd[a] && s.cr_dt[a];
      if (!absorb || !s.wb_full) f(Step{StepKind::Collect, static_cast<u8>(a)});
    }
    for (unsigned l = 0; l < kExplorerLines; ++l) {
      if (!s.txn_active[l] || s.txn_undelivered[l] || s.txn_uncollected[l]) continue;
      const CoherentKind kind = K(s.miss_kind[s.txn_core[l]]);
      const bool mem_read = needs_data(kind) && !s.txn_has_data[l];
      if (mem_read && s.wb_full && s.wb_line == l) continue;
      f(Step{StepKind::Complete, static_cast<u8>(l)});
    }
    if (s.wb_full) f(Step{StepKind::Drain});
  }

  /// Applies `step`; appends a description when `out` is given.
  void apply(State& s, Step step, Coverage* cov, std::string* out) const {
    switch (step.kind) {
      case StepKind::Issue:
        issue(s, step.a, cov, out);
        break;
      case StepKind::Decode:
        decode(s, step.a, out);
        break;
      case StepKind::Deliver:
        deliver(s, step.a, step.b, cov, out);
        break;
      case StepKind::Collect:
        collect(s, step.a, out);
        break;
      case StepKind::Complete:
        complete(s, step.a, out);
        break;
      case StepKind::Drain:
        if (out) *out = "write-back FIFO drains " + line_name(s.wb_line) + " to memory";
        std::memcpy(s.mem[s.wb_line], s.wb_data, kExplorerWords);
        s.wb_full = 0;
        s.wb_line = 0;
        std::memset(s.wb_data, 0, kExplorerWords);
        break;
    }
  }

  std::optional<std::string> check(const State& s) const {
    for (unsigned l = 0; l < kExplorerLines; ++l) {
      unsigned valid = 0, unique = 0, owned = 0;
      bool dirty = false;
      for (unsigned a = 0; a < 2 * config_.n_cores; ++a) {
        const LineState st = S(s.st[a][l]);
        const bool instr = a % 2 == 1;
        if (instr && st != LineState::Shared && st != LineState::Invalid)
          return agent_name(a) + " holds " + line_name(l) + " in " +
                 std::string(to_string(st));
        if (!is_valid(st) || (instr && !config_.coherent_ifetch)) continue;
        ++valid;
        unique += is_unique(st);
        owned += st == LineState::Owned;
        dirty |= is_dirty(st);
        if (std::memcmp(s.data[a][l], s.ghost[l], kExplorerWords) != 0)
          return "data-value: " + agent_name(a) + " holds a stale copy of " + line_name(l);
      }
      if (unique && valid > 1)
        return "SWMR: unique copy of " + line_name(l) + " coexists with another copy";
      if (owned > 1) return "SWMR: two Owned copies of " + line_name(l);
      bool in_flight = (s.wb_full && s.wb_line == l) ||
                       (s.txn_active[l] && s.txn_dirty[l]);
      for (unsigned a = 0; a < 2 * config_.n_cores; ++a)
        in_flight |= s.cr_full[a] && s.cr_line[a] == l && s.cr_pd[a];
      if (!dirty && !in_flight && std::memcmp(s.mem[l], s.ghost[l], kExplorerWords) != 0)
        return "data-value: memory lost the latest store to " + line_name(l);
    }
    return std::nullopt;
  }

  std::string describe_state(const State& s) const {
    std::ostringstream os;
    for (unsigned a = 0; a < 2 * config_.n_cores; ++a) {
      os << agent_name(a) << "{";
      for (unsigned l = 0; l < kExplorerLines; ++l)
        os << (l ? " " : "") << line_name(l) << ":" << short_name(S(s.st[a][l]));
      os << "} ";
    }
    os << "mem{" << int(s.mem[0][0]) << "," << int(s.mem[0][1]) << "|" << int(s.mem[1][0])
       << "," << int(s.mem[1][1]) << "}";
    return os.str();
  }

 private:
  std::string op_text(const AbstractOp& op) const {
    std::ostringstream os;
    switch (op.kind) {
      case OpKind::Load:
        os << "R " << line_name(op.line) << "[" << int(op.word) << "] -> r" << int(op.reg);
        break;
      case OpKind::Store:
        os << "W " << line_name(op.line) << "[" << int(op.word) << "]=" << int(op.value);
        break;
      case OpKind::IFetch:
        os << "IF " << line_name(op.line) << "[" << int(op.word) << "] -> r"
           << int(op.reg);
        break;
    }
    return os.str();
  }

  void perform(State& s, unsigned a, const AbstractOp& op) const {
    if (op.kind == OpKind::Store) {
      s.data[a][op.line][op.word] = op.value;
      s.ghost[op.line][op.word] = op.value;
    } else {
      s.regs[op.reg] = s.data[a][op.line][op.word];
    }
  }

  void invalidate(State& s, unsigned a, unsigned l) const {
    s.st[a][l] = kInvalid;
    std::memset(s.data[a][l], 0, kExplorerWords);
  }

  // A cache's own write-back may not overtake an older snooped one for the
  // same line still waiting in the FIFO, so it merges into that entry.
  void write_back(State& s, unsigned l, const u8* data) const {
    if (s.wb_full && s.wb_line == l) {
      std::memcpy(s.wb_data, data, kExplorerWords);
    } else {
      std::memcpy(s.mem[l], data, kExplorerWords);
    }
  }

  // Makes room for `l` in agent `a`; dirty victims are written back at once.
  void make_room(State& s, unsigned a, unsigned l, std::string* out) const {
    unsigned held = 0;
    for (unsigned o = 0; o < kExplorerLines; ++o) held += is_valid(S(s.st[a][o]));
    if (is_valid(S(s.st[a][l])) || held < config_.capacity) return;
    const unsigned victim = 1 - l;
    if (is_dirty(S(s.st[a][victim]))) {
      write_back(s, victim, s.data[a][victim]);
      if (out) *out += ", evicts dirty " + line_name(victim);
    } else if (out) {
      *out += ", evicts " + line_name(victim);
    }
    invalidate(s, a, victim);
  }

  void set_miss(State& s, unsigned c, unsigned l, CoherentKind kind, CacheKind target) const {
    s.miss_phase[c] = kQueued;
    s.miss_line[c] = static_cast<u8>(l);
    s.miss_kind[c] = B(kind);
    s.miss_target[c] = static_cast<u8>(target);
    s.miss_unique[c] = seeks_unique(kind);
    s.miss_read_seen[c] = 0;
    s.miss_inval[c] = 0;
  }

  void clear_miss(State& s, unsigned c) const {
    s.miss_phase[c] = kNoMiss;
    s.miss_line[c] = s.miss_kind[c] = s.miss_target[c] = 0;
    s.miss_unique[c] = s.miss_read_seen[c] = s.miss_inval[c] = 0;
  }

  void issue(State& s, unsigned c, Coverage* cov, std::string* out) const {
    const AbstractOp& op = programs_[c][s.pc[c]];
    const std::string who = "core" + std::to_string(c) + " " + op_text(op);
    if (op.kind == OpKind::IFetch) {
      const unsigned a = 2 * c + 1;
      const LineState st = S(s.st[a][op.line]);
      if (cov) cov->initiator[B(st)][static_cast<u8>(OpKind::IFetch)] = true;
      if (is_valid(st)) {
        perform(s, a, op);
        ++s.pc[c];
        if (out) *out = who + ": icache hit";
        return;
      }
      if (config_.coherent_ifetch) {
        const Action act = config_.table.initiator(LineState::Invalid, OpKind::IFetch);
        const CoherentKind kind = std::holds_alternative<Issue>(act)
                                      ? std::get<Issue>(act).kind
                                      : CoherentKind::ReadOnce;
        set_miss(s, c, op.line, kind, CacheKind::Instr);
        if (out) *out = who + ": icache miss, queues " + std::string(to_string(kind));
        return;
      }
      if (out) *out = who + ": icache miss, non-coherent fill from memory";
      make_room(s, a, op.line, out);
      std::memcpy(s.data[a][op.line], s.mem[op.line], kExplorerWords);
      s.st[a][op.line] = B(config_.table.completion(CoherentKind::ReadNoSnoop, false,
                                                    false, false));
      perform(s, a, op);
      ++s.pc[c];
      return;
    }

    const unsigned a = 2 * c;
    const LineState st = S(s.st[a][op.line]);
    if (cov) cov->initiator[B(st)][static_cast<u8>(op.kind)] = true;
    const Action act = config_.table.initiator(st, op.kind);
    if (const auto* hit = std::get_if<Hit>(&act); hit && is_valid(st)) {
      s.st[a][op.line] = B(hit->next);
      perform(s, a, op);
      ++s.pc[c];
      if (out)
        *out = who + ": hit in " + std::string(short_name(st)) + " -> " +
               std::string(short_name(hit->next));
      return;
    }
    const CoherentKind kind =
        std::holds_alternative<Issue>(act)
            ? std::get<Issue>(act).kind
            : (op.kind == OpKind::Store ? CoherentKind::ReadUnique : CoherentKind::ReadShared);
    set_miss(s, c, op.line, kind, CacheKind::Data);
    if (out)
      *out = who + ": " + std::string(short_name(st)) + " miss, queues " +
             std::string(to_string(kind));
  }

  void decode(State& s, unsigned c, std::string* out) const {
    const unsigned l = s.miss_line[c];
    const unsigned initiator = 2 * c + s.miss_target[c];
    u8 targets = 0;
    for (unsigned a = 0; a < 2 * config_.n_cores; ++a) {
      if (a == initiator || (a % 2 == 1 && !config_.coherent_ifetch)) continue;
      targets |= static_cast<u8>(1u << a);
    }
    s.txn_active[l] = 1;
    s.txn_core[l] = static_cast<u8>(c);
    s.txn_undelivered[l] = targets;
    s.txn_uncollected[l] = 0;
    s.miss_phase[c] = kInTxn;
    if (out)
      *out = "CCU decodes " + std::string(to_string(K(s.miss_kind[c]))) + " " +
             line_name(l) + " from " + agent_name(initiator);
  }

  void deliver(State& s, unsigned l, unsigned a, Coverage* cov, std::string* out) const {
    const CoherentKind kind = K(s.miss_kind[s.txn_core[l]]);
    const LineState st = S(s.st[a][l]);
    if (cov) cov->snoopee[B(st)][snoop_index(kind)] = true;
    const SnoopOutcome outcome = config_.table.snoopee(st, kind);

    SnoopResponse resp{};
    u8 data[kExplorerWords] = {};
    if (is_valid(st)) {
      resp = outcome.resp;
      if (resp.data_transfer) std::memcpy(data, s.data[a][l], kExplorerWords);
      s.st[a][l] = B(outcome.next);
      if (!is_valid(outcome.next)) invalidate(s, a, l);
    }
    const unsigned c = a / 2;
    if (s.miss_phase[c] != kNoMiss && s.miss_target[c] == a % 2 && s.miss_line[c] == l) {
      if (is_valid(st) && !is_valid(outcome.next)) s.miss_inval[c] = 1;
      if (is_read_class(kind) && s.miss_unique[c]) s.miss_read_seen[c] = 1;
    }
    s.cr_full[a] = 1;
    s.cr_line[a] = static_cast<u8>(l);
    s.cr_dt[a] = resp.data_transfer;
    s.cr_pd[a] = resp.pass_dirty;
    s.cr_sh[a] = resp.is_shared;
    std::memcpy(s.cr_data[a], data, kExplorerWords);
    s.txn_undelivered[l] &= static_cast<u8>(~(1u << a));
    s.txn_uncollected[l] |= static_cast<u8>(1u << a);
    if (out)
      *out = "snoop " + std::string(to_string(kind)) + " " + line_name(l) + " reaches " +
             agent_name(a) + ": " + std::string(short_name(st)) + " -> " +
             std::string(short_name(S(s.st[a][l]))) + " " + to_string(resp);
  }

  void collect(State& s, unsigned a, std::string* out) const {
    const unsigned l = s.cr_line[a];
    const CoherentKind kind = K(s.miss_kind[s.txn_core[l]]);
    bool dt = s.cr_dt[a], pd = s.cr_pd[a];
    if (out) *out = "CCU collects CR of " + agent_name(a) + " for " + line_name(l);
    if (kind == CoherentKind::CleanUnique && pd && dt) {
      s.wb_full = 1;
      s.wb_line = static_cast<u8>(l);
      std::memcpy(s.wb_data, s.cr_data[a], kExplorerWords);
      dt = pd = false;
      if (out) *out += ", dirty data into the write-back FIFO";
    }
    s.txn_shared[l] |= s.cr_sh[a];
    s.txn_dirty[l] |= pd;
    if (dt && !s.txn_has_data[l]) {
      s.txn_has_data[l] = 1;
      std::memcpy(s.txn_data[l], s.cr_data[a], kExplorerWords);
      if (out) *out += ", buffers its data";
    }
    s.cr_full[a] = s.cr_line[a] = s.cr_dt[a] = s.cr_pd[a] = s.cr_sh[a] = 0;
    std::memset(s.cr_data[a], 0, kExplorerWords);
    s.txn_uncollected[l] &= static_cast<u8>(~(1u << a));
  }

  void complete(State& s, unsigned l, std::string* out) const {
    const unsigned c = s.txn_core[l];
    const unsigned a = 2 * c + s.miss_target[c];
    const CoherentKind kind = K(s.miss_kind[c]);
    const AbstractOp& op = programs_[c][s.pc[c]];
    bool has_data = s.txn_has_data[l];
    u8 data[kExplorerWords];
    std::memcpy(data, s.txn_data[l], kExplorerWords);
    const bool shared = s.txn_shared[l], pass_dirty = s.txn_dirty[l];
    std::string text;
    if (needs_data(kind) && !has_data) {
      std::memcpy(data, s.mem[l], kExplorerWords);
      has_data = true;
      text = " (data from memory)";
    } else if (has_data) {
      text = " (data from a cache)";
    }

    s.txn_active[l] = s.txn_core[l] = s.txn_undelivered[l] = s.txn_uncollected[l] = 0;
    s.txn_shared[l] = s.txn_dirty[l] = s.txn_has_data[l] = 0;
    std::memset(s.txn_data[l], 0, kExplorerWords);

    const std::string head = "core" + std::to_string(c) + " completes " +
                             std::string(to_string(kind)) + " " + line_name(l) + text;
    if (config_.retry_rule && s.miss_unique[c] && (s.miss_read_seen[c] || s.miss_inval[c])) {
      if (pass_dirty && has_data) write_back(s, l, data);
      const LineState st = S(s.st[a][l]);
      const Action act = config_.table.initiator(st, op.kind);
      if (const auto* issue = std::get_if<Issue>(&act)) {
        set_miss(s, c, l, issue->kind, static_cast<CacheKind>(s.miss_target[c]));
        if (out)
          *out = head + ": interfered with, retries as " +
                 std::string(to_string(issue->kind));
        return;
      }
      if (is_valid(st)) {
        s.st[a][l] = B(std::get<Hit>(act).next);
        perform(s, a, op);
        clear_miss(s, c);
        ++s.pc[c];
        if (out) *out = head + ": interfered with, now hits";
        return;
      }
    }

    const bool store = op.kind == OpKind::Store;
    LineState next = config_.table.completion(kind, shared, pass_dirty, store);
    if (store && next == LineState::Exclusive) next = LineState::Modified;
    std::string evict;
    make_room(s, a, l, out ? &evict : nullptr);
    if (has_data) std::memcpy(s.data[a][l], data, kExplorerWords);
    s.st[a][l] = B(next);
    perform(s, a, op);
    clear_miss(s, c);
    ++s.pc[c];
    if (out) *out = head + ", installs " + std::string(short_name(next)) + evict;
  }

  std::vector<AbstractProgram> programs_;
  const ExploreConfig& config_;
};

// Open-addressing set of state indices keyed by the raw state bytes.
class StateSet {
 public:
  explicit StateSet(const std::vector<State>& states) : states_(states) {
    slots_.assign(1024, 0);
  }

  /// Returns the index of an equal state, or nullopt after recording `idx`.
  std::optional<std::uint32_t> find_or_insert(const State& s, std::uint32_t idx) {
    if ((count_ + 1) * 2 > slots_.size()) grow();
    std::size_t i = hash(s) & (slots_.size() - 1);
    while (slots_[i]) {
      const std::uint32_t other = slots_[i] - 1;
      if (std::memcmp(&states_[other], &s, sizeof(State)) == 0) return other;
      i = (i + 1) & (slots_.size() - 1);
    }
    slots_[i] = idx + 1;
    ++count_;
    return std::nullopt;
  }

 private:
  static std::size_t hash(const State& s) {
    const auto* p = reinterpret_cast<const unsigned char*>(&s);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < sizeof(State); ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }

  void grow() {
    std::vector<std::uint32_t> old;
    old.swap(slots_);
    slots_.assign(old.size() * 2, 0);
    for (std::uint32_t v : old) {
      if (!v) continue;
      std::size_t i = hash(states_[v - 1]) & (slots_.size() - 1);
      while (slots_[i]) i = (i + 1) & (slots_.size() - 1);
      slots_[i] = v;
    }
  }

  const std::vector<State>& states_;
  std::vector<std::uint32_t> slots_;
  std::size_t count_ = 0;
};

struct Successor {
  std::uint32_t parent;
  Step step;
  State state;
  std::optional<std::string> error;
};

struct ChunkResult {
  std::vector<Successor> successors;
  std::vector<std::pair<std::uint32_t, Observation>> terminals;
  std::vector<std::uint32_t> deadlocks;
  Coverage coverage;
  std::uint64_t transitions = 0;
};

}  // namespace

ExploreResult explore(const std::vector<AbstractProgram>& programs,
                      const ExploreConfig& config, const ForbiddenPredicate& forbidden) {
  const Model model(programs, config);
  ExploreResult result;

  std::vector<State> states;
  std::vector<std::uint32_t> parent;
  std::vector<Step> via;
  StateSet seen(states);

  states.push_back(model.initial());
  parent.push_back(0);
  via.push_back(Step{StepKind::Drain});
  seen.find_or_insert(states[0], 0);

  auto trace_to = [&](std::uint32_t idx, std::optional<Step> last,
                      const std::string& message) {
    std::vector<Step> steps;
    if (last) steps.push_back(*last);
    for (std::uint32_t i = idx; i != 0; i = parent[i]) steps.push_back(via[i]);
    std::reverse(steps.begin(), steps.end());
    Counterexample cx;
    cx.message = message;
    State s = model.initial();
    for (std::size_t k = 0; k < steps.size(); ++k) {
      std::string text;
      model.apply(s, steps[k], &cx.implicated, &text);
      cx.trace.push_back(std::to_string(k + 1) + ". " + text);
    }
    cx.trace.push_back("state: " + model.describe_state(s));
    return cx;
  };

  const unsigned workers = std::max(1u, config.workers);
  std::size_t lo = 0;
  bool stop = false;
  while (lo < states.size() && !stop) {
    const std::size_t hi = states.size();
    const std::size_t span = hi - lo;
    const std::size_t chunk = std::max<std::size_t>(64, span / (workers * 8) + 1);
    const std::size_t n_chunks = (span + chunk - 1) / chunk;
    // Chunks are expanded a batch at a time and merged in chunk order, which
    // keeps the result independent of the worker count.
    const std::size_t batch = static_cast<std::size_t>(workers) * 4;
    for (std::size_t first = 0; first < n_chunks && !stop; first += batch) {
      const std::size_t count = std::min(batch, n_chunks - first);
      std::vector<ChunkResult> chunks(count);

      auto expand = [&](std::size_t k) {
        ChunkResult& out = chunks[k];
        const std::size_t begin = lo + (first + k) * chunk;
        const std::size_t end = std::min(hi, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) {
          const State& s = states[i];
          const auto idx = static_cast<std::uint32_t>(i);
          bool any = false;
          model.for_each_step(s, [&](Step step) {
            any = true;
            ++out.transitions;
            State next = s;
            model.apply(next, step, &out.coverage, nullptr);
            out.successors.push_back({idx, step, next, model.check(next)});
          });
          if (model.terminal(s)) {
            out.terminals.emplace_back(idx, model.observe(s));
          } else if (!any) {
            out.deadlocks.push_back(idx);
          }
        }
      };

      if (workers == 1 || count == 1) {
        for (std::size_t k = 0; k < count; ++k) expand(k);
      } else {
        std::atomic<std::size_t> next_chunk{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < std::min<std::size_t>(workers, count); ++w) {
          pool.emplace_back([&] {
            for (std::size_t k; (k = next_chunk.fetch_add(1)) < count;) expand(k);
          });
        }
        for (auto& t : pool) t.join();
      }

      for (auto& ch : chunks) {
        result.transitions += ch.transitions;
        result.coverage.merge(ch.coverage);
        for (const auto& [idx, obs] : ch.terminals) {
          result.outcomes.insert(obs);
          if (forbidden) {
            if (auto why = forbidden(obs)) {
              if (result.violations.size() < 4)
                result.violations.push_back(trace_to(idx, std::nullopt, *why));
              stop |= config.stop_on_violation;
            }
          }
        }
        for (std::uint32_t idx : ch.deadlocks) {
          if (result.violations.size() < 4)
            result.violations.push_back(trace_to(idx, std::nullopt, "deadlock"));
          stop |= config.stop_on_violation;
        }
        for (auto& succ : ch.successors) {
          if (succ.error) {
            if (result.violations.size() < 4)
              result.violations.push_back(trace_to(succ.parent, succ.step, *succ.error));
            stop |= config.stop_on_violation;
            continue;
          }
          const auto idx = static_cast<std::uint32_t>(states.size());
          if (seen.find_or_insert(succ.state, idx)) continue;
          if (states.size() >= config.state_budget) {
            result.exhaustive = false;
            stop = true;
            break;
          }
          states.push_back(succ.state);
          parent.push_back(succ.parent);
          via.push_back(succ.step);
        }
        if (!result.exhaustive) break;
      }
    }
    lo = hi;
  }
  result.reachable_states = states.size();
  return result;
}

}  // namespace culsim

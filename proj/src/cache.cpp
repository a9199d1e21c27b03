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

#include "culsim/cache.hpp"

#include <algorithm>
#include <sstream>

namespace culsim {

std::string_view to_string(RequesterId r) {
  switch (r) {
    case RequesterId::MissHandler:
      return "MissHandler";
    case RequesterId::SnoopCtrl:
      return "SnoopCtrl";
    case RequesterId::Ptw:
      return "Ptw";
    case RequesterId::LoadUnit:
      return "LoadUnit";
    case RequesterId::Accelerator:
      return "Accelerator";
    case RequesterId::StoreUnit:
      return "StoreUnit";
  }
  return "?";
}

RequesterId arbitrate(std::span<const RequesterId> requests) {
  if (requests.empty()) throw std::invalid_argument("arbitrate: no requesters");
  return *std::min_element(requests.begin(), requests.end());
}

RequesterId requester_for(Port port) {
  switch (port) {
    case Port::Ptw:
      return RequesterId::Ptw;
    case Port::Accelerator:
      return RequesterId::Accelerator;
    case Port::StoreUnit:
      return RequesterId::StoreUnit;
    case Port::LoadUnit:
    case Port::IFetch:
      break;
  }
  return RequesterId::LoadUnit;
}

// ---------------------------------------------------------------------------
// Cache

Cache::Cache(const SimConfig& config, const ProtocolTable& table, bool retry_rule)
    : config_(config),
      table_(&table),
      retry_rule_(retry_rule),
      coherent_ifetch_(config.coherent_ifetch),
      sets_(config.sets()),
      ways_(config.ways) {
  config.validate();
  CacheLine empty{0, LineState::Invalid, LineData(config.words_per_line(), 0)};
  data_.assign(static_cast<std::size_t>(sets_) * ways_, empty);
  instr_ = data_;
  rr_data_.assign(sets_, 0);
  rr_instr_.assign(sets_, 0);
}

void Cache::check_range(Addr address) const {
  if (config_.address_bits < 64 && (address >> config_.address_bits) != 0) {
    std::ostringstream os;
    os << "0x" << std::hex << address << " is outside the " << std::dec
       << config_.address_bits << "-bit physical address range";
    throw ConfigError("address", os.str());
  }
}

std::uint32_t Cache::set_of(Addr address) const {
  return static_cast<std::uint32_t>((address / config_.line_size) % sets_);
}

Addr Cache::tag_of(Addr address) const {
  return (address / config_.line_size) / sets_;
}

Addr Cache::line_address(std::uint32_t set, Addr tag) const {
  return (tag * sets_ + set) * config_.line_size;
}

CacheLine* Cache::find(Addr address, CacheKind kind, bool include_invalid) {
  auto& arr = array(kind);
  const std::uint32_t set = set_of(address);
  const Addr tag = tag_of(address);
  for (std::uint32_t w = 0; w < ways_; ++w) {
    CacheLine& l = arr[set * ways_ + w];
    if (l.tag == tag && (include_invalid || is_valid(l.state))) return &l;
  }
  return nullptr;
}

std::optional<LookupHit> Cache::lookup(Addr address, CacheKind kind) const {
  check_range(address);
  const auto& arr = array(kind);
  const std::uint32_t set = set_of(address);
  const Addr tag = tag_of(address);
  for (std::uint32_t w = 0; w < ways_; ++w) {
    const CacheLine& l = arr[set * ways_ + w];
    if (l.tag == tag && is_valid(l.state)) return LookupHit{w, &l};
  }
  return std::nullopt;
}

LineState Cache::state_of(Addr address, CacheKind kind) const {
  auto hit = lookup(address, kind);
  return hit ? hit->line->state : LineState::Invalid;
}

std::optional<Writeback> Cache::evict(std::uint32_t set, CacheKind kind) {
  auto& arr = array(kind);
  CacheLine& victim = arr[set * ways_ + rr(kind)[set]];
  std::optional<Writeback> wb;
  if (is_dirty(victim.state)) wb = Writeback{line_address(set, victim.tag), victim.data};
  victim.state = LineState::Invalid;
  return wb;
}

CacheLine& Cache::allocate(Addr line, CacheKind kind, std::optional<Writeback>& victim) {
  const std::uint32_t set = set_of(line);
  auto& counter = rr(kind)[set];
  CacheLine* slot = find(line, kind, true);
  if (!slot) {
    auto& arr = array(kind);
    for (std::uint32_t w = 0; w < ways_ && !slot; ++w) {
      if (!is_valid(arr[set * ways_ + w].state)) slot = &arr[set * ways_ + w];
    }
    if (!slot) {
      victim = evict(set, kind);
      slot = &arr[set * ways_ + counter];
    }
    slot->tag = tag_of(line);
  }
  counter = (counter + 1) % ways_;
  return *slot;
}

Word Cache::perform(CacheLine& line, const CoreOp& op) {
  const std::size_t w = config_.word_of(op.address);
  if (op.kind == OpKind::Store) {
    line.data[w] = op.value;
    commits_.emplace_back(op.address, op.value);
    return op.value;
  }
  return line.data[w];
}

AccessResult Cache::core_access(const CoreOp& op, Cycle now) {
  check_range(op.address);
  if (op.kind == OpKind::IFetch) return ifetch(op.address, now);

  const Addr line = config_.line_of(op.address);
  CacheLine* l = find(line, CacheKind::Data, false);
  Action action = table_->initiator(l ? l->state : LineState::Invalid, op.kind);
  if (const auto* hit = std::get_if<Hit>(&action); hit && l) {
    l->state = hit->next;
    Word v = perform(*l, op);
    return Served{op.kind == OpKind::Store ? std::nullopt : std::optional<Word>(v)};
  }
  CoherentKind kind = std::holds_alternative<Issue>(action)
                          ? std::get<Issue>(action).kind
                          : (op.kind == OpKind::Store ? CoherentKind::ReadUnique
                                                      : CoherentKind::ReadShared);
  miss_ = MissStatus{line, kind, seeks_unique(kind), false, false, now, op,
                     CacheKind::Data, 0};
  return NeedsMiss{kind};
}

AccessResult Cache::ifetch(Addr address, Cycle now) {
  check_range(address);
  const Addr line = config_.line_of(address);
  if (CacheLine* l = find(line, CacheKind::Instr, false)) {
    return Served{l->data[config_.word_of(address)]};
  }
  CoherentKind kind = CoherentKind::ReadNoSnoop;
  if (coherent_ifetch_) {
    Action a = table_->initiator(LineState::Invalid, OpKind::IFetch);
    kind = std::holds_alternative<Issue>(a) ? std::get<Issue>(a).kind
                                            : CoherentKind::ReadOnce;
  }
  miss_ = MissStatus{line, kind, false, false, false, now, CoreOp::ifetch(address),
                     CacheKind::Instr, 0};
  return NeedsMiss{kind};
}

SnoopResult Cache::handle_snoop(const SnoopRequest& req, CacheKind kind) {
  const Addr line = config_.line_of(req.address);
  CacheLine* l = find(line, kind, false);
  SnoopOutcome outcome =
      table_->snoopee(l ? l->state : LineState::Invalid, req.kind);

  SnoopResult res;
  res.resp = outcome.resp;
  if (!l) {
    res.resp = SnoopResponse{};
  } else {
    if (res.resp.data_transfer) res.data = SnoopData{l->data};
    l->state = outcome.next;
    if (!is_valid(outcome.next)) res.invalidation_signal = line;
  }

  if (miss_ && miss_->target == kind && miss_->address == line) {
    if (res.invalidation_signal) miss_->invalidated_by_snoop = true;
    if (is_read_class(req.kind) && miss_->unique_sought) {
      miss_->snoop_read_seen = true;
      res.snoop_read_signal = true;
    }
  }
  return res;
}

MissOutcome Cache::miss_complete(const ReadResponse& resp) {
  if (!miss_) throw ProtocolFault("read response without an outstanding miss");
  MissStatus& m = *miss_;
  MissOutcome out;

  if (retry_rule_ && m.unique_sought && (m.snoop_read_seen || m.invalidated_by_snoop)) {
    // The line may have been handed to us dirty; it must not vanish.
    if (resp.pass_dirty && resp.data) out.writeback = Writeback{m.address, *resp.data};
    CacheLine* l = find(m.address, m.target, false);
    Action a = table_->initiator(l ? l->state : LineState::Invalid, m.op.kind);
    if (const auto* issue = std::get_if<Issue>(&a)) {
      out.retried = true;
      out.retry_kind = issue->kind;
      m.kind = issue->kind;
      m.unique_sought = seeks_unique(issue->kind);
      m.snoop_read_seen = false;
      m.invalidated_by_snoop = false;
      ++m.retries;
      return out;
    }
    if (l) {
      l->state = std::get<Hit>(a).next;
      Word v = perform(*l, m.op);
      out.installed = l->state;
      if (m.op.kind != OpKind::Store) out.value = v;
      miss_.reset();
      return out;
    }
  }

  const bool store = m.op.kind == OpKind::Store;
  LineState next = table_->completion(m.kind, resp.is_shared, resp.pass_dirty, store);
  std::optional<Writeback> victim;
  CacheLine& l = allocate(m.address, m.target, victim);
  if (resp.data) l.data = *resp.data;
  l.state = next;
  if (store && l.state == LineState::Exclusive) l.state = LineState::Modified;
  Word v = perform(l, m.op);

  out.installed = l.state;
  if (!store) out.value = v;
  if (victim) out.writeback = std::move(victim);
  miss_.reset();
  return out;
}

void Cache::install(Addr address, LineState state, LineData data, CacheKind kind) {
  std::optional<Writeback> ignored;
  CacheLine& l = allocate(config_.line_of(address), kind, ignored);
  l.state = state;
  data.resize(config_.words_per_line(), 0);
  l.data = std::move(data);
}

std::vector<std::pair<Addr, Word>> Cache::take_commits() {
  std::vector<std::pair<Addr, Word>> out;
  out.swap(commits_);
  return out;
}

// ---------------------------------------------------------------------------
// CacheSubsystem

CacheSubsystem::CacheSubsystem(CoreId core, const SimConfig& config,
                               const ProtocolTable& table, bool retry_rule,
                               Fabric& fabric)
    : core_(core), config_(config), fabric_(&fabric), cache_(config, table, retry_rule) {}

void CacheSubsystem::issue(const CoreOp& op, std::size_t index, Cycle now) {
  op_ = PendingOp{op, index, now, Phase::WaitingPort, 0, false, std::nullopt};
  ++stats_.ops;
  switch (op.kind) {
    case OpKind::Load:
      ++stats_.loads;
      break;
    case OpKind::Store:
      ++stats_.stores;
      break;
    case OpKind::IFetch:
      ++stats_.ifetches;
      break;
  }
}

void CacheSubsystem::tick(Cycle now) {
  if (op_ && op_->phase == Phase::Busy && op_->done_at <= now) retire(now, op_->value);
  if (fabric_->r[core_].ready(now) && !cache_.miss())
    throw ProtocolFault("core" + std::to_string(core_) +
                        ": read response without an outstanding miss");

  unsigned accesses = tick_data(now);
  max_port_accesses_ = std::max(max_port_accesses_, accesses);
  tick_instr(now);

  if (op_ && op_->phase != Phase::Busy) ++stats_.stall_cycles;
}

unsigned CacheSubsystem::tick_data(Cycle now) {
  const AgentId agent{core_, CacheKind::Data};
  std::vector<RequesterId> requests;
  const bool response = fabric_->r[core_].ready(now) &&
                        cache_.miss()->target == CacheKind::Data;
  if (response) requests.push_back(RequesterId::MissHandler);
  auto& ac = fabric_->ac[agent.index()];
  if (ac.ready(now)) requests.push_back(RequesterId::SnoopCtrl);
  if (op_ && op_->phase == Phase::WaitingPort && op_->op.kind != OpKind::IFetch)
    requests.push_back(requester_for(op_->op.port));
  if (requests.empty()) return 0;

  unsigned accesses = 0;
  switch (arbitrate(requests)) {
    case RequesterId::MissHandler:
      finish_miss(now);
      ++accesses;
      break;
    case RequesterId::SnoopCtrl: {
      SnoopRequest req = ac.take();
      SnoopResult res = cache_.handle_snoop(req, CacheKind::Data);
      if (req.kind == CoherentKind::CleanUnique && res.resp.pass_dirty)
        ++stats_.writebacks;
      fabric_->cr[agent.index()].push(now, SnoopReply{res.resp, std::move(res.data),
                                                      config_.line_of(req.address)});
      ++accesses;
      break;
    }
    default:
      access(now);
      ++accesses;
      break;
  }
  return accesses;
}

void CacheSubsystem::tick_instr(Cycle now) {
  const AgentId agent{core_, CacheKind::Instr};
  if (fabric_->r[core_].ready(now) && cache_.miss() &&
      cache_.miss()->target == CacheKind::Instr) {
    finish_miss(now);
    return;
  }
  auto& ac = fabric_->ac[agent.index()];
  if (ac.ready(now)) {
    SnoopRequest req = ac.take();
    SnoopResult res = cache_.handle_snoop(req, CacheKind::Instr);
    fabric_->cr[agent.index()].push(
        now, SnoopReply{res.resp, std::move(res.data), config_.line_of(req.address)});
    return;
  }
  if (op_ && op_->phase == Phase::WaitingPort && op_->op.kind == OpKind::IFetch)
    access(now);
}

void CacheSubsystem::access(Cycle now) {
  AccessResult res = cache_.core_access(op_->op, now);
  if (const auto* served = std::get_if<Served>(&res)) {
    ++stats_.hits;
    op_->hit = true;
    op_->value = served->value;
    op_->phase = Phase::Busy;
    op_->done_at = now + config_.latencies.l1_hit - 1;
    if (op_->done_at <= now) retire(now, op_->value);
    return;
  }
  ++stats_.misses;
  op_->phase = Phase::Miss;
  const MissStatus& m = *cache_.miss();
  fabric_->req[core_].push(now, CoherentRequest{AgentId{core_, m.target}, m.kind,
                                                m.address, {}});
}

void CacheSubsystem::finish_miss(Cycle now) {
  ReadResponse resp = fabric_->r[core_].take();
  const MissStatus m = *cache_.miss();
  if (resp.line != m.address)
    throw ProtocolFault("core" + std::to_string(core_) +
                        ": read response for a line that is not outstanding");
  MissOutcome out = cache_.miss_complete(resp);

  if (generates_snoop(resp.kind)) fabric_->ack[core_].push(now, {core_, resp.line});
  if (out.writeback) {
    ++stats_.writebacks;
    fabric_->req[core_].push(
        now, CoherentRequest{AgentId{core_, CacheKind::Data}, CoherentKind::WriteBack,
                             out.writeback->line, std::move(out.writeback->data)});
  }
  if (out.retried) {
    ++stats_.retries;
    fabric_->req[core_].push(
        now, CoherentRequest{AgentId{core_, m.target}, out.retry_kind, m.address, {}});
    return;
  }
  miss_latency_total_ += now - m.waiting_since;
  ++completed_misses_;
  if (resp.from_cache && resp.data) ++stats_.snoop_served_misses;
  retire(now, out.value);
}

void CacheSubsystem::retire(Cycle now, std::optional<Word> value) {
  retired_.push_back(OpRecord{op_->index, op_->op, value, op_->issued, now, op_->hit});
  op_.reset();
}

std::vector<OpRecord> CacheSubsystem::take_retired() {
  std::vector<OpRecord> out;
  out.swap(retired_);
  return out;
}

std::string CacheSubsystem::dump() const {
  std::ostringstream os;
  os << "core" << core_ << ": ";
  if (!op_) {
    os << "no op";
  } else {
    os << to_string(op_->op.kind) << " 0x" << std::hex << op_->op.address << std::dec
       << " issued@" << op_->issued;
  }
  if (const auto& m = cache_.miss()) {
    os << "; miss " << to_string(m->kind) << " 0x" << std::hex << m->address << std::dec
       << " since@" << m->waiting_since << " unique=" << m->unique_sought
       << " read_seen=" << m->snoop_read_seen << " inval=" << m->invalidated_by_snoop
       << " retries=" << m->retries;
  }
  return os.str();
}

}  // namespace culsim

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

#include "culsim/ccu.hpp"

#include <algorithm>
#include <sstream>

namespace culsim {

Path route(CoherentKind kind) {
  return generates_snoop(kind) ? Path::Coherent : Path::Memory;
}

CoreId mux_grant(std::span<const std::optional<Cycle>> arrival, CoreId last_granted) {
  std::optional<Cycle> earliest;
  for (const auto& a : arrival) {
    if (a && (!earliest || *a < *earliest)) earliest = a;
  }
  if (!earliest) throw std::invalid_argument("mux_grant: nothing pending");
  const std::size_t n = arrival.size();
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t c = (last_granted + k) % n;
    if (arrival[c] && *arrival[c] == *earliest) return static_cast<CoreId>(c);
  }
  return last_granted;  // unreachable
}

CollisionTable::Verdict CollisionTable::check(Addr address) {
  const Addr l = line(address);
  if (lines_.count(l) || lines_.size() >= capacity_) return Verdict::Stall;
  lines_.insert(l);
  return Verdict::Proceed;
}

void CollisionTable::remove(Addr address) {
  if (lines_.erase(line(address)) != 1)
    throw ProtocolFault("collision table: releasing a line that is not in flight");
}

std::vector<AgentId> snoop_targets(AgentId initiator, std::uint32_t n_cores,
                                   bool coherent_ifetch) {
  std::vector<AgentId> out;
  for (CoreId c = 0; c < n_cores; ++c) {
    for (CacheKind k : {CacheKind::Data, CacheKind::Instr}) {
      if (k == CacheKind::Instr && !coherent_ifetch) continue;
      AgentId a{c, k};
      if (a != initiator) out.push_back(a);
    }
  }
  return out;
}

void collect_cr(Aggregate& agg, const SnoopResponse& resp, AgentId from) {
  agg.any_is_shared |= resp.is_shared;
  agg.any_pass_dirty |= resp.pass_dirty;
  if (resp.data_transfer && !agg.data_source) agg.data_source = from;
}

std::string_view to_string(TxnPhase p) {
  switch (p) {
    case TxnPhase::Decoded:
      return "Decoded";
    case TxnPhase::Snooping:
      return "Snooping";
    case TxnPhase::Responding:
      return "Responding";
    case TxnPhase::MemAccess:
      return "MemAccess";
    case TxnPhase::Done:
      return "Done";
  }
  return "?";
}

bool WritebackFifo::holds(Addr line) const {
  return std::any_of(q_.begin(), q_.end(),
                     [line](const WritebackEntry& e) { return e.line == line; });
}

Ccu::Ccu(const SimConfig& config, Fabric& fabric, MemoryModel& memory)
    : config_(config),
      fabric_(&fabric),
      memory_(&memory),
      pending_(config.n_cores),
      last_granted_(config.n_cores - 1),
      decode_q_(config.latencies.ccu_stage, config.fifo_depths.handshake),
      collisions_(config.fifo_depths.collision_capacity, config.line_size),
      cr_order_(2 * config.n_cores),
      wb_fifo_(config.fifo_depths.writeback) {}

void Ccu::tick(Cycle now) {
  accept_acks(now);
  accept_memory(now);
  snoop_unit(now);
  resolve(now);
  decode(now);
  demux_and_mux(now);
  memory_unit(now);
}

void Ccu::on_memory(std::vector<MemoryModel::Completion> completions) {
  for (auto& c : completions) mem_done_.push_back(std::move(c));
}

void Ccu::accept_acks(Cycle now) {
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    auto& ch = fabric_->ack[c];
    while (ch.ready(now)) {
      CompletionAck ack = ch.take();
      auto it = std::find_if(txns_.begin(), txns_.end(), [&](const auto& kv) {
        const CcuTransaction& t = kv.second;
        return t.initiator.core == ack.core && t.line == ack.line &&
               t.phase == TxnPhase::Responding;
      });
      if (it == txns_.end())
        throw ProtocolFault("completion ack from core" + std::to_string(c) +
                            " matches no responding transaction");
      collisions_.remove(it->second.line);
      txns_.erase(it);
      ++completed_;
    }
  }
}

void Ccu::respond(CcuTransaction& txn, Cycle now, std::optional<LineData> data,
                  bool from_cache) {
  fabric_->r[txn.initiator.core].push(
      now, ReadResponse{txn.kind, txn.line, txn.aggregate.any_is_shared,
                        txn.aggregate.any_pass_dirty, from_cache, std::move(data)});
  txn.phase = TxnPhase::Responding;
}

void Ccu::accept_memory(Cycle now) {
  for (auto& done : mem_done_) {
    if (!done.is_read) continue;
    if (auto nc = nc_reads_.find(done.tag); nc != nc_reads_.end()) {
      fabric_->r[nc->second.core].push(
          now, ReadResponse{CoherentKind::ReadNoSnoop, nc->second.line, false, false,
                            false, std::move(done.data)});
      nc_reads_.erase(nc);
      continue;
    }
    auto it = txns_.find(done.tag);
    if (it == txns_.end() || it->second.phase != TxnPhase::MemAccess)
      throw ProtocolFault("memory read completion for an unknown transaction");
    respond(it->second, now, std::move(done.data), false);
  }
  mem_done_.clear();
}

void Ccu::snoop_unit(Cycle now) {
  for (std::size_t a = 0; a < fabric_->cr.size(); ++a) {
    auto& ch = fabric_->cr[a];
    while (ch.ready(now)) {
      if (cr_order_[a].empty())
        throw ProtocolFault("snoop response from " + to_string(AgentId::from_index(a)) +
                            " with an empty CR-order FIFO");
      CcuTransaction& txn = txns_.at(cr_order_[a].front());
      const SnoopReply& reply = ch.front();
      if (reply.line != txn.line)
        throw ProtocolFault("snoop response from " + to_string(AgentId::from_index(a)) +
                            " out of order");

      SnoopResponse resp = reply.resp;
      if (resp.data_transfer && !reply.data) resp.data_transfer = false;
      // CleanUnique carries no data to the initiator, so dirty data handed
      // over by a snoopee goes to memory instead.
      const bool absorb = txn.kind == CoherentKind::CleanUnique && resp.pass_dirty &&
                          resp.data_transfer;
      if (absorb) {
        if (wb_fifo_.full()) break;
        wb_fifo_.push({txn.line, reply.data->beats});
        ++stats_.snooped_writebacks;
        resp.pass_dirty = false;
        resp.data_transfer = false;
      }
      const bool had_source = txn.aggregate.data_source.has_value();
      collect_cr(txn.aggregate, resp, AgentId::from_index(a));
      if (!had_source && txn.aggregate.data_source) txn.buffered = reply.data->beats;
      --txn.cr_pending;
      ch.pop();
      cr_order_[a].pop_front();
    }
  }
}

void Ccu::resolve(Cycle now) {
  for (auto& [id, txn] : txns_) {
    if (txn.phase != TxnPhase::Snooping || txn.cr_pending != 0) continue;
    if (txn.buffered && needs_data(txn.kind)) {
      ++stats_.cache_to_cache_transfers;
      respond(txn, now, txn.buffered, true);
      txn.buffered.reset();
    } else if (!needs_data(txn.kind)) {
      respond(txn, now, std::nullopt, false);
    } else if (mem_reads_.size() < config_.fifo_depths.handshake) {
      mem_reads_.push_back(id);
      txn.phase = TxnPhase::MemAccess;
    }
  }
}

void Ccu::decode(Cycle now) {
  if (!decode_q_.ready(now)) return;
  const CoherentRequest& req = decode_q_.front();
  if (config_.serialize && !txns_.empty()) return;
  if (collisions_.check(req.line) == CollisionTable::Verdict::Stall) {
    ++stats_.collision_stalls;
    return;
  }
  CcuTransaction txn;
  txn.id = next_id_++;
  txn.initiator = req.agent;
  txn.kind = req.kind;
  txn.line = req.line;
  txn.accepted_at = now;
  for (AgentId t : snoop_targets(req.agent, config_.n_cores, config_.coherent_ifetch)) {
    fabric_->ac[t.index()].push(now, SnoopRequest{req.kind, req.line});
    cr_order_[t.index()].push_back(txn.id);
    ++txn.cr_pending;
  }
  txn.phase = TxnPhase::Snooping;
  txns_.emplace(txn.id, std::move(txn));
  ++stats_.transactions;
  stats_.max_inflight = std::max<std::uint64_t>(stats_.max_inflight, txns_.size());
  decode_q_.pop();
}

void Ccu::demux_and_mux(Cycle now) {
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    auto& ch = fabric_->req[c];
    while (ch.ready(now)) {
      if (route(ch.front().kind) == Path::Memory) {
        noncoherent_.push_back(ch.take());
      } else if (!pending_[c]) {
        pending_[c] = Pending{ch.take(), now};
      } else {
        break;
      }
    }
  }
  if (!decode_q_.can_push()) return;
  std::vector<std::optional<Cycle>> arrival(config_.n_cores);
  bool any = false;
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    if (pending_[c]) {
      arrival[c] = pending_[c]->arrival;
      any = true;
    }
  }
  if (!any) return;
  CoreId g = mux_grant(arrival, last_granted_);
  decode_q_.push(now, std::move(pending_[g]->req));
  pending_[g].reset();
  last_granted_ = g;
}

bool Ccu::pending_write(Addr line) const {
  auto is_write_to = [line](const CoherentRequest& r) {
    return r.line == line &&
           (r.kind == CoherentKind::WriteBack || r.kind == CoherentKind::WriteNoSnoop);
  };
  if (wb_fifo_.holds(line)) return true;
  if (std::any_of(noncoherent_.begin(), noncoherent_.end(), is_write_to)) return true;
  for (const auto& ch : fabric_->req) {
    for (const auto& e : ch.entries())
      if (is_write_to(e.msg)) return true;
  }
  return false;
}

void Ccu::memory_unit(Cycle now) {
  if (!wb_fifo_.empty()) {
    WritebackEntry e = wb_fifo_.pop();
    memory_->write(e.line, std::move(e.data), now);
    return;
  }
  if (!noncoherent_.empty()) {
    CoherentRequest req = std::move(noncoherent_.front());
    noncoherent_.pop_front();
    if (req.kind == CoherentKind::ReadNoSnoop) {
      MemoryModel::Tag tag = next_nc_tag_++;
      nc_reads_[tag] = NoncoherentRead{req.agent.core, req.line};
      memory_->read(req.line, now, tag);
    } else {
      memory_->write(req.line, std::move(req.data), now);
    }
    return;
  }
  if (!mem_reads_.empty()) {
    const CcuTransaction& txn = txns_.at(mem_reads_.front());
    if (pending_write(txn.line)) return;
    memory_->read(txn.line, now, txn.id);
    mem_reads_.pop_front();
  }
}

bool Ccu::idle() const {
  return txns_.empty() &&
         std::none_of(pending_.begin(), pending_.end(),
                      [](const auto& p) { return p.has_value(); }) &&
         decode_q_.empty() && wb_fifo_.empty() && noncoherent_.empty() &&
         mem_reads_.empty() && nc_reads_.empty() && mem_done_.empty() &&
         fabric_->empty();
}

std::vector<Addr> Ccu::inflight_lines() const {
  std::vector<Addr> out;
  for (const auto& [id, t] : txns_) out.push_back(t.line);
  return out;
}

bool Ccu::dirty_in_flight(Addr line) const {
  if (pending_write(line) || memory_->write_pending(line)) return true;
  for (const auto& [id, t] : txns_) {
    if (t.line == line && t.aggregate.any_pass_dirty && t.phase == TxnPhase::Snooping)
      return true;
  }
  for (const auto& ch : fabric_->r) {
    for (const auto& e : ch.entries())
      if (e.msg.line == line && e.msg.pass_dirty && e.msg.data) return true;
  }
  for (const auto& ch : fabric_->cr) {
    for (const auto& e : ch.entries())
      if (e.msg.line == line && e.msg.resp.pass_dirty) return true;
  }
  return false;
}

std::string Ccu::dump() const {
  std::ostringstream os;
  os << "ccu: " << txns_.size() << " in flight, decode queue " << decode_q_.size()
     << ", wb fifo " << wb_fifo_.size() << ", noncoherent " << noncoherent_.size()
     << ", mem reads " << mem_reads_.size() << "\n";
  for (const auto& [id, t] : txns_) {
    os << "  txn " << id << " " << to_string(t.kind) << " 0x" << std::hex << t.line
       << std::dec << " from " << to_string(t.initiator) << " phase "
       << to_string(t.phase) << " cr_pending " << t.cr_pending << "\n";
  }
  for (CoreId c = 0; c < pending_.size(); ++c) {
    if (pending_[c])
      os << "  pending core" << c << " " << to_string(pending_[c]->req.kind) << " 0x"
         << std::hex << pending_[c]->req.line << std::dec << " since@"
         << pending_[c]->arrival << "\n";
  }
  return os.str();
}

}  // namespace culsim

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

#include "culsim/baseline.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace culsim {

std::string_view to_string(DirState s) {
  switch (s) {
    case DirState::Uncached:
      return "Uncached";
    case DirState::SharedBy:
      return "SharedBy";
    case DirState::OwnedBy:
      return "OwnedBy";
  }
  return "?";
}

std::string_view to_string(HopKind h) {
  switch (h) {
    case HopKind::ToDirectory:
      return "to-directory";
    case HopKind::MemoryRead:
      return "memory-read";
    case HopKind::ForwardToOwner:
      return "forward-to-owner";
    case HopKind::OwnerToRequester:
      return "owner-to-requester";
    case HopKind::Invalidate:
      return "invalidate";
    case HopKind::InvalidateAck:
      return "invalidate-ack";
    case HopKind::DataReturn:
      return "data-return";
  }
  return "?";
}

DirAccess dir_access(const DirectoryEntry& entry, const DirRequest& req) {
  DirAccess out;
  out.hops.push_back({HopKind::ToDirectory, std::nullopt});
  const CoreId r = req.requester;

  switch (entry.state) {
    case DirState::Uncached:
      out.hops.push_back({HopKind::MemoryRead, std::nullopt});
      out.hops.push_back({HopKind::DataReturn, r});
      out.next = {DirState::OwnedBy, {}, r};
      out.granted = req.store ? LineState::Modified : LineState::Exclusive;
      break;

    case DirState::SharedBy: {
      if (!req.store) {
        out.hops.push_back({HopKind::MemoryRead, std::nullopt});
        out.hops.push_back({HopKind::DataReturn, r});
        out.next = entry;
        out.next.sharers.insert(r);
        out.granted = LineState::Shared;
        break;
      }
      const bool holds = entry.sharers.count(r) != 0;
      for (CoreId s : entry.sharers)
        if (s != r) out.invalidated.push_back(s);
      for (CoreId s : out.invalidated) out.hops.push_back({HopKind::Invalidate, s});
      for (CoreId s : out.invalidated) out.hops.push_back({HopKind::InvalidateAck, s});
      if (!holds) out.hops.push_back({HopKind::MemoryRead, std::nullopt});
      out.hops.push_back({HopKind::DataReturn, r});
      out.next = {DirState::OwnedBy, {}, r};
      out.granted = LineState::Modified;
      break;
    }

    case DirState::OwnedBy:
      if (entry.owner == r)
        throw std::logic_error("dir_access: the owner cannot miss on its own line");
      out.hops.push_back({HopKind::ForwardToOwner, entry.owner});
      out.hops.push_back({HopKind::OwnerToRequester, entry.owner});
      if (req.store) {
        out.invalidated.push_back(entry.owner);
        out.next = {DirState::OwnedBy, {}, r};
        out.granted = LineState::Modified;
      } else {
        out.downgraded = entry.owner;
        out.next = {DirState::SharedBy, {entry.owner, r}, 0};
        out.granted = LineState::Shared;
      }
      break;
  }
  return out;
}

Cycle DirAccess::latency(const Latencies& lat) const {
  bool forward = false, inval = false, mem = false;
  Cycle t = lat.ccu_stage;  // directory lookup
  for (const Hop& h : hops) {
    switch (h.kind) {
      case HopKind::ToDirectory:
      case HopKind::DataReturn:
        t += lat.snoop_hop;
        break;
      case HopKind::ForwardToOwner:
      case HopKind::OwnerToRequester:
        forward = true;
        t += lat.snoop_hop;
        break;
      case HopKind::Invalidate:
        inval = true;
        break;
      case HopKind::InvalidateAck:
        break;
      case HopKind::MemoryRead:
        mem = true;
        break;
    }
  }
  if (!forward) t += std::max<Cycle>(inval ? 2 * lat.snoop_hop : 0, mem ? lat.mem_read : 0);
  return t;
}

// ---------------------------------------------------------------------------

DirectorySimulation::DirectorySimulation(const SimConfig& config, bool check)
    : config_((config.validate(), config)), check_(check), sets_(config.sets()) {
  PrivateCache empty;
  empty.lines.assign(static_cast<std::size_t>(sets_) * config_.ways,
                     Line{0, LineState::Invalid, LineData(config_.words_per_line(), 0)});
  empty.rr.assign(sets_, 0);
  dcache_.assign(config_.n_cores, empty);
  icache_.assign(config_.n_cores, empty);
  stats_.resize(config_.n_cores);
}

void DirectorySimulation::preload(const std::vector<MemoryImageEntry>& image) {
  MemoryModel staging(config_.line_size, 0, 0);
  for (const auto& e : image) staging.load_bytes(e.address, e.bytes);
  for (const auto& [line, data] : staging.contents()) {
    memory_[line] = data;
    ghost_[line] = data;
  }
}

DirectorySimulation::Line* DirectorySimulation::find(PrivateCache& c, Addr line,
                                                     bool include_invalid) {
  const std::uint32_t set = static_cast<std::uint32_t>((line / config_.line_size) % sets_);
  const Addr tag = (line / config_.line_size) / sets_;
  for (std::uint32_t w = 0; w < config_.ways; ++w) {
    Line& l = c.lines[set * config_.ways + w];
    if (l.tag == tag && (include_invalid || is_valid(l.state))) return &l;
  }
  return nullptr;
}

const DirectorySimulation::Line* DirectorySimulation::find(const PrivateCache& c,
                                                           Addr line) const {
  return const_cast<DirectorySimulation*>(this)->find(const_cast<PrivateCache&>(c), line,
                                                      false);
}

LineData DirectorySimulation::read_memory(Addr line) {
  ++mem_reads_;
  auto it = memory_.find(line);
  return it != memory_.end() ? it->second : LineData(config_.words_per_line(), 0);
}

void DirectorySimulation::write_memory(Addr line, const LineData& data) {
  ++mem_writes_;
  memory_[line] = data;
}

DirectorySimulation::Line& DirectorySimulation::allocate(CoreId core, PrivateCache& c,
                                                         Addr line, bool coherent) {
  const std::uint32_t set = static_cast<std::uint32_t>((line / config_.line_size) % sets_);
  auto& counter = c.rr[set];
  Line* slot = find(c, line, true);
  if (!slot) {
    for (std::uint32_t w = 0; w < config_.ways && !slot; ++w) {
      if (!is_valid(c.lines[set * config_.ways + w].state))
        slot = &c.lines[set * config_.ways + w];
    }
    if (!slot) {
      slot = &c.lines[set * config_.ways + counter];
      const Addr victim = (slot->tag * sets_ + set) * config_.line_size;
      if (coherent) {
        DirectoryEntry& e = dir_[victim];
        if (e.state == DirState::OwnedBy && e.owner == core) {
          e = DirectoryEntry{};
        } else if (e.state == DirState::SharedBy) {
          e.sharers.erase(core);
          if (e.sharers.empty()) e = DirectoryEntry{};
        }
        if (slot->state == LineState::Modified) {
          write_memory(victim, slot->data);
          ++stats_[core].writebacks;
        }
      }
      slot->state = LineState::Invalid;
    }
    slot->tag = (line / config_.line_size) / sets_;
  }
  counter = (counter + 1) % config_.ways;
  return *slot;
}

void DirectorySimulation::note_store(Addr address, Word value) {
  const Addr line = config_.line_of(address);
  auto [it, fresh] = ghost_.try_emplace(line);
  if (fresh) {
    auto m = memory_.find(line);
    it->second = m != memory_.end() ? m->second : LineData(config_.words_per_line(), 0);
  }
  it->second[config_.word_of(address)] = value;
}

Cycle DirectorySimulation::access(CoreId core, const CoreOp& op, Cycle at) {
  CoreStats& st = stats_[core];
  const Latencies& lat = config_.latencies;
  const Addr line = config_.line_of(op.address);
  const std::size_t word = config_.word_of(op.address);
  ++st.ops;
  const Cycle hit_done = at + lat.l1_hit - 1;

  if (op.kind == OpKind::IFetch) {
    ++st.ifetches;
    if (find(icache_[core], line, false)) {
      ++st.hits;
      return hit_done;
    }
    ++st.misses;
    Line& l = allocate(core, icache_[core], line, false);
    l.data = read_memory(line);
    l.state = LineState::Shared;
    const Cycle latency = 2 * lat.snoop_hop + lat.ccu_stage + lat.mem_read;
    miss_latency_total_ += latency;
    ++completed_misses_;
    st.stall_cycles += latency;
    return at + latency;
  }

  const bool store = op.kind == OpKind::Store;
  ++(store ? st.stores : st.loads);
  Line* l = find(dcache_[core], line, false);
  if (l && (!store || is_unique(l->state))) {
    ++st.hits;
    if (store) {
      l->state = LineState::Modified;
      l->data[word] = op.value;
      note_store(op.address, op.value);
    }
    return hit_done;
  }

  ++st.misses;
  const Cycle arrival = at + lat.snoop_hop;
  Cycle& busy = busy_until_[line];
  const Cycle start = std::max({arrival, dir_free_, busy});
  if (busy > std::max(arrival, dir_free_)) ++busy_stalls_;
  dir_free_ = start + 1;

  const DirectoryEntry entry = dir_[line];
  const bool upgrade = l && l->state == LineState::Shared;
  const DirAccess acc = dir_access(entry, {core, store, upgrade});

  LineData data;
  bool forwarded = false;
  for (const Hop& h : acc.hops) forwarded |= h.kind == HopKind::OwnerToRequester;
  if (forwarded) {
    const Line* owner = find(dcache_[entry.owner], line);
    if (!owner) throw ProtocolFault("directory names an owner without the line");
    data = owner->data;
    ++forwards_;
    ++st.snoop_served_misses;
  } else if (upgrade && acc.granted == LineState::Modified &&
             std::none_of(acc.hops.begin(), acc.hops.end(),
                          [](const Hop& h) { return h.kind == HopKind::MemoryRead; })) {
    data = l->data;
  } else {
    data = read_memory(line);
  }

  if (acc.downgraded) {
    Line* owner = find(dcache_[*acc.downgraded], line, false);
    if (owner->state == LineState::Modified) write_memory(line, owner->data);
    owner->state = LineState::Shared;
  }
  for (CoreId v : acc.invalidated) {
    if (Line* victim = find(dcache_[v], line, false)) victim->state = LineState::Invalid;
  }
  dir_[line] = acc.next;

  Line& target = upgrade ? *l : allocate(core, dcache_[core], line, true);
  target.data = data;
  target.state = acc.granted;
  if (store) {
    target.state = LineState::Modified;
    target.data[word] = op.value;
    note_store(op.address, op.value);
  }

  const Cycle done = start + acc.latency(lat) - lat.snoop_hop;
  busy = done;
  miss_latency_total_ += done - at;
  ++completed_misses_;
  st.stall_cycles += done - at;
  if (check_) monitor(at);
  return done;
}

SimStats DirectorySimulation::run(Streams streams) {
  if (streams.size() > config_.n_cores)
    throw ConfigError("n_cores", "workload has " + std::to_string(streams.size()) +
                                     " streams for " + std::to_string(config_.n_cores) +
                                     " cores");
  streams.resize(config_.n_cores);
  using Ready = std::pair<Cycle, CoreId>;
  std::priority_queue<Ready, std::vector<Ready>, std::greater<>> ready;
  std::vector<std::size_t> next(config_.n_cores, 0);
  for (CoreId c = 0; c < config_.n_cores; ++c)
    if (!streams[c].empty()) ready.push({0, c});

  Cycle end = 0;
  bool any = false;
  while (!ready.empty()) {
    auto [issued, c] = ready.top();
    ready.pop();
    const Cycle done = access(c, streams[c][next[c]++], issued + 1);
    end = std::max(end, done);
    any = true;
    if (next[c] < streams[c].size()) ready.push({done, c});
  }

  SimStats s;
  s.cores = stats_;
  s.cycles = any ? end + 1 : 0;
  s.mem_reads = mem_reads_;
  s.mem_writes = mem_writes_;
  s.ccu_collision_stalls = busy_stalls_;
  s.cache_to_cache_transfers = forwards_;
  s.miss_latency_total = miss_latency_total_;
  s.completed_misses = completed_misses_;
  return s;
}

CoherenceView DirectorySimulation::snapshot_invariants() const {
  CoherenceView view;
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    const PrivateCache& pc = dcache_[c];
    for (std::uint32_t s = 0; s < sets_; ++s) {
      for (std::uint32_t w = 0; w < config_.ways; ++w) {
        const Line& l = pc.lines[s * config_.ways + w];
        if (!is_valid(l.state)) continue;
        const Addr line = (l.tag * sets_ + s) * config_.line_size;
        view[line].copies.push_back({AgentId{c, CacheKind::Data}, l.state, l.data});
      }
    }
  }
  for (const auto& [line, data] : ghost_) view[line].latest = data;
  for (auto& [line, lv] : view) {
    auto m = memory_.find(line);
    lv.memory = m != memory_.end() ? m->second : LineData(config_.words_per_line(), 0);
    if (!lv.latest) lv.latest = LineData(config_.words_per_line(), 0);
  }
  return view;
}

void DirectorySimulation::monitor(Cycle at) const {
  const CoherenceView view = snapshot_invariants();
  if (auto v = check_swmr(view)) throw InvariantViolation(at, "directory: " + *v);
  if (auto v = check_value(view)) throw InvariantViolation(at, "directory: " + *v);
}

MemoryImage DirectorySimulation::final_memory_image() const {
  MemoryImage image(memory_.begin(), memory_.end());
  for (const auto& [line, lv] : snapshot_invariants()) {
    for (const auto& c : lv.copies)
      if (c.state == LineState::Modified) image[line] = c.data;
  }
  std::erase_if(image, [](const auto& kv) {
    return std::all_of(kv.second.begin(), kv.second.end(), [](Word w) { return w == 0; });
  });
  return image;
}

const DirectoryEntry& DirectorySimulation::entry(Addr line) const {
  static const DirectoryEntry kUncached;
  auto it = dir_.find(config_.line_of(line));
  return it != dir_.end() ? it->second : kUncached;
}

LineState DirectorySimulation::state_of(CoreId core, Addr address) const {
  const Line* l = find(dcache_.at(core), config_.line_of(address));
  return l ? l->state : LineState::Invalid;
}

}  // namespace culsim

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

#include "culsim/sim.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace culsim {

std::string format_hundredths(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) return "0.00";
  const unsigned __int128 q =
      (static_cast<unsigned __int128>(numerator) * 200 + denominator) / (2 * denominator);
  const auto whole = static_cast<std::uint64_t>(q / 100);
  const auto frac = static_cast<unsigned>(q % 100);
  return std::to_string(whole) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

std::string SimStats::avg_miss_latency() const {
  return format_hundredths(miss_latency_total, completed_misses);
}

std::uint64_t image_hash(const MemoryImage& image) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [addr, data] : image) {
    mix(addr, 8);
    for (Word w : data) mix(w, 4);
  }
  return h;
}

Simulation::Simulation(const SimConfig& config, const ProtocolTable& table,
                       SimOptions options)
    : config_((config.validate(), config)),
      table_(table),
      options_(options),
      memory_(config.line_size, config.latencies.mem_read, config.latencies.mem_write),
      fabric_(config.n_cores, config.latencies.ccu_stage, config.latencies.snoop_hop) {
  for (CoreId c = 0; c < config_.n_cores; ++c)
    cores_.push_back(
        std::make_unique<CacheSubsystem>(c, config_, table_, options_.retry_rule, fabric_));
  ccu_ = std::make_unique<Ccu>(config_, fabric_, memory_);
  streams_.resize(config_.n_cores);
  next_.assign(config_.n_cores, 0);
  records_.resize(config_.n_cores);
}

void Simulation::preload(const std::vector<MemoryImageEntry>& image) {
  std::set<Addr> touched;
  for (const auto& e : image) {
    memory_.load_bytes(e.address, e.bytes);
    for (std::size_t i = 0; i < e.bytes.size(); ++i) touched.insert(config_.line_of(e.address + i));
  }
  for (Addr l : touched) ghost_[l] = memory_.peek(l);
}

void Simulation::load(Streams streams) {
  if (streams.size() > config_.n_cores)
    throw ConfigError("n_cores", "workload has " + std::to_string(streams.size()) +
                                     " streams for " + std::to_string(config_.n_cores) +
                                     " cores");
  streams.resize(config_.n_cores);
  streams_ = std::move(streams);
  next_.assign(config_.n_cores, 0);
  last_progress_ = now_;
}

bool Simulation::done() const {
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    if (next_[c] < streams_[c].size() || !cores_[c]->idle()) return false;
  }
  return ccu_->idle() && memory_.idle();
}

void Simulation::note_commits() {
  for (auto& core : cores_) {
    for (const auto& [addr, value] : core->cache().take_commits()) {
      auto [it, fresh] = ghost_.try_emplace(config_.line_of(addr));
      if (fresh) it->second = memory_.peek(it->first);
      it->second[config_.word_of(addr)] = value;
    }
  }
}

void Simulation::step() {
  for (auto& core : cores_) core->tick(now_);
  note_commits();
  ccu_->tick(now_);
  ccu_->on_memory(memory_.tick(now_));

  bool progress = ccu_->completed() != last_completed_;
  last_completed_ = ccu_->completed();
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    auto& core = *cores_[c];
    for (auto& r : core.take_retired()) {
      records_[c].push_back(std::move(r));
      progress = true;
    }
    if (core.can_issue() && next_[c] < streams_[c].size()) {
      core.issue(streams_[c][next_[c]], next_[c], now_);
      ++next_[c];
    }
  }

  if (options_.check) monitor();
  if (progress) last_progress_ = now_;
  if (!done() && now_ - last_progress_ >= config_.watchdog_cycles) {
    throw DeadlockError("no progress for " + std::to_string(config_.watchdog_cycles) +
                            " cycles at cycle " + std::to_string(now_),
                        dump());
  }
  ++now_;
}

SimStats Simulation::run(Streams streams) {
  load(std::move(streams));
  while (!done()) step();
  return stats();
}

void Simulation::monitor() {
  CoherenceView view = snapshot_invariants();
  if (auto v = check_swmr(view)) throw InvariantViolation(now_, *v);
  if (auto v = check_value(view)) throw InvariantViolation(now_, *v);

  std::set<Addr> lines;
  for (const auto& [id, t] : ccu_->transactions()) {
    if (!lines.insert(t.line).second) {
      std::ostringstream os;
      os << "two transactions past the collision check for line 0x" << std::hex << t.line;
      throw InvariantViolation(now_, os.str());
    }
  }
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    if (cores_[c]->max_port_accesses() > 1)
      throw InvariantViolation(now_, "core" + std::to_string(c) +
                                         ": more than one SRAM access in a cycle");
  }
}

CoherenceView Simulation::snapshot_invariants() const {
  CoherenceView view;
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    const Cache& cache = cores_[c]->cache();
    cache.for_each_valid(CacheKind::Data, [&](Addr line, const CacheLine& l) {
      view[line].copies.push_back({AgentId{c, CacheKind::Data}, l.state, l.data});
    });
    if (config_.coherent_ifetch) {
      cache.for_each_valid(CacheKind::Instr, [&](Addr line, const CacheLine& l) {
        view[line].copies.push_back({AgentId{c, CacheKind::Instr}, l.state, l.data});
      });
    }
  }
  for (const auto& [line, data] : ghost_) view[line].latest = data;
  for (auto& [line, lv] : view) {
    lv.memory = memory_.peek(line);
    if (!lv.latest) lv.latest = LineData(config_.words_per_line(), 0);
    lv.dirty_in_flight = ccu_->dirty_in_flight(line);
  }
  return view;
}

MemoryImage Simulation::final_memory_image() const {
  MemoryImage image(memory_.contents().begin(), memory_.contents().end());
  for (const auto& core : cores_) {
    core->cache().for_each_valid(CacheKind::Data, [&](Addr line, const CacheLine& l) {
      if (is_dirty(l.state)) image[line] = l.data;
    });
  }
  std::erase_if(image, [](const auto& kv) {
    return std::all_of(kv.second.begin(), kv.second.end(), [](Word w) { return w == 0; });
  });
  return image;
}

SimStats Simulation::stats() const {
  SimStats s;
  for (const auto& core : cores_) {
    s.cores.push_back(core->stats());
    s.miss_latency_total += core->miss_latency_total();
    s.completed_misses += core->completed_misses();
  }
  s.cycles = now_;
  s.mem_reads = memory_.reads();
  s.mem_writes = memory_.writes();
  s.ccu_collision_stalls = ccu_->stats().collision_stalls;
  s.cache_to_cache_transfers = ccu_->stats().cache_to_cache_transfers;
  return s;
}

std::string Simulation::dump() const {
  std::ostringstream os;
  os << "cycle " << now_ << "\n";
  for (CoreId c = 0; c < config_.n_cores; ++c)
    os << cores_[c]->dump() << " (next op " << next_[c] << "/" << streams_[c].size()
       << ")\n";
  os << ccu_->dump();
  return os.str();
}

}  // namespace culsim

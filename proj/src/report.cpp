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

#include "culsim/report.hpp"

#include <algorithm>
#include <cstdio>

namespace culsim {
namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Json config_json(const SimConfig& c) {
  return Json{
      {"n_cores", c.n_cores},
      {"line_size", c.line_size},
      {"cache_size", c.cache_size},
      {"ways", c.ways},
      {"address_bits", c.address_bits},
      {"coherent_ifetch", c.coherent_ifetch},
      {"latencies",
       {{"l1_hit", c.latencies.l1_hit},
        {"snoop_hop", c.latencies.snoop_hop},
        {"ccu_stage", c.latencies.ccu_stage},
        {"mem_read", c.latencies.mem_read},
        {"mem_write", c.latencies.mem_write}}},
      {"fifo_depths",
       {{"writeback", c.fifo_depths.writeback},
        {"handshake", c.fifo_depths.handshake},
        {"collision_capacity", c.fifo_depths.collision_capacity}}},
      {"seed", c.seed},
      {"watchdog_cycles", c.watchdog_cycles},
      {"serialize", c.serialize},
  };
}

Json stats_json(const SimStats& s) {
  Json cores = Json::array();
  for (const CoreStats& c : s.cores) {
    cores.push_back({{"ops", c.ops},
                     {"loads", c.loads},
                     {"stores", c.stores},
                     {"ifetches", c.ifetches},
                     {"hits", c.hits},
                     {"misses", c.misses},
                     {"snoop_served_misses", c.snoop_served_misses},
                     {"writebacks", c.writebacks},
                     {"retries", c.retries},
                     {"stall_cycles", c.stall_cycles}});
  }
  return Json{
      {"cycles", s.cycles},
      {"mem_reads", s.mem_reads},
      {"mem_writes", s.mem_writes},
      {"ccu_collision_stalls", s.ccu_collision_stalls},
      {"cache_to_cache_transfers", s.cache_to_cache_transfers},
      {"avg_miss_latency", s.avg_miss_latency()},
      {"miss_latency_total", s.miss_latency_total},
      {"completed_misses", s.completed_misses},
      {"cores", std::move(cores)},
  };
}

Json build_report(const SimConfig& config, const Json& workload, std::vector<ModelRun> runs,
                  const std::optional<std::string>& timestamp) {
  std::sort(runs.begin(), runs.end(),
            [](const ModelRun& a, const ModelRun& b) { return a.model < b.model; });
  Json report;
  report["config"] = config_json(config);
  report["workload"] = workload;

  Json models = Json::array();
  for (const auto& r : runs) models.push_back(r.model);
  report["model"] = runs.size() == 1 ? Json(runs.front().model) : models;

  Json stats = Json::object();
  for (const auto& r : runs) {
    if (!r.stats) continue;
    Json s = stats_json(*r.stats);
    s["image_hash"] = hex64(image_hash(r.image));
    stats[r.model] = std::move(s);
  }
  report["stats"] = std::move(stats);

  const ModelRun* snoop = nullptr;
  const ModelRun* dir = nullptr;
  for (const auto& r : runs) {
    if (r.model == "snoop" && r.stats && !r.error) snoop = &r;
    if (r.model == "directory" && r.stats && !r.error) dir = &r;
  }
  if (snoop && dir) {
    const SimStats& a = *snoop->stats;
    const SimStats& b = *dir->stats;
    report["comparison"] = {
        {"snoop_cycles", a.cycles},
        {"directory_cycles", b.cycles},
        {"speedup", format_hundredths(b.cycles, a.cycles)},
        {"snoop_avg_miss_latency", a.avg_miss_latency()},
        {"directory_avg_miss_latency", b.avg_miss_latency()},
        {"images_equal", snoop->image == dir->image},
    };
  }

  Json violations = Json::array();
  for (const auto& r : runs)
    if (r.error) violations.push_back({{"model", r.model}, {"message", *r.error}});
  if (!violations.empty()) report["violations"] = std::move(violations);
  if (timestamp) report["timestamp"] = *timestamp;
  return report;
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

}  // namespace culsim

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

#include <gtest/gtest.h>

#include "culsim/sim.hpp"
#include "culsim/workload.hpp"

namespace culsim {
namespace {

TEST(Build, RejectsBadGeometry) {
  SimConfig cfg;
  cfg.ways = 3;
  try {
    Simulation sim(cfg);
    FAIL() << "expected a configuration error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "cache_size");
  }
}

TEST(Build, RejectsCoreCount) {
  SimConfig cfg;
  cfg.n_cores = 5;
  EXPECT_THROW(Simulation{cfg}, ConfigError);
  cfg.n_cores = 1;
  EXPECT_THROW(Simulation{cfg}, ConfigError);
}

TEST(Step, IdleSystemOnlyAdvancesTime) {
  Simulation sim(SimConfig{});
  sim.step();
  sim.step();
  EXPECT_EQ(sim.cycle(), 2u);
  EXPECT_TRUE(sim.done());
  EXPECT_EQ(sim.stats().mem_reads, 0u);
}

TEST(Run, EmptyStreams) {
  Simulation sim(SimConfig{});
  EXPECT_EQ(sim.run(Streams(2)).cycles, 0u);
}

TEST(Run, LoadSeesPreloadedMemory) {
  Simulation sim(SimConfig{});
  sim.preload({{0x40, {0x78, 0x56, 0x34, 0x12}}});
  Streams s(2);
  s[1] = {CoreOp::load(0x40)};
  sim.run(s);
  ASSERT_EQ(sim.records()[1].size(), 1u);
  EXPECT_EQ(sim.records()[1][0].value, 0x12345678u);
}

TEST(Run, LoadObservesRemoteStore) {
  Simulation sim(SimConfig{});
  Streams s(2);
  s[0] = {CoreOp::store(0x40, 7)};
  for (int i = 0; i < 30; ++i) s[1].push_back(CoreOp::load(0x1000));
  s[1].push_back(CoreOp::load(0x40));
  sim.run(s);
  EXPECT_EQ(sim.records()[1].back().value, 7u);
}

TEST(Run, DeterministicStats) {
  SimConfig cfg;
  cfg.n_cores = 3;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::UniformRandom;
  spec.ops_per_core = 500;
  const Streams s = gen_workload(spec, cfg);
  Simulation a(cfg), b(cfg);
  EXPECT_EQ(a.run(s), b.run(s));
  EXPECT_EQ(a.final_memory_image(), b.final_memory_image());
}

TEST(Run, StatsInvariants) {
  SimConfig cfg;
  cfg.coherent_ifetch = true;
  Streams s(2);
  for (Word i = 0; i < 50; ++i) {
    s[0].push_back(CoreOp::store(0x40 + 4 * (i % 4), i));
    s[0].push_back(CoreOp::ifetch(0x40));
    s[1].push_back(CoreOp::load(0x40));
  }
  Simulation sim(cfg);
  const SimStats st = sim.run(s);
  std::uint64_t misses = 0;
  for (const CoreStats& c : st.cores) {
    EXPECT_EQ(c.hits + c.misses, c.loads + c.stores + c.ifetches);
    EXPECT_EQ(c.ops, c.loads + c.stores + c.ifetches);
    misses += c.misses;
  }
  EXPECT_LE(st.cache_to_cache_transfers, misses);
}

TEST(Watchdog, DeadlockDiagnosticDumpsState) {
  SimConfig cfg;
  cfg.watchdog_cycles = 5;
  cfg.latencies.mem_read = 50;
  Simulation sim(cfg);
  Streams s(2);
  s[0] = {CoreOp::load(0x40)};
  try {
    sim.run(s);
    FAIL() << "expected the watchdog to fire";
  } catch (const DeadlockError& e) {
    EXPECT_NE(e.dump().find("core0"), std::string::npos) << e.dump();
  }
}

struct MonitorCase {
  WorkloadKind kind;
  std::uint32_t cores;
  bool coherent_ifetch;
};

class Monitors : public ::testing::TestWithParam<MonitorCase> {};

// The per-cycle monitors stay silent and the final image matches the last
// store to every word.
TEST_P(Monitors, HoldOnSyntheticWorkloads) {
  const MonitorCase& p = GetParam();
  SimConfig cfg;
  cfg.n_cores = p.cores;
  cfg.coherent_ifetch = p.coherent_ifetch;
  cfg.cache_size = 256;  // force evictions
  WorkloadSpec spec;
  spec.kind = p.kind;
  spec.ops_per_core = 800;
  spec.working_set = 24;
  Streams s = gen_workload(spec, cfg);
  if (p.coherent_ifetch)
    for (auto& stream : s)
      for (std::size_t i = 0; i < stream.size(); i += 7)
        stream[i] = CoreOp::ifetch(stream[i].address);

  SimOptions opts;
  opts.check = true;
  Simulation sim(cfg, ProtocolTable::canonical(), opts);
  ASSERT_NO_THROW(sim.run(s));

  std::map<Addr, Word> last;
  for (const auto& stream : s)
    for (const CoreOp& op : stream)
      if (op.kind == OpKind::Store) last[op.address] = op.value;
  const MemoryImage img = sim.final_memory_image();
  for (const auto& [addr, v] : last) {
    auto it = img.find(cfg.line_of(addr));
    ASSERT_NE(it, img.end());
    EXPECT_EQ(it->second[cfg.word_of(addr)], v);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Workloads, Monitors,
    ::testing::Values(MonitorCase{WorkloadKind::ProducerConsumer, 2, false},
                      MonitorCase{WorkloadKind::Migratory, 3, false},
                      MonitorCase{WorkloadKind::FalseSharing, 4, false},
                      MonitorCase{WorkloadKind::UniformRandom, 4, true},
                      MonitorCase{WorkloadKind::ReadMostly, 2, true}));

TEST(Hundredths, RoundsHalfUp) {
  EXPECT_EQ(format_hundredths(1, 3), "0.33");
  EXPECT_EQ(format_hundredths(2, 3), "0.67");
  EXPECT_EQ(format_hundredths(1, 8), "0.13");
  EXPECT_EQ(format_hundredths(5, 0), "0.00");
  EXPECT_EQ(format_hundredths(127, 100), "1.27");
}

TEST(ImageHash, DependsOnContents) {
  MemoryImage a{{0x0, {1, 2, 3, 4}}};
  MemoryImage b{{0x0, {1, 2, 3, 5}}};
  EXPECT_NE(image_hash(a), image_hash(b));
  EXPECT_EQ(image_hash(a), image_hash(MemoryImage(a)));
}

}  // namespace
}  // namespace culsim

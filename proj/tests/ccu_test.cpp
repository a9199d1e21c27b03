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

#include <algorithm>

#include "culsim/ccu.hpp"
#include "culsim/sim.hpp"

namespace culsim {
namespace {

using K = CoherentKind;

TEST(Route, DemuxSplitsCoherentFromMemory) {
  EXPECT_EQ(route(K::ReadShared), Path::Coherent);
  EXPECT_EQ(route(K::ReadUnique), Path::Coherent);
  EXPECT_EQ(route(K::CleanUnique), Path::Coherent);
  EXPECT_EQ(route(K::ReadOnce), Path::Coherent);
  EXPECT_EQ(route(K::WriteBack), Path::Memory);
  EXPECT_EQ(route(K::ReadNoSnoop), Path::Memory);
  EXPECT_EQ(route(K::WriteNoSnoop), Path::Memory);
}

TEST(MuxGrant, EarliestArrivalWins) {
  std::vector<std::optional<Cycle>> a = {Cycle{5}, Cycle{3}, std::nullopt};
  EXPECT_EQ(mux_grant(a, 1), 1u);
}

TEST(MuxGrant, TiesRotateAfterLastGrant) {
  std::vector<std::optional<Cycle>> a = {Cycle{2}, Cycle{2}, Cycle{2}};
  EXPECT_EQ(mux_grant(a, 0), 1u);
  EXPECT_EQ(mux_grant(a, 1), 2u);
  EXPECT_EQ(mux_grant(a, 2), 0u);
}

TEST(MuxGrant, NothingPendingIsAnError) {
  std::vector<std::optional<Cycle>> a(2);
  EXPECT_THROW(mux_grant(a, 0), std::invalid_argument);
}

TEST(MuxGrant, FairUnderContinuousContention) {
  for (std::uint32_t n : {2u, 3u, 4u}) {
    std::vector<std::optional<Cycle>> a(n, Cycle{0});
    std::vector<int> grants(n, 0);
    CoreId last = 0;
    for (int i = 0; i < 1000; ++i) ++grants[last = mux_grant(a, last)];
    const auto [lo, hi] = std::minmax_element(grants.begin(), grants.end());
    EXPECT_LE(*hi - *lo, 1) << "n=" << n;
  }
}

TEST(Collision, SameLineStalls) {
  CollisionTable t(8, 16);
  EXPECT_EQ(t.check(0x40), CollisionTable::Verdict::Proceed);
  EXPECT_EQ(t.check(0x44), CollisionTable::Verdict::Stall);
  EXPECT_EQ(t.check(0x50), CollisionTable::Verdict::Proceed);
  t.remove(0x48);
  EXPECT_EQ(t.check(0x40), CollisionTable::Verdict::Proceed);
}

TEST(Collision, FullTableStalls) {
  CollisionTable t(2, 16);
  t.check(0x00);
  t.check(0x10);
  EXPECT_EQ(t.check(0x20), CollisionTable::Verdict::Stall);
  EXPECT_EQ(t.size(), 2u);
}

TEST(Collision, RemovingAnAbsentLineFaults) {
  CollisionTable t(2, 16);
  EXPECT_ANY_THROW(t.remove(0x40));
}

TEST(SnoopTargets, ExcludeInitiatorAndNoncoherentIcaches) {
  const auto t = snoop_targets({1, CacheKind::Data}, 3, false);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], (AgentId{0, CacheKind::Data}));
  EXPECT_EQ(t[1], (AgentId{2, CacheKind::Data}));
}

TEST(SnoopTargets, CoherentIcachesIncludingOwnCore) {
  const auto t = snoop_targets({0, CacheKind::Data}, 2, true);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_NE(std::find(t.begin(), t.end(), AgentId{0, CacheKind::Instr}), t.end());
}

TEST(CollectCr, FirstDataResponderWins) {
  Aggregate agg;
  collect_cr(agg, {false, false, true, false}, {0, CacheKind::Data});
  collect_cr(agg, {true, true, false, false}, {2, CacheKind::Data});
  collect_cr(agg, {true, false, true, false}, {3, CacheKind::Data});
  EXPECT_TRUE(agg.any_is_shared);
  EXPECT_TRUE(agg.any_pass_dirty);
  EXPECT_EQ(agg.data_source, (AgentId{2, CacheKind::Data}));
}

TEST(WritebackFifo, HoldsAndDrainsInOrder) {
  WritebackFifo f(2);
  f.push({0x10, {1}});
  f.push({0x20, {2}});
  EXPECT_TRUE(f.full());
  EXPECT_TRUE(f.holds(0x20));
  EXPECT_EQ(f.pop().line, 0x10u);
  EXPECT_FALSE(f.holds(0x10));
}

TEST(CcuFault, AckWithoutTransaction) {
  SimConfig cfg;
  Fabric fabric(cfg.n_cores, cfg.latencies.ccu_stage, cfg.latencies.snoop_hop);
  MemoryModel mem(cfg.line_size, cfg.latencies.mem_read, cfg.latencies.mem_write);
  Ccu ccu(cfg, fabric, mem);
  fabric.ack[0].push(0, CompletionAck{0, 0x40});
  EXPECT_THROW(
      {
        for (Cycle c = 0; c < 5; ++c) ccu.tick(c);
      },
      ProtocolFault);
}

TEST(CcuFault, ResponseWithEmptyOrderFifo) {
  SimConfig cfg;
  Fabric fabric(cfg.n_cores, cfg.latencies.ccu_stage, cfg.latencies.snoop_hop);
  MemoryModel mem(cfg.line_size, cfg.latencies.mem_read, cfg.latencies.mem_write);
  Ccu ccu(cfg, fabric, mem);
  fabric.cr[1].push(0, SnoopReply{{}, std::nullopt, 0x40});
  EXPECT_THROW(
      {
        for (Cycle c = 0; c < 10; ++c) ccu.tick(c);
      },
      ProtocolFault);
}

Cycle pair_cycles(Addr a, Addr b, bool serialize) {
  SimConfig cfg;
  cfg.serialize = serialize;
  Simulation sim(cfg);
  Streams s(2);
  s[0] = {CoreOp::load(a)};
  s[1] = {CoreOp::load(b)};
  return sim.run(s).cycles;
}

TEST(Pipelining, DistinctLinesOverlap) {
  EXPECT_LT(pair_cycles(0x100, 0x200, false), pair_cycles(0x100, 0x200, true));
}

TEST(Pipelining, SameLineSerializes) {
  SimConfig cfg;
  Simulation sim(cfg);
  Streams s(2);
  s[0] = {CoreOp::store(0x100, 1)};
  s[1] = {CoreOp::store(0x104, 2)};
  const SimStats st = sim.run(s);
  EXPECT_GT(st.ccu_collision_stalls, 0u);
  EXPECT_GE(pair_cycles(0x100, 0x104, false), pair_cycles(0x100, 0x200, false));
}

TEST(Pipelining, CollisionTableNeverHoldsDuplicates) {
  SimConfig cfg;
  cfg.n_cores = 4;
  SimOptions opts;
  opts.check = true;
  Simulation sim(cfg, ProtocolTable::canonical(), opts);
  Streams s(4);
  for (CoreId c = 0; c < 4; ++c)
    for (Word i = 0; i < 100; ++i) s[c].push_back(CoreOp::store(0x40 + 16 * (i % 2), i));
  EXPECT_NO_THROW(sim.run(s));
}

TEST(Memory, NoncoherentWritesBypassSnooping) {
  SimConfig cfg;
  Simulation sim(cfg);
  Streams s(2);
  s[0] = {CoreOp::ifetch(0x100)};
  const SimStats st = sim.run(s);
  EXPECT_EQ(st.mem_reads, 1u);
  EXPECT_EQ(sim.ccu().stats().transactions, 0u);
}

}  // namespace
}  // namespace culsim

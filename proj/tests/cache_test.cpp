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

#include "culsim/cache.hpp"
#include "culsim/sim.hpp"

namespace culsim {
namespace {

using S = LineState;
using K = CoherentKind;

class CacheTest : public ::testing::Test {
 protected:
  SimConfig cfg;
  ProtocolTable table = ProtocolTable::canonical();

  ReadResponse data_resp(K kind, Addr line, bool shared, bool dirty, Word w0 = 0) {
    LineData d(cfg.words_per_line(), 0);
    d[0] = w0;
    return {kind, line, shared, dirty, false, d};
  }
};

TEST_F(CacheTest, LoadMissThenHit) {
  Cache c(cfg, table);
  auto r = c.core_access(CoreOp::load(0x40), 0);
  ASSERT_TRUE(std::holds_alternative<NeedsMiss>(r));
  EXPECT_EQ(std::get<NeedsMiss>(r).kind, K::ReadShared);
  const MissOutcome out = c.miss_complete(data_resp(K::ReadShared, 0x40, false, false, 7));
  EXPECT_FALSE(out.retried);
  EXPECT_EQ(out.installed, S::Exclusive);
  EXPECT_EQ(out.value, 7u);
  auto hit = c.core_access(CoreOp::load(0x40), 1);
  ASSERT_TRUE(std::holds_alternative<Served>(hit));
  EXPECT_EQ(std::get<Served>(hit).value, 7u);
}

TEST_F(CacheTest, StoreOnExclusiveIsSilent) {
  Cache c(cfg, table);
  c.install(0x40, S::Exclusive, LineData(cfg.words_per_line(), 0));
  auto r = c.core_access(CoreOp::store(0x44, 5), 0);
  ASSERT_TRUE(std::holds_alternative<Served>(r));
  EXPECT_EQ(c.state_of(0x40), S::Modified);
  EXPECT_EQ(c.lookup(0x40)->line->data[1], 5u);
}

TEST_F(CacheTest, StoreOnSharedUpgrades) {
  Cache c(cfg, table);
  c.install(0x40, S::Shared, LineData(cfg.words_per_line(), 3));
  auto r = c.core_access(CoreOp::store(0x40, 9), 0);
  ASSERT_TRUE(std::holds_alternative<NeedsMiss>(r));
  EXPECT_EQ(std::get<NeedsMiss>(r).kind, K::CleanUnique);
  ReadResponse ack{K::CleanUnique, 0x40, false, false, false, std::nullopt};
  const MissOutcome out = c.miss_complete(ack);
  EXPECT_EQ(out.installed, S::Modified);
  EXPECT_EQ(c.lookup(0x40)->line->data[0], 9u);
  EXPECT_EQ(c.lookup(0x40)->line->data[1], 3u);
}

TEST_F(CacheTest, SnoopReadSharedOnModified) {
  Cache c(cfg, table);
  LineData d(cfg.words_per_line(), 0);
  d[2] = 0x55;
  c.install(0x80, S::Modified, d);
  const SnoopResult r = c.handle_snoop({K::ReadShared, 0x80});
  EXPECT_TRUE(r.resp.data_transfer);
  EXPECT_TRUE(r.resp.is_shared);
  ASSERT_TRUE(r.data.has_value());
  EXPECT_EQ(r.data->beats[2], 0x55u);
  EXPECT_EQ(c.state_of(0x80), S::Owned);
  EXPECT_FALSE(r.invalidation_signal.has_value());
}

TEST_F(CacheTest, SnoopInvalidationRaisesSignal) {
  Cache c(cfg, table);
  c.install(0x80, S::Shared, LineData(cfg.words_per_line(), 0));
  const SnoopResult r = c.handle_snoop({K::ReadUnique, 0x80});
  EXPECT_EQ(c.state_of(0x80), S::Invalid);
  EXPECT_EQ(r.invalidation_signal, 0x80u);
}

TEST_F(CacheTest, SnoopMissReturnsNoData) {
  Cache c(cfg, table);
  const SnoopResult r = c.handle_snoop({K::ReadShared, 0x80});
  EXPECT_EQ(r.resp, SnoopResponse{});
  EXPECT_FALSE(r.data.has_value());
}

// A unique fetch that saw a snoop read of its line retries instead of
// installing a copy the other cache still believes it shares.
TEST_F(CacheTest, RetryAfterInterferingSnoop) {
  Cache c(cfg, table);
  c.install(0x40, S::Shared, LineData(cfg.words_per_line(), 0));
  ASSERT_TRUE(std::holds_alternative<NeedsMiss>(c.core_access(CoreOp::store(0x40, 1), 0)));
  c.handle_snoop({K::ReadUnique, 0x40});
  ASSERT_TRUE(c.miss()->invalidated_by_snoop);
  ReadResponse ack{K::CleanUnique, 0x40, false, false, false, std::nullopt};
  const MissOutcome out = c.miss_complete(ack);
  EXPECT_TRUE(out.retried);
  EXPECT_EQ(out.retry_kind, K::ReadUnique);
  EXPECT_EQ(c.miss()->retries, 1u);
}

TEST_F(CacheTest, RetryDisabledInstallsAnyway) {
  Cache c(cfg, table, /*retry_rule=*/false);
  c.install(0x40, S::Shared, LineData(cfg.words_per_line(), 0));
  c.core_access(CoreOp::store(0x40, 1), 0);
  c.handle_snoop({K::ReadUnique, 0x40});
  ReadResponse ack{K::CleanUnique, 0x40, false, false, false, std::nullopt};
  EXPECT_FALSE(c.miss_complete(ack).retried);
}

TEST_F(CacheTest, EvictionOfDirtyVictim) {
  cfg.cache_size = 64;  // one set of four 16-byte ways
  Cache c(cfg, table);
  const Addr stride = cfg.line_size;
  for (Addr i = 0; i < 4; ++i) c.install(i * stride, S::Modified, LineData(cfg.words_per_line(), 1));
  ASSERT_TRUE(std::holds_alternative<NeedsMiss>(c.core_access(CoreOp::load(4 * stride), 0)));
  const MissOutcome out = c.miss_complete(data_resp(K::ReadShared, 4 * stride, false, false));
  ASSERT_TRUE(out.writeback.has_value());
  EXPECT_EQ(out.writeback->data[0], 1u);
}

TEST_F(CacheTest, IcacheStaysSharedWhenNoncoherent) {
  Cache c(cfg, table);
  auto r = c.core_access(CoreOp::ifetch(0x100), 0);
  ASSERT_TRUE(std::holds_alternative<NeedsMiss>(r));
  EXPECT_EQ(std::get<NeedsMiss>(r).kind, K::ReadNoSnoop);
}

TEST_F(CacheTest, IcacheUsesReadOnceWhenCoherent) {
  cfg.coherent_ifetch = true;
  Cache c(cfg, table);
  auto r = c.core_access(CoreOp::ifetch(0x100), 0);
  ASSERT_TRUE(std::holds_alternative<NeedsMiss>(r));
  EXPECT_EQ(std::get<NeedsMiss>(r).kind, K::ReadOnce);
  c.miss_complete(data_resp(K::ReadOnce, 0x100, false, false));
  EXPECT_EQ(c.state_of(0x100, CacheKind::Instr), S::Shared);
}

// Port timing through the full system.
TEST(Subsystem, HitLatency) {
  SimConfig cfg;
  cfg.latencies.l1_hit = 3;
  Simulation sim(cfg);
  Streams s(2);
  s[0] = {CoreOp::load(0x40), CoreOp::load(0x40)};
  sim.run(s);
  const auto& recs = sim.records()[0];
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_TRUE(recs[1].hit);
  EXPECT_EQ(recs[1].completed - recs[1].issued, cfg.latencies.l1_hit);
}

TEST(Subsystem, SinglePortAccessPerCycle) {
  SimConfig cfg;
  SimOptions opts;
  opts.check = true;
  Simulation sim(cfg, ProtocolTable::canonical(), opts);
  Streams s(2);
  for (Word i = 0; i < 100; ++i) {
    s[0].push_back(CoreOp::store(0x40 + 4 * (i % 4), i));
    s[1].push_back(CoreOp::load(0x40 + 4 * (i % 4)));
  }
  sim.run(s);
  EXPECT_LE(sim.core(0).max_port_accesses(), 1u);
  EXPECT_LE(sim.core(1).max_port_accesses(), 1u);
}

}  // namespace
}  // namespace culsim

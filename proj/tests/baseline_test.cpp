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

#include "culsim/baseline.hpp"
#include "culsim/workload.hpp"

namespace culsim {
namespace {

std::vector<HopKind> kinds(const DirAccess& a) {
  std::vector<HopKind> out;
  for (const Hop& h : a.hops) out.push_back(h.kind);
  return out;
}

TEST(DirAccess, UncachedLoadGoesToMemory) {
  const DirAccess a = dir_access({}, {0, false, false});
  EXPECT_EQ(kinds(a), (std::vector<HopKind>{HopKind::ToDirectory, HopKind::MemoryRead,
                                             HopKind::DataReturn}));
  EXPECT_EQ(a.granted, LineState::Exclusive);
  EXPECT_EQ(a.next.state, DirState::OwnedBy);
  EXPECT_EQ(a.next.owner, 0u);
}

TEST(DirAccess, LoadOnOwnedLineTakesThreeHops) {
  const DirAccess a = dir_access({DirState::OwnedBy, {}, 1}, {0, false, false});
  EXPECT_EQ(kinds(a), (std::vector<HopKind>{HopKind::ToDirectory, HopKind::ForwardToOwner,
                                             HopKind::OwnerToRequester}));
  EXPECT_EQ(a.downgraded, 1u);
  EXPECT_EQ(a.next.state, DirState::SharedBy);
  EXPECT_EQ(a.next.sharers, (std::set<CoreId>{0, 1}));
  EXPECT_EQ(a.granted, LineState::Shared);
}

TEST(DirAccess, StoreOnSharedInvalidatesEverySharer) {
  const DirAccess a = dir_access({DirState::SharedBy, {1, 2}, 0}, {0, true, false});
  EXPECT_EQ(a.invalidated, (std::vector<CoreId>{1, 2}));
  EXPECT_EQ(std::count(a.hops.begin(), a.hops.end(), Hop{HopKind::Invalidate, 1}), 1);
  EXPECT_EQ(std::count(a.hops.begin(), a.hops.end(), Hop{HopKind::InvalidateAck, 2}), 1);
  EXPECT_EQ(a.granted, LineState::Modified);
  EXPECT_EQ(a.next.state, DirState::OwnedBy);
}

TEST(DirAccess, UpgradeSkipsMemory) {
  const DirAccess a = dir_access({DirState::SharedBy, {0, 1}, 0}, {0, true, true});
  EXPECT_EQ(std::count(a.hops.begin(), a.hops.end(), Hop{HopKind::MemoryRead, std::nullopt}), 0);
  EXPECT_EQ(a.invalidated, (std::vector<CoreId>{1}));
}

TEST(DirAccess, Latency) {
  Latencies lat;  // hop 4, stage 1, memory 20
  EXPECT_EQ(dir_access({}, {0, false, false}).latency(lat), 4 + 1 + 20 + 4u);
  EXPECT_EQ(dir_access({DirState::OwnedBy, {}, 1}, {0, false, false}).latency(lat), 4 + 1 + 8u);
  // Invalidation round trips overlap the memory read.
  EXPECT_EQ(dir_access({DirState::SharedBy, {1, 2}, 0}, {0, true, false}).latency(lat),
            4 + 1 + 20 + 4u);
  EXPECT_EQ(dir_access({DirState::SharedBy, {0, 1}, 0}, {0, true, true}).latency(lat),
            4 + 1 + 8 + 4u);
}

TEST(DirAccess, OwnerMissIsALogicError) {
  EXPECT_THROW(dir_access({DirState::OwnedBy, {}, 0}, {0, false, false}), std::logic_error);
}

TEST(Directory, EntriesFollowAccesses) {
  DirectorySimulation d(SimConfig{}, true);
  Streams s(2);
  s[0] = {CoreOp::store(0x40, 1)};
  s[1] = {CoreOp::load(0x1000), CoreOp::load(0x1000), CoreOp::load(0x1000),
          CoreOp::load(0x1000), CoreOp::load(0x1000), CoreOp::load(0x40)};
  const SimStats st = d.run(s);
  EXPECT_EQ(d.entry(0x40).state, DirState::SharedBy);
  EXPECT_EQ(d.state_of(0, 0x40), LineState::Shared);
  EXPECT_EQ(d.state_of(1, 0x40), LineState::Shared);
  EXPECT_EQ(st.cache_to_cache_transfers, 1u);
  // The owner's dirty line was written back on downgrade.
  EXPECT_EQ(d.final_memory_image().at(0x40)[0], 1u);
}

TEST(Directory, PrivateWorkloadMatchesSnoopMemoryReads) {
  SimConfig cfg;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Private;
  spec.ops_per_core = 2000;
  const Streams s = gen_workload(spec, cfg);
  Simulation snoop(cfg);
  DirectorySimulation dir(cfg);
  EXPECT_EQ(snoop.run(s).mem_reads, dir.run(s).mem_reads);
}

class Equivalence : public ::testing::TestWithParam<WorkloadKind> {};

TEST_P(Equivalence, FinalImagesMatchSnoopModel) {
  SimConfig cfg;
  cfg.n_cores = 3;
  cfg.cache_size = 512;
  WorkloadSpec spec;
  spec.kind = GetParam();
  spec.ops_per_core = 1500;
  spec.working_set = 40;
  const Streams s = gen_workload(spec, cfg);
  Simulation snoop(cfg);
  DirectorySimulation dir(cfg, /*check=*/true);
  snoop.run(s);
  ASSERT_NO_THROW(dir.run(s));
  EXPECT_EQ(snoop.final_memory_image(), dir.final_memory_image());
}

INSTANTIATE_TEST_SUITE_P(Workloads, Equivalence,
                         ::testing::Values(WorkloadKind::Private, WorkloadKind::ProducerConsumer,
                                           WorkloadKind::Migratory, WorkloadKind::FalseSharing,
                                           WorkloadKind::ReadMostly,
                                           WorkloadKind::UniformRandom));

TEST(Directory, SlowerOnSharingHeavyWorkloads) {
  SimConfig cfg;
  for (WorkloadKind k : {WorkloadKind::ProducerConsumer, WorkloadKind::Migratory}) {
    WorkloadSpec spec;
    spec.kind = k;
    spec.ops_per_core = 4000;
    const Streams s = gen_workload(spec, cfg);
    Simulation snoop(cfg);
    DirectorySimulation dir(cfg);
    const SimStats a = snoop.run(s);
    const SimStats b = dir.run(s);
    EXPECT_LT(a.cycles, b.cycles) << to_string(k);
    EXPECT_LT(a.miss_latency_total * b.completed_misses,
              b.miss_latency_total * a.completed_misses)
        << to_string(k);
  }
}

TEST(Directory, Deterministic) {
  SimConfig cfg;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::UniformRandom;
  const Streams s = gen_workload(spec, cfg);
  DirectorySimulation a(cfg), b(cfg);
  EXPECT_EQ(a.run(s), b.run(s));
}

}  // namespace
}  // namespace culsim

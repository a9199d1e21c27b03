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

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Limits and tolerances are fixed here, not read from the command
// line.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "culsim/baseline.hpp"
#include "culsim/cache.hpp"
#include "culsim/ccu.hpp"
#include "culsim/experiment.hpp"
#include "culsim/protocol.hpp"
#include "culsim/sim.hpp"
#include "culsim/verify.hpp"
#include "culsim/workload.hpp"

using namespace culsim;

namespace {

// Wall-clock budgets per criterion, in seconds.
constexpr double kTableLimit = 1;
constexpr double kOracleLimit = 120;
constexpr double kLitmusLimit = 300;
constexpr double kExhaustiveLimit = 60;
constexpr double kTransferLimit = 1;
constexpr double kCollisionLimit = 10;
constexpr double kPriorityLimit = 1;
constexpr double kFairnessLimit = 5;
constexpr double kSpeedupLimit = 30;
constexpr double kSmcLimit = 10;
constexpr double kDeterminismLimit = 30;

// Minimum number of shipped mutations that must be caught.
constexpr std::size_t kMinMutations = 6;
// Fairness: largest allowed spread of per-core grant counts.
constexpr std::uint64_t kMaxGrantSpread = 1;
constexpr std::uint64_t kSpeedupOps = 10000;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (v.pass && s > limit_s) {
    v.pass = false;
    v.detail += " (over the time limit)";
  }
  if (!v.pass) ++failures;
  std::printf("%s %s: %s [%.2fs / %.0fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(),
              v.detail.c_str(), s, limit_s);
  std::fflush(stdout);
}

Verdict fail(const std::string& why) { return {false, why}; }

// ---------------------------------------------------------------------------

Verdict table_fidelity() {
  struct Row {
    LineState state;
    std::string_view ace;
    LineFlags flags;
  };
  // MOESI / ACE / valid shared dirty, as published.
  const Row rows[] = {
      {LineState::Modified, "UniqueDirty", {true, false, true}},
      {LineState::Owned, "SharedDirty", {true, true, true}},
      {LineState::Exclusive, "UniqueClean", {true, false, false}},
      {LineState::Shared, "SharedClean", {true, true, false}},
      {LineState::Invalid, "Invalid", {false, false, false}},
  };
  for (const Row& r : rows) {
    if (ace_name(r.state) != r.ace) return fail(std::string(to_string(r.state)) + " ACE name");
    const LineFlags f = flags_of_state(r.state);
    if (r.state == LineState::Invalid ? f.valid : !(f == r.flags))
      return fail(std::string(to_string(r.state)) + " flags differ");
    if (state_of_flags(r.flags) != r.state) return fail(std::string(to_string(r.state)) + " decode");
  }
  // Invalid ignores shared and dirty.
  for (bool s : {false, true})
    for (bool d : {false, true})
      if (state_of_flags({false, s, d}) != LineState::Invalid) return fail("valid=0 must decode to I");
  for (LineState st : kAllStates)
    if (state_of_flags(flags_of_state(st)) != st) return fail("round trip");
  return {true, "5 rows, round trip over all states"};
}

Verdict oracle_certification() {
  const OracleReport rep = oracle_tables();
  if (!rep.all_certified() || !rep.failures.empty() || !rep.exhaustive)
    return fail("canonical table not certified:\n" + rep.format());
  const auto muts = shipped_mutations();
  if (muts.size() < kMinMutations) return fail("too few shipped mutations");
  std::size_t caught = 0;
  std::string missed;
  for (const auto& text : muts) {
    const MutationVerdict v = check_mutation(parse_mutation(text));
    if (v.caught && v.witness && !v.witness->trace.empty()) ++caught;
    else missed += " " + text;
  }
  if (caught != muts.size()) return fail("mutations not caught:" + missed);
  std::ostringstream d;
  d << "all pairs certified (" << rep.states << " states), " << caught << "/" << muts.size()
    << " mutations caught with traces";
  return {true, d.str()};
}

Verdict litmus_suite() {
  std::uint64_t states = 0;
  unsigned runs = 0;
  for (unsigned n : {2u, 3u, 4u}) {
    for (bool coherent : {false, true}) {
      for (const LitmusTest& t : builtin_litmus(n)) {
        ExploreConfig ec;
        ec.coherent_ifetch = coherent;
        const LitmusResult r = run_litmus(t, ec);
        const std::string where = t.name + " n=" + std::to_string(n) +
                                  (coherent ? " coherent" : " noncoherent");
        if (!r.exhaustive) return fail(where + " not exhaustive");
        if (r.protocol_violation) return fail(where + " protocol violation");
        if (r.forbidden_seen) return fail(where + " forbidden outcome observed");
        states += r.states;
        ++runs;
      }
    }
  }
  return {true, std::to_string(runs) + " runs, no forbidden outcome, " + std::to_string(states) +
                    " states"};
}

Verdict exhaustive_exploration() {
  // Two cores race stores to both lines and read both back.
  const std::vector<AbstractProgram> progs = {
      {AbstractOp::store(0, 0, 1), AbstractOp::store(1, 0, 1), AbstractOp::load(1, 0, 0),
       AbstractOp::load(0, 0, 1)},
      {AbstractOp::store(1, 0, 2), AbstractOp::store(0, 0, 2), AbstractOp::load(0, 0, 2),
       AbstractOp::load(1, 0, 3)},
  };
  std::optional<std::uint64_t> count;
  for (unsigned workers : {1u, 2u, 4u}) {
    for (int rerun = 0; rerun < 2; ++rerun) {
      ExploreConfig ec;
      ec.workers = workers;
      const ExploreResult r = explore(progs, ec);
      if (!r.exhaustive) return fail("search not exhaustive");
      if (!r.violations.empty()) return fail(r.violations.front().format());
      if (count && *count != r.reachable_states)
        return fail("state count differs with " + std::to_string(workers) + " workers");
      count = r.reachable_states;
    }
  }
  return {true, std::to_string(*count) + " reachable states, stable across reruns and 1/2/4 workers"};
}

Verdict cache_to_cache() {
  SimConfig cfg;
  SimOptions opts;
  opts.check = true;
  Simulation sim(cfg, ProtocolTable::canonical(), opts);
  const Addr x = 0x1000;
  Streams s(2);
  for (Word i = 1; i <= 50; ++i) {
    s[0].push_back(CoreOp::store(x, i));
    s[1].push_back(CoreOp::load(x));
  }
  const SimStats st = sim.run(s);
  const auto reads = sim.memory().reads_of(x);
  std::ostringstream d;
  d << "mem_reads(x)=" << reads << " cache_to_cache_transfers=" << st.cache_to_cache_transfers;
  return {reads == 1 && st.cache_to_cache_transfers >= 1, d.str()};
}

Verdict collisions() {
  // Same-line contention with the monitors on; a duplicate line past the
  // collision check throws.
  SimConfig cfg;
  cfg.n_cores = 4;
  SimOptions opts;
  opts.check = true;
  Streams hot(4);
  for (CoreId c = 0; c < 4; ++c)
    for (Word i = 0; i < 200; ++i)
      hot[c].push_back(i % 2 ? CoreOp::load(0x40) : CoreOp::store(0x40 + 4 * c, i));
  Simulation contended(cfg, ProtocolTable::canonical(), opts);
  const SimStats hs = contended.run(hot);
  if (hs.ccu_collision_stalls == 0) return fail("no collision stall on a shared line");

  auto cycles = [](bool serialize) {
    SimConfig c;
    c.serialize = serialize;
    Simulation sim(c);
    Streams s(2);
    s[0].push_back(CoreOp::load(0x100));
    s[1].push_back(CoreOp::load(0x200));
    return sim.run(s).cycles;
  };
  const Cycle pipelined = cycles(false);
  const Cycle serialized = cycles(true);
  std::ostringstream d;
  d << "contended run clean with " << hs.ccu_collision_stalls
    << " collision stalls; distinct lines " << pipelined << " cycles vs " << serialized
    << " serialized";
  return {pipelined < serialized, d.str()};
}

Verdict priority() {
  // Miss Handler first, Snoop Controller second, then the core-side
  // controllers in their fixed order.
  const RequesterId order[] = {RequesterId::MissHandler, RequesterId::SnoopCtrl,
                               RequesterId::Ptw,         RequesterId::LoadUnit,
                               RequesterId::Accelerator, RequesterId::StoreUnit};
  unsigned pairs = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) {
      if (arbitrate({order[i], order[j]}) != order[i] ||
          arbitrate({order[j], order[i]}) != order[i])
        return fail(std::string(to_string(order[i])) + " vs " + std::string(to_string(order[j])));
      ++pairs;
    }
  }
  return {true, std::to_string(pairs) + " pairs, both argument orders"};
}

Verdict fairness() {
  std::string detail;
  for (std::uint32_t n : {2u, 3u, 4u}) {
    std::vector<std::optional<Cycle>> arrival(n, Cycle{0});
    std::vector<std::uint64_t> grants(n, 0);
    CoreId last = n - 1;
    for (int g = 0; g < 1000; ++g) {
      last = mux_grant(arrival, last);
      ++grants[last];
    }
    const auto [lo, hi] = std::minmax_element(grants.begin(), grants.end());
    if (*hi - *lo > kMaxGrantSpread) return fail("spread " + std::to_string(*hi - *lo) + " at n=" + std::to_string(n));
    detail += "n=" + std::to_string(n) + " spread " + std::to_string(*hi - *lo) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {true, detail};
}

Verdict speedup() {
  std::string detail;
  bool pass = true;
  for (WorkloadKind k : {WorkloadKind::ProducerConsumer, WorkloadKind::Migratory}) {
    Experiment e;
    e.models = {"snoop", "directory"};
    WorkloadSpec spec;
    spec.kind = k;
    spec.ops_per_core = kSpeedupOps;
    spec.seed = e.config.seed;
    e.streams = gen_workload(spec, e.config);
    const ExperimentResult r = run_experiment(e);
    if (r.exit_code != kExitOk || !r.report.contains("comparison")) return fail("run failed");
    const Json& c = r.report["comparison"];
    const auto sc = c["snoop_cycles"].get<std::uint64_t>();
    const auto dc = c["directory_cycles"].get<std::uint64_t>();
    const bool eq = c["images_equal"].get<bool>();
    pass &= sc < dc && eq;
    detail += std::string(to_string(k)) + " snoop " + std::to_string(sc) + " vs directory " +
              std::to_string(dc) + " (x" + c["speedup"].get<std::string>() + ")" +
              (eq ? "" : " IMAGES DIFFER") + "; ";
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Verdict determinism() {
  auto report = [](unsigned workers) {
    Experiment e;
    e.models = {"snoop", "directory"};
    e.config.seed = 42;
    e.workers = workers;
    WorkloadSpec spec;
    spec.kind = WorkloadKind::UniformRandom;
    spec.ops_per_core = 2000;
    spec.seed = e.config.seed;
    e.streams = gen_workload(spec, e.config);
    return dump_report(run_experiment(e).report);
  };
  const std::string a = report(1), b = report(1), c = report(2);
  return {a == b && a == c, "3 runs, " + std::to_string(a.size()) + "-byte reports " +
                                (a == b && a == c ? "identical" : "differ")};
}

Verdict coherent_ifetch() {
  ExploreConfig ec;
  ec.coherent_ifetch = false;
  const LitmusResult off = run_litmus(smc_litmus(), ec);
  ec.coherent_ifetch = true;
  const LitmusResult on = run_litmus(smc_litmus(), ec);
  if (!off.exhaustive || !on.exhaustive) return fail("not exhaustive");
  if (on.forbidden_seen || on.protocol_violation) return fail("stale fetch with coherent ifetch");
  if (!off.forbidden_seen) return fail("stale fetch never observed without coherent ifetch");

  // Cycle level: core1 fetches x, then core0 stores to it much later.
  auto icache_after = [](bool coherent) {
    SimConfig cfg;
    cfg.coherent_ifetch = coherent;
    SimOptions opts;
    opts.check = true;
    Simulation sim(cfg, ProtocolTable::canonical(), opts);
    Streams s(2);
    for (int i = 0; i < 40; ++i) s[0].push_back(CoreOp::load(0x8000));
    s[0].push_back(CoreOp::store(0x40, 0xabc));
    s[1].push_back(CoreOp::ifetch(0x40));
    sim.run(s);
    return sim.core(1).cache().state_of(0x40, CacheKind::Instr);
  };
  const LineState st_on = icache_after(true);
  const LineState st_off = icache_after(false);
  std::ostringstream d;
  d << "explorer: stale fetch forbidden when on, observed when off; cycle sim icache "
    << short_name(st_on) << " (on) / " << short_name(st_off) << " (off)";
  return {st_on == LineState::Invalid && st_off == LineState::Shared, d.str()};
}

}  // namespace

int main() {
  criterion("table1-fidelity", kTableLimit, table_fidelity);
  criterion("oracle-certification", kOracleLimit, oracle_certification);
  criterion("litmus-suite", kLitmusLimit, litmus_suite);
  criterion("exhaustive-exploration", kExhaustiveLimit, exhaustive_exploration);
  criterion("cache-to-cache-transfer", kTransferLimit, cache_to_cache);
  criterion("collision-serialization", kCollisionLimit, collisions);
  criterion("priority-arbitration", kPriorityLimit, priority);
  criterion("round-robin-fairness", kFairnessLimit, fairness);
  criterion("directional-speedup", kSpeedupLimit, speedup);
  criterion("determinism", kDeterminismLimit, determinism);
  criterion("coherent-ifetch", kSmcLimit, coherent_ifetch);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

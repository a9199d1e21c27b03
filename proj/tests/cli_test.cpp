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
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "culsim/report.hpp"
#include "culsim/trace.hpp"
#include "culsim/workload.hpp"

namespace culsim {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Traces

TEST(Trace, TwoStreams) {
  const Streams s = parse_trace("0 W 0x40 0x1\n1 R 0x40\n", "t", 2);
  ASSERT_EQ(s[0].size(), 1u);
  ASSERT_EQ(s[1].size(), 1u);
  EXPECT_EQ(s[0][0], CoreOp::store(0x40, 1));
  EXPECT_EQ(s[1][0], CoreOp::load(0x40));
}

TEST(Trace, CommentsAndBlankLines) {
  const Streams s = parse_trace("# header\n\n  1 IF 0x100   # fetch\n", "t", 2);
  EXPECT_TRUE(s[0].empty());
  ASSERT_EQ(s[1].size(), 1u);
  EXPECT_EQ(s[1][0], CoreOp::ifetch(0x100));
}

void expect_error(const std::string& text, std::size_t line, std::size_t column) {
  try {
    parse_trace(text, "t", 2);
    FAIL() << "accepted: " << text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_EQ(e.column(), column) << e.what();
  }
}

TEST(Trace, Errors) {
  expect_error("0 W 0x40\n", 1, 9);          // missing value
  expect_error("\n0 R 0x40 0x1\n", 2, 10);   // value on a read
  expect_error("2 R 0x40\n", 1, 1);          // core out of range
  expect_error("0 X 0x40\n", 1, 3);          // bad op
  expect_error("0 R 40\n", 1, 5);            // address without 0x
  expect_error("0 W 0x40 0x100000000\n", 1, 10);
}

TEST(Trace, FormatRoundTrips) {
  SimConfig cfg;
  cfg.n_cores = 3;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::UniformRandom;
  spec.ops_per_core = 200;
  const Streams s = gen_workload(spec, cfg);
  EXPECT_EQ(parse_trace(format_trace(s), "fmt", 3), s);
}

// ---------------------------------------------------------------------------
// Workloads

TEST(Workload, KindNames) {
  for (const char* n : {"private", "producer_consumer", "migratory", "false_sharing",
                        "read_mostly", "uniform_random"}) {
    auto k = parse_workload_kind(n);
    ASSERT_TRUE(k.has_value()) << n;
    EXPECT_EQ(to_string(*k), n);
  }
  EXPECT_FALSE(parse_workload_kind("mesh").has_value());
}

TEST(Workload, PrivateStreamsAreDisjoint) {
  SimConfig cfg;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Private;
  spec.ops_per_core = 10;
  const Streams s = gen_workload(spec, cfg);
  std::set<Addr> a, b;
  for (const auto& op : s[0]) a.insert(op.address);
  for (const auto& op : s[1]) b.insert(op.address);
  for (Addr x : a) EXPECT_EQ(b.count(x), 0u);
  EXPECT_EQ(s[0].size(), 10u);
}

TEST(Workload, SeededAndPure) {
  SimConfig cfg;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Migratory;
  EXPECT_EQ(gen_workload(spec, cfg), gen_workload(spec, cfg));
  WorkloadSpec other = spec;
  other.seed = 2;
  EXPECT_NE(gen_workload(spec, cfg), gen_workload(other, cfg));
}

TEST(Workload, FalseSharingUsesDistinctOffsetsInSharedLines) {
  SimConfig cfg;
  cfg.n_cores = 4;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::FalseSharing;
  spec.sharing_fraction = 1.0;
  spec.working_set = 2;
  spec.ops_per_core = 50;
  const Streams s = gen_workload(spec, cfg);
  std::vector<std::set<Addr>> offsets(4), lines(4);
  for (CoreId c = 0; c < 4; ++c) {
    for (const auto& op : s[c]) {
      offsets[c].insert(op.address % cfg.line_size);
      lines[c].insert(cfg.line_of(op.address));
    }
    EXPECT_EQ(offsets[c].size(), 1u);
  }
  for (CoreId c = 1; c < 4; ++c) {
    EXPECT_NE(*offsets[c].begin(), *offsets[0].begin());
    EXPECT_EQ(lines[c], lines[0]);
  }
}

TEST(Workload, EveryWordHasOneWriter) {
  SimConfig cfg;
  cfg.n_cores = 4;
  for (int k = 0; k < 6; ++k) {
    WorkloadSpec spec;
    spec.kind = static_cast<WorkloadKind>(k);
    spec.ops_per_core = 500;
    const Streams s = gen_workload(spec, cfg);
    std::map<Addr, CoreId> writer;
    for (CoreId c = 0; c < 4; ++c) {
      for (const auto& op : s[c]) {
        if (op.kind != OpKind::Store) continue;
        auto [it, fresh] = writer.emplace(op.address, c);
        EXPECT_TRUE(fresh || it->second == c) << to_string(spec.kind);
      }
    }
  }
}

TEST(Workload, ProducerConsumerHasReadersAndWriters) {
  SimConfig cfg;
  WorkloadSpec spec;
  spec.sharing_fraction = 1.0;
  const Streams s = gen_workload(spec, cfg);
  for (const auto& stream : s) {
    const auto stores = std::count_if(stream.begin(), stream.end(),
                                      [](const CoreOp& op) { return op.kind == OpKind::Store; });
    EXPECT_GT(stores, 0);
    EXPECT_LT(stores, static_cast<long>(stream.size()));
  }
}

TEST(Workload, RejectsBadSharing) {
  WorkloadSpec spec;
  spec.sharing_fraction = 1.5;
  EXPECT_THROW(gen_workload(spec, SimConfig{}), ConfigError);
}

// ---------------------------------------------------------------------------
// Reports

TEST(Report, KeysAndComparison) {
  SimStats a, b;
  a.cycles = 100;
  b.cycles = 150;
  a.cores.resize(2);
  b.cores.resize(2);
  const Json r = build_report(SimConfig{}, Json{{"trace", "x"}},
                              {{"snoop", a, {}, std::nullopt}, {"directory", b, {}, std::nullopt}});
  std::vector<std::string> keys;
  for (const auto& [k, v] : r.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"config", "workload", "model", "stats", "comparison"}));
  EXPECT_EQ(r["comparison"]["speedup"], "1.50");
  EXPECT_TRUE(r["comparison"]["images_equal"].get<bool>());
}

TEST(Report, OrderIndependent) {
  SimStats a, b;
  a.cycles = 10;
  b.cycles = 20;
  const ModelRun s{"snoop", a, {}, std::nullopt};
  const ModelRun d{"directory", b, {}, std::nullopt};
  EXPECT_EQ(dump_report(build_report({}, {}, {s, d})), dump_report(build_report({}, {}, {d, s})));
}

TEST(Report, Violations) {
  const Json r = build_report({}, {}, {{"snoop", std::nullopt, {}, "boom"}});
  ASSERT_TRUE(r.contains("violations"));
  EXPECT_FALSE(r.contains("comparison"));
  EXPECT_EQ(r["violations"][0]["message"], "boom");
}

// ---------------------------------------------------------------------------
// The command-line tool

#ifdef CULSIM_CLI

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("culsim_cli_" + std::to_string(::getpid()) + "_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(const std::string& args, std::string* out = nullptr) {
    const fs::path log = dir / "stdout.txt";
    const std::string cmd =
        std::string(CULSIM_CLI) + " " + args + " > " + log.string() + " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (out) *out = slurp(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
};

TEST_F(Cli, BothModelsReportSpeedup) {
  const fs::path rep = dir / "r.json";
  ASSERT_EQ(run("run --model both --workload producer_consumer --ops 3000 --report " +
                rep.string()),
            0);
  const Json r = Json::parse(slurp(rep));
  ASSERT_TRUE(r.contains("comparison"));
  EXPECT_GT(std::stod(r["comparison"]["speedup"].get<std::string>()), 1.0);
  EXPECT_TRUE(r["stats"].contains("snoop"));
  EXPECT_TRUE(r["stats"].contains("directory"));
}

TEST_F(Cli, TraceWithMonitors) {
  const fs::path t = write("t.txt", "0 W 0x40 0x1\n1 R 0x40\n1 IF 0x80\n");
  std::string out;
  EXPECT_EQ(run("run --model snoop --trace " + t.string() + " --check", &out), 0);
  EXPECT_EQ(Json::parse(out)["workload"]["trace"], t.string());
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("run --bogus"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("run --model ring"), 2);
  EXPECT_EQ(run("run --cores 5"), 2);
  EXPECT_EQ(run("run --trace " + write("bad.txt", "0 W 0x40\n").string()), 2);
  EXPECT_EQ(run("run --config " + write("bad.cfg", "ways = 3\n").string()), 2);
}

TEST_F(Cli, HelpDocumentsExitCodes) {
  std::string out;
  EXPECT_EQ(run("--help", &out), 0);
  for (const char* code : {"  1  ", "  2  ", "  3  ", "  4  ", "  5  "})
    EXPECT_NE(out.find(code), std::string::npos) << code;
}

TEST_F(Cli, ByteIdenticalReports) {
  std::string a, b;
  ASSERT_EQ(run("run --model both --workload migratory --ops 2000 --seed 9", &a), 0);
  ASSERT_EQ(run("run --model both --workload migratory --ops 2000 --seed 9 --workers 2", &b), 0);
  EXPECT_EQ(a, b);
}

TEST_F(Cli, SeedFromEnvironment) {
  std::string a, b;
  ::setenv("CULSIM_SEED", "77", 1);
  ASSERT_EQ(run("run --workload uniform_random --ops 500", &a), 0);
  ::unsetenv("CULSIM_SEED");
  ASSERT_EQ(run("run --workload uniform_random --ops 500 --seed 77", &b), 0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(Json::parse(a)["config"]["seed"], 77);
}

TEST_F(Cli, GenRoundTripsThroughRun) {
  const fs::path t = dir / "gen.txt";
  ASSERT_EQ(run("gen --workload false_sharing --ops 300 -o " + t.string()), 0);
  std::string from_trace, from_workload;
  ASSERT_EQ(run("run --trace " + t.string(), &from_trace), 0);
  ASSERT_EQ(run("run --workload false_sharing --ops 300", &from_workload), 0);
  EXPECT_EQ(Json::parse(from_trace)["stats"], Json::parse(from_workload)["stats"]);
}

TEST_F(Cli, VerifyPasses) {
  std::string out;
  EXPECT_EQ(run("verify", &out), 0);
  EXPECT_NE(out.find("PASS CoRR"), std::string::npos);
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, VerifyMutationExitsOne) {
  std::string out;
  EXPECT_EQ(run("verify --mutate snoopee:M:ReadUnique:keep", &out), 1);
  EXPECT_NE(out.find("1. "), std::string::npos);
  EXPECT_EQ(run("verify --mutate nonsense"), 2);
}

TEST_F(Cli, VerifyBudgetExitsThree) {
  EXPECT_EQ(run("verify --budget 50"), 3);
}

TEST_F(Cli, VerifyUserLitmusFile) {
  const fs::path lit = fs::path(CULSIM_SOURCE_DIR) / "litmus" / "mp.litmus";
  std::string out;
  EXPECT_EQ(run("verify " + lit.string(), &out), 0);
  EXPECT_NE(out.find("PASS MP-same-line"), std::string::npos) << out;
}

#endif  // CULSIM_CLI

}  // namespace
}  // namespace culsim

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

// culsim: run snoop/directory simulations, generate workloads, verify the
// protocol tables.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "culsim/experiment.hpp"
#include "culsim/trace.hpp"
#include "culsim/verify.hpp"
#include "culsim/workload.hpp"

namespace {

using namespace culsim;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  invariant violation, forbidden litmus outcome or caught mutation\n"
    "  2  usage, configuration or input error\n"
    "  3  explorer state budget exhausted before the search completed\n"
    "  4  deadlock (watchdog expired)\n"
    "  5  internal protocol fault\n";

struct Common {
  std::string config_path;
  std::uint32_t cores = 0;
  bool coherent_ifetch = false;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string report_path;
};

struct WorkloadArgs {
  std::string kind = "producer_consumer";
  std::uint64_t ops = 10000;
  std::uint32_t working_set = 16;
  double sharing = 0.5;
};

SimConfig resolve_config(const Common& c) {
  SimConfig config = c.config_path.empty() ? SimConfig{} : load_config(c.config_path);
  if (const char* env = std::getenv("CULSIM_SEED"); env && *env) {
    set_config_field(config, "seed", env);
  }
  if (c.seed) config.seed = *c.seed;
  if (c.cores) config.n_cores = c.cores;
  if (c.coherent_ifetch) config.coherent_ifetch = true;
  config.validate();
  return config;
}

WorkloadSpec workload_spec(const WorkloadArgs& w, const SimConfig& config) {
  WorkloadSpec spec;
  auto kind = parse_workload_kind(w.kind);
  if (!kind) throw ConfigError("workload", "unknown workload kind '" + w.kind + "'");
  spec.kind = *kind;
  spec.ops_per_core = w.ops;
  spec.working_set = w.working_set;
  spec.sharing_fraction = w.sharing;
  spec.seed = config.seed;
  return spec;
}

Json workload_json(const WorkloadSpec& s) {
  return Json{{"kind", to_string(s.kind)},
              {"ops_per_core", s.ops_per_core},
              {"working_set", s.working_set},
              {"sharing_fraction", s.sharing_fraction},
              {"seed", s.seed}};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << text;
}

// ---------------------------------------------------------------------------

int cmd_run(const Common& common, const WorkloadArgs& wl, const std::string& model,
            const std::string& trace, const std::string& mem_image, bool check,
            bool serialize, bool timestamp) {
  Experiment e;
  e.config = resolve_config(common);
  if (serialize) e.config.serialize = true;
  if (model == "both") e.models = {"snoop", "directory"};
  else e.models = {model};
  if (!trace.empty()) {
    e.streams = load_trace(trace, e.config.n_cores);
    e.workload = Json{{"trace", trace}};
  } else {
    const WorkloadSpec spec = workload_spec(wl, e.config);
    e.streams = gen_workload(spec, e.config);
    e.workload = workload_json(spec);
  }
  if (!mem_image.empty()) e.preload = load_memory_image(mem_image);
  e.check = check;
  e.workers = common.workers;
  if (timestamp) e.timestamp = utc_now();

  const ExperimentResult r = run_experiment(e);
  emit(dump_report(r.report), common.report_path);
  if (r.report.contains("violations")) {
    for (const auto& v : r.report["violations"])
      std::cerr << v["model"].get<std::string>() << ": " << v["message"].get<std::string>()
                << "\n";
  }
  if (!r.diagnostics.empty()) std::cerr << r.diagnostics;
  return r.exit_code;
}

int cmd_gen(const Common& common, const WorkloadArgs& wl, const std::string& out) {
  const SimConfig config = resolve_config(common);
  emit(format_trace(gen_workload(workload_spec(wl, config), config)), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

Json litmus_json(const LitmusTest& t, bool coherent, const LitmusResult& r) {
  return Json{{"name", t.name},
              {"cores", t.n_cores()},
              {"coherent_ifetch", coherent},
              {"states", r.states},
              {"exhaustive", r.exhaustive},
              {"forbidden_seen", r.forbidden_seen},
              {"outcomes", r.observed_outcomes}};
}

int cmd_verify(const Common& common, const std::vector<std::string>& files,
               const std::string& mutate, std::uint64_t budget) {
  const unsigned cores = common.cores ? common.cores : 2;
  if (cores < 2 || cores > 4) throw ConfigError("cores", "must be between 2 and 4");
  Json report;
  bool violation = false;
  bool partial = false;

  if (!mutate.empty()) {
    const Mutation m = parse_mutation(mutate);
    const MutationVerdict v = check_mutation(m, common.workers, budget);
    report["mutation"] = {{"mutation", v.mutation},
                          {"caught", v.caught},
                          {"caught_by", v.caught_by}};
    if (v.caught) {
      std::cout << "mutation " << v.mutation << ": violation found by " << v.caught_by
                << "\n";
      if (v.witness) {
        std::cout << v.witness->format();
        report["mutation"]["counterexample"] = v.witness->trace;
        report["mutation"]["message"] = v.witness->message;
      }
      violation = true;
    } else {
      std::cout << "mutation " << v.mutation << ": no violation found\n";
    }
  } else {
    const OracleReport oracle =
        oracle_tables(ProtocolTable::canonical(), true, common.workers, budget);
    std::cout << oracle.format();
    Json failures = Json::array();
    for (const auto& [name, cx] : oracle.failures) {
      std::cout << "oracle case " << name << ":\n" << cx.format();
      failures.push_back({{"case", name}, {"message", cx.message}, {"trace", cx.trace}});
    }
    report["oracle"] = {{"certified", oracle.all_certified()},
                        {"states", oracle.states},
                        {"exhaustive", oracle.exhaustive},
                        {"failures", failures}};
    violation |= !oracle.failures.empty();
    partial |= !oracle.exhaustive;

    std::vector<LitmusTest> tests = builtin_litmus(cores);
    for (const auto& f : files) {
      auto more = load_litmus(f);
      tests.insert(tests.end(), more.begin(), more.end());
    }
    Json litmus = Json::array();
    for (const auto& t : tests) {
      for (bool coherent : {false, true}) {
        if (common.coherent_ifetch && !coherent) continue;
        ExploreConfig ec;
        ec.coherent_ifetch = coherent;
        ec.workers = common.workers;
        ec.state_budget = budget;
        const LitmusResult r = run_litmus(t, ec);
        const bool bad = r.forbidden_seen || r.protocol_violation;
        std::cout << (bad ? "FAIL " : r.exhaustive ? "PASS " : "PARTIAL ") << t.name
                  << " cores=" << t.n_cores() << " coherent_ifetch=" << (coherent ? "on" : "off")
                  << " states=" << r.states << "\n";
        for (const auto& cx : r.counterexamples) std::cout << cx.format();
        violation |= bad;
        partial |= !r.exhaustive;
        litmus.push_back(litmus_json(t, coherent, r));
      }
    }
    report["litmus"] = std::move(litmus);

    // Self-modifying code: stale fetches are expected without coherent ifetch.
    const LitmusTest smc = smc_litmus();
    Json smc_json = Json::array();
    for (bool coherent : {false, true}) {
      ExploreConfig ec;
      ec.coherent_ifetch = coherent;
      ec.workers = common.workers;
      ec.state_budget = budget;
      const LitmusResult r = run_litmus(smc, ec);
      std::cout << "SMC coherent_ifetch=" << (coherent ? "on" : "off")
                << " stale_fetch=" << (r.forbidden_seen ? "observed" : "never") << "\n";
      if (coherent) {
        violation |= r.forbidden_seen || r.protocol_violation;
        for (const auto& cx : r.counterexamples) std::cout << cx.format();
      }
      partial |= !r.exhaustive;
      smc_json.push_back(litmus_json(smc, coherent, r));
    }
    report["smc"] = std::move(smc_json);
  }

  if (!common.report_path.empty()) emit(report.dump(2) + "\n", common.report_path);
  if (violation) return kExitViolation;
  return partial ? kExitBudget : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Snoop-based MOESI coherence simulator and protocol verifier"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Common common;
  WorkloadArgs wl;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Config file of key = value lines")
        ->check(CLI::ExistingFile);
    sub->add_option("--cores", common.cores, "Number of cores (2-4)");
    sub->add_flag("--coherent-ifetch", common.coherent_ifetch,
                  "Keep instruction caches coherent (verify: litmus only in this mode)");
    sub->add_option("--seed", common.seed, "Seed (overrides CULSIM_SEED and the config)");
    sub->add_option("--workers", common.workers, "Parallel workers")
        ->check(CLI::Range(1u, 256u));
    sub->add_option("--report", common.report_path, "Write the JSON report here");
  };
  auto add_workload = [&](CLI::App* sub) {
    sub->add_option("--workload", wl.kind,
                    "private|producer_consumer|migratory|false_sharing|read_mostly|"
                    "uniform_random");
    sub->add_option("--ops", wl.ops, "Operations per core");
    sub->add_option("--working-set", wl.working_set, "Lines per region");
    sub->add_option("--sharing", wl.sharing, "Fraction of shared accesses")
        ->check(CLI::Range(0.0, 1.0));
  };

  std::string model = "snoop", trace, mem_image, out, mutate;
  bool check = false, serialize = false, timestamp = false;
  std::vector<std::string> litmus_files;
  std::uint64_t budget = 4'000'000;

  CLI::App* run = app.add_subcommand("run", "Simulate a trace or synthetic workload");
  add_common(run);
  add_workload(run);
  run->add_option("--model", model, "snoop|directory|both")
      ->check(CLI::IsMember({"snoop", "directory", "both"}));
  auto* trace_opt =
      run->add_option("--trace", trace, "Trace file")->check(CLI::ExistingFile);
  run->get_option("--workload")->excludes(trace_opt);
  run->add_option("--mem-image", mem_image, "Initial memory image")
      ->check(CLI::ExistingFile);
  run->add_flag("--check", check, "Enable per-cycle invariant monitors");
  run->add_flag("--serialize", serialize, "Decode one transaction at a time");
  run->add_flag("--timestamp", timestamp, "Record the wall-clock time in the report");

  CLI::App* gen = app.add_subcommand("gen", "Write a synthetic workload as a trace");
  add_common(gen);
  add_workload(gen);
  gen->add_option("-o,--output", out, "Trace file (default stdout)");

  CLI::App* verify =
      app.add_subcommand("verify", "Certify the protocol tables and run litmus tests");
  add_common(verify);
  verify->add_option("litmus", litmus_files, "Additional litmus files")
      ->check(CLI::ExistingFile);
  verify->add_option("--mutate", mutate,
                     "Check a table mutation, e.g. snoopee:M:ReadUnique:keep");
  verify->add_option("--budget", budget, "Explorer state budget per search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(common, wl, model, trace, mem_image, check, serialize, timestamp);
    if (*gen) return cmd_gen(common, wl, out);
    return cmd_verify(common, litmus_files, mutate, budget);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantViolation& e) {
    std::cerr << "violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const DeadlockError& e) {
    std::cerr << "deadlock: " << e.what() << "\n" << e.dump() << "\n";
    return kExitDeadlock;
  } catch (const ProtocolFault& e) {
    std::cerr << "protocol fault: " << e.what() << "\n";
    return kExitFault;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

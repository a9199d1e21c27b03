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

#include "culsim/experiment.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>

#include "culsim/baseline.hpp"
#include "culsim/types.hpp"

namespace culsim {
namespace {

struct Outcome {
  ModelRun run;
  int exit_code = kExitOk;
  std::string diagnostics;
};

Outcome run_model(const Experiment& e, const std::string& model) {
  Outcome out;
  out.run.model = model;
  try {
    if (model == "snoop") {
      SimOptions opts;
      opts.check = e.check;
      Simulation sim(e.config, ProtocolTable::canonical(), opts);
      sim.preload(e.preload);
      out.run.stats = sim.run(e.streams);
      out.run.image = sim.final_memory_image();
    } else if (model == "directory") {
      DirectorySimulation sim(e.config, e.check);
      sim.preload(e.preload);
      out.run.stats = sim.run(e.streams);
      out.run.image = sim.final_memory_image();
    } else {
      throw std::invalid_argument("unknown model '" + model + "'");
    }
  } catch (const InvariantViolation& ex) {
    out.run.error = std::string("invariant violation: ") + ex.what();
    out.exit_code = kExitViolation;
  } catch (const DeadlockError& ex) {
    out.run.error = std::string("deadlock: ") + ex.what();
    out.diagnostics = ex.dump();
    out.exit_code = kExitDeadlock;
  } catch (const ProtocolFault& ex) {
    out.run.error = std::string("protocol fault: ") + ex.what();
    out.exit_code = kExitFault;
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const Experiment& e) {
  e.config.validate();
  std::vector<Outcome> outcomes(e.models.size());
  if (e.workers > 1 && e.models.size() > 1) {
    std::vector<std::future<Outcome>> jobs;
    for (const auto& m : e.models)
      jobs.push_back(std::async(std::launch::async, run_model, std::cref(e), m));
    for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < e.models.size(); ++i) outcomes[i] = run_model(e, e.models[i]);
  }

  ExperimentResult result;
  std::vector<ModelRun> runs;
  for (auto& o : outcomes) {
    // Prefer the most specific failure when several models fail.
    result.exit_code = std::max(result.exit_code, o.exit_code);
    if (!o.diagnostics.empty()) result.diagnostics += o.diagnostics + "\n";
    runs.push_back(std::move(o.run));
  }
  result.report = build_report(e.config, e.workload, std::move(runs), e.timestamp);
  return result;
}

}  // namespace culsim

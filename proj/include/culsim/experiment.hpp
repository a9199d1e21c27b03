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

#ifndef CULSIM_EXPERIMENT_HPP_
#define CULSIM_EXPERIMENT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "culsim/memory.hpp"
#include "culsim/report.hpp"
#include "culsim/sim.hpp"

namespace culsim {

/// Process exit codes shared by the CLI and the Python bindings.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolation = 1,
  kExitUsage = 2,
  kExitBudget = 3,
  kExitDeadlock = 4,
  kExitFault = 5,
};

struct Experiment {
  SimConfig config;
  std::vector<std::string> models{"snoop"};  // "snoop", "directory"
  Streams streams;
  Json workload = Json::object();
  std::vector<MemoryImageEntry> preload;
  bool check = false;
  unsigned workers = 1;
  std::optional<std::string> timestamp;
};

struct ExperimentResult {
  Json report;
  int exit_code = kExitOk;
  /// Component dumps and other detail for failed runs.
  std::string diagnostics;
};

/// Runs every requested model on the same streams. Independent models run
/// on separate threads when workers > 1; the report does not depend on it.
ExperimentResult run_experiment(const Experiment& e);

}  // namespace culsim

#endif  // CULSIM_EXPERIMENT_HPP_

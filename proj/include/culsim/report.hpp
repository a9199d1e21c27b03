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

#ifndef CULSIM_REPORT_HPP_
#define CULSIM_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "culsim/config.hpp"
#include "culsim/sim.hpp"

namespace culsim {

using Json = nlohmann::ordered_json;

/// One finished (or aborted) run of a single model.
struct ModelRun {
  std::string model;  // "snoop" or "directory"
  std::optional<SimStats> stats;
  MemoryImage image;
  /// Set when the run stopped on an invariant violation, deadlock or fault.
  std::optional<std::string> error;
};

Json config_json(const SimConfig& config);
Json stats_json(const SimStats& stats);

/**
 * Top-level keys, in order: config, workload, model, stats, comparison
 * (both models finished), violations (any run failed), timestamp (only
 * when given). Runs are keyed by model name so their order does not matter.
 */
Json build_report(const SimConfig& config, const Json& workload,
                  std::vector<ModelRun> runs,
                  const std::optional<std::string>& timestamp = std::nullopt);

/// Pretty-printed with a trailing newline.
std::string dump_report(const Json& report);

}  // namespace culsim

#endif  // CULSIM_REPORT_HPP_

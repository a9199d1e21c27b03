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

#ifndef CULSIM_VIEW_HPP_
#define CULSIM_VIEW_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "culsim/protocol.hpp"
#include "culsim/types.hpp"

namespace culsim {

struct CopyView {
  AgentId agent;
  LineState state = LineState::Invalid;
  LineData data;
};

/**
 * Everything the invariant checks need to know about one line: the valid
 * coherent copies, memory's committed value and, when a monitor tracks it,
 * the value of the latest store in coherence order.
 */
struct LineView {
  std::vector<CopyView> copies;
  LineData memory;
  std::optional<LineData> latest;
  /// Dirty data for the line is travelling between a cache and memory, so
  /// memory may legitimately lag.
  bool dirty_in_flight = false;
};

using CoherenceView = std::map<Addr, LineView>;

/// nullopt when the line is fine, otherwise a description of the violation.
std::optional<std::string> check_swmr(const LineView& line);
std::optional<std::string> check_value(const LineView& line);

std::optional<std::string> check_swmr(const CoherenceView& view);
std::optional<std::string> check_value(const CoherenceView& view);

std::string describe(const LineView& line);

}  // namespace culsim

#endif  // CULSIM_VIEW_HPP_

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

#include "culsim/view.hpp"

#include <sstream>

namespace culsim {

namespace {

std::string hex_line(const LineData& d) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < d.size(); ++i) os << (i ? " " : "") << std::hex << d[i];
  os << "]";
  return os.str();
}

template <class F>
std::optional<std::string> first_of(const CoherenceView& view, F&& check) {
  for (const auto& [addr, line] : view) {
    if (auto v = check(line)) {
      std::ostringstream os;
      os << "line 0x" << std::hex << addr << ": " << *v;
      return os.str();
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> check_swmr(const LineView& line) {
  unsigned valid = 0, unique = 0, owned = 0;
  for (const auto& c : line.copies) {
    if (!is_valid(c.state)) continue;
    ++valid;
    if (is_unique(c.state)) ++unique;
    if (c.state == LineState::Owned) ++owned;
  }
  if (unique > 0 && valid > 1)
    return "unique copy coexists with another valid copy: " + describe(line);
  if (owned > 1) return "more than one Owned copy: " + describe(line);
  return std::nullopt;
}

std::optional<std::string> check_value(const LineView& line) {
  const CopyView* first = nullptr;
  bool any_dirty = false;
  for (const auto& c : line.copies) {
    if (!is_valid(c.state)) continue;
    any_dirty |= is_dirty(c.state);
    if (!first) {
      first = &c;
    } else if (c.data != first->data) {
      return "valid copies disagree: " + describe(line);
    }
  }
  if (first && line.latest && first->data != *line.latest)
    return "copies do not hold the latest store: " + describe(line);
  if (!any_dirty && !line.dirty_in_flight) {
    if (first && first->data != line.memory)
      return "clean copies differ from memory: " + describe(line);
    if (line.latest && *line.latest != line.memory)
      return "memory lost the latest store: " + describe(line);
  }
  return std::nullopt;
}

std::optional<std::string> check_swmr(const CoherenceView& view) {
  return first_of(view, [](const LineView& l) { return check_swmr(l); });
}

std::optional<std::string> check_value(const CoherenceView& view) {
  return first_of(view, [](const LineView& l) { return check_value(l); });
}

std::string describe(const LineView& line) {
  std::ostringstream os;
  for (const auto& c : line.copies)
    os << to_string(c.agent) << "=" << short_name(c.state) << hex_line(c.data) << " ";
  os << "mem" << hex_line(line.memory);
  if (line.latest) os << " latest" << hex_line(*line.latest);
  if (line.dirty_in_flight) os << " (dirty in flight)";
  return os.str();
}

}  // namespace culsim

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

#ifndef CULSIM_TRACE_HPP_
#define CULSIM_TRACE_HPP_

#include <string>
#include <string_view>

#include "culsim/sim.hpp"

namespace culsim {

/// One op per line: `<core> <R|W|IF> <0xaddr> [<0xvalue>]`, value iff W.
/// `#` starts a comment. Throws ParseError with line and column.
Streams parse_trace(std::string_view text, const std::string& source,
                    std::uint32_t n_cores);
Streams load_trace(const std::string& path, std::uint32_t n_cores);

/// Round-robin over cores, one op per line, in the grammar above.
std::string format_trace(const Streams& streams);

}  // namespace culsim

#endif  // CULSIM_TRACE_HPP_

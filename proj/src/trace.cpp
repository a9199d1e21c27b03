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

#include "culsim/trace.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "culsim/types.hpp"

namespace culsim {
namespace {

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, int base, T& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_hex(std::string_view s, std::uint64_t& out) {
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) return false;
  return parse_number(s.substr(2), 16, out);
}

}  // namespace

Streams parse_trace(std::string_view text, const std::string& source,
                    std::uint32_t n_cores) {
  Streams streams(n_cores);
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const auto f = split_fields(line);
    if (f.empty()) continue;
    auto fail = [&](std::size_t col, const std::string& what) -> ParseError {
      return ParseError(source, lineno, col, what);
    };

    std::uint32_t core = 0;
    if (!parse_number(f[0].text, 10, core)) throw fail(f[0].column, "expected a core id");
    if (core >= n_cores)
      throw fail(f[0].column, "core " + std::to_string(core) + " out of range for " +
                                  std::to_string(n_cores) + " cores");
    if (f.size() < 2) throw fail(line.size() + 1, "missing op");
    OpKind kind;
    if (f[1].text == "R") kind = OpKind::Load;
    else if (f[1].text == "W") kind = OpKind::Store;
    else if (f[1].text == "IF") kind = OpKind::IFetch;
    else throw fail(f[1].column, "expected R, W or IF");
    if (f.size() < 3) throw fail(line.size() + 1, "missing address");
    std::uint64_t addr = 0;
    if (!parse_hex(f[2].text, addr)) throw fail(f[2].column, "expected a 0x-hex address");

    const std::size_t want = kind == OpKind::Store ? 4 : 3;
    if (f.size() < want) throw fail(line.size() + 1, "missing value for W");
    if (f.size() > want)
      throw fail(f[want].column, kind == OpKind::Store ? "unexpected field"
                                                       : "value given for a non-W op");
    switch (kind) {
      case OpKind::Load:
        streams[core].push_back(CoreOp::load(addr));
        break;
      case OpKind::IFetch:
        streams[core].push_back(CoreOp::ifetch(addr));
        break;
      case OpKind::Store: {
        std::uint64_t v = 0;
        if (!parse_hex(f[3].text, v) || v > 0xFFFFFFFFull)
          throw fail(f[3].column, "expected a 32-bit 0x-hex value");
        streams[core].push_back(CoreOp::store(addr, static_cast<Word>(v)));
        break;
      }
    }
  }
  return streams;
}

Streams load_trace(const std::string& path, std::uint32_t n_cores) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open trace");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str(), path, n_cores);
}

std::string format_trace(const Streams& streams) {
  std::ostringstream out;
  out << std::hex;
  std::size_t longest = 0;
  for (const auto& s : streams) longest = std::max(longest, s.size());
  for (std::size_t i = 0; i < longest; ++i) {
    for (std::size_t c = 0; c < streams.size(); ++c) {
      if (i >= streams[c].size()) continue;
      const CoreOp& op = streams[c][i];
      out << std::dec << c << std::hex;
      switch (op.kind) {
        case OpKind::Load:
          out << " R 0x" << op.address;
          break;
        case OpKind::Store:
          out << " W 0x" << op.address << " 0x" << op.value;
          break;
        case OpKind::IFetch:
          out << " IF 0x" << op.address;
          break;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace culsim

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

#include "culsim/memory.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace culsim {

MemoryModel::MemoryModel(std::uint32_t line_size, Cycle read_latency,
                         Cycle write_latency)
    : line_size_(line_size),
      read_latency_(read_latency),
      write_latency_(write_latency) {}

void MemoryModel::check_aligned(Addr line) const {
  if (line % line_size_ != 0) {
    std::ostringstream os;
    os << "memory access to misaligned line address 0x" << std::hex << line;
    throw ProtocolFault(os.str());
  }
}

Cycle MemoryModel::schedule(Addr line, Cycle ready) {
  auto& last = last_done_[line];
  ready = std::max(ready, last);
  last = ready;
  return ready;
}

Cycle MemoryModel::read(Addr line, Cycle now, Tag tag) {
  check_aligned(line);
  Cycle done = schedule(line, now + read_latency_);
  Pending p{done, seq_++, tag, true, line, {}};
  auto pos = std::upper_bound(
      inflight_.begin(), inflight_.end(), p, [](const Pending& a, const Pending& b) {
        return a.done < b.done || (a.done == b.done && a.seq < b.seq);
      });
  inflight_.insert(pos, std::move(p));
  ++reads_;
  ++reads_by_line_[line];
  return done;
}

Cycle MemoryModel::write(Addr line, LineData data, Cycle now, Tag tag) {
  check_aligned(line);
  Cycle done = schedule(line, now + write_latency_);
  Pending p{done, seq_++, tag, false, line, std::move(data)};
  auto pos = std::upper_bound(
      inflight_.begin(), inflight_.end(), p, [](const Pending& a, const Pending& b) {
        return a.done < b.done || (a.done == b.done && a.seq < b.seq);
      });
  inflight_.insert(pos, std::move(p));
  ++writes_;
  return done;
}

std::vector<MemoryModel::Completion> MemoryModel::tick(Cycle now) {
  std::vector<Completion> out;
  while (!inflight_.empty() && inflight_.front().done <= now) {
    Pending p = std::move(inflight_.front());
    inflight_.pop_front();
    Completion c{p.tag, p.is_read, p.line, {}, p.done};
    if (p.is_read) {
      c.data = peek(p.line);
    } else {
      contents_[p.line] = std::move(p.data);
    }
    out.push_back(std::move(c));
  }
  return out;
}

LineData MemoryModel::peek(Addr line) const {
  auto it = contents_.find(line);
  if (it != contents_.end()) return it->second;
  return LineData(line_size_ / kWordBytes, 0);
}

void MemoryModel::poke(Addr line, LineData data) {
  check_aligned(line);
  contents_[line] = std::move(data);
}

void MemoryModel::load_bytes(Addr address, const std::vector<std::uint8_t>& bytes) {
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    Addr a = address + i;
    Addr line = a & ~static_cast<Addr>(line_size_ - 1);
    auto it = contents_.find(line);
    if (it == contents_.end())
      it = contents_.emplace(line, LineData(line_size_ / kWordBytes, 0)).first;
    std::size_t off = a - line;
    Word& w = it->second[off / kWordBytes];
    unsigned shift = static_cast<unsigned>(off % kWordBytes) * 8;
    w = (w & ~(Word{0xff} << shift)) | (Word{bytes[i]} << shift);
  }
}

bool MemoryModel::write_pending(Addr line) const {
  return std::any_of(inflight_.begin(), inflight_.end(), [line](const Pending& p) {
    return !p.is_read && p.line == line;
  });
}

std::uint64_t MemoryModel::reads_of(Addr line) const {
  auto it = reads_by_line_.find(line);
  return it == reads_by_line_.end() ? 0 : it->second;
}

namespace {

bool parse_hex(std::string_view tok, std::uint64_t& out) {
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X'))
    tok.remove_prefix(2);
  if (tok.empty()) return false;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out, 16);
  return ec == std::errc() && p == tok.data() + tok.size();
}

}  // namespace

std::vector<MemoryImageEntry> parse_memory_image(std::string_view text,
                                                 const std::string& source) {
  std::vector<MemoryImageEntry> entries;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::size_t pos = 0;
    MemoryImageEntry e;
    bool have_addr = false;
    while (pos < line.size()) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
        ++pos;
      if (pos >= line.size()) break;
      std::size_t start = pos;
      while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])))
        ++pos;
      std::string_view tok(line.data() + start, pos - start);
      std::uint64_t v = 0;
      if (!parse_hex(tok, v))
        throw ParseError(source, lineno, start + 1,
                         "expected hex number, got '" + std::string(tok) + "'");
      if (!have_addr) {
        e.address = v;
        have_addr = true;
      } else {
        if (v > 0xff)
          throw ParseError(source, lineno, start + 1, "byte value out of range");
        e.bytes.push_back(static_cast<std::uint8_t>(v));
      }
    }
    if (!have_addr) continue;
    if (e.bytes.empty())
      throw ParseError(source, lineno, line.size() + 1, "address without data bytes");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<MemoryImageEntry> load_memory_image(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("mem_image", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_memory_image(ss.str(), path);
}

}  // namespace culsim

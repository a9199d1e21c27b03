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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "culsim/verify.hpp"

namespace culsim {

namespace {

constexpr std::uint8_t kX = 0x0;  // line 0, word 0
constexpr std::uint8_t kY = 0x8;  // line 1, word 0

unsigned line_of(std::uint8_t addr) { return addr / kExplorerLineBytes; }
unsigned word_of(std::uint8_t addr) { return (addr % kExplorerLineBytes) / kWordBytes; }

struct Builder {
  LitmusTest t;

  explicit Builder(std::string name, unsigned n_cores) {
    t.name = std::move(name);
    t.programs.resize(n_cores);
  }
  unsigned reg(const std::string& name) {
    t.reg_names.push_back(name);
    return static_cast<unsigned>(t.reg_names.size() - 1);
  }
  void touch(std::uint8_t addr) {
    if (std::find(t.addresses.begin(), t.addresses.end(), addr) == t.addresses.end())
      t.addresses.push_back(addr);
  }
  void w(unsigned core, std::uint8_t addr, unsigned v) {
    touch(addr);
    t.programs[core].push_back(AbstractOp::store(line_of(addr), word_of(addr), v));
  }
  void r(unsigned core, std::uint8_t addr, unsigned reg) {
    touch(addr);
    t.programs[core].push_back(AbstractOp::load(line_of(addr), word_of(addr), reg));
  }
  void f(unsigned core, std::uint8_t addr, unsigned reg) {
    touch(addr);
    t.programs[core].push_back(AbstractOp::ifetch(line_of(addr), word_of(addr), reg));
  }
};

LitmusAtom reg_is(unsigned reg, unsigned v) {
  return {false, static_cast<std::uint8_t>(reg), static_cast<std::uint8_t>(v)};
}
LitmusAtom mem_is(std::uint8_t addr, unsigned v) {
  return {true, addr, static_cast<std::uint8_t>(v)};
}

}  // namespace

bool LitmusTest::matches(const Observation& o, const LitmusCondition& c) const {
  return std::all_of(c.begin(), c.end(), [&](const LitmusAtom& a) {
    if (a.is_memory) return o.memory[line_of(a.index)][word_of(a.index)] == a.value;
    return o.regs[a.index] == a.value;
  });
}

std::string LitmusTest::format(const Observation& o) const {
  std::ostringstream os;
  for (std::size_t r = 0; r < reg_names.size(); ++r)
    os << (r ? " " : "") << reg_names[r] << "=" << int(o.regs[r]);
  std::vector<std::uint8_t> addrs = addresses;
  std::sort(addrs.begin(), addrs.end());
  for (std::uint8_t a : addrs)
    os << (os.tellp() > 0 ? " " : "") << "mem[0x" << std::hex << int(a) << std::dec
       << "]=" << int(o.memory[line_of(a)][word_of(a)]);
  return os.str();
}

std::vector<LitmusTest> builtin_litmus(unsigned n) {
  if (n < 2 || n > kMaxCores) throw std::invalid_argument("litmus needs 2 to 4 cores");
  std::vector<LitmusTest> out;

  {
    Builder b("CoRR", n);
    b.w(0, kX, 1);
    for (unsigned c = 1; c < n; ++c) {
      const unsigned a = b.reg("a" + std::to_string(c));
      const unsigned z = b.reg("b" + std::to_string(c));
      b.r(c, kX, a);
      b.r(c, kX, z);
      b.t.forbidden.push_back({reg_is(a, 1), reg_is(z, 0)});
    }
    out.push_back(std::move(b.t));
  }
  {
    Builder b("CoWW", n);
    b.w(0, kX, 1);
    b.w(0, kX, 2);
    for (unsigned c = 1; c < n; ++c) b.r(c, kX, b.reg("r" + std::to_string(c)));
    b.t.forbidden.push_back({mem_is(kX, 1)});
    b.t.forbidden.push_back({mem_is(kX, 0)});
    out.push_back(std::move(b.t));
  }
  {
    Builder b("CoRW1", n);
    const unsigned r = b.reg("r0");
    b.r(0, kX, r);
    b.w(0, kX, 1);
    for (unsigned c = 1; c < n; ++c) b.w(c, kX, c + 1);
    b.t.forbidden.push_back({reg_is(r, 1)});
    out.push_back(std::move(b.t));
  }
  {
    Builder b("CoWR", n);
    const unsigned r = b.reg("r0");
    b.w(0, kX, 1);
    b.r(0, kX, r);
    for (unsigned c = 1; c < n; ++c) b.w(c, kX, c + 1);
    b.t.forbidden.push_back({reg_is(r, 0)});
    out.push_back(std::move(b.t));
  }
  return out;
}

LitmusTest smc_litmus() {
  Builder b("SMC", 2);
  const unsigned r0 = b.reg("r0"), r1 = b.reg("r1"), r2 = b.reg("r2");
  b.w(0, kX, 1);
  b.w(0, kY, 1);
  b.f(1, kX, r0);
  b.r(1, kY, r1);
  b.f(1, kX, r2);
  b.t.forbidden.push_back({reg_is(r1, 1), reg_is(r2, 0)});
  return b.t;
}

// ---------------------------------------------------------------------------
// Litmus files

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, const std::string& source, std::size_t line)
      : text_(text), source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, line_, pos_ + 1, what);
  }
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }
  void expect(std::string_view s) {
    skip_ws();
    if (text_.substr(pos_, s.size()) != s) fail("expected '" + std::string(s) + "'");
    pos_ += s.size();
  }
  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '-' || text_[pos_] == '.' || text_[pos_] == '+'))
      ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }
  unsigned number(unsigned max) {
    skip_ws();
    const std::size_t start = pos_;
    int base = 10;
    if (text_.substr(pos_, 2) == "0x" || text_.substr(pos_, 2) == "0X") {
      base = 16;
      pos_ += 2;
    }
    unsigned v = 0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, v, base);
    if (ec != std::errc() || ptr == first) {
      pos_ = start;
      fail("expected a number");
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    if (v > max) {
      pos_ = start;
      fail("value out of range (max " + std::to_string(max) + ")");
    }
    return v;
  }
  // A byte address, or one of the names x (line 0) and y (line 1).
  std::uint8_t address() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'x' || text_[pos_] == 'y') &&
        (pos_ + 1 == text_.size() || !std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
      return text_[pos_++] == 'x' ? kX : kY;
    }
    const unsigned a = number(kExplorerLines * kExplorerLineBytes - 1);
    if (a % kWordBytes != 0) {
      pos_ = start;
      fail("address must be word aligned");
    }
    return static_cast<std::uint8_t>(a);
  }

 private:
  std::string_view text_;
  const std::string& source_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<LitmusTest> parse_litmus(std::string_view text, const std::string& source) {
  std::vector<LitmusTest> tests;
  std::map<std::string, unsigned> regs;
  std::vector<std::string> pending_forbid;
  std::size_t line_no = 0;

  auto reg_index = [&](LineParser& p, const std::string& name) {
    auto it = regs.find(name);
    if (it != regs.end()) return it->second;
    if (regs.size() >= kExplorerRegs) p.fail("more than 6 registers");
    const auto idx = static_cast<unsigned>(regs.size());
    regs[name] = idx;
    tests.back().reg_names.push_back(name);
    return idx;
  };
  auto touch = [&](std::uint8_t a) {
    auto& v = tests.back().addresses;
    if (std::find(v.begin(), v.end(), a) == v.end()) v.push_back(a);
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    LineParser p(raw, source, line_no);
    if (p.at_end()) {
      if (end == text.size()) break;
      continue;
    }

    const std::string kw = p.word();
    if (kw == "test") {
      tests.emplace_back();
      tests.back().name = p.word();
      regs.clear();
    } else {
      if (tests.empty()) p.fail("expected 'test <name>' first");
      LitmusTest& t = tests.back();
      if (kw == "init") {
        do {
          const std::uint8_t a = p.address();
          p.expect('=');
          t.init[line_of(a)][word_of(a)] = static_cast<std::uint8_t>(p.number(255));
          touch(a);
        } while (!p.at_end());
      } else if (kw == "core") {
        const unsigned c = p.number(kMaxCores - 1);
        p.expect(':');
        if (t.programs.size() <= c) t.programs.resize(c + 1);
        do {
          const std::string op = p.word();
          const auto kind = parse_op(op);
          if (!kind || (op != "R" && op != "W" && op != "IF"))
            p.fail("unknown operation '" + op + "' (expected R, W or IF)");
          const std::uint8_t a = p.address();
          touch(a);
          if (*kind == OpKind::Store) {
            p.expect('=');
            t.programs[c].push_back(
                AbstractOp::store(line_of(a), word_of(a), p.number(255)));
          } else {
            p.expect("->");
            const unsigned r = reg_index(p, p.word());
            t.programs[c].push_back(*kind == OpKind::Load
                                        ? AbstractOp::load(line_of(a), word_of(a), r)
                                        : AbstractOp::ifetch(line_of(a), word_of(a), r));
          }
          if (t.programs[c].size() > kExplorerMaxOps) p.fail("more than 6 operations");
        } while (p.consume(';') && !p.at_end());
        if (!p.at_end()) p.fail("expected ';' or end of line");
      } else if (kw == "forbid") {
        LitmusCondition cond;
        do {
          const std::string name = p.word();
          if (name == "mem") {
            p.expect('[');
            const std::uint8_t a = p.address();
            p.expect(']');
            p.expect('=');
            cond.push_back(mem_is(a, p.number(255)));
            touch(a);
          } else {
            if (!regs.count(name)) p.fail("unknown register '" + name + "'");
            p.expect('=');
            cond.push_back(reg_is(reg_index(p, name), p.number(255)));
          }
        } while (!p.at_end());
        t.forbidden.push_back(std::move(cond));
      } else {
        p.fail("unknown directive '" + kw + "'");
      }
    }
    if (end == text.size()) break;
  }
  for (const auto& t : tests) {
    if (t.programs.empty())
      throw ParseError(source, line_no, 1, "test " + t.name + " has no cores");
  }
  return tests;
}

std::vector<LitmusTest> load_litmus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_litmus(ss.str(), path);
}

LitmusResult run_litmus(const LitmusTest& test, ExploreConfig config) {
  config.n_cores = std::max(test.n_cores(), 1u);
  config.init = test.init;
  config.stop_on_violation = false;
  const ForbiddenPredicate forbidden = [&test](const Observation& o)
      -> std::optional<std::string> {
    for (const auto& c : test.forbidden)
      if (test.matches(o, c)) return "forbidden outcome: " + test.format(o);
    return std::nullopt;
  };
  ExploreResult r = explore(test.programs, config, forbidden);

  LitmusResult out;
  out.states = r.reachable_states;
  out.exhaustive = r.exhaustive;
  for (const auto& o : r.outcomes) {
    out.observed_outcomes.insert(test.format(o));
    for (const auto& c : test.forbidden) out.forbidden_seen |= test.matches(o, c);
  }
  for (auto& v : r.violations) {
    if (v.message.rfind("forbidden outcome", 0) != 0) out.protocol_violation = true;
    out.counterexamples.push_back(std::move(v));
  }
  return out;
}

}  // namespace culsim

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

#include <iomanip>
#include <sstream>

#include "culsim/verify.hpp"

namespace culsim {

std::string_view to_string(PairStatus s) {
  switch (s) {
    case PairStatus::Certified:
      return "certified";
    case PairStatus::Vacuous:
      return "vacuous";
    case PairStatus::Uncovered:
      return "UNCOVERED";
    case PairStatus::Failed:
      return "FAILED";
  }
  return "?";
}

std::vector<OracleCase> oracle_cases() {
  using O = AbstractOp;
  constexpr unsigned x = 0, y = 1;
  std::vector<OracleCase> cases;

  // Ownership moves back and forth; the reader's copy is upgraded in place.
  cases.push_back({"pingpong", 2, false, 2,
                   {{O::store(x, 0, 1), O::load(x, 0, 0), O::store(x, 0, 2), O::load(x, 1, 1)},
                    {O::load(x, 0, 2), O::store(x, 1, 3), O::load(x, 0, 3)}}});
  // Repeated reads hit in whatever state the line settled in.
  cases.push_back({"read-hit", 2, false, 2,
                   {{O::load(x, 0, 0), O::load(x, 1, 1), O::store(x, 0, 1), O::load(x, 0, 2)},
                    {O::load(x, 0, 3), O::load(x, 1, 4)}}});
  // Both cores share both lines and then upgrade different words.
  cases.push_back({"upgrade-race", 2, false, 2,
                   {{O::load(x, 0, 0), O::store(x, 0, 1), O::load(y, 0, 1), O::store(y, 1, 5)},
                    {O::load(x, 1, 2), O::store(x, 1, 2), O::store(y, 0, 4), O::load(x, 0, 3)}}});
  // Dirty sharing with a third party reading, upgrading and stealing.
  cases.push_back({"owner-three", 3, false, 2,
                   {{O::store(x, 0, 1), O::load(x, 0, 0), O::store(x, 0, 2)},
                    {O::load(x, 0, 1), O::store(x, 1, 3)},
                    {O::load(x, 1, 2), O::store(x, 0, 4)}}});
  // One-line caches: evictions, refetches and stale queued upgrades.
  cases.push_back({"evict", 2, false, 1,
                   {{O::load(x, 0, 0), O::store(x, 0, 1), O::load(y, 0, 1), O::load(x, 1, 2)},
                    {O::load(x, 1, 3), O::store(x, 1, 2), O::load(y, 1, 4), O::load(x, 0, 5)}}});
  // Coherent instruction fetch racing with stores, including the own dcache.
  cases.push_back({"ifetch-coherent", 2, true, 2,
                   {{O::store(x, 0, 1), O::load(x, 0, 0), O::ifetch(x, 0, 1), O::store(x, 0, 2)},
                    {O::ifetch(x, 0, 2), O::load(x, 1, 3), O::ifetch(x, 0, 4)}}});
  cases.push_back({"ifetch-owned", 3, true, 2,
                   {{O::store(x, 0, 1), O::store(x, 1, 2)},
                    {O::load(x, 0, 0), O::store(x, 0, 3)},
                    {O::ifetch(x, 0, 1), O::ifetch(x, 1, 2)}}});
  cases.push_back({"ifetch-noncoherent", 2, false, 2,
                   {{O::store(x, 0, 1), O::ifetch(x, 0, 0)},
                    {O::ifetch(x, 0, 1), O::load(x, 0, 2), O::ifetch(x, 0, 3)}}});
  return cases;
}

namespace {

bool vacuous_initiator(std::size_t state, std::size_t op) {
  // Instruction caches only ever hold Shared or Invalid lines.
  return op == static_cast<std::size_t>(OpKind::IFetch) &&
         (state == static_cast<std::size_t>(LineState::Modified) ||
          state == static_cast<std::size_t>(LineState::Owned) ||
          state == static_cast<std::size_t>(LineState::Exclusive));
}

}  // namespace

bool OracleReport::all_certified() const {
  if (!failures.empty() || !exhaustive) return false;
  for (const auto& row : initiator)
    for (PairStatus s : row)
      if (s != PairStatus::Certified && s != PairStatus::Vacuous) return false;
  for (const auto& row : snoopee)
    for (PairStatus s : row)
      if (s != PairStatus::Certified) return false;
  return true;
}

std::string OracleReport::format() const {
  std::ostringstream os;
  os << std::left << std::setw(12) << "initiator";
  for (OpKind k : kAllOps) os << std::setw(12) << to_string(k);
  os << "\n";
  for (LineState s : kAllStates) {
    os << std::setw(12) << to_string(s);
    for (OpKind k : kAllOps)
      os << std::setw(12) << to_string(initiator[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]);
    os << "\n";
  }
  os << std::setw(12) << "snoopee";
  for (CoherentKind k : kSnoopKinds) os << std::setw(12) << to_string(k);
  os << "\n";
  for (LineState s : kAllStates) {
    os << std::setw(12) << to_string(s);
    for (CoherentKind k : kSnoopKinds)
      os << std::setw(12) << to_string(snoopee[static_cast<std::size_t>(s)][snoop_index(k)]);
    os << "\n";
  }
  os << states << " states explored" << (exhaustive ? "" : " (budget exceeded)") << "\n";
  for (const auto& [name, cx] : failures) os << "case " << name << ": " << cx.format();
  return os.str();
}

OracleReport oracle_tables(const ProtocolTable& table, bool retry_rule, unsigned workers,
                           std::uint64_t state_budget) {
  OracleReport report;
  Coverage covered, failed;
  for (const auto& c : oracle_cases()) {
    ExploreConfig cfg;
    cfg.n_cores = c.n_cores;
    cfg.coherent_ifetch = c.coherent_ifetch;
    cfg.capacity = c.capacity;
    cfg.retry_rule = retry_rule;
    cfg.table = table;
    cfg.workers = workers;
    cfg.state_budget = state_budget;
    ExploreResult r = explore(c.programs, cfg);
    report.states += r.reachable_states;
    report.exhaustive &= r.exhaustive;
    covered.merge(r.coverage);
    for (auto& v : r.violations) {
      failed.merge(v.implicated);
      report.failures.emplace_back(c.name, std::move(v));
    }
  }
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t k = 0; k < 3; ++k) {
      PairStatus& st = report.initiator[s][k];
      if (failed.initiator[s][k]) {
        st = PairStatus::Failed;
      } else if (covered.initiator[s][k]) {
        st = PairStatus::Certified;
      } else {
        st = vacuous_initiator(s, k) ? PairStatus::Vacuous : PairStatus::Uncovered;
      }
    }
    for (std::size_t k = 0; k < 4; ++k) {
      PairStatus& st = report.snoopee[s][k];
      st = failed.snoopee[s][k]    ? PairStatus::Failed
           : covered.snoopee[s][k] ? PairStatus::Certified
                                   : PairStatus::Uncovered;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Mutations

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = text.find(sep, start);
    out.push_back(text.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

[[noreturn]] void bad_mutation(std::string_view text, const std::string& why) {
  throw std::invalid_argument("mutation '" + std::string(text) + "': " + why);
}

LineState need_state(std::string_view text, std::string_view field) {
  auto s = parse_state(field);
  if (!s) bad_mutation(text, "unknown state '" + std::string(field) + "'");
  return *s;
}

CoherentKind need_kind(std::string_view text, std::string_view field) {
  auto k = parse_kind(field);
  if (!k) bad_mutation(text, "unknown transaction '" + std::string(field) + "'");
  return *k;
}

}  // namespace

Mutation parse_mutation(std::string_view text) {
  Mutation m;
  m.text = std::string(text);
  const auto f = split(text, ':');
  if (f[0] == "retry") {
    if (f.size() != 2 || f[1] != "off") bad_mutation(text, "expected retry:off");
    m.retry_rule = false;
    return m;
  }
  if (f[0] == "snoopee") {
    if (f.size() != 4) bad_mutation(text, "expected snoopee:<state>:<snoop>:<change>");
    const LineState st = need_state(text, f[1]);
    const CoherentKind k = need_kind(text, f[2]);
    if (!generates_snoop(k)) bad_mutation(text, "not a snoop kind");
    SnoopOutcome o = m.table.snoopee(st, k);
    if (f[3] == "keep") {
      o.next = st;
    } else if (f[3] == "nodata") {
      o.resp.data_transfer = false;
    } else if (f[3] == "nopass") {
      o.resp.pass_dirty = false;
    } else {
      o.next = need_state(text, f[3]);
    }
    m.table.set_snoopee(st, k, o);
    return m;
  }
  if (f[0] == "initiator") {
    if (f.size() != 4) bad_mutation(text, "expected initiator:<state>:<op>:hit|<kind>");
    const LineState st = need_state(text, f[1]);
    const auto op = parse_op(f[2]);
    if (!op) bad_mutation(text, "unknown operation '" + std::string(f[2]) + "'");
    if (f[3] == "hit") {
      m.table.set_initiator(st, *op, Hit{st});
    } else {
      m.table.set_initiator(st, *op, Issue{need_kind(text, f[3])});
    }
    return m;
  }
  if (f[0] == "completion") {
    if (f.size() != 3) bad_mutation(text, "expected completion:<kind>:<rule>");
    const CoherentKind k = need_kind(text, f[1]);
    if (!generates_snoop(k)) bad_mutation(text, "not a coherent read kind");
    CompletionRule rule;
    if (f[2] == "exclusive") {
      rule = CompletionRule::AlwaysExclusive;
    } else if (f[2] == "shared") {
      rule = CompletionRule::AlwaysShared;
    } else if (f[2] == "ignorepassdirty") {
      rule = CompletionRule::IgnorePassDirty;
    } else {
      bad_mutation(text, "unknown completion rule '" + std::string(f[2]) + "'");
    }
    m.table.set_completion(k, rule);
    return m;
  }
  bad_mutation(text, "unknown mutation class '" + std::string(f[0]) + "'");
}

std::vector<std::string> shipped_mutations() {
  return {
      "snoopee:M:ReadUnique:keep",     "snoopee:E:ReadShared:E",
      "snoopee:S:CleanUnique:S",       "snoopee:M:ReadShared:S",
      "snoopee:O:ReadShared:S",        "snoopee:M:CleanUnique:nodata",
      "completion:ReadShared:exclusive", "initiator:S:Store:hit",
      "retry:off",
  };
}

MutationVerdict check_mutation(const Mutation& m, unsigned workers,
                               std::uint64_t state_budget) {
  MutationVerdict v;
  v.mutation = m.text;
  for (const auto& c : oracle_cases()) {
    ExploreConfig cfg;
    cfg.n_cores = c.n_cores;
    cfg.coherent_ifetch = c.coherent_ifetch;
    cfg.capacity = c.capacity;
    cfg.retry_rule = m.retry_rule;
    cfg.table = m.table;
    cfg.workers = workers;
    cfg.state_budget = state_budget;
    ExploreResult r = explore(c.programs, cfg);
    if (!r.violations.empty()) {
      v.caught = true;
      v.caught_by = "oracle case " + c.name;
      v.witness = std::move(r.violations.front());
      return v;
    }
  }
  for (unsigned n : {2u, 3u}) {
    for (const auto& t : builtin_litmus(n)) {
      ExploreConfig cfg;
      cfg.retry_rule = m.retry_rule;
      cfg.table = m.table;
      cfg.workers = workers;
      cfg.state_budget = state_budget;
      LitmusResult r = run_litmus(t, cfg);
      if (!r.counterexamples.empty()) {
        v.caught = true;
        v.caught_by = "litmus " + t.name + " (" + std::to_string(n) + " cores)";
        v.witness = std::move(r.counterexamples.front());
        return v;
      }
    }
  }
  return v;
}

}  // namespace culsim

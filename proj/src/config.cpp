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

#include "culsim/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace culsim {

namespace {

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    v.remove_prefix(2);
    base = 16;
  }
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(std::string(key), "expected an unsigned integer, got '" +
                                            std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(std::string(key),
                    "expected a boolean, got '" + std::string(v) + "'");
}

using Setter = std::function<void(SimConfig&, std::string_view, std::string_view)>;

template <class T>
Setter uint_field(T SimConfig::*member) {
  return [member](SimConfig& c, std::string_view k, std::string_view v) {
    c.*member = static_cast<T>(parse_uint(k, v));
  };
}

template <class Outer, class T>
Setter nested_uint(Outer SimConfig::*outer, T Outer::*member) {
  return [outer, member](SimConfig& c, std::string_view k, std::string_view v) {
    (c.*outer).*member = static_cast<T>(parse_uint(k, v));
  };
}

Setter bool_field(bool SimConfig::*member) {
  return [member](SimConfig& c, std::string_view k, std::string_view v) {
    c.*member = parse_bool(k, v);
  };
}

const std::vector<std::pair<std::string, Setter>>& fields() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"n_cores", uint_field(&SimConfig::n_cores)},
      {"line_size", uint_field(&SimConfig::line_size)},
      {"cache_size", uint_field(&SimConfig::cache_size)},
      {"ways", uint_field(&SimConfig::ways)},
      {"address_bits", uint_field(&SimConfig::address_bits)},
      {"coherent_ifetch", bool_field(&SimConfig::coherent_ifetch)},
      {"latencies.l1_hit", nested_uint(&SimConfig::latencies, &Latencies::l1_hit)},
      {"latencies.snoop_hop",
       nested_uint(&SimConfig::latencies, &Latencies::snoop_hop)},
      {"latencies.ccu_stage",
       nested_uint(&SimConfig::latencies, &Latencies::ccu_stage)},
      {"latencies.mem_read",
       nested_uint(&SimConfig::latencies, &Latencies::mem_read)},
      {"latencies.mem_write",
       nested_uint(&SimConfig::latencies, &Latencies::mem_write)},
      {"fifo_depths.writeback",
       nested_uint(&SimConfig::fifo_depths, &FifoDepths::writeback)},
      {"fifo_depths.handshake",
       nested_uint(&SimConfig::fifo_depths, &FifoDepths::handshake)},
      {"fifo_depths.collision_capacity",
       nested_uint(&SimConfig::fifo_depths, &FifoDepths::collision_capacity)},
      {"seed", uint_field(&SimConfig::seed)},
      {"watchdog_cycles", uint_field(&SimConfig::watchdog_cycles)},
      {"serialize", bool_field(&SimConfig::serialize)},
  };
  return table;
}

}  // namespace

void SimConfig::validate() const {
  if (n_cores < 2 || n_cores > kMaxCores)
    throw ConfigError("n_cores", "supported range is 2-4, got " +
                                     std::to_string(n_cores));
  if (!is_pow2(line_size) || line_size < 2 * kWordBytes)
    throw ConfigError("line_size", "must be a power of two of at least " +
                                       std::to_string(2 * kWordBytes) + " bytes");
  if (ways == 0) throw ConfigError("ways", "must be at least 1");
  if (cache_size == 0 || cache_size % (ways * line_size) != 0)
    throw ConfigError("cache_size", "must be divisible by ways x line_size (" +
                                        std::to_string(ways) + " x " +
                                        std::to_string(line_size) + ")");
  if (!is_pow2(sets())) throw ConfigError("cache_size", "set count must be a power of two");
  if (address_bits < 12 || address_bits > 64)
    throw ConfigError("address_bits", "must be within 12-64");
  if (latencies.l1_hit == 0) throw ConfigError("latencies.l1_hit", "must be >= 1");
  if (latencies.ccu_stage == 0)
    throw ConfigError("latencies.ccu_stage", "must be >= 1");
  if (latencies.snoop_hop == 0)
    throw ConfigError("latencies.snoop_hop", "must be >= 1");
  if (latencies.mem_read == 0) throw ConfigError("latencies.mem_read", "must be >= 1");
  if (latencies.mem_write == 0)
    throw ConfigError("latencies.mem_write", "must be >= 1");
  if (fifo_depths.writeback == 0)
    throw ConfigError("fifo_depths.writeback", "must be >= 1");
  if (fifo_depths.handshake == 0)
    throw ConfigError("fifo_depths.handshake", "must be >= 1");
  if (fifo_depths.collision_capacity == 0)
    throw ConfigError("fifo_depths.collision_capacity", "must be >= 1");
  if (watchdog_cycles == 0) throw ConfigError("watchdog_cycles", "must be >= 1");
}

void set_config_field(SimConfig& config, std::string_view key,
                      std::string_view value) {
  for (const auto& [name, setter] : fields()) {
    if (name == key) {
      setter(config, key, value);
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown configuration key");
}

std::vector<std::string> config_field_names() {
  std::vector<std::string> names;
  for (const auto& f : fields()) names.push_back(f.first);
  return names;
}

SimConfig parse_config(std::string_view text, const std::string& source,
                       SimConfig base) {
  std::set<std::string, std::less<>> seen;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(source, lineno, 1, "expected 'key = value'");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source, lineno, 1, "missing key");
    if (!seen.insert(std::string(key)).second)
      throw ParseError(source, lineno, 1, "duplicate key '" + std::string(key) + "'");
    try {
      set_config_field(base, key, value);
    } catch (const ConfigError& e) {
      auto col = static_cast<std::size_t>(raw.find(key)) + 1;
      throw ParseError(source, lineno, col, e.what());
    }
  }
  base.validate();
  return base;
}

SimConfig load_config(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, base);
}

}  // namespace culsim

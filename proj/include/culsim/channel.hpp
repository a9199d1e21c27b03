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

#ifndef CULSIM_CHANNEL_HPP_
#define CULSIM_CHANNEL_HPP_

#include <algorithm>
#include <cassert>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "culsim/protocol.hpp"
#include "culsim/types.hpp"

namespace culsim {

/**
 * A valid/ready link with a fixed traversal latency. A message pushed at
 * cycle t becomes visible to the consumer at t + latency; messages never
 * overtake each other. A bounded channel refuses pushes when full, which is
 * how back-pressure propagates.
 */
template <class T>
class Channel {
 public:
  struct Entry {
    Cycle ready_at;
    T msg;
  };

  explicit Channel(Cycle latency = 1,
                   std::size_t capacity = std::numeric_limits<std::size_t>::max())
      : latency_(latency), capacity_(capacity) {}

  bool can_push() const { return q_.size() < capacity_; }

  void push(Cycle now, T msg) {
    assert(can_push());
    Cycle at = now + latency_;
    if (!q_.empty()) at = std::max(at, q_.back().ready_at);
    q_.push_back({at, std::move(msg)});
  }

  bool ready(Cycle now) const { return !q_.empty() && q_.front().ready_at <= now; }
  const T& front() const { return q_.front().msg; }
  void pop() { q_.pop_front(); }
  T take() {
    T m = std::move(q_.front().msg);
    q_.pop_front();
    return m;
  }

  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }
  const std::deque<Entry>& entries() const { return q_; }
  Cycle latency() const { return latency_; }

 private:
  Cycle latency_;
  std::size_t capacity_;
  std::deque<Entry> q_;
};

/// AR/AW request from an L1 to the CCU.
struct CoherentRequest {
  AgentId agent;
  CoherentKind kind = CoherentKind::ReadShared;
  Addr line = 0;
  LineData data;  // WriteBack / WriteNoSnoop
};

/// CR plus the optional CD burst. `line` is diagnostic only: the CCU pairs
/// responses with requests by order, never by address.
struct SnoopReply {
  SnoopResponse resp;
  std::optional<SnoopData> data;
  Addr line = 0;
};

/// R channel burst (or data-less acknowledgement for CleanUnique).
struct ReadResponse {
  CoherentKind kind = CoherentKind::ReadShared;
  Addr line = 0;
  bool is_shared = false;
  bool pass_dirty = false;
  bool from_cache = false;
  std::optional<LineData> data;
};

/// Sent by the initiator once it has installed (or given up on) the line;
/// the CCU releases the collision entry on receipt.
struct CompletionAck {
  CoreId core = 0;
  Addr line = 0;
};

/// Every link between the L1s and the CCU.
struct Fabric {
  std::vector<Channel<CoherentRequest>> req;  // per core
  std::vector<Channel<CompletionAck>> ack;    // per core
  std::vector<Channel<ReadResponse>> r;       // per core
  std::vector<Channel<SnoopRequest>> ac;      // per agent
  std::vector<Channel<SnoopReply>> cr;        // per agent

  Fabric(std::size_t n_cores, Cycle stage_latency, Cycle hop_latency) {
    for (std::size_t c = 0; c < n_cores; ++c) {
      req.emplace_back(stage_latency);
      ack.emplace_back(stage_latency);
      r.emplace_back(stage_latency);
    }
    for (std::size_t a = 0; a < 2 * n_cores; ++a) {
      ac.emplace_back(hop_latency);
      cr.emplace_back(hop_latency);
    }
  }

  bool empty() const {
    auto e = [](const auto& v) {
      return std::all_of(v.begin(), v.end(), [](const auto& ch) { return ch.empty(); });
    };
    return e(req) && e(ack) && e(r) && e(ac) && e(cr);
  }
};

}  // namespace culsim

#endif  // CULSIM_CHANNEL_HPP_

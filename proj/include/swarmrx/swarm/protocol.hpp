#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iterator>
#include <map>
#include <set>
#include <string>

#include "swarmrx/error.hpp"
#include "swarmrx/selfheal.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::swarm {

using Millis = std::chrono::milliseconds;
using AliveSet = std::set<NodeIndex>;  // ordered by index: the canonical rotation order

/// alive[cycle mod |alive|] in index order.
inline NodeIndex leader_for_cycle(std::uint64_t cycle, const AliveSet& alive) {
  if (alive.empty()) throw SwarmLost("no alive node to lead cycle " + std::to_string(cycle));
  auto it = alive.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(cycle % alive.size()));
  return *it;
}

struct SwarmState {
  AliveSet alive;
  std::uint64_t cycle = 0;
  NodeIndex current_leader = 0;
  std::map<NodeIndex, selfheal::BranchReport> pending_reports;
};

/// Excludes `missing` (report timeout or missed heartbeats) and recomputes the leader
/// for the current cycle over the remaining members.
inline SwarmState handle_fault(SwarmState state, NodeIndex missing) {
  state.alive.erase(missing);
  state.pending_reports.erase(missing);
  if (state.alive.empty()) throw SwarmLost("swarm lost: node " + std::to_string(missing) + " was the last member");
  state.current_leader = leader_for_cycle(state.cycle, state.alive);
  return state;
}

// Reconnect pacing: base, 2*base, 4*base, ... capped.
class Backoff {
 public:
  explicit Backoff(Millis base = Millis{200}, Millis cap = Millis{5000}) : base_(base), cap_(cap) {}

  Millis next_delay() {
    const auto shift = std::min<unsigned>(failures_, 30u);
    const auto delay = std::min<std::int64_t>(base_.count() << shift, cap_.count());
    ++failures_;
    return Millis{delay};
  }
  void reset() { failures_ = 0; }
  unsigned failures() const { return failures_; }

 private:
  Millis base_;
  Millis cap_;
  unsigned failures_ = 0;
};

}  // namespace swarmrx::swarm

#pragma once

// Stub hooks for protocol tests: every report carries a fixed BER and the heal
// step is the real selection rule over whoever reported.

#include <map>
#include <memory>
#include <vector>

#include "swarmrx/swarm/inprocess.hpp"

namespace harness {

using namespace swarmrx;
using namespace swarmrx::swarm;

inline selfheal::CombinerDecision stub_heal(std::uint64_t cycle, const std::vector<selfheal::BranchReport>& reps) {
  selfheal::HealConfig cfg;
  cfg.n_total = reps.size();
  selfheal::CombinerDecision d;
  d.cycle = cycle;
  d.n_s = selfheal::count_good_branches(reps, cfg);
  d.algorithm = selfheal::select_algorithm(d.n_s, reps.size());
  d.weights.algorithm = d.algorithm;
  for (const auto& r : reps) {
    d.participants.push_back(r.branch_id);
    d.branch_bers.push_back(r.ber);
    d.weights.u.push_back(cf64{1.0, 0.0});
  }
  d.frame_bits = 8;
  return d;
}

struct Swarm {
  explicit Swarm(std::size_t n, NetworkConfig net_cfg = {}, NodeTiming timing = {})
      : net(n, net_cfg, [this, n, timing](NodeIndex i, Outbox& out) {
          NodeHooks hooks;
          hooks.make_report = [i](std::uint64_t c) {
            selfheal::BranchReport r;
            r.branch_id = i;
            r.cycle = c;
            r.sync_ok = true;
            r.ber = 0.0;
            return r;
          };
          hooks.heal = stub_heal;
          hooks.on_decision = [this](const DecisionEvent& ev) { log.push_back(ev); };
          return std::make_unique<SwarmNode>(i, n, timing, std::move(hooks), out);
        }) {}

  // Decisions recorded by any node, first recording per cycle.
  std::map<std::uint64_t, DecisionEvent> by_cycle() const {
    std::map<std::uint64_t, DecisionEvent> out;
    for (const auto& ev : log) out.emplace(ev.payload.decision.cycle, ev);
    return out;
  }

  // Every recording of a cycle carries the same payload and leader.
  bool agreement() const {
    std::map<std::uint64_t, const DecisionEvent*> first;
    for (const auto& ev : log) {
      auto [it, fresh] = first.emplace(ev.payload.decision.cycle, &ev);
      if (!fresh && (it->second->payload != ev.payload || it->second->leader != ev.leader)) return false;
    }
    return true;
  }

  std::uint64_t max_decided() const {
    std::uint64_t m = 0;
    bool any = false;
    for (const auto& ev : log) {
      m = std::max(m, ev.payload.decision.cycle);
      any = true;
    }
    return any ? m : 0;
  }

  bool decided(std::uint64_t c) const {
    for (const auto& ev : log)
      if (ev.payload.decision.cycle >= c) return true;
    return false;
  }

  InProcessNetwork net;
  std::vector<DecisionEvent> log;
};

}  // namespace harness

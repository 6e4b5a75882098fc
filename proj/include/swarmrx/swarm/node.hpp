#pragma once

// Rotating-leader node. The node is a pure event-driven state machine: the owner
// feeds it messages and clock ticks and it emits messages through an Outbox. The
// same class runs under the deterministic in-process network and over TCP.
//
// Per cycle c:
//   1. leader = leader_for_cycle(c, alive)
//   2. followers send REPORT to the leader
//   3. the leader collects until every alive node reported or t_report elapsed;
//      silent nodes are excluded
//   4. the leader heals, then broadcasts DECISION (with next-cycle membership)
//   5. everyone adopts the decision and moves to c + 1
// A follower that stops hearing from its leader (k_heartbeat heartbeat periods)
// excludes it and re-reports to the next leader of the same cycle. Restarted
// nodes announce themselves with HELLO and are re-admitted by the next DECISION.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swarmrx/selfheal.hpp"
#include "swarmrx/swarm/codec.hpp"
#include "swarmrx/swarm/protocol.hpp"

namespace swarmrx::swarm {

struct NodeTiming {
  Millis t_report{50};
  Millis t_heartbeat{10};
  int k_heartbeat = 3;
  Millis cycle_gap{0};

  Millis silence_limit() const { return t_heartbeat * k_heartbeat; }
  Millis join_window() const { return silence_limit(); }
  Millis await_backstop() const { return t_report * 3; }
};

class Outbox {
 public:
  virtual ~Outbox() = default;
  virtual void send(NodeIndex to, const SwarmMessage& m) = 0;
};

struct DecisionEvent {
  NodeIndex recorder = 0;
  NodeIndex leader = 0;
  DecisionPayload payload;
};

struct NodeHooks {
  std::function<selfheal::BranchReport(std::uint64_t cycle)> make_report;
  std::function<selfheal::CombinerDecision(std::uint64_t cycle, const std::vector<selfheal::BranchReport>&)> heal;
  std::function<void(const DecisionEvent&)> on_decision;
  std::function<void(const std::string&)> on_event;
};

enum class Role { Joining, Leader, Follower, Gap, Stopped };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Joining: return "joining";
    case Role::Leader: return "leader";
    case Role::Follower: return "follower";
    case Role::Gap: return "gap";
    case Role::Stopped: return "stopped";
  }
  return "?";
}

class SwarmNode {
 public:
  SwarmNode(NodeIndex self, std::size_t n_total, NodeTiming timing, NodeHooks hooks, Outbox& out)
      : self_(self), n_total_(n_total), timing_(timing), hooks_(std::move(hooks)), out_(out) {
    if (self >= n_total) throw InvalidArgument("node index out of range");
  }

  void start(Millis now) {
    role_ = Role::Joining;
    join_deadline_ = now + timing_.join_window();
    send_all(make_message(MsgType::Hello, self_, 0));
    next_heartbeat_ = now + timing_.t_heartbeat;
  }

  // Graceful shutdown.
  void stop() {
    if (role_ == Role::Stopped) return;
    send_all(make_message(MsgType::Goodbye, self_, state_.cycle));
    role_ = Role::Stopped;
  }

  void on_tick(Millis now) {
    if (role_ == Role::Stopped) return;
    if (now >= next_heartbeat_) {
      if (role_ == Role::Joining)
        send_all(make_message(MsgType::Hello, self_, 0));
      else
        send_all(make_message(MsgType::Heartbeat, self_, state_.cycle));
      next_heartbeat_ = now + timing_.t_heartbeat;
    }
    switch (role_) {
      case Role::Joining:
        if (!saw_active_swarm_ && now >= join_deadline_) {
          state_.alive.clear();
          for (std::size_t i = 0; i < n_total_; ++i) state_.alive.insert(static_cast<NodeIndex>(i));
          event("starting swarm at cycle 0");
          begin_cycle(0, now);
        }
        break;
      case Role::Gap:
        if (now >= next_cycle_at_) begin_cycle(state_.cycle, now);
        break;
      case Role::Leader:
        maybe_finalize(now);
        break;
      case Role::Follower:
        watch_leader(now);
        break;
      case Role::Stopped:
        break;
    }
  }

  void on_message(const SwarmMessage& m, Millis now) {
    if (role_ == Role::Stopped || m.sender == self_ || m.sender >= n_total_) return;
    last_heard_[m.sender] = now;
    switch (m.type) {
      case MsgType::Hello:
        if (!pending_join_.contains(m.sender)) event("HELLO from node " + std::to_string(m.sender));
        pending_join_.insert(m.sender);
        departed_.erase(m.sender);
        break;
      case MsgType::Heartbeat:
        if (role_ == Role::Joining && m.cycle > 0) saw_active_swarm_ = true;
        if (role_ != Role::Joining && m.cycle >= state_.cycle + 2) resync(m);
        break;
      case MsgType::Goodbye:
        event("GOODBYE from node " + std::to_string(m.sender));
        departed_.insert(m.sender);
        pending_join_.erase(m.sender);
        if (role_ == Role::Leader) maybe_finalize(now);
        if (role_ == Role::Follower && m.sender == state_.current_leader) failover(now);
        break;
      case MsgType::Report:
        handle_report(m, now);
        break;
      case MsgType::Decision:
        handle_decision(m, now);
        break;
    }
  }

  NodeIndex id() const { return self_; }
  Role role() const { return role_; }
  std::uint64_t cycle() const { return state_.cycle; }
  const SwarmState& state() const { return state_; }
  const std::vector<DecisionEvent>& decisions() const { return decisions_; }
  std::optional<std::uint64_t> last_decided() const { return last_decided_; }

  // Cycle this node is currently collecting for, if it is the leader.
  std::optional<std::uint64_t> leading_cycle() const {
    if (role_ == Role::Leader) return state_.cycle;
    return std::nullopt;
  }

 private:
  void event(const std::string& what) {
    if (hooks_.on_event) hooks_.on_event("node " + std::to_string(self_) + ": " + what);
  }

  void send_all(const SwarmMessage& m) {
    for (std::size_t p = 0; p < n_total_; ++p)
      if (p != self_) out_.send(static_cast<NodeIndex>(p), m);
  }

  void begin_cycle(std::uint64_t c, Millis now) {
    state_.cycle = c;
    state_.current_leader = leader_for_cycle(c, state_.alive);
    state_.pending_reports.clear();
    own_report_ = hooks_.make_report(c);
    own_report_->branch_id = self_;
    own_report_->cycle = c;
    if (state_.current_leader == self_)
      become_leader(now);
    else
      report_to_leader(now);
  }

  void become_leader(Millis now) {
    role_ = Role::Leader;
    state_.current_leader = self_;
    state_.pending_reports[self_] = *own_report_;
    if (auto it = buffered_.find(state_.cycle); it != buffered_.end()) {
      for (auto& [from, rep] : it->second)
        if (state_.alive.contains(from)) state_.pending_reports[from] = std::move(rep);
    }
    prune_buffer(state_.cycle);
    collect_deadline_ = now + timing_.t_report;
    // Finalizing waits for the next tick, so a lone node advances one cycle per tick
    // instead of recursing.
  }

  void report_to_leader(Millis now) {
    role_ = Role::Follower;
    out_.send(state_.current_leader,
              make_message(MsgType::Report, self_, state_.cycle, encode_report(*own_report_)));
    await_deadline_ = now + timing_.await_backstop();
    watch_from_ = now;
  }

  void prune_buffer(std::uint64_t upto) {
    buffered_.erase(buffered_.begin(), buffered_.upper_bound(upto));
  }

  void handle_report(const SwarmMessage& m, Millis now) {
    selfheal::BranchReport rep;
    try {
      rep = decode_report(m.payload);
    } catch (const DecodeError& e) {
      event(std::string("dropping malformed REPORT: ") + e.what());
      return;
    }
    if (rep.cycle != m.cycle || rep.branch_id != m.sender) return;
    if (role_ == Role::Joining) {
      // peers whose join window closed first may already report for cycle 0
      if (m.cycle > 0) saw_active_swarm_ = true;
      buffered_[m.cycle][m.sender] = std::move(rep);
      while (buffered_.size() > 16) buffered_.erase(buffered_.begin());
      return;
    }
    if (m.cycle < state_.cycle) return;
    if (m.cycle == state_.cycle && role_ == Role::Leader) {
      if (state_.alive.contains(m.sender)) {
        state_.pending_reports[m.sender] = std::move(rep);
        maybe_finalize(now);
      }
      return;
    }
    buffered_[m.cycle][m.sender] = std::move(rep);
  }

  void handle_decision(const SwarmMessage& m, Millis now) {
    DecisionPayload p;
    try {
      p = decode_decision(m.payload);
    } catch (const DecodeError& e) {
      event(std::string("dropping malformed DECISION: ") + e.what());
      return;
    }
    if (p.decision.cycle != m.cycle) return;
    const bool includes_me = std::find(p.alive_next.begin(), p.alive_next.end(), self_) != p.alive_next.end();
    if (role_ == Role::Joining) {
      if (!includes_me) {
        saw_active_swarm_ = true;
        return;
      }
      if (last_decided_ && m.cycle <= *last_decided_) return;
      event("re-admitted by node " + std::to_string(m.sender) + " after cycle " + std::to_string(m.cycle));
    } else if (m.cycle < state_.cycle) {
      return;
    }
    apply_decision(p, m.sender, now);
  }

  void maybe_finalize(Millis now) {
    std::vector<NodeIndex> missing;
    bool waiting = false;
    for (auto a : state_.alive) {
      if (state_.pending_reports.contains(a)) continue;
      missing.push_back(a);
      if (!departed_.contains(a)) waiting = true;
    }
    if (waiting && now < collect_deadline_) return;
    finalize(missing, now);
  }

  void finalize(const std::vector<NodeIndex>& missing, Millis now) {
    for (auto m : missing) {
      event("excluding node " + std::to_string(m) + " from cycle " + std::to_string(state_.cycle));
      state_ = handle_fault(std::move(state_), m);
      state_.current_leader = self_;
    }
    std::vector<selfheal::BranchReport> reports;
    reports.reserve(state_.pending_reports.size());
    for (const auto& [id, rep] : state_.pending_reports) reports.push_back(rep);

    DecisionPayload p;
    try {
      p.decision = hooks_.heal(state_.cycle, reports);
    } catch (const std::exception& e) {
      event(std::string("heal failed, emitting empty decision: ") + e.what());
      p.decision = selfheal::CombinerDecision{};
      p.decision.weights.u.assign(reports.size(), cf64{0.0, 0.0});
      if (!reports.empty()) p.decision.weights.u[0] = 1.0;
      p.decision.weights.algorithm = selfheal::Algorithm::SC;
      for (const auto& r : reports) {
        p.decision.participants.push_back(r.branch_id);
        p.decision.branch_bers.push_back(r.ber);
      }
    }
    p.decision.cycle = state_.cycle;
    AliveSet next = state_.alive;
    for (auto j : pending_join_)
      if (!departed_.contains(j)) next.insert(j);
    p.alive_next.assign(next.begin(), next.end());
    send_all(make_message(MsgType::Decision, self_, state_.cycle, encode_decision(p)));
    apply_decision(p, self_, now);
  }

  void apply_decision(const DecisionPayload& p, NodeIndex leader, Millis now) {
    const std::uint64_t c = p.decision.cycle;
    if (last_decided_ && c <= *last_decided_) return;
    last_decided_ = c;
    DecisionEvent ev{self_, leader, p};
    decisions_.push_back(ev);
    if (hooks_.on_decision) hooks_.on_decision(ev);

    AliveSet next(p.alive_next.begin(), p.alive_next.end());
    for (auto a : next) pending_join_.erase(a);
    state_.alive = next;
    state_.cycle = c + 1;
    state_.pending_reports.clear();
    own_report_.reset();
    prune_buffer(c);
    if (!next.contains(self_)) {
      event("excluded by node " + std::to_string(leader) + "; rejoining");
      role_ = Role::Joining;
      saw_active_swarm_ = true;
      send_all(make_message(MsgType::Hello, self_, 0));
      return;
    }
    if (timing_.cycle_gap.count() > 0) {
      role_ = Role::Gap;
      next_cycle_at_ = now + timing_.cycle_gap;
    } else {
      begin_cycle(c + 1, now);
    }
  }

  // A peer two or more cycles ahead means a DECISION never reached us: drop the
  // stale cycle and get re-admitted rather than risk deciding it on our own.
  void resync(const SwarmMessage& m) {
    event("node " + std::to_string(m.sender) + " is at cycle " + std::to_string(m.cycle) + ", we are at " +
          std::to_string(state_.cycle) + "; resyncing");
    role_ = Role::Joining;
    saw_active_swarm_ = true;
    own_report_.reset();
    state_.pending_reports.clear();
    send_all(make_message(MsgType::Hello, self_, 0));
  }

  void watch_leader(Millis now) {
    const NodeIndex leader = state_.current_leader;
    Millis heard = watch_from_;
    if (auto it = last_heard_.find(leader); it != last_heard_.end()) heard = std::max(heard, it->second);
    if (departed_.contains(leader) || now - heard >= timing_.silence_limit() || now >= await_deadline_)
      failover(now);
  }

  void failover(Millis now) {
    const NodeIndex old = state_.current_leader;
    event("leader " + std::to_string(old) + " unresponsive in cycle " + std::to_string(state_.cycle) +
          "; excluding");
    state_ = handle_fault(std::move(state_), old);
    if (state_.current_leader == self_)
      become_leader(now);
    else
      report_to_leader(now);
  }

  NodeIndex self_;
  std::size_t n_total_;
  NodeTiming timing_;
  NodeHooks hooks_;
  Outbox& out_;

  Role role_ = Role::Stopped;
  SwarmState state_;
  std::optional<selfheal::BranchReport> own_report_;
  std::map<std::uint64_t, std::map<NodeIndex, selfheal::BranchReport>> buffered_;
  std::set<NodeIndex> pending_join_;
  std::set<NodeIndex> departed_;
  std::map<NodeIndex, Millis> last_heard_;
  bool saw_active_swarm_ = false;

  Millis join_deadline_{0};
  Millis next_heartbeat_{0};
  Millis collect_deadline_{0};
  Millis await_deadline_{0};
  Millis watch_from_{0};
  Millis next_cycle_at_{0};

  std::vector<DecisionEvent> decisions_;
  std::optional<std::uint64_t> last_decided_;
};

}  // namespace swarmrx::swarm

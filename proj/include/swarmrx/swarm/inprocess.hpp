#pragma once

// Deterministic, single-threaded transport: a virtual millisecond clock, a
// delivery queue with seeded delay/drop, and kill/restart controls. Every message
// passes through the wire codec. All sends are logged for inspection.

#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <vector>

#include "swarmrx/rng.hpp"
#include "swarmrx/swarm/codec.hpp"
#include "swarmrx/swarm/node.hpp"

namespace swarmrx::swarm {

struct NetworkConfig {
  Millis delay_min{1};
  Millis delay_max{1};
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
};

struct WireLogEntry {
  Millis sent_at{0};
  NodeIndex from = 0;
  NodeIndex to = 0;
  MsgType type = MsgType::Heartbeat;
  std::uint64_t cycle = 0;
  bool delivered = false;
};

class InProcessNetwork {
 public:
  using NodeFactory = std::function<std::unique_ptr<SwarmNode>(NodeIndex, Outbox&)>;

  InProcessNetwork(std::size_t n, NetworkConfig cfg, NodeFactory factory)
      : cfg_(cfg), factory_(std::move(factory)), rng_({cfg.seed, Stream::Network, 0, 0}) {
    if (cfg_.delay_min.count() < 1 || cfg_.delay_max < cfg_.delay_min)
      throw InvalidArgument("network delays must satisfy 1 <= min <= max");
    for (std::size_t i = 0; i < n; ++i) endpoints_.push_back(std::make_unique<Endpoint>(*this, static_cast<NodeIndex>(i)));
    nodes_.resize(n);
  }

  std::size_t size() const { return nodes_.size(); }
  Millis now() const { return now_; }

  void start_all() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) restart(static_cast<NodeIndex>(i));
  }

  // Crash: no GOODBYE, in-flight traffic to the node is lost.
  void kill(NodeIndex i) { nodes_.at(i).reset(); }

  void restart(NodeIndex i) {
    nodes_.at(i) = factory_(i, *endpoints_.at(i));
    nodes_[i]->start(now_);
  }

  bool is_up(NodeIndex i) const { return nodes_.at(i) != nullptr; }
  SwarmNode* node(NodeIndex i) { return nodes_.at(i).get(); }
  const SwarmNode* node(NodeIndex i) const { return nodes_.at(i).get(); }

  std::size_t up_count() const {
    std::size_t n = 0;
    for (const auto& p : nodes_) n += p ? 1 : 0;
    return n;
  }

  // Advance the clock by 1 ms: deliver everything due, then tick nodes in index order.
  void step() {
    now_ += Millis{1};
    while (!queue_.empty() && queue_.top().deliver_at <= now_) {
      Pending p = queue_.top();
      queue_.pop();
      auto& target = nodes_.at(p.to);
      if (!target) continue;
      log_.at(p.log_index).delivered = true;
      target->on_message(decode_message(p.bytes), now_);
    }
    for (auto& n : nodes_)
      if (n) n->on_tick(now_);
    check_single_leader();
  }

  void run_for(Millis span) {
    const Millis end = now_ + span;
    while (now_ < end) step();
  }

  // Steps until pred() holds or `limit` virtual time passes. Returns pred().
  bool run_until(const std::function<bool()>& pred, Millis limit) {
    const Millis end = now_ + limit;
    while (!pred() && now_ < end) step();
    return pred();
  }

  const std::vector<WireLogEntry>& log() const { return log_; }

  // Cycles in which more than one node held the leader role at the same instant.
  const std::set<std::uint64_t>& leader_conflicts() const { return leader_conflicts_; }

 private:
  struct Pending {
    Millis deliver_at;
    std::uint64_t seq;
    NodeIndex to;
    std::size_t log_index;
    std::vector<std::uint8_t> bytes;
    bool operator>(const Pending& o) const {
      return deliver_at != o.deliver_at ? deliver_at > o.deliver_at : seq > o.seq;
    }
  };

  class Endpoint : public Outbox {
   public:
    Endpoint(InProcessNetwork& net, NodeIndex self) : net_(net), self_(self) {}
    void send(NodeIndex to, const SwarmMessage& m) override { net_.enqueue(self_, to, m); }

   private:
    InProcessNetwork& net_;
    NodeIndex self_;
  };

  void enqueue(NodeIndex from, NodeIndex to, const SwarmMessage& m) {
    if (to >= nodes_.size()) return;
    log_.push_back({now_, from, to, m.type, m.cycle, false});
    if (cfg_.drop_probability > 0.0 && rng_.uniform() < cfg_.drop_probability) return;
    const auto span = static_cast<std::uint64_t>((cfg_.delay_max - cfg_.delay_min).count());
    const Millis delay = cfg_.delay_min + Millis{static_cast<std::int64_t>(span ? rng_.uniform_int(0, span) : 0)};
    queue_.push({now_ + delay, seq_++, to, log_.size() - 1, encode_message(m)});
  }

  void check_single_leader() {
    std::map<std::uint64_t, int> leaders;
    for (const auto& n : nodes_)
      if (n)
        if (auto c = n->leading_cycle()) ++leaders[*c];
    for (const auto& [c, count] : leaders)
      if (count > 1) leader_conflicts_.insert(c);
  }

  NetworkConfig cfg_;
  NodeFactory factory_;
  Rng rng_;
  std::vector<std::unique_ptr<Endpoint>> endpoints_;
  std::vector<std::unique_ptr<SwarmNode>> nodes_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  Millis now_{0};
  std::vector<WireLogEntry> log_;
  std::set<std::uint64_t> leader_conflicts_;
};

}  // namespace swarmrx::swarm

#pragma once

// One swarm member over TCP: the real frontend for this node's branch, the real
// healer when leading, and a 1 ms tick on the transport's io thread.

#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>

#include "swarmrx/scenario/runner.hpp"
#include "swarmrx/swarm/tcp.hpp"

namespace swarmrx::scenario {

struct NodeOptions {
  NodeIndex index = 0;
  std::optional<std::uint64_t> max_cycles;  // leave gracefully after this many decided cycles
  std::function<void(const std::string&)> decision_log;
  std::function<void(const std::string&)> event_log;
};

// Only fields carried by the DECISION itself, so every member prints the same line.
inline std::string decision_line(const swarm::DecisionEvent& ev) {
  const auto& d = ev.payload.decision;
  std::string parts;
  for (auto p : d.participants) parts += (parts.empty() ? "" : ",") + std::to_string(p);
  std::string next;
  for (auto p : ev.payload.alive_next) next += (next.empty() ? "" : ",") + std::to_string(p);
  return "DECISION cycle=" + std::to_string(d.cycle) + " leader=" + std::to_string(ev.leader) +
         " algorithm=" + std::string(combining::to_string(d.algorithm)) + " n_s=" + std::to_string(d.n_s) + " participants=" + parts +
         " next=" + next + " combined_ber=" + fixed6(d.combined_ber) + " rate=" + fixed6(d.data_rate);
}

inline std::vector<swarm::PeerAddress> peer_addresses(const ScenarioConfig& cfg) {
  std::vector<swarm::PeerAddress> out;
  for (std::size_t i = 0; i < cfg.n_receivers; ++i)
    out.push_back({cfg.tcp.host(i), static_cast<std::uint16_t>(cfg.tcp.base_port + i)});
  return out;
}

// Runs until SIGINT/SIGTERM or max_cycles. Returns the number of cycles this node decided.
inline std::uint64_t run_node(const ScenarioConfig& cfg, const NodeOptions& opt) {
  namespace asio = boost::asio;
  cfg.validate();
  if (opt.index >= cfg.n_receivers)
    throw InvalidArgument("node index " + std::to_string(opt.index) + " but the scenario has " +
                          std::to_string(cfg.n_receivers) + " receivers");
  const auto tx = std::make_shared<const Transmitter>(cfg);
  const Frontend frontend(cfg, tx);
  auto log_event = [&opt](const std::string& s) {
    if (opt.event_log) opt.event_log(s);
  };

  asio::io_context io;
  const auto t0 = std::chrono::steady_clock::now();
  auto now = [t0] { return std::chrono::duration_cast<swarm::Millis>(std::chrono::steady_clock::now() - t0); };

  std::unique_ptr<swarm::SwarmNode> node;
  swarm::TcpTransport transport(
      io, opt.index, peer_addresses(cfg), [&](const swarm::SwarmMessage& m) { node->on_message(m, now()); },
      [&](const std::string& s) { log_event("node " + std::to_string(opt.index) + ": " + s); });

  std::uint64_t decided = 0;
  bool leaving = false;
  asio::steady_timer tick(io);
  auto leave = [&] {
    if (leaving) return;
    leaving = true;
    node->stop();
    // give GOODBYE a moment to reach the peers
    auto grace = std::make_shared<asio::steady_timer>(io, std::chrono::milliseconds(200));
    grace->async_wait([&, grace](boost::system::error_code) {
      transport.close();
      io.stop();
    });
  };

  swarm::NodeHooks hooks;
  hooks.make_report = [&](std::uint64_t c) { return frontend.receive(opt.index, c); };
  hooks.heal = [&](std::uint64_t c, const std::vector<selfheal::BranchReport>& reps) {
    return heal_reports(cfg, *tx, c, reps);
  };
  hooks.on_decision = [&](const swarm::DecisionEvent& ev) {
    ++decided;
    if (opt.decision_log) opt.decision_log(decision_line(ev));
    // not from inside the node's own callback
    if (opt.max_cycles && decided >= *opt.max_cycles) asio::post(io, leave);
  };
  hooks.on_event = log_event;
  node = std::make_unique<swarm::SwarmNode>(opt.index, cfg.n_receivers, cfg.tcp.timing, std::move(hooks), transport);

  transport.listen();
  node->start(now());

  std::function<void()> arm = [&] {
    tick.expires_after(std::chrono::milliseconds(1));
    tick.async_wait([&](boost::system::error_code ec) {
      if (ec || leaving) return;
      node->on_tick(now());
      arm();
    });
  };
  arm();

  asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](boost::system::error_code ec, int) {
    if (!ec) leave();
  });

  io.run();
  return decided;
}

}  // namespace swarmrx::scenario

#pragma once

// TCP transport for SwarmNode. One listener per node (base_port + index), one
// cached outbound connection per peer. Everything runs on a single io_context
// thread, so the node is never touched concurrently.
//
// Outbound links reconnect with exponential backoff. While a link is down its
// queue is capped and the oldest frames are dropped: the protocol already
// tolerates loss and stale heartbeats are worse than none.

#include <boost/asio.hpp>

#include <array>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "swarmrx/swarm/codec.hpp"
#include "swarmrx/swarm/node.hpp"
#include "swarmrx/swarm/protocol.hpp"

namespace swarmrx::swarm {

namespace asio = boost::asio;
using asio::ip::tcp;

struct PeerAddress {
  std::string host;
  std::uint16_t port = 0;
};

class TcpTransport : public Outbox {
 public:
  using Deliver = std::function<void(const SwarmMessage&)>;
  using Log = std::function<void(const std::string&)>;

  static constexpr std::size_t kQueueCap = 64;

  TcpTransport(asio::io_context& io, NodeIndex self, std::vector<PeerAddress> peers, Deliver deliver, Log log = {})
      : io_(io), self_(self), peers_(std::move(peers)), deliver_(std::move(deliver)), log_(std::move(log)),
        acceptor_(io) {
    if (self_ >= peers_.size()) throw InvalidArgument("node index outside the peer list");
    for (std::size_t i = 0; i < peers_.size(); ++i) links_.push_back(std::make_shared<Link>(io_, static_cast<NodeIndex>(i)));
  }

  ~TcpTransport() override { close(); }

  // Binds the listener. Throws IoError when the port is taken.
  void listen() {
    const auto& me = peers_[self_];
    boost::system::error_code ec;
    const auto addr = asio::ip::make_address(me.host == "localhost" ? "127.0.0.1" : me.host, ec);
    const tcp::endpoint ep(ec ? asio::ip::address_v4::any() : addr, me.port);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(tcp::acceptor::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw IoError("cannot listen on " + me.host + ":" + std::to_string(me.port) + ": " + ec.message());
    accept();
  }

  void send(NodeIndex to, const SwarmMessage& m) override {
    if (to >= links_.size() || to == self_) return;
    auto& link = *links_[to];
    link.queue.push_back(std::make_shared<std::vector<std::uint8_t>>(encode_message(m)));
    if (!link.connected)
      while (link.queue.size() > kQueueCap) link.queue.pop_front();
    pump(links_[to]);
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    boost::system::error_code ec;
    acceptor_.close(ec);
    for (auto& l : links_) {
      l->retry.cancel();
      l->socket.close(ec);
    }
    for (auto& s : sessions_)
      if (auto p = s.lock()) p->socket.close(ec);
  }

  // Frames still waiting on any outbound link.
  std::size_t backlog() const {
    std::size_t n = 0;
    for (const auto& l : links_) n += l->queue.size() + (l->writing ? 1 : 0);
    return n;
  }

 private:
  struct Link {
    Link(asio::io_context& io, NodeIndex peer) : socket(io), retry(io), peer(peer) {}
    tcp::socket socket;
    asio::steady_timer retry;
    NodeIndex peer;
    std::deque<std::shared_ptr<std::vector<std::uint8_t>>> queue;
    Backoff backoff{};
    bool connected = false;
    bool connecting = false;
    bool waiting = false;  // backoff timer armed
    bool writing = false;
  };

  struct Session {
    explicit Session(tcp::socket s) : socket(std::move(s)) {}
    tcp::socket socket;
    std::array<std::uint8_t, 4> prefix{};
    std::vector<std::uint8_t> frame;
  };

  void note(const std::string& s) {
    if (log_) log_(s);
  }

  void accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket s) {
      if (closed_) return;
      if (!ec) {
        s.set_option(tcp::no_delay(true), ec);
        auto session = std::make_shared<Session>(std::move(s));
        sessions_.push_back(session);
        std::erase_if(sessions_, [](const auto& w) { return w.expired(); });
        read_prefix(session);
      }
      accept();
    });
  }

  void read_prefix(const std::shared_ptr<Session>& s) {
    asio::async_read(s->socket, asio::buffer(s->prefix), [this, s](boost::system::error_code ec, std::size_t) {
      if (ec || closed_) return;
      const std::size_t size = frame_size_from_prefix(std::span<const std::uint8_t, 4>(s->prefix));
      if (size < kHeaderSize || size > kDefaultMaxMessage) {
        note("dropping connection: frame of " + std::to_string(size) + " bytes");
        boost::system::error_code ignored;
        s->socket.close(ignored);
        return;
      }
      s->frame.assign(size, 0);
      std::copy(s->prefix.begin(), s->prefix.end(), s->frame.begin());
      read_body(s);
    });
  }

  void read_body(const std::shared_ptr<Session>& s) {
    asio::async_read(s->socket, asio::buffer(s->frame.data() + 4, s->frame.size() - 4),
                     [this, s](boost::system::error_code ec, std::size_t) {
                       if (ec || closed_) return;
                       try {
                         deliver_(decode_message(s->frame));
                       } catch (const DecodeError& e) {
                         // framing can no longer be trusted
                         note(std::string("dropping connection: ") + e.what());
                         boost::system::error_code ignored;
                         s->socket.close(ignored);
                         return;
                       }
                       read_prefix(s);
                     });
  }

  void pump(const std::shared_ptr<Link>& l) {
    if (closed_ || l->queue.empty()) return;
    if (!l->connected) {
      connect(l);
      return;
    }
    if (l->writing) return;
    l->writing = true;
    auto frame = l->queue.front();
    l->queue.pop_front();
    asio::async_write(l->socket, asio::buffer(*frame), [this, l, frame](boost::system::error_code ec, std::size_t) {
      l->writing = false;
      if (closed_) return;
      if (ec) {
        drop(l, "write to node " + std::to_string(l->peer) + " failed: " + ec.message());
        return;
      }
      pump(l);
    });
  }

  void connect(const std::shared_ptr<Link>& l) {
    if (l->connecting || l->waiting) return;
    l->connecting = true;
    const auto& pa = peers_[l->peer];
    boost::system::error_code ec;
    const auto addr = asio::ip::make_address(pa.host == "localhost" ? "127.0.0.1" : pa.host, ec);
    if (ec) {
      l->connecting = false;
      schedule_retry(l, "bad address '" + pa.host + "' for node " + std::to_string(l->peer));
      return;
    }
    l->socket = tcp::socket(io_);
    l->socket.async_connect(tcp::endpoint(addr, pa.port), [this, l](boost::system::error_code ec2) {
      l->connecting = false;
      if (closed_) return;
      if (ec2) {
        schedule_retry(l, "connect to node " + std::to_string(l->peer) + " failed: " + ec2.message());
        return;
      }
      boost::system::error_code ignored;
      l->socket.set_option(tcp::no_delay(true), ignored);
      l->connected = true;
      if (l->backoff.failures() > 0) note("connected to node " + std::to_string(l->peer));
      l->backoff.reset();
      pump(l);
    });
  }

  void drop(const std::shared_ptr<Link>& l, const std::string& why) {
    boost::system::error_code ignored;
    l->socket.close(ignored);
    l->connected = false;
    schedule_retry(l, why);
  }

  void schedule_retry(const std::shared_ptr<Link>& l, const std::string& why) {
    const auto delay = l->backoff.next_delay();
    if (l->backoff.failures() == 1) note(why + "; retrying");
    l->waiting = true;
    l->retry.expires_after(delay);
    l->retry.async_wait([this, l](boost::system::error_code ec) {
      l->waiting = false;
      if (ec || closed_) return;
      pump(l);
    });
  }

  asio::io_context& io_;
  NodeIndex self_;
  std::vector<PeerAddress> peers_;
  Deliver deliver_;
  Log log_;
  tcp::acceptor acceptor_;
  std::vector<std::shared_ptr<Link>> links_;
  std::vector<std::weak_ptr<Session>> sessions_;
  bool closed_ = false;
};

}  // namespace swarmrx::swarm

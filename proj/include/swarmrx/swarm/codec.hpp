#pragma once

// Wire format for device-to-device messages.
//
// Frame layout (integers big-endian):
//   u32 length      bytes following this field (12 + payload size)
//   u8  version     always 1
//   u8  msg_type    HELLO=0 REPORT=1 DECISION=2 HEARTBEAT=3 GOODBYE=4
//   u16 sender      node index
//   u64 cycle
//   ... payload
// Inside payloads, floating-point values and complex (real, imag) pairs are
// IEEE-754 binary64 little-endian; counts and ids stay big-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmrx/error.hpp"
#include "swarmrx/selfheal.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::swarm {

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kDefaultMaxMessage = 1u << 20;

enum class MsgType : std::uint8_t { Hello = 0, Report = 1, Decision = 2, Heartbeat = 3, Goodbye = 4 };

inline const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::Hello: return "HELLO";
    case MsgType::Report: return "REPORT";
    case MsgType::Decision: return "DECISION";
    case MsgType::Heartbeat: return "HEARTBEAT";
    case MsgType::Goodbye: return "GOODBYE";
  }
  return "?";
}

struct SwarmMessage {
  std::uint8_t version = kWireVersion;
  MsgType type = MsgType::Heartbeat;
  NodeIndex sender = 0;
  std::uint64_t cycle = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const SwarmMessage&, const SwarmMessage&) = default;
};

class DecodeError : public Error {
 public:
  enum class Kind { Truncated, Version, UnknownType, Length, Oversize, Payload };

  DecodeError(Kind kind, std::string field, const std::string& detail)
      : Error("decode error in '" + field + "': " + detail), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

namespace detail {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { be(v, 2); }
  void u32(std::uint32_t v) { be(v, 4); }
  void u64(std::uint64_t v) { be(v, 8); }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void c128(cf64 z) {
    f64(z.real());
    f64(z.imag());
  }
  void bits(const BitStream& b) {
    u32(static_cast<std::uint32_t>(b.size()));
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      acc = static_cast<std::uint8_t>(acc | ((b[i] & 1u) << (7 - i % 8)));
      if (i % 8 == 7) {
        buf_.push_back(acc);
        acc = 0;
      }
    }
    if (b.size() % 8 != 0) buf_.push_back(acc);
  }
  void cvec(const CVec& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& z : v) c128(z);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void be(std::uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8(const char* field) { return static_cast<std::uint8_t>(be(1, field)); }
  std::uint16_t u16(const char* field) { return static_cast<std::uint16_t>(be(2, field)); }
  std::uint32_t u32(const char* field) { return static_cast<std::uint32_t>(be(4, field)); }
  std::uint64_t u64(const char* field) { return be(8, field); }
  double f64(const char* field) {
    need(8, field);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(data_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  cf64 c128(const char* field) {
    const double re = f64(field);
    const double im = f64(field);
    return {re, im};
  }
  BitStream bits(const char* field) {
    const std::uint32_t n = u32(field);
    const std::size_t bytes = (static_cast<std::size_t>(n) + 7) / 8;
    need(bytes, field);
    BitStream out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (data_[pos_ + i / 8] >> (7 - i % 8)) & 1u;
    pos_ += bytes;
    return out;
  }
  CVec cvec(const char* field) {
    const std::uint32_t n = u32(field);
    need(static_cast<std::size_t>(n) * 16, field);
    CVec out(n);
    for (auto& z : out) z = c128(field);
    return out;
  }
  void finish(const char* what) const {
    if (pos_ != data_.size())
      throw DecodeError(DecodeError::Kind::Length, what,
                        std::to_string(data_.size() - pos_) + " trailing bytes");
  }

 private:
  void need(std::size_t n, const char* field) const {
    if (data_.size() - pos_ < n)
      throw DecodeError(DecodeError::Kind::Truncated, field,
                        "need " + std::to_string(n) + " bytes, have " + std::to_string(data_.size() - pos_));
  }
  std::uint64_t be(int n, const char* field) {
    need(static_cast<std::size_t>(n), field);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_message(const SwarmMessage& m, std::size_t max_message = kDefaultMaxMessage) {
  if (m.payload.size() + kHeaderSize > max_message)
    throw InvalidArgument("message payload of " + std::to_string(m.payload.size()) + " bytes exceeds the " +
                          std::to_string(max_message) + "-byte limit");
  detail::Writer w;
  w.u32(static_cast<std::uint32_t>(kHeaderSize - 4 + m.payload.size()));
  w.u8(m.version);
  w.u8(static_cast<std::uint8_t>(m.type));
  w.u16(m.sender);
  w.u64(m.cycle);
  auto out = w.take();
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

// Reads the big-endian length prefix; returns the full frame size (prefix included).
inline std::size_t frame_size_from_prefix(std::span<const std::uint8_t, 4> prefix) {
  const std::uint32_t len = (static_cast<std::uint32_t>(prefix[0]) << 24) | (static_cast<std::uint32_t>(prefix[1]) << 16) |
                            (static_cast<std::uint32_t>(prefix[2]) << 8) | static_cast<std::uint32_t>(prefix[3]);
  return static_cast<std::size_t>(len) + 4;
}

inline SwarmMessage decode_message(std::span<const std::uint8_t> bytes, std::size_t max_message = kDefaultMaxMessage) {
  detail::Reader r(bytes);
  const std::uint32_t len = r.u32("length");
  if (len < kHeaderSize - 4)
    throw DecodeError(DecodeError::Kind::Length, "length", "declared length " + std::to_string(len) + " < 12");
  if (static_cast<std::size_t>(len) + 4 > max_message)
    throw DecodeError(DecodeError::Kind::Oversize, "length", "declared length " + std::to_string(len) + " too large");
  if (static_cast<std::size_t>(len) + 4 != bytes.size())
    throw DecodeError(bytes.size() < static_cast<std::size_t>(len) + 4 ? DecodeError::Kind::Truncated
                                                                       : DecodeError::Kind::Length,
                      "length",
                      "declared " + std::to_string(len) + " bytes, frame carries " + std::to_string(bytes.size() - 4));
  SwarmMessage m;
  m.version = r.u8("version");
  if (m.version != kWireVersion)
    throw DecodeError(DecodeError::Kind::Version, "version", "unsupported version " + std::to_string(m.version));
  const std::uint8_t type = r.u8("msg_type");
  if (type > static_cast<std::uint8_t>(MsgType::Goodbye))
    throw DecodeError(DecodeError::Kind::UnknownType, "msg_type", "unknown message type " + std::to_string(type));
  m.type = static_cast<MsgType>(type);
  m.sender = r.u16("sender");
  m.cycle = r.u64("cycle");
  m.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize), bytes.end());
  return m;
}

// REPORT body.
inline std::vector<std::uint8_t> encode_report(const selfheal::BranchReport& rep) {
  detail::Writer w;
  w.u16(rep.branch_id);
  w.u64(rep.cycle);
  std::uint8_t flags = 0;
  if (rep.sync_ok) flags |= 1u;
  if (rep.estimate.h_j) flags |= 2u;
  w.u8(flags);
  w.c128(rep.estimate.h);
  if (rep.estimate.h_j) w.c128(*rep.estimate.h_j);
  w.f64(rep.estimate.sigma2);
  w.f64(rep.ber);
  w.bits(rep.payload_bits);
  w.cvec(rep.symbols);
  w.cvec(rep.preamble_residual);
  return w.take();
}

inline selfheal::BranchReport decode_report(std::span<const std::uint8_t> body) {
  detail::Reader r(body);
  selfheal::BranchReport rep;
  rep.branch_id = r.u16("report.branch_id");
  rep.cycle = r.u64("report.cycle");
  const std::uint8_t flags = r.u8("report.flags");
  if (flags & ~3u) throw DecodeError(DecodeError::Kind::Payload, "report.flags", "unknown flag bits");
  rep.sync_ok = (flags & 1u) != 0;
  rep.estimate.h = r.c128("report.h");
  if (flags & 2u) rep.estimate.h_j = r.c128("report.h_j");
  rep.estimate.sigma2 = r.f64("report.sigma2");
  rep.ber = r.f64("report.ber");
  if (!(rep.ber >= 0.0 && rep.ber <= 1.0))
    throw DecodeError(DecodeError::Kind::Payload, "report.ber", "BER outside [0, 1]");
  rep.payload_bits = r.bits("report.payload_bits");
  rep.symbols = r.cvec("report.symbols");
  rep.preamble_residual = r.cvec("report.preamble_residual");
  r.finish("report");
  return rep;
}

// DECISION body: the leader's combiner decision plus the membership for the next cycle.
struct DecisionPayload {
  selfheal::CombinerDecision decision;
  std::vector<NodeIndex> alive_next;

  friend bool operator==(const DecisionPayload&, const DecisionPayload&) = default;
};

inline std::vector<std::uint8_t> encode_decision(const DecisionPayload& p) {
  const auto& d = p.decision;
  if (d.branch_bers.size() != d.participants.size())
    throw InvalidArgument("decision BER list does not match participants");
  detail::Writer w;
  w.u64(d.cycle);
  w.u8(static_cast<std::uint8_t>(d.algorithm));
  w.u8(static_cast<std::uint8_t>(d.weights.algorithm));
  w.u32(d.n_s);
  w.u32(d.frame_bits);
  w.f64(d.combined_ber);
  w.f64(d.data_rate);
  w.u16(static_cast<std::uint16_t>(d.weights.u.size()));
  for (const auto& z : d.weights.u) w.c128(z);
  w.u16(static_cast<std::uint16_t>(d.participants.size()));
  for (std::size_t i = 0; i < d.participants.size(); ++i) {
    w.u16(d.participants[i]);
    w.f64(d.branch_bers[i]);
  }
  w.u16(static_cast<std::uint16_t>(p.alive_next.size()));
  for (auto a : p.alive_next) w.u16(a);
  w.bits(d.combined_bits);
  return w.take();
}

inline DecisionPayload decode_decision(std::span<const std::uint8_t> body) {
  detail::Reader r(body);
  DecisionPayload p;
  auto& d = p.decision;
  d.cycle = r.u64("decision.cycle");
  const auto alg = r.u8("decision.algorithm");
  const auto walg = r.u8("decision.weights.algorithm");
  if (alg > 2 || walg > 2)
    throw DecodeError(DecodeError::Kind::Payload, "decision.algorithm", "unknown algorithm tag");
  d.algorithm = static_cast<selfheal::Algorithm>(alg);
  d.weights.algorithm = static_cast<selfheal::Algorithm>(walg);
  d.n_s = r.u32("decision.n_s");
  d.frame_bits = r.u32("decision.frame_bits");
  d.combined_ber = r.f64("decision.combined_ber");
  d.data_rate = r.f64("decision.data_rate");
  const auto nw = r.u16("decision.weights");
  d.weights.u.resize(nw);
  for (auto& z : d.weights.u) z = r.c128("decision.weights");
  const auto np = r.u16("decision.participants");
  d.participants.resize(np);
  d.branch_bers.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    d.participants[i] = r.u16("decision.participants");
    d.branch_bers[i] = r.f64("decision.branch_bers");
  }
  const auto na = r.u16("decision.alive_next");
  p.alive_next.resize(na);
  for (auto& a : p.alive_next) a = r.u16("decision.alive_next");
  d.combined_bits = r.bits("decision.combined_bits");
  r.finish("decision");
  return p;
}

inline SwarmMessage make_message(MsgType type, NodeIndex sender, std::uint64_t cycle,
                                 std::vector<std::uint8_t> payload = {}) {
  SwarmMessage m;
  m.type = type;
  m.sender = sender;
  m.cycle = cycle;
  m.payload = std::move(payload);
  return m;
}

}  // namespace swarmrx::swarm

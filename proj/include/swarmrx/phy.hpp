#pragma once

// Baseband modem: Zadoff-Chu preamble, Gray-mapped QPSK, framing,
// preamble-based synchronization and least-squares channel estimation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>

#include "swarmrx/error.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::phy {

struct PreambleConfig {
  std::uint32_t root = 5;
  std::uint32_t length = 63;
};

struct FrameConfig {
  PreambleConfig preamble{};
  std::size_t max_payload_bits = 1u << 20;
  double sample_rate = 1e6;
};

struct SyncConfig {
  // Peak must reach this multiple of the mean off-peak correlation magnitude.
  double detection_ratio = 4.0;
  // Off: cfo_hat is still reported but not removed. Long payloads amplify a noisy
  // slope estimate, so links known to be CFO-free are better left uncorrected.
  bool correct_cfo = true;
};

struct IqFrame {
  CVec preamble;
  CVec payload_symbols;
  double sample_rate = 0.0;
  std::uint64_t frame_id = 0;
  // Real payload length; the modulated payload may carry one padding bit.
  std::size_t payload_bits = 0;

  std::size_t size() const { return preamble.size() + payload_symbols.size(); }

  CVec samples() const {
    CVec out;
    out.reserve(size());
    out.insert(out.end(), preamble.begin(), preamble.end());
    out.insert(out.end(), payload_symbols.begin(), payload_symbols.end());
    return out;
  }
};

struct SyncResult {
  std::size_t timing_offset = 0;
  double cfo_hat = 0.0;    // rad/sample
  double phase_hat = 0.0;  // rad
  double peak_ratio = 0.0;
  CVec aligned_preamble;
  CVec aligned_symbols;
};

/// z[n] = exp(-j*pi*root*n*(n+1)/length) for odd lengths, exp(-j*pi*root*n^2/length)
/// for even lengths. Requires gcd(root, length) == 1 and root < length (except the
/// length-1 sequence, which is the single sample 1).
inline CVec generate_zadoff_chu(std::uint32_t root, std::uint32_t length) {
  if (length == 0) throw InvalidArgument("zadoff-chu length must be positive");
  if (root == 0) throw InvalidArgument("zadoff-chu root must be positive");
  if (length > 1 && root >= length)
    throw InvalidArgument("zadoff-chu root " + std::to_string(root) + " must be < length " +
                          std::to_string(length));
  if (std::gcd(root, length) != 1)
    throw InvalidArgument("zadoff-chu root " + std::to_string(root) + " and length " +
                          std::to_string(length) + " are not coprime");
  CVec z(length);
  const bool odd = (length % 2) == 1;
  for (std::uint64_t n = 0; n < length; ++n) {
    // Reduce the quadratic term modulo 2*length before scaling to keep the phase exact.
    const std::uint64_t q = odd ? n * (n + 1) : n * n;
    const std::uint64_t m = (static_cast<std::uint64_t>(root) * q) % (2ull * length);
    const double phase = -kPi * static_cast<double>(m) / static_cast<double>(length);
    z[n] = std::polar(1.0, phase);
  }
  return z;
}

namespace detail {
inline const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

/// Gray mapping: 00 -> (+1+1j), 01 -> (-1+1j), 11 -> (-1-1j), 10 -> (+1-1j), all / sqrt(2).
/// The first bit of a pair selects the imaginary sign, the second the real sign.
inline CVec modulate_qpsk(std::span<const std::uint8_t> bits) {
  if (bits.size() % 2 != 0) throw InvalidArgument("QPSK needs an even number of bits");
  CVec out(bits.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::uint8_t b0 = bits[2 * k];
    const std::uint8_t b1 = bits[2 * k + 1];
    if (b0 > 1 || b1 > 1) throw InvalidArgument("bit values must be 0 or 1");
    const double re = b1 ? -detail::kInvSqrt2 : detail::kInvSqrt2;
    const double im = b0 ? -detail::kInvSqrt2 : detail::kInvSqrt2;
    out[k] = {re, im};
  }
  return out;
}

// Hard sign decisions; exact inverse of modulate_qpsk on constellation points.
inline BitStream demodulate_qpsk(std::span<const cf64> symbols) {
  BitStream bits(symbols.size() * 2);
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    bits[2 * k] = symbols[k].imag() < 0.0 ? 1 : 0;
    bits[2 * k + 1] = symbols[k].real() < 0.0 ? 1 : 0;
  }
  return bits;
}

// Builds frames with strictly increasing ids.
class FrameBuilder {
 public:
  explicit FrameBuilder(FrameConfig cfg = {}, std::uint64_t first_id = 0)
      : cfg_(cfg), preamble_(generate_zadoff_chu(cfg.preamble.root, cfg.preamble.length)),
        next_id_(first_id) {}

  IqFrame build(std::span<const std::uint8_t> payload) {
    if (payload.empty()) throw InvalidArgument("frame payload is empty");
    if (payload.size() > cfg_.max_payload_bits)
      throw InvalidArgument("payload of " + std::to_string(payload.size()) +
                            " bits exceeds frame limit " + std::to_string(cfg_.max_payload_bits));
    BitStream padded(payload.begin(), payload.end());
    if (padded.size() % 2 != 0) padded.push_back(0);
    IqFrame frame;
    frame.preamble = preamble_;
    frame.payload_symbols = modulate_qpsk(padded);
    frame.sample_rate = cfg_.sample_rate;
    frame.frame_id = next_id_++;
    frame.payload_bits = payload.size();
    return frame;
  }

  const CVec& preamble() const { return preamble_; }
  const FrameConfig& config() const { return cfg_; }

 private:
  FrameConfig cfg_;
  CVec preamble_;
  std::uint64_t next_id_;
};

// Symbol count needed to carry `bits` payload bits after padding.
inline std::size_t payload_symbol_count(std::size_t bits) { return (bits + 1) / 2; }

/// ĥ = <known, received> / ||known||^2.
inline cf64 estimate_channel(std::span<const cf64> received_preamble,
                             std::span<const cf64> known_preamble) {
  if (received_preamble.size() != known_preamble.size())
    throw InvalidArgument("preamble length mismatch in channel estimate");
  double energy = 0.0;
  cf64 acc{0.0, 0.0};
  for (std::size_t n = 0; n < known_preamble.size(); ++n) {
    acc += std::conj(known_preamble[n]) * received_preamble[n];
    energy += std::norm(known_preamble[n]);
  }
  if (!(energy > 0.0)) throw InvalidArgument("known preamble has zero energy");
  return acc / energy;
}

/// Locates the preamble by cross-correlation, then removes CFO (split-preamble
/// phase slope) and the residual phase. `payload_symbols` is the number of
/// payload samples expected after the preamble.
inline SyncResult synchronize(std::span<const cf64> received, std::span<const cf64> known_preamble,
                              std::size_t payload_symbols, const SyncConfig& cfg = {}) {
  const std::size_t L = known_preamble.size();
  const std::size_t frame_len = L + payload_symbols;
  if (L < 2) throw InvalidArgument("preamble too short to synchronize");
  if (received.size() < frame_len)
    throw InvalidArgument("received " + std::to_string(received.size()) +
                          " samples, shorter than frame length " + std::to_string(frame_len));

  const std::size_t candidates = received.size() - frame_len + 1;
  std::vector<double> corr(candidates);
  for (std::size_t d = 0; d < candidates; ++d) {
    cf64 acc{0.0, 0.0};
    for (std::size_t n = 0; n < L; ++n) acc += std::conj(known_preamble[n]) * received[d + n];
    corr[d] = std::abs(acc);
  }
  const auto peak_it = std::max_element(corr.begin(), corr.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - corr.begin());

  double ratio = std::numeric_limits<double>::infinity();
  if (candidates > 1) {
    const double off_sum = std::accumulate(corr.begin(), corr.end(), 0.0) - *peak_it;
    const double off_mean = off_sum / static_cast<double>(candidates - 1);
    if (off_mean > 0.0) ratio = *peak_it / off_mean;
  }
  if (!(*peak_it > 0.0) || ratio < cfg.detection_ratio)
    throw FrameNotFound(std::isfinite(ratio) ? ratio : 0.0, cfg.detection_ratio);

  // Strip the preamble modulation; what remains is g * exp(j*w*n) + noise.
  CVec z(L);
  for (std::size_t n = 0; n < L; ++n) z[n] = received[peak + n] * std::conj(known_preamble[n]);
  const std::size_t half = L / 2;
  cf64 slope{0.0, 0.0};
  for (std::size_t n = 0; n < half; ++n) slope += std::conj(z[n]) * z[n + half];
  const double cfo = (std::norm(slope) > 0.0) ? std::arg(slope) / static_cast<double>(half) : 0.0;

  SyncResult out;
  out.timing_offset = peak;
  out.cfo_hat = cfo;
  out.peak_ratio = ratio;

  const double applied = cfg.correct_cfo ? cfo : 0.0;
  CVec derotated(frame_len);
  for (std::size_t n = 0; n < frame_len; ++n)
    derotated[n] = received[peak + n] * std::polar(1.0, -applied * static_cast<double>(n));
  cf64 gain{0.0, 0.0};
  for (std::size_t n = 0; n < L; ++n) gain += std::conj(known_preamble[n]) * derotated[n];
  out.phase_hat = std::arg(gain);
  const cf64 unrotate = std::polar(1.0, -out.phase_hat);
  out.aligned_preamble.assign(derotated.begin(), derotated.begin() + static_cast<std::ptrdiff_t>(L));
  out.aligned_symbols.assign(derotated.begin() + static_cast<std::ptrdiff_t>(L), derotated.end());
  for (auto& s : out.aligned_preamble) s *= unrotate;
  for (auto& s : out.aligned_symbols) s *= unrotate;
  return out;
}

}  // namespace swarmrx::phy

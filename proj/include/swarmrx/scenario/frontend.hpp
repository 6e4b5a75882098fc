#pragma once

// One cycle on the air: the transmitter's frame, the common jammer waveform and
// each receiver's capture, sync, estimate and hard decisions.

#include <memory>
#include <optional>

#include "swarmrx/channel.hpp"
#include "swarmrx/phy.hpp"
#include "swarmrx/scenario/config.hpp"
#include "swarmrx/scenario/image.hpp"
#include "swarmrx/selfheal.hpp"

namespace swarmrx::scenario {

// What every node knows about the transmitted payload: it is derived from the
// seed and cycle (random source) or from the shared image (image source).
class Transmitter {
 public:
  explicit Transmitter(const ScenarioConfig& cfg) : cfg_(cfg) {
    if (cfg.payload_source == PayloadSource::Image) {
      image_ = cfg.image == "synthetic" ? synthetic_image(cfg.image_width, cfg.image_height) : read_pgm(cfg.image);
      chunks_ = image_to_bitstream(*image_, cfg.payload_bits);
    }
  }

  // Chunk index carried in `cycle`; each jammer segment restarts the image.
  std::uint16_t chunk_for(std::uint64_t cycle) const {
    const auto& seg = cfg_.jammer.segments.at(cfg_.jammer.segment_at(cycle));
    return static_cast<std::uint16_t>((cycle - seg.start_cycle) % chunks_.size());
  }

  BitStream payload(std::uint64_t cycle) const {
    if (image_) return chunks_.at(chunk_for(cycle)).bits;
    Rng rng({cfg_.seed, Stream::Payload, cycle, 0});
    return random_bits(rng, cfg_.payload_bits);
  }

  const std::optional<ImagePayload>& image() const { return image_; }
  std::size_t chunk_count() const { return chunks_.size(); }

 private:
  ScenarioConfig cfg_;
  std::optional<ImagePayload> image_;
  std::vector<ImageChunk> chunks_;
};

class Frontend {
 public:
  Frontend(const ScenarioConfig& cfg, std::shared_ptr<const Transmitter> tx)
      : cfg_(cfg), tx_(std::move(tx)), builder_(phy::FrameConfig{cfg.preamble, 1u << 20, 1.0 / cfg.frame_duration_s}) {}

  /// Branch `branch`'s report for `cycle`. Lost frames come back with sync_ok = false
  /// and BER 1.
  selfheal::BranchReport receive(std::size_t branch, std::uint64_t cycle) const {
    const BitStream reference = tx_->payload(cycle);
    const auto frame = builder_.build(reference);
    const CVec x = frame.samples();
    const std::size_t G = cfg_.max_delay;
    const std::size_t L = frame.preamble.size();

    const auto& seg = cfg_.jammer.segments.at(cfg_.jammer.segment_at(cycle));
    auto ch = channel::sample_branch_channel(cfg_.channel, cfg_.noise_sigma2, cfg_.seed, cycle, branch);
    const double g = branch < seg.gains.size() ? seg.gains[branch] : 0.0;
    {
      // fixed jammer coupling phase per (segment start, branch)
      Rng tap({cfg_.seed, Stream::JammerTap, seg.start_cycle, branch});
      ch.h_j = std::polar(g, tap.uniform(0.0, 2.0 * kPi));
    }

    Rng timing({cfg_.seed, Stream::Delay, cycle, branch});
    const std::size_t d = G > 0 ? static_cast<std::size_t>(timing.uniform_int(0, G)) : 0;
    // One jammer waveform per cycle, shared by all branches and aligned to the frame start.
    const CVec J = channel::jammer_waveform({cfg_.seed, Stream::Jammer, cycle, 0}, x.size() + 2 * G);
    const std::size_t cap = x.size() + G;
    CVec xs(cap, cf64{}), xj(cap);
    for (std::size_t k = 0; k < x.size(); ++k) xs[d + k] = x[k];
    for (std::size_t k = 0; k < cap; ++k) xj[k] = J[G + k - d];

    CVec r = channel::apply_channel(xs, xj, ch, cfg_.tx_power, seg.power, {cfg_.seed, Stream::Noise, cycle, branch});
    if (cfg_.cfo_max > 0.0) {
      Rng cfo({cfg_.seed, Stream::Cfo, cycle, branch});
      const double w = cfo.uniform(-cfg_.cfo_max, cfg_.cfo_max);
      for (std::size_t k = 0; k < r.size(); ++k) r[k] *= std::polar(1.0, w * static_cast<double>(k));
    }

    selfheal::BranchReport rep;
    rep.branch_id = static_cast<NodeIndex>(branch);
    rep.cycle = cycle;
    phy::SyncResult sync;
    try {
      sync = phy::synchronize(r, frame.preamble, frame.payload_symbols.size(), {cfg_.detection_ratio, cfg_.cfo_max > 0.0});
    } catch (const FrameNotFound&) {
      rep.sync_ok = false;
      rep.ber = 1.0;
      return rep;
    }
    rep.sync_ok = true;
    const cf64 h = phy::estimate_channel(sync.aligned_preamble, frame.preamble);
    rep.estimate.h = h;
    rep.preamble_residual.resize(L);
    double res = 0.0;
    for (std::size_t n = 0; n < L; ++n) {
      rep.preamble_residual[n] = sync.aligned_preamble[n] - h * frame.preamble[n];
      res += std::norm(rep.preamble_residual[n]);
    }
    rep.estimate.sigma2 = res / static_cast<double>(L);
    if (cfg_.jammer_csi == selfheal::JammerCsi::Genie) {
      // Known jammer waveform: least-squares tap on the residual, noise from what is left.
      const CVec jp(J.begin() + static_cast<std::ptrdiff_t>(G), J.begin() + static_cast<std::ptrdiff_t>(G + L));
      const cf64 hj = phy::estimate_channel(rep.preamble_residual, jp);
      double rest = 0.0;
      for (std::size_t n = 0; n < L; ++n) rest += std::norm(rep.preamble_residual[n] - hj * jp[n]);
      rep.estimate.h_j = hj;
      rep.estimate.sigma2 = rest / static_cast<double>(L);
    }
    rep.symbols = std::move(sync.aligned_symbols);
    if (std::abs(h) > 0.0) {
      CVec eq = rep.symbols;
      for (auto& z : eq) z /= h;
      rep.payload_bits = phy::demodulate_qpsk(eq);
      rep.payload_bits.resize(reference.size());
      rep.ber = selfheal::compute_ber(rep.payload_bits, reference);
    } else {
      rep.ber = 1.0;
    }
    return rep;
  }

  const Transmitter& transmitter() const { return *tx_; }

 private:
  ScenarioConfig cfg_;
  std::shared_ptr<const Transmitter> tx_;
  mutable phy::FrameBuilder builder_;
};

}  // namespace swarmrx::scenario

#pragma once

// Per-branch received-signal model: r = sqrt(p_g) h x + sqrt(p_j) h_j x_j + n.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swarmrx/error.hpp"
#include "swarmrx/phy.hpp"
#include "swarmrx/rng.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::channel {

struct PowerDbm {
  double value = 0.0;

  double milliwatts() const { return std::pow(10.0, value / 10.0); }
  friend bool operator==(const PowerDbm&, const PowerDbm&) = default;
};

inline double dbm_to_linear(PowerDbm p) {
  if (!std::isfinite(p.value)) throw InvalidArgument("power in dBm must be finite");
  return p.milliwatts();
}

struct BranchChannel {
  cf64 h{1.0, 0.0};
  cf64 h_j{0.0, 0.0};
  double sigma2 = 0.0;
};

// Jammer off is represented by an empty power.
using JammerPower = std::optional<PowerDbm>;

/// Applies the channel to one branch. x_j may be all zeros (or p_j empty) when the
/// jammer is off. Noise is CN(0, sigma2) per sample, drawn from `noise_key`.
inline CVec apply_channel(std::span<const cf64> x, std::span<const cf64> x_j, const BranchChannel& ch,
                          PowerDbm p_g, JammerPower p_j, const StreamKey& noise_key) {
  if (x.size() != x_j.size())
    throw InvalidArgument("signal and jammer lengths differ (" + std::to_string(x.size()) + " vs " +
                          std::to_string(x_j.size()) + ")");
  if (!(ch.sigma2 >= 0.0)) throw InvalidArgument("noise power must be non-negative");
  if (!std::isfinite(ch.h.real()) || !std::isfinite(ch.h.imag()) || !std::isfinite(ch.h_j.real()) ||
      !std::isfinite(ch.h_j.imag()))
    throw InvalidArgument("channel taps must be finite");
  const cf64 sig_gain = std::sqrt(dbm_to_linear(p_g)) * ch.h;
  const cf64 jam_gain = p_j ? std::sqrt(dbm_to_linear(*p_j)) * ch.h_j : cf64{0.0, 0.0};
  Rng rng(noise_key);
  CVec r(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    r[k] = sig_gain * x[k] + jam_gain * x_j[k];
    if (ch.sigma2 > 0.0) r[k] += rng.complex_gaussian(ch.sigma2);
  }
  return r;
}

// Channel tap models.
struct FixedTaps {
  std::vector<cf64> taps;
};

// h ~ CN(0, mean_power) independently per (seed, cycle, branch).
struct RayleighFading {
  double mean_power = 1.0;
};

// Deterministic magnitude trajectory around fixed base taps:
// |h_i(c)| = |base_i| * 10^(depth_db/20 * sin(2*pi*c/period + 2*pi*i/N)).
struct GainTrajectory {
  std::vector<cf64> base;
  double period_cycles = 200.0;
  double depth_db = 6.0;
};

using ChannelModel = std::variant<FixedTaps, RayleighFading, GainTrajectory>;

inline BranchChannel sample_branch_channel(const ChannelModel& model, double sigma2, std::uint64_t seed,
                                           std::uint64_t cycle, std::size_t branch) {
  BranchChannel ch;
  ch.sigma2 = sigma2;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FixedTaps>) {
          if (branch >= m.taps.size()) throw InvalidArgument("no fixed tap for branch " + std::to_string(branch));
          ch.h = m.taps[branch];
        } else if constexpr (std::is_same_v<M, RayleighFading>) {
          Rng rng({seed, Stream::Fading, cycle, branch});
          ch.h = rng.complex_gaussian(m.mean_power);
        } else {
          if (branch >= m.base.size()) throw InvalidArgument("no base tap for branch " + std::to_string(branch));
          const double n = static_cast<double>(m.base.size());
          const double arg = 2.0 * kPi * static_cast<double>(cycle) / m.period_cycles +
                             2.0 * kPi * static_cast<double>(branch) / n;
          ch.h = m.base[branch] * std::pow(10.0, m.depth_db / 20.0 * std::sin(arg));
        }
      },
      model);
  return ch;
}

struct JammerSegment {
  std::uint64_t start_cycle = 0;
  JammerPower power;          // empty = off
  std::vector<double> gains;  // per-branch jammer tap magnitude
};

struct JammerSchedule {
  std::vector<JammerSegment> segments;

  // Index of the segment active at `cycle`.
  std::size_t segment_at(std::uint64_t cycle) const {
    if (segments.empty()) throw InvalidArgument("jammer schedule has no segments");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < segments.size(); ++i)
      if (segments[i].start_cycle <= cycle) idx = i;
    return idx;
  }

  std::vector<std::string> validate(std::size_t n_branches) const {
    std::vector<std::string> problems;
    if (segments.empty()) problems.emplace_back("jammer schedule must have at least one segment");
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      const std::string field = "jammer[" + std::to_string(i) + "]";
      if (i == 0 && s.start_cycle != 0) problems.push_back(field + ".start: first segment must start at cycle 0");
      if (i > 0 && s.start_cycle <= segments[i - 1].start_cycle)
        problems.push_back(field + ".start: start cycles must be strictly increasing");
      if (s.gains.size() > n_branches)
        problems.push_back(field + ".gains: references branch " + std::to_string(s.gains.size() - 1) +
                           " but there are only " + std::to_string(n_branches) + " receivers");
      for (double g : s.gains)
        if (!std::isfinite(g) || g < 0.0) problems.push_back(field + ".gains: gains must be finite and >= 0");
      if (s.power && !std::isfinite(s.power->value)) problems.push_back(field + ".power: must be finite");
    }
    return problems;
  }
};

// Uncorrelated QPSK stream used as the jammer waveform.
inline CVec jammer_waveform(const StreamKey& key, std::size_t length) {
  Rng rng(key);
  return phy::modulate_qpsk(random_bits(rng, 2 * length));
}

}  // namespace swarmrx::channel

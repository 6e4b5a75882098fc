#pragma once

// Self-healing decision logic run by the cycle leader: per-branch BER against the
// known reference, count of good branches N_S, algorithm selection and combining.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmrx/combining.hpp"
#include "swarmrx/error.hpp"
#include "swarmrx/phy.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::selfheal {

using combining::Algorithm;

struct ChannelEstimate {
  cf64 h{0.0, 0.0};
  std::optional<cf64> h_j;
  double sigma2 = 0.0;

  friend bool operator==(const ChannelEstimate&, const ChannelEstimate&) = default;
};

// One receiver's processed contribution for a cycle.
struct BranchReport {
  NodeIndex branch_id = 0;
  std::uint64_t cycle = 0;
  bool sync_ok = false;
  ChannelEstimate estimate;
  BitStream payload_bits;
  double ber = 1.0;
  CVec symbols;            // aligned payload samples, not equalized
  CVec preamble_residual;  // aligned preamble minus ĥ * known preamble

  friend bool operator==(const BranchReport&, const BranchReport&) = default;
};

// Which side of the threshold counts as a good branch.
enum class GoodRule : std::uint8_t { BerAtMost = 0, BerAbove = 1 };

struct HealConfig {
  double ber_threshold = 0.05;
  std::size_t n_total = 1;
  GoodRule rule = GoodRule::BerAtMost;
  std::size_t payload_bits = 256;
  double frame_duration_s = 1e-3;

  void validate() const {
    if (!(ber_threshold > 0.0 && ber_threshold < 0.5))
      throw InvalidArgument("ber_threshold must lie in (0, 0.5)");
    if (n_total < 1) throw InvalidArgument("n_total must be >= 1");
    if (!(frame_duration_s > 0.0)) throw InvalidArgument("frame duration must be positive");
  }
};

struct CombinerDecision {
  Algorithm algorithm = Algorithm::SC;
  combining::CombinerWeights weights;
  BitStream combined_bits;
  double combined_ber = 1.0;
  double data_rate = 0.0;
  std::uint32_t n_s = 0;
  std::uint64_t cycle = 0;
  std::uint32_t frame_bits = 0;         // payload bits carried by this cycle's frame
  std::vector<NodeIndex> participants;  // branch ids, aligned with weights
  std::vector<double> branch_bers;      // aligned with participants

  friend bool operator==(const CombinerDecision&, const CombinerDecision&) = default;
};

inline double compute_ber(std::span<const std::uint8_t> decoded, std::span<const std::uint8_t> reference) {
  if (decoded.size() != reference.size())
    throw InvalidArgument("BER length mismatch: " + std::to_string(decoded.size()) + " vs " +
                          std::to_string(reference.size()));
  if (reference.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) errors += (decoded[i] != reference[i]) ? 1 : 0;
  return static_cast<double>(errors) / static_cast<double>(reference.size());
}

inline bool is_good(double ber, const HealConfig& cfg) {
  return cfg.rule == GoodRule::BerAtMost ? ber <= cfg.ber_threshold : ber > cfg.ber_threshold;
}

inline std::uint32_t count_good_branches(std::span<const BranchReport> reports, const HealConfig& cfg) {
  std::uint32_t n = 0;
  for (const auto& r : reports) n += is_good(r.ber, cfg) ? 1u : 0u;
  return n;
}

// Total over 0 <= n_s <= n_alive. N_S <= 1 selects SC (including the all-jammed
// case, which falls back to the least-bad branch); all good selects d-MRC.
inline Algorithm select_algorithm(std::uint32_t n_s, std::size_t n_alive) {
  if (n_alive < 1) throw InvalidArgument("no alive branch to select for");
  if (n_s > n_alive) throw InvalidArgument("n_s exceeds n_alive");
  if (n_s <= 1) return Algorithm::SC;
  if (n_s == n_alive) return Algorithm::DMRC;
  return Algorithm::DLMMSE;
}

inline double data_rate(double ber, std::size_t payload_bits_per_frame, double frame_duration_s) {
  if (!(frame_duration_s > 0.0)) throw InvalidArgument("frame duration must be positive");
  return static_cast<double>(payload_bits_per_frame) * (1.0 - ber) / frame_duration_s;
}

// How the leader obtains the jammer channel for d-LMMSE.
enum class JammerCsi : std::uint8_t {
  Genie = 0,      // per-branch h_j carried in the reports
  Estimated = 1,  // principal component of the cross-branch preamble residual covariance
};

struct JammerEstimate {
  CVec h_j;
  double sigma2 = 0.0;
};

/// Fits sample covariance C of the aligned residuals (usable branches only) as
/// g g^H + sigma2 I: g = sqrt(lambda_max - sigma2) v_max, sigma2 = mean of the other
/// eigenvalues. With a single usable branch the jammer term is left at zero.
inline JammerEstimate estimate_jammer_csi(std::span<const BranchReport> reports, const std::vector<bool>& usable) {
  const std::size_t n = reports.size();
  JammerEstimate out{CVec(n, cf64{0.0, 0.0}), 0.0};
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (usable[i]) idx.push_back(i);
  if (idx.empty()) return out;
  const std::size_t L = reports[idx.front()].preamble_residual.size();
  for (auto i : idx)
    if (reports[i].preamble_residual.size() != L)
      throw InvalidArgument("residual lengths differ across branches");
  if (idx.size() == 1 || L == 0) {
    out.sigma2 = reports[idx.front()].estimate.sigma2;
    return out;
  }
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(m, m);
  for (std::size_t k = 0; k < L; ++k) {
    Eigen::VectorXcd e(m);
    for (Eigen::Index a = 0; a < m; ++a) e[a] = reports[idx[static_cast<std::size_t>(a)]].preamble_residual[k];
    cov += e * e.adjoint();
  }
  cov /= static_cast<double>(L);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
  const auto& vals = eig.eigenvalues();  // ascending
  double rest = 0.0;
  for (Eigen::Index a = 0; a + 1 < m; ++a) rest += vals[a];
  out.sigma2 = std::max(rest / static_cast<double>(m - 1), 1e-12);
  const double jam = std::max(vals[m - 1] - out.sigma2, 0.0);
  const Eigen::VectorXcd v = eig.eigenvectors().col(m - 1);
  for (Eigen::Index a = 0; a < m; ++a) out.h_j[idx[static_cast<std::size_t>(a)]] = std::sqrt(jam) * v[a];
  return out;
}

/// Builds the combining input from reports. Channel gains are the composite
/// estimates (transmit power folded in), so p_g = p_j = 1.
/// Genie callers that know the noise floor overwrite sigma2 afterwards.
inline combining::BranchSet build_branch_set(std::span<const BranchReport> reports, JammerCsi csi) {
  const std::size_t n = reports.size();
  combining::BranchSet bs;
  bs.R.resize(n);
  bs.h.assign(n, cf64{0.0, 0.0});
  bs.h_j.assign(n, cf64{0.0, 0.0});
  bs.alive_mask.assign(n, false);
  bs.p_g = 1.0;
  bs.p_j = 1.0;
  std::size_t expected = 0;
  for (const auto& r : reports) expected = std::max(expected, r.symbols.size());
  double sigma_sum = 0.0;
  std::size_t sigma_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = reports[i];
    const bool usable = r.sync_ok && !r.symbols.empty() && r.symbols.size() == expected &&
                        std::abs(r.estimate.h) > 0.0;
    bs.alive_mask[i] = usable;
    if (!usable) {
      bs.R[i].assign(expected, cf64{0.0, 0.0});
      continue;
    }
    bs.R[i] = r.symbols;
    bs.h[i] = r.estimate.h;
    if (r.estimate.h_j) bs.h_j[i] = *r.estimate.h_j;
    sigma_sum += r.estimate.sigma2;
    ++sigma_count;
  }
  if (csi == JammerCsi::Estimated) {
    const auto est = estimate_jammer_csi(reports, bs.alive_mask);
    bs.h_j = est.h_j;
    bs.sigma2 = est.sigma2;
  } else {
    bs.sigma2 = sigma_count ? sigma_sum / static_cast<double>(sigma_count) : 1.0;
  }
  if (!(bs.sigma2 > 0.0)) bs.sigma2 = 1e-12;
  return bs;
}

/// Leader-side cycle: N_S, algorithm, weights, combined payload and its metrics.
/// `reports` and `bs` are index-aligned; `reference` is the known transmitted payload.
inline CombinerDecision heal_cycle(std::span<const BranchReport> reports, const combining::BranchSet& bs,
                                   std::span<const std::uint8_t> reference, const HealConfig& cfg) {
  if (reports.empty()) throw InvalidArgument("heal_cycle needs at least one report");
  if (bs.size() != reports.size()) throw InvalidArgument("branch set does not match the reports");

  CombinerDecision d;
  d.cycle = reports.front().cycle;
  d.n_s = count_good_branches(reports, cfg);
  d.algorithm = select_algorithm(d.n_s, reports.size());
  d.frame_bits = static_cast<std::uint32_t>(reference.size());
  for (const auto& r : reports) {
    d.participants.push_back(r.branch_id);
    d.branch_bers.push_back(r.ber);
  }

  const bool any_usable = std::any_of(bs.alive_mask.begin(), bs.alive_mask.end(), [](bool b) { return b; });
  if (!any_usable) {
    // Nothing was demodulated anywhere: keep a one-hot placeholder, deliver nothing.
    d.weights = combining::CombinerWeights{CVec(reports.size(), cf64{0.0, 0.0}), Algorithm::SC};
    d.weights.u[0] = cf64{1.0, 0.0};
    d.algorithm = Algorithm::SC;
    d.combined_ber = 1.0;
    d.data_rate = 0.0;
    return d;
  }

  switch (d.algorithm) {
    case Algorithm::DMRC: {
      CVec h = bs.h;
      for (std::size_t i = 0; i < h.size(); ++i)
        if (!bs.alive_mask[i]) h[i] = 0.0;
      d.weights = combining::mrc_weights(h);
      break;
    }
    case Algorithm::DLMMSE: {
      CVec h, hj;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        if (!bs.alive_mask[i]) continue;
        idx.push_back(i);
        h.push_back(bs.h[i]);
        hj.push_back(bs.h_j[i]);
      }
      const auto sub = combining::lmmse_weights(h, hj, bs.p_g, bs.p_j, bs.sigma2);
      d.weights = combining::CombinerWeights{CVec(bs.size(), cf64{0.0, 0.0}), Algorithm::DLMMSE};
      for (std::size_t a = 0; a < idx.size(); ++a) d.weights.u[idx[a]] = sub.u[a];
      break;
    }
    case Algorithm::SC: {
      d.weights = combining::sc_weights(d.branch_bers, bs.alive_mask);
      break;
    }
  }

  const CVec y = combining::combine(bs, d.weights);
  BitStream bits = phy::demodulate_qpsk(y);
  if (bits.size() < reference.size()) throw InvalidArgument("combined payload shorter than the reference");
  bits.resize(reference.size());
  d.combined_ber = compute_ber(bits, reference);
  d.combined_bits = std::move(bits);
  d.data_rate = data_rate(d.combined_ber, reference.size(), cfg.frame_duration_s);
  return d;
}

}  // namespace swarmrx::selfheal

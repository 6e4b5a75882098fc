#pragma once

// Diversity combining across N receive branches: d-MRC, d-LMMSE and selection
// combining, with the combined-output SNR/SINR metrics.
//
// Weight convention: CombinerWeights::u holds the coefficients applied to the
// branch samples, y = sum_i u[i] * r_i. In the column-vector notation where the
// combiner output is u^H r, the stored vector is that u's Hermitian, so d-MRC
// stores h^H (elementwise conjugate) and d-LMMSE stores
// (p_g [p_g h h^H + p_j h_j h_j^H + sigma^2 I]^{-1} h)^H.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swarmrx/error.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::combining {

enum class Algorithm : std::uint8_t { DMRC = 0, DLMMSE = 1, SC = 2 };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DMRC: return "DMRC";
    case Algorithm::DLMMSE: return "DLMMSE";
    case Algorithm::SC: return "SC";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "DMRC") return Algorithm::DMRC;
  if (s == "DLMMSE") return Algorithm::DLMMSE;
  if (s == "SC") return Algorithm::SC;
  return std::nullopt;
}

struct CombinerWeights {
  CVec u;
  Algorithm algorithm = Algorithm::DMRC;

  friend bool operator==(const CombinerWeights&, const CombinerWeights&) = default;
};

struct BranchSet {
  std::vector<CVec> R;  // per-branch received payload samples
  CVec h;
  CVec h_j;  // zero where unobserved
  double p_g = 1.0;
  double p_j = 0.0;
  double sigma2 = 1.0;
  std::vector<bool> alive_mask;

  std::size_t size() const { return h.size(); }

  void validate() const {
    const std::size_t n = h.size();
    if (n == 0) throw InvalidArgument("branch set is empty");
    if (R.size() != n || h_j.size() != n || alive_mask.size() != n)
      throw InvalidArgument("branch set fields disagree on the number of branches");
    if (std::none_of(alive_mask.begin(), alive_mask.end(), [](bool b) { return b; }))
      throw InvalidArgument("branch set has no alive branch");
    std::optional<std::size_t> len;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive_mask[i]) continue;
      if (len && R[i].size() != *len) throw InvalidArgument("alive branches carry different sample counts");
      len = R[i].size();
    }
  }
};

namespace detail {

inline double norm2(std::span<const cf64> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

inline cf64 apply(std::span<const cf64> u, std::span<const cf64> h) {
  cf64 acc{0.0, 0.0};
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * h[i];
  return acc;
}

inline void check_dims(std::span<const cf64> u, std::span<const cf64> h) {
  if (u.size() != h.size()) throw InvalidArgument("weight and channel dimensions differ");
  if (!(norm2(u) > 0.0)) throw InvalidArgument("weight vector has zero norm");
}

}  // namespace detail

inline CombinerWeights mrc_weights(std::span<const cf64> h) {
  if (h.empty() || !(detail::norm2(h) > 0.0)) throw InvalidArgument("MRC needs a nonzero channel vector");
  CombinerWeights w{CVec(h.size()), Algorithm::DMRC};
  for (std::size_t i = 0; i < h.size(); ++i) w.u[i] = std::conj(h[i]);
  return w;
}

/// Solves [p_g h h^H + p_j h_j h_j^H + sigma2 I] v = p_g h and returns v^H.
inline CombinerWeights lmmse_weights(std::span<const cf64> h, std::span<const cf64> h_j, double p_g, double p_j,
                                     double sigma2) {
  const std::size_t n = h.size();
  if (n == 0 || h_j.size() != n) throw InvalidArgument("LMMSE needs matching nonempty h and h_j");
  if (sigma2 < 0.0 || p_g < 0.0 || p_j < 0.0) throw InvalidArgument("LMMSE powers must be non-negative");
  using Mat = Eigen::MatrixXcd;
  using Vec = Eigen::VectorXcd;
  Vec hv(static_cast<Eigen::Index>(n));
  Vec jv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    hv[static_cast<Eigen::Index>(i)] = h[i];
    jv[static_cast<Eigen::Index>(i)] = h_j[i];
  }
  Mat cov = p_g * hv * hv.adjoint() + p_j * jv * jv.adjoint() +
            sigma2 * Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::FullPivLU<Mat> lu(cov);
  if (!lu.isInvertible()) throw SingularMatrix("LMMSE covariance is singular (sigma2 = 0 and rank-deficient)");
  Vec v = lu.solve(p_g * hv);
  CombinerWeights w{CVec(n), Algorithm::DLMMSE};
  for (std::size_t i = 0; i < n; ++i) w.u[i] = std::conj(v[static_cast<Eigen::Index>(i)]);
  if (!(detail::norm2(w.u) > 0.0)) throw SingularMatrix("LMMSE produced a zero weight vector");
  return w;
}

/// One-hot on the alive branch with the lowest BER; ties go to the lowest index.
inline CombinerWeights sc_weights(std::span<const double> branch_bers, const std::vector<bool>& alive_mask) {
  if (branch_bers.size() != alive_mask.size()) throw InvalidArgument("BER and alive mask sizes differ");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < branch_bers.size(); ++i) {
    if (!alive_mask[i]) continue;
    if (!best || branch_bers[i] < branch_bers[*best]) best = i;
  }
  if (!best) throw InvalidArgument("selection combining needs at least one alive branch");
  CombinerWeights w{CVec(branch_bers.size(), cf64{0.0, 0.0}), Algorithm::SC};
  w.u[*best] = cf64{1.0, 0.0};
  return w;
}

/// y[k] = sum_i u_i r_i[k] / sum_i u_i sqrt(p_g) h_i: combined, then equalized to unit gain.
inline CVec combine(const BranchSet& bs, const CombinerWeights& w) {
  bs.validate();
  const std::size_t n = bs.size();
  if (w.u.size() != n) throw InvalidArgument("weight dimension does not match branch count");
  std::size_t len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!bs.alive_mask[i]) {
      if (w.u[i] != cf64{0.0, 0.0}) throw InvalidArgument("dead branch " + std::to_string(i) + " has nonzero weight");
      continue;
    }
    len = bs.R[i].size();
  }
  const double amp = std::sqrt(bs.p_g);
  cf64 gain{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    if (bs.alive_mask[i]) gain += w.u[i] * (amp * bs.h[i]);
  if (!(std::abs(gain) > 0.0)) throw DegenerateCombination("combined signal gain is zero");
  CVec y(len, cf64{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    if (!bs.alive_mask[i] || w.u[i] == cf64{0.0, 0.0}) continue;
    for (std::size_t k = 0; k < len; ++k) y[k] += w.u[i] * bs.R[i][k];
  }
  for (auto& s : y) s /= gain;
  return y;
}

// Combined-output SNR: p_g |sum u_i h_i|^2 / (sigma2 sum |u_i|^2).
inline double snr(const CombinerWeights& w, std::span<const cf64> h, double p_g, double sigma2) {
  detail::check_dims(w.u, h);
  return p_g * std::norm(detail::apply(w.u, h)) / (sigma2 * detail::norm2(w.u));
}

// SINR: p_g |u.h|^2 / (sigma2 ||u||^2 + p_j |u.h_j|^2).
inline double sinr(const CombinerWeights& w, std::span<const cf64> h, std::span<const cf64> h_j, double p_g,
                   double p_j, double sigma2) {
  detail::check_dims(w.u, h);
  if (h_j.size() != h.size()) throw InvalidArgument("jammer channel dimension differs");
  const double signal = p_g * std::norm(detail::apply(w.u, h));
  const double denom = sigma2 * detail::norm2(w.u) + p_j * std::norm(detail::apply(w.u, h_j));
  return signal / denom;
}

}  // namespace swarmrx::combining

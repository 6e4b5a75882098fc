#pragma once

// Trace summaries: algorithm shares, contiguous algorithm blocks, mean rates,
// windowed averages and the dominance-violation count.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "swarmrx/scenario/trace.hpp"

namespace swarmrx::scenario {

struct AlgorithmBlock {
  combining::Algorithm algorithm;
  std::uint64_t first_cycle;
  std::uint64_t last_cycle;
  std::size_t count;
};

struct TraceSummary {
  std::size_t cycles = 0;
  std::map<combining::Algorithm, std::size_t> algorithm_counts;
  std::vector<AlgorithmBlock> blocks;
  double mean_combined_rate = 0.0;
  std::vector<double> mean_branch_rate;
  std::size_t dominance_violations = 0;
};

inline TraceSummary summarize(const std::vector<CycleRecord>& records) {
  if (records.empty()) throw InvalidArgument("nothing to summarize");
  TraceSummary s;
  const std::size_t n = records.front().per_branch_rate.size();
  s.cycles = records.size();
  s.mean_branch_rate.assign(n, 0.0);
  for (const auto& r : records) {
    ++s.algorithm_counts[r.algorithm];
    if (s.blocks.empty() || s.blocks.back().algorithm != r.algorithm)
      s.blocks.push_back({r.algorithm, r.cycle, r.cycle, 0});
    s.blocks.back().last_cycle = r.cycle;
    ++s.blocks.back().count;
    s.mean_combined_rate += r.combined_rate;
    for (std::size_t i = 0; i < n; ++i) s.mean_branch_rate[i] += r.per_branch_rate[i];
    if (!dominates(r)) ++s.dominance_violations;
  }
  s.mean_combined_rate /= static_cast<double>(records.size());
  for (auto& m : s.mean_branch_rate) m /= static_cast<double>(records.size());
  return s;
}

inline std::string format_summary(const TraceSummary& s) {
  std::ostringstream o;
  o << "cycles: " << s.cycles << "\n";
  for (auto a : {combining::Algorithm::DMRC, combining::Algorithm::DLMMSE, combining::Algorithm::SC}) {
    const auto it = s.algorithm_counts.find(a);
    if (it == s.algorithm_counts.end()) continue;
    const double pct = 100.0 * static_cast<double>(it->second) / static_cast<double>(s.cycles);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", pct);
    o << combining::to_string(a) << ": " << buf << "% of cycles (" << it->second << ")\n";
  }
  o << "blocks:\n";
  for (const auto& b : s.blocks)
    o << "  " << b.first_cycle << "-" << b.last_cycle << " " << combining::to_string(b.algorithm) << " (" << b.count
      << ")\n";
  o << "mean combined rate: " << fixed6(s.mean_combined_rate) << " b/s\n";
  for (std::size_t i = 0; i < s.mean_branch_rate.size(); ++i)
    o << "mean rate branch " << i << ": " << fixed6(s.mean_branch_rate[i]) << " b/s\n";
  o << "dominance violations: " << s.dominance_violations << "\n";
  return o.str();
}

/// Non-overlapping windows of `window` records (the last may be shorter):
///   first_cycle,count,combined_rate,rate_0..rate_{N-1}
inline std::string windowed_rates(const std::vector<CycleRecord>& records, std::size_t window) {
  if (window == 0) throw InvalidArgument("window must be >= 1");
  if (records.empty()) throw InvalidArgument("nothing to average");
  const std::size_t n = records.front().per_branch_rate.size();
  std::string out = "first_cycle,count,combined_rate";
  for (std::size_t i = 0; i < n; ++i) out += ",rate_" + std::to_string(i);
  out += "\n";
  for (std::size_t at = 0; at < records.size(); at += window) {
    const std::size_t end = std::min(records.size(), at + window);
    double comb = 0.0;
    std::vector<double> br(n, 0.0);
    for (std::size_t k = at; k < end; ++k) {
      comb += records[k].combined_rate;
      for (std::size_t i = 0; i < n; ++i) br[i] += records[k].per_branch_rate[i];
    }
    const double cnt = static_cast<double>(end - at);
    out += std::to_string(records[at].cycle) + "," + std::to_string(end - at) + "," + fixed6(comb / cnt);
    for (double v : br) out += "," + fixed6(v / cnt);
    out += "\n";
  }
  return out;
}

}  // namespace swarmrx::scenario

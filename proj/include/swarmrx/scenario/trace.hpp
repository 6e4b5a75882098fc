#pragma once

// Per-cycle records and their CSV form:
//   cycle,leader,algorithm,n_s,alive,combined_ber,combined_rate,ber_0..ber_{N-1},rate_0..rate_{N-1}
// Floating-point fields use fixed 6-decimal formatting.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swarmrx/combining.hpp"
#include "swarmrx/error.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::scenario {

struct CycleRecord {
  std::uint64_t cycle = 0;
  NodeIndex leader = 0;
  combining::Algorithm algorithm = combining::Algorithm::SC;
  std::uint32_t n_s = 0;
  std::uint32_t alive_count = 0;
  double combined_ber = 1.0;
  double combined_rate = 0.0;
  std::vector<double> per_branch_ber;
  std::vector<double> per_branch_rate;

  friend bool operator==(const CycleRecord&, const CycleRecord&) = default;
};

class TraceError : public Error {
 public:
  TraceError(std::size_t line, const std::string& what)
      : Error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string trace_header(std::size_t n) {
  std::string h = "cycle,leader,algorithm,n_s,alive,combined_ber,combined_rate";
  for (std::size_t i = 0; i < n; ++i) h += ",ber_" + std::to_string(i);
  for (std::size_t i = 0; i < n; ++i) h += ",rate_" + std::to_string(i);
  return h;
}

inline std::string format_trace(const std::vector<CycleRecord>& records) {
  if (records.empty()) throw InvalidArgument("refusing to write an empty trace");
  const std::size_t n = records.front().per_branch_ber.size();
  std::string out = trace_header(n) + "\n";
  for (const auto& r : records) {
    if (r.per_branch_ber.size() != n || r.per_branch_rate.size() != n)
      throw InvalidArgument("trace records disagree on the branch count");
    out += std::to_string(r.cycle) + "," + std::to_string(r.leader) + "," + std::string(combining::to_string(r.algorithm)) +
           "," + std::to_string(r.n_s) + "," + std::to_string(r.alive_count) + "," + fixed6(r.combined_ber) + "," +
           fixed6(r.combined_rate);
    for (double b : r.per_branch_ber) out += "," + fixed6(b);
    for (double v : r.per_branch_rate) out += "," + fixed6(v);
    out += "\n";
  }
  return out;
}

inline void write_trace(const std::vector<CycleRecord>& records, const std::string& path) {
  const auto text = format_trace(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open trace '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for trace '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T field(const std::string& s, std::size_t line, const std::string& name) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw TraceError(line, "column '" + name + "': cannot parse '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<CycleRecord> parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw TraceError(1, "empty file");
  const auto head = detail::split_csv(line);
  if (head.size() < 7 || (head.size() - 7) % 2 != 0) throw TraceError(1, "unexpected header '" + line + "'");
  const std::size_t n = (head.size() - 7) / 2;
  if (detail::split_csv(trace_header(n)) != head) throw TraceError(1, "unexpected header '" + line + "'");
  std::vector<CycleRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv(line);
    if (f.size() != head.size())
      throw TraceError(lineno, std::to_string(f.size()) + " columns, header has " + std::to_string(head.size()));
    CycleRecord r;
    r.cycle = detail::field<std::uint64_t>(f[0], lineno, "cycle");
    r.leader = detail::field<NodeIndex>(f[1], lineno, "leader");
    const auto alg = combining::parse_algorithm(f[2]);
    if (!alg) throw TraceError(lineno, "column 'algorithm': unknown '" + f[2] + "'");
    r.algorithm = *alg;
    r.n_s = detail::field<std::uint32_t>(f[3], lineno, "n_s");
    r.alive_count = detail::field<std::uint32_t>(f[4], lineno, "alive");
    r.combined_ber = detail::field<double>(f[5], lineno, "combined_ber");
    r.combined_rate = detail::field<double>(f[6], lineno, "combined_rate");
    for (std::size_t i = 0; i < n; ++i) r.per_branch_ber.push_back(detail::field<double>(f[7 + i], lineno, head[7 + i]));
    for (std::size_t i = 0; i < n; ++i)
      r.per_branch_rate.push_back(detail::field<double>(f[7 + n + i], lineno, head[7 + n + i]));
    out.push_back(std::move(r));
  }
  if (out.empty()) throw TraceError(lineno, "trace has no records");
  return out;
}

inline std::vector<CycleRecord> read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

// combined_rate >= (1 - tolerance) * max per-branch rate
inline bool dominates(const CycleRecord& r, double tolerance = 0.02) {
  double best = 0.0;
  for (double v : r.per_branch_rate) best = std::max(best, v);
  return r.combined_rate >= (1.0 - tolerance) * best;
}

}  // namespace swarmrx::scenario

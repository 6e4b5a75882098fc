// swarmrx: run scenarios, run one swarm node over TCP, summarize traces.
//
// exit codes
//   0   success
//   1   internal error
//   2   scenario file not found
//   3   invalid scenario / override
//   4   I/O failure (trace, image, socket)
//   5   swarm lost (partial trace is still written)
//   6   malformed trace
//   64  usage

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "swarmrx/scenario/config.hpp"
#include "swarmrx/scenario/node_runner.hpp"
#include "swarmrx/scenario/report.hpp"
#include "swarmrx/scenario/runner.hpp"

namespace fs = std::filesystem;
using namespace swarmrx;
using namespace swarmrx::scenario;

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kNotFound = 2,
  kBadConfig = 3,
  kIo = 4,
  kSwarmLost = 5,
  kBadTrace = 6,
  kUsage = 64,
};

// SWARMRX_LOG=quiet silences event chatter on stderr; flags win over it.
bool quiet_from_env() {
  const char* v = std::getenv("SWARMRX_LOG");
  return v && std::string(v) == "quiet";
}

std::string segment_label(const channel::JammerSegment& s) {
  if (!s.power) return "off";
  std::ostringstream o;
  o << s.power->value << " dBm";
  return o.str();
}

void print_segments(const ScenarioConfig& cfg, const ScenarioResult& res, std::ostream& out) {
  const auto& segs = cfg.jammer.segments;
  const std::size_t n = cfg.n_receivers;
  out << "segment  cycles        jammer      algorithms              combined_rate";
  for (std::size_t i = 0; i < n; ++i) out << "  rate_" << i;
  out << "\n";
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const std::uint64_t begin = segs[s].start_cycle;
    const std::uint64_t end = s + 1 < segs.size() ? segs[s + 1].start_cycle : cfg.total_cycles();
    std::map<combining::Algorithm, std::size_t> counts;
    double comb = 0.0;
    std::vector<double> br(n, 0.0);
    std::size_t k = 0;
    for (const auto& r : res.records) {
      if (r.cycle < begin || r.cycle >= end) continue;
      ++counts[r.algorithm];
      comb += r.combined_rate;
      for (std::size_t i = 0; i < n; ++i) br[i] += r.per_branch_rate[i];
      ++k;
    }
    std::string algs;
    for (const auto& [a, c] : counts) algs += (algs.empty() ? "" : " ") + std::string(combining::to_string(a)) + "=" + std::to_string(c);
    if (algs.empty()) algs = "-";
    char head[96];
    std::snprintf(head, sizeof head, "%-8zu %-13s %-11s %-23s", s,
                  (std::to_string(begin) + "-" + std::to_string(end ? end - 1 : 0)).c_str(), segment_label(segs[s]).c_str(),
                  algs.c_str());
    out << head << (k ? fixed6(comb / static_cast<double>(k)) : "-");
    for (double v : br) out << "  " << (k ? fixed6(v / static_cast<double>(k)) : "-");
    out << "\n";
  }
  for (const auto& si : res.images) {
    out << "segment " << si.segment << " PSNR dB: combined " << si.combined_psnr;
    for (std::size_t i = 0; i < si.branch_psnr.size(); ++i) out << ", branch " << i << " " << si.branch_psnr[i];
    out << "\n";
  }
}

std::vector<fs::path> write_images(const ScenarioResult& res, const fs::path& trace) {
  std::vector<fs::path> written;
  const auto stem = trace.parent_path() / trace.stem();
  for (const auto& si : res.images) {
    const std::string base = stem.string() + "_seg" + std::to_string(si.segment);
    write_pgm(si.combined, base + "_combined.pgm");
    written.emplace_back(base + "_combined.pgm");
    for (std::size_t i = 0; i < si.branches.size(); ++i) {
      write_pgm(si.branches[i], base + "_rx" + std::to_string(i) + ".pgm");
      written.emplace_back(base + "_rx" + std::to_string(i) + ".pgm");
    }
  }
  return written;
}

int cmd_run(const std::string& path, const std::vector<std::string>& sets, std::string output, bool print_config,
            bool quiet) {
  const auto cfg = load_scenario(path, sets);
  if (print_config) {
    std::cout << describe(cfg);
    return kOk;
  }
  if (output.empty()) output = cfg.name + ".csv";
  const auto res = run_scenario(cfg);
  if (!quiet)
    for (const auto& e : res.events) std::cerr << e << "\n";
  if (!res.records.empty()) write_trace(res.records, output);
  if (res.swarm_lost) {
    std::cerr << "swarmrx: " << res.lost_reason << " (" << res.records.size() << " cycles written to " << output
              << ")\n";
    return kSwarmLost;
  }
  if (res.records.empty()) throw SwarmLost("swarm lost: no cycle was decided");
  const auto images = write_images(res, output);
  std::cout << "scenario " << cfg.name << ", seed " << cfg.seed << ", " << res.records.size() << " cycles -> " << output
            << "\n";
  for (const auto& p : images) std::cout << "image " << p.string() << "\n";
  print_segments(cfg, res, std::cout);
  std::cout << "dominance violations: " << summarize(res.records).dominance_violations << "\n";
  return kOk;
}

int cmd_node(NodeIndex index, const std::string& path, std::vector<std::string> sets, const std::string& peers,
             std::optional<std::uint16_t> base_port, std::optional<std::uint64_t> cycles, bool quiet) {
  if (!peers.empty()) {
    std::string list = peers;
    std::replace(list.begin(), list.end(), ',', ' ');
    sets.push_back("tcp.peers=" + list);
  }
  if (base_port) sets.push_back("tcp.base_port=" + std::to_string(*base_port));
  const auto cfg = load_scenario(path, sets);
  NodeOptions opt;
  opt.index = index;
  opt.max_cycles = cycles;
  opt.decision_log = [](const std::string& line) { std::cout << line << std::endl; };
  if (!quiet) opt.event_log = [](const std::string& line) { std::cerr << line << std::endl; };
  run_node(cfg, opt);
  return kOk;
}

int cmd_report(const std::string& trace, std::size_t window, std::string output) {
  const auto records = read_trace(trace);
  std::cout << format_summary(summarize(records));
  if (output.empty()) {
    const fs::path p(trace);
    output = (p.parent_path() / p.stem()).string() + "_windows.csv";
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw IoError("cannot write '" + output + "'");
  out << windowed_rates(records, window);
  if (!out) throw IoError("write failed for '" + output + "'");
  std::cout << "windowed rates (window " << window << ") -> " << output << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed receive-combining swarm: simulate, run nodes over TCP, summarize traces."};
  app.require_subcommand(1);
  bool quiet = quiet_from_env();
  app.add_flag("-q,--quiet", quiet, "no event chatter on stderr");

  std::string scenario, output, trace, peers;
  std::vector<std::string> sets;
  bool print_config = false;
  std::size_t window = 500;
  NodeIndex index = 0;
  std::optional<std::uint16_t> base_port;
  std::optional<std::uint64_t> cycles;

  auto* run = app.add_subcommand("run", "simulate a scenario on the deterministic in-process swarm");
  run->add_option("scenario", scenario, "scenario file")->required();
  run->add_option("-o,--output", output, "trace CSV (default <name>.csv); image PGMs are written beside it");
  run->add_option("-s,--set", sets, "override a config key, key=value (repeatable)");
  run->add_flag("--print-config", print_config, "print the resolved configuration and exit");

  auto* node = app.add_subcommand("node", "run one swarm member over TCP until interrupted");
  node->add_option("index", index, "this node's receiver index")->required();
  node->add_option("scenario", scenario, "scenario file")->required();
  node->add_option("-s,--set", sets, "override a config key, key=value (repeatable)");
  node->add_option("--peers", peers, "comma-separated host per node (default: loopback)");
  node->add_option("--base-port", base_port, "node i listens on base-port + i");
  node->add_option("--cycles", cycles, "leave gracefully after this many decided cycles");

  auto* report = app.add_subcommand("report", "summarize a trace and write windowed average rates");
  report->add_option("trace", trace, "trace CSV written by 'run'")->required();
  report->add_option("-w,--window", window, "records per averaging window")->check(CLI::PositiveNumber);
  report->add_option("-o,--output", output, "windowed CSV (default <trace>_windows.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(scenario, sets, output, print_config, quiet);
    if (*node) return cmd_node(index, scenario, sets, peers, base_port, cycles, quiet);
    if (*report) return cmd_report(trace, window, output);
  } catch (const ScenarioNotFound& e) {
    std::cerr << "swarmrx: " << e.what() << "\n";
    return kNotFound;
  } catch (const ConfigError& e) {
    std::cerr << "swarmrx: invalid scenario\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return kBadConfig;
  } catch (const TraceError& e) {
    std::cerr << "swarmrx: malformed trace: " << e.what() << "\n";
    return kBadTrace;
  } catch (const IoError& e) {
    std::cerr << "swarmrx: " << e.what() << "\n";
    return kIo;
  } catch (const SwarmLost& e) {
    std::cerr << "swarmrx: " << e.what() << "\n";
    return kSwarmLost;
  } catch (const std::exception& e) {
    std::cerr << "swarmrx: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

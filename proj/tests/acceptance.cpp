// Acceptance run: one PASS/FAIL line per criterion, exit 0 only if all pass.
//
//   acceptance --cli build/tools/swarmrx --presets presets [--only 4]

#include <CLI11.hpp>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "generators.hpp"
#include "oracles.hpp"
#include "swarmrx/channel.hpp"
#include "swarmrx/combining.hpp"
#include "swarmrx/phy.hpp"
#include "swarmrx/scenario/runner.hpp"
#include "swarmrx/swarm/codec.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace swarmrx;
using combining::Algorithm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

CVec cn_vector(Rng& rng, std::size_t n, double var = 1.0) {
  CVec v(n);
  for (auto& z : v) z = rng.complex_gaussian(var);
  return v;
}

combining::CombinerWeights unit_random(Rng& rng, std::size_t n) {
  combining::CombinerWeights w{cn_vector(rng, n), Algorithm::DMRC};
  double s = 0.0;
  for (auto z : w.u) s += std::norm(z);
  for (auto& z : w.u) z /= std::sqrt(s);
  return w;
}

// --- 1 ---
Outcome mrc_optimality() {
  double worst_rel = 0.0;
  std::size_t beaten = 0;
  const std::size_t sizes[] = {2, 3, 8};
  for (std::uint64_t inst = 0; inst < 1000; ++inst) {
    Rng rng({1, Stream::Test, inst, 1});
    const std::size_t n = sizes[inst % 3];
    const auto h = cn_vector(rng, n);
    const double p_g = rng.uniform(0.5, 2.0), s2 = rng.uniform(0.01, 1.0);
    const double got = combining::snr(combining::mrc_weights(h), h, p_g, s2);
    double sum = 0.0;
    for (auto z : h) sum += std::norm(z);
    const double want = p_g * sum / s2;
    worst_rel = std::max(worst_rel, std::abs(got - want) / want);
    for (int k = 0; k < 10000; ++k)
      if (combining::snr(unit_random(rng, n), h, p_g, s2) > got * (1.0 + 1e-12)) ++beaten;
  }
  return {worst_rel <= 1e-12 && beaten == 0,
          "1000 instances, max rel err " + fmt(worst_rel) + " (<= 1e-12), random weights beating MRC: " +
              std::to_string(beaten)};
}

// --- 2 ---
Outcome lmmse_optimality() {
  const double ratios[] = {1.0, 10.0, 100.0};
  const std::size_t sizes[] = {2, 3, 8};
  double worst_gap = 0.0, worst_col = 0.0;
  std::size_t beaten = 0;
  for (std::uint64_t inst = 0; inst < 1000; ++inst) {
    Rng rng({2, Stream::Test, inst, 2});
    const std::size_t n = sizes[(inst / 3) % 3];
    const double p_g = 1.0, p_j = ratios[inst % 3], s2 = rng.uniform(0.05, 1.0);
    const auto h = cn_vector(rng, n), hj = cn_vector(rng, n);
    const auto wl = combining::lmmse_weights(h, hj, p_g, p_j, s2);
    const auto wm = combining::mrc_weights(h);
    const double sl = combining::sinr(wl, h, hj, p_g, p_j, s2);
    worst_gap = std::max(worst_gap, combining::sinr(wm, h, hj, p_g, p_j, s2) - sl);
    for (int k = 0; k < 10000; ++k)
      if (combining::sinr(unit_random(rng, n), h, hj, p_g, p_j, s2) > sl + 1e-9) ++beaten;
    // p_j = 0: same direction as MRC
    const auto w0 = combining::lmmse_weights(h, hj, p_g, 0.0, s2);
    cf64 dot{};
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += std::conj(w0.u[i]) * wm.u[i];
      a += std::norm(w0.u[i]);
      b += std::norm(wm.u[i]);
    }
    worst_col = std::max(worst_col, 1.0 - std::abs(dot) / std::sqrt(a * b));
  }
  return {worst_gap <= 1e-9 && beaten == 0 && worst_col <= 1e-9,
          "1000 jammed instances, max sinr(MRC)-sinr(LMMSE) " + fmt(worst_gap) + " (<= 1e-9), random weights beating " +
              "LMMSE: " + std::to_string(beaten) + ", p_j=0 collinearity gap " + fmt(worst_col) + " (<= 1e-9)"};
}

// --- 3 ---
// Eb/N0 = snr, unit-energy QPSK: sigma2 = 1 / (2 snr).
double ber_run(double snr_db, std::size_t branches, std::uint64_t seed) {
  const std::size_t nbits = 100000;
  const double snr = oracle::db_to_linear(snr_db);
  Rng rng({seed, Stream::Test, 3, branches});
  const auto bits = random_bits(rng, nbits);
  const auto x = phy::modulate_qpsk(bits);
  const CVec silent(x.size());
  combining::BranchSet bs;
  bs.sigma2 = 1.0 / (2.0 * snr);
  bs.h_j.assign(branches, {});
  bs.alive_mask.assign(branches, true);
  for (std::size_t i = 0; i < branches; ++i) {
    channel::BranchChannel ch{std::polar(1.0, rng.uniform(0.0, 2 * kPi)), {}, bs.sigma2};
    bs.h.push_back(ch.h);
    bs.R.push_back(channel::apply_channel(x, silent, ch, channel::PowerDbm{0.0}, std::nullopt,
                                          {seed, Stream::Noise, 3, i}));
  }
  const auto out = phy::demodulate_qpsk(combining::combine(bs, combining::mrc_weights(bs.h)));
  std::size_t e = 0;
  for (std::size_t k = 0; k < nbits; ++k) e += out[k] != bits[k];
  return static_cast<double>(e) / static_cast<double>(nbits);
}

Outcome ber_oracle() {
  bool ok = channel::dbm_to_linear(channel::PowerDbm{0.0}) == 1.0;
  std::string d;
  auto check = [&](double snr_db, std::size_t branches) {
    const double ber = ber_run(snr_db, branches, 7);
    const double p = oracle::qpsk_ber(static_cast<double>(branches) * oracle::db_to_linear(snr_db));
    const double z = std::abs(ber - p) / oracle::binomial_sigma(p, 100000);
    ok = ok && z <= 3.0;
    d += (d.empty() ? "" : "; ") + std::to_string(branches) + "x" + fmt(snr_db) + " dB: " + fmt(ber, 4) + " vs " +
         fmt(p, 4) + " (" + fmt(z, 2) + " sd)";
  };
  for (double s : {0.0, 4.0, 8.0}) check(s, 1);
  check(0.0, 3);
  return {ok, d + ", bound 3 sd"};
}

// --- 4 ---
Outcome indoor_phases(const std::string& presets) {
  const Algorithm want[] = {Algorithm::DMRC, Algorithm::DLMMSE, Algorithm::SC};
  std::size_t bad_alg = 0, bad_bits = 0, lost = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto cfg = scenario::load_scenario(presets + "/indoor_bitstream.cfg", {"seed=" + std::to_string(seed)});
    const auto res = scenario::run_scenario(cfg);
    if (res.swarm_lost || res.records.size() != cfg.total_cycles()) ++lost;
    const auto& segs = cfg.jammer.segments;
    for (const auto& ev : res.decisions) {
      const auto& d = ev.payload.decision;
      const auto s = cfg.jammer.segment_at(d.cycle);
      if (s >= 3 || segs.size() != 3 || d.algorithm != want[s]) ++bad_alg;
      if (s == 2 && d.combined_bits != res.branch_bits.at(d.cycle).at(2)) ++bad_bits;
    }
  }
  return {bad_alg == 0 && bad_bits == 0 && lost == 0,
          "seeds 1..10: cycles off the (DMRC, DLMMSE, SC) pattern " + std::to_string(bad_alg) +
              ", segment-3 cycles where combined bits differ from RX3 " + std::to_string(bad_bits) +
              ", incomplete runs " + std::to_string(lost)};
}

std::vector<std::string> preset_files(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".cfg") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// --- 5 ---
Outcome dominance(const std::string& presets) {
  std::size_t records = 0, violations = 0, lost = 0;
  std::string worst;
  const auto files = preset_files(presets);
  for (const auto& f : files)
    for (int seed = 1; seed <= 10; ++seed) {
      const auto res = scenario::run_scenario(scenario::load_scenario(f, {"seed=" + std::to_string(seed)}));
      lost += res.swarm_lost;
      for (const auto& r : res.records) {
        ++records;
        if (!scenario::dominates(r)) {
          ++violations;
          if (worst.empty()) worst = ", first at " + fs::path(f).stem().string() + " seed " + std::to_string(seed) +
                                     " cycle " + std::to_string(r.cycle);
        }
      }
    }
  return {violations == 0 && lost == 0 && records > 0,
          std::to_string(files.size()) + " presets x 10 seeds, " + std::to_string(records) + " records, " +
              std::to_string(violations) + " violations of combined >= 0.98 max branch" + worst};
}

// --- 6 ---
Outcome image_pipeline(const std::string& presets, const fs::path& scratch) {
  const auto img = scenario::synthetic_image(64, 64);
  const auto src = (scratch / "source.pgm").string();
  scenario::write_pgm(img, src);
  std::ifstream in(src, std::ios::binary);
  const std::string src_bytes((std::istreambuf_iterator<char>(in)), {});
  const auto cfg = scenario::parse_scenario("name = image_clean\nn_receivers = 3\npayload_bits = 1024\nframes_per_segment = 32\n"
                                            "tx_power_dbm = 0\nnoise_sigma2 = 0.0001\npayload.source = image\npayload.image = " +
                                            src + "\npayload.width = 64\npayload.height = 64\n[jammer]\n0 off\n");
  const auto clean = scenario::run_scenario(cfg);
  const bool lossless = !clean.images.empty() && scenario::encode_pgm(clean.images[0].combined) == src_bytes;

  std::size_t checked = 0, below = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto* name : {"indoor_image", "outdoor_image"})
    for (int seed = 1; seed <= 10; ++seed) {
      const auto res = scenario::run_scenario(
          scenario::load_scenario(presets + "/" + name + ".cfg", {"seed=" + std::to_string(seed)}));
      if (res.images.size() != 3) ++below;
      for (const auto& si : res.images)
        for (double b : si.branch_psnr) {
          ++checked;
          if (si.combined_psnr < b) ++below;
          if (std::isfinite(si.combined_psnr) && std::isfinite(b)) worst_margin = std::min(worst_margin, si.combined_psnr - b);
        }
    }
  return {lossless && below == 0 && checked > 0,
          std::string("64x64 PGM round trip over a clean channel ") + (lossless ? "byte-identical" : "DIFFERS") +
              "; image presets x 10 seeds: " + std::to_string(checked) + " segment/branch pairs, " + std::to_string(below) +
              " with combined PSNR below the branch (smallest finite margin " + fmt(worst_margin) + " dB)"};
}

// --- 7 ---
Outcome protocol_faults(const std::string& presets) {
  auto cfg = scenario::load_scenario(presets + "/fault_drill.cfg");
  auto calm = cfg;
  calm.faults.clear();
  std::string d;
  bool ok = true;

  const auto a = scenario::run_scenario(calm);
  std::map<NodeIndex, int> leads;
  for (const auto& r : a.records) ++leads[r.leader];
  const bool fair = a.records.size() == 90 && leads[0] == 30 && leads[1] == 30 && leads[2] == 30;
  ok = ok && fair && a.leader_conflicts.empty();
  d += "fault-free leads " + std::to_string(leads[0]) + "/" + std::to_string(leads[1]) + "/" + std::to_string(leads[2]);

  const auto b = scenario::run_scenario(cfg);
  std::size_t wrong_excl = 0, wrong_back = 0;
  std::map<NodeIndex, int> survivor_leads;
  for (const auto& r : b.records) {
    if (r.cycle >= 41 && r.cycle < 60) {
      if (r.alive_count != 2 || r.per_branch_rate[1] != 0.0) ++wrong_excl;
      ++survivor_leads[r.leader];
    }
    if (r.cycle >= 62 && r.alive_count != 3) ++wrong_back;
  }
  const int l0 = survivor_leads[0], l1 = survivor_leads[1], l2 = survivor_leads[2];
  const bool rot = l1 == 0 && std::abs(l0 - l2) <= 1;
  ok = ok && b.records.size() == 90 && wrong_excl == 0 && wrong_back == 0 && rot && b.leader_conflicts.empty() &&
       !b.swarm_lost;
  d += "; kill@40: cycles 41-59 not on 2 branches " + std::to_string(wrong_excl) + ", survivor leads " +
       std::to_string(l0) + "/" + std::to_string(l1) + "/" + std::to_string(l2) + "; rejoin@60: cycles >=62 not on 3 " +
       std::to_string(wrong_back) + "; leader conflicts " + std::to_string(a.leader_conflicts.size() + b.leader_conflicts.size());
  return {ok, d};
}

// --- 8 ---
class Child {
 public:
  Child(const std::vector<std::string>& argv, const fs::path& out, const fs::path& err) {
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_addopen(&fa, 1, out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addopen(&fa, 2, err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    if (posix_spawn(&pid_, args[0], &fa, nullptr, args.data(), environ) != 0) pid_ = -1;
    posix_spawn_file_actions_destroy(&fa);
  }
  ~Child() {
    if (running()) {
      kill(pid_, SIGKILL);
      wait();
    }
  }
  bool running() {
    if (pid_ <= 0 || reaped_) return false;
    int st = 0;
    if (waitpid(pid_, &st, WNOHANG) == pid_) {
      reaped_ = true;
      status_ = st;
      return false;
    }
    return true;
  }
  void signal(int sig) {
    if (running()) kill(pid_, sig);
  }
  int wait() {
    if (pid_ > 0 && !reaped_) {
      waitpid(pid_, &status_, 0);
      reaped_ = true;
    }
    return status_;
  }
  bool exited_cleanly() {
    wait();
    return WIFEXITED(status_) && WEXITSTATUS(status_) == 0;
  }

 private:
  pid_t pid_ = -1;
  bool reaped_ = false;
  int status_ = -1;
};

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);)
    if (l.rfind("DECISION ", 0) == 0) out.push_back(l);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool ports_free(std::uint16_t base, int count) {
  for (int i = 0; i < count; ++i) {
    const int fd = socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(static_cast<std::uint16_t>(base + i));
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    const bool ok = bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a) == 0;
    close(fd);
    if (!ok) return false;
  }
  return true;
}

std::map<std::uint64_t, std::string> by_cycle(const std::vector<std::string>& lines) {
  std::map<std::uint64_t, std::string> m;
  for (const auto& l : lines) m[std::stoull(l.substr(std::string("DECISION cycle=").size()))] = l;
  return m;
}

bool wait_for(const std::function<bool()>& pred, double seconds) {
  const auto end = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  while (std::chrono::steady_clock::now() < end) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  return pred();
}

Outcome tcp_loopback(const std::string& cli, const std::string& presets, const fs::path& scratch) {
  std::mt19937 pick(std::random_device{}());
  std::uint16_t base = 0;
  for (int tries = 0; tries < 50 && !base; ++tries) {
    const auto b = static_cast<std::uint16_t>(20000 + pick() % 40000);
    if (ports_free(b, 3)) base = b;
  }
  if (!base) return {false, "no free loopback ports"};
  const auto cfg = presets + "/clean_bitstream.cfg";
  auto spawn = [&](int i, const std::string& tag) {
    return std::make_unique<Child>(
        std::vector<std::string>{cli, "node", std::to_string(i), cfg, "--base-port", std::to_string(base)},
        scratch / ("node" + tag + ".log"), scratch / ("node" + tag + ".err"));
  };
  auto log = [&](const std::string& tag) { return read_lines(scratch / ("node" + tag + ".log")); };
  auto has = [&](const std::string& tag, const std::string& what) {
    for (const auto& l : log(tag))
      if (l.find(what) != std::string::npos) return true;
    return false;
  };

  auto n0 = spawn(0, "0"), n1 = spawn(1, "1"), n2 = spawn(2, "2");
  std::string d;
  bool ok = wait_for([&] { return log("0").size() >= 15 && log("1").size() >= 15 && log("2").size() >= 15; }, 20);
  d += ok ? "3 nodes running" : "swarm did not start";

  n1->signal(SIGKILL);
  n1->wait();
  const bool excluded = ok && wait_for([&] { return has("0", "participants=0,2 ") && has("2", "participants=0,2 "); }, 15);
  ok = ok && excluded;
  d += excluded ? "; node 1 killed, survivors excluded it" : "; no exclusion after kill";

  const std::size_t before = log("0").size();
  auto n1b = spawn(1, "1b");
  const bool rejoined = ok && wait_for([&] {
    const auto l = log("0");
    for (std::size_t k = before; k < l.size(); ++k)
      if (l[k].find("participants=0,1,2 ") != std::string::npos) return true;
    return false;
  }, 20);
  const bool hello = slurp(scratch / "node0.err").find("HELLO from node 1") != std::string::npos;
  ok = ok && rejoined && hello;
  d += rejoined ? "; restarted node 1 readmitted" : "; restarted node 1 never readmitted";

  ok = ok && wait_for([&] { return log("0").size() >= 50 && log("1b").size() >= 5; }, 20);
  const bool survivors_alive = n0->running() && n2->running() && n1b->running();
  ok = ok && survivors_alive;
  for (auto* c : {n0.get(), n2.get(), n1b.get()}) c->signal(SIGTERM);
  const bool clean_exit = n0->exited_cleanly() && n2->exited_cleanly() && n1b->exited_cleanly();
  ok = ok && clean_exit;

  // every cycle logged by more than one process must carry the same line
  std::size_t mismatches = 0, shared = 0;
  std::vector<std::map<std::uint64_t, std::string>> logs;
  for (const auto* t : {"0", "1", "1b", "2"}) logs.push_back(by_cycle(log(t)));
  for (const auto& [c, line] : logs[0])
    for (std::size_t k = 1; k < logs.size(); ++k)
      if (auto it = logs[k].find(c); it != logs[k].end()) {
        ++shared;
        mismatches += it->second != line;
      }
  ok = ok && mismatches == 0;
  d += "; node 0 logged " + std::to_string(logs[0].size()) + " cycles, " + std::to_string(shared) +
       " cross-checked lines, " + std::to_string(mismatches) + " mismatches; survivors " +
       (survivors_alive ? "stayed up" : "EXITED") + (clean_exit ? ", clean shutdown" : ", unclean shutdown");
  return {ok, d};
}

// --- 9 ---
Outcome codec_fuzz() {
  std::size_t crashes = 0, accepted = 0;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100000; ++i) {
    std::vector<std::uint8_t> bytes(rng() % 160);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    if (i % 2 && bytes.size() >= 6) {
      // plausible header so the payload decoders get exercised
      const auto len = static_cast<std::uint32_t>(bytes.size() - 4);
      bytes[0] = static_cast<std::uint8_t>(len >> 24);
      bytes[1] = static_cast<std::uint8_t>(len >> 16);
      bytes[2] = static_cast<std::uint8_t>(len >> 8);
      bytes[3] = static_cast<std::uint8_t>(len);
      bytes[4] = swarm::kWireVersion;
      bytes[5] = static_cast<std::uint8_t>(rng() % 5);
    }
    try {
      const auto m = swarm::decode_message(bytes);
      ++accepted;
      if (m.type == swarm::MsgType::Report) swarm::decode_report(m.payload);
      if (m.type == swarm::MsgType::Decision) swarm::decode_decision(m.payload);
    } catch (const swarm::DecodeError&) {
    } catch (...) {
      ++crashes;
    }
  }
  std::size_t mismatched = 0;
  Rng gen_rng({9, Stream::Test, 0, 0});
  for (int i = 0; i < 10000; ++i) {
    const auto m = gen::random_message(gen_rng);
    try {
      const auto back = swarm::decode_message(swarm::encode_message(m));
      bool same = back == m;
      if (m.type == swarm::MsgType::Report) same = same && swarm::encode_report(swarm::decode_report(back.payload)) == m.payload;
      if (m.type == swarm::MsgType::Decision)
        same = same && swarm::encode_decision(swarm::decode_decision(back.payload)) == m.payload;
      mismatched += !same;
    } catch (...) {
      ++mismatched;
    }
  }
  return {crashes == 0 && mismatched == 0,
          "100000 random inputs (" + std::to_string(accepted) + " framed validly): " + std::to_string(crashes) +
              " crashes; 10000 random messages: " + std::to_string(mismatched) + " round-trip mismatches"};
}

// --- 10 ---
Outcome determinism(const std::string& cli, const std::string& presets, const fs::path& scratch) {
  std::size_t differ = 0, failed = 0;
  const auto files = preset_files(presets);
  for (const auto& f : files) {
    std::string out[2];
    for (int k = 0; k < 2; ++k) {
      const auto csv = scratch / (fs::path(f).stem().string() + "_" + std::to_string(k) + ".csv");
      Child c({cli, "-q", "run", f, "-o", csv.string()}, scratch / "run.out", scratch / "run.err");
      if (!c.exited_cleanly()) ++failed;
      out[k] = slurp(csv);
    }
    if (out[0].empty() || out[0] != out[1]) ++differ;
  }
  return {differ == 0 && failed == 0, std::to_string(files.size()) + " presets run twice through the CLI: " +
                                          std::to_string(differ) + " CSV pairs differ, " + std::to_string(failed) +
                                          " failed runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli, presets;
  std::vector<int> only;
  app.add_option("--cli", cli, "swarmrx binary")->required();
  app.add_option("--presets", presets, "preset directory")->required();
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const auto scratch = fs::temp_directory_path() / ("swarmrx_acceptance_" + std::to_string(getpid()));
  fs::create_directories(scratch);

  const std::vector<Criterion> all = {
      {1, "MRC optimality and additivity", 10, mrc_optimality},
      {2, "LMMSE optimality", 30, lmmse_optimality},
      {3, "BER against the AWGN oracle", 20, ber_oracle},
      {4, "indoor three-phase state machine", 30, [&] { return indoor_phases(presets); }},
      {5, "combined dominance", 0, [&] { return dominance(presets); }},
      {6, "image pipeline", 60, [&] { return image_pipeline(presets, scratch); }},
      {7, "rotation fairness and fault tolerance", 10, [&] { return protocol_faults(presets); }},
      {8, "loopback TCP swarm", 60, [&] { return tcp_loopback(cli, presets, scratch); }},
      {9, "codec fuzz and round trip", 10, codec_fuzz},
      {10, "CLI determinism", 0, [&] { return determinism(cli, presets, scratch); }},
  };

  int passed = 0, ran = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    passed += pass;
    std::cout << "AC" << c.id << (c.id < 10 ? "  " : " ") << (pass ? "PASS" : "FAIL") << "  " << c.title << ": "
              << o.detail << " [" << fmt(secs, 3) << " s" << (c.budget_s ? " of " + fmt(c.budget_s) + " s" : "")
              << (in_time ? "" : ", OVER BUDGET") << "]" << std::endl;
  }
  std::cout << "acceptance: " << passed << "/" << ran << " passed" << std::endl;
  std::error_code ec;
  fs::remove_all(scratch, ec);
  return passed == ran ? 0 : 1;
}

#pragma once

// Scenario files: flat `key = value` lines plus [jammer] and [faults] tables.
// The grammar is documented in docs/scenario_format.md.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "swarmrx/channel.hpp"
#include "swarmrx/error.hpp"
#include "swarmrx/phy.hpp"
#include "swarmrx/selfheal.hpp"
#include "swarmrx/swarm/node.hpp"

namespace swarmrx::scenario {

enum class PayloadSource { Random, Image };

struct FaultEvent {
  NodeIndex node = 0;
  bool up = false;  // false: crash, true: restart
  std::uint64_t cycle = 0;

  friend bool operator==(const FaultEvent&, const FaultEvent&) = default;
};

struct SimTransport {
  swarm::NodeTiming timing{};
  swarm::Millis delay_min{1};
  swarm::Millis delay_max{1};
  double drop_probability = 0.0;
};

struct TcpTransport {
  std::uint16_t base_port = 47100;
  std::vector<std::string> peers;  // host per node; empty = all loopback
  swarm::NodeTiming timing{swarm::Millis{2000}, swarm::Millis{250}, 3, swarm::Millis{20}};

  std::string host(std::size_t i) const { return i < peers.size() ? peers[i] : "127.0.0.1"; }
};

struct ScenarioConfig {
  std::string name = "unnamed";
  std::size_t n_receivers = 3;
  std::uint64_t seed = 1;
  std::uint64_t cycles = 0;  // 0: last jammer segment start + frames_per_segment
  std::uint64_t frames_per_segment = 40;
  std::size_t payload_bits = 256;
  double frame_duration_s = 1e-3;
  channel::PowerDbm tx_power{0.0};
  double noise_sigma2 = 0.01;
  double ber_threshold = 0.05;
  selfheal::GoodRule good_rule = selfheal::GoodRule::BerAtMost;
  selfheal::JammerCsi jammer_csi = selfheal::JammerCsi::Estimated;
  phy::PreambleConfig preamble{};
  double detection_ratio = 4.0;
  std::size_t max_delay = 16;
  double cfo_max = 0.0;
  channel::ChannelModel channel = channel::FixedTaps{};
  channel::JammerSchedule jammer{{channel::JammerSegment{}}};
  PayloadSource payload_source = PayloadSource::Random;
  std::string image = "synthetic";  // or a PGM path
  std::size_t image_width = 64;
  std::size_t image_height = 64;
  SimTransport sim{};
  TcpTransport tcp{};
  std::size_t report_window = 500;
  std::vector<FaultEvent> faults;

  std::uint64_t total_cycles() const {
    if (cycles > 0) return cycles;
    const auto& s = jammer.segments;
    return (s.empty() ? 0 : s.back().start_cycle) + frames_per_segment;
  }

  selfheal::HealConfig heal_config() const {
    selfheal::HealConfig h;
    h.ber_threshold = ber_threshold;
    h.n_total = n_receivers;
    h.rule = good_rule;
    h.payload_bits = payload_bits;
    h.frame_duration_s = frame_duration_s;
    return h;
  }

  // Every invariant violation, not just the first.
  std::vector<std::string> problems() const;
  void validate() const {
    auto p = problems();
    if (!p.empty()) throw ConfigError(std::move(p));
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

template <typename T>
std::optional<T> parse_num(const std::string& s) {
  T v{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || p != last) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) return std::nullopt;
  return v;
}

// "mag@deg", "mag" or "re+imj" is not accepted; polar form only.
inline std::optional<cf64> parse_tap(const std::string& s) {
  const auto at = s.find('@');
  const auto mag = parse_num<double>(s.substr(0, at));
  if (!mag) return std::nullopt;
  double deg = 0.0;
  if (at != std::string::npos) {
    const auto d = parse_num<double>(s.substr(at + 1));
    if (!d) return std::nullopt;
    deg = *d;
  }
  return std::polar(*mag, deg * kPi / 180.0);
}

inline std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

inline std::string fmt_tap(cf64 z) {
  double deg = std::arg(z) * 180.0 / kPi;
  if (std::abs(deg) < 1e-12) deg = 0.0;
  return fmt(std::abs(z)) + "@" + fmt(deg);
}

// Gains as sparse "branch:gain" pairs; branches past the list are unjammed.
inline std::optional<std::vector<double>> parse_gains(const std::vector<std::string>& toks, std::size_t from,
                                                      std::string& err) {
  std::vector<double> g;
  for (std::size_t k = from; k < toks.size(); ++k) {
    const auto colon = toks[k].find(':');
    if (colon == std::string::npos) {
      err = "expected branch:gain, got '" + toks[k] + "'";
      return std::nullopt;
    }
    const auto b = parse_num<std::size_t>(toks[k].substr(0, colon));
    const auto v = parse_num<double>(toks[k].substr(colon + 1));
    if (!b || !v) {
      err = "bad gain entry '" + toks[k] + "'";
      return std::nullopt;
    }
    if (*b > 4096) {
      err = "branch index " + std::to_string(*b) + " is absurd";
      return std::nullopt;
    }
    if (g.size() <= *b) g.resize(*b + 1, 0.0);
    g[*b] = *v;
  }
  return g;
}

inline std::string fmt_gains(const std::vector<double>& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == 0.0) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + ":" + fmt(g[i]);
  }
  return out;
}

inline std::optional<channel::JammerPower> parse_power(const std::string& s) {
  if (s == "off") return channel::JammerPower{};
  if (auto v = parse_num<double>(s)) return channel::JammerPower{channel::PowerDbm{*v}};
  return std::nullopt;
}

struct ChannelDraft {
  std::string model = "fixed";
  std::vector<cf64> taps;
  double mean_power = 1.0;
  double period = 200.0;
  double depth_db = 6.0;
};

}  // namespace detail

/// Stateful parser: feed lines (file) then `--set` overrides, then finish().
class ScenarioParser {
 public:
  ScenarioParser() { install(); }
  ScenarioParser(const ScenarioParser&) = delete;
  ScenarioParser& operator=(const ScenarioParser&) = delete;

  void parse_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    enum class Section { Main, Jammer, Faults } section = Section::Main;
    bool jammer_table_seen = false;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string where = origin + ":" + std::to_string(lineno);
      std::string line = raw.substr(0, raw.find('#'));
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line == "[jammer]") {
          section = Section::Jammer;
          if (!jammer_table_seen) cfg_.jammer.segments.clear();
          jammer_table_seen = true;
        } else if (line == "[faults]") {
          section = Section::Faults;
        } else {
          problems_.push_back(where + ": unknown section " + line);
        }
        continue;
      }
      switch (section) {
        case Section::Main: {
          const auto eq = line.find('=');
          if (eq == std::string::npos) {
            problems_.push_back(where + ": expected 'key = value'");
            break;
          }
          set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), where);
          break;
        }
        case Section::Jammer: jammer_row(line, where); break;
        case Section::Faults: fault_row(line, where); break;
      }
    }
  }

  // key=value from the command line. jammer.<i>.{start,power_dbm,gains} edit table rows.
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      problems_.push_back("--set " + kv + ": expected key=value");
      return;
    }
    set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)), "--set");
  }

  ScenarioConfig finish() {
    cfg_.channel = build_channel();
    auto p = problems_;
    for (auto& q : cfg_.problems()) p.push_back(std::move(q));
    if (!p.empty()) throw ConfigError(std::move(p));
    return cfg_;
  }

  static std::vector<std::string> known_keys() {
    ScenarioParser p;
    std::vector<std::string> out;
    for (const auto& [k, _] : p.setters_) out.push_back(k);
    return out;
  }

 private:
  using Setter = std::function<std::optional<std::string>(const std::string&)>;

  void set(const std::string& key, const std::string& value, const std::string& where) {
    if (key.rfind("jammer.", 0) == 0) {
      jammer_override(key, value, where);
      return;
    }
    const auto it = setters_.find(key);
    if (it == setters_.end()) {
      problems_.push_back(where + ": unknown key '" + key + "'");
      return;
    }
    if (auto err = it->second(value)) problems_.push_back(where + ": " + key + ": " + *err);
  }

  template <typename T>
  Setter num(T& dst) {
    return [&dst](const std::string& v) -> std::optional<std::string> {
      auto n = detail::parse_num<T>(v);
      if (!n) return "not a valid number: '" + v + "'";
      dst = *n;
      return std::nullopt;
    };
  }

  Setter millis(swarm::Millis& dst) {
    return [&dst](const std::string& v) -> std::optional<std::string> {
      auto n = detail::parse_num<std::int64_t>(v);
      if (!n) return "not an integer millisecond count: '" + v + "'";
      dst = swarm::Millis{*n};
      return std::nullopt;
    };
  }

  void install() {
    auto& c = cfg_;
    setters_["name"] = [&c](const std::string& v) -> std::optional<std::string> {
      if (v.empty()) return "must not be empty";
      c.name = v;
      return std::nullopt;
    };
    setters_["n_receivers"] = num(c.n_receivers);
    setters_["seed"] = num(c.seed);
    setters_["cycles"] = num(c.cycles);
    setters_["frames_per_segment"] = num(c.frames_per_segment);
    setters_["payload_bits"] = num(c.payload_bits);
    setters_["frame_duration_s"] = num(c.frame_duration_s);
    setters_["tx_power_dbm"] = num(c.tx_power.value);
    setters_["noise_sigma2"] = num(c.noise_sigma2);
    setters_["ber_threshold"] = num(c.ber_threshold);
    setters_["good_branch_rule"] = [&c](const std::string& v) -> std::optional<std::string> {
      if (v == "ber_at_most") c.good_rule = selfheal::GoodRule::BerAtMost;
      else if (v == "ber_above") c.good_rule = selfheal::GoodRule::BerAbove;
      else return "expected ber_at_most or ber_above";
      return std::nullopt;
    };
    setters_["jammer_csi"] = [&c](const std::string& v) -> std::optional<std::string> {
      if (v == "estimated") c.jammer_csi = selfheal::JammerCsi::Estimated;
      else if (v == "genie") c.jammer_csi = selfheal::JammerCsi::Genie;
      else return "expected estimated or genie";
      return std::nullopt;
    };
    setters_["preamble.root"] = num(c.preamble.root);
    setters_["preamble.length"] = num(c.preamble.length);
    setters_["sync.detection_ratio"] = num(c.detection_ratio);
    setters_["sync.max_delay"] = num(c.max_delay);
    setters_["sync.cfo_max"] = num(c.cfo_max);
    setters_["channel.model"] = [this](const std::string& v) -> std::optional<std::string> {
      if (v != "fixed" && v != "fading" && v != "trajectory") return "expected fixed, fading or trajectory";
      draft_.model = v;
      return std::nullopt;
    };
    setters_["channel.taps"] = [this](const std::string& v) -> std::optional<std::string> {
      std::vector<cf64> taps;
      for (const auto& t : detail::split_ws(v)) {
        auto z = detail::parse_tap(t);
        if (!z) return "bad tap '" + t + "' (expected magnitude@degrees)";
        taps.push_back(*z);
      }
      draft_.taps = std::move(taps);
      return std::nullopt;
    };
    setters_["channel.mean_power"] = num(draft_.mean_power);
    setters_["channel.trajectory_period"] = num(draft_.period);
    setters_["channel.trajectory_depth_db"] = num(draft_.depth_db);
    setters_["payload.source"] = [&c](const std::string& v) -> std::optional<std::string> {
      if (v == "random") c.payload_source = PayloadSource::Random;
      else if (v == "image") c.payload_source = PayloadSource::Image;
      else return "expected random or image";
      return std::nullopt;
    };
    setters_["payload.image"] = [&c](const std::string& v) -> std::optional<std::string> {
      if (v.empty()) return "must not be empty";
      c.image = v;
      return std::nullopt;
    };
    setters_["payload.width"] = num(c.image_width);
    setters_["payload.height"] = num(c.image_height);
    setters_["swarm.t_report_ms"] = millis(c.sim.timing.t_report);
    setters_["swarm.t_heartbeat_ms"] = millis(c.sim.timing.t_heartbeat);
    setters_["swarm.k_heartbeat"] = num(c.sim.timing.k_heartbeat);
    setters_["swarm.cycle_gap_ms"] = millis(c.sim.timing.cycle_gap);
    setters_["swarm.delay_min_ms"] = millis(c.sim.delay_min);
    setters_["swarm.delay_max_ms"] = millis(c.sim.delay_max);
    setters_["swarm.drop_probability"] = num(c.sim.drop_probability);
    setters_["tcp.base_port"] = num(c.tcp.base_port);
    setters_["tcp.peers"] = [&c](const std::string& v) -> std::optional<std::string> {
      c.tcp.peers = detail::split_ws(v);
      return std::nullopt;
    };
    setters_["tcp.t_report_ms"] = millis(c.tcp.timing.t_report);
    setters_["tcp.t_heartbeat_ms"] = millis(c.tcp.timing.t_heartbeat);
    setters_["tcp.k_heartbeat"] = num(c.tcp.timing.k_heartbeat);
    setters_["tcp.cycle_gap_ms"] = millis(c.tcp.timing.cycle_gap);
    setters_["report.window"] = num(c.report_window);
  }

  // "<start> <power_dbm|off> [branch:gain ...]"
  void jammer_row(const std::string& line, const std::string& where) {
    const auto toks = detail::split_ws(line);
    const std::string field = "jammer[" + std::to_string(cfg_.jammer.segments.size()) + "]";
    if (toks.size() < 2) {
      problems_.push_back(where + ": " + field + ": expected '<start> <power_dbm|off> [branch:gain ...]'");
      return;
    }
    channel::JammerSegment seg;
    bool ok = true;
    if (auto s = detail::parse_num<std::uint64_t>(toks[0])) seg.start_cycle = *s;
    else problems_.push_back(where + ": " + field + ".start: not a cycle number: '" + toks[0] + "'"), ok = false;
    if (auto p = detail::parse_power(toks[1])) seg.power = *p;
    else problems_.push_back(where + ": " + field + ".power: expected dBm or 'off', got '" + toks[1] + "'"), ok = false;
    std::string err;
    if (auto g = detail::parse_gains(toks, 2, err)) seg.gains = *g;
    else problems_.push_back(where + ": " + field + ".gains: " + err), ok = false;
    if (ok) cfg_.jammer.segments.push_back(std::move(seg));
  }

  // "<node> down|up <cycle>"
  void fault_row(const std::string& line, const std::string& where) {
    const auto toks = detail::split_ws(line);
    const std::string field = "faults[" + std::to_string(cfg_.faults.size()) + "]";
    const auto node = toks.size() == 3 ? detail::parse_num<NodeIndex>(toks[0]) : std::nullopt;
    const auto cyc = toks.size() == 3 ? detail::parse_num<std::uint64_t>(toks[2]) : std::nullopt;
    if (!node || !cyc || (toks[1] != "down" && toks[1] != "up")) {
      problems_.push_back(where + ": " + field + ": expected '<node> down|up <cycle>'");
      return;
    }
    cfg_.faults.push_back({*node, toks[1] == "up", *cyc});
  }

  void jammer_override(const std::string& key, const std::string& value, const std::string& where) {
    // jammer.<i>.<field>
    const auto dot = key.find('.', 7);
    const auto idx = dot == std::string::npos ? std::nullopt : detail::parse_num<std::size_t>(key.substr(7, dot - 7));
    if (!idx) {
      problems_.push_back(where + ": unknown key '" + key + "' (expected jammer.<index>.<field>)");
      return;
    }
    const std::string field = key.substr(dot + 1);
    auto& segs = cfg_.jammer.segments;
    if (*idx > segs.size()) {
      problems_.push_back(where + ": " + key + ": segment " + std::to_string(*idx) + " does not exist (have " +
                          std::to_string(segs.size()) + ")");
      return;
    }
    if (*idx == segs.size()) segs.emplace_back();
    auto& seg = segs[*idx];
    std::string err;
    if (field == "start") {
      if (auto s = detail::parse_num<std::uint64_t>(value)) seg.start_cycle = *s;
      else problems_.push_back(where + ": " + key + ": not a cycle number");
    } else if (field == "power_dbm") {
      if (auto p = detail::parse_power(value)) seg.power = *p;
      else problems_.push_back(where + ": " + key + ": expected dBm or 'off'");
    } else if (field == "gains") {
      if (auto g = detail::parse_gains(detail::split_ws(value), 0, err)) seg.gains = *g;
      else problems_.push_back(where + ": " + key + ": " + err);
    } else {
      problems_.push_back(where + ": unknown key '" + key + "'");
    }
  }

  channel::ChannelModel build_channel() {
    if (draft_.model == "fading") return channel::RayleighFading{draft_.mean_power};
    std::vector<cf64> taps = draft_.taps;
    if (taps.empty()) taps.assign(cfg_.n_receivers, cf64{1.0, 0.0});
    if (draft_.model == "trajectory") return channel::GainTrajectory{taps, draft_.period, draft_.depth_db};
    return channel::FixedTaps{taps};
  }

  ScenarioConfig cfg_;
  detail::ChannelDraft draft_;
  std::map<std::string, Setter> setters_;
  std::vector<std::string> problems_;
};

inline std::vector<std::string> ScenarioConfig::problems() const {
  std::vector<std::string> p;
  auto need = [&p](bool ok, const std::string& msg) {
    if (!ok) p.push_back(msg);
  };
  need(n_receivers >= 1, "n_receivers: must be >= 1");
  need(n_receivers <= 64, "n_receivers: at most 64 receivers are supported");
  need(frames_per_segment >= 1, "frames_per_segment: must be >= 1");
  need(payload_bits >= 2, "payload_bits: must be >= 2");
  need(payload_bits <= 65536, "payload_bits: at most 65536");
  need(frame_duration_s > 0.0, "frame_duration_s: must be positive");
  need(noise_sigma2 >= 0.0, "noise_sigma2: must be >= 0");
  need(ber_threshold > 0.0 && ber_threshold < 0.5, "ber_threshold: must lie in (0, 0.5)");
  need(preamble.length >= 2, "preamble.length: must be >= 2");
  need(preamble.root >= 1 && preamble.root < preamble.length && std::gcd(preamble.root, preamble.length) == 1,
       "preamble.root: must be < preamble.length and coprime with it");
  need(detection_ratio >= 1.0, "sync.detection_ratio: must be >= 1");
  need(max_delay <= 4096, "sync.max_delay: at most 4096 samples");
  need(cfo_max >= 0.0 && cfo_max < kPi / static_cast<double>(std::max<std::uint32_t>(preamble.length / 2, 1)),
       "sync.cfo_max: must be >= 0 and below pi / (preamble.length / 2) to stay unambiguous");
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, channel::RayleighFading>) {
          need(m.mean_power > 0.0, "channel.mean_power: must be positive");
        } else {
          const auto& taps = [&]() -> const std::vector<cf64>& {
            if constexpr (std::is_same_v<M, channel::FixedTaps>) return m.taps;
            else return m.base;
          }();
          need(taps.size() == n_receivers, "channel.taps: " + std::to_string(taps.size()) + " taps for " +
                                               std::to_string(n_receivers) + " receivers");
          for (auto t : taps) need(std::isfinite(t.real()) && std::isfinite(t.imag()), "channel.taps: must be finite");
          if constexpr (std::is_same_v<M, channel::GainTrajectory>) {
            need(m.period_cycles > 0.0, "channel.trajectory_period: must be positive");
            need(std::isfinite(m.depth_db), "channel.trajectory_depth_db: must be finite");
          }
        }
      },
      channel);
  for (auto& q : jammer.validate(n_receivers)) p.push_back(std::move(q));
  need(image_width >= 1 && image_height >= 1, "payload.width/height: must be >= 1");
  need(image_width * image_height <= (1u << 20), "payload.width/height: image larger than 1 Mpixel");
  need(sim.delay_min.count() >= 1 && sim.delay_max >= sim.delay_min, "swarm.delay_*_ms: need 1 <= min <= max");
  need(sim.drop_probability >= 0.0 && sim.drop_probability < 1.0, "swarm.drop_probability: must lie in [0, 1)");
  for (const auto* t : {&sim.timing, &tcp.timing}) {
    need(t->t_report.count() >= 1 && t->t_heartbeat.count() >= 1, "timeouts: must be >= 1 ms");
    need(t->k_heartbeat >= 1, "k_heartbeat: must be >= 1");
    need(t->cycle_gap.count() >= 0, "cycle_gap_ms: must be >= 0");
  }
  need(tcp.peers.empty() || tcp.peers.size() == n_receivers,
       "tcp.peers: " + std::to_string(tcp.peers.size()) + " hosts for " + std::to_string(n_receivers) + " receivers");
  need(static_cast<std::size_t>(tcp.base_port) + n_receivers <= 65536, "tcp.base_port: port range overflows");
  need(report_window >= 1, "report.window: must be >= 1");
  for (std::size_t i = 0; i < faults.size(); ++i)
    need(faults[i].node < n_receivers, "faults[" + std::to_string(i) + "]: node " + std::to_string(faults[i].node) +
                                           " but there are only " + std::to_string(n_receivers) + " receivers");
  return p;
}

inline ScenarioConfig parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {},
                                     const std::string& origin = "<text>") {
  ScenarioParser parser;
  parser.parse_text(text, origin);
  for (const auto& o : overrides) parser.apply_override(o);
  return parser.finish();
}

// Raised when the scenario file itself cannot be opened.
class ScenarioNotFound : public IoError {
 public:
  using IoError::IoError;
};

inline ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ScenarioNotFound("scenario not found: '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), overrides, path);
}

/// Resolved configuration in the same grammar; parse_scenario(describe(c)) == c.
inline std::string describe(const ScenarioConfig& c) {
  std::ostringstream o;
  using detail::fmt;
  o << "name = " << c.name << "\n";
  o << "n_receivers = " << c.n_receivers << "\n";
  o << "seed = " << c.seed << "\n";
  o << "cycles = " << c.cycles << "\n";
  o << "frames_per_segment = " << c.frames_per_segment << "\n";
  o << "payload_bits = " << c.payload_bits << "\n";
  o << "frame_duration_s = " << fmt(c.frame_duration_s) << "\n";
  o << "tx_power_dbm = " << fmt(c.tx_power.value) << "\n";
  o << "noise_sigma2 = " << fmt(c.noise_sigma2) << "\n";
  o << "ber_threshold = " << fmt(c.ber_threshold) << "\n";
  o << "good_branch_rule = " << (c.good_rule == selfheal::GoodRule::BerAtMost ? "ber_at_most" : "ber_above") << "\n";
  o << "jammer_csi = " << (c.jammer_csi == selfheal::JammerCsi::Estimated ? "estimated" : "genie") << "\n";
  o << "preamble.root = " << c.preamble.root << "\n";
  o << "preamble.length = " << c.preamble.length << "\n";
  o << "sync.detection_ratio = " << fmt(c.detection_ratio) << "\n";
  o << "sync.max_delay = " << c.max_delay << "\n";
  o << "sync.cfo_max = " << fmt(c.cfo_max) << "\n";
  std::visit(
      [&o](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        auto taps = [&o](const std::vector<cf64>& t) {
          o << "channel.taps =";
          for (auto z : t) o << ' ' << detail::fmt_tap(z);
          o << "\n";
        };
        if constexpr (std::is_same_v<M, channel::FixedTaps>) {
          o << "channel.model = fixed\n";
          taps(m.taps);
        } else if constexpr (std::is_same_v<M, channel::RayleighFading>) {
          o << "channel.model = fading\nchannel.mean_power = " << detail::fmt(m.mean_power) << "\n";
        } else {
          o << "channel.model = trajectory\n";
          taps(m.base);
          o << "channel.trajectory_period = " << detail::fmt(m.period_cycles) << "\n";
          o << "channel.trajectory_depth_db = " << detail::fmt(m.depth_db) << "\n";
        }
      },
      c.channel);
  o << "payload.source = " << (c.payload_source == PayloadSource::Random ? "random" : "image") << "\n";
  o << "payload.image = " << c.image << "\n";
  o << "payload.width = " << c.image_width << "\n";
  o << "payload.height = " << c.image_height << "\n";
  o << "swarm.t_report_ms = " << c.sim.timing.t_report.count() << "\n";
  o << "swarm.t_heartbeat_ms = " << c.sim.timing.t_heartbeat.count() << "\n";
  o << "swarm.k_heartbeat = " << c.sim.timing.k_heartbeat << "\n";
  o << "swarm.cycle_gap_ms = " << c.sim.timing.cycle_gap.count() << "\n";
  o << "swarm.delay_min_ms = " << c.sim.delay_min.count() << "\n";
  o << "swarm.delay_max_ms = " << c.sim.delay_max.count() << "\n";
  o << "swarm.drop_probability = " << fmt(c.sim.drop_probability) << "\n";
  o << "tcp.base_port = " << c.tcp.base_port << "\n";
  o << "tcp.peers =";
  for (const auto& p : c.tcp.peers) o << ' ' << p;
  o << "\n";
  o << "tcp.t_report_ms = " << c.tcp.timing.t_report.count() << "\n";
  o << "tcp.t_heartbeat_ms = " << c.tcp.timing.t_heartbeat.count() << "\n";
  o << "tcp.k_heartbeat = " << c.tcp.timing.k_heartbeat << "\n";
  o << "tcp.cycle_gap_ms = " << c.tcp.timing.cycle_gap.count() << "\n";
  o << "report.window = " << c.report_window << "\n";
  o << "\n[jammer]\n";
  for (const auto& s : c.jammer.segments) {
    o << s.start_cycle << ' ' << (s.power ? fmt(s.power->value) : std::string("off"));
    const auto g = detail::fmt_gains(s.gains);
    if (!g.empty()) o << ' ' << g;
    o << "\n";
  }
  if (!c.faults.empty()) {
    o << "\n[faults]\n";
    for (const auto& f : c.faults) o << f.node << (f.up ? " up " : " down ") << f.cycle << "\n";
  }
  return o.str();
}

}  // namespace swarmrx::scenario

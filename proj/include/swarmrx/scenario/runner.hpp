#pragma once

// Drives a whole scenario on the deterministic in-process transport: one
// SwarmNode per receiver, each running the real frontend and the real healer.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swarmrx/scenario/config.hpp"
#include "swarmrx/scenario/frontend.hpp"
#include "swarmrx/scenario/image.hpp"
#include "swarmrx/scenario/trace.hpp"
#include "swarmrx/swarm/inprocess.hpp"

namespace swarmrx::scenario {

// The leader-side step shared by the simulator and the TCP node.
inline selfheal::CombinerDecision heal_reports(const ScenarioConfig& cfg, const Transmitter& tx, std::uint64_t cycle,
                                               const std::vector<selfheal::BranchReport>& reports) {
  const BitStream reference = tx.payload(cycle);
  auto bs = selfheal::build_branch_set(reports, cfg.jammer_csi);
  if (cfg.jammer_csi == selfheal::JammerCsi::Genie) bs.sigma2 = std::max(cfg.noise_sigma2, 1e-12);
  auto h = cfg.heal_config();
  h.n_total = reports.size();
  auto d = selfheal::heal_cycle(reports, bs, reference, h);
  d.cycle = cycle;
  return d;
}

// Branches that did not take part in the decision are reported as BER 1, rate 0.
inline CycleRecord record_from(const swarm::DecisionEvent& ev, std::size_t n_receivers, double frame_duration_s) {
  const auto& d = ev.payload.decision;
  CycleRecord r;
  r.cycle = d.cycle;
  r.leader = ev.leader;
  r.algorithm = d.algorithm;
  r.n_s = d.n_s;
  r.alive_count = static_cast<std::uint32_t>(d.participants.size());
  r.combined_ber = d.combined_ber;
  r.combined_rate = d.data_rate;
  r.per_branch_ber.assign(n_receivers, 1.0);
  r.per_branch_rate.assign(n_receivers, 0.0);
  for (std::size_t k = 0; k < d.participants.size(); ++k) {
    const auto b = d.participants[k];
    if (b >= n_receivers) continue;
    r.per_branch_ber[b] = d.branch_bers[k];
    r.per_branch_rate[b] = selfheal::data_rate(d.branch_bers[k], d.frame_bits, frame_duration_s);
  }
  return r;
}

struct SegmentImages {
  std::size_t segment = 0;
  ImagePayload combined;
  std::vector<ImagePayload> branches;
  double combined_psnr = 0.0;
  std::vector<double> branch_psnr;
};

struct ScenarioResult {
  std::vector<CycleRecord> records;
  std::vector<swarm::DecisionEvent> decisions;  // first recording per cycle, in cycle order
  std::vector<std::string> events;
  bool swarm_lost = false;
  std::string lost_reason;
  std::vector<SegmentImages> images;
  // branch_bits[cycle][branch]: what each receiver demodulated (empty when lost or down)
  std::map<std::uint64_t, std::vector<BitStream>> branch_bits;
  std::set<std::uint64_t> leader_conflicts;  // cycles in which two nodes led at once
};

class ScenarioRunner {
 public:
  explicit ScenarioRunner(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    tx_ = std::make_shared<const Transmitter>(cfg_);
    frontend_ = std::make_unique<Frontend>(cfg_, tx_);
  }

  ScenarioResult run() {
    ScenarioResult res;
    const std::size_t n = cfg_.n_receivers;
    const std::uint64_t total = cfg_.total_cycles();
    swarm::NetworkConfig net_cfg{cfg_.sim.delay_min, cfg_.sim.delay_max, cfg_.sim.drop_probability, cfg_.seed};
    std::map<std::uint64_t, swarm::DecisionEvent> first;

    swarm::InProcessNetwork net(n, net_cfg, [&](NodeIndex i, swarm::Outbox& out) {
      swarm::NodeHooks hooks;
      hooks.make_report = [this, i, &res](std::uint64_t c) {
        auto rep = frontend_->receive(i, c);
        auto& slot = res.branch_bits[c];
        slot.resize(cfg_.n_receivers);
        slot[i] = rep.payload_bits;
        return rep;
      };
      hooks.heal = [this](std::uint64_t c, const std::vector<selfheal::BranchReport>& reps) {
        return heal_reports(cfg_, *tx_, c, reps);
      };
      hooks.on_decision = [&first](const swarm::DecisionEvent& ev) { first.emplace(ev.payload.decision.cycle, ev); };
      hooks.on_event = [&res](const std::string& e) { res.events.push_back(e); };
      return std::make_unique<swarm::SwarmNode>(i, n, cfg_.sim.timing, std::move(hooks), out);
    });

    auto faults = cfg_.faults;
    std::stable_sort(faults.begin(), faults.end(), [](const auto& a, const auto& b) { return a.cycle < b.cycle; });
    std::size_t next_fault = 0;
    auto current_cycle = [&first]() -> std::uint64_t { return first.empty() ? 0 : first.rbegin()->first + 1; };
    auto apply_faults = [&] {
      while (next_fault < faults.size() && faults[next_fault].cycle <= current_cycle()) {
        const auto& f = faults[next_fault++];
        if (f.up && !net.is_up(f.node)) net.restart(f.node);
        if (!f.up && net.is_up(f.node)) net.kill(f.node);
      }
    };

    net.start_all();
    apply_faults();
    // A healthy cycle takes a few virtual ms; allow generous headroom for timeouts.
    const auto t = cfg_.sim.timing;
    const swarm::Millis budget = (t.await_backstop() + t.t_report + t.silence_limit() + t.cycle_gap + cfg_.sim.delay_max * 4) *
                                 static_cast<std::int64_t>(total + 10);
    std::uint64_t seen = current_cycle();
    swarm::Millis last_progress = net.now();
    while (current_cycle() < total) {
      if (net.up_count() == 0) {
        res.swarm_lost = true;
        res.lost_reason = "swarm lost: every node is down at cycle " + std::to_string(current_cycle());
        break;
      }
      net.step();
      apply_faults();
      if (current_cycle() != seen) {
        seen = current_cycle();
        last_progress = net.now();
      }
      if (net.now() - last_progress > t.await_backstop() * 20 || net.now() > budget) {
        res.swarm_lost = true;
        res.lost_reason = "swarm lost: no decision for cycle " + std::to_string(current_cycle());
        break;
      }
    }

    res.leader_conflicts = net.leader_conflicts();
    for (const auto& [c, ev] : first) {
      if (c >= total) break;
      res.decisions.push_back(ev);
      res.records.push_back(record_from(ev, n, cfg_.frame_duration_s));
    }
    if (tx_->image()) build_images(res);
    return res;
  }

  const ScenarioConfig& config() const { return cfg_; }
  const Transmitter& transmitter() const { return *tx_; }

 private:
  void build_images(ScenarioResult& res) const {
    const auto& img = *tx_->image();
    const auto& segs = cfg_.jammer.segments;
    const std::size_t n = cfg_.n_receivers;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const std::uint64_t begin = segs[s].start_cycle;
      const std::uint64_t end = s + 1 < segs.size() ? segs[s + 1].start_cycle : cfg_.total_cycles();
      // Later frames overwrite earlier ones when a segment carries the image more than once.
      std::map<std::uint16_t, BitStream> comb;
      std::vector<std::map<std::uint16_t, BitStream>> br(n);
      for (const auto& ev : res.decisions) {
        const auto c = ev.payload.decision.cycle;
        if (c < begin || c >= end) continue;
        const auto seq = tx_->chunk_for(c);
        const auto& bits = ev.payload.decision.combined_bits;
        if (bits.size() == ev.payload.decision.frame_bits) comb[seq] = bits;
        if (auto it = res.branch_bits.find(c); it != res.branch_bits.end())
          for (std::size_t b = 0; b < n && b < it->second.size(); ++b)
            if (it->second[b].size() == ev.payload.decision.frame_bits) br[b][seq] = it->second[b];
      }
      auto assemble = [&](const std::map<std::uint16_t, BitStream>& m) {
        std::vector<ImageChunk> chunks;
        for (const auto& [seq, bits] : m) chunks.push_back({seq, bits});
        return bitstream_to_image(chunks, img.width, img.height, cfg_.payload_bits);
      };
      SegmentImages si;
      si.segment = s;
      si.combined = assemble(comb);
      si.combined_psnr = psnr(img, si.combined);
      for (std::size_t b = 0; b < n; ++b) {
        si.branches.push_back(assemble(br[b]));
        si.branch_psnr.push_back(psnr(img, si.branches.back()));
      }
      res.images.push_back(std::move(si));
    }
  }

  ScenarioConfig cfg_;
  std::shared_ptr<const Transmitter> tx_;
  std::unique_ptr<Frontend> frontend_;
};

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) { return ScenarioRunner(cfg).run(); }

}  // namespace swarmrx::scenario

#include "dftclk/faults.hpp"

#include "dftclk/capture.hpp"
#include "dftclk/parallel.hpp"
#include "fault_engine.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

namespace dftclk {

const char* model_name(FaultModel m) { return m == FaultModel::StuckAt ? "STUCK_AT" : "TRANSITION"; }

const char* polarity_name(const Fault& f)
{
  if (f.model == FaultModel::StuckAt) return f.stuck == Logic::Zero ? "SA0" : "SA1";
  return f.stuck == Logic::Zero ? "SLOW_TO_RISE" : "SLOW_TO_FALL";
}

const char* status_name(FaultStatus s)
{
  switch (s) {
  case FaultStatus::Undetected: return "UNDETECTED";
  case FaultStatus::Detected: return "DETECTED";
  case FaultStatus::AtpgUntestable: return "ATPG_UNTESTABLE";
  case FaultStatus::Aborted: return "ABORTED";
  }
  return "?";
}

std::vector<Fault> enumerate_faults(const Netlist& n, FaultModel model)
{
  std::vector<Fault> out;
  for (const auto& s : fault_sites(n)) {
    out.push_back({s, model, Logic::Zero});
    out.push_back({s, model, Logic::One});
  }
  return out;
}

// --- engine -----------------------------------------------------------------

namespace detail {

SimBlock make_block(const Netlist& n, const CaptureProcedure& proc, std::vector<Word3> initial_flops,
                    const std::vector<std::vector<Word3>>& frame_inputs, Word3 scan_en, std::uint64_t lanes)
{
  SimBlock b;
  b.steps = proc.steps();
  b.lanes = lanes;
  b.scan_en = scan_en;
  b.frames = simulate_frames(n, initial_flops, frame_inputs, scan_en, b.steps);
  b.captured_flop.assign(n.flops().size(), false);
  if (!b.steps.empty()) {
    std::vector<bool> last(n.domains().size(), false);
    for (DomainId d : b.steps.back()) last[d] = true;
    for (FlopId f = 0; f < n.flops().size(); ++f)
      b.captured_flop[f] = n.flops()[f].is_scan() && last[n.flops()[f].domain];
  }
  b.po_frame = proc.observe_frame();
  b.observe_po = !proc.io.outputs_masked && !n.primary_outputs().empty() && b.po_frame < b.frames.nets.size();
  return b;
}

Propagator::Propagator(const Netlist& n)
    : n_(n), faulty_(n.net_count()), touched_(n.net_count(), false), queued_(n.gates().size(), false)
{
}

std::uint64_t Propagator::detect(const SimBlock& b, const Fault& f)
{
  const std::size_t m = b.steps.size();
  if (m == 0 || b.lanes == 0) return 0;
  const NetId site = site_net(n_, f.site);
  const Word3 cap = b.frames.nets[m - 1][site];
  // Activation: the good value in the capture frame is the opposite of the stuck value.
  std::uint64_t active = b.lanes & (f.stuck == Logic::Zero ? cap.one : cap.zero);
  if (f.model == FaultModel::Transition) {
    if (m < 2) return 0;
    const Word3 launch = b.frames.nets[m - 2][site];
    active &= f.stuck == Logic::Zero ? launch.zero : launch.one;
    if (!active) return 0;
    return propagate_capture(b, f, active) & active;
  }
  if (m > 1) return full_stuck_at(b, f) & b.lanes;
  if (!active) return 0;
  return propagate_capture(b, f, active) & active;
}

std::uint64_t Propagator::propagate_capture(const SimBlock& b, const Fault& f, std::uint64_t)
{
  const std::size_t m = b.steps.size();
  const std::vector<Word3>& good = b.frames.nets[m - 1];
  const std::vector<Word3>& next = b.frames.states[m];
  const Word3 forced = Word3::constant(f.stuck);
  const auto& gates = n_.gates();
  const auto& rank = n_.topo_rank();
  const auto& order = n_.levelization();

  auto mark = [&](NetId net, Word3 v) {
    faulty_[net] = v;
    if (!touched_[net]) {
      touched_[net] = true;
      touched_list_.push_back(net);
    }
  };
  auto schedule = [&](GateId g) {
    if (!queued_[g]) {
      queued_[g] = true;
      heap_.push_back(rank[g]);
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    }
  };
  auto schedule_fanout = [&](NetId net) {
    for (const auto& fo : n_.fanouts(net))
      if (fo.kind == Fanout::Kind::GatePin) schedule(fo.element);
  };

  std::uint64_t diff = 0;
  auto flop_next = [&](FlopId fl, Word3 d) {
    const FlipFlop& ff = n_.flops()[fl];
    return ff.is_scan() ? w3_mux(d, value(good, *ff.scan_in), b.scan_en) : d;
  };

  GateId pin_gate = kNone;
  std::uint32_t pin_index = 0;
  switch (f.site.kind) {
  case FaultSite::Kind::GateOutput:
    mark(gates[f.site.element].output, forced);
    schedule_fanout(gates[f.site.element].output);
    break;
  case FaultSite::Kind::FlopQ:
    mark(n_.flops()[f.site.element].q, forced);
    schedule_fanout(n_.flops()[f.site.element].q);
    break;
  case FaultSite::Kind::GateInput:
    pin_gate = f.site.element;
    pin_index = f.site.pin;
    schedule(pin_gate);
    break;
  case FaultSite::Kind::FlopD:
    if (b.captured_flop[f.site.element]) diff |= w3_diff(next[f.site.element], flop_next(f.site.element, forced));
    break;
  }

  Word3 in[16];
  std::vector<Word3> wide;
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
    const GateId g = order[heap_.back()];
    heap_.pop_back();
    queued_[g] = false;
    const Gate& gate = gates[g];
    std::span<Word3> ins;
    if (gate.inputs.size() <= 16) {
      ins = std::span<Word3>(in, gate.inputs.size());
    } else {
      wide.resize(gate.inputs.size());
      ins = wide;
    }
    for (std::size_t i = 0; i < gate.inputs.size(); ++i) ins[i] = value(good, gate.inputs[i]);
    if (g == pin_gate) ins[pin_index] = forced;
    const Word3 out = eval_gate_word(gate.kind, ins);
    if (out != value(good, gate.output)) {
      mark(gate.output, out);
      schedule_fanout(gate.output);
    }
  }

  for (NetId net : touched_list_) {
    if (b.observe_po && b.po_frame == m - 1 && n_.is_output(net)) diff |= w3_diff(good[net], faulty_[net]);
    for (const auto& fo : n_.fanouts(net)) {
      if (fo.kind == Fanout::Kind::GatePin || !b.captured_flop[fo.element]) continue;
      const FlipFlop& ff = n_.flops()[fo.element];
      Word3 d = value(good, ff.d);
      if (f.site.kind == FaultSite::Kind::FlopD && f.site.element == fo.element) d = forced;
      diff |= w3_diff(next[fo.element], flop_next(fo.element, d));
    }
  }
  for (NetId net : touched_list_) touched_[net] = false;
  touched_list_.clear();
  return diff;
}

// Stuck-at faults under multi-pulse procedures are present in every frame.
std::uint64_t Propagator::full_stuck_at(const SimBlock& b, const Fault& f)
{
  const std::size_t m = b.steps.size();
  const Word3 forced = Word3::constant(f.stuck);
  const auto& gates = n_.gates();
  std::vector<Word3> state = b.frames.states[0];
  std::vector<Word3> nets(n_.net_count());
  std::vector<Word3> ins;
  std::uint64_t diff = 0;
  for (std::size_t fr = 0; fr <= m; ++fr) {
    const auto& good = b.frames.nets[std::min(fr, b.frames.nets.size() - 1)];
    for (NetId pi : n_.primary_inputs()) nets[pi] = good[pi];
    for (FlopId q = 0; q < n_.flops().size(); ++q) nets[n_.flops()[q].q] = state[q];
    if (f.site.kind == FaultSite::Kind::FlopQ) nets[n_.flops()[f.site.element].q] = forced;
    for (GateId g : n_.levelization()) {
      const Gate& gate = gates[g];
      ins.clear();
      for (NetId i : gate.inputs) ins.push_back(nets[i]);
      if (f.site.kind == FaultSite::Kind::GateInput && f.site.element == g) ins[f.site.pin] = forced;
      nets[gate.output] = eval_gate_word(gate.kind, ins);
      if (f.site.kind == FaultSite::Kind::GateOutput && f.site.element == g) nets[gate.output] = forced;
    }
    if (b.observe_po && fr == b.po_frame)
      for (NetId o : n_.primary_outputs()) diff |= w3_diff(good[o], nets[o]);
    if (fr == m) break;
    std::vector<bool> hit(n_.domains().size(), false);
    for (DomainId d : b.steps[fr]) hit[d] = true;
    for (FlopId q = 0; q < n_.flops().size(); ++q) {
      const FlipFlop& ff = n_.flops()[q];
      if (!hit[ff.domain]) continue;
      Word3 d = nets[ff.d];
      if (f.site.kind == FaultSite::Kind::FlopD && f.site.element == q) d = forced;
      state[q] = ff.is_scan() ? w3_mux(d, nets[*ff.scan_in], b.scan_en) : d;
    }
  }
  for (FlopId q = 0; q < n_.flops().size(); ++q)
    if (n_.flops()[q].is_scan()) diff |= w3_diff(b.frames.states[m][q], state[q]);
  return diff;
}

}  // namespace detail

// --- pattern-set simulator --------------------------------------------------

struct FaultSimulator::Block {
  detail::SimBlock sim;
  std::vector<std::uint32_t> pattern;  // lane -> pattern index
};

FaultSimulator::~FaultSimulator() = default;
FaultSimulator::FaultSimulator(FaultSimulator&&) noexcept = default;
FaultSimulator& FaultSimulator::operator=(FaultSimulator&&) noexcept = default;

FaultSimulator::FaultSimulator(const Netlist& n, std::span<const Pattern> patterns) : n_(&n)
{
  std::vector<const CaptureProcedure*> procs;
  std::vector<std::vector<std::uint32_t>> members;
  for (std::uint32_t i = 0; i < patterns.size(); ++i) {
    const auto& proc = patterns[i].procedure;
    std::size_t k = 0;
    while (k < procs.size() && !(*procs[k] == proc)) ++k;
    if (k == procs.size()) {
      procs.push_back(&proc);
      members.emplace_back();
    }
    members[k].push_back(i);
  }
  lane_of_.assign(patterns.size(), {0, 0});
  for (std::size_t k = 0; k < procs.size(); ++k) {
    const CaptureProcedure& proc = *procs[k];
    const auto ticks = proc.step_ticks();
    const std::size_t frames = std::max<std::size_t>(ticks.size(), 1) + 1;
    for (std::size_t start = 0; start < members[k].size(); start += 64) {
      const std::size_t count = std::min<std::size_t>(64, members[k].size() - start);
      std::vector<Word3> flops(n.flops().size());
      std::vector<std::vector<Word3>> inputs(frames, std::vector<Word3>(n.primary_inputs().size()));
      Word3 se;
      Block blk;
      for (unsigned lane = 0; lane < count; ++lane) {
        const std::uint32_t pi = members[k][start + lane];
        const Pattern& p = patterns[pi];
        const CircuitState s = loaded_state(n, p);
        for (FlopId f = 0; f < flops.size(); ++f) flops[f].set_lane(lane, s.flops[f]);
        std::vector<Logic> cur = s.inputs;
        auto updates = p.pi_updates;
        std::stable_sort(updates.begin(), updates.end(),
                         [](const PiUpdate& a, const PiUpdate& b) { return a.tick < b.tick; });
        std::size_t u = 0;
        for (std::size_t fr = 0; fr < frames; ++fr) {
          const int limit = fr < ticks.size() ? ticks[fr] : std::numeric_limits<int>::max();
          while (u < updates.size() && updates[u].tick <= limit) {
            cur.at(updates[u].pi) = updates[u].value;
            ++u;
          }
          for (std::size_t i = 0; i < cur.size(); ++i) inputs[fr][i].set_lane(lane, cur[i]);
        }
        se.set_lane(lane, p.capture_scan_en);
        blk.pattern.push_back(pi);
        lane_of_[pi] = {static_cast<std::uint32_t>(blocks_.size()), lane};
      }
      const std::uint64_t lanes = count == 64 ? ~0ULL : ((1ULL << count) - 1);
      blk.sim = detail::make_block(n, proc, std::move(flops), inputs, se, lanes);
      blocks_.push_back(std::move(blk));
    }
  }
}

std::optional<std::uint32_t> FaultSimulator::detecting_pattern(const Fault& f, bool last) const
{
  detail::Propagator prop(*n_);
  std::optional<std::uint32_t> best;
  for (const auto& b : blocks_) {
    if (best && (last ? b.pattern.back() < *best : b.pattern.front() > *best)) continue;
    std::uint64_t mask = prop.detect(b.sim, f);
    while (mask) {
      const unsigned lane = static_cast<unsigned>(__builtin_ctzll(mask));
      mask &= mask - 1;
      const std::uint32_t p = b.pattern[lane];
      if (!best || (last ? p > *best : p < *best)) best = p;
    }
  }
  return best;
}

bool FaultSimulator::detects(const Fault& f, std::uint32_t pattern) const
{
  if (pattern >= lane_of_.size()) return false;
  const auto [blk, lane] = lane_of_[pattern];
  detail::Propagator prop(*n_);
  return (prop.detect(blocks_[blk].sim, f) >> lane) & 1U;
}

std::vector<std::uint32_t> FaultSimulator::all_detecting(const Fault& f) const
{
  detail::Propagator prop(*n_);
  std::vector<std::uint32_t> out;
  for (const auto& b : blocks_) {
    std::uint64_t mask = prop.detect(b.sim, f);
    while (mask) {
      const unsigned lane = static_cast<unsigned>(__builtin_ctzll(mask));
      mask &= mask - 1;
      out.push_back(b.pattern[lane]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FaultRecord> fault_simulate(const Netlist& n, std::span<const Pattern> patterns,
                                        std::span<const Fault> faults, const FaultSimOptions& options)
{
  std::vector<FaultRecord> out(faults.size());
  if (patterns.empty()) return out;
  FaultSimulator sim(n, patterns);
  parallel_for(faults.size(), options.jobs, [&](std::size_t i, unsigned) {
    if (auto p = sim.detecting_pattern(faults[i], options.credit_last)) out[i] = {FaultStatus::Detected, p};
  });
  return out;
}

// --- exhaustive oracle --------------------------------------------------------

std::size_t oracle_bits(const Netlist& n)
{
  std::size_t bits = n.scan_flop_count();
  for (std::size_t i = 0; i < n.primary_inputs().size(); ++i)
    if (!n.is_scan_only_input(i)) ++bits;
  return bits;
}

std::vector<Testability> brute_force_classify(const Netlist& n, std::span<const Fault> faults,
                                              ClockingRegime regime, unsigned jobs)
{
  const std::size_t bits = oracle_bits(n);
  if (bits > kOracleBitLimit)
    throw OracleBoundExceeded("circuit has " + std::to_string(bits) + " free bits, the exhaustive limit is " +
                              std::to_string(kOracleBitLimit));
  // Variables: scan cells in chain order, then the free primary inputs.
  std::vector<FlopId> cell_vars;
  for (const auto& c : n.chains())
    for (FlopId f : c.cells) cell_vars.push_back(f);
  std::vector<std::size_t> pi_vars;
  for (std::size_t i = 0; i < n.primary_inputs().size(); ++i)
    if (!n.is_scan_only_input(i)) pi_vars.push_back(i);

  const std::uint64_t total = 1ULL << bits;
  const auto lane_pattern = [](std::size_t var, std::uint64_t start) -> Word3 {
    static constexpr std::uint64_t kLow[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
                                              0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
    if (var < 6) return {kLow[var], ~kLow[var]};
    return Word3::constant(from_bool((start >> var) & 1U));
  };

  std::vector<bool> found(faults.size(), false);
  const unsigned workers = effective_workers(faults.size(), jobs);
  std::vector<detail::Propagator> props;
  props.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) props.emplace_back(n);

  constexpr std::size_t kChunk = 32;
  for (const auto& proc : legal_procedures(n, regime)) {
    const std::size_t frames = proc.steps().size() + 1;
    for (std::uint64_t base = 0; base < total; base += 64 * kChunk) {
      std::vector<detail::SimBlock> chunk;
      for (std::uint64_t start = base; start < total && start < base + 64 * kChunk; start += 64) {
        const std::uint64_t count = std::min<std::uint64_t>(64, total - start);
        const std::uint64_t lanes = count == 64 ? ~0ULL : ((1ULL << count) - 1);
        std::vector<Word3> flops(n.flops().size(), Word3::all_x());
        std::size_t var = 0;
        for (FlopId f : cell_vars) flops[f] = lane_pattern(var++, start);
        std::vector<Word3> pis(n.primary_inputs().size(), Word3::constant(Logic::Zero));
        for (std::size_t i : pi_vars) pis[i] = lane_pattern(var++, start);
        std::vector<std::vector<Word3>> inputs(frames, pis);
        chunk.push_back(detail::make_block(n, proc, std::move(flops), inputs, Word3::constant(Logic::Zero), lanes));
      }
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < faults.size(); ++i)
        if (!found[i]) open.push_back(i);
      if (open.empty()) break;
      std::vector<char> hit(open.size(), 0);
      parallel_for(open.size(), workers, [&](std::size_t k, unsigned w) {
        for (const auto& b : chunk)
          if (props[w].detect(b, faults[open[k]])) {
            hit[k] = 1;
            return;
          }
      });
      for (std::size_t k = 0; k < open.size(); ++k)
        if (hit[k]) found[open[k]] = true;
    }
  }
  std::vector<Testability> out;
  out.reserve(faults.size());
  for (bool f : found) out.push_back(f ? Testability::Testable : Testability::Untestable);
  return out;
}

Testability brute_force_classify(const Netlist& n, const Fault& fault, ClockingRegime regime)
{
  return brute_force_classify(n, std::span<const Fault>(&fault, 1), regime).front();
}

// --- statistics ----------------------------------------------------------------

std::int64_t percent_hundredths(std::size_t num, std::size_t den)
{
  if (den == 0) return 0;
  const auto n = static_cast<std::int64_t>(num);
  const auto d = static_cast<std::int64_t>(den);
  return (20000 * n + d) / (2 * d);
}

StatsReport compute_stats(std::span<const FaultRecord> records, std::size_t pattern_count)
{
  StatsReport s;
  s.total = records.size();
  s.pattern_count = pattern_count;
  for (const auto& r : records) {
    switch (r.status) {
    case FaultStatus::Detected: ++s.detected; break;
    case FaultStatus::Undetected: ++s.undetected; break;
    case FaultStatus::AtpgUntestable: ++s.untestable; break;
    case FaultStatus::Aborted: ++s.aborted; break;
    }
  }
  s.tc_hundredths = percent_hundredths(s.detected, s.total);
  s.eff_hundredths = percent_hundredths(s.detected + s.untestable, s.total);
  return s;
}

std::string dump_faults(const Netlist& n, std::span<const Fault> faults, std::span<const FaultRecord> records,
                        std::span<const Pattern> patterns)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < faults.size(); ++i) {
    const Fault& f = faults[i];
    os << site_name(n, f.site) << ' ' << model_name(f.model) << ' ' << polarity_name(f) << ' '
       << status_name(records[i].status);
    if (records[i].pattern) {
      const std::uint32_t p = *records[i].pattern;
      os << ' ' << (p < patterns.size() ? patterns[p].id : p);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dftclk

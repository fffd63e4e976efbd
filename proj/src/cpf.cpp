#include "dftclk/cpf.hpp"

#include <algorithm>
#include <sstream>

namespace dftclk {

void validate(const CpfConfig& c)
{
  if (c.pulse_count < 1 || c.pulse_count > 4)
    throw std::invalid_argument("pulse_count must be in 1..4, got " + std::to_string(c.pulse_count));
  if (c.latency_ticks < 1) throw std::invalid_argument("latency_ticks must be >= 1");
  if (c.pll_ratio < 1) throw std::invalid_argument("pll_ratio must be >= 1");
}

Logic pll_level(int pll_ratio, std::size_t half_tick)
{
  return from_bool((half_tick / static_cast<std::size_t>(pll_ratio)) % 2 == 0);
}

namespace {

int latch_tick(int trigger_edge_tick, int ratio) { return (trigger_edge_tick / ratio + 1) * ratio; }

// First tick at which scan_en may rise again without truncating the burst.
int burst_done_tick(const PulseSchedule& s, int ratio)
{
  return s.pulse_ticks.back() + (ratio + 1) / 2;
}

}  // namespace

BehavioralTrace behavioral_schedule(const CpfConfig& config, std::span<const Logic> scan_en,
                                    std::span<const Logic> scan_clk, bool enabled)
{
  validate(config);
  if (scan_en.size() != scan_clk.size()) throw std::invalid_argument("scan_en and scan_clk traces differ in length");
  const int r = config.pll_ratio;
  const int n = static_cast<int>(scan_en.size());

  BehavioralTrace out;
  out.clk_out.assign(scan_en.size() * 2, Logic::Zero);
  Logic prev_clk = Logic::Zero;
  bool armed_this_window = false;

  for (int k = 0; k < n; ++k) {
    const Logic se = scan_en[static_cast<std::size_t>(k)];
    const Logic sc = scan_clk[static_cast<std::size_t>(k)];
    if (se == Logic::X || sc == Logic::X) throw std::invalid_argument("behavioral model needs binary stimuli");
    const bool rising = prev_clk == Logic::Zero && sc == Logic::One;
    const bool burst_pending = !out.bursts.empty() && k < burst_done_tick(out.bursts.back(), r);

    if (se == Logic::One) {
      if (burst_pending) throw ProtocolViolation("scan_en raised before the burst completed", k);
      armed_this_window = false;
    } else if (rising && enabled) {
      if (armed_this_window) {
        if (burst_pending) throw ProtocolViolation("second scan_clk pulse before the burst completed", k);
      } else {
        armed_this_window = true;
        PulseSchedule s;
        s.trigger_tick = latch_tick(k, r);
        for (int i = 0; i < config.pulse_count; ++i)
          s.pulse_ticks.push_back(s.trigger_tick + r * (config.latency_ticks + i));
        out.bursts.push_back(std::move(s));
      }
    }
    prev_clk = sc;
    if (se == Logic::One) {
      out.clk_out[2 * static_cast<std::size_t>(k)] = sc;
      out.clk_out[2 * static_cast<std::size_t>(k) + 1] = sc;
    }
  }

  for (const auto& b : out.bursts) {
    for (int p : b.pulse_ticks) {
      for (int h = 2 * p; h < 2 * p + r; ++h) {
        if (h >= 2 * n) break;
        if (scan_en[static_cast<std::size_t>(h / 2)] == Logic::Zero) out.clk_out[static_cast<std::size_t>(h)] = Logic::One;
      }
    }
  }
  return out;
}

// --- structural -----------------------------------------------------------------

std::size_t StructuralCpf::filter_cell_count() const
{
  // trigger + shift register + enable AND + latch + gating AND + output mux
  return 1 + static_cast<std::size_t>(shift_stages) + 4;
}

std::size_t StructuralCpf::total_cell_count() const
{
  return circuit.gates().size() + circuit.storage().size();
}

StructuralCpf build_structural_cpf(const CpfConfig& config, int shift_stages_override)
{
  validate(config);
  StructuralCpf cpf;
  cpf.config = config;
  const int stages = shift_stages_override > 0 ? shift_stages_override : config.latency_ticks + config.pulse_count;
  if (stages <= config.latency_ticks) throw std::invalid_argument("shift register shorter than the latency tap");
  cpf.shift_stages = stages;

  ClockedCircuit& c = cpf.circuit;
  for (const char* in : {"pll_clk", "scan_clk", "scan_en", "cpf_en", "functional_mode"}) c.add_input(in);

  c.add_flop("trig", "cpf_en", "trig", "scan_clk", "scan_en");
  std::string prev = "trig";
  for (int i = 1; i <= stages; ++i) {
    const std::string q = "s" + std::to_string(i);
    c.add_flop(q, prev, q, "pll_clk", {}, i == stages ? q + "_n" : std::string());
    prev = q;
  }
  c.add_gate(GateKind::And, "hs_clk_en",
             {"s" + std::to_string(config.latency_ticks), "s" + std::to_string(stages) + "_n"});
  c.add_gate(GateKind::Or, "cgc_en", {"hs_clk_en", "functional_mode"});
  c.add_latch_low("cgc_latch", "cgc_en", "cgc_en_l", "pll_clk");
  c.add_gate(GateKind::And, "cgc_clk_out", {"cgc_en_l", "pll_clk"});
  c.add_gate(GateKind::Mux2, "clk_out", {"cgc_clk_out", "scan_clk", "scan_en"});
  c.finalize();
  return cpf;
}

namespace {

const std::vector<std::string> kRecorded = {"pll_clk", "scan_clk", "scan_en", "hs_clk_en", "cgc_clk_out", "clk_out"};

}  // namespace

TickWaveform simulate_cpf(const StructuralCpf& cpf, std::span<const Logic> scan_en,
                          std::span<const Logic> scan_clk, bool enabled)
{
  if (scan_en.size() != scan_clk.size()) throw std::invalid_argument("scan_en and scan_clk traces differ in length");
  TickWaveform stim;
  stim.add_ticks("scan_en", scan_en);
  stim.add_ticks("scan_clk", scan_clk);
  auto& pll = stim.add("pll_clk", scan_en.size() * 2);
  for (std::size_t h = 0; h < pll.size(); ++h) pll[h] = pll_level(cpf.config.pll_ratio, h);
  stim.add("cpf_en", scan_en.size() * 2, from_bool(enabled));
  stim.add("functional_mode", scan_en.size() * 2, Logic::Zero);
  return simulate_ticks(cpf.circuit, stim, kRecorded);
}

TickWaveform behavioral_waveform(const CpfConfig& config, std::span<const Logic> scan_en,
                                 std::span<const Logic> scan_clk, bool enabled)
{
  BehavioralTrace t = behavioral_schedule(config, scan_en, scan_clk, enabled);
  TickWaveform w;
  auto& pll = w.add("pll_clk", scan_en.size() * 2);
  for (std::size_t h = 0; h < pll.size(); ++h) pll[h] = pll_level(config.pll_ratio, h);
  w.add_ticks("scan_clk", scan_clk);
  w.add_ticks("scan_en", scan_en);
  w.add("clk_out", t.clk_out.size()) = t.clk_out;
  return w;
}

// --- scenarios ------------------------------------------------------------------

CpfScenario random_scenario(std::mt19937_64& rng, const CpfConfig& config)
{
  auto rnd = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int r = config.pll_ratio;
  const int register_len = config.latency_ticks + config.pulse_count;
  CpfScenario s;
  auto push = [&s](Logic se, Logic sc, int count) {
    for (int i = 0; i < count; ++i) {
      s.scan_en.push_back(se);
      s.scan_clk.push_back(sc);
    }
  };
  auto shift_block = [&](int len) {
    int used = 0;
    while (used < len) {
      const int low = rnd(1, 3);
      const int high = rnd(1, 3);
      push(Logic::One, Logic::Zero, low);
      push(Logic::One, Logic::One, high);
      used += low + high;
    }
    push(Logic::One, Logic::Zero, rnd(1, 3));
  };

  shift_block(rnd(0, 20));
  const int windows = rnd(1, 3);
  for (int w = 0; w < windows; ++w) {
    push(Logic::Zero, Logic::Zero, rnd(1, 4));
    if (rnd(0, 5) != 0) {
      const int k = static_cast<int>(s.scan_en.size());
      s.trigger_ticks.push_back(k);
      push(Logic::Zero, Logic::One, rnd(1, 3));
      const int latched = latch_tick(k, r);
      const int last = latched + r * (config.latency_ticks + config.pulse_count - 1);
      const int done = last + (r + 1) / 2 + rnd(0, 5);
      push(Logic::Zero, Logic::Zero, std::max(0, done - static_cast<int>(s.scan_en.size())));
    } else {
      push(Logic::Zero, Logic::Zero, rnd(1, 10));
    }
    // Let the shift register drain before the next window.
    shift_block(r * register_len + 2 + rnd(0, 12));
  }
  return s;
}

std::optional<std::size_t> EquivalenceReport::mismatch_tick() const
{
  if (!mismatch_half_tick) return std::nullopt;
  return *mismatch_half_tick / 2;
}

namespace {

// Burst exactness, latency and glitch-freedom on one structural trace.
void check_properties(const CpfConfig& cfg, const CpfScenario& sc, const TickWaveform& w,
                      std::vector<std::string>& problems)
{
  const auto& clk = w.at("clk_out");
  const auto& sclk = w.at("scan_clk");
  const int r = cfg.pll_ratio;
  const std::size_t halves = clk.size();
  std::vector<std::size_t> test_edges;
  for (std::size_t h = 0; h < halves; ++h) {
    const Logic prev = h == 0 ? Logic::Zero : clk[h - 1];
    if (clk[h] == Logic::X) {
      problems.push_back("clk_out is X at half-tick " + std::to_string(h));
      return;
    }
    if (!(prev == Logic::Zero && clk[h] == Logic::One)) continue;
    const bool shift_mode = sc.scan_en[h / 2] == Logic::One;
    if (shift_mode) {
      const Logic sprev = h == 0 ? Logic::Zero : sclk[h - 1];
      if (!(sprev == Logic::Zero && sclk[h] == Logic::One))
        problems.push_back("shift-mode clk_out edge without scan_clk edge at half-tick " + std::to_string(h));
      continue;
    }
    if (h % static_cast<std::size_t>(2 * r) != 0)
      problems.push_back("test-mode clk_out edge off the PLL rising edge at half-tick " + std::to_string(h));
    std::size_t len = 0;
    while (h + len < halves && clk[h + len] == Logic::One) ++len;
    if (len != static_cast<std::size_t>(r))
      problems.push_back("test-mode pulse width " + std::to_string(len) + " half-ticks at " + std::to_string(h));
    test_edges.push_back(h);
  }
  std::size_t used = 0;
  for (int k : sc.trigger_ticks) {
    const std::size_t latched = static_cast<std::size_t>(latch_tick(k, r));
    std::size_t count = 0;
    std::optional<std::size_t> first;
    for (std::size_t h : test_edges) {
      if (h / 2 < static_cast<std::size_t>(k)) continue;
      // Edges belonging to this trigger: before scan_en returns high.
      bool se_rose = false;
      for (std::size_t t = static_cast<std::size_t>(k); t <= h / 2; ++t)
        if (sc.scan_en[t] == Logic::One) se_rose = true;
      if (se_rose) break;
      if (!first) first = h / 2;
      ++count;
    }
    used += count;
    if (count != static_cast<std::size_t>(cfg.pulse_count))
      problems.push_back("trigger at tick " + std::to_string(k) + " produced " + std::to_string(count) + " pulses");
    if (first && *first - latched != static_cast<std::size_t>(r * cfg.latency_ticks))
      problems.push_back("trigger at tick " + std::to_string(k) + " first pulse after " +
                         std::to_string(*first - latched) + " ticks");
  }
  if (used != test_edges.size()) problems.push_back("test-mode pulses without a trigger");
}

}  // namespace

EquivalenceReport check_equivalence(const StructuralCpf& structural, const CpfConfig& behavioral,
                                    std::size_t scenarios, std::uint64_t seed)
{
  EquivalenceReport rep;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < scenarios; ++i) {
    CpfScenario sc = random_scenario(rng, behavioral);
    ++rep.scenarios;
    rep.bursts += sc.trigger_ticks.size();
    TickWaveform st = simulate_cpf(structural, sc.scan_en, sc.scan_clk);
    std::vector<Logic> expected;
    try {
      expected = behavioral_schedule(behavioral, sc.scan_en, sc.scan_clk).clk_out;
    } catch (const ProtocolViolation& e) {
      rep.pass = false;
      rep.failing_scenario = i;
      rep.failures.push_back(std::string("scenario generator broke the protocol: ") + e.what());
      rep.evidence = std::move(st);
      return rep;
    }
    const auto& got = st.at("clk_out");
    for (std::size_t h = 0; h < got.size(); ++h) {
      if (got[h] != expected[h]) {
        rep.pass = false;
        rep.failing_scenario = i;
        rep.mismatch_half_tick = h;
        std::ostringstream os;
        os << "scenario " << i << ": clk_out differs at tick " << h / 2 << (h % 2 ? ".5" : "")
           << " (structural " << to_char(got[h]) << ", behavioral " << to_char(expected[h]) << ")";
        rep.failures.push_back(os.str());
        st.add("clk_out_behavioral", expected.size()) = expected;
        rep.evidence = std::move(st);
        return rep;
      }
    }
    std::vector<std::string> problems;
    check_properties(behavioral, sc, st, problems);
    if (!problems.empty()) {
      rep.pass = false;
      rep.failing_scenario = i;
      for (auto& p : problems) rep.failures.push_back("scenario " + std::to_string(i) + ": " + p);
      rep.evidence = std::move(st);
      return rep;
    }
  }
  return rep;
}

}  // namespace dftclk

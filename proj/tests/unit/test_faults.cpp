#include "dftclk/capture.hpp"
#include "dftclk/faults.hpp"
#include "dftclk/sim.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace dftclk;

namespace {

Logic L(char c) { return logic_from_char(c); }

// Scalar reference for one pattern: good frames by repeated pulse_domains,
// faulty capture frame by a plain levelized pass with the fault forced.
bool reference_detects(const Netlist& n, const Pattern& p, const Fault& f)
{
  const auto steps = p.procedure.steps();
  const std::size_t m = steps.size();
  if (m == 0) return false;
  CircuitState s = loaded_state(n, p);
  std::vector<std::vector<Logic>> nets;
  std::vector<CircuitState> states{s};
  for (std::size_t k = 0; k < m; ++k) {
    nets.push_back(eval_combinational(n, states.back()));
    states.push_back(pulse_domains(n, states.back(), steps[k]));
  }
  const NetId site = site_net(n, f.site);
  const Logic v = f.stuck;
  if (f.model == FaultModel::Transition) {
    if (m < 2 || nets[m - 2][site] != v) return false;
  } else if (m != 1) {
    throw std::logic_error("reference covers single-frame stuck-at only");
  }
  if (nets[m - 1][site] != logic_not(v)) return false;

  // Faulty capture frame.
  const CircuitState& cap = states[m - 1];
  std::vector<Logic> fv(n.net_count(), Logic::X);
  for (std::size_t i = 0; i < n.primary_inputs().size(); ++i) fv[n.primary_inputs()[i]] = cap.inputs[i];
  for (FlopId q = 0; q < n.flops().size(); ++q) fv[n.flops()[q].q] = cap.flops[q];
  if (f.site.kind == FaultSite::Kind::FlopQ) fv[n.flops()[f.site.element].q] = v;
  for (GateId g : n.levelization()) {
    std::vector<Logic> in;
    for (NetId x : n.gates()[g].inputs) in.push_back(fv[x]);
    if (f.site.kind == FaultSite::Kind::GateInput && f.site.element == g) in[f.site.pin] = v;
    fv[n.gates()[g].output] = eval_gate(n.gates()[g].kind, in);
    if (f.site.kind == FaultSite::Kind::GateOutput && f.site.element == g) fv[n.gates()[g].output] = v;
  }
  auto differ = [](Logic a, Logic b) { return a != Logic::X && b != Logic::X && a != b; };
  if (!p.procedure.io.outputs_masked && p.procedure.observe_frame() == m - 1)
    for (NetId o : n.primary_outputs())
      if (differ(nets[m - 1][o], fv[o])) return true;
  std::vector<bool> last(n.domains().size(), false);
  for (DomainId d : steps.back()) last[d] = true;
  for (FlopId q = 0; q < n.flops().size(); ++q) {
    const FlipFlop& ff = n.flops()[q];
    if (!ff.is_scan() || !last[ff.domain]) continue;
    Logic d = fv[ff.d];
    if (f.site.kind == FaultSite::Kind::FlopD && f.site.element == q) d = v;
    const Logic in[3] = {d, fv[*ff.scan_in], cap.scan_en};
    if (differ(states[m].flops[q], eval_gate(GateKind::Mux2, in))) return true;
  }
  return false;
}

Pattern random_pattern(const Netlist& n, const CaptureProcedure& proc, std::mt19937_64& rng)
{
  Pattern p;
  p.procedure = proc;
  for (const auto& c : n.chains()) {
    std::vector<Logic> bits;
    for (std::size_t i = 0; i < c.cells.size(); ++i) bits.push_back(static_cast<Logic>(rng() % 5 == 0 ? 2 : rng() % 2));
    p.scan_load.push_back(bits);
  }
  for (std::size_t i = 0; i < n.primary_inputs().size(); ++i) p.pi_values.push_back(from_bool(rng() & 1U));
  compute_expected(n, p);
  return p;
}

const char* kPipeline = R"(DOMAIN clk PLLRATIO 1
INPUT(si)
ff1 = SDFF(ff1, si=si, domain=clk)
x = NOT(ff1)
ff2 = SDFF(x, si=ff1, domain=clk)
CHAIN c SI=si SO=ff2 CELLS=ff1,ff2
)";

}  // namespace

TEST(Faults, AndGateUniverse)
{
  Netlist n = parse_netlist("INPUT(a)\nINPUT(b)\ny=AND(a,b)\nOUTPUT(y)");
  EXPECT_EQ(enumerate_faults(n, FaultModel::Transition).size(), 6u);
  EXPECT_EQ(enumerate_faults(n, FaultModel::StuckAt).size(), 6u);
  Netlist empty = parse_netlist("");
  EXPECT_TRUE(enumerate_faults(empty, FaultModel::StuckAt).empty());
}

TEST(Faults, CountIdentityOnRandomCircuits)
{
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {}));
    EXPECT_EQ(enumerate_faults(n, FaultModel::Transition).size(), enumerate_faults(n, FaultModel::StuckAt).size());
  }
}

TEST(FaultSim, EmptyPatternSetLeavesEverythingUndetected)
{
  Netlist n = parse_netlist(kPipeline);
  auto faults = enumerate_faults(n, FaultModel::Transition);
  for (const auto& r : fault_simulate(n, {}, faults)) EXPECT_EQ(r.status, FaultStatus::Undetected);
}

TEST(FaultSim, TwoFramePipelineSlowToRise)
{
  // ff1 toggles through its own feedback (D = Q is a hold; NOT feeds ff2).
  // Hand-stepped with ff1=1 loaded: frame 0 x=0, pulse; ff1 holds 1 -> x stays 0. Use ff1=0:
  // ff1 holds 0, so x = 1 in both frames: no transition. Load the transition
  // through the scan path instead: ff1 is its own D, so build one that toggles.
  Netlist n = parse_netlist(R"(DOMAIN clk PLLRATIO 1
INPUT(si)
t = NOT(ff1)
ff1 = SDFF(t, si=si, domain=clk)
x = NOT(ff1)
ff2 = SDFF(x, si=ff1, domain=clk)
CHAIN c SI=si SO=ff2 CELLS=ff1,ff2
)");
  // Frame table with ff1=1, ff2=0 loaded and two pulses:
  //   frame 0: ff1=1 -> x=0 ; pulse -> ff1=0, ff2=0
  //   frame 1: ff1=0 -> x=1 ; pulse -> ff1=1, ff2=1   (good)
  //   slow-to-rise at x: capture frame x stuck at 0 -> ff2 captures 0 instead of 1.
  Pattern p;
  p.procedure = cpf_procedure(n, 0, 2);
  p.scan_load = {{L('1'), L('0')}};
  p.pi_values = {L('0')};
  compute_expected(n, p);
  EXPECT_EQ(p.expected_unload[0], (std::vector<Logic>{L('1'), L('1')}));
  const GateId x_gate = 1;
  ASSERT_EQ(n.net_name(n.gates()[x_gate].output), "x");
  Fault str{{FaultSite::Kind::GateInput, x_gate, 0}, FaultModel::Transition, Logic::Zero};
  Fault str_out{{FaultSite::Kind::GateOutput, x_gate, 0}, FaultModel::Transition, Logic::Zero};
  Fault stf_out{{FaultSite::Kind::GateOutput, x_gate, 0}, FaultModel::Transition, Logic::One};
  const Pattern set[] = {p};
  const Fault fs[] = {str, str_out, stf_out};
  auto r = fault_simulate(n, set, fs);
  // NOT input ff1 falls 1 -> 0 (slow-to-fall at the input), so slow-to-rise at the input is not launched.
  EXPECT_EQ(r[0].status, FaultStatus::Undetected);
  EXPECT_EQ(r[1].status, FaultStatus::Detected);
  EXPECT_EQ(r[1].pattern, std::optional<std::uint32_t>(0));
  EXPECT_EQ(r[2].status, FaultStatus::Undetected);
  Fault stf_in{{FaultSite::Kind::GateInput, x_gate, 0}, FaultModel::Transition, Logic::One};
  EXPECT_TRUE(FaultSimulator(n, set).detects(stf_in, 0));
}

TEST(FaultSim, StuckAtAndGate)
{
  Netlist n = parse_netlist("DOMAIN clk PLLRATIO 1\nINPUT(a)\nINPUT(b)\ny=AND(a,b)\nOUTPUT(y)");
  Pattern p;
  p.procedure = external_procedure(n, 1, {});
  p.pi_values = {L('1'), L('1')};
  compute_expected(n, p);
  Fault sa0{{FaultSite::Kind::GateOutput, 0, 0}, FaultModel::StuckAt, Logic::Zero};
  Fault sa1{{FaultSite::Kind::GateOutput, 0, 0}, FaultModel::StuckAt, Logic::One};
  const Pattern set[] = {p};
  const Fault fs[] = {sa0, sa1};
  auto r = fault_simulate(n, set, fs);
  EXPECT_EQ(r[0].status, FaultStatus::Detected);
  EXPECT_EQ(r[1].status, FaultStatus::Undetected);
}

TEST(FaultSim, MatchesScalarReference)
{
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    testing_helpers::SeqSpec spec;
    spec.pis = 3;
    spec.flops = 8;
    spec.gates = 40;
    spec.non_scan = trial % 3;
    Netlist n = parse_netlist(testing_helpers::random_sequential(rng, spec));
    std::vector<CaptureProcedure> procs = legal_procedures(n, ClockingRegime::CpfEnhanced);
    for (const auto& p : legal_procedures(n, ClockingRegime::ExternalCommon))
      if (p.steps().size() >= 2) procs.push_back(p);
    PatternSet set;
    for (int k = 0; k < 150; ++k) {
      set.push_back(random_pattern(n, procs[static_cast<std::size_t>(k) % procs.size()], rng));
      set.back().id = static_cast<std::uint32_t>(k);
    }
    auto faults = enumerate_faults(n, FaultModel::Transition);
    FaultSimulator sim(n, set);
    for (const auto& f : faults) {
      std::vector<std::uint32_t> want;
      for (std::uint32_t i = 0; i < set.size(); ++i)
        if (reference_detects(n, set[i], f)) want.push_back(i);
      ASSERT_EQ(sim.all_detecting(f), want) << site_name(n, f.site) << ' ' << polarity_name(f);
    }
    // Stuck-at on single-pulse external patterns.
    PatternSet sa;
    for (int k = 0; k < 70; ++k) sa.push_back(random_pattern(n, external_procedure(n, 1, {}), rng));
    FaultSimulator ssim(n, sa);
    for (const auto& f : enumerate_faults(n, FaultModel::StuckAt)) {
      std::vector<std::uint32_t> want;
      for (std::uint32_t i = 0; i < sa.size(); ++i)
        if (reference_detects(n, sa[i], f)) want.push_back(i);
      ASSERT_EQ(ssim.all_detecting(f), want);
    }
  }
}

TEST(FaultSim, FirstAndLastCreditAndJobsIndependence)
{
  std::mt19937_64 rng(23);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {4, 10, 60, 2, 2, 0}));
  auto procs = legal_procedures(n, ClockingRegime::CpfEnhanced);
  PatternSet set;
  for (int k = 0; k < 200; ++k) set.push_back(random_pattern(n, procs[static_cast<std::size_t>(k) % procs.size()], rng));
  auto faults = enumerate_faults(n, FaultModel::Transition);
  auto first = fault_simulate(n, set, faults, {1, false});
  auto last = fault_simulate(n, set, faults, {1, true});
  auto parallel = fault_simulate(n, set, faults, {8, false});
  EXPECT_EQ(first, parallel);
  FaultSimulator sim(n, set);
  for (std::size_t i = 0; i < faults.size(); ++i) {
    auto all = sim.all_detecting(faults[i]);
    if (all.empty()) {
      EXPECT_EQ(first[i].status, FaultStatus::Undetected);
      continue;
    }
    EXPECT_EQ(*first[i].pattern, all.front());
    EXPECT_EQ(*last[i].pattern, all.back());
  }
}

TEST(FaultSim, TransitionImpliesStuckAtInCaptureFrame)
{
  std::mt19937_64 rng(31);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {3, 8, 40, 1, 1, 0}));
  auto faults = enumerate_faults(n, FaultModel::Transition);
  for (int k = 0; k < 100; ++k) {
    Pattern p = random_pattern(n, cpf_procedure(n, 0, 2), rng);
    // The capture-frame vector as a single-pulse stuck-at pattern.
    CircuitState s = loaded_state(n, p);
    const DomainId d0[] = {0};
    CircuitState frame1 = pulse_domains(n, s, d0);
    Pattern q;
    q.procedure = cpf_procedure(n, 0, 2);
    q.procedure.events.erase(q.procedure.events.begin());
    q.procedure.events[0].role = PulseRole::Capture;
    q.scan_load = unload_values(n, frame1);
    q.pi_values = p.pi_values;
    // Non-scan cells would be lost through the scan load; this circuit has none.
    compute_expected(n, q);
    const Pattern ps[] = {p};
    const Pattern qs[] = {q};
    FaultSimulator tp(n, ps), sq(n, qs);
    for (const auto& f : faults) {
      if (!tp.detects(f, 0)) continue;
      Fault sa = f;
      sa.model = FaultModel::StuckAt;
      EXPECT_TRUE(sq.detects(sa, 0)) << site_name(n, f.site);
    }
  }
}

TEST(Oracle, TiedConstantIsUntestable)
{
  Netlist n = parse_netlist("DOMAIN clk PLLRATIO 1\nINPUT(a)\nna = NOT(a)\nt = NAND(a, na)\ny = AND(t, a)\nOUTPUT(y)\n");
  const GateId t = 1;
  Fault sa1{{FaultSite::Kind::GateOutput, t, 0}, FaultModel::StuckAt, Logic::One};
  Fault sa0{{FaultSite::Kind::GateOutput, t, 0}, FaultModel::StuckAt, Logic::Zero};
  EXPECT_EQ(brute_force_classify(n, sa1, ClockingRegime::StuckAtExternal), Testability::Untestable);
  EXPECT_EQ(brute_force_classify(n, sa0, ClockingRegime::StuckAtExternal), Testability::Testable);
}

TEST(Oracle, BoundEnforced)
{
  std::string text = "DOMAIN clk PLLRATIO 1\n";
  for (int i = 0; i < 23; ++i) text += "INPUT(i" + std::to_string(i) + ")\n";
  text += "y = XOR(i0";
  for (int i = 1; i < 23; ++i) text += ", i" + std::to_string(i);
  text += ")\nOUTPUT(y)\n";
  Netlist n = parse_netlist(text);
  EXPECT_EQ(oracle_bits(n), 23u);
  auto faults = enumerate_faults(n, FaultModel::StuckAt);
  EXPECT_THROW(brute_force_classify(n, faults, ClockingRegime::StuckAtExternal), OracleBoundExceeded);
}

TEST(Oracle, DetectionIsAWitness)
{
  std::mt19937_64 rng(41);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {3, 6, 30, 2, 2, 1}));
  auto procs = legal_procedures(n, ClockingRegime::CpfSimple);
  PatternSet set;
  for (int k = 0; k < 100; ++k) set.push_back(random_pattern(n, procs[static_cast<std::size_t>(k) % procs.size()], rng));
  auto faults = enumerate_faults(n, FaultModel::Transition);
  auto sim = fault_simulate(n, set, faults);
  auto oracle = brute_force_classify(n, faults, ClockingRegime::CpfSimple);
  for (std::size_t i = 0; i < faults.size(); ++i)
    if (sim[i].status == FaultStatus::Detected) EXPECT_EQ(oracle[i], Testability::Testable);
  // Constraint monotonicity: the constrained external regime never makes a fault testable
  // that the unconstrained one cannot test.
  auto b = brute_force_classify(n, faults, ClockingRegime::ExternalCommon, 4);
  auto e = brute_force_classify(n, faults, ClockingRegime::ExternalConstrained, 4);
  for (std::size_t i = 0; i < faults.size(); ++i)
    if (e[i] == Testability::Testable) EXPECT_EQ(b[i], Testability::Testable);
}

TEST(Stats, Formulas)
{
  std::vector<FaultRecord> r(10000);
  for (int i = 0; i < 9868; ++i) r[static_cast<std::size_t>(i)] = {FaultStatus::Detected, 0};
  auto s = compute_stats(r, 6464);
  EXPECT_EQ(s.tc_hundredths, 9868);
  EXPECT_EQ(s.pattern_count, 6464u);
  std::vector<FaultRecord> none(10);
  EXPECT_EQ(compute_stats(none, 0).tc_hundredths, 0);
  std::vector<FaultRecord> e(10000);
  for (int i = 0; i < 9790; ++i) e[static_cast<std::size_t>(i)] = {FaultStatus::Detected, 0};
  for (int i = 9790; i < 9890; ++i) e[static_cast<std::size_t>(i)].status = FaultStatus::AtpgUntestable;
  auto es = compute_stats(e, 1);
  EXPECT_EQ(es.eff_hundredths, 9890);
  EXPECT_EQ(es.detected + es.undetected + es.untestable + es.aborted, es.total);
  // Half-up rounding: 1/8 = 12.5% -> 12.50, 1/3 -> 33.33, 2/3 -> 66.67, 1/80000 -> 0.00 (0.00125)
  EXPECT_EQ(percent_hundredths(1, 8), 1250);
  EXPECT_EQ(percent_hundredths(1, 3), 3333);
  EXPECT_EQ(percent_hundredths(2, 3), 6667);
  EXPECT_EQ(percent_hundredths(1, 40000), 0);   // 0.0025 -> 0.00
  EXPECT_EQ(percent_hundredths(1, 20000), 1);   // 0.005 -> 0.01 (half up)
}

TEST(Stats, DumpFormat)
{
  Netlist n = parse_netlist("DOMAIN clk PLLRATIO 1\nINPUT(a)\nINPUT(b)\ny=AND(a,b)\nOUTPUT(y)");
  auto faults = enumerate_faults(n, FaultModel::Transition);
  std::vector<FaultRecord> r(faults.size());
  r[0] = {FaultStatus::Detected, 0};
  r[1].status = FaultStatus::AtpgUntestable;
  PatternSet ps(1);
  ps[0].id = 7;
  const std::string dump = dump_faults(n, faults, r, ps);
  EXPECT_EQ(dump.substr(0, dump.find('\n', dump.find('\n') + 1) + 1),
            "y/in0 TRANSITION SLOW_TO_RISE DETECTED 7\ny/in0 TRANSITION SLOW_TO_FALL ATPG_UNTESTABLE\n");
}

#include "dftclk/sim.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace dftclk;

namespace {

Logic L(char c) { return logic_from_char(c); }

const char* kPipeline = R"(DOMAIN d1 PLLRATIO 1
DOMAIN d2 PLLRATIO 1
INPUT(si)
INPUT(a)
f1 = SDFF(a, si=si, domain=d1)
f2 = SDFF(f1, si=f1, domain=d1)
x = NOT(f2)
f3 = SDFF(x, si=f2, domain=d2)
f4 = SDFF(f3, si=f3, domain=d2)
OUTPUT(f4)
CHAIN c SI=si SO=f4 CELLS=f1,f2,f3,f4
)";

CaptureProcedure proc(std::vector<std::pair<int, DomainId>> ev, int observe)
{
  CaptureProcedure p;
  p.name = "t";
  for (auto [t, d] : ev) p.events.push_back({t, d, PulseRole::Capture});
  p.observe_tick = observe;
  return p;
}

}  // namespace

TEST(Logic, ThreeValuedBasics)
{
  const Logic one_one[] = {Logic::One, Logic::One};
  const Logic zero_x[] = {Logic::Zero, Logic::X};
  const Logic one_x[] = {Logic::One, Logic::X};
  EXPECT_EQ(eval_gate(GateKind::And, one_one), Logic::One);
  EXPECT_EQ(eval_gate(GateKind::And, zero_x), Logic::Zero);
  EXPECT_EQ(eval_gate(GateKind::And, one_x), Logic::X);
  EXPECT_EQ(eval_gate(GateKind::Or, one_x), Logic::One);
  EXPECT_EQ(logic_not(Logic::X), Logic::X);
  const Logic mux_same[] = {Logic::One, Logic::One, Logic::X};
  EXPECT_EQ(eval_gate(GateKind::Mux2, mux_same), Logic::One);
}

TEST(Logic, WordMatchesScalarOnAllCombinations)
{
  const GateKind kinds[] = {GateKind::And, GateKind::Nand, GateKind::Or, GateKind::Nor, GateKind::Xor,
                            GateKind::Xnor, GateKind::Mux2};
  const Logic vals[] = {Logic::Zero, Logic::One, Logic::X};
  for (GateKind k : kinds) {
    // 27 three-input combinations packed into lanes.
    Word3 w[3];
    for (unsigned lane = 0; lane < 27; ++lane)
      for (unsigned pin = 0; pin < 3; ++pin) w[pin].set_lane(lane, vals[(lane / (pin == 0 ? 1 : pin == 1 ? 3 : 9)) % 3]);
    Word3 r = eval_gate_word(k, w);
    for (unsigned lane = 0; lane < 27; ++lane) {
      Logic in[3] = {w[0].lane(lane), w[1].lane(lane), w[2].lane(lane)};
      EXPECT_EQ(r.lane(lane), eval_gate(k, in)) << gate_kind_name(k) << " lane " << lane;
    }
  }
}

TEST(Sim, ExhaustiveAgainstNaiveEvaluator)
{
  std::mt19937_64 rng(3);
  const std::string text = testing_helpers::random_dag(rng, 8, 60);
  Netlist n = parse_netlist(text);
  testing_helpers::NaiveEvaluator naive(text);
  for (unsigned v = 0; v < 256; ++v) {
    CircuitState s = CircuitState::unknown(n);
    std::map<std::string, Logic> known;
    for (unsigned i = 0; i < 8; ++i) {
      s.inputs[i] = from_bool((v >> i) & 1U);
      known["i" + std::to_string(i)] = s.inputs[i];
    }
    auto nets = eval_combinational(n, s);
    for (NetId o : n.primary_outputs()) ASSERT_EQ(nets[o], naive.value(n.net_name(o), known)) << v;
  }
}

TEST(Sim, XMonotonicity)
{
  std::mt19937_64 rng(9);
  Netlist n = parse_netlist(testing_helpers::random_dag(rng, 6, 50));
  for (int trial = 0; trial < 200; ++trial) {
    CircuitState s = CircuitState::unknown(n);
    for (auto& v : s.inputs) v = static_cast<Logic>(std::uniform_int_distribution<int>(0, 2)(rng));
    auto base = eval_combinational(n, s);
    for (auto& v : s.inputs)
      if (v == Logic::X) v = from_bool(rng() & 1U);
    auto refined = eval_combinational(n, s);
    for (NetId i = 0; i < n.net_count(); ++i)
      if (base[i] != Logic::X) ASSERT_EQ(base[i], refined[i]);
  }
}

TEST(Sim, DimensionMismatchThrows)
{
  Netlist n = parse_netlist(kPipeline);
  CircuitState s;
  EXPECT_THROW(eval_combinational(n, s), std::invalid_argument);
  CircuitState ok = CircuitState::unknown(n);
  const DomainId bad[] = {7};
  EXPECT_THROW(pulse_domains(n, ok, bad), std::invalid_argument);
}

TEST(Sim, PulseNothingIsIdentity)
{
  Netlist n = parse_netlist(kPipeline);
  CircuitState s = CircuitState::unknown(n);
  s.flops = {L('1'), L('0'), L('1'), L('x')};
  EXPECT_EQ(pulse_domains(n, s, {}), s);
}

TEST(Sim, ScanShiftMovesValuesOnePosition)
{
  Netlist n = parse_netlist(kPipeline);
  CircuitState s = CircuitState::unknown(n);
  s.flops = {L('1'), L('0'), L('1'), L('0')};
  s.inputs = {L('0'), L('1')};
  s.scan_en = Logic::One;
  const DomainId both[] = {0, 1};
  CircuitState next = pulse_domains(n, s, both);
  EXPECT_EQ(next.flops, (std::vector<Logic>{L('0'), L('1'), L('0'), L('1')}));
}

TEST(Sim, RunCaptureComposesPulses)
{
  Netlist n = parse_netlist(kPipeline);
  CircuitState s = CircuitState::unknown(n);
  s.flops = {L('1'), L('0'), L('0'), L('1')};
  const std::vector<Logic> pis = {L('0'), L('0')};
  s.inputs = pis;
  auto r = run_capture(n, s, pis, proc({{0, 0}, {1, 0}}, 1));
  const DomainId d1[] = {0};
  CircuitState manual = pulse_domains(n, pulse_domains(n, s, d1), d1);
  EXPECT_EQ(r.final_state, manual);
  ASSERT_EQ(r.observed_po.size(), 1u);

  auto empty = run_capture(n, s, pis, CaptureProcedure{});
  EXPECT_EQ(empty.final_state, s);
  EXPECT_TRUE(empty.observed_po.empty());
}

TEST(Sim, InterDomainLaunchCaptureHandStepped)
{
  // f2 (d1) launches through NOT into f3 (d2).
  Netlist n = parse_netlist(kPipeline);
  CircuitState s = CircuitState::unknown(n);
  s.flops = {L('1'), L('0'), L('0'), L('0')};
  const std::vector<Logic> pis = {L('0'), L('0')};
  // Hand-stepped table:
  //   S0: f1=1 f2=0 f3=0 f4=0
  //   pulse d1 @0 -> f1=a=0, f2=f1=1, f3/f4 hold    => 0 1 0 0
  //   pulse d2 @1 -> f3=NOT(f2)=0, f4=f3=0           => 0 1 0 0
  // Without the launch, f3 would capture NOT(0)=1.
  auto r = run_capture(n, s, pis, proc({{0, 0}, {1, 1}}, 1));
  EXPECT_EQ(r.final_state.flops, (std::vector<Logic>{L('0'), L('1'), L('0'), L('0')}));
  auto no_launch = run_capture(n, s, pis, proc({{1, 1}}, 1));
  EXPECT_EQ(no_launch.final_state.flops, (std::vector<Logic>{L('1'), L('0'), L('1'), L('0')}));
}

TEST(Sim, SimultaneousPulseMatchesNaiveSynchronousUpdate)
{
  Netlist n = parse_netlist(kPipeline);
  testing_helpers::NaiveEvaluator naive(kPipeline);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    CircuitState s = CircuitState::unknown(n);
    std::map<std::string, Logic> known;
    const char* names[] = {"f1", "f2", "f3", "f4"};
    for (int i = 0; i < 4; ++i) {
      s.flops[i] = from_bool(rng() & 1U);
      known[names[i]] = s.flops[i];
    }
    s.inputs = {from_bool(rng() & 1U), from_bool(rng() & 1U)};
    known["si"] = s.inputs[0];
    known["a"] = s.inputs[1];
    const DomainId both[] = {0, 1};
    CircuitState next = pulse_domains(n, s, both);
    const char* d_of[] = {"a", "f1", "x", "f3"};
    for (int i = 0; i < 4; ++i) EXPECT_EQ(next.flops[i], naive.value(d_of[i], known));
  }
}

TEST(Sim, ParallelFramesMatchScalar)
{
  Netlist n = parse_netlist(kPipeline);
  std::mt19937_64 rng(4);
  const std::vector<std::vector<DomainId>> steps = {{0}, {0, 1}, {1}};
  std::vector<Word3> init(4);
  std::vector<std::vector<Word3>> inputs(1, std::vector<Word3>(2));
  std::vector<CircuitState> scalar(64, CircuitState::unknown(n));
  for (unsigned lane = 0; lane < 64; ++lane) {
    for (int f = 0; f < 4; ++f) {
      Logic v = static_cast<Logic>(rng() % 3);
      init[f].set_lane(lane, v);
      scalar[lane].flops[f] = v;
    }
    for (int i = 0; i < 2; ++i) {
      Logic v = static_cast<Logic>(rng() % 3);
      inputs[0][i].set_lane(lane, v);
      scalar[lane].inputs[i] = v;
    }
  }
  ParallelFrames pf = simulate_frames(n, init, inputs, Word3::constant(Logic::Zero), steps);
  ASSERT_EQ(pf.states.size(), 4u);
  for (unsigned lane = 0; lane < 64; ++lane) {
    CircuitState s = scalar[lane];
    for (std::size_t k = 0; k < steps.size(); ++k) {
      s = pulse_domains(n, s, steps[k]);
      for (int f = 0; f < 4; ++f) ASSERT_EQ(pf.states[k + 1][f].lane(lane), s.flops[f]);
    }
  }
}

#include "dftclk/capture.hpp"
#include "dftclk/sim.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dftclk;

namespace {

const char* kTwoDomain = R"(DOMAIN fast PLLRATIO 1
DOMAIN slow PLLRATIO 2
INPUT(si0)
INPUT(si1)
INPUT(a)
OUTPUT(z)
f0 = SDFF(n0, si=si0, domain=fast)
f1 = SDFF(n1, si=f0, domain=fast)
f2 = SDFF(n2, si=f1, domain=fast)
s0 = SDFF(m0, si=si1, domain=slow)
s1 = SDFF(m1, si=s0, domain=slow)
n0 = XOR(a, f2)
n1 = AND(f0, s1)
n2 = OR(f1, a)
m0 = NAND(f2, s1)
m1 = NOT(s0)
z = XOR(f1, s0)
CHAIN c0 SI=si0 SO=f2 CELLS=f0,f1,f2
CHAIN c1 SI=si1 SO=s1 CELLS=s0,s1
)";

const char* kSingleChain5 = R"(DOMAIN clk PLLRATIO 1
INPUT(si)
INPUT(a)
OUTPUT(q4)
q0 = SDFF(x0, si=si, domain=clk)
q1 = SDFF(q0, si=q0, domain=clk)
q2 = SDFF(x2, si=q1, domain=clk)
q3 = SDFF(q2, si=q2, domain=clk)
q4 = SDFF(q3, si=q3, domain=clk)
x0 = NOT(q4)
x2 = AND(q1, a)
CHAIN c SI=si SO=q4 CELLS=q0,q1,q2,q3,q4
)";

std::vector<Logic> bits(const std::string& s)
{
  std::vector<Logic> v;
  for (char c : s) v.push_back(logic_from_char(c));
  return v;
}

Pattern make_pattern(const Netlist& n, const CaptureProcedure& proc, std::mt19937_64& rng, std::uint32_t id)
{
  Pattern p;
  p.id = id;
  p.procedure = proc;
  for (const auto& c : n.chains()) {
    std::vector<Logic> load;
    for (std::size_t i = 0; i < c.cells.size(); ++i) load.push_back(from_bool(rng() & 1U));
    p.scan_load.push_back(load);
  }
  for (std::size_t i = 0; i < n.primary_inputs().size(); ++i) p.pi_values.push_back(from_bool(rng() & 1U));
  compute_expected(n, p);
  return p;
}

}  // namespace

TEST(Procedures, CountsPerRegime)
{
  Netlist two = parse_netlist(kTwoDomain);
  EXPECT_EQ(legal_procedures(two, ClockingRegime::CpfSimple).size(), 2u);
  EXPECT_EQ(legal_procedures(two, ClockingRegime::CpfEnhanced).size(), 8u);
  EXPECT_EQ(legal_procedures(two, ClockingRegime::ExternalCommon).size(), 4u);
  EXPECT_EQ(legal_procedures(two, ClockingRegime::ExternalConstrained).size(), 3u);
  EXPECT_EQ(legal_procedures(two, ClockingRegime::StuckAtExternal).size(), 1u);
  Netlist one = parse_netlist(kSingleChain5);
  EXPECT_EQ(legal_procedures(one, ClockingRegime::CpfSimple).size(), 1u);
  EXPECT_EQ(legal_procedures(one, ClockingRegime::CpfEnhanced).size(), 3u);
}

TEST(Procedures, EnumerationRuleForThreeDomains)
{
  Netlist n = parse_netlist("DOMAIN a PLLRATIO 1\nDOMAIN b PLLRATIO 2\nDOMAIN c PLLRATIO 4\n");
  // Independent count: three burst lengths per domain plus ordered pairs.
  const std::size_t d = 3;
  EXPECT_EQ(legal_procedures(n, ClockingRegime::CpfEnhanced).size(), 3 * d + d * (d - 1));
}

TEST(Procedures, SimpleIsSubsetOfEnhanced)
{
  Netlist n = parse_netlist(kTwoDomain);
  for (const auto& p : legal_procedures(n, ClockingRegime::CpfSimple))
    EXPECT_TRUE(procedure_legal(n, p, ClockingRegime::CpfEnhanced)) << p.name;
}

TEST(Procedures, TimingOfBurstsAndCrossings)
{
  Netlist n = parse_netlist(kTwoDomain);
  auto slow = cpf_procedure(n, 1, 2);
  EXPECT_EQ(slow.step_ticks(), (std::vector<int>{6, 8}));
  EXPECT_EQ(slow.events[0].role, PulseRole::Launch);
  EXPECT_EQ(slow.events[1].role, PulseRole::Capture);
  auto x = inter_domain_procedure(n, 1, 0);
  EXPECT_EQ(x.step_ticks(), (std::vector<int>{6, 7}));
  auto y = inter_domain_procedure(n, 0, 1);
  EXPECT_EQ(y.step_ticks(), (std::vector<int>{3, 4}));
  EXPECT_EQ(y.cpf[1].latency, 2);
  auto ext = external_procedure(n, 3, {});
  EXPECT_EQ(ext.steps().size(), 3u);
  EXPECT_EQ(ext.steps()[0].size(), 2u);
  EXPECT_EQ(ext.observe_frame(), 2u);
  EXPECT_EQ(ext.events[0].role, PulseRole::Extra);
}

TEST(Constraints, OutputsMaskedUnderOnChipOnly)
{
  Netlist n = parse_netlist(kTwoDomain);
  std::mt19937_64 rng(1);
  Pattern p = make_pattern(n, cpf_procedure(n, 0, 2), rng, 0);
  EXPECT_TRUE(validate_constraints(p, ClockingRegime::CpfSimple).empty());
  p.expected_po = {Logic::One};
  auto v = validate_constraints(p, ClockingRegime::CpfSimple);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "outputs masked under regime");
  EXPECT_TRUE(validate_constraints(p, ClockingRegime::ExternalCommon).empty());
}

TEST(Constraints, NoCaptureAndFrozenInputs)
{
  Pattern p;
  auto v = validate_constraints(p, ClockingRegime::ExternalCommon);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "no capture pulse");
  Netlist n = parse_netlist(kTwoDomain);
  Pattern q;
  q.procedure = external_procedure(n, 2, {true, true});
  q.pi_updates.push_back({1, 2, Logic::One});
  q.capture_scan_en = Logic::One;
  auto w = validate_constraints(q, ClockingRegime::ExternalConstrained);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].code, "inputs-frozen");
  EXPECT_EQ(w[1].code, "scan-en-capture");
}

TEST(Tester, GoldenSegmentForFiveCellChain)
{
  Netlist n = parse_netlist(kSingleChain5);
  Pattern p;
  p.id = 3;
  p.procedure = cpf_procedure(n, 0, 2);
  p.scan_load = {bits("10110")};
  p.pi_values = bits("01");
  compute_expected(n, p);
  const std::string text = expand_to_tester(n, p, ClockingRegime::CpfSimple);
  const std::string golden = "# pattern 3 clk_x2\n"
                             "CPF clk 2 3\n"
                             "SE 1\n"
                             "LOAD c=10110\n"
                             "SHIFT 5\n"
                             "FORCE 01\n"
                             "SE 0\n"
                             "TRIG\n"
                             "WAIT 5\n"
                             "SE 1\n"
                             "EXPECT c=" + std::string(1, to_char(p.expected_unload[0][0])) +
                             std::string(1, to_char(p.expected_unload[0][1])) +
                             std::string(1, to_char(p.expected_unload[0][2])) +
                             std::string(1, to_char(p.expected_unload[0][3])) +
                             std::string(1, to_char(p.expected_unload[0][4])) + "\n"
                             "SHIFT 5\n";
  EXPECT_EQ(text, golden);
  // Hand-stepped: load q0..q4 = 1 0 1 1 0, a = 1.
  //   pulse 1: q0=NOT(q4)=1 q1=q0=1 q2=AND(q1,a)=0 q3=q2=1 q4=q3=1
  //   pulse 2: q0=NOT(1)=0 q1=1 q2=AND(1,1)=1 q3=0 q4=1
  EXPECT_EQ(p.expected_unload[0], bits("01101"));
  EXPECT_TRUE(p.expected_po.empty());
}

TEST(Tester, EmptyPatternSetGivesEmptyProgram)
{
  Netlist n = parse_netlist(kSingleChain5);
  EXPECT_EQ(expand_program(n, {}, ClockingRegime::CpfSimple), "");
  EXPECT_TRUE(parse_tester_program("").empty());
}

TEST(Tester, RegimeMismatchRejected)
{
  Netlist n = parse_netlist(kTwoDomain);
  std::mt19937_64 rng(1);
  Pattern p = make_pattern(n, inter_domain_procedure(n, 0, 1), rng, 0);
  EXPECT_THROW(expand_to_tester(n, p, ClockingRegime::CpfSimple), RegimeMismatch);
  EXPECT_NO_THROW(expand_to_tester(n, p, ClockingRegime::CpfEnhanced));
}

TEST(Tester, ParseRoundTripAndErrors)
{
  auto ops = parse_tester_program("# c\nCPF clk 2 3\nSE 1\nLOAD c=10x\nSHIFT 3\nTRIG\nWAIT 5\nPULSE scan_clk\nMEASURE 1x\n");
  ASSERT_EQ(ops.size(), 8u);
  EXPECT_EQ(ops[0].kind, TesterOp::Kind::Cpf);
  EXPECT_EQ(ops[0].latency, 3);
  EXPECT_EQ(ops[2].bits, bits("10x"));
  EXPECT_EQ(ops[2].line, 4);
  EXPECT_THROW(parse_tester_program("SHIFT x\n"), TesterSyntaxError);
  EXPECT_THROW(parse_tester_program("SE 2\n"), TesterSyntaxError);
  EXPECT_THROW(parse_tester_program("LOAD c=102\n"), TesterSyntaxError);
  EXPECT_THROW(parse_tester_program("JUMP\n"), TesterSyntaxError);
}

TEST(Tester, ReplayThroughStructuralFiltersReproducesUnloads)
{
  Netlist n = parse_netlist(kTwoDomain);
  std::mt19937_64 rng(5);
  for (ClockingRegime regime : {ClockingRegime::CpfSimple, ClockingRegime::CpfEnhanced,
                                ClockingRegime::ExternalCommon, ClockingRegime::ExternalConstrained}) {
    PatternSet set;
    for (const auto& proc : legal_procedures(n, regime))
      for (int k = 0; k < 4; ++k) set.push_back(make_pattern(n, proc, rng, static_cast<std::uint32_t>(set.size())));
    const auto program = parse_tester_program(expand_program(n, set, regime));
    ReplayReport rep = replay_tester_program(n, program, regime);
    EXPECT_TRUE(rep.pass) << regime_name(regime) << ": " << (rep.mismatches.empty() ? "" : rep.mismatches[0]);
    ASSERT_EQ(rep.unloads.size(), set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t c = 0; c < n.chains().size(); ++c)
        for (std::size_t b = 0; b < set[i].expected_unload[c].size(); ++b)
          if (set[i].expected_unload[c][b] != Logic::X)
            EXPECT_EQ(rep.unloads[i][c][b], set[i].expected_unload[c][b]);
    EXPECT_GT(rep.compared_bits, 0u);
  }
}

TEST(Tester, ReplayDetectsCorruptedExpectation)
{
  Netlist n = parse_netlist(kTwoDomain);
  std::mt19937_64 rng(8);
  Pattern p = make_pattern(n, cpf_procedure(n, 1, 2), rng, 0);
  p.expected_unload[1][0] = logic_not(p.expected_unload[1][0]);
  auto program = parse_tester_program(expand_to_tester(n, p, ClockingRegime::CpfSimple));
  EXPECT_FALSE(replay_tester_program(n, program, ClockingRegime::CpfSimple).pass);
}

TEST(Tester, ReadBackRecoversPatterns)
{
  Netlist n = parse_netlist(kTwoDomain);
  std::mt19937_64 rng(11);
  for (ClockingRegime regime : {ClockingRegime::CpfSimple, ClockingRegime::CpfEnhanced,
                                ClockingRegime::ExternalCommon, ClockingRegime::ExternalConstrained}) {
    PatternSet set;
    for (const auto& proc : legal_procedures(n, regime))
      for (int k = 0; k < 3; ++k) set.push_back(make_pattern(n, proc, rng, static_cast<std::uint32_t>(set.size())));
    const std::string text = expand_program(n, set, regime);
    const PatternSet back = read_tester_patterns(n, text, regime);
    ASSERT_EQ(back.size(), set.size()) << regime_name(regime);
    for (std::size_t i = 0; i < set.size(); ++i) {
      EXPECT_EQ(back[i].scan_load, set[i].scan_load);
      EXPECT_EQ(back[i].pi_values, set[i].pi_values);
      EXPECT_EQ(back[i].procedure, set[i].procedure);
      EXPECT_EQ(back[i].capture_scan_en, set[i].capture_scan_en);
      EXPECT_EQ(back[i].expected_unload, set[i].expected_unload);
    }
    EXPECT_EQ(expand_program(n, back, regime), text) << regime_name(regime);
  }
}

TEST(Tester, ReadBackRejectsMalformedPrograms)
{
  Netlist n = parse_netlist(kTwoDomain);
  EXPECT_THROW(read_tester_patterns(n, "# pattern 0 nonsense\nSE 1\n", ClockingRegime::CpfSimple), TesterSyntaxError);
  EXPECT_THROW(read_tester_patterns(n, "LOAD nochain=101\n", ClockingRegime::CpfSimple), TesterSyntaxError);
}

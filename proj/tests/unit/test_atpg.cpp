#include "dftclk/atpg.hpp"
#include "dftclk/capture.hpp"
#include "dftclk/faults.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace dftclk;

namespace {

Pattern from_cube(const Netlist& n, const TestCube& c, std::mt19937_64& rng)
{
  Pattern p;
  p.procedure = c.procedure;
  auto fill = [&](Logic v) { return is_binary(v) ? v : from_bool(rng() & 1U); };
  for (const auto& chain : c.scan_load) {
    p.scan_load.emplace_back();
    for (Logic v : chain) p.scan_load.back().push_back(fill(v));
  }
  for (Logic v : c.pi_values) p.pi_values.push_back(fill(v));
  compute_expected(n, p);
  return p;
}

constexpr ClockingRegime kRegimes[] = {ClockingRegime::StuckAtExternal, ClockingRegime::ExternalCommon,
                                       ClockingRegime::CpfSimple, ClockingRegime::CpfEnhanced,
                                       ClockingRegime::ExternalConstrained};

}  // namespace

TEST(Search, AndGateStuckAtZero)
{
  Netlist n = parse_netlist("DOMAIN clk PLLRATIO 1\nINPUT(a)\nINPUT(b)\ny=AND(a,b)\nOUTPUT(y)");
  Fault sa0{{FaultSite::Kind::GateOutput, 0, 0}, FaultModel::StuckAt, Logic::Zero};
  auto r = generate_test(n, sa0, ClockingRegime::StuckAtExternal);
  ASSERT_EQ(r.outcome, SearchOutcome::Detected);
  EXPECT_EQ(r.cube->pi_values, (std::vector<Logic>{Logic::One, Logic::One}));
}

TEST(Search, RedundantFaultIsUntestable)
{
  Netlist n = parse_netlist("DOMAIN clk PLLRATIO 1\nINPUT(a)\nna = NOT(a)\nt = NAND(a, na)\ny = AND(t, a)\nOUTPUT(y)\n");
  Fault sa1{{FaultSite::Kind::GateOutput, 1, 0}, FaultModel::StuckAt, Logic::One};
  EXPECT_EQ(generate_test(n, sa1, ClockingRegime::StuckAtExternal).outcome, SearchOutcome::Untestable);
  EXPECT_EQ(brute_force_classify(n, sa1, ClockingRegime::StuckAtExternal), Testability::Untestable);
}

TEST(Search, HoldPathTransitionUntestable)
{
  // ff2 reloads its own value: its D never differs between launch and capture frames.
  Netlist n = parse_netlist(R"(DOMAIN clk PLLRATIO 1
INPUT(si)
ff1 = SDFF(h, si=si, domain=clk)
h = BUF(ff1)
y = NOT(h)
ff2 = SDFF(y, si=ff1, domain=clk)
CHAIN c SI=si SO=ff2 CELLS=ff1,ff2
)");
  const GateId buf = 0;
  for (Logic v : {Logic::Zero, Logic::One}) {
    Fault f{{FaultSite::Kind::GateOutput, buf, 0}, FaultModel::Transition, v};
    EXPECT_EQ(generate_test(n, f, ClockingRegime::CpfSimple).outcome, SearchOutcome::Untestable);
    EXPECT_EQ(brute_force_classify(n, f, ClockingRegime::CpfSimple), Testability::Untestable);
  }
}

// Every fault of every regime: Detected exactly when the oracle finds a
// test, and the cube really detects the fault.
static void expect_oracle_agreement(std::uint64_t seed, const testing_helpers::SeqSpec& base, unsigned limit,
                             std::size_t& detected, std::size_t& untestable)
{
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < 8; ++trial) {
    testing_helpers::SeqSpec spec = base;
    spec.non_scan = trial % 3;
    Netlist n = parse_netlist(testing_helpers::random_sequential(rng, spec));
    ASSERT_LE(oracle_bits(n), 16u);
    for (ClockingRegime regime : kRegimes) {
      auto faults = enumerate_faults(n, regime_fault_model(regime));
      auto oracle = brute_force_classify(n, faults, regime);
      for (std::size_t i = 0; i < faults.size(); ++i) {
        auto r = generate_test(n, faults[i], regime, limit);
        ASSERT_NE(r.outcome, SearchOutcome::Aborted);
        const bool testable = oracle[i] == Testability::Testable;
        ASSERT_EQ(r.outcome == SearchOutcome::Detected, testable)
            << regime_name(regime) << ' ' << site_name(n, faults[i].site) << ' ' << polarity_name(faults[i]);
        if (r.outcome == SearchOutcome::Detected) {
          ++detected;
          EXPECT_TRUE(procedure_legal(n, r.cube->procedure, regime));
          const Pattern p[] = {from_cube(n, *r.cube, rng)};
          EXPECT_TRUE(FaultSimulator(n, p).detects(faults[i], 0));
        } else {
          ++untestable;
        }
      }
    }
  }
}

TEST(Search, AgreesWithExhaustiveOracle)
{
  testing_helpers::SeqSpec spec;
  spec.pis = 2;
  spec.flops = 7;
  spec.gates = 28;
  std::size_t detected = 0, untestable = 0;
  expect_oracle_agreement(99, spec, 1'000'000, detected, untestable);
  EXPECT_GT(detected, 100u);
  EXPECT_GT(untestable, 20u);
}

// A tiny backtrack budget hands the harder faults to the solver fallback.
TEST(Search, SolverFallbackAgreesWithExhaustiveOracle)
{
  testing_helpers::SeqSpec spec;
  spec.pis = 3;
  spec.flops = 10;
  spec.gates = 60;
  std::size_t detected = 0, untestable = 0;
  expect_oracle_agreement(123, spec, 20, detected, untestable);
  EXPECT_GT(detected, 300u);
  EXPECT_GT(untestable, 50u);
}

TEST(Generation, SoundAndConstrained)
{
  std::mt19937_64 rng(5);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {4, 12, 80, 2, 2, 1}));
  for (ClockingRegime regime : kRegimes) {
    AtpgOptions opt;
    opt.regime = regime;
    auto r = run_atpg(n, opt);
    EXPECT_EQ(r.unconfirmed, 0u);
    EXPECT_EQ(r.contradictions, 0u);
    EXPECT_EQ(r.stats.aborted, 0u);
    EXPECT_EQ(r.stats.total, r.faults.size());
    EXPECT_LE(r.patterns.size(), r.patterns_before_compaction);
    auto check = fault_simulate(n, r.patterns, r.faults);
    for (std::size_t i = 0; i < r.faults.size(); ++i) {
      EXPECT_EQ(check[i].status == FaultStatus::Detected, r.records[i].status == FaultStatus::Detected);
      if (r.records[i].status == FaultStatus::Detected) {
        ASSERT_TRUE(r.records[i].pattern);
        EXPECT_TRUE(FaultSimulator(n, std::span(&r.patterns[*r.records[i].pattern], 1)).detects(r.faults[i], 0));
      }
      EXPECT_NE(r.records[i].status, FaultStatus::Undetected);
    }
    for (const auto& p : r.patterns) {
      EXPECT_TRUE(validate_constraints(p, regime).empty());
      EXPECT_TRUE(procedure_legal(n, p.procedure, regime));
      Pattern again = p;
      compute_expected(n, again);
      EXPECT_EQ(again, p);
    }
  }
}

TEST(Generation, UntestableAgreesWithOracleOnFullRun)
{
  std::mt19937_64 rng(77);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {3, 9, 50, 2, 2, 2}));
  for (ClockingRegime regime : kRegimes) {
    AtpgOptions opt;
    opt.regime = regime;
    auto r = run_atpg(n, opt);
    auto oracle = brute_force_classify(n, r.faults, regime);
    for (std::size_t i = 0; i < r.faults.size(); ++i) {
      if (r.records[i].status == FaultStatus::AtpgUntestable) EXPECT_EQ(oracle[i], Testability::Untestable);
      if (r.records[i].status == FaultStatus::Detected) EXPECT_EQ(oracle[i], Testability::Testable);
    }
  }
}

TEST(Generation, DeterministicAcrossJobs)
{
  std::mt19937_64 rng(8);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {4, 12, 90, 2, 2, 0}));
  AtpgOptions opt;
  opt.regime = ClockingRegime::CpfEnhanced;
  opt.seed = 3;
  auto one = run_atpg(n, opt);
  opt.jobs = 8;
  auto eight = run_atpg(n, opt);
  EXPECT_EQ(one.patterns, eight.patterns);
  EXPECT_EQ(one.records, eight.records);
  opt.seed = 4;
  auto other = run_atpg(n, opt);
  EXPECT_EQ(other.stats.detected, one.stats.detected);
}

TEST(Generation, NoCompactKeepsEverything)
{
  std::mt19937_64 rng(12);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {4, 10, 60, 2, 2, 0}));
  AtpgOptions opt;
  opt.regime = ClockingRegime::ExternalCommon;
  opt.compact = false;
  auto loose = run_atpg(n, opt);
  opt.compact = true;
  auto tight = run_atpg(n, opt);
  EXPECT_EQ(loose.patterns.size(), loose.patterns_before_compaction);
  EXPECT_LE(tight.patterns.size(), loose.patterns.size());
  EXPECT_EQ(tight.stats.detected, loose.stats.detected);
}

TEST(Compaction, DropsDuplicateAndPreservesDetections)
{
  std::mt19937_64 rng(3);
  Netlist n = parse_netlist(testing_helpers::random_sequential(rng, {4, 10, 60, 2, 2, 0}));
  AtpgOptions opt;
  opt.regime = ClockingRegime::CpfSimple;
  auto r = run_atpg(n, opt);
  ASSERT_FALSE(r.patterns.empty());
  PatternSet doubled = r.patterns;
  doubled.push_back(r.patterns.front());
  auto c = compact(n, doubled, r.faults);
  EXPECT_EQ(c.size(), r.patterns.size());
  auto before = fault_simulate(n, doubled, r.faults);
  auto after = fault_simulate(n, c, r.faults);
  for (std::size_t i = 0; i < r.faults.size(); ++i) EXPECT_EQ(before[i].status, after[i].status);
}

TEST(Experiments, LettersAndRegimes)
{
  EXPECT_EQ(parse_experiment("c"), Experiment::C);
  EXPECT_EQ(parse_experiment("E"), Experiment::E);
  EXPECT_FALSE(parse_experiment("f"));
  EXPECT_FALSE(parse_experiment("ab"));
  EXPECT_EQ(experiment_letter(Experiment::D), 'd');
  EXPECT_EQ(experiment_regime(Experiment::A), ClockingRegime::StuckAtExternal);
  EXPECT_EQ(experiment_regime(Experiment::E), ClockingRegime::ExternalConstrained);
}

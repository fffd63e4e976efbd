#include "dftclk/cpf.hpp"

#include <gtest/gtest.h>

using namespace dftclk;

namespace {

std::vector<Logic> bits(const std::string& s)
{
  std::vector<Logic> v;
  for (char c : s) v.push_back(logic_from_char(c));
  return v;
}

// Rising edges of a half-tick trace, as tick indices of the high phase.
std::vector<std::size_t> rising_ticks(const std::vector<Logic>& half)
{
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < half.size(); ++h)
    if (half[h] == Logic::One && (h == 0 || half[h - 1] == Logic::Zero)) out.push_back(h / 2);
  return out;
}

}  // namespace

TEST(CpfBehavioral, TriggerLatchedAtTwoGivesPulsesAtFiveAndSix)
{
  CpfConfig cfg;
  // scan_en falls at 0, scan_clk rises at 1, latched at the PLL edge of tick 2.
  auto se = bits("000000000000");
  auto sc = bits("010000000000");
  auto t = behavioral_schedule(cfg, se, sc);
  ASSERT_EQ(t.bursts.size(), 1u);
  EXPECT_EQ(t.bursts[0].trigger_tick, 2);
  EXPECT_EQ(t.bursts[0].pulse_ticks, (std::vector<int>{5, 6}));
  EXPECT_EQ(rising_ticks(t.clk_out), (std::vector<std::size_t>{5, 6}));
}

TEST(CpfBehavioral, ShiftModeIsPassThrough)
{
  CpfConfig cfg;
  auto se = bits("1111111111");
  auto sc = bits("0110010110");
  auto t = behavioral_schedule(cfg, se, sc);
  for (std::size_t k = 0; k < sc.size(); ++k) {
    EXPECT_EQ(t.clk_out[2 * k], sc[k]);
    EXPECT_EQ(t.clk_out[2 * k + 1], sc[k]);
  }
  EXPECT_TRUE(t.bursts.empty());
}

TEST(CpfBehavioral, FourPulses)
{
  CpfConfig cfg;
  cfg.pulse_count = 4;
  std::vector<Logic> se(24, Logic::Zero), sc(24, Logic::Zero);
  sc[9] = Logic::One;  // latched at 10
  auto t = behavioral_schedule(cfg, se, sc);
  EXPECT_EQ(t.bursts.at(0).pulse_ticks, (std::vector<int>{13, 14, 15, 16}));
}

TEST(CpfBehavioral, ProtocolViolations)
{
  CpfConfig cfg;
  EXPECT_THROW(behavioral_schedule(cfg, bits("0000000000"), bits("0101000000")), ProtocolViolation);
  EXPECT_THROW(behavioral_schedule(cfg, bits("0000111111"), bits("0100000000")), ProtocolViolation);
  // A second pulse after completion within the same window is ignored.
  auto t = behavioral_schedule(cfg, bits("000000000000"), bits("010000000100"));
  EXPECT_EQ(t.bursts.size(), 1u);
  EXPECT_THROW(validate(CpfConfig{"c", 5, 3, 1}), std::invalid_argument);
  EXPECT_THROW(validate(CpfConfig{"c", 2, 0, 1}), std::invalid_argument);
}

TEST(CpfBehavioral, DisarmedFilterStaysQuiet)
{
  CpfConfig cfg;
  auto t = behavioral_schedule(cfg, bits("0000000000"), bits("0100000000"), false);
  EXPECT_TRUE(t.bursts.empty());
  for (Logic v : t.clk_out) EXPECT_EQ(v, Logic::Zero);
}

TEST(CpfBehavioral, SlowerPll)
{
  CpfConfig cfg;
  cfg.pll_ratio = 2;
  std::vector<Logic> se(30, Logic::Zero), sc(30, Logic::Zero);
  sc[3] = Logic::One;  // next PLL edge after tick 3 is tick 4
  auto t = behavioral_schedule(cfg, se, sc);
  EXPECT_EQ(t.bursts.at(0).trigger_tick, 4);
  EXPECT_EQ(t.bursts.at(0).pulse_ticks, (std::vector<int>{10, 12}));
  // Each pulse is high for one PLL high phase: two half-ticks.
  EXPECT_EQ(t.clk_out[20], Logic::One);
  EXPECT_EQ(t.clk_out[21], Logic::One);
  EXPECT_EQ(t.clk_out[22], Logic::Zero);
}

TEST(CpfStructural, CellCount)
{
  StructuralCpf cpf = build_structural_cpf(CpfConfig{});
  EXPECT_EQ(cpf.shift_stages, 5);
  EXPECT_EQ(cpf.filter_cell_count(), 10u);
  EXPECT_LE(cpf.filter_cell_count(), 12u);
  EXPECT_EQ(cpf.total_cell_count(), 11u);
}

TEST(CpfStructural, ShiftModeMirrorsScanClk)
{
  StructuralCpf cpf = build_structural_cpf(CpfConfig{});
  std::mt19937_64 rng(2);
  std::vector<Logic> se(200, Logic::One), sc(200);
  for (auto& v : sc) v = from_bool(rng() & 1U);
  auto w = simulate_cpf(cpf, se, sc);
  const auto& clk = w.at("clk_out");
  for (std::size_t k = 0; k < sc.size(); ++k) {
    EXPECT_EQ(clk[2 * k], sc[k]);
    EXPECT_EQ(clk[2 * k + 1], sc[k]);
  }
}

TEST(CpfStructural, NoTriggerNoPulse)
{
  StructuralCpf cpf = build_structural_cpf(CpfConfig{});
  std::vector<Logic> se(40, Logic::Zero), sc(40, Logic::Zero);
  auto w = simulate_cpf(cpf, se, sc);
  for (Logic v : w.at("clk_out")) EXPECT_EQ(v, Logic::Zero);
}

TEST(CpfStructural, WaveformScenarioMatchesBehavioral)
{
  CpfConfig cfg;
  StructuralCpf cpf = build_structural_cpf(cfg);
  auto se = bits("11111100000000000111111");
  auto sc = bits("01010000100000000010100");
  auto st = simulate_cpf(cpf, se, sc);
  auto beh = behavioral_schedule(cfg, se, sc);
  EXPECT_EQ(st.at("clk_out"), beh.clk_out);
  // Trigger rises at 8 (latched at 9): two pulses at 12 and 13 in test mode.
  auto edges = rising_ticks(st.at("clk_out"));
  EXPECT_EQ(edges, (std::vector<std::size_t>{1, 3, 12, 13, 18, 20}));
  // hs_clk_en is high for exactly the two burst cycles.
  const auto& en = st.at("hs_clk_en");
  std::size_t high = 0;
  for (std::size_t h = 0; h < en.size(); h += 2) high += en[h] == Logic::One;
  EXPECT_EQ(high, 2u);
  const std::string dump = st.dump();
  EXPECT_NE(dump.find("0 pll_clk 1\n"), std::string::npos);
  EXPECT_NE(dump.find("12 clk_out 1\n"), std::string::npos);
  EXPECT_NE(dump.find("12.5 clk_out 0\n"), std::string::npos);
  EXPECT_EQ(dump.find("11 clk_out"), std::string::npos);
}

TEST(CpfEquivalence, ThousandScenariosPass)
{
  for (int pulses = 2; pulses <= 4; ++pulses) {
    for (int ratio : {1, 2, 3}) {
      CpfConfig cfg{"clk", pulses, 3, ratio};
      StructuralCpf cpf = build_structural_cpf(cfg);
      auto rep = check_equivalence(cpf, cfg, pulses == 2 && ratio == 1 ? 1000 : 200, 7);
      EXPECT_TRUE(rep.pass) << pulses << "/" << ratio << ": " << (rep.failures.empty() ? "" : rep.failures[0]);
      EXPECT_GT(rep.bursts, 0u);
    }
  }
}

TEST(CpfEquivalence, ShortenedRegisterIsCaught)
{
  CpfConfig cfg;
  StructuralCpf bad = build_structural_cpf(cfg, 4);
  auto rep = check_equivalence(bad, cfg, 100, 1);
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.mismatch_tick().has_value());
  EXPECT_TRUE(rep.evidence.has("clk_out"));
  EXPECT_FALSE(rep.failures.empty());
}

TEST(CpfEquivalence, ZeroScenariosTriviallyPass)
{
  CpfConfig cfg;
  auto rep = check_equivalence(build_structural_cpf(cfg), cfg, 0, 1);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.failures.empty());
  EXPECT_EQ(rep.evidence.half_ticks(), 0u);
}

TEST(CpfEquivalence, Deterministic)
{
  CpfConfig cfg;
  std::mt19937_64 a(42), b(42);
  auto s1 = random_scenario(a, cfg);
  auto s2 = random_scenario(b, cfg);
  EXPECT_EQ(s1.scan_en, s2.scan_en);
  EXPECT_EQ(s1.scan_clk, s2.scan_clk);
}

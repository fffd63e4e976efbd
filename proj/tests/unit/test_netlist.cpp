#include "dftclk/netlist.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace dftclk;

namespace {

NetlistErrc error_code(const std::string& text)
{
  try {
    parse_netlist(text);
  } catch (const NetlistError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised for:\n" << text;
  return NetlistErrc::Syntax;
}

}  // namespace

TEST(Netlist, MinimalCircuit)
{
  Netlist n = parse_netlist("INPUT(a)\nINPUT(b)\ny=AND(a,b)\nOUTPUT(y)");
  EXPECT_EQ(n.gates().size(), 1u);
  EXPECT_EQ(n.primary_inputs().size(), 2u);
  EXPECT_EQ(n.primary_outputs().size(), 1u);
  EXPECT_EQ(n.flops().size(), 0u);
  EXPECT_EQ(n.net_name(n.primary_inputs()[0]), "a");
}

TEST(Netlist, MultiplyDrivenNet)
{
  const std::string text = "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\ny=AND(a,b)\ny=OR(c,d)\nOUTPUT(y)";
  try {
    parse_netlist(text);
    FAIL();
  } catch (const NetlistError& e) {
    EXPECT_EQ(e.code(), NetlistErrc::MultiplyDrivenNet);
    EXPECT_EQ(e.line(), 6);
    ASSERT_EQ(e.nets().size(), 1u);
    EXPECT_EQ(e.nets()[0], "y");
  }
}

TEST(Netlist, DistinctDiagnosticCodes)
{
  EXPECT_EQ(error_code("INPUT(a)\ny = AND(a b)\n"), NetlistErrc::Syntax);
  EXPECT_EQ(error_code("INPUT(a)\ny = AND(a, q)\nOUTPUT(y)\n"), NetlistErrc::UndefinedNet);
  EXPECT_EQ(error_code("INPUT(a)\nx = AND(a, y)\ny = OR(a, x)\nOUTPUT(y)\n"), NetlistErrc::CombinationalLoop);
  EXPECT_EQ(error_code("INPUT(a)\ny = NOT(a, a)\n"), NetlistErrc::ArityMismatch);
  EXPECT_EQ(error_code("INPUT(a)\ny = MUX2(a, a)\n"), NetlistErrc::ArityMismatch);
  EXPECT_EQ(error_code("INPUT(a)\nq = DFF(a, domain=clk)\n"), NetlistErrc::FlopWithoutDomain);
  EXPECT_EQ(error_code("INPUT(a)\nq = DFF(a)\n"), NetlistErrc::FlopWithoutDomain);
  EXPECT_EQ(error_code("DOMAIN c PLLRATIO 1\nINPUT(a)\nINPUT(si)\nq = SDFF(a, si=si, domain=c)\n"
                       "CHAIN ch SI=si SO=q CELLS=q,zz\n"),
            NetlistErrc::UnknownScanCell);
  EXPECT_EQ(error_code("DOMAIN c PLLRATIO 0\n"), NetlistErrc::DomainInvalid);
  // Each code renders differently.
  EXPECT_STRNE(errc_name(NetlistErrc::UndefinedNet), errc_name(NetlistErrc::MultiplyDrivenNet));
}

TEST(Netlist, SyntaxErrorCarriesColumn)
{
  try {
    parse_netlist("INPUT(a)\n  y = AND(a,, a)\n");
    FAIL();
  } catch (const NetlistError& e) {
    EXPECT_EQ(e.code(), NetlistErrc::Syntax);
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 0);
    EXPECT_NE(std::string(e.what()).find("E_SYNTAX at 2:"), std::string::npos);
  }
}

TEST(Netlist, LoopNamesTheCycle)
{
  try {
    parse_netlist("INPUT(a)\nx = AND(a, z)\ny = NOT(x)\nz = BUF(y)\nOUTPUT(z)\n");
    FAIL();
  } catch (const NetlistError& e) {
    EXPECT_EQ(e.code(), NetlistErrc::CombinationalLoop);
    std::vector<std::string> nets = e.nets();
    std::sort(nets.begin(), nets.end());
    EXPECT_EQ(nets, (std::vector<std::string>{"x", "y", "z"}));
  }
}

TEST(Netlist, FlopBreaksLoop)
{
  Netlist n = parse_netlist("DOMAIN clk PLLRATIO 1\nINPUT(a)\nx = AND(a, q)\nq = DFF(x, domain=clk)\nOUTPUT(x)\n");
  EXPECT_EQ(n.flops().size(), 1u);
  EXPECT_EQ(n.levelization().size(), 1u);
}

TEST(Netlist, ScanChainChecks)
{
  const std::string base = "DOMAIN c PLLRATIO 1\nINPUT(a)\nINPUT(si)\n"
                           "q1 = SDFF(a, si=si, domain=c)\nq2 = SDFF(q1, si=q1, domain=c)\n";
  Netlist ok = parse_netlist(base + "CHAIN ch SI=si SO=q2 CELLS=q1,q2\nOUTPUT(q2)\n");
  ASSERT_EQ(ok.chains().size(), 1u);
  EXPECT_EQ(ok.chains()[0].cells, (std::vector<FlopId>{0, 1}));
  EXPECT_EQ(ok.longest_chain(), 2u);
  EXPECT_TRUE(ok.is_scan_only_input(1));
  EXPECT_FALSE(ok.is_scan_only_input(0));
  EXPECT_EQ(error_code(base + "CHAIN ch SI=si SO=q2 CELLS=q1,q2,q1\n"), NetlistErrc::ScanChainInvalid);
  EXPECT_EQ(error_code(base + "CHAIN ch SI=si SO=q1 CELLS=q2,q1\n"), NetlistErrc::ScanChainInvalid);
  EXPECT_EQ(error_code(base + "CHAIN ch SI=si SO=q1 CELLS=q1\n"), NetlistErrc::ScanChainInvalid);
  EXPECT_EQ(error_code(base + "CHAIN ch SI=si SO=q2 CELLS=\n"), NetlistErrc::Syntax);
}

TEST(Netlist, KeywordsAreCaseInsensitiveAndCommentsIgnored)
{
  Netlist n = parse_netlist("# header\ninput(a)  # trailing\nInput(b)\ny = nand(a, b)\nz = buff(y)\noutput(z)\n");
  EXPECT_EQ(n.gates()[0].kind, GateKind::Nand);
  EXPECT_EQ(n.gates()[1].kind, GateKind::Buf);
}

TEST(Levelize, SingleGateAndChain)
{
  Netlist one = parse_netlist("INPUT(a)\nINPUT(b)\ny=AND(a,b)\nOUTPUT(y)");
  EXPECT_EQ(levelize(one).size(), 1u);
  // Declared in reverse: the order must follow the wires.
  Netlist chain = parse_netlist("INPUT(a)\ny = NOT(m)\nm = NOT(a)\nOUTPUT(y)\n");
  auto order = levelize(chain);
  ASSERT_EQ(order.size(), 2u);
  EXPECT_EQ(chain.net_name(chain.gates()[order[0]].output), "m");
  EXPECT_EQ(chain.net_name(chain.gates()[order[1]].output), "y");
}

TEST(Levelize, RandomDagPairwiseCheck)
{
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Netlist n = parse_netlist(testing_helpers::random_dag(rng, 12, 200));
    auto order = levelize(n);
    ASSERT_EQ(order.size(), n.gates().size());
    EXPECT_EQ(order, n.levelization());
    std::vector<std::size_t> pos(n.gates().size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    // O(n^2): for every ordered gate pair, a wire from a to b requires pos[a] < pos[b].
    for (GateId a = 0; a < n.gates().size(); ++a)
      for (GateId b = 0; b < n.gates().size(); ++b)
        for (NetId in : n.gates()[b].inputs)
          if (in == n.gates()[a].output) EXPECT_LT(pos[a], pos[b]);
    EXPECT_EQ(levelize(n), order);  // stable
  }
}

TEST(Netlist, WriteParseFixpoint)
{
  const std::string text = "DOMAIN fast PLLRATIO 1\nDOMAIN slow PLLRATIO 2\nINPUT(a)\nINPUT(si)\nINPUT(b)\n"
                           "q1 = SDFF(n1, si=si, domain=fast)\nq2 = SDFF(n2, si=q1, domain=slow)\n"
                           "q3 = DFF(q2, domain=slow)\nn1 = XOR(a, q3)\nn2 = MUX2(q1, b, a)\n"
                           "OUTPUT(n2)\nCHAIN c0 SI=si SO=q2 CELLS=q1,q2\n";
  Netlist n = parse_netlist(text);
  const std::string written = write_netlist(n);
  Netlist again = parse_netlist(written);
  EXPECT_TRUE(structurally_equal(n, again));
  EXPECT_EQ(write_netlist(again), written);
  std::mt19937_64 rng(5);
  Netlist r = parse_netlist(testing_helpers::random_dag(rng, 6, 40));
  EXPECT_TRUE(structurally_equal(r, parse_netlist(write_netlist(r))));
}

TEST(FaultSites, AndGateAndEmpty)
{
  Netlist n = parse_netlist("INPUT(a)\nINPUT(b)\ny=AND(a,b)\nOUTPUT(y)");
  auto sites = fault_sites(n);
  ASSERT_EQ(sites.size(), 3u);
  EXPECT_EQ(site_name(n, sites[0]), "y/in0");
  EXPECT_EQ(site_name(n, sites[1]), "y/in1");
  EXPECT_EQ(site_name(n, sites[2]), "y/out");
  EXPECT_TRUE(fault_sites(parse_netlist("")).empty());
}

TEST(FaultSites, FlopPins)
{
  Netlist n = parse_netlist("DOMAIN c PLLRATIO 1\nINPUT(a)\nq = DFF(x, domain=c)\nx = NOT(a)\nOUTPUT(q)\n");
  auto sites = fault_sites(n);
  ASSERT_EQ(sites.size(), 4u);
  EXPECT_EQ(site_name(n, sites[2]), "q/D");
  EXPECT_EQ(site_name(n, sites[3]), "q/Q");
  EXPECT_EQ(site_net(n, sites[2]), *n.find_net("x"));
  EXPECT_EQ(site_net(n, sites[3]), *n.find_net("q"));
}

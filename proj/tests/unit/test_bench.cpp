#include "dftclk/atpg.hpp"
#include "dftclk/faults.hpp"
#include "dftclk/netlist.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <ostream>

using namespace dftclk;
using testing_helpers::source_path;

namespace {

struct Expected {
  const char* name;
  std::size_t flops;
  std::size_t sites;
};

// Produced by tests/oracles/count_netlist.py, which counts DFF/SDFF lines and
// gate fan-in straight from the text without going through the parser.
constexpr Expected kFrozen[] = {
    {"crossing_toy", 8, 278},   {"hold_path", 7, 208},     {"partial_scan", 13, 486},
    {"rand200", 24, 730},       {"rand400", 40, 1308},     {"redundant_small", 8, 195},
    {"three_domain", 28, 1013}, {"two_domain_small", 12, 391},
};

void PrintTo(const Expected& e, std::ostream* os) { *os << e.name; }

class BenchCircuit : public ::testing::TestWithParam<Expected> {};

}  // namespace

TEST_P(BenchCircuit, CountsMatchTextOracle)
{
  const Expected& e = GetParam();
  const Netlist n = parse_netlist_file(source_path(std::string("bench/") + e.name + ".net"));
  EXPECT_EQ(n.flops().size(), e.flops);
  EXPECT_EQ(fault_sites(n).size(), e.sites);
  EXPECT_EQ(enumerate_faults(n, FaultModel::StuckAt).size(), 2 * e.sites);
  EXPECT_EQ(enumerate_faults(n, FaultModel::Transition).size(), 2 * e.sites);
}

TEST_P(BenchCircuit, HasScanChains)
{
  const Netlist n = parse_netlist_file(source_path(std::string("bench/") + GetParam().name + ".net"));
  EXPECT_FALSE(n.chains().empty());
}

INSTANTIATE_TEST_SUITE_P(Suite, BenchCircuit, ::testing::ValuesIn(kFrozen),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(BenchSuite, CrossingCircuitsHaveTwoDomains)
{
  for (const char* name : {"crossing_toy", "two_domain_small", "three_domain"})
    EXPECT_GE(parse_netlist_file(source_path(std::string("bench/") + name + ".net")).domains().size(), 2U) << name;
}

TEST(BenchSuite, DirectoryHoldsExactlyTheFrozenCircuits)
{
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(source_path("bench")))
    if (entry.path().extension() == ".net") ++count;
  EXPECT_EQ(count, std::size(kFrozen));
}

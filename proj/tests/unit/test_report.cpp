#include "dftclk/report.hpp"

#include <gtest/gtest.h>

using namespace dftclk;

namespace {

std::vector<ReportRow> reference_table()
{
  return {
      {"(a)", 9868, 6464, std::nullopt},  {"(b)", 9496, 29147, std::nullopt}, {"(c)", 8738, 68484, std::nullopt},
      {"(d)", 8799, 69785, std::nullopt}, {"(e)", 8838, 58351, std::nullopt},
  };
}

}  // namespace

TEST(Report, FormatsHundredths)
{
  EXPECT_EQ(format_hundredths(8738), "87.38");
  EXPECT_EQ(format_hundredths(10000), "100.00");
  EXPECT_EQ(format_hundredths(5), "0.05");
  EXPECT_EQ(format_hundredths(0), "0.00");
  EXPECT_EQ(format_hundredths(-150), "-1.50");
}

TEST(Report, FormatsCountsWithThousandsSeparators)
{
  EXPECT_EQ(format_count(68484), "68,484");
  EXPECT_EQ(format_count(0), "0");
  EXPECT_EQ(format_count(999), "999");
  EXPECT_EQ(format_count(1000), "1,000");
  EXPECT_EQ(format_count(1234567), "1,234,567");
}

TEST(Report, ReproducesReferenceTable)
{
  const auto rows = reference_table();
  EXPECT_EQ(emit_report(rows), "Exp | TC [%] | # Pattern | Eff [%]\n"
                               "(a) |  98.68 |     6,464 |       -\n"
                               "(b) |  94.96 |    29,147 |       -\n"
                               "(c) |  87.38 |    68,484 |       -\n"
                               "(d) |  87.99 |    69,785 |       -\n"
                               "(e) |  88.38 |    58,351 |       -\n");
}

TEST(Report, SingleRowGivesHeaderAndOneLine)
{
  const std::vector<ReportRow> rows = {{"(c)", 5307, 36, 10000}};
  EXPECT_EQ(emit_report(rows), "Exp | TC [%] | # Pattern | Eff [%]\n"
                               "(c) |  53.07 |        36 |  100.00\n");
}

TEST(Report, WideValuesWidenTheirColumn)
{
  const std::vector<ReportRow> rows = {{"(a)", 100, 1234567890, std::nullopt}};
  EXPECT_EQ(emit_report(rows), "Exp | TC [%] |     # Pattern | Eff [%]\n"
                               "(a) |   1.00 | 1,234,567,890 |       -\n");
}

TEST(Report, EmptyTableIsRejected) { EXPECT_THROW(emit_report({}), std::invalid_argument); }

TEST(Report, ParseInvertsEmit)
{
  auto rows = reference_table();
  rows[1].eff_hundredths = 9977;
  EXPECT_EQ(parse_report(emit_report(rows)), rows);
}

TEST(Report, ParseRejectsMalformedText)
{
  EXPECT_THROW(parse_report(""), std::invalid_argument);
  EXPECT_THROW(parse_report("Exp | TC | # Pattern | Eff [%]\n"), std::invalid_argument);
  const std::string header = "Exp | TC [%] | # Pattern | Eff [%]\n";
  EXPECT_THROW(parse_report(header + "(a) | 98.6 | 6,464 | -\n"), std::invalid_argument);
  EXPECT_THROW(parse_report(header + "(a) | 98.68 | 64,64 | -\n"), std::invalid_argument);
  EXPECT_THROW(parse_report(header + "(a) | 98.68 | 6,464\n"), std::invalid_argument);
}

TEST(Report, RowFromStatistics)
{
  StatsReport s;
  s.tc_hundredths = 7032;
  s.pattern_count = 31;
  s.eff_hundredths = 10000;
  const ReportRow r = report_row(Experiment::C, s);
  EXPECT_EQ(r.label, "(c)");
  EXPECT_EQ(r.tc_hundredths, 7032);
  EXPECT_EQ(r.patterns, 31U);
  EXPECT_EQ(r.eff_hundredths, 10000);
}

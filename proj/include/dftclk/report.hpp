// Coverage tables in the shape `Exp | TC [%] | # Pattern | Eff [%]`.
#pragma once

#include "dftclk/atpg.hpp"
#include "dftclk/faults.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dftclk {

struct ReportRow {
  std::string label;  // "(a)" .. "(e)"
  std::int64_t tc_hundredths = 0;
  std::size_t patterns = 0;
  std::optional<std::int64_t> eff_hundredths;  // printed as "-" when absent

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Two decimals from hundredths: 8738 -> "87.38", 5 -> "0.05".
std::string format_hundredths(std::int64_t hundredths);
/// Thousands separators: 68484 -> "68,484".
std::string format_count(std::size_t count);

ReportRow report_row(Experiment e, const StatsReport& stats);

/// Header line and one line per row, columns right-aligned and separated by
/// " | ". Throws std::invalid_argument for an empty table.
std::string emit_report(std::span<const ReportRow> rows);

/// Inverse of emit_report. Throws std::invalid_argument on malformed text.
std::vector<ReportRow> parse_report(std::string_view text);

}  // namespace dftclk

#include "dftclk/report.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>

namespace dftclk {

namespace {

constexpr std::array<std::string_view, 4> kHeader = {"Exp", "TC [%]", "# Pattern", "Eff [%]"};

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(' ');
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(' ');
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_cells(std::string_view line)
{
  std::vector<std::string> cells;
  std::size_t pos = 0;
  for (;;) {
    const auto bar = line.find('|', pos);
    cells.push_back(trim(line.substr(pos, bar == std::string_view::npos ? bar : bar - pos)));
    if (bar == std::string_view::npos) return cells;
    pos = bar + 1;
  }
}

std::int64_t parse_hundredths(const std::string& s)
{
  const auto dot = s.find('.');
  if (dot == std::string::npos || dot == 0 || s.size() - dot != 3)
    throw std::invalid_argument("expected a percentage with two decimals, got '" + s + "'");
  std::int64_t v = 0;
  for (char c : s) {
    if (c == '.') continue;
    if (c < '0' || c > '9') throw std::invalid_argument("bad percentage '" + s + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

std::size_t parse_count(const std::string& s)
{
  if (s.empty()) throw std::invalid_argument("empty pattern count");
  std::size_t v = 0;
  for (char c : s) {
    if (c == ',') continue;
    if (c < '0' || c > '9') throw std::invalid_argument("bad pattern count '" + s + "'");
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  if (format_count(v) != s) throw std::invalid_argument("misplaced separator in '" + s + "'");
  return v;
}

}  // namespace

std::string format_hundredths(std::int64_t hundredths)
{
  const bool negative = hundredths < 0;
  const std::uint64_t v = negative ? -static_cast<std::uint64_t>(hundredths) : static_cast<std::uint64_t>(hundredths);
  std::string frac = std::to_string(v % 100);
  if (frac.size() < 2) frac.insert(0, 1, '0');
  return (negative ? "-" : "") + std::to_string(v / 100) + "." + frac;
}

std::string format_count(std::size_t count)
{
  std::string digits = std::to_string(count);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

ReportRow report_row(Experiment e, const StatsReport& stats)
{
  return {std::string("(") + experiment_letter(e) + ")", stats.tc_hundredths, stats.pattern_count,
          stats.eff_hundredths};
}

std::string emit_report(std::span<const ReportRow> rows)
{
  if (rows.empty()) throw std::invalid_argument("a report needs at least one row");
  std::vector<std::array<std::string, 4>> cells;
  for (const auto& r : rows)
    cells.push_back({r.label, format_hundredths(r.tc_hundredths), format_count(r.patterns),
                     r.eff_hundredths ? format_hundredths(*r.eff_hundredths) : "-"});
  std::array<std::size_t, 4> width{};
  for (std::size_t c = 0; c < 4; ++c) {
    width[c] = kHeader[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  auto emit = [&](auto&& cell) {
    for (std::size_t c = 0; c < 4; ++c) {
      const std::string text(cell(c));
      if (c > 0) os << " | ";
      // The label column reads left to right, numbers line up on the right.
      if (c == 0) os << text << std::string(width[c] - text.size(), ' ');
      else os << std::string(width[c] - text.size(), ' ') << text;
    }
    os << '\n';
  };
  emit([&](std::size_t c) { return kHeader[c]; });
  for (const auto& line : cells) emit([&](std::size_t c) -> const std::string& { return line[c]; });
  return os.str();
}

std::vector<ReportRow> parse_report(std::string_view text)
{
  std::vector<ReportRow> rows;
  std::istringstream is{std::string(text)};
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (cells.size() != 4) throw std::invalid_argument("report line needs four columns: '" + line + "'");
    if (!header) {
      for (std::size_t c = 0; c < 4; ++c)
        if (cells[c] != kHeader[c]) throw std::invalid_argument("not a report header: '" + line + "'");
      header = true;
      continue;
    }
    ReportRow r;
    r.label = cells[0];
    r.tc_hundredths = parse_hundredths(cells[1]);
    r.patterns = parse_count(cells[2]);
    if (cells[3] != "-") r.eff_hundredths = parse_hundredths(cells[3]);
    rows.push_back(std::move(r));
  }
  if (!header) throw std::invalid_argument("empty report");
  return rows;
}

}  // namespace dftclk

// Named capture procedures per clocking regime, IO constraint checks, and the
// tester-level view of a pattern: expansion into scan_en/scan_clk operations
// and replay of such a program through the gate-level pulse filters.
#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/netlist.hpp"
#include "dftclk/pattern.hpp"
#include "dftclk/procedure.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dftclk {

inline constexpr int kCpfLatency = 3;

/// Common external clock pulsing every domain `pulses` times.
CaptureProcedure external_procedure(const Netlist& n, int pulses, IoPolicy io);
/// Burst of `pulses` consecutive PLL cycles in one domain.
CaptureProcedure cpf_procedure(const Netlist& n, DomainId domain, int pulses);
/// One launch pulse in `launch`, one capture pulse in `capture` on the next
/// PLL-resolved tick.
CaptureProcedure inter_domain_procedure(const Netlist& n, DomainId launch, DomainId capture);

/// The procedures a regime allows, in a fixed order.
std::vector<CaptureProcedure> legal_procedures(const Netlist& n, ClockingRegime regime);
bool procedure_legal(const Netlist& n, const CaptureProcedure& p, ClockingRegime regime);

struct ConstraintViolation {
  std::string code;     // stable identifier, e.g. "outputs-masked"
  std::string message;  // human readable

  friend bool operator==(const ConstraintViolation&, const ConstraintViolation&) = default;
};

/// IO and clocking constraints of the regime applied to one pattern. An empty
/// result means the pattern is acceptable.
std::vector<ConstraintViolation> validate_constraints(const Pattern& p, ClockingRegime regime);

class RegimeMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Tester program of one pattern. Throws RegimeMismatch when the pattern's
/// procedure is not legal for the regime.
std::string expand_to_tester(const Netlist& n, const Pattern& p, ClockingRegime regime);
/// Concatenated segments of a pattern set; empty set gives an empty program.
std::string expand_program(const Netlist& n, const PatternSet& patterns, ClockingRegime regime);

/// Patterns of a program written by expand_program: scan loads, forced
/// inputs and the procedure named in each `# pattern <id> <procedure>`
/// header, with expected values recomputed by simulation. Throws
/// TesterSyntaxError for text that does not have that shape.
PatternSet read_tester_patterns(const Netlist& n, std::string_view text, ClockingRegime regime);

/// Least common multiple of the domain PLL ratios: every tester operation
/// lasts a multiple of it so that all filters latch a trigger together.
int tick_quantum(const Netlist& n);

struct TesterOp {
  enum class Kind { Shift, Se, Trig, Wait, Pulse, Load, Expect, Cpf, Force, Measure };
  Kind kind;
  int value = 0;          // SHIFT count, SE level, WAIT ticks, CPF pulse count
  int latency = 0;        // CPF latency
  std::string name;       // PULSE clock, LOAD/EXPECT chain, CPF domain
  std::vector<Logic> bits;
  int line = 0;

  friend bool operator==(const TesterOp&, const TesterOp&) = default;
};

class TesterSyntaxError : public std::runtime_error {
public:
  TesterSyntaxError(const std::string& what, int line)
      : std::runtime_error("tester program line " + std::to_string(line) + ": " + what), line_(line)
  {
  }
  int line() const { return line_; }

private:
  int line_;
};

/// Parses the tester text; `#` lines are comments.
std::vector<TesterOp> parse_tester_program(std::string_view text);

struct ReplayReport {
  bool pass = true;
  std::size_t segments = 0;        // scan loads replayed
  std::size_t compared_bits = 0;   // binary EXPECT/MEASURE bits checked
  std::size_t ticks = 0;
  std::vector<std::string> mismatches;  // first few
  /// Scan-out values seen during each unload, per chain in cell order.
  std::vector<std::vector<std::vector<Logic>>> unloads;
};

/// Re-simulates a tester program at half-tick resolution. Under the on-chip
/// regimes each domain clock is the clk_out of a gate-level pulse filter fed
/// by scan_en/scan_clk and its PLL; under external regimes the scan clock
/// drives every domain directly. Flops start unknown.
ReplayReport replay_tester_program(const Netlist& n, std::span<const TesterOp> program,
                                   ClockingRegime regime);

}  // namespace dftclk

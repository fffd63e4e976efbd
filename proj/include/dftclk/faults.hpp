// Fault universes, parallel-pattern single-fault simulation, exhaustive
// classification for small circuits, and coverage statistics.
#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/netlist.hpp"
#include "dftclk/pattern.hpp"
#include "dftclk/procedure.hpp"
#include "dftclk/sim.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dftclk {

enum class FaultModel : std::uint8_t { StuckAt, Transition };

/// `stuck` is the faulty value in the capture frame: SA0 and slow-to-rise
/// both behave as a 0, SA1 and slow-to-fall as a 1.
struct Fault {
  FaultSite site;
  FaultModel model = FaultModel::StuckAt;
  Logic stuck = Logic::Zero;

  friend bool operator==(const Fault&, const Fault&) = default;
};

const char* model_name(FaultModel m);      // STUCK_AT, TRANSITION
const char* polarity_name(const Fault& f); // SA0, SA1, SLOW_TO_RISE, SLOW_TO_FALL

enum class FaultStatus : std::uint8_t { Undetected, Detected, AtpgUntestable, Aborted };
const char* status_name(FaultStatus s);

struct FaultRecord {
  FaultStatus status = FaultStatus::Undetected;
  std::optional<std::uint32_t> pattern;  // index into the pattern set, iff detected

  friend bool operator==(const FaultRecord&, const FaultRecord&) = default;
};

/// Two faults per site (stuck value 0 first), in fault_sites() order.
std::vector<Fault> enumerate_faults(const Netlist& n, FaultModel model);

/// Bit-parallel fault simulator over a fixed pattern set. Patterns sharing a
/// capture procedure are simulated 64 at a time; each fault is then
/// propagated event-driven through the capture frame.
class FaultSimulator {
public:
  FaultSimulator(const Netlist& n, std::span<const Pattern> patterns);
  ~FaultSimulator();
  FaultSimulator(FaultSimulator&&) noexcept;
  FaultSimulator& operator=(FaultSimulator&&) noexcept;

  /// Index of the first (or, with `last`, the highest-index) pattern that
  /// detects the fault.
  std::optional<std::uint32_t> detecting_pattern(const Fault& f, bool last = false) const;
  /// Whether one specific pattern detects the fault.
  bool detects(const Fault& f, std::uint32_t pattern) const;
  /// All patterns that detect the fault, ascending.
  std::vector<std::uint32_t> all_detecting(const Fault& f) const;

  struct Block;

private:
  const Netlist* n_;
  std::vector<Block> blocks_;
  std::vector<std::pair<std::uint32_t, unsigned>> lane_of_;  // pattern -> (block, lane)
};

struct FaultSimOptions {
  unsigned jobs = 1;
  bool credit_last = false;  // credit the highest-index detecting pattern
};

/// DETECTED / UNDETECTED per fault, with the crediting pattern index.
std::vector<FaultRecord> fault_simulate(const Netlist& n, std::span<const Pattern> patterns,
                                        std::span<const Fault> faults, const FaultSimOptions& options = {});

class OracleBoundExceeded : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kOracleBitLimit = 22;

/// Scan cells plus primary inputs that are not scan-only: the free variables
/// of one scan load.
std::size_t oracle_bits(const Netlist& n);

enum class Testability : std::uint8_t { Testable, Untestable };

/// Exhaustive classification: every scan load, every assignment of the free
/// primary inputs and every procedure legal under the regime, with the same
/// detection semantics as fault_simulate. Throws OracleBoundExceeded beyond
/// kOracleBitLimit free bits.
std::vector<Testability> brute_force_classify(const Netlist& n, std::span<const Fault> faults,
                                              ClockingRegime regime, unsigned jobs = 1);
Testability brute_force_classify(const Netlist& n, const Fault& fault, ClockingRegime regime);

struct StatsReport {
  std::size_t total = 0;
  std::size_t detected = 0;
  std::size_t undetected = 0;
  std::size_t untestable = 0;
  std::size_t aborted = 0;
  std::size_t pattern_count = 0;
  std::int64_t tc_hundredths = 0;   // 100 * detected / total, in 1/100 percent
  std::int64_t eff_hundredths = 0;  // 100 * (detected + untestable) / total

  double tc_percent() const { return static_cast<double>(tc_hundredths) / 100.0; }
  double efficiency_percent() const { return static_cast<double>(eff_hundredths) / 100.0; }
  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

/// Percentage of num/den in hundredths, rounded half up; 0 when den is 0.
std::int64_t percent_hundredths(std::size_t num, std::size_t den);

StatsReport compute_stats(std::span<const FaultRecord> records, std::size_t pattern_count);

/// One line per fault in enumeration order:
/// `<site> <kind> <polarity> <status> [<pattern-id>]`.
std::string dump_faults(const Netlist& n, std::span<const Fault> faults, std::span<const FaultRecord> records,
                        std::span<const Pattern> patterns);

}  // namespace dftclk

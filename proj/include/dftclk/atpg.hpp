// Deterministic test generation over the time-frame-expanded circuit: a
// PODEM-style branch-and-bound on scan cells and primary inputs backed by a
// SAT solver for the faults it gives up on, fault simulation of every emitted
// pattern, and reverse-order compaction.
#pragma once

#include "dftclk/faults.hpp"
#include "dftclk/netlist.hpp"
#include "dftclk/pattern.hpp"
#include "dftclk/procedure.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dftclk {

struct AtpgOptions {
  ClockingRegime regime = ClockingRegime::CpfSimple;
  unsigned backtrack_limit = 200;  // per fault and procedure
  /// Share of the budget spent in the branch-and-bound search before a
  /// procedure is handed to the SAT solver, which gets 50 conflicts per unit
  /// of backtrack_limit.
  unsigned structural_backtracks = 20;
  /// Aborted faults are retried with ten times the budget until this ceiling.
  unsigned backtrack_ceiling = 2'000'000;
  std::uint64_t seed = 0;  // random fill of unspecified bits
  bool compact = true;
  unsigned jobs = 1;
};

/// Fault model implied by a regime: stuck-at for the single-pulse regime,
/// transition otherwise.
FaultModel regime_fault_model(ClockingRegime regime);

/// Procedures the generator tries for one fault, in order: fewest frames
/// first. Single-pulse procedures are skipped for transition faults.
std::vector<CaptureProcedure> search_procedures(const Netlist& n, ClockingRegime regime);

enum class SearchOutcome : std::uint8_t { Detected, Untestable, Aborted };

/// Assignment found for one fault: X where the value does not matter.
struct TestCube {
  CaptureProcedure procedure;
  std::vector<std::vector<Logic>> scan_load;
  std::vector<Logic> pi_values;
};

struct SearchResult {
  SearchOutcome outcome = SearchOutcome::Untestable;
  std::optional<TestCube> cube;
  std::uint64_t backtracks = 0;
};

/// Searches every procedure of the regime for a test of one fault.
/// Untestable means the search space was exhausted for all of them.
SearchResult generate_test(const Netlist& n, const Fault& fault, ClockingRegime regime,
                           unsigned backtrack_limit = 200);

struct AtpgResult {
  std::vector<Fault> faults;
  std::vector<FaultRecord> records;  // against `patterns`
  PatternSet patterns;
  StatsReport stats;
  std::size_t patterns_before_compaction = 0;
  /// Targets whose generated pattern the fault simulator did not confirm.
  std::size_t unconfirmed = 0;
  /// Faults marked untestable that the final simulation nevertheless detected.
  std::size_t contradictions = 0;
  unsigned final_backtrack_limit = 0;
};

AtpgResult generate_stuckat(const Netlist& n, const AtpgOptions& options);
AtpgResult generate_transition(const Netlist& n, const AtpgOptions& options);
/// Dispatches on regime_fault_model(options.regime).
AtpgResult run_atpg(const Netlist& n, const AtpgOptions& options);

/// Keeps exactly the patterns that are the last detector of some fault, so
/// every fault detected by the input set is detected by the output set.
PatternSet compact(const Netlist& n, std::span<const Pattern> patterns, std::span<const Fault> faults,
                   unsigned jobs = 1);

enum class Experiment : std::uint8_t { A, B, C, D, E };

inline constexpr Experiment kAllExperiments[] = {Experiment::A, Experiment::B, Experiment::C, Experiment::D,
                                                 Experiment::E};

char experiment_letter(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view text);
ClockingRegime experiment_regime(Experiment e);

struct ExperimentResult {
  Experiment experiment = Experiment::A;
  AtpgResult atpg;
  std::string tester_program;
};

ExperimentResult run_experiment(const Netlist& n, Experiment e, const AtpgOptions& base);

}  // namespace dftclk

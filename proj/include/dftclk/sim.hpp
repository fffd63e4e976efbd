// Frame-level three-valued simulation: one combinational evaluation per
// clock pulse, zero-delay between pulses.
#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/netlist.hpp"
#include "dftclk/pattern.hpp"
#include "dftclk/procedure.hpp"

#include <span>
#include <vector>

namespace dftclk {

struct CircuitState {
  std::vector<Logic> flops;   // indexed by FlopId
  std::vector<Logic> inputs;  // indexed like Netlist::primary_inputs()
  Logic scan_en = Logic::Zero;

  static CircuitState unknown(const Netlist& n);
  friend bool operator==(const CircuitState&, const CircuitState&) = default;
};

/// Values of every net for the given state. Throws std::invalid_argument on a
/// dimension mismatch.
std::vector<Logic> eval_combinational(const Netlist& n, const CircuitState& state);

std::vector<Logic> output_values(const Netlist& n, std::span<const Logic> nets);

/// Flops of the pulsed domains load MUX2(d, si, SE); everything else holds.
CircuitState pulse_domains(const Netlist& n, const CircuitState& state,
                           std::span<const DomainId> pulsed);

struct CaptureResult {
  CircuitState final_state;
  std::vector<std::vector<Logic>> observed_po;  // one entry per observe event
};

/// Applies the procedure's pulses in tick order with PIs held at `pi_values`
/// (plus any explicit updates). Pulses sharing a tick update synchronously.
CaptureResult run_capture(const Netlist& n, CircuitState state, std::span<const Logic> pi_values,
                          const CaptureProcedure& procedure, std::span<const PiUpdate> updates = {});

/// State right after scan load: chain cells from the pattern, other flops X.
CircuitState loaded_state(const Netlist& n, const Pattern& p);
/// Per-chain unload values of a state (cell order).
std::vector<std::vector<Logic>> unload_values(const Netlist& n, const CircuitState& state);

/// Good-machine response of a pattern: fills expected_unload and, unless the
/// outputs are masked, expected_po.
void compute_expected(const Netlist& n, Pattern& p);

// --- 64-lane engine used by fault simulation --------------------------------

struct ParallelFrames {
  std::vector<std::vector<Word3>> nets;    // [frame][net]
  std::vector<std::vector<Word3>> states;  // [k][flop], S_0 .. S_m
};

/// Frame-by-frame simulation of up to 64 patterns sharing one procedure.
/// `frame_inputs[f]` holds the PI words applied during frame f.
ParallelFrames simulate_frames(const Netlist& n, std::span<const Word3> initial_flops,
                               const std::vector<std::vector<Word3>>& frame_inputs, Word3 scan_en,
                               const std::vector<std::vector<DomainId>>& steps);

void eval_combinational_words(const Netlist& n, std::vector<Word3>& nets);

}  // namespace dftclk

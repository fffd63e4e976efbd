// Shared machinery of the fault simulator and the exhaustive oracle: good
// machine frames for up to 64 lanes and single-fault propagation over them.
#pragma once

#include "dftclk/faults.hpp"
#include "dftclk/sim.hpp"

#include <cstdint>
#include <vector>

namespace dftclk::detail {

struct SimBlock {
  std::vector<std::vector<DomainId>> steps;
  ParallelFrames frames;
  std::uint64_t lanes = 0;
  Word3 scan_en;
  std::vector<bool> captured_flop;  // scan cells clocked by the final pulse
  bool observe_po = false;
  std::size_t po_frame = 0;
};

/// Good-machine frames for one procedure. `frame_inputs` holds the PI words of
/// each frame (the last entry is reused when shorter than the frame count).
SimBlock make_block(const Netlist& n, const CaptureProcedure& proc, std::vector<Word3> initial_flops,
                    const std::vector<std::vector<Word3>>& frame_inputs, Word3 scan_en, std::uint64_t lanes);

/// Per-thread scratch for event-driven propagation.
class Propagator {
public:
  explicit Propagator(const Netlist& n);
  /// Lanes of the block in which the fault is detected.
  std::uint64_t detect(const SimBlock& b, const Fault& f);

private:
  std::uint64_t propagate_capture(const SimBlock& b, const Fault& f, std::uint64_t active);
  std::uint64_t full_stuck_at(const SimBlock& b, const Fault& f);
  Word3 value(const std::vector<Word3>& good, NetId net) const { return touched_[net] ? faulty_[net] : good[net]; }

  const Netlist& n_;
  std::vector<Word3> faulty_;
  std::vector<bool> touched_;
  std::vector<NetId> touched_list_;
  std::vector<bool> queued_;
  std::vector<std::uint32_t> heap_;  // topological ranks of pending gates
};

}  // namespace dftclk::detail

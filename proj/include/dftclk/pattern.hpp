#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/procedure.hpp"

#include <cstdint>
#include <vector>

namespace dftclk {

/// An ATE input change during the capture window, applied before the pulses
/// at `tick`. Only legal when the regime leaves inputs unfrozen.
struct PiUpdate {
  int tick = 0;
  std::uint32_t pi = 0;
  Logic value = Logic::X;

  friend bool operator==(const PiUpdate&, const PiUpdate&) = default;
};

struct Pattern {
  std::uint32_t id = 0;
  std::vector<std::vector<Logic>> scan_load;  // per chain, cell order (SI first)
  std::vector<Logic> pi_values;               // forced after load, held through capture
  std::vector<PiUpdate> pi_updates;
  Logic capture_scan_en = Logic::Zero;
  CaptureProcedure procedure;
  std::vector<std::vector<Logic>> expected_unload;  // per chain, X = masked
  std::vector<Logic> expected_po;                   // empty when outputs are masked

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

using PatternSet = std::vector<Pattern>;

}  // namespace dftclk

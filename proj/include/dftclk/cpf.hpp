// Clock pulse filter: gates an exact burst of PLL pulses onto a domain clock
// once armed by a single scan_clk pulse while scan_en is low; passes scan_clk
// straight through while scan_en is high.
//
// Timing convention: stimuli change at tick boundaries, together with the PLL
// rising edge. A scan_clk rising edge at tick k (scan_en low) is latched at
// the next PLL rising edge T > k; the burst occupies PLL cycles
// T + ratio*(latency + i), i < pulse_count.
#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/tick_sim.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dftclk {

struct CpfConfig {
  std::string domain = "clk";
  int pulse_count = 2;    // 2..4; 1 is used for single-pulse inter-domain loads
  int latency_ticks = 3;  // domain PLL cycles from trigger latch to first pulse
  int pll_ratio = 1;      // base ticks per domain PLL cycle
};

/// Throws std::invalid_argument when pulse_count is outside 1..4 or latency < 1.
void validate(const CpfConfig& config);

struct PulseSchedule {
  int trigger_tick = 0;  // PLL edge at which the trigger is latched
  std::vector<int> pulse_ticks;

  friend bool operator==(const PulseSchedule&, const PulseSchedule&) = default;
};

class ProtocolViolation : public std::runtime_error {
public:
  ProtocolViolation(const std::string& what, int tick)
      : std::runtime_error("protocol violation at tick " + std::to_string(tick) + ": " + what), tick_(tick)
  {
  }
  int tick() const { return tick_; }

private:
  int tick_;
};

struct BehavioralTrace {
  std::vector<Logic> clk_out;  // per half-tick
  std::vector<PulseSchedule> bursts;
};

/// Reference model of the filter over per-tick scan_en/scan_clk traces.
/// Throws ProtocolViolation on a re-trigger or scan_en rise before the burst
/// finished. A disarmed filter (`enabled` false) never produces bursts.
BehavioralTrace behavioral_schedule(const CpfConfig& config, std::span<const Logic> scan_en,
                                    std::span<const Logic> scan_clk, bool enabled = true);

/// PLL clock of a domain at half-tick h.
Logic pll_level(int pll_ratio, std::size_t half_tick);

struct StructuralCpf {
  CpfConfig config;
  ClockedCircuit circuit;
  int shift_stages = 0;

  /// Cells of the filter proper: trigger flop, shift register, enable decode,
  /// gating latch, gating AND, output mux. Excludes the functional-mode OR.
  std::size_t filter_cell_count() const;
  std::size_t total_cell_count() const;
};

/// Gate-level filter:
///   trig   = DFF(cpf_en) on scan_clk, async clear by scan_en
///   s1..sN = shift register on pll_clk, s1 <- trig, N = latency + pulse_count
///   hs_clk_en = AND(s[latency], NOT s[N])  (sN uses its inverted output)
///   cgc_clk_out = AND(latch_low(OR(hs_clk_en, functional_mode), pll_clk), pll_clk)
///   clk_out = MUX2(cgc_clk_out, scan_clk, scan_en)
/// `shift_stages_override` > 0 builds a deliberately wrong register length.
StructuralCpf build_structural_cpf(const CpfConfig& config, int shift_stages_override = 0);

/// Half-tick simulation of the structural filter. Records pll_clk, scan_clk,
/// scan_en, hs_clk_en, cgc_clk_out and clk_out.
TickWaveform simulate_cpf(const StructuralCpf& cpf, std::span<const Logic> scan_en,
                          std::span<const Logic> scan_clk, bool enabled = true);

/// Behavioral waveform in the same shape (clk_out plus the stimuli).
TickWaveform behavioral_waveform(const CpfConfig& config, std::span<const Logic> scan_en,
                                 std::span<const Logic> scan_clk, bool enabled = true);

struct CpfScenario {
  std::vector<Logic> scan_en;
  std::vector<Logic> scan_clk;
  std::vector<int> trigger_ticks;  // scan_clk rising edges that arm the filter
};

/// Protocol-respecting random stimulus: shift activity, one to three capture
/// windows (some without a trigger), trailing shift activity.
CpfScenario random_scenario(std::mt19937_64& rng, const CpfConfig& config);

struct EquivalenceReport {
  bool pass = true;
  std::size_t scenarios = 0;
  std::size_t bursts = 0;
  std::optional<std::size_t> failing_scenario;
  std::optional<std::size_t> mismatch_half_tick;
  std::vector<std::string> failures;  // first few messages
  TickWaveform evidence;              // structural waveform of the failing scenario

  /// Tick index of the first mismatch (half-tick / 2).
  std::optional<std::size_t> mismatch_tick() const;
};

/// Compares clk_out of the structural and behavioral models over seeded random
/// scenarios, and checks burst exactness, latency and glitch-freedom on the
/// structural trace.
EquivalenceReport check_equivalence(const StructuralCpf& structural, const CpfConfig& behavioral,
                                    std::size_t scenarios, std::uint64_t seed);

}  // namespace dftclk

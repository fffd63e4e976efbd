// Named capture procedures: the clock-pulse schedule a pattern applies
// between scan load and scan unload.
#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/netlist.hpp"

#include <string>
#include <vector>

namespace dftclk {

enum class PulseRole : std::uint8_t { Launch, Capture, Extra };

struct PulseEvent {
  int tick = 0;  // PLL ticks after the trigger is latched (external clocks: cycle index)
  DomainId domain = 0;
  PulseRole role = PulseRole::Capture;

  friend bool operator==(const PulseEvent&, const PulseEvent&) = default;
};

struct IoPolicy {
  bool inputs_frozen = false;
  bool outputs_masked = false;

  friend bool operator==(const IoPolicy&, const IoPolicy&) = default;
};

/// Per-load configuration word of one domain's pulse filter. A domain without
/// a setting keeps its filter disarmed for the load.
struct CpfSetting {
  DomainId domain = 0;
  int pulse_count = 2;
  int latency = 3;  // domain PLL cycles from trigger latch to the first pulse

  friend bool operator==(const CpfSetting&, const CpfSetting&) = default;
};

struct CaptureProcedure {
  std::string name;
  std::vector<PulseEvent> events;  // sorted by tick
  int observe_tick = 0;            // POs are strobed just before the pulses at this tick
  IoPolicy io;
  bool common_clock = false;        // all domains share one external clock
  std::vector<CpfSetting> cpf;      // on-chip realization, empty for external clocking

  /// Events grouped by tick: each entry is the set of domains pulsed together.
  std::vector<std::vector<DomainId>> steps() const;
  std::vector<int> step_ticks() const;
  /// Index of the frame (0-based, before step k) in which POs are observed.
  std::size_t observe_frame() const;
  std::size_t capture_count() const;

  friend bool operator==(const CaptureProcedure&, const CaptureProcedure&) = default;
};

enum class ClockingRegime : std::uint8_t {
  StuckAtExternal,      // experiment (a)
  ExternalCommon,       // experiment (b)
  CpfSimple,            // experiment (c)
  CpfEnhanced,          // experiment (d)
  ExternalConstrained,  // experiment (e)
};

const char* regime_name(ClockingRegime r);
bool regime_is_cpf(ClockingRegime r);
/// PO masking and input freezing apply.
bool regime_is_constrained(ClockingRegime r);
IoPolicy regime_io_policy(ClockingRegime r);

}  // namespace dftclk

#include "dftclk/procedure.hpp"

#include <algorithm>

namespace dftclk {

std::vector<std::vector<DomainId>> CaptureProcedure::steps() const
{
  std::vector<std::vector<DomainId>> out;
  int last_tick = 0;
  for (const auto& e : events) {
    if (out.empty() || e.tick != last_tick) {
      out.emplace_back();
      last_tick = e.tick;
    }
    if (std::find(out.back().begin(), out.back().end(), e.domain) == out.back().end())
      out.back().push_back(e.domain);
  }
  return out;
}

std::vector<int> CaptureProcedure::step_ticks() const
{
  std::vector<int> out;
  for (const auto& e : events)
    if (out.empty() || out.back() != e.tick) out.push_back(e.tick);
  return out;
}

std::size_t CaptureProcedure::observe_frame() const
{
  const auto ticks = step_ticks();
  return static_cast<std::size_t>(
      std::count_if(ticks.begin(), ticks.end(), [&](int t) { return t < observe_tick; }));
}

std::size_t CaptureProcedure::capture_count() const
{
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [](const PulseEvent& e) { return e.role == PulseRole::Capture; }));
}

const char* regime_name(ClockingRegime r)
{
  switch (r) {
  case ClockingRegime::StuckAtExternal: return "STUCKAT_EXTERNAL";
  case ClockingRegime::ExternalCommon: return "EXTERNAL_COMMON";
  case ClockingRegime::CpfSimple: return "CPF_SIMPLE";
  case ClockingRegime::CpfEnhanced: return "CPF_ENHANCED";
  case ClockingRegime::ExternalConstrained: return "EXTERNAL_CONSTRAINED";
  }
  return "?";
}

bool regime_is_cpf(ClockingRegime r)
{
  return r == ClockingRegime::CpfSimple || r == ClockingRegime::CpfEnhanced;
}

bool regime_is_constrained(ClockingRegime r)
{
  return regime_is_cpf(r) || r == ClockingRegime::ExternalConstrained;
}

IoPolicy regime_io_policy(ClockingRegime r)
{
  const bool c = regime_is_constrained(r);
  return {c, c};
}

}  // namespace dftclk

#include "dftclk/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace dftclk {

CircuitState CircuitState::unknown(const Netlist& n)
{
  CircuitState s;
  s.flops.assign(n.flops().size(), Logic::X);
  s.inputs.assign(n.primary_inputs().size(), Logic::X);
  return s;
}

namespace {

void check_dims(const Netlist& n, const CircuitState& s)
{
  if (s.flops.size() != n.flops().size() || s.inputs.size() != n.primary_inputs().size())
    throw std::invalid_argument("circuit state does not match netlist dimensions");
}

Logic effective_d(const FlipFlop& f, std::span<const Logic> nets, Logic scan_en)
{
  if (!f.is_scan()) return nets[f.d];
  const Logic in[3] = {nets[f.d], nets[*f.scan_in], scan_en};
  return eval_gate(GateKind::Mux2, in);
}

}  // namespace

std::vector<Logic> eval_combinational(const Netlist& n, const CircuitState& state)
{
  check_dims(n, state);
  std::vector<Logic> nets(n.net_count(), Logic::X);
  for (std::size_t i = 0; i < n.primary_inputs().size(); ++i) nets[n.primary_inputs()[i]] = state.inputs[i];
  for (FlopId f = 0; f < n.flops().size(); ++f) nets[n.flops()[f].q] = state.flops[f];
  std::vector<Logic> in;
  for (GateId g : n.levelization()) {
    const Gate& gate = n.gates()[g];
    in.clear();
    for (NetId i : gate.inputs) in.push_back(nets[i]);
    nets[gate.output] = eval_gate(gate.kind, in);
  }
  return nets;
}

std::vector<Logic> output_values(const Netlist& n, std::span<const Logic> nets)
{
  std::vector<Logic> out;
  out.reserve(n.primary_outputs().size());
  for (NetId o : n.primary_outputs()) out.push_back(nets[o]);
  return out;
}

CircuitState pulse_domains(const Netlist& n, const CircuitState& state, std::span<const DomainId> pulsed)
{
  check_dims(n, state);
  if (pulsed.empty()) return state;
  std::vector<bool> hit(n.domains().size(), false);
  for (DomainId d : pulsed) {
    if (d >= hit.size()) throw std::invalid_argument("pulse references unknown clock domain");
    hit[d] = true;
  }
  const std::vector<Logic> nets = eval_combinational(n, state);
  CircuitState next = state;
  for (FlopId f = 0; f < n.flops().size(); ++f) {
    const FlipFlop& ff = n.flops()[f];
    if (hit[ff.domain]) next.flops[f] = effective_d(ff, nets, state.scan_en);
  }
  return next;
}

CaptureResult run_capture(const Netlist& n, CircuitState state, std::span<const Logic> pi_values,
                          const CaptureProcedure& procedure, std::span<const PiUpdate> updates)
{
  if (pi_values.size() != n.primary_inputs().size())
    throw std::invalid_argument("PI vector does not match netlist");
  for (const auto& e : procedure.events)
    if (e.domain >= n.domains().size())
      throw std::invalid_argument("procedure '" + procedure.name + "' references unknown domain");
  state.inputs.assign(pi_values.begin(), pi_values.end());

  std::vector<PiUpdate> pending(updates.begin(), updates.end());
  std::stable_sort(pending.begin(), pending.end(),
                   [](const PiUpdate& a, const PiUpdate& b) { return a.tick < b.tick; });
  std::size_t next_update = 0;

  CaptureResult result;
  const auto steps = procedure.steps();
  const auto ticks = procedure.step_ticks();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    while (next_update < pending.size() && pending[next_update].tick <= ticks[k]) {
      const auto& u = pending[next_update++];
      state.inputs.at(u.pi) = u.value;
    }
    if (ticks[k] == procedure.observe_tick)
      result.observed_po.push_back(output_values(n, eval_combinational(n, state)));
    state = pulse_domains(n, state, steps[k]);
  }
  result.final_state = std::move(state);
  return result;
}

CircuitState loaded_state(const Netlist& n, const Pattern& p)
{
  CircuitState s = CircuitState::unknown(n);
  for (std::size_t c = 0; c < n.chains().size() && c < p.scan_load.size(); ++c) {
    const auto& cells = n.chains()[c].cells;
    for (std::size_t i = 0; i < cells.size() && i < p.scan_load[c].size(); ++i)
      s.flops[cells[i]] = p.scan_load[c][i];
  }
  s.inputs = p.pi_values;
  s.inputs.resize(n.primary_inputs().size(), Logic::X);
  s.scan_en = p.capture_scan_en;
  return s;
}

std::vector<std::vector<Logic>> unload_values(const Netlist& n, const CircuitState& state)
{
  std::vector<std::vector<Logic>> out;
  for (const auto& c : n.chains()) {
    std::vector<Logic> bits;
    for (FlopId f : c.cells) bits.push_back(state.flops[f]);
    out.push_back(std::move(bits));
  }
  return out;
}

void compute_expected(const Netlist& n, Pattern& p)
{
  CircuitState s = loaded_state(n, p);
  CaptureResult r = run_capture(n, s, s.inputs, p.procedure, p.pi_updates);
  p.expected_unload = unload_values(n, r.final_state);
  p.expected_po.clear();
  if (!p.procedure.io.outputs_masked && !r.observed_po.empty()) p.expected_po = r.observed_po.front();
}

// --- parallel -----------------------------------------------------------------

void eval_combinational_words(const Netlist& n, std::vector<Word3>& nets)
{
  std::vector<Word3> in;
  for (GateId g : n.levelization()) {
    const Gate& gate = n.gates()[g];
    in.clear();
    for (NetId i : gate.inputs) in.push_back(nets[i]);
    nets[gate.output] = eval_gate_word(gate.kind, in);
  }
}

ParallelFrames simulate_frames(const Netlist& n, std::span<const Word3> initial_flops,
                               const std::vector<std::vector<Word3>>& frame_inputs, Word3 scan_en,
                               const std::vector<std::vector<DomainId>>& steps)
{
  ParallelFrames out;
  std::vector<Word3> state(initial_flops.begin(), initial_flops.end());
  out.states.push_back(state);
  const std::size_t frames = std::max<std::size_t>(steps.size(), 1);
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<Word3> nets(n.net_count(), Word3::all_x());
    const auto& pis = frame_inputs.at(std::min(f, frame_inputs.size() - 1));
    for (std::size_t i = 0; i < n.primary_inputs().size(); ++i) nets[n.primary_inputs()[i]] = pis[i];
    for (FlopId q = 0; q < n.flops().size(); ++q) nets[n.flops()[q].q] = state[q];
    eval_combinational_words(n, nets);
    if (f < steps.size()) {
      std::vector<bool> hit(n.domains().size(), false);
      for (DomainId d : steps[f]) hit.at(d) = true;
      for (FlopId q = 0; q < n.flops().size(); ++q) {
        const FlipFlop& ff = n.flops()[q];
        if (!hit[ff.domain]) continue;
        state[q] = ff.is_scan() ? w3_mux(nets[ff.d], nets[*ff.scan_in], scan_en) : nets[ff.d];
      }
      out.states.push_back(state);
    }
    out.nets.push_back(std::move(nets));
  }
  return out;
}

}  // namespace dftclk

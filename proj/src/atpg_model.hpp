// Search model shared by the structural search and the SAT fallback: the
// decision variables, controllability costs and per-procedure frame layout.
#pragma once

#include "dftclk/atpg.hpp"
#include "dftclk/capture.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace dftclk::detail {

constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 4;

inline std::uint32_t sat_add(std::uint32_t a, std::uint32_t b) { return std::min(kInf, a + b); }

// Variables of the search: scan cells in chain order, then the primary
// inputs that reach functional logic.
struct Variables {
  std::vector<FlopId> cell_flop;
  std::vector<std::size_t> pi_index;
  std::vector<std::uint32_t> var_of_flop;  // kNone when not loadable
  std::vector<std::uint32_t> var_of_pi;

  explicit Variables(const Netlist& n)
      : var_of_flop(n.flops().size(), kNone), var_of_pi(n.primary_inputs().size(), kNone)
  {
    for (const auto& c : n.chains())
      for (FlopId f : c.cells) {
        var_of_flop[f] = static_cast<std::uint32_t>(cell_flop.size());
        cell_flop.push_back(f);
      }
    for (std::size_t i = 0; i < n.primary_inputs().size(); ++i)
      if (!n.is_scan_only_input(i)) {
        var_of_pi[i] = static_cast<std::uint32_t>(cell_flop.size() + pi_index.size());
        pi_index.push_back(i);
      }
  }
  std::size_t size() const { return cell_flop.size() + pi_index.size(); }
  bool is_cell(std::uint32_t v) const { return v < cell_flop.size(); }
};

// Combinational controllability costs, frame independent.
struct Controllability {
  std::vector<std::uint32_t> cc0, cc1;

  Controllability(const Netlist& n, const Variables& vars) : cc0(n.net_count(), kInf), cc1(n.net_count(), kInf)
  {
    for (std::size_t i = 0; i < n.primary_inputs().size(); ++i)
      if (vars.var_of_pi[i] != kNone) cc0[n.primary_inputs()[i]] = cc1[n.primary_inputs()[i]] = 1;
    for (FlopId f = 0; f < n.flops().size(); ++f) {
      const std::uint32_t c = vars.var_of_flop[f] != kNone ? 1 : 20;
      cc0[n.flops()[f].q] = cc1[n.flops()[f].q] = c;
    }
    for (GateId g : n.levelization()) {
      const Gate& gate = n.gates()[g];
      std::uint32_t sum0 = 0, sum1 = 0, min0 = kInf, min1 = kInf, sum_min = 0;
      for (NetId in : gate.inputs) {
        sum0 = sat_add(sum0, cc0[in]);
        sum1 = sat_add(sum1, cc1[in]);
        min0 = std::min(min0, cc0[in]);
        min1 = std::min(min1, cc1[in]);
        sum_min = sat_add(sum_min, std::min(cc0[in], cc1[in]));
      }
      std::uint32_t z = kInf, o = kInf;
      switch (gate.kind) {
      case GateKind::And: o = sum1, z = min0; break;
      case GateKind::Nand: z = sum1, o = min0; break;
      case GateKind::Or: z = sum0, o = min1; break;
      case GateKind::Nor: o = sum0, z = min1; break;
      case GateKind::Xor:
      case GateKind::Xnor: z = o = sum_min; break;
      case GateKind::Not: z = cc1[gate.inputs[0]], o = cc0[gate.inputs[0]]; break;
      case GateKind::Buf: z = cc0[gate.inputs[0]], o = cc1[gate.inputs[0]]; break;
      case GateKind::Mux2: {
        const NetId a = gate.inputs[0], b = gate.inputs[1], s = gate.inputs[2];
        z = std::min(sat_add(cc0[s], cc0[a]), sat_add(cc1[s], cc0[b]));
        o = std::min(sat_add(cc0[s], cc1[a]), sat_add(cc1[s], cc1[b]));
        break;
      }
      }
      cc0[gate.output] = sat_add(z, 1);
      cc1[gate.output] = sat_add(o, 1);
    }
  }
};

// Frame structure and observation points of one procedure.
struct ProcedureModel {
  CaptureProcedure procedure;
  std::size_t frames = 0;
  std::vector<std::vector<bool>> pulsed;  // [step][domain]
  std::vector<FlopId> captured;           // scan cells clocked by the final pulse
  std::vector<bool> is_captured;
  bool observe_po = false;
  std::vector<std::uint32_t> obs_dist;  // gate levels to the nearest observation point

  ProcedureModel(const Netlist& n, CaptureProcedure p) : procedure(std::move(p))
  {
    const auto steps = procedure.steps();
    frames = steps.size();
    for (const auto& s : steps) {
      pulsed.emplace_back(n.domains().size(), false);
      for (DomainId d : s) pulsed.back()[d] = true;
    }
    is_captured.assign(n.flops().size(), false);
    for (FlopId f = 0; f < n.flops().size(); ++f)
      if (frames > 0 && n.flops()[f].is_scan() && pulsed.back()[n.flops()[f].domain]) {
        captured.push_back(f);
        is_captured[f] = true;
      }
    observe_po = frames > 0 && !procedure.io.outputs_masked && procedure.observe_frame() == frames - 1;

    obs_dist.assign(n.net_count(), kInf);
    for (FlopId f : captured) obs_dist[n.flops()[f].d] = 0;
    if (observe_po)
      for (NetId o : n.primary_outputs()) obs_dist[o] = 0;
    const auto& order = n.levelization();
    auto relax = [&](NetId net) {
      for (const auto& fo : n.fanouts(net))
        if (fo.kind == Fanout::Kind::GatePin)
          obs_dist[net] = std::min(obs_dist[net], sat_add(obs_dist[n.gates()[fo.element].output], 1));
    };
    for (auto it = order.rbegin(); it != order.rend(); ++it) relax(n.gates()[*it].output);
    for (NetId pi : n.primary_inputs()) relax(pi);
    for (const auto& ff : n.flops()) relax(ff.q);
  }
};

struct Shared {
  const Netlist& n;
  Variables vars;
  Controllability cc;
  std::vector<ProcedureModel> models;

  Shared(const Netlist& netlist, ClockingRegime regime) : n(netlist), vars(netlist), cc(netlist, vars)
  {
    for (auto& p : search_procedures(netlist, regime)) models.emplace_back(netlist, std::move(p));
  }
};

}  // namespace dftclk::detail

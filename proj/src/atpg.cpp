#include "dftclk/atpg.hpp"

#include "dftclk/capture.hpp"
#include "dftclk/parallel.hpp"
#include "dftclk/sim.hpp"

#include "atpg_model.hpp"
#include "sat_search.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <random>

namespace dftclk {

FaultModel regime_fault_model(ClockingRegime regime)
{
  return regime == ClockingRegime::StuckAtExternal ? FaultModel::StuckAt : FaultModel::Transition;
}

std::vector<CaptureProcedure> search_procedures(const Netlist& n, ClockingRegime regime)
{
  std::vector<CaptureProcedure> procs = legal_procedures(n, regime);
  if (regime_fault_model(regime) == FaultModel::Transition)
    std::erase_if(procs, [](const CaptureProcedure& p) { return p.steps().size() < 2; });
  std::stable_sort(procs.begin(), procs.end(), [](const CaptureProcedure& a, const CaptureProcedure& b) {
    return a.steps().size() < b.steps().size();
  });
  return procs;
}

namespace {

using detail::kInf;
using detail::ProcedureModel;
using detail::sat_add;
using detail::Shared;

enum class Step : std::uint8_t { Detected, Fail, Continue };

struct Objective {
  NetId net;
  std::size_t frame;
  Logic value;
};

// Branch-and-bound over the scan cells and primary inputs of one procedure.
// Good values live in every frame; the faulty machine only in the capture
// frame, recomputed over the fault's fanout cone after each implication.
class Podem {
public:
  explicit Podem(const Shared& s) : s_(s), n_(s.n), N_(s.n.net_count()), G_(s.n.gates().size()) {}

  SearchResult run(const Fault& f, const ProcedureModel& pm, std::uint64_t limit)
  {
    setup(f, pm);
    SearchResult result;
    struct Decision {
      std::uint32_t var;
      Logic value;
      bool flipped;
    };
    std::vector<Decision> stack;
    for (;;) {
      Step st = evaluate();
      if (st == Step::Detected) {
        result.outcome = SearchOutcome::Detected;
        result.cube = cube();
        return result;
      }
      if (st == Step::Continue) {
        std::optional<std::pair<std::uint32_t, Logic>> d;
        if (auto obj = objective()) d = backtrace(*obj);
        if (!d) d = fallback();
        if (d) {
          stack.push_back({d->first, d->second, false});
          set_var(d->first, d->second);
          continue;
        }
      }
      while (!stack.empty() && stack.back().flipped) {
        set_var(stack.back().var, Logic::X);
        stack.pop_back();
      }
      if (stack.empty()) {
        result.outcome = SearchOutcome::Untestable;
        return result;
      }
      if (++result.backtracks > limit) {
        result.outcome = SearchOutcome::Aborted;
        return result;
      }
      stack.back().value = logic_not(stack.back().value);
      stack.back().flipped = true;
      set_var(stack.back().var, stack.back().value);
    }
  }

private:
  Logic& good(std::size_t f, NetId net) { return good_[f * N_ + net]; }
  Logic good(std::size_t f, NetId net) const { return good_[f * N_ + net]; }

  void setup(const Fault& f, const ProcedureModel& pm)
  {
    f_ = f;
    pm_ = &pm;
    F_ = pm.frames;
    c_ = F_ - 1;
    v_ = f.stuck;
    site_ = site_net(n_, f.site);
    good_.assign(F_ * N_, Logic::X);
    queued_.assign(F_ * G_, false);
    heaps_.assign(F_, {});
    assign_.assign(s_.vars.size(), Logic::X);
    faulty_.assign(N_, Logic::X);
    pd_.assign(N_, false);
    in_cone_.assign(N_, false);

    pin_gate_ = kNone;
    forced_net_ = kNone;
    cone_.clear();
    std::vector<NetId> starts;
    switch (f.site.kind) {
    case FaultSite::Kind::GateOutput:
      forced_net_ = n_.gates()[f.site.element].output;
      starts.push_back(forced_net_);
      break;
    case FaultSite::Kind::FlopQ:
      forced_net_ = n_.flops()[f.site.element].q;
      starts.push_back(forced_net_);
      break;
    case FaultSite::Kind::GateInput:
      pin_gate_ = f.site.element;
      cone_.push_back(pin_gate_);
      starts.push_back(n_.gates()[pin_gate_].output);
      in_cone_[n_.gates()[pin_gate_].output] = true;
      break;
    case FaultSite::Kind::FlopD: break;
    }
    if (forced_net_ != kNone) in_cone_[forced_net_] = true;
    std::vector<bool> seen(G_, false);
    if (pin_gate_ != kNone) seen[pin_gate_] = true;
    for (std::size_t i = 0; i < starts.size(); ++i)
      for (const auto& fo : n_.fanouts(starts[i]))
        if (fo.kind == Fanout::Kind::GatePin && !seen[fo.element]) {
          seen[fo.element] = true;
          cone_.push_back(fo.element);
          const NetId out = n_.gates()[fo.element].output;
          in_cone_[out] = true;
          starts.push_back(out);
        }
    const auto& rank = n_.topo_rank();
    std::sort(cone_.begin(), cone_.end(), [&](GateId a, GateId b) { return rank[a] < rank[b]; });
    relevant_vars();
  }

  // Variables that can influence activation, launch or propagation, and the
  // (frame, net) pairs on the way, kept per frame in evaluation order.
  void relevant_vars()
  {
    relevant_.clear();
    visited_.assign(F_ * N_, false);
    std::vector<bool> var_seen(s_.vars.size(), false);
    std::vector<std::pair<std::size_t, NetId>> work;
    auto push = [&](std::size_t f, NetId net) {
      if (!visited_[f * N_ + net]) {
        visited_[f * N_ + net] = true;
        work.emplace_back(f, net);
      }
    };
    push(c_, site_);
    if (f_.model == FaultModel::Transition) push(c_ - 1, site_);
    for (GateId g : cone_)
      for (NetId in : n_.gates()[g].inputs) push(c_, in);
    rel_sources_.assign(F_, {});
    rel_gates_.assign(F_, {});
    while (!work.empty()) {
      auto [f, net] = work.back();
      work.pop_back();
      const Driver& d = n_.driver(net);
      std::uint32_t var = kNone;
      if (d.kind == DriverKind::PrimaryInput) {
        var = s_.vars.var_of_pi[d.index];
        rel_sources_[f].push_back(net);
      } else if (d.kind == DriverKind::Gate) {
        rel_gates_[f].push_back(d.index);
        for (NetId in : n_.gates()[d.index].inputs) push(f, in);
      } else if (d.kind == DriverKind::Flop) {
        rel_sources_[f].push_back(net);
        const FlipFlop& ff = n_.flops()[d.index];
        if (f == 0) var = s_.vars.var_of_flop[d.index];
        else push(f - 1, pm_->pulsed[f - 1][ff.domain] ? ff.d : ff.q);
      }
      if (var != kNone && !var_seen[var]) {
        var_seen[var] = true;
        relevant_.push_back(var);
      }
    }
    std::sort(relevant_.begin(), relevant_.end());
    const auto& rank = n_.topo_rank();
    for (auto& gates : rel_gates_)
      std::sort(gates.begin(), gates.end(), [&](GateId a, GateId b) { return rank[a] < rank[b]; });
    can_.assign(F_ * N_, kCanBoth);
  }

  // Binary values each relevant net can still take under some completion of
  // the current assignment (bit 0: zero, bit 1: one).
  static constexpr std::uint8_t kCan0 = 1, kCan1 = 2, kCanBoth = 3;

  static std::uint8_t can_of(Logic v) { return v == Logic::Zero ? kCan0 : v == Logic::One ? kCan1 : kCanBoth; }
  static std::uint8_t can_swap(std::uint8_t c) { return static_cast<std::uint8_t>(((c & 1) << 1) | ((c >> 1) & 1)); }

  std::uint8_t can(std::size_t f, NetId net) const { return can_[f * N_ + net]; }
  bool can_be(std::size_t f, NetId net, Logic v) const { return (can(f, net) & (v == Logic::One ? kCan1 : kCan0)) != 0; }

  void possible()
  {
    for (std::size_t f = 0; f < F_; ++f) {
      for (NetId net : rel_sources_[f]) {
        std::uint8_t c;
        const Logic v = good(f, net);
        const Driver& d = n_.driver(net);
        if (is_binary(v)) c = can_of(v);
        else if (d.kind == DriverKind::PrimaryInput) c = s_.vars.var_of_pi[d.index] != kNone ? kCanBoth : 0;
        else if (f == 0) c = s_.vars.var_of_flop[d.index] != kNone ? kCanBoth : 0;
        else {
          const FlipFlop& ff = n_.flops()[d.index];
          c = can(f - 1, pm_->pulsed[f - 1][ff.domain] ? ff.d : ff.q);
        }
        can_[f * N_ + net] = c;
      }
      for (GateId g : rel_gates_[f]) {
        const Gate& gate = n_.gates()[g];
        const Logic v = good(f, gate.output);
        if (is_binary(v)) {
          can_[f * N_ + gate.output] = can_of(v);
          continue;
        }
        std::uint8_t any = 0, all = kCanBoth;
        bool fixed_parity = true, parity = false;
        for (NetId in : gate.inputs) {
          const std::uint8_t ci = can(f, in);
          any |= ci;
          all &= ci;
          if (ci == kCan1) parity = !parity;
          else if (ci != kCan0) fixed_parity = false;
          if (ci == 0) fixed_parity = false;
        }
        std::uint8_t c = 0;
        switch (gate.kind) {
        case GateKind::And: c = static_cast<std::uint8_t>((any & kCan0) | (all & kCan1)); break;
        case GateKind::Nand: c = can_swap(static_cast<std::uint8_t>((any & kCan0) | (all & kCan1))); break;
        case GateKind::Or: c = static_cast<std::uint8_t>((any & kCan1) | (all & kCan0)); break;
        case GateKind::Nor: c = can_swap(static_cast<std::uint8_t>((any & kCan1) | (all & kCan0))); break;
        case GateKind::Xor:
        case GateKind::Xnor: {
          bool none = false;
          for (NetId in : gate.inputs) none = none || can(f, in) == 0;
          if (none) c = 0;
          else if (fixed_parity) c = parity ? kCan1 : kCan0;
          else c = kCanBoth;
          if (gate.kind == GateKind::Xnor) c = can_swap(c);
          break;
        }
        case GateKind::Not: c = can_swap(can(f, gate.inputs[0])); break;
        case GateKind::Buf: c = can(f, gate.inputs[0]); break;
        case GateKind::Mux2: {
          const std::uint8_t a = can(f, gate.inputs[0]), b = can(f, gate.inputs[1]), sel = can(f, gate.inputs[2]);
          c = static_cast<std::uint8_t>(((sel & kCan0) ? a : 0) | ((sel & kCan1) ? b : 0) | (a & b));
          break;
        }
        }
        can_[f * N_ + gate.output] = c;
      }
    }
  }

  void schedule(std::size_t f, NetId net)
  {
    const auto& rank = n_.topo_rank();
    for (const auto& fo : n_.fanouts(net)) {
      if (fo.kind != Fanout::Kind::GatePin) continue;
      const std::size_t slot = f * G_ + fo.element;
      if (queued_[slot]) continue;
      queued_[slot] = true;
      heaps_[f].push_back(rank[fo.element]);
      std::push_heap(heaps_[f].begin(), heaps_[f].end(), std::greater<>());
    }
  }

  void set_net(std::size_t f, NetId net, Logic v)
  {
    if (good(f, net) == v) return;
    good(f, net) = v;
    schedule(f, net);
  }

  void set_var(std::uint32_t var, Logic v)
  {
    assign_[var] = v;
    if (s_.vars.is_cell(var)) {
      set_net(0, n_.flops()[s_.vars.cell_flop[var]].q, v);
    } else {
      const NetId pi = n_.primary_inputs()[s_.vars.pi_index[var - s_.vars.cell_flop.size()]];
      for (std::size_t f = 0; f < F_; ++f) set_net(f, pi, v);
    }
    propagate();
  }

  void propagate()
  {
    const auto& order = n_.levelization();
    Logic in[16];
    std::vector<Logic> wide;
    for (std::size_t f = 0; f < F_; ++f) {
      auto& heap = heaps_[f];
      while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), std::greater<>());
        const GateId g = order[heap.back()];
        heap.pop_back();
        queued_[f * G_ + g] = false;
        const Gate& gate = n_.gates()[g];
        std::span<Logic> ins;
        if (gate.inputs.size() <= 16) {
          ins = std::span<Logic>(in, gate.inputs.size());
        } else {
          wide.resize(gate.inputs.size());
          ins = wide;
        }
        for (std::size_t i = 0; i < ins.size(); ++i) ins[i] = good(f, gate.inputs[i]);
        set_net(f, gate.output, eval_gate(gate.kind, ins));
      }
      if (f + 1 == F_) break;
      for (const FlipFlop& ff : n_.flops())
        set_net(f + 1, ff.q, good(f, pm_->pulsed[f][ff.domain] ? ff.d : ff.q));
    }
  }

  static bool differ(Logic a, Logic b) { return is_binary(a) && is_binary(b) && a != b; }
  static bool settled_equal(Logic a, Logic b) { return is_binary(a) && a == b; }

  Logic fv(NetId net) const { return in_cone_[net] ? faulty_[net] : good(c_, net); }

  Step evaluate()
  {
    possible();
    if (!can_be(c_, site_, logic_not(v_))) return Step::Fail;
    bool launch_ok = true;
    if (f_.model == FaultModel::Transition) {
      if (!can_be(c_ - 1, site_, v_)) return Step::Fail;
      launch_ok = good(c_ - 1, site_) == v_;
    }
    // Faulty capture frame with potential-difference tracking.
    pin_pd_ = false;
    if (forced_net_ != kNone) {
      faulty_[forced_net_] = v_;
      pd_[forced_net_] = true;
    }
    if (pin_gate_ != kNone) pin_pd_ = true;
    Logic in[16];
    std::vector<Logic> wide;
    for (GateId g : cone_) {
      const Gate& gate = n_.gates()[g];
      std::span<Logic> ins;
      if (gate.inputs.size() <= 16) {
        ins = std::span<Logic>(in, gate.inputs.size());
      } else {
        wide.resize(gate.inputs.size());
        ins = wide;
      }
      bool any_pd = false, side_ok = true;
      const Logic passing = (gate.kind == GateKind::And || gate.kind == GateKind::Nand)  ? Logic::One
                            : (gate.kind == GateKind::Or || gate.kind == GateKind::Nor) ? Logic::Zero
                                                                                        : Logic::X;
      for (std::size_t i = 0; i < ins.size(); ++i) {
        const NetId x = gate.inputs[i];
        bool p;
        if (g == pin_gate_ && i == f_.site.pin) {
          ins[i] = v_;
          p = pin_pd_;
        } else {
          ins[i] = fv(x);
          p = in_cone_[x] && pd_[x];
        }
        any_pd = any_pd || p;
        if (!p && passing != Logic::X && good(c_, x) == logic_not(passing)) side_ok = false;
      }
      const Logic out = eval_gate(gate.kind, ins);
      faulty_[gate.output] = out;
      // The good value may stay X on the way: a later gate can still turn it
      // binary through another input while the faulty value is binary.
      pd_[gate.output] = any_pd && side_ok && !settled_equal(out, good(c_, gate.output));
    }

    bool detected = false, reachable = false;
    auto observe = [&](NetId net, Logic faulty_value, bool potential) {
      detected = detected || differ(good(c_, net), faulty_value);
      // Detection needs a binary good value at the observation point.
      reachable = reachable || (potential && can(c_, net) != 0);
    };
    if (f_.site.kind == FaultSite::Kind::FlopD) {
      if (pm_->is_captured[f_.site.element]) observe(site_, v_, true);
    } else {
      for (FlopId q : pm_->captured) {
        const NetId d = n_.flops()[q].d;
        if (in_cone_[d]) observe(d, faulty_[d], pd_[d]);
      }
      if (pm_->observe_po)
        for (NetId o : n_.primary_outputs())
          if (in_cone_[o]) observe(o, faulty_[o], pd_[o]);
    }
    if (detected && launch_ok) return Step::Detected;
    if (!reachable) return Step::Fail;
    return Step::Continue;
  }

  static Logic non_controlling(GateKind k)
  {
    return (k == GateKind::And || k == GateKind::Nand) ? Logic::One : Logic::Zero;
  }

  std::optional<Objective> objective() const
  {
    if (good(c_, site_) == Logic::X) return Objective{site_, c_, logic_not(v_)};
    if (f_.model == FaultModel::Transition && good(c_ - 1, site_) == Logic::X)
      return Objective{site_, c_ - 1, v_};
    // D-frontier gate closest to an observation point.
    std::optional<Objective> best;
    std::uint32_t best_dist = kInf + 1;
    for (GateId g : cone_) {
      const Gate& gate = n_.gates()[g];
      if (!pd_[gate.output] || differ(good(c_, gate.output), faulty_[gate.output])) continue;
      const std::uint32_t dist = pm_->obs_dist[gate.output];
      if (dist >= best_dist) continue;
      std::optional<std::size_t> d_pin;
      for (std::size_t i = 0; i < gate.inputs.size() && !d_pin; ++i) {
        if (g == pin_gate_ && i == f_.site.pin) {
          if (differ(good(c_, gate.inputs[i]), v_)) d_pin = i;
        } else if (in_cone_[gate.inputs[i]] && differ(good(c_, gate.inputs[i]), faulty_[gate.inputs[i]])) {
          d_pin = i;
        }
      }
      if (!d_pin) continue;
      std::optional<Objective> obj;
      if (gate.kind == GateKind::Mux2) {
        const NetId sel = gate.inputs[2];
        if (*d_pin < 2 && good(c_, sel) == Logic::X) {
          obj = Objective{sel, c_, from_bool(*d_pin == 1)};
        } else if (*d_pin == 2) {
          const NetId a = gate.inputs[0], b = gate.inputs[1];
          if (good(c_, a) == Logic::X) obj = Objective{a, c_, is_binary(good(c_, b)) ? logic_not(good(c_, b)) : Logic::Zero};
          else if (good(c_, b) == Logic::X) obj = Objective{b, c_, logic_not(good(c_, a))};
        }
      } else {
        for (std::size_t i = 0; i < gate.inputs.size(); ++i) {
          if (i == *d_pin || (g == pin_gate_ && i == f_.site.pin)) continue;
          if (good(c_, gate.inputs[i]) == Logic::X && can_be(c_, gate.inputs[i], non_controlling(gate.kind))) {
            obj = Objective{gate.inputs[i], c_, non_controlling(gate.kind)};
            break;
          }
        }
      }
      if (obj) {
        best = obj;
        best_dist = dist;
      }
    }
    return best;
  }

  std::optional<std::pair<std::uint32_t, Logic>> backtrace(Objective o) const
  {
    const auto& cc0 = s_.cc.cc0;
    const auto& cc1 = s_.cc.cc1;
    for (;;) {
      const Driver& d = n_.driver(o.net);
      if (d.kind == DriverKind::PrimaryInput) {
        const std::uint32_t var = s_.vars.var_of_pi[d.index];
        if (var == kNone) return std::nullopt;
        return std::pair{var, o.value};
      }
      if (d.kind == DriverKind::Flop) {
        const FlipFlop& ff = n_.flops()[d.index];
        if (o.frame == 0) {
          const std::uint32_t var = s_.vars.var_of_flop[d.index];
          if (var == kNone) return std::nullopt;
          return std::pair{var, o.value};
        }
        o.net = pm_->pulsed[o.frame - 1][ff.domain] ? ff.d : ff.q;
        --o.frame;
        if (good(o.frame, o.net) != Logic::X) return std::nullopt;
        continue;
      }
      if (d.kind != DriverKind::Gate) return std::nullopt;
      const Gate& gate = n_.gates()[d.index];
      auto is_x = [&](NetId x) { return good(o.frame, x) == Logic::X; };
      auto cost = [&](NetId x, Logic v) { return v == Logic::One ? cc1[x] : cc0[x]; };
      Logic t = o.value;
      if (gate.kind == GateKind::Nand || gate.kind == GateKind::Nor || gate.kind == GateKind::Not ||
          gate.kind == GateKind::Xnor)
        t = logic_not(t);
      std::optional<NetId> pick;
      Logic want = t;
      switch (gate.kind) {
      case GateKind::And:
      case GateKind::Nand:
      case GateKind::Or:
      case GateKind::Nor: {
        const bool and_like = gate.kind == GateKind::And || gate.kind == GateKind::Nand;
        // All inputs must take t when t is the non-controlling value.
        const bool all = (t == Logic::One) == and_like;
        std::uint32_t best = 0;
        for (NetId x : gate.inputs) {
          if (!is_x(x)) continue;
          if (!can_be(o.frame, x, t)) {
            if (all) return std::nullopt;
            continue;
          }
          const std::uint32_t c = cost(x, t);
          if (!pick || (all ? c > best : c < best)) {
            pick = x;
            best = c;
          }
        }
        break;
      }
      case GateKind::Xor:
      case GateKind::Xnor: {
        bool parity = false;
        std::uint32_t best = 0;
        for (NetId x : gate.inputs) {
          if (!is_x(x)) {
            parity ^= good(o.frame, x) == Logic::One;
            continue;
          }
          const std::uint32_t c = std::min(cc0[x], cc1[x]);
          if (can(o.frame, x) == 0) return std::nullopt;
          if (!pick || c < best) {
            pick = x;
            best = c;
          }
        }
        want = from_bool((t == Logic::One) != parity);
        break;
      }
      case GateKind::Not:
      case GateKind::Buf:
        pick = gate.inputs[0];
        break;
      case GateKind::Mux2: {
        const NetId a = gate.inputs[0], b = gate.inputs[1], s = gate.inputs[2];
        const Logic sv = good(o.frame, s);
        if (sv == Logic::Zero) pick = a;
        else if (sv == Logic::One) pick = b;
        else {
          const Logic av = good(o.frame, a), bv = good(o.frame, b);
          if (av == t) pick = s, want = Logic::Zero;
          else if (bv == t) pick = s, want = Logic::One;
          else if (is_binary(av)) pick = s, want = Logic::One;
          else if (is_binary(bv)) pick = s, want = Logic::Zero;
          else if (sat_add(cc0[s], cost(a, t)) <= sat_add(cc1[s], cost(b, t))) pick = s, want = Logic::Zero;
          else pick = s, want = Logic::One;
        }
        break;
      }
      }
      if (!pick || !is_x(*pick)) return std::nullopt;
      o.net = *pick;
      o.value = want;
    }
  }

  std::optional<std::pair<std::uint32_t, Logic>> fallback() const
  {
    for (std::uint32_t var : relevant_)
      if (assign_[var] == Logic::X) return std::pair{var, Logic::Zero};
    return std::nullopt;
  }

  TestCube cube() const
  {
    TestCube c;
    c.procedure = pm_->procedure;
    std::uint32_t var = 0;
    for (const auto& chain : n_.chains()) {
      c.scan_load.emplace_back();
      for (std::size_t i = 0; i < chain.cells.size(); ++i) c.scan_load.back().push_back(assign_[var++]);
    }
    c.pi_values.assign(n_.primary_inputs().size(), Logic::X);
    for (std::size_t k = 0; k < s_.vars.pi_index.size(); ++k)
      c.pi_values[s_.vars.pi_index[k]] = assign_[s_.vars.cell_flop.size() + k];
    return c;
  }

  const Shared& s_;
  const Netlist& n_;
  const std::size_t N_, G_;

  Fault f_;
  const ProcedureModel* pm_ = nullptr;
  std::size_t F_ = 0, c_ = 0;
  Logic v_ = Logic::Zero;
  NetId site_ = kNone;
  NetId forced_net_ = kNone;
  GateId pin_gate_ = kNone;
  bool pin_pd_ = false;

  std::vector<Logic> good_;
  std::vector<bool> queued_;
  std::vector<std::vector<std::uint32_t>> heaps_;
  std::vector<Logic> assign_;
  std::vector<Logic> faulty_;
  std::vector<bool> pd_;
  std::vector<bool> in_cone_;
  std::vector<GateId> cone_;
  std::vector<std::uint32_t> relevant_;
  std::vector<bool> visited_;
  std::vector<std::vector<NetId>> rel_sources_;
  std::vector<std::vector<GateId>> rel_gates_;
  std::vector<std::uint8_t> can_;
};

// Solver conflicts granted for each backtrack of the structural search budget
// once that search gives up on a procedure.
constexpr std::uint64_t kConflictsPerBacktrack = 50;

// Fixed number of solver sessions per procedure. Faults are dealt to them by
// position, so the answers do not depend on the number of worker threads.
constexpr std::size_t kSolverLanes = 4;

int conflict_budget(std::uint64_t backtrack_limit)
{
  return static_cast<int>(
      std::min<std::uint64_t>(backtrack_limit * kConflictsPerBacktrack, std::numeric_limits<int>::max()));
}

// Structural search over every procedure; `gave_up` receives the procedures
// whose budget ran out.
SearchResult structural_search(Podem& engine, const Shared& s, const Fault& f, std::uint64_t limit,
                               std::vector<std::size_t>& gave_up)
{
  SearchResult out;
  gave_up.clear();
  for (std::size_t k = 0; k < s.models.size(); ++k) {
    SearchResult r = engine.run(f, s.models[k], limit);
    out.backtracks += r.backtracks;
    if (r.outcome == SearchOutcome::Detected) {
      out.outcome = SearchOutcome::Detected;
      out.cube = std::move(r.cube);
      gave_up.clear();
      return out;
    }
    if (r.outcome == SearchOutcome::Aborted) gave_up.push_back(k);
  }
  out.outcome = gave_up.empty() ? SearchOutcome::Untestable : SearchOutcome::Aborted;
  return out;
}

// Settles the procedures the structural search gave up on.
SearchResult solver_search(std::vector<detail::SatSession>& sessions, const Fault& f,
                           const std::vector<std::size_t>& gave_up, std::uint64_t limit, std::uint64_t backtracks)
{
  SearchResult out;
  out.backtracks = backtracks;
  bool aborted = false;
  for (std::size_t k : gave_up) {
    SearchResult r = sessions[k].solve(f, conflict_budget(limit));
    if (r.outcome == SearchOutcome::Detected) {
      r.backtracks = backtracks;
      return r;
    }
    aborted = aborted || r.outcome == SearchOutcome::Aborted;
  }
  out.outcome = aborted ? SearchOutcome::Aborted : SearchOutcome::Untestable;
  return out;
}

std::vector<detail::SatSession> make_sessions(const Shared& s)
{
  std::vector<detail::SatSession> sessions;
  for (const auto& pm : s.models) sessions.emplace_back(s, pm);
  return sessions;
}

std::uint64_t splitmix(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Pattern fill_pattern(const Netlist& n, const TestCube& cube, std::uint64_t seed, std::size_t fault_index)
{
  std::mt19937_64 rng(splitmix(seed ^ splitmix(fault_index)));
  auto fill = [&](Logic v) { return is_binary(v) ? v : from_bool(rng() & 1U); };
  Pattern p;
  p.procedure = cube.procedure;
  for (const auto& chain : cube.scan_load) {
    p.scan_load.emplace_back();
    for (Logic v : chain) p.scan_load.back().push_back(fill(v));
  }
  for (Logic v : cube.pi_values) p.pi_values.push_back(fill(v));
  compute_expected(n, p);
  return p;
}

constexpr std::size_t kBatch = 32;

AtpgResult run_generation(const Netlist& n, const AtpgOptions& opt, FaultModel model)
{
  AtpgResult res;
  res.faults = enumerate_faults(n, model);
  const std::size_t nf = res.faults.size();
  std::vector<FaultStatus> status(nf, FaultStatus::Undetected);
  std::vector<bool> attempted(nf, false);
  const Shared shared(n, opt.regime);
  std::vector<Podem> engines;
  for (unsigned w = 0; w < std::max(1U, opt.jobs); ++w) engines.emplace_back(shared);
  PatternSet patterns;

  std::vector<std::vector<detail::SatSession>> lanes;
  for (std::size_t l = 0; l < kSolverLanes; ++l) lanes.push_back(make_sessions(shared));

  auto run_batch = [&](const std::vector<std::size_t>& targets, std::uint64_t limit) {
    const std::uint64_t structural_limit = std::min<std::uint64_t>(limit, std::max(1U, opt.structural_backtracks));
    std::vector<SearchResult> results(targets.size());
    std::vector<std::vector<std::size_t>> gave_up(targets.size());
    parallel_for(targets.size(), opt.jobs, [&](std::size_t i, unsigned w) {
      results[i] = structural_search(engines[w], shared, res.faults[targets[i]], structural_limit, gave_up[i]);
    });
    parallel_for(kSolverLanes, opt.jobs, [&](std::size_t lane, unsigned) {
      for (std::size_t i = lane; i < targets.size(); i += kSolverLanes)
        if (!gave_up[i].empty())
          results[i] = solver_search(lanes[lane], res.faults[targets[i]], gave_up[i], limit, results[i].backtracks);
    });
    const std::size_t first_new = patterns.size();
    std::vector<bool> covered(targets.size(), false);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::size_t fi = targets[i];
      attempted[fi] = true;
      if (results[i].outcome == SearchOutcome::Untestable) status[fi] = FaultStatus::AtpgUntestable;
      else if (results[i].outcome == SearchOutcome::Aborted) status[fi] = FaultStatus::Aborted;
      if (results[i].outcome != SearchOutcome::Detected || covered[i]) continue;
      Pattern p = fill_pattern(n, *results[i].cube, opt.seed, fi);
      p.id = static_cast<std::uint32_t>(patterns.size());
      const Pattern one[] = {p};
      FaultSimulator sim(n, one);
      if (!sim.detects(res.faults[fi], 0)) {
        ++res.unconfirmed;
        continue;
      }
      for (std::size_t j = i; j < targets.size(); ++j)
        if (!covered[j] && results[j].outcome == SearchOutcome::Detected && sim.detects(res.faults[targets[j]], 0))
          covered[j] = true;
      patterns.push_back(std::move(p));
    }
    if (patterns.size() == first_new) return;
    std::vector<std::size_t> open;
    for (std::size_t fi = 0; fi < nf; ++fi)
      if (status[fi] == FaultStatus::Undetected || status[fi] == FaultStatus::Aborted) open.push_back(fi);
    const std::span<const Pattern> fresh(patterns.data() + first_new, patterns.size() - first_new);
    FaultSimulator sim(n, fresh);
    std::vector<std::optional<std::uint32_t>> hit(open.size());
    parallel_for(open.size(), opt.jobs,
                 [&](std::size_t i, unsigned) { hit[i] = sim.detecting_pattern(res.faults[open[i]]); });
    for (std::size_t i = 0; i < open.size(); ++i)
      if (hit[i]) status[open[i]] = FaultStatus::Detected;
  };

  std::uint64_t limit = std::max(1U, opt.backtrack_limit);
  {
    std::size_t next = 0;
    for (;;) {
      std::vector<std::size_t> batch;
      while (next < nf && batch.size() < kBatch) {
        if (status[next] == FaultStatus::Undetected && !attempted[next]) batch.push_back(next);
        ++next;
      }
      if (batch.empty()) break;
      run_batch(batch, limit);
    }
  }
  while (limit < opt.backtrack_ceiling) {
    std::vector<std::size_t> retry;
    for (std::size_t fi = 0; fi < nf; ++fi)
      if (status[fi] == FaultStatus::Aborted) retry.push_back(fi);
    if (retry.empty()) break;
    limit = std::min<std::uint64_t>(limit * 10, opt.backtrack_ceiling);
    for (std::size_t start = 0; start < retry.size(); start += kBatch) {
      std::vector<std::size_t> batch;
      for (std::size_t k = start; k < std::min(retry.size(), start + kBatch); ++k)
        if (status[retry[k]] == FaultStatus::Aborted) batch.push_back(retry[k]);
      if (!batch.empty()) run_batch(batch, limit);
    }
  }
  res.final_backtrack_limit = static_cast<unsigned>(limit);
  res.patterns_before_compaction = patterns.size();

  res.patterns = opt.compact ? compact(n, patterns, res.faults, opt.jobs) : std::move(patterns);
  for (std::uint32_t i = 0; i < res.patterns.size(); ++i) res.patterns[i].id = i;
  res.records = fault_simulate(n, res.patterns, res.faults, {opt.jobs, false});
  for (std::size_t fi = 0; fi < nf; ++fi) {
    FaultRecord& r = res.records[fi];
    if (r.status == FaultStatus::Detected) {
      if (status[fi] == FaultStatus::AtpgUntestable) ++res.contradictions;
      continue;
    }
    if (status[fi] == FaultStatus::Detected) ++res.unconfirmed;
    if (status[fi] == FaultStatus::AtpgUntestable || status[fi] == FaultStatus::Aborted) r.status = status[fi];
  }
  res.stats = compute_stats(res.records, res.patterns.size());
  return res;
}

}  // namespace

SearchResult generate_test(const Netlist& n, const Fault& fault, ClockingRegime regime, unsigned backtrack_limit)
{
  const Shared shared(n, regime);
  Podem engine(shared);
  const std::uint64_t limit = std::max(1U, backtrack_limit);
  std::vector<std::size_t> gave_up;
  SearchResult r = structural_search(engine, shared, fault, limit, gave_up);
  if (gave_up.empty()) return r;
  auto sessions = make_sessions(shared);
  return solver_search(sessions, fault, gave_up, limit, r.backtracks);
}

AtpgResult generate_stuckat(const Netlist& n, const AtpgOptions& options)
{
  if (options.regime != ClockingRegime::StuckAtExternal)
    throw std::invalid_argument("stuck-at generation runs under the single-pulse external regime");
  return run_generation(n, options, FaultModel::StuckAt);
}

AtpgResult generate_transition(const Netlist& n, const AtpgOptions& options)
{
  if (options.regime == ClockingRegime::StuckAtExternal)
    throw std::invalid_argument("transition generation needs a multi-pulse regime");
  return run_generation(n, options, FaultModel::Transition);
}

AtpgResult run_atpg(const Netlist& n, const AtpgOptions& options)
{
  return regime_fault_model(options.regime) == FaultModel::StuckAt ? generate_stuckat(n, options)
                                                                    : generate_transition(n, options);
}

PatternSet compact(const Netlist& n, std::span<const Pattern> patterns, std::span<const Fault> faults, unsigned jobs)
{
  const auto records = fault_simulate(n, patterns, faults, {jobs, true});
  std::vector<bool> keep(patterns.size(), false);
  for (const auto& r : records)
    if (r.pattern) keep[*r.pattern] = true;
  PatternSet out;
  for (std::size_t i = 0; i < patterns.size(); ++i)
    if (keep[i]) out.push_back(patterns[i]);
  return out;
}

char experiment_letter(Experiment e) { return static_cast<char>('a' + static_cast<int>(e)); }

std::optional<Experiment> parse_experiment(std::string_view text)
{
  if (text.size() != 1) return std::nullopt;
  const char c = static_cast<char>(text[0] | 0x20);
  if (c < 'a' || c > 'e') return std::nullopt;
  return static_cast<Experiment>(c - 'a');
}

ClockingRegime experiment_regime(Experiment e)
{
  switch (e) {
  case Experiment::A: return ClockingRegime::StuckAtExternal;
  case Experiment::B: return ClockingRegime::ExternalCommon;
  case Experiment::C: return ClockingRegime::CpfSimple;
  case Experiment::D: return ClockingRegime::CpfEnhanced;
  case Experiment::E: return ClockingRegime::ExternalConstrained;
  }
  return ClockingRegime::StuckAtExternal;
}

ExperimentResult run_experiment(const Netlist& n, Experiment e, const AtpgOptions& base)
{
  ExperimentResult r;
  r.experiment = e;
  AtpgOptions opt = base;
  opt.regime = experiment_regime(e);
  r.atpg = run_atpg(n, opt);
  r.tester_program = expand_program(n, r.atpg.patterns, opt.regime);
  return r;
}

}  // namespace dftclk

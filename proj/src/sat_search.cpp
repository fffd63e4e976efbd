#include "sat_search.hpp"

#include <cadical.hpp>

#include <algorithm>
#include <initializer_list>

namespace dftclk::detail {

namespace {

constexpr int kTrue = 1;
constexpr int kFalse = -1;

// Fresh solver once a session has accumulated this many variables. Retired
// fault encodings slow every later query down.
constexpr int kRecycleVariables = 10'000;

// Literal pair of one net: `one` holds iff the net is 1, `zero` iff it is 0;
// both false means X.
struct Rail {
  int one = 0;
  int zero = 0;
};

Rail swap(Rail r) { return {r.zero, r.one}; }

Rail constant(Logic v)
{
  if (v == Logic::One) return {kTrue, kFalse};
  if (v == Logic::Zero) return {kFalse, kTrue};
  return {kFalse, kFalse};
}

}  // namespace

struct SatSession::Impl {
  const Shared& s;
  const Netlist& n;
  const ProcedureModel& pm;
  const std::size_t N, c;

  std::unique_ptr<CaDiCaL::Solver> solver;
  int last_var = 0;
  std::vector<Rail> good_rail;  // [frame * N + net], shared by all faults
  std::vector<int> var_lit;

  // Per-fault state.
  Fault f;
  int act = 0;  // guards every constraint of the current fault
  bool trivially_false = false;
  NetId forced_net = kNone;
  GateId pin_gate = kNone;
  std::vector<Rail> faulty_rail;
  std::vector<int> differs;
  std::vector<bool> in_cone;
  std::vector<NetId> cone_order;  // fault start first, then topological
  std::vector<bool> observed;

  Impl(const Shared& shared, const ProcedureModel& model)
      : s(shared), n(shared.n), pm(model), N(shared.n.net_count()), c(model.frames - 1), faulty_rail(N),
        differs(N, 0), in_cone(N, false), observed(N, false)
  {
    for (FlopId q : pm.captured) observed[n.flops()[q].d] = true;
    if (pm.observe_po)
      for (NetId o : n.primary_outputs()) observed[o] = true;
    reset();
  }

  void reset()
  {
    solver = std::make_unique<CaDiCaL::Solver>();
    last_var = 1;
    solver->add(kTrue);
    solver->add(0);
    good_rail.assign(pm.frames * N, Rail{});
    var_lit.assign(s.vars.size(), 0);
  }

  int fresh() { return ++last_var; }

  void clause(std::initializer_list<int> lits)
  {
    for (int l : lits) solver->add(l);
    solver->add(0);
  }

  // Constraint of the current fault only.
  void require(int lit)
  {
    if (lit == kFalse) trivially_false = true;
    clause({-act, lit});
  }

  int and_of(std::initializer_list<int> lits) { return and_of(std::vector<int>(lits)); }
  int or_of(std::initializer_list<int> lits) { return or_of(std::vector<int>(lits)); }

  int and_of(const std::vector<int>& lits)
  {
    std::vector<int> live;
    for (int l : lits) {
      if (l == kFalse) return kFalse;
      if (l != kTrue) live.push_back(l);
    }
    if (live.empty()) return kTrue;
    if (live.size() == 1) return live[0];
    const int y = fresh();
    for (int l : live) clause({-y, l});
    solver->add(y);
    for (int l : live) solver->add(-l);
    solver->add(0);
    return y;
  }

  int or_of(const std::vector<int>& lits)
  {
    std::vector<int> neg;
    neg.reserve(lits.size());
    for (int l : lits) neg.push_back(-l);
    return -and_of(neg);
  }

  Rail variable(std::uint32_t var)
  {
    if (var == kNone) return constant(Logic::X);
    if (var_lit[var] == 0) var_lit[var] = fresh();
    return {var_lit[var], -var_lit[var]};
  }

  int xor_of(int a, int b)
  {
    if (a == kFalse) return b;
    if (a == kTrue) return -b;
    if (b == kFalse) return a;
    if (b == kTrue) return -a;
    if (a == b) return kFalse;
    if (a == -b) return kTrue;
    const int y = fresh();
    clause({-y, a, b});
    clause({-y, -a, -b});
    clause({y, -a, b});
    clause({y, a, -b});
    return y;
  }

  int select(int sel, int a, int b)
  {
    if (sel == kFalse || a == b) return a;
    if (sel == kTrue) return b;
    const int y = fresh();
    clause({sel, -a, y});
    clause({sel, a, -y});
    clause({-sel, -b, y});
    clause({-sel, b, -y});
    clause({-a, -b, y});
    clause({a, b, -y});
    return y;
  }

  // Gate whose inputs are all known to be 0 or 1: one variable per output.
  int eval_binary(GateKind kind, const std::vector<Rail>& in)
  {
    std::vector<int> v;
    for (const Rail& r : in) v.push_back(r.one);
    switch (kind) {
    case GateKind::And: return and_of(v);
    case GateKind::Nand: return -and_of(v);
    case GateKind::Or: return or_of(v);
    case GateKind::Nor: return -or_of(v);
    case GateKind::Xor:
    case GateKind::Xnor: {
      int acc = v[0];
      for (std::size_t i = 1; i < v.size(); ++i) acc = xor_of(acc, v[i]);
      return kind == GateKind::Xor ? acc : -acc;
    }
    case GateKind::Not: return -v[0];
    case GateKind::Buf: return v[0];
    case GateKind::Mux2: return select(v[2], v[0], v[1]);
    }
    return kFalse;
  }

  Rail eval(GateKind kind, const std::vector<Rail>& in)
  {
    if (std::all_of(in.begin(), in.end(), [](const Rail& r) { return r.zero == -r.one; })) {
      const int y = eval_binary(kind, in);
      return {y, -y};
    }
    std::vector<int> ones, zeros;
    for (const Rail& r : in) {
      ones.push_back(r.one);
      zeros.push_back(r.zero);
    }
    switch (kind) {
    case GateKind::And: return {and_of(ones), or_of(zeros)};
    case GateKind::Nand: return swap({and_of(ones), or_of(zeros)});
    case GateKind::Or: return {or_of(ones), and_of(zeros)};
    case GateKind::Nor: return swap({or_of(ones), and_of(zeros)});
    case GateKind::Xor:
    case GateKind::Xnor: {
      Rail acc = in[0];
      for (std::size_t i = 1; i < in.size(); ++i) {
        const Rail b = in[i];
        acc = {or_of({and_of({acc.one, b.zero}), and_of({acc.zero, b.one})}),
               or_of({and_of({acc.zero, b.zero}), and_of({acc.one, b.one})})};
      }
      return kind == GateKind::Xor ? acc : swap(acc);
    }
    case GateKind::Not: return swap(in[0]);
    case GateKind::Buf: return in[0];
    case GateKind::Mux2: {
      const Rail a = in[0], b = in[1], sel = in[2];
      return {or_of({and_of({sel.zero, a.one}), and_of({sel.one, b.one}), and_of({a.one, b.one})}),
              or_of({and_of({sel.zero, a.zero}), and_of({sel.one, b.zero}), and_of({a.zero, b.zero})})};
    }
    }
    return constant(Logic::X);
  }

  Rail good(std::size_t frame, NetId net)
  {
    if (good_rail[frame * N + net].one != 0) return good_rail[frame * N + net];
    const Driver& d = n.driver(net);
    Rail r = constant(Logic::X);
    if (d.kind == DriverKind::PrimaryInput) {
      r = variable(s.vars.var_of_pi[d.index]);
    } else if (d.kind == DriverKind::Flop) {
      const FlipFlop& ff = n.flops()[d.index];
      if (frame == 0) r = variable(s.vars.var_of_flop[d.index]);
      else r = good(frame - 1, pm.pulsed[frame - 1][ff.domain] ? ff.d : ff.q);
    } else if (d.kind == DriverKind::Gate) {
      const Gate& gate = n.gates()[d.index];
      std::vector<Rail> in;
      in.reserve(gate.inputs.size());
      for (NetId x : gate.inputs) in.push_back(good(frame, x));
      r = eval(gate.kind, in);
    }
    good_rail[frame * N + net] = r;
    return r;
  }

  Rail faulty(NetId net)
  {
    if (!in_cone[net]) return good(c, net);
    if (net == forced_net) return constant(f.stuck);
    if (faulty_rail[net].one != 0) return faulty_rail[net];
    const Driver& d = n.driver(net);
    const Gate& gate = n.gates()[d.index];
    std::vector<Rail> in;
    in.reserve(gate.inputs.size());
    for (std::size_t i = 0; i < gate.inputs.size(); ++i)
      in.push_back(d.index == pin_gate && i == f.site.pin ? constant(f.stuck) : faulty(gate.inputs[i]));
    const Rail r = eval(gate.kind, in);
    faulty_rail[net] = r;
    return r;
  }

  void mark_cone()
  {
    for (NetId x : cone_order) {
      in_cone[x] = false;
      faulty_rail[x] = Rail{};
      differs[x] = 0;
    }
    cone_order.clear();
    forced_net = kNone;
    pin_gate = kNone;
    switch (f.site.kind) {
    case FaultSite::Kind::GateOutput: forced_net = n.gates()[f.site.element].output; break;
    case FaultSite::Kind::FlopQ: forced_net = n.flops()[f.site.element].q; break;
    case FaultSite::Kind::GateInput: pin_gate = f.site.element; break;
    case FaultSite::Kind::FlopD: return;
    }
    const NetId start = forced_net != kNone ? forced_net : n.gates()[pin_gate].output;
    in_cone[start] = true;
    std::vector<NetId> work{start};
    std::vector<GateId> gates;
    while (!work.empty()) {
      const NetId net = work.back();
      work.pop_back();
      for (const auto& fo : n.fanouts(net)) {
        if (fo.kind != Fanout::Kind::GatePin) continue;
        const NetId out = n.gates()[fo.element].output;
        if (!in_cone[out]) {
          in_cone[out] = true;
          work.push_back(out);
          gates.push_back(fo.element);
        }
      }
    }
    const auto& rank = n.topo_rank();
    std::sort(gates.begin(), gates.end(), [&](GateId a, GateId b) { return rank[a] < rank[b]; });
    cone_order.push_back(start);
    for (GateId g : gates) cone_order.push_back(n.gates()[g].output);
  }

  // A difference starts at the fault and, net by net, must reach an observed
  // point; `differs` marks the nets on such a path.
  bool encode_paths()
  {
    // Reverse topological order settles every fanout first.
    for (auto it = cone_order.rbegin(); it != cone_order.rend(); ++it) {
      const NetId x = *it;
      std::vector<int> next;
      for (const auto& fo : n.fanouts(x))
        if (fo.kind == Fanout::Kind::GatePin && differs[n.gates()[fo.element].output] != 0)
          next.push_back(differs[n.gates()[fo.element].output]);
      if (!observed[x] && next.empty()) continue;
      const int d = fresh();
      differs[x] = d;
      const Rail g = good(c, x), fv = faulty(x);
      clause({-act, -d, or_of({and_of({g.one, fv.zero}), and_of({g.zero, fv.one})})});
      if (observed[x]) continue;
      solver->add(-act);
      solver->add(-d);
      for (int e : next) solver->add(e);
      solver->add(0);
    }
    const int start = differs[cone_order.front()];
    if (start == 0) return false;
    require(start);
    return true;
  }

  SearchResult solve(const Fault& fault, int conflict_limit)
  {
    if (last_var > kRecycleVariables) reset();
    f = fault;
    trivially_false = false;
    act = fresh();
    mark_cone();

    SearchResult result;
    result.outcome = SearchOutcome::Untestable;
    const NetId site = site_net(n, f.site);
    const Rail cap = good(c, site);
    require(f.stuck == Logic::Zero ? cap.one : cap.zero);
    if (f.model == FaultModel::Transition) {
      const Rail launch = good(c - 1, site);
      require(f.stuck == Logic::Zero ? launch.zero : launch.one);
    }
    const bool possible =
        f.site.kind == FaultSite::Kind::FlopD ? pm.is_captured[f.site.element] : encode_paths();

    if (possible && !trivially_false) {
      solver->assume(act);
      solver->limit("conflicts", conflict_limit);
      const int status = solver->solve();
      if (status == 10) {
        result.outcome = SearchOutcome::Detected;
        result.cube = cube();
      } else if (status != 20) {
        result.outcome = SearchOutcome::Aborted;
      }
    }
    clause({-act});
    return result;
  }

  TestCube cube()
  {
    TestCube cube;
    cube.procedure = pm.procedure;
    auto value = [&](std::uint32_t var) {
      if (var_lit[var] == 0) return Logic::X;
      return from_bool(solver->val(var_lit[var]) > 0);
    };
    std::uint32_t var = 0;
    for (const auto& chain : n.chains()) {
      cube.scan_load.emplace_back();
      for (std::size_t i = 0; i < chain.cells.size(); ++i) cube.scan_load.back().push_back(value(var++));
    }
    cube.pi_values.assign(n.primary_inputs().size(), Logic::X);
    for (std::size_t k = 0; k < s.vars.pi_index.size(); ++k)
      cube.pi_values[s.vars.pi_index[k]] = value(static_cast<std::uint32_t>(s.vars.cell_flop.size() + k));
    return cube;
  }
};

SatSession::SatSession(const Shared& s, const ProcedureModel& pm) : impl_(std::make_unique<Impl>(s, pm)) {}
SatSession::~SatSession() = default;
SatSession::SatSession(SatSession&&) noexcept = default;
SatSession& SatSession::operator=(SatSession&&) noexcept = default;

SearchResult SatSession::solve(const Fault& f, int conflict_limit) { return impl_->solve(f, conflict_limit); }

SearchResult sat_search(const Shared& s, const Fault& f, const ProcedureModel& pm, int conflict_limit)
{
  SatSession session(s, pm);
  return session.solve(f, conflict_limit);
}

}  // namespace dftclk::detail

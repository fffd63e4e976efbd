#include "dftclk/tick_sim.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace dftclk {

NetId ClockedCircuit::net(std::string_view name)
{
  auto [it, inserted] = index_.emplace(std::string(name), static_cast<NetId>(names_.size()));
  if (inserted) names_.emplace_back(name);
  return it->second;
}

std::optional<NetId> ClockedCircuit::find(std::string_view name) const
{
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ClockedCircuit::add_input(std::string_view name) { inputs_.push_back(net(name)); }

void ClockedCircuit::add_gate(GateKind kind, std::string_view out, const std::vector<std::string>& ins)
{
  if (!arity_ok(kind, ins.size())) throw std::invalid_argument("gate arity mismatch");
  Gate g;
  g.kind = kind;
  g.output = net(out);
  for (const auto& i : ins) g.inputs.push_back(net(i));
  gates_.push_back(std::move(g));
}

void ClockedCircuit::add_flop(std::string_view name, std::string_view d, std::string_view q,
                              std::string_view clock, std::string_view clear, std::string_view qn)
{
  Storage s;
  s.kind = Storage::Kind::RiseFlop;
  s.name = std::string(name);
  s.d = net(d);
  s.q = net(q);
  s.clock = net(clock);
  if (!clear.empty()) s.clear = net(clear);
  if (!qn.empty()) s.qn = net(qn);
  storage_.push_back(std::move(s));
}

void ClockedCircuit::add_latch_low(std::string_view name, std::string_view d, std::string_view q,
                                   std::string_view enable)
{
  Storage s;
  s.kind = Storage::Kind::LatchLow;
  s.name = std::string(name);
  s.d = net(d);
  s.q = net(q);
  s.clock = net(enable);
  storage_.push_back(std::move(s));
}

void ClockedCircuit::finalize()
{
  std::vector<std::int64_t> driver(names_.size(), -1);
  for (GateId g = 0; g < gates_.size(); ++g) driver[gates_[g].output] = g;
  std::vector<std::uint32_t> pending(gates_.size(), 0);
  std::vector<std::vector<GateId>> users(gates_.size());
  for (GateId g = 0; g < gates_.size(); ++g)
    for (NetId in : gates_[g].inputs)
      if (driver[in] >= 0) {
        ++pending[g];
        users[static_cast<GateId>(driver[in])].push_back(g);
      }
  std::priority_queue<GateId, std::vector<GateId>, std::greater<>> ready;
  for (GateId g = 0; g < gates_.size(); ++g)
    if (pending[g] == 0) ready.push(g);
  order_.clear();
  while (!ready.empty()) {
    GateId g = ready.top();
    ready.pop();
    order_.push_back(g);
    for (GateId u : users[g])
      if (--pending[u] == 0) ready.push(u);
  }
  if (order_.size() != gates_.size()) throw std::invalid_argument("clocked circuit has a combinational loop");
}

// --- simulator --------------------------------------------------------------

TickSimulator::TickSimulator(const ClockedCircuit& circuit, Logic initial_storage)
    : circuit_(&circuit),
      nets_(circuit.net_count(), Logic::X),
      state_(circuit.storage().size(), initial_storage)
{
  for (NetId in : circuit.inputs()) nets_[in] = Logic::Zero;
  settle(nullptr);
}

Logic TickSimulator::storage_value(std::string_view name) const
{
  const auto& st = circuit_->storage();
  for (std::size_t i = 0; i < st.size(); ++i)
    if (st[i].name == name) return state_[i];
  throw std::out_of_range("no storage element '" + std::string(name) + "'");
}

void TickSimulator::set_storage(std::string_view name, Logic v)
{
  const auto& st = circuit_->storage();
  for (std::size_t i = 0; i < st.size(); ++i)
    if (st[i].name == name) {
      state_[i] = v;
      settle(nullptr);
      return;
    }
  throw std::out_of_range("no storage element '" + std::string(name) + "'");
}

void TickSimulator::apply(std::span<const std::pair<NetId, Logic>> inputs)
{
  const std::vector<Logic> before = nets_;
  for (const auto& [net, v] : inputs) nets_.at(net) = v;
  settle(&before);
}

namespace {

Logic merge(Logic a, Logic b) { return a == b ? a : Logic::X; }

}  // namespace

void TickSimulator::settle(const std::vector<Logic>* before)
{
  const auto& st = circuit_->storage();
  std::vector<bool> fired(st.size(), false);
  std::vector<Logic> in;
  for (int iter = 0; iter < 64; ++iter) {
    for (std::size_t i = 0; i < st.size(); ++i) {
      nets_[st[i].q] = state_[i];
      if (st[i].qn != kNone) nets_[st[i].qn] = logic_not(state_[i]);
    }
    for (GateId g : circuit_->order()) {
      const Gate& gate = circuit_->gates()[g];
      in.clear();
      for (NetId n : gate.inputs) in.push_back(nets_[n]);
      nets_[gate.output] = eval_gate(gate.kind, in);
    }
    bool changed = false;
    for (std::size_t i = 0; i < st.size(); ++i) {
      const Storage& s = st[i];
      Logic next = state_[i];
      if (s.kind == Storage::Kind::RiseFlop) {
        if (before && !fired[i]) {
          const Logic was = (*before)[s.clock];
          const Logic now = nets_[s.clock];
          if (was == Logic::Zero && now == Logic::One) {
            next = (*before)[s.d];
            fired[i] = true;
          } else if (was != now && (was == Logic::X || now == Logic::X) && was != Logic::One &&
                     now != Logic::Zero) {
            next = merge(next, (*before)[s.d]);
            fired[i] = true;
          }
        }
        if (s.clear != kNone) {
          const Logic c = nets_[s.clear];
          if (c == Logic::One) next = Logic::Zero;
          else if (c == Logic::X) next = merge(next, Logic::Zero);
        }
      } else {
        const Logic en = nets_[s.clock];
        if (en == Logic::Zero) next = nets_[s.d];
        else if (en == Logic::X) next = merge(next, nets_[s.d]);
      }
      if (next != state_[i]) {
        state_[i] = next;
        changed = true;
      }
    }
    if (!changed) return;
  }
  throw std::runtime_error("clocked circuit did not settle");
}

// --- waveform ---------------------------------------------------------------

bool TickWaveform::has(std::string_view name) const
{
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<Logic>& TickWaveform::at(std::string_view name) const
{
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("waveform has no signal '" + std::string(name) + "'");
  return values[static_cast<std::size_t>(it - names.begin())];
}

std::vector<Logic>& TickWaveform::add(std::string_view name, std::size_t half_ticks, Logic fill)
{
  names.emplace_back(name);
  values.emplace_back(half_ticks, fill);
  return values.back();
}

void TickWaveform::add_ticks(std::string_view name, std::span<const Logic> per_tick)
{
  auto& v = add(name, per_tick.size() * 2);
  for (std::size_t k = 0; k < per_tick.size(); ++k) v[2 * k] = v[2 * k + 1] = per_tick[k];
}

std::string TickWaveform::dump() const
{
  std::ostringstream os;
  for (std::size_t h = 0; h < half_ticks(); ++h) {
    for (std::size_t s = 0; s < names.size(); ++s) {
      if (h > 0 && values[s][h] == values[s][h - 1]) continue;
      os << h / 2 << (h % 2 ? ".5" : "") << ' ' << names[s] << ' ' << to_char(values[s][h]) << '\n';
    }
  }
  return os.str();
}

TickWaveform simulate_ticks(const ClockedCircuit& circuit, const TickWaveform& stimuli,
                            const std::vector<std::string>& record, Logic initial_storage)
{
  std::vector<std::pair<NetId, std::size_t>> drive;
  for (std::size_t s = 0; s < stimuli.names.size(); ++s) {
    auto id = circuit.find(stimuli.names[s]);
    if (!id || std::find(circuit.inputs().begin(), circuit.inputs().end(), *id) == circuit.inputs().end())
      throw std::invalid_argument("stimulus '" + stimuli.names[s] + "' is not a circuit input");
    drive.emplace_back(*id, s);
  }
  std::vector<NetId> rec;
  for (const auto& r : record) {
    auto id = circuit.find(r);
    if (!id) throw std::invalid_argument("no net '" + r + "' to record");
    rec.push_back(*id);
  }
  TickWaveform out;
  const std::size_t n = stimuli.half_ticks();
  for (const auto& r : record) out.add(r, n, Logic::X);

  TickSimulator sim(circuit, initial_storage);
  std::vector<std::pair<NetId, Logic>> now;
  for (std::size_t h = 0; h < n; ++h) {
    now.clear();
    for (auto [id, s] : drive) now.emplace_back(id, stimuli.values[s][h]);
    sim.apply(now);
    for (std::size_t r = 0; r < rec.size(); ++r) out.values[r][h] = sim.value(rec[r]);
  }
  return out;
}

}  // namespace dftclk

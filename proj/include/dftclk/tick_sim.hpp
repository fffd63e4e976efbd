// Half-tick simulation of small clocked gate circuits (flops, low-transparent
// latches, combinational gates). Each PLL tick has a high phase and a low
// phase; all stimulus changes happen at phase boundaries.
#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/netlist.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dftclk {

struct Storage {
  enum class Kind : std::uint8_t { RiseFlop, LatchLow };
  Kind kind = Kind::RiseFlop;
  std::string name;
  NetId d = kNone;
  NetId q = kNone;
  NetId clock = kNone;  // flop clock, or latch enable (transparent while 0)
  NetId clear = kNone;  // asynchronous active-high clear (flops only)
  NetId qn = kNone;     // optional inverted output
};

class ClockedCircuit {
public:
  NetId net(std::string_view name);
  std::optional<NetId> find(std::string_view name) const;
  const std::string& net_name(NetId id) const { return names_.at(id); }
  std::size_t net_count() const { return names_.size(); }

  void add_input(std::string_view name);
  void add_gate(GateKind kind, std::string_view out, const std::vector<std::string>& ins);
  void add_flop(std::string_view name, std::string_view d, std::string_view q, std::string_view clock,
                std::string_view clear = {}, std::string_view qn = {});
  void add_latch_low(std::string_view name, std::string_view d, std::string_view q,
                     std::string_view enable);
  /// Levelizes the gates; storage outputs and inputs are sources.
  void finalize();

  const std::vector<NetId>& inputs() const { return inputs_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<GateId>& order() const { return order_; }
  const std::vector<Storage>& storage() const { return storage_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NetId> index_;
  std::vector<NetId> inputs_;
  std::vector<Gate> gates_;
  std::vector<GateId> order_;
  std::vector<Storage> storage_;
};

/// Stateful stepping engine. Flops triggered at an instant sample the values
/// settled before that instant, so simultaneous edges behave synchronously.
class TickSimulator {
public:
  explicit TickSimulator(const ClockedCircuit& circuit, Logic initial_storage = Logic::Zero);

  /// Apply new input values at one instant and settle.
  void apply(std::span<const std::pair<NetId, Logic>> inputs);
  Logic value(NetId net) const { return nets_.at(net); }
  Logic storage_value(std::string_view name) const;
  void set_storage(std::string_view name, Logic v);

private:
  void settle(const std::vector<Logic>* before);

  const ClockedCircuit* circuit_;
  std::vector<Logic> nets_;
  std::vector<Logic> state_;
};

/// Per-signal value sequences, two samples per PLL tick (index 2k is the high
/// phase of tick k, 2k+1 the low phase).
struct TickWaveform {
  std::vector<std::string> names;
  std::vector<std::vector<Logic>> values;

  std::size_t half_ticks() const { return values.empty() ? 0 : values.front().size(); }
  std::size_t ticks() const { return half_ticks() / 2; }
  bool has(std::string_view name) const;
  const std::vector<Logic>& at(std::string_view name) const;
  std::vector<Logic>& add(std::string_view name, std::size_t half_ticks, Logic fill = Logic::Zero);
  /// Both phases of tick k take value seq[k].
  void add_ticks(std::string_view name, std::span<const Logic> per_tick);

  /// `<tick> <signal> <0|1|x>` for every change (and all signals at 0); low
  /// phases print as `<tick>.5`.
  std::string dump() const;
};

/// Drive the circuit from `stimuli` (every stimulus name must be a circuit
/// input) and record the named nets.
TickWaveform simulate_ticks(const ClockedCircuit& circuit, const TickWaveform& stimuli,
                            const std::vector<std::string>& record,
                            Logic initial_storage = Logic::Zero);

}  // namespace dftclk

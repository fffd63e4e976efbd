// Gate-level netlist model with clock domains and scan chains.
//
// Text grammar (one statement per line, '#' starts a comment):
//
//   INPUT(<net>) | OUTPUT(<net>)
//   <net> = <KIND>(<net>{,<net>})                  KIND: AND NAND OR NOR XOR XNOR NOT BUF MUX2
//   <q> = DFF(<d>, domain=<name>)
//   <q> = SDFF(<d>, si=<net>, domain=<name>)      scan enable is the implicit global SE
//   DOMAIN <name> PLLRATIO <int>
//   CHAIN <name> SI=<pin> SO=<pin> CELLS=<q1>,<q2>,...
//
// MUX2 takes (in0, in1, sel) and outputs sel ? in1 : in0. The effective D of a
// scan flop is MUX2(d, si, SE).
#pragma once

#include "dftclk/logic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dftclk {

using NetId = std::uint32_t;
using GateId = std::uint32_t;
using FlopId = std::uint32_t;
using DomainId = std::uint32_t;

inline constexpr std::uint32_t kNone = 0xffffffffU;

struct Gate {
  GateKind kind = GateKind::Buf;
  std::vector<NetId> inputs;
  NetId output = kNone;
};

struct FlipFlop {
  NetId d = kNone;
  NetId q = kNone;
  DomainId domain = kNone;
  std::optional<NetId> scan_in;  // present for scan cells

  bool is_scan() const { return scan_in.has_value(); }
};

struct ClockDomain {
  std::string name;
  int pll_ratio = 1;  // PLL ticks per domain clock period
  std::string external_clock_name = "scan_clk";
};

struct ScanChain {
  std::string name;
  std::vector<FlopId> cells;  // scan-in to scan-out
  NetId scan_in_pin = kNone;
  NetId scan_out_pin = kNone;
};

enum class DriverKind : std::uint8_t { None, PrimaryInput, Gate, Flop };

struct Driver {
  DriverKind kind = DriverKind::None;
  std::uint32_t index = kNone;
};

/// Where a net is consumed.
struct Fanout {
  enum class Kind : std::uint8_t { GatePin, FlopD, FlopScanIn };
  Kind kind;
  std::uint32_t element;  // gate or flop id
  std::uint32_t pin;      // input position for GatePin
};

enum class NetlistErrc {
  Syntax,
  UndefinedNet,
  MultiplyDrivenNet,
  CombinationalLoop,
  ArityMismatch,
  FlopWithoutDomain,
  UnknownScanCell,
  ScanChainInvalid,
  DomainInvalid,
};

const char* errc_name(NetlistErrc code);

class NetlistError : public std::runtime_error {
public:
  NetlistError(NetlistErrc code, std::string message, int line = 0, int column = 0,
               std::vector<std::string> nets = {});

  NetlistErrc code() const { return code_; }
  int line() const { return line_; }
  int column() const { return column_; }
  /// Nets named by the diagnostic, e.g. the members of a combinational cycle.
  const std::vector<std::string>& nets() const { return nets_; }

private:
  NetlistErrc code_;
  int line_;
  int column_;
  std::vector<std::string> nets_;
};

class NetlistBuilder;

/// Immutable, fully elaborated circuit. Safe to share between threads.
class Netlist {
public:
  std::size_t net_count() const { return net_names_.size(); }
  const std::string& net_name(NetId id) const { return net_names_.at(id); }
  std::optional<NetId> find_net(std::string_view name) const;

  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<FlipFlop>& flops() const { return flops_; }
  const std::vector<ClockDomain>& domains() const { return domains_; }
  const std::vector<ScanChain>& chains() const { return chains_; }
  const std::vector<NetId>& primary_inputs() const { return inputs_; }
  const std::vector<NetId>& primary_outputs() const { return outputs_; }
  /// Combinational gates in topological order.
  const std::vector<GateId>& levelization() const { return order_; }
  /// Position of each gate inside levelization().
  const std::vector<std::uint32_t>& topo_rank() const { return rank_; }

  const Driver& driver(NetId net) const { return drivers_.at(net); }
  const std::vector<Fanout>& fanouts(NetId net) const { return fanouts_.at(net); }
  std::optional<DomainId> find_domain(std::string_view name) const;
  std::optional<FlopId> flop_by_q(NetId q) const;
  /// Index of a primary input net inside primary_inputs(), if it is one.
  std::optional<std::size_t> input_index(NetId net) const;
  bool is_output(NetId net) const;
  /// True when the PI only feeds scan-in pins (irrelevant while SE=0).
  bool is_scan_only_input(std::size_t pi_index) const;

  std::size_t scan_flop_count() const;
  std::size_t longest_chain() const;

private:
  friend class NetlistBuilder;

  std::vector<std::string> net_names_;
  std::unordered_map<std::string, NetId> net_index_;
  std::vector<Gate> gates_;
  std::vector<FlipFlop> flops_;
  std::vector<ClockDomain> domains_;
  std::vector<ScanChain> chains_;
  std::vector<NetId> inputs_;
  std::vector<NetId> outputs_;
  std::vector<GateId> order_;
  std::vector<std::uint32_t> rank_;
  std::vector<Driver> drivers_;
  std::vector<std::vector<Fanout>> fanouts_;
  std::vector<std::uint32_t> pi_of_net_;
  std::vector<bool> is_output_;
  std::vector<FlopId> flop_of_q_;
};

/// Programmatic construction; build() performs the same elaboration and
/// validation as the parser. Names are interned in first-use order.
class NetlistBuilder {
public:
  NetlistBuilder& input(std::string_view net, int line = 0);
  NetlistBuilder& output(std::string_view net, int line = 0);
  NetlistBuilder& gate(GateKind kind, std::string_view out, const std::vector<std::string>& ins,
                       int line = 0);
  NetlistBuilder& flop(std::string_view q, std::string_view d, std::string_view domain,
                       std::optional<std::string> scan_in = std::nullopt, int line = 0);
  NetlistBuilder& domain(std::string_view name, int pll_ratio, int line = 0);
  NetlistBuilder& chain(std::string_view name, std::string_view si, std::string_view so,
                        const std::vector<std::string>& cells, int line = 0);

  Netlist build() const;

private:
  struct PendingGate {
    GateKind kind;
    std::string out;
    std::vector<std::string> ins;
    int line;
  };
  struct PendingFlop {
    std::string q, d, domain;
    std::optional<std::string> si;
    int line;
  };
  struct PendingDomain {
    std::string name;
    int ratio;
    int line;
  };
  struct PendingChain {
    std::string name, si, so;
    std::vector<std::string> cells;
    int line;
  };
  struct PendingPort {
    std::string net;
    int line;
  };
  // Statements in declaration order so net interning follows the source.
  struct Stmt {
    enum class Kind { Input, Output, Gate, Flop } kind;
    std::size_t index;
  };

  std::vector<PendingPort> inputs_, outputs_;
  std::vector<PendingGate> gates_;
  std::vector<PendingFlop> flops_;
  std::vector<PendingDomain> domains_;
  std::vector<PendingChain> chains_;
  std::vector<Stmt> order_;
};

Netlist parse_netlist(std::string_view text);
Netlist parse_netlist_file(const std::filesystem::path& path);

/// Stable topological order of the combinational gates (declaration order
/// breaks ties). Throws NetlistError{CombinationalLoop} naming the cycle.
std::vector<GateId> levelize(const Netlist& netlist);

/// Serialize back to the text grammar; parse(write(n)) is structurally equal to n.
std::string write_netlist(const Netlist& netlist);

/// Structural equality (names, gates, flops, domains, chains, ports).
bool structurally_equal(const Netlist& a, const Netlist& b);

// --- fault sites -----------------------------------------------------------

struct FaultSite {
  enum class Kind : std::uint8_t { GateInput, GateOutput, FlopD, FlopQ };
  Kind kind;
  std::uint32_t element;  // gate or flop id
  std::uint32_t pin = 0;  // input index for GateInput

  friend bool operator==(const FaultSite&, const FaultSite&) = default;
};

/// One site per gate input pin and gate output pin, then the D and Q pins of
/// every flop. PI/PO connection points are the gate/flop pins they attach to.
std::vector<FaultSite> fault_sites(const Netlist& netlist);

/// The net whose value the site observes (input net for pin sites).
NetId site_net(const Netlist& netlist, const FaultSite& site);
/// Printable name: `<gate-out>/in<k>`, `<gate-out>/out`, `<q>/D`, `<q>/Q`.
std::string site_name(const Netlist& netlist, const FaultSite& site);

}  // namespace dftclk

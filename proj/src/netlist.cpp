#include "dftclk/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

namespace dftclk {

const char* errc_name(NetlistErrc code)
{
  switch (code) {
  case NetlistErrc::Syntax: return "E_SYNTAX";
  case NetlistErrc::UndefinedNet: return "E_UNDEFINED_NET";
  case NetlistErrc::MultiplyDrivenNet: return "E_MULTIPLY_DRIVEN";
  case NetlistErrc::CombinationalLoop: return "E_COMB_LOOP";
  case NetlistErrc::ArityMismatch: return "E_ARITY";
  case NetlistErrc::FlopWithoutDomain: return "E_FLOP_DOMAIN";
  case NetlistErrc::UnknownScanCell: return "E_UNKNOWN_SCAN_CELL";
  case NetlistErrc::ScanChainInvalid: return "E_SCAN_CHAIN";
  case NetlistErrc::DomainInvalid: return "E_DOMAIN";
  }
  return "E_UNKNOWN";
}

namespace {

std::string format_diag(NetlistErrc code, const std::string& message, int line, int column)
{
  std::ostringstream os;
  os << errc_name(code);
  if (line > 0) {
    os << " at " << line;
    if (column > 0) os << ':' << column;
  }
  os << ": " << message;
  return os.str();
}

}  // namespace

NetlistError::NetlistError(NetlistErrc code, std::string message, int line, int column,
                           std::vector<std::string> nets)
    : std::runtime_error(format_diag(code, message, line, column)),
      code_(code),
      line_(line),
      column_(column),
      nets_(std::move(nets))
{
}

// --- Netlist accessors -----------------------------------------------------

std::optional<NetId> Netlist::find_net(std::string_view name) const
{
  auto it = net_index_.find(std::string(name));
  if (it == net_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<DomainId> Netlist::find_domain(std::string_view name) const
{
  for (DomainId i = 0; i < domains_.size(); ++i)
    if (domains_[i].name == name) return i;
  return std::nullopt;
}

std::optional<FlopId> Netlist::flop_by_q(NetId q) const
{
  if (q >= flop_of_q_.size() || flop_of_q_[q] == kNone) return std::nullopt;
  return flop_of_q_[q];
}

std::optional<std::size_t> Netlist::input_index(NetId net) const
{
  if (net >= pi_of_net_.size() || pi_of_net_[net] == kNone) return std::nullopt;
  return pi_of_net_[net];
}

bool Netlist::is_output(NetId net) const { return net < is_output_.size() && is_output_[net]; }

bool Netlist::is_scan_only_input(std::size_t pi_index) const
{
  const NetId net = inputs_.at(pi_index);
  if (is_output(net)) return false;
  const auto& fo = fanouts_[net];
  return std::all_of(fo.begin(), fo.end(),
                     [](const Fanout& f) { return f.kind == Fanout::Kind::FlopScanIn; });
}

std::size_t Netlist::scan_flop_count() const
{
  return static_cast<std::size_t>(
      std::count_if(flops_.begin(), flops_.end(), [](const FlipFlop& f) { return f.is_scan(); }));
}

std::size_t Netlist::longest_chain() const
{
  std::size_t n = 0;
  for (const auto& c : chains_) n = std::max(n, c.cells.size());
  return n;
}

// --- builder ---------------------------------------------------------------

NetlistBuilder& NetlistBuilder::input(std::string_view net, int line)
{
  order_.push_back({Stmt::Kind::Input, inputs_.size()});
  inputs_.push_back({std::string(net), line});
  return *this;
}

NetlistBuilder& NetlistBuilder::output(std::string_view net, int line)
{
  order_.push_back({Stmt::Kind::Output, outputs_.size()});
  outputs_.push_back({std::string(net), line});
  return *this;
}

NetlistBuilder& NetlistBuilder::gate(GateKind kind, std::string_view out,
                                     const std::vector<std::string>& ins, int line)
{
  order_.push_back({Stmt::Kind::Gate, gates_.size()});
  gates_.push_back({kind, std::string(out), ins, line});
  return *this;
}

NetlistBuilder& NetlistBuilder::flop(std::string_view q, std::string_view d,
                                     std::string_view domain,
                                     std::optional<std::string> scan_in, int line)
{
  order_.push_back({Stmt::Kind::Flop, flops_.size()});
  flops_.push_back({std::string(q), std::string(d), std::string(domain), std::move(scan_in), line});
  return *this;
}

NetlistBuilder& NetlistBuilder::domain(std::string_view name, int pll_ratio, int line)
{
  domains_.push_back({std::string(name), pll_ratio, line});
  return *this;
}

NetlistBuilder& NetlistBuilder::chain(std::string_view name, std::string_view si,
                                      std::string_view so, const std::vector<std::string>& cells,
                                      int line)
{
  chains_.push_back({std::string(name), std::string(si), std::string(so), cells, line});
  return *this;
}

namespace {

std::vector<GateId> topo_order(const Netlist& n, const std::vector<Gate>& gates,
                               const std::vector<Driver>& drivers,
                               const std::vector<std::string>& names)
{
  // Kahn's algorithm with a min-heap on gate id: stable, declaration-ordered.
  std::vector<std::uint32_t> pending(gates.size(), 0);
  std::vector<std::vector<GateId>> users(gates.size());
  for (GateId g = 0; g < gates.size(); ++g) {
    for (NetId in : gates[g].inputs) {
      const Driver& d = drivers[in];
      if (d.kind == DriverKind::Gate) {
        ++pending[g];
        users[d.index].push_back(g);
      }
    }
  }
  std::priority_queue<GateId, std::vector<GateId>, std::greater<>> ready;
  for (GateId g = 0; g < gates.size(); ++g)
    if (pending[g] == 0) ready.push(g);
  std::vector<GateId> order;
  order.reserve(gates.size());
  while (!ready.empty()) {
    GateId g = ready.top();
    ready.pop();
    order.push_back(g);
    for (GateId u : users[g])
      if (--pending[u] == 0) ready.push(u);
  }
  if (order.size() == gates.size()) return order;

  // Walk predecessors among the unplaced gates until one repeats.
  GateId start = kNone;
  for (GateId g = 0; g < gates.size(); ++g)
    if (pending[g] != 0) {
      start = g;
      break;
    }
  std::vector<std::int64_t> seen_at(gates.size(), -1);
  std::vector<GateId> path;
  GateId cur = start;
  while (seen_at[cur] < 0) {
    seen_at[cur] = static_cast<std::int64_t>(path.size());
    path.push_back(cur);
    GateId next = kNone;
    for (NetId in : gates[cur].inputs) {
      const Driver& d = drivers[in];
      if (d.kind == DriverKind::Gate && pending[d.index] != 0) {
        next = d.index;
        break;
      }
    }
    cur = next;
  }
  std::vector<std::string> cycle;
  for (std::size_t i = static_cast<std::size_t>(seen_at[cur]); i < path.size(); ++i)
    cycle.push_back(names[gates[path[i]].output]);
  std::reverse(cycle.begin(), cycle.end());
  std::string msg = "combinational loop through nets:";
  for (const auto& c : cycle) msg += " " + c;
  (void)n;
  throw NetlistError(NetlistErrc::CombinationalLoop, msg, 0, 0, cycle);
}

}  // namespace

Netlist NetlistBuilder::build() const
{
  Netlist n;

  auto intern = [&n](const std::string& name) -> NetId {
    auto [it, inserted] = n.net_index_.emplace(name, static_cast<NetId>(n.net_names_.size()));
    if (inserted) n.net_names_.push_back(name);
    return it->second;
  };

  for (const auto& d : domains_) {
    if (d.ratio < 1)
      throw NetlistError(NetlistErrc::DomainInvalid,
                         "domain '" + d.name + "' needs PLLRATIO >= 1", d.line);
    for (const auto& other : n.domains_)
      if (other.name == d.name)
        throw NetlistError(NetlistErrc::DomainInvalid, "domain '" + d.name + "' declared twice",
                           d.line);
    n.domains_.push_back({d.name, d.ratio, "scan_clk"});
  }

  // Intern nets in declaration order and record first-use lines.
  std::vector<int> first_use_line;
  auto use = [&](const std::string& name, int line) {
    NetId id = intern(name);
    if (first_use_line.size() <= id) first_use_line.resize(id + 1, 0);
    if (first_use_line[id] == 0) first_use_line[id] = line;
    return id;
  };

  std::vector<std::pair<NetId, Driver>> drives;
  std::vector<int> drive_lines;

  for (const Stmt& s : order_) {
    switch (s.kind) {
    case Stmt::Kind::Input: {
      const auto& p = inputs_[s.index];
      NetId id = use(p.net, p.line);
      drives.push_back({id, {DriverKind::PrimaryInput, static_cast<std::uint32_t>(n.inputs_.size())}});
      drive_lines.push_back(p.line);
      n.inputs_.push_back(id);
      break;
    }
    case Stmt::Kind::Output: {
      const auto& p = outputs_[s.index];
      n.outputs_.push_back(use(p.net, p.line));
      break;
    }
    case Stmt::Kind::Gate: {
      const auto& g = gates_[s.index];
      if (!arity_ok(g.kind, g.ins.size()))
        throw NetlistError(NetlistErrc::ArityMismatch,
                           std::string(gate_kind_name(g.kind)) + " driving '" + g.out + "' has " +
                               std::to_string(g.ins.size()) + " inputs",
                           g.line);
      Gate gate;
      gate.kind = g.kind;
      gate.output = use(g.out, g.line);
      for (const auto& in : g.ins) gate.inputs.push_back(use(in, g.line));
      drives.push_back({gate.output, {DriverKind::Gate, static_cast<std::uint32_t>(n.gates_.size())}});
      drive_lines.push_back(g.line);
      n.gates_.push_back(std::move(gate));
      break;
    }
    case Stmt::Kind::Flop: {
      const auto& f = flops_[s.index];
      FlipFlop ff;
      ff.q = use(f.q, f.line);
      ff.d = use(f.d, f.line);
      if (f.si) ff.scan_in = use(*f.si, f.line);
      auto dom = n.find_domain(f.domain);
      if (f.domain.empty() || !dom)
        throw NetlistError(NetlistErrc::FlopWithoutDomain,
                           "flop '" + f.q + "' has no declared clock domain" +
                               (f.domain.empty() ? std::string() : " ('" + f.domain + "')"),
                           f.line);
      ff.domain = *dom;
      drives.push_back({ff.q, {DriverKind::Flop, static_cast<std::uint32_t>(n.flops_.size())}});
      drive_lines.push_back(f.line);
      n.flops_.push_back(ff);
      break;
    }
    }
  }

  const std::size_t net_count = n.net_names_.size();
  first_use_line.resize(net_count, 0);
  n.drivers_.assign(net_count, Driver{});
  for (std::size_t i = 0; i < drives.size(); ++i) {
    auto [net, drv] = drives[i];
    if (n.drivers_[net].kind != DriverKind::None)
      throw NetlistError(NetlistErrc::MultiplyDrivenNet,
                         "net '" + n.net_names_[net] + "' has more than one driver",
                         drive_lines[i], 0, {n.net_names_[net]});
    n.drivers_[net] = drv;
  }
  for (NetId id = 0; id < net_count; ++id)
    if (n.drivers_[id].kind == DriverKind::None)
      throw NetlistError(NetlistErrc::UndefinedNet,
                         "net '" + n.net_names_[id] + "' is used but never driven",
                         first_use_line[id], 0, {n.net_names_[id]});

  n.fanouts_.assign(net_count, {});
  for (GateId g = 0; g < n.gates_.size(); ++g)
    for (std::uint32_t p = 0; p < n.gates_[g].inputs.size(); ++p)
      n.fanouts_[n.gates_[g].inputs[p]].push_back({Fanout::Kind::GatePin, g, p});
  for (FlopId f = 0; f < n.flops_.size(); ++f) {
    n.fanouts_[n.flops_[f].d].push_back({Fanout::Kind::FlopD, f, 0});
    if (n.flops_[f].scan_in) n.fanouts_[*n.flops_[f].scan_in].push_back({Fanout::Kind::FlopScanIn, f, 0});
  }
  n.pi_of_net_.assign(net_count, kNone);
  for (std::size_t i = 0; i < n.inputs_.size(); ++i) n.pi_of_net_[n.inputs_[i]] = static_cast<std::uint32_t>(i);
  n.is_output_.assign(net_count, false);
  for (NetId o : n.outputs_) n.is_output_[o] = true;
  n.flop_of_q_.assign(net_count, kNone);
  for (FlopId f = 0; f < n.flops_.size(); ++f) n.flop_of_q_[n.flops_[f].q] = f;

  // Scan chains.
  std::vector<int> chain_of(n.flops_.size(), -1);
  for (const auto& pc : chains_) {
    ScanChain chain;
    chain.name = pc.name;
    if (pc.cells.empty())
      throw NetlistError(NetlistErrc::ScanChainInvalid, "chain '" + pc.name + "' has no cells",
                         pc.line);
    for (const auto& cell : pc.cells) {
      auto net = n.find_net(cell);
      auto ff = net ? n.flop_by_q(*net) : std::nullopt;
      if (!ff || !n.flops_[*ff].is_scan())
        throw NetlistError(NetlistErrc::UnknownScanCell,
                           "chain '" + pc.name + "' references unknown scan cell '" + cell + "'",
                           pc.line, 0, {cell});
      if (chain_of[*ff] >= 0)
        throw NetlistError(NetlistErrc::ScanChainInvalid,
                           "scan cell '" + cell + "' appears in more than one chain position",
                           pc.line, 0, {cell});
      chain_of[*ff] = static_cast<int>(n.chains_.size());
      chain.cells.push_back(*ff);
    }
    auto si = n.find_net(pc.si);
    auto so = n.find_net(pc.so);
    if (!si || n.drivers_[*si].kind != DriverKind::PrimaryInput)
      throw NetlistError(NetlistErrc::ScanChainInvalid,
                         "chain '" + pc.name + "' scan-in pin '" + pc.si + "' is not a primary input",
                         pc.line);
    if (!so || *so != n.flops_[chain.cells.back()].q)
      throw NetlistError(NetlistErrc::ScanChainInvalid,
                         "chain '" + pc.name + "' scan-out pin '" + pc.so +
                             "' is not the Q of its last cell",
                         pc.line);
    chain.scan_in_pin = *si;
    chain.scan_out_pin = *so;
    NetId expected_si = *si;
    for (FlopId f : chain.cells) {
      if (*n.flops_[f].scan_in != expected_si)
        throw NetlistError(NetlistErrc::ScanChainInvalid,
                           "chain '" + pc.name + "': cell '" + n.net_names_[n.flops_[f].q] +
                               "' scan-in is '" + n.net_names_[*n.flops_[f].scan_in] +
                               "', expected '" + n.net_names_[expected_si] + "'",
                           pc.line);
      expected_si = n.flops_[f].q;
    }
    n.chains_.push_back(std::move(chain));
  }
  for (FlopId f = 0; f < n.flops_.size(); ++f)
    if (n.flops_[f].is_scan() && chain_of[f] < 0)
      throw NetlistError(NetlistErrc::ScanChainInvalid,
                         "scan cell '" + n.net_names_[n.flops_[f].q] + "' is not in any chain", 0,
                         0, {n.net_names_[n.flops_[f].q]});

  n.order_ = topo_order(n, n.gates_, n.drivers_, n.net_names_);
  n.rank_.assign(n.gates_.size(), 0);
  for (std::uint32_t i = 0; i < n.order_.size(); ++i) n.rank_[n.order_[i]] = i;
  return n;
}

std::vector<GateId> levelize(const Netlist& netlist)
{
  std::vector<Driver> drivers(netlist.net_count());
  for (NetId i = 0; i < netlist.net_count(); ++i) drivers[i] = netlist.driver(i);
  std::vector<std::string> names(netlist.net_count());
  for (NetId i = 0; i < netlist.net_count(); ++i) names[i] = netlist.net_name(i);
  return topo_order(netlist, netlist.gates(), drivers, names);
}

// --- parser ----------------------------------------------------------------

namespace {

bool is_name_char(char c)
{
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' ||
         c == ']' || c == '$' || c == ':' || c == '/' || c == '-' || c == '\\' || c == '\'';
}

class LineScanner {
public:
  LineScanner(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_ws()
  {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end()
  {
    skip_ws();
    return pos_ >= text_.size();
  }
  int column() const { return static_cast<int>(pos_) + 1; }

  [[noreturn]] void fail(const std::string& what) const
  {
    throw NetlistError(NetlistErrc::Syntax, what, line_, column());
  }

  std::string name(const char* what = "name")
  {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    if (start == pos_) fail(std::string("expected ") + what);
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c)
  {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c)
  {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_end()
  {
    if (!at_end()) fail("unexpected trailing text");
  }

private:
  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string upper(std::string s)
{
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// key=value argument inside DFF/SDFF, or a bare net.
struct Arg {
  std::string key;
  std::string value;
};

std::vector<Arg> parse_args(LineScanner& sc)
{
  std::vector<Arg> args;
  sc.expect('(');
  if (sc.accept(')')) return args;
  do {
    std::string first = sc.name("net");
    if (sc.accept('=')) {
      args.push_back({first, sc.name("value")});
    } else {
      args.push_back({"", first});
    }
  } while (sc.accept(','));
  sc.expect(')');
  return args;
}

void parse_line(std::string_view raw, int line_no, NetlistBuilder& b)
{
  std::string_view text = raw;
  if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
  LineScanner sc(text, line_no);
  if (sc.at_end()) return;

  std::string head = sc.name("statement");
  const std::string kw = upper(head);
  if (kw == "INPUT" || kw == "OUTPUT") {
    sc.expect('(');
    std::string net = sc.name("net");
    sc.expect(')');
    sc.expect_end();
    if (kw == "INPUT")
      b.input(net, line_no);
    else
      b.output(net, line_no);
    return;
  }
  if (kw == "DOMAIN") {
    std::string name = sc.name("domain name");
    if (upper(sc.name("PLLRATIO")) != "PLLRATIO") sc.fail("expected PLLRATIO");
    std::string ratio = sc.name("ratio");
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(ratio, &used);
      if (used != ratio.size()) sc.fail("PLLRATIO must be an integer");
    } catch (const std::logic_error&) {
      sc.fail("PLLRATIO must be an integer");
    }
    sc.expect_end();
    b.domain(name, value, line_no);
    return;
  }
  if (kw == "CHAIN") {
    std::string name = sc.name("chain name");
    std::string si, so;
    std::vector<std::string> cells;
    bool have_cells = false;
    while (!sc.at_end()) {
      std::string key = upper(sc.name("SI=, SO= or CELLS="));
      sc.expect('=');
      if (key == "SI") {
        si = sc.name("scan-in pin");
      } else if (key == "SO") {
        so = sc.name("scan-out pin");
      } else if (key == "CELLS") {
        have_cells = true;
        do {
          cells.push_back(sc.name("cell"));
        } while (sc.accept(','));
      } else {
        sc.fail("unknown CHAIN attribute '" + key + "'");
      }
    }
    if (si.empty() || so.empty() || !have_cells) sc.fail("CHAIN needs SI=, SO= and CELLS=");
    b.chain(name, si, so, cells, line_no);
    return;
  }

  // Assignment: <net> = KIND(args)
  const std::string& lhs = head;
  sc.expect('=');
  std::string kind_name = sc.name("gate kind");
  const std::string kind_upper = upper(kind_name);
  std::vector<Arg> args = parse_args(sc);
  sc.expect_end();

  if (kind_upper == "DFF" || kind_upper == "SDFF") {
    std::string d, domain;
    std::optional<std::string> si;
    for (const auto& a : args) {
      const std::string key = upper(a.key);
      if (key.empty()) {
        if (!d.empty()) sc.fail("flop takes one data input");
        d = a.value;
      } else if (key == "DOMAIN") {
        domain = a.value;
      } else if (key == "SI") {
        si = a.value;
      } else {
        sc.fail("unknown flop attribute '" + a.key + "'");
      }
    }
    if (d.empty()) throw NetlistError(NetlistErrc::ArityMismatch, "flop '" + lhs + "' has no D input", line_no);
    if (kind_upper == "SDFF" && !si) sc.fail("SDFF needs si=<net>");
    if (kind_upper == "DFF" && si) sc.fail("DFF takes no si=; use SDFF");
    b.flop(lhs, d, domain, si, line_no);
    return;
  }

  GateKind kind;
  if (!parse_gate_kind(kind_name, kind)) sc.fail("unknown gate kind '" + kind_name + "'");
  std::vector<std::string> ins;
  for (const auto& a : args) {
    if (!a.key.empty()) sc.fail("gate inputs are plain nets");
    ins.push_back(a.value);
  }
  b.gate(kind, lhs, ins, line_no);
}

}  // namespace

Netlist parse_netlist(std::string_view text)
{
  NetlistBuilder b;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    parse_line(line, line_no, b);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return b.build();
}

Netlist parse_netlist_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open netlist '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str());
}

// --- writer ----------------------------------------------------------------

std::string write_netlist(const Netlist& n)
{
  std::ostringstream os;
  for (const auto& d : n.domains()) os << "DOMAIN " << d.name << " PLLRATIO " << d.pll_ratio << '\n';
  for (NetId in : n.primary_inputs()) os << "INPUT(" << n.net_name(in) << ")\n";
  for (NetId out : n.primary_outputs()) os << "OUTPUT(" << n.net_name(out) << ")\n";
  for (const auto& f : n.flops()) {
    os << n.net_name(f.q) << " = " << (f.is_scan() ? "SDFF(" : "DFF(") << n.net_name(f.d);
    if (f.is_scan()) os << ", si=" << n.net_name(*f.scan_in);
    os << ", domain=" << n.domains()[f.domain].name << ")\n";
  }
  for (const auto& g : n.gates()) {
    os << n.net_name(g.output) << " = " << gate_kind_name(g.kind) << '(';
    for (std::size_t i = 0; i < g.inputs.size(); ++i) os << (i ? ", " : "") << n.net_name(g.inputs[i]);
    os << ")\n";
  }
  for (const auto& c : n.chains()) {
    os << "CHAIN " << c.name << " SI=" << n.net_name(c.scan_in_pin) << " SO=" << n.net_name(c.scan_out_pin)
       << " CELLS=";
    for (std::size_t i = 0; i < c.cells.size(); ++i) os << (i ? "," : "") << n.net_name(n.flops()[c.cells[i]].q);
    os << '\n';
  }
  return os.str();
}

bool structurally_equal(const Netlist& a, const Netlist& b)
{
  auto name_a = [&](NetId id) { return a.net_name(id); };
  auto name_b = [&](NetId id) { return b.net_name(id); };
  auto same_nets = [&](const std::vector<NetId>& x, const std::vector<NetId>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (name_a(x[i]) != name_b(y[i])) return false;
    return true;
  };
  if (a.gates().size() != b.gates().size() || a.flops().size() != b.flops().size() ||
      a.domains().size() != b.domains().size() || a.chains().size() != b.chains().size())
    return false;
  if (!same_nets(a.primary_inputs(), b.primary_inputs()) || !same_nets(a.primary_outputs(), b.primary_outputs()))
    return false;
  // Gate order may differ after a round trip (flops are written first), so match by output net.
  for (const auto& g : a.gates()) {
    auto out = b.find_net(name_a(g.output));
    if (!out || b.driver(*out).kind != DriverKind::Gate) return false;
    const Gate& h = b.gates()[b.driver(*out).index];
    if (h.kind != g.kind || !same_nets(g.inputs, h.inputs)) return false;
  }
  for (const auto& f : a.flops()) {
    auto q = b.find_net(name_a(f.q));
    auto fb = q ? b.flop_by_q(*q) : std::nullopt;
    if (!fb) return false;
    const FlipFlop& g = b.flops()[*fb];
    if (name_a(f.d) != name_b(g.d) || f.is_scan() != g.is_scan()) return false;
    if (f.is_scan() && name_a(*f.scan_in) != name_b(*g.scan_in)) return false;
    if (a.domains()[f.domain].name != b.domains()[g.domain].name) return false;
  }
  for (std::size_t i = 0; i < a.domains().size(); ++i)
    if (a.domains()[i].name != b.domains()[i].name || a.domains()[i].pll_ratio != b.domains()[i].pll_ratio)
      return false;
  for (std::size_t i = 0; i < a.chains().size(); ++i) {
    const auto& x = a.chains()[i];
    const auto& y = b.chains()[i];
    if (x.name != y.name || name_a(x.scan_in_pin) != name_b(y.scan_in_pin) ||
        name_a(x.scan_out_pin) != name_b(y.scan_out_pin) || x.cells.size() != y.cells.size())
      return false;
    for (std::size_t k = 0; k < x.cells.size(); ++k)
      if (name_a(a.flops()[x.cells[k]].q) != name_b(b.flops()[y.cells[k]].q)) return false;
  }
  return true;
}

// --- fault sites -----------------------------------------------------------

std::vector<FaultSite> fault_sites(const Netlist& n)
{
  std::vector<FaultSite> sites;
  for (GateId g = 0; g < n.gates().size(); ++g) {
    const auto& gate = n.gates()[g];
    for (std::uint32_t p = 0; p < gate.inputs.size(); ++p)
      sites.push_back({FaultSite::Kind::GateInput, g, p});
    sites.push_back({FaultSite::Kind::GateOutput, g, 0});
  }
  for (FlopId f = 0; f < n.flops().size(); ++f) {
    sites.push_back({FaultSite::Kind::FlopD, f, 0});
    sites.push_back({FaultSite::Kind::FlopQ, f, 0});
  }
  return sites;
}

NetId site_net(const Netlist& n, const FaultSite& s)
{
  switch (s.kind) {
  case FaultSite::Kind::GateInput: return n.gates()[s.element].inputs[s.pin];
  case FaultSite::Kind::GateOutput: return n.gates()[s.element].output;
  case FaultSite::Kind::FlopD: return n.flops()[s.element].d;
  case FaultSite::Kind::FlopQ: return n.flops()[s.element].q;
  }
  return kNone;
}

std::string site_name(const Netlist& n, const FaultSite& s)
{
  switch (s.kind) {
  case FaultSite::Kind::GateInput:
    return n.net_name(n.gates()[s.element].output) + "/in" + std::to_string(s.pin);
  case FaultSite::Kind::GateOutput: return n.net_name(n.gates()[s.element].output) + "/out";
  case FaultSite::Kind::FlopD: return n.net_name(n.flops()[s.element].q) + "/D";
  case FaultSite::Kind::FlopQ: return n.net_name(n.flops()[s.element].q) + "/Q";
  }
  return "?";
}

}  // namespace dftclk

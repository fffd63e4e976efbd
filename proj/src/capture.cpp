#include "dftclk/capture.hpp"

#include "dftclk/cpf.hpp"
#include "dftclk/sim.hpp"
#include "dftclk/tick_sim.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <tuple>

namespace dftclk {

namespace {

PulseRole role_for(int index, int count)
{
  if (index == count - 1) return PulseRole::Capture;
  if (index == count - 2) return PulseRole::Launch;
  return PulseRole::Extra;
}

int ratio_of(const Netlist& n, DomainId d) { return n.domains().at(d).pll_ratio; }

}  // namespace

CaptureProcedure external_procedure(const Netlist& n, int pulses, IoPolicy io)
{
  CaptureProcedure p;
  p.name = std::string(io.outputs_masked ? "ext_masked_x" : "ext_x") + std::to_string(pulses);
  for (int t = 0; t < pulses; ++t)
    for (DomainId d = 0; d < n.domains().size(); ++d) p.events.push_back({t, d, role_for(t, pulses)});
  p.observe_tick = pulses - 1;
  p.io = io;
  p.common_clock = true;
  return p;
}

CaptureProcedure cpf_procedure(const Netlist& n, DomainId domain, int pulses)
{
  const int r = ratio_of(n, domain);
  CaptureProcedure p;
  p.name = n.domains()[domain].name + "_x" + std::to_string(pulses);
  for (int i = 0; i < pulses; ++i) p.events.push_back({r * (kCpfLatency + i), domain, role_for(i, pulses)});
  p.observe_tick = p.events.back().tick;
  p.io = {true, true};
  p.cpf.push_back({domain, pulses, kCpfLatency});
  return p;
}

CaptureProcedure inter_domain_procedure(const Netlist& n, DomainId launch, DomainId capture)
{
  const int rl = ratio_of(n, launch);
  const int rc = ratio_of(n, capture);
  const int launch_tick = rl * kCpfLatency;
  const int capture_tick = (launch_tick / rc + 1) * rc;
  CaptureProcedure p;
  p.name = n.domains()[launch].name + "_to_" + n.domains()[capture].name;
  p.events = {{launch_tick, launch, PulseRole::Launch}, {capture_tick, capture, PulseRole::Capture}};
  p.observe_tick = capture_tick;
  p.io = {true, true};
  p.cpf = {{launch, 1, kCpfLatency}, {capture, 1, capture_tick / rc}};
  return p;
}

std::vector<CaptureProcedure> legal_procedures(const Netlist& n, ClockingRegime regime)
{
  std::vector<CaptureProcedure> out;
  const auto domains = static_cast<DomainId>(n.domains().size());
  if (domains == 0) return out;
  switch (regime) {
  case ClockingRegime::StuckAtExternal:
    out.push_back(external_procedure(n, 1, {false, false}));
    break;
  case ClockingRegime::ExternalCommon:
    for (int k = 1; k <= 4; ++k) out.push_back(external_procedure(n, k, {false, false}));
    break;
  case ClockingRegime::ExternalConstrained:
    for (int k = 2; k <= 4; ++k) out.push_back(external_procedure(n, k, {true, true}));
    break;
  case ClockingRegime::CpfSimple:
    for (DomainId d = 0; d < domains; ++d) out.push_back(cpf_procedure(n, d, 2));
    break;
  case ClockingRegime::CpfEnhanced:
    for (DomainId d = 0; d < domains; ++d)
      for (int k = 2; k <= 4; ++k) out.push_back(cpf_procedure(n, d, k));
    for (DomainId a = 0; a < domains; ++a)
      for (DomainId b = 0; b < domains; ++b)
        if (a != b) out.push_back(inter_domain_procedure(n, a, b));
    break;
  }
  return out;
}

bool procedure_legal(const Netlist& n, const CaptureProcedure& p, ClockingRegime regime)
{
  const auto legal = legal_procedures(n, regime);
  return std::find(legal.begin(), legal.end(), p) != legal.end();
}

std::vector<ConstraintViolation> validate_constraints(const Pattern& p, ClockingRegime regime)
{
  std::vector<ConstraintViolation> out;
  if (p.procedure.capture_count() == 0) out.push_back({"no-capture", "no capture pulse"});
  if (regime_is_constrained(regime)) {
    if (!p.pi_updates.empty())
      out.push_back({"inputs-frozen", "inputs frozen under regime: primary input changes after scan load"});
    if (!p.expected_po.empty() || !p.procedure.io.outputs_masked)
      out.push_back({"outputs-masked", "outputs masked under regime"});
    if (p.capture_scan_en != Logic::Zero)
      out.push_back({"scan-en-capture", "scan_en asserted during capture"});
  }
  if (regime_is_cpf(regime) && p.procedure.cpf.empty())
    out.push_back({"external-clock", "capture clock must come from the on-chip pulse filters"});
  return out;
}

int tick_quantum(const Netlist& n)
{
  int l = 1;
  for (const auto& d : n.domains()) l = std::lcm(l, d.pll_ratio);
  return l;
}

namespace {

std::string bit_string(std::span<const Logic> v)
{
  std::string s;
  s.reserve(v.size());
  for (Logic x : v) s += to_char(x);
  return s;
}

int round_up(int v, int q) { return (v + q - 1) / q * q; }

}  // namespace

std::string expand_to_tester(const Netlist& n, const Pattern& p, ClockingRegime regime)
{
  if (!procedure_legal(n, p.procedure, regime))
    throw RegimeMismatch("procedure '" + p.procedure.name + "' is not legal under " + regime_name(regime));
  const int quantum = tick_quantum(n);
  const std::size_t shift = n.longest_chain();
  std::ostringstream os;
  os << "# pattern " << p.id << ' ' << p.procedure.name << '\n';
  const bool on_chip = regime_is_cpf(regime);
  if (on_chip)
    for (const auto& s : p.procedure.cpf)
      os << "CPF " << n.domains()[s.domain].name << ' ' << s.pulse_count << ' ' << s.latency << '\n';
  os << "SE 1\n";
  for (std::size_t c = 0; c < n.chains().size(); ++c)
    os << "LOAD " << n.chains()[c].name << '=' << bit_string(p.scan_load.at(c)) << '\n';
  os << "SHIFT " << shift << '\n';
  std::vector<Logic> pis = p.pi_values;
  os << "FORCE " << bit_string(pis) << '\n';
  os << "SE " << to_char(p.capture_scan_en) << '\n';
  if (on_chip) {
    int wait = 0;
    for (const auto& s : p.procedure.cpf)
      wait = std::max(wait, ratio_of(n, s.domain) * (s.latency + s.pulse_count));
    os << "TRIG\nWAIT " << round_up(wait, quantum) << '\n';
  } else {
    const auto ticks = p.procedure.step_ticks();
    std::size_t next_update = 0;
    auto updates = p.pi_updates;
    std::stable_sort(updates.begin(), updates.end(),
                     [](const PiUpdate& a, const PiUpdate& b) { return a.tick < b.tick; });
    const std::string clock = n.domains().front().external_clock_name;
    for (int t : ticks) {
      bool changed = false;
      while (next_update < updates.size() && updates[next_update].tick <= t) {
        pis.at(updates[next_update].pi) = updates[next_update].value;
        ++next_update;
        changed = true;
      }
      if (changed) os << "FORCE " << bit_string(pis) << '\n';
      if (t == p.procedure.observe_tick && !p.expected_po.empty())
        os << "MEASURE " << bit_string(p.expected_po) << '\n';
      os << "PULSE " << clock << '\n';
    }
  }
  os << "SE 1\n";
  for (std::size_t c = 0; c < n.chains().size(); ++c)
    os << "EXPECT " << n.chains()[c].name << '=' << bit_string(p.expected_unload.at(c)) << '\n';
  os << "SHIFT " << shift << '\n';
  return os.str();
}

std::string expand_program(const Netlist& n, const PatternSet& patterns, ClockingRegime regime)
{
  std::string out;
  for (const auto& p : patterns) out += expand_to_tester(n, p, regime);
  return out;
}

// --- parsing ----------------------------------------------------------------

namespace {

int parse_int(const std::string& s, int line)
{
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw TesterSyntaxError("expected a non-negative integer, got '" + s + "'", line);
  }
}

std::vector<Logic> parse_bits(const std::string& s, int line)
{
  std::vector<Logic> out;
  for (char c : s) {
    try {
      out.push_back(logic_from_char(c));
    } catch (const std::invalid_argument&) {
      throw TesterSyntaxError(std::string("bad bit '") + c + "'", line);
    }
  }
  return out;
}

}  // namespace

std::vector<TesterOp> parse_tester_program(std::string_view text)
{
  std::vector<TesterOp> ops;
  std::istringstream is{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    std::vector<std::string> args;
    for (std::string a; ls >> a;) args.push_back(a);
    auto need = [&](std::size_t count) {
      if (args.size() != count)
        throw TesterSyntaxError(word + " takes " + std::to_string(count) + " argument(s)", line);
    };
    TesterOp op{};
    op.line = line;
    if (word == "SHIFT" || word == "WAIT") {
      need(1);
      op.kind = word == "SHIFT" ? TesterOp::Kind::Shift : TesterOp::Kind::Wait;
      op.value = parse_int(args[0], line);
    } else if (word == "SE") {
      need(1);
      op.kind = TesterOp::Kind::Se;
      if (args[0] != "0" && args[0] != "1") throw TesterSyntaxError("SE takes 0 or 1", line);
      op.value = args[0] == "1";
    } else if (word == "TRIG") {
      need(0);
      op.kind = TesterOp::Kind::Trig;
    } else if (word == "PULSE") {
      need(1);
      op.kind = TesterOp::Kind::Pulse;
      op.name = args[0];
    } else if (word == "LOAD" || word == "EXPECT") {
      need(1);
      op.kind = word == "LOAD" ? TesterOp::Kind::Load : TesterOp::Kind::Expect;
      const auto eq = args[0].find('=');
      if (eq == std::string::npos || eq == 0) throw TesterSyntaxError(word + " needs <chain>=<bits>", line);
      op.name = args[0].substr(0, eq);
      op.bits = parse_bits(args[0].substr(eq + 1), line);
    } else if (word == "CPF") {
      need(3);
      op.kind = TesterOp::Kind::Cpf;
      op.name = args[0];
      op.value = parse_int(args[1], line);
      op.latency = parse_int(args[2], line);
    } else if (word == "FORCE" || word == "MEASURE") {
      if (args.size() > 1) throw TesterSyntaxError(word + " takes one bit string", line);
      op.kind = word == "FORCE" ? TesterOp::Kind::Force : TesterOp::Kind::Measure;
      if (!args.empty()) op.bits = parse_bits(args[0], line);
    } else {
      throw TesterSyntaxError("unknown operation '" + word + "'", line);
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

PatternSet read_tester_patterns(const Netlist& n, std::string_view text, ClockingRegime regime)
{
  const auto ops = parse_tester_program(text);
  const auto procedures = legal_procedures(n, regime);

  struct Header {
    int line;
    std::uint32_t id;
    const CaptureProcedure* procedure;
  };
  std::vector<Header> headers;
  {
    std::istringstream is{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      std::istringstream ls(raw);
      std::string hash, word, id, name;
      if (!(ls >> hash >> word) || hash != "#" || word != "pattern") continue;
      if (!(ls >> id >> name)) throw TesterSyntaxError("pattern header needs an id and a procedure", line);
      const auto it = std::find_if(procedures.begin(), procedures.end(),
                                   [&](const CaptureProcedure& p) { return p.name == name; });
      if (it == procedures.end())
        throw TesterSyntaxError("procedure '" + name + "' is not legal under " + regime_name(regime), line);
      headers.push_back({line, static_cast<std::uint32_t>(parse_int(id, line)), &*it});
    }
  }

  PatternSet patterns;
  std::size_t next = 0;
  for (std::size_t h = 0; h < headers.size(); ++h) {
    const int end = h + 1 < headers.size() ? headers[h + 1].line : std::numeric_limits<int>::max();
    if (next < ops.size() && ops[next].line < headers[h].line)
      throw TesterSyntaxError("operation outside a pattern", ops[next].line);
    Pattern p;
    p.id = headers[h].id;
    p.procedure = *headers[h].procedure;
    p.scan_load.assign(n.chains().size(), {});
    std::vector<bool> loaded(n.chains().size(), false);
    bool forced = false, capture_se = false;
    std::size_t pulses = 0;
    const auto ticks = p.procedure.step_ticks();
    std::vector<Logic> current;
    std::optional<std::vector<Logic>> pending;  // input change before the next pulse
    for (; next < ops.size() && ops[next].line < end; ++next) {
      const TesterOp& op = ops[next];
      switch (op.kind) {
      case TesterOp::Kind::Load: {
        const auto& chains = n.chains();
        const auto it = std::find_if(chains.begin(), chains.end(), [&](const ScanChain& c) { return c.name == op.name; });
        if (it == chains.end()) throw TesterSyntaxError("unknown chain '" + op.name + "'", op.line);
        const std::size_t c = static_cast<std::size_t>(it - chains.begin());
        if (op.bits.size() != it->cells.size())
          throw TesterSyntaxError("chain '" + op.name + "' has " + std::to_string(it->cells.size()) + " cells",
                                  op.line);
        p.scan_load[c] = op.bits;
        loaded[c] = true;
        break;
      }
      case TesterOp::Kind::Force:
        if (op.bits.size() != n.primary_inputs().size())
          throw TesterSyntaxError("FORCE needs one bit per primary input", op.line);
        if (!forced) {
          p.pi_values = op.bits;
          current = op.bits;
          forced = true;
        } else {
          pending = op.bits;
        }
        break;
      case TesterOp::Kind::Se:
        if (forced && !capture_se) {
          p.capture_scan_en = op.value ? Logic::One : Logic::Zero;
          capture_se = true;
        }
        break;
      case TesterOp::Kind::Pulse:
        if (pending) {
          if (pulses >= ticks.size()) throw TesterSyntaxError("more pulses than the procedure has", op.line);
          for (std::uint32_t i = 0; i < pending->size(); ++i)
            if ((*pending)[i] != current[i]) p.pi_updates.push_back({ticks[pulses], i, (*pending)[i]});
          current = std::move(*pending);
          pending.reset();
        }
        ++pulses;
        break;
      default: break;
      }
    }
    if (!forced) throw TesterSyntaxError("pattern " + std::to_string(p.id) + " never forces its inputs", headers[h].line);
    for (std::size_t c = 0; c < loaded.size(); ++c)
      if (!loaded[c])
        throw TesterSyntaxError("pattern " + std::to_string(p.id) + " does not load chain '" + n.chains()[c].name + "'",
                                headers[h].line);
    compute_expected(n, p);
    patterns.push_back(std::move(p));
  }
  if (next < ops.size()) throw TesterSyntaxError("operation outside a pattern", ops[next].line);
  return patterns;
}

// --- replay -----------------------------------------------------------------

namespace {

class Replayer {
public:
  Replayer(const Netlist& n, ClockingRegime regime)
      : n_(n),
        on_chip_(regime_is_cpf(regime)),
        quantum_(tick_quantum(n)),
        state_(CircuitState::unknown(n)),
        pis_(n.primary_inputs().size(), Logic::X),
        load_(n.chains().size()),
        expect_(n.chains().size()),
        filters_(n.domains().size())
  {
    state_.scan_en = Logic::One;
    for (DomainId d = 0; d < n.domains().size(); ++d) configure(d, std::nullopt);
  }

  void run(std::span<const TesterOp> program)
  {
    for (const auto& op : program) step(op);
  }

  ReplayReport report;

private:
  struct Filter {
    const StructuralCpf* cpf = nullptr;
    bool enabled = false;
    std::optional<TickSimulator> sim;
    NetId pll = kNone, sclk = kNone, se = kNone, en = kNone, func = kNone, out = kNone;
    Logic prev = Logic::Zero;
  };

  void mismatch(const std::string& msg)
  {
    report.pass = false;
    if (report.mismatches.size() < 20) report.mismatches.push_back(msg);
  }

  std::optional<std::size_t> chain_index(const std::string& name, int line)
  {
    for (std::size_t c = 0; c < n_.chains().size(); ++c)
      if (n_.chains()[c].name == name) return c;
    mismatch("line " + std::to_string(line) + ": unknown chain '" + name + "'");
    return std::nullopt;
  }

  const StructuralCpf* structural(int pulses, int latency, int ratio)
  {
    auto key = std::make_tuple(pulses, latency, ratio);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      CpfConfig cfg;
      cfg.pulse_count = pulses;
      cfg.latency_ticks = latency;
      cfg.pll_ratio = ratio;
      it = cache_.emplace(key, build_structural_cpf(cfg)).first;
    }
    return &it->second;
  }

  void configure(DomainId d, std::optional<CpfSetting> setting)
  {
    Filter& f = filters_[d];
    const int r = n_.domains()[d].pll_ratio;
    const StructuralCpf* cpf = setting ? structural(setting->pulse_count, setting->latency, r)
                                       : structural(2, kCpfLatency, r);
    f.enabled = setting.has_value();
    if (f.cpf == cpf && f.sim) return;
    f.cpf = cpf;
    f.sim.emplace(cpf->circuit);
    const auto& c = cpf->circuit;
    f.pll = *c.find("pll_clk");
    f.sclk = *c.find("scan_clk");
    f.se = *c.find("scan_en");
    f.en = *c.find("cpf_en");
    f.func = *c.find("functional_mode");
    f.out = *c.find("clk_out");
  }

  Logic domain_clock(DomainId d, std::size_t half)
  {
    if (!on_chip_) return sclk_;
    Filter& f = filters_[d];
    const std::pair<NetId, Logic> in[] = {{f.pll, pll_level(n_.domains()[d].pll_ratio, half)},
                                          {f.sclk, sclk_},
                                          {f.se, state_.scan_en},
                                          {f.en, from_bool(f.enabled)},
                                          {f.func, Logic::Zero}};
    f.sim->apply(in);
    return f.sim->value(f.out);
  }

  void advance(int ticks, Logic sclk)
  {
    sclk_ = sclk;
    std::vector<DomainId> rising;
    for (int t = 0; t < ticks; ++t, ++tick_) {
      for (std::size_t half = 0; half < 2; ++half) {
        const std::size_t h = 2 * tick_ + half;
        rising.clear();
        for (DomainId d = 0; d < n_.domains().size(); ++d) {
          const Logic v = domain_clock(d, h);
          Logic& prev = on_chip_ ? filters_[d].prev : prev_external_[d];
          if (v == Logic::X) mismatch("domain clock unknown at tick " + std::to_string(tick_));
          if (prev == Logic::Zero && v == Logic::One) rising.push_back(d);
          prev = v;
        }
        if (!rising.empty()) {
          state_.inputs = pis_;
          state_ = pulse_domains(n_, state_, rising);
        }
      }
    }
    report.ticks = tick_;
  }

  void shift(int count)
  {
    const bool unloading = std::any_of(expect_.begin(), expect_.end(), [](const auto& e) { return e.has_value(); });
    std::vector<std::vector<Logic>> seen;
    for (const auto& c : n_.chains()) seen.emplace_back(c.cells.size(), Logic::X);
    for (int j = 0; j < count; ++j) {
      for (std::size_t c = 0; c < n_.chains().size(); ++c) {
        const auto& chain = n_.chains()[c];
        const auto idx = static_cast<std::size_t>(count - 1 - j);
        Logic bit = Logic::Zero;
        if (load_[c] && idx < load_[c]->size()) bit = (*load_[c])[idx];
        pis_[*n_.input_index(chain.scan_in_pin)] = bit;
      }
      advance(quantum_, Logic::Zero);
      for (std::size_t c = 0; c < n_.chains().size(); ++c) {
        const auto& chain = n_.chains()[c];
        const std::size_t len = chain.cells.size();
        if (static_cast<std::size_t>(j) >= len) continue;
        const std::size_t cell = len - 1 - static_cast<std::size_t>(j);
        const Logic so = state_.flops[chain.cells.back()];
        seen[c][cell] = so;
        if (!expect_[c] || cell >= expect_[c]->size()) continue;
        const Logic want = (*expect_[c])[cell];
        if (want == Logic::X) continue;
        ++report.compared_bits;
        if (so != want)
          mismatch("segment " + std::to_string(report.segments) + " chain " + chain.name + " cell " +
                   std::to_string(cell) + ": expected " + to_char(want) + ", replay " + to_char(so));
      }
      advance(quantum_, Logic::One);
    }
    if (unloading) {
      report.unloads.push_back(std::move(seen));
      ++report.segments;
    }
    for (auto& l : load_) l.reset();
    for (auto& e : expect_) e.reset();
  }

  void step(const TesterOp& op)
  {
    using K = TesterOp::Kind;
    switch (op.kind) {
    case K::Cpf: {
      auto d = n_.find_domain(op.name);
      if (!d) {
        mismatch("line " + std::to_string(op.line) + ": unknown domain '" + op.name + "'");
        return;
      }
      pending_.push_back({*d, op.value, op.latency});
      break;
    }
    case K::Se:
      state_.scan_en = from_bool(op.value != 0);
      advance(quantum_, Logic::Zero);
      break;
    case K::Load:
      if (auto c = chain_index(op.name, op.line)) load_[*c] = op.bits;
      if (on_chip_ && !configured_) {
        for (DomainId d = 0; d < n_.domains().size(); ++d) {
          std::optional<CpfSetting> s;
          for (const auto& p : pending_)
            if (p.domain == d) s = p;
          configure(d, s);
        }
        pending_.clear();
        configured_ = true;
      }
      break;
    case K::Expect:
      if (auto c = chain_index(op.name, op.line)) expect_[*c] = op.bits;
      configured_ = false;
      break;
    case K::Shift:
      shift(op.value);
      break;
    case K::Force:
      if (op.bits.size() != pis_.size()) {
        mismatch("line " + std::to_string(op.line) + ": FORCE width does not match the primary inputs");
        return;
      }
      pis_ = op.bits;
      break;
    case K::Measure: {
      if (op.bits.size() != n_.primary_outputs().size()) {
        mismatch("line " + std::to_string(op.line) + ": MEASURE width does not match the primary outputs");
        return;
      }
      state_.inputs = pis_;
      auto po = output_values(n_, eval_combinational(n_, state_));
      for (std::size_t i = 0; i < po.size(); ++i) {
        if (op.bits[i] == Logic::X) continue;
        ++report.compared_bits;
        if (po[i] != op.bits[i])
          mismatch("line " + std::to_string(op.line) + ": output " + n_.net_name(n_.primary_outputs()[i]) +
                   " expected " + to_char(op.bits[i]) + ", replay " + to_char(po[i]));
      }
      break;
    }
    case K::Trig:
      advance(2 * quantum_ - 1, Logic::Zero);
      advance(1, Logic::One);
      break;
    case K::Wait:
      advance(op.value, Logic::Zero);
      break;
    case K::Pulse:
      if (on_chip_) {
        mismatch("line " + std::to_string(op.line) + ": direct clock pulse under an on-chip regime");
        return;
      }
      advance(quantum_, Logic::Zero);
      advance(quantum_, Logic::One);
      break;
    }
  }

  const Netlist& n_;
  bool on_chip_;
  int quantum_;
  CircuitState state_;
  std::vector<Logic> pis_;
  std::vector<std::optional<std::vector<Logic>>> load_;
  std::vector<std::optional<std::vector<Logic>>> expect_;
  std::vector<Filter> filters_;
  std::map<std::tuple<int, int, int>, StructuralCpf> cache_;
  std::vector<CpfSetting> pending_;
  bool configured_ = false;
  std::map<DomainId, Logic> prev_external_;
  Logic sclk_ = Logic::Zero;
  std::size_t tick_ = 0;
};

}  // namespace

ReplayReport replay_tester_program(const Netlist& n, std::span<const TesterOp> program, ClockingRegime regime)
{
  Replayer r(n, regime);
  r.run(program);
  return std::move(r.report);
}

}  // namespace dftclk

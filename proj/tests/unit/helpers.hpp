// Shared fixtures for the unit tests: an independent recursive evaluator that
// works from the netlist text, and small circuit generators.
#pragma once

#include "dftclk/logic.hpp"
#include "dftclk/netlist.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing_helpers {

inline std::string source_path(const std::string& rel) { return std::string(DFTCLK_SOURCE_DIR) + "/" + rel; }

/// Evaluates gate definitions by recursion on net names, independent of the
/// levelized simulator. Values of inputs and flop outputs are given.
class NaiveEvaluator {
public:
  explicit NaiveEvaluator(const std::string& text)
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::string compact;
      for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') compact += c;
      auto eq = compact.find('=');
      auto open = compact.find('(');
      if (eq == std::string::npos || open == std::string::npos || eq > open) continue;
      Def d;
      d.kind = compact.substr(eq + 1, open - eq - 1);
      std::string args = compact.substr(open + 1, compact.size() - open - 2);
      std::stringstream as(args);
      std::string a;
      while (std::getline(as, a, ',')) d.args.push_back(a);
      defs_[compact.substr(0, eq)] = d;
    }
  }

  dftclk::Logic value(const std::string& net, std::map<std::string, dftclk::Logic>& known) const
  {
    using dftclk::Logic;
    auto k = known.find(net);
    if (k != known.end()) return k->second;
    const Def& d = defs_.at(net);
    std::vector<Logic> in;
    for (const auto& a : d.args) in.push_back(value(a, known));
    Logic r = Logic::X;
    auto all = [&](Logic v) {
      for (Logic x : in)
        if (x != v) return false;
      return true;
    };
    auto any = [&](Logic v) {
      for (Logic x : in)
        if (x == v) return true;
      return false;
    };
    if (d.kind == "AND" || d.kind == "NAND") {
      r = any(Logic::Zero) ? Logic::Zero : all(Logic::One) ? Logic::One : Logic::X;
      if (d.kind == "NAND") r = dftclk::logic_not(r);
    } else if (d.kind == "OR" || d.kind == "NOR") {
      r = any(Logic::One) ? Logic::One : all(Logic::Zero) ? Logic::Zero : Logic::X;
      if (d.kind == "NOR") r = dftclk::logic_not(r);
    } else if (d.kind == "XOR" || d.kind == "XNOR") {
      if (any(Logic::X)) r = Logic::X;
      else {
        int ones = 0;
        for (Logic x : in) ones += x == Logic::One;
        r = dftclk::from_bool(ones % 2 == 1);
      }
      if (d.kind == "XNOR") r = dftclk::logic_not(r);
    } else if (d.kind == "NOT") {
      r = dftclk::logic_not(in[0]);
    } else if (d.kind == "BUF") {
      r = in[0];
    } else if (d.kind == "MUX2") {
      if (in[2] == Logic::Zero) r = in[0];
      else if (in[2] == Logic::One) r = in[1];
      else r = in[0] == in[1] ? in[0] : Logic::X;
    } else if (d.kind == "DFF" || d.kind == "SDFF") {
      throw std::logic_error("flop output must be supplied: " + net);
    }
    known[net] = r;
    return r;
  }

  struct Def {
    std::string kind;
    std::vector<std::string> args;
  };
  const std::map<std::string, Def>& defs() const { return defs_; }

private:
  std::map<std::string, Def> defs_;
};

/// Random combinational DAG over `pis` inputs with `gates` gates; every gate
/// output that nothing else reads becomes a primary output.
inline std::string random_dag(std::mt19937_64& rng, int pis, int gates)
{
  static const char* kinds[] = {"AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUF", "MUX2"};
  std::ostringstream os;
  std::vector<std::string> nets;
  for (int i = 0; i < pis; ++i) {
    nets.push_back("i" + std::to_string(i));
    os << "INPUT(" << nets.back() << ")\n";
  }
  std::vector<bool> used(static_cast<std::size_t>(pis + gates), false);
  for (int g = 0; g < gates; ++g) {
    const char* k = kinds[std::uniform_int_distribution<int>(0, 8)(rng)];
    int arity = std::string(k) == "NOT" || std::string(k) == "BUF" ? 1
                : std::string(k) == "MUX2"                        ? 3
                                                                  : std::uniform_int_distribution<int>(2, 3)(rng);
    os << "g" << g << " = " << k << "(";
    for (int a = 0; a < arity; ++a) {
      auto idx = std::uniform_int_distribution<std::size_t>(0, nets.size() - 1)(rng);
      used[idx] = true;
      os << (a ? ", " : "") << nets[idx];
    }
    os << ")\n";
    nets.push_back("g" + std::to_string(g));
  }
  for (int g = 0; g < gates; ++g)
    if (!used[static_cast<std::size_t>(pis + g)]) os << "OUTPUT(g" << g << ")\n";
  return os.str();
}

struct SeqSpec {
  int pis = 4;
  int flops = 6;
  int gates = 30;
  int domains = 2;
  int chains = 2;
  int non_scan = 0;  // the last `non_scan` flops are functional only
};

/// Random sequential circuit: scan flops spread over `chains` chains,
/// domains alternate with PLL ratios 1, 2, 1, ...
inline std::string random_sequential(std::mt19937_64& rng, const SeqSpec& spec)
{
  static const char* kinds[] = {"AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUF", "MUX2"};
  std::ostringstream os;
  for (int d = 0; d < spec.domains; ++d) os << "DOMAIN d" << d << " PLLRATIO " << (d % 2 ? 2 : 1) << "\n";
  std::vector<std::string> nets;
  for (int i = 0; i < spec.pis; ++i) {
    nets.push_back("i" + std::to_string(i));
    os << "INPUT(" << nets.back() << ")\n";
  }
  for (int c = 0; c < spec.chains; ++c) os << "INPUT(si" << c << ")\n";
  for (int f = 0; f < spec.flops; ++f) nets.push_back("q" + std::to_string(f));
  auto pick = [&](std::size_t limit) { return nets[std::uniform_int_distribution<std::size_t>(0, limit - 1)(rng)]; };
  for (int g = 0; g < spec.gates; ++g) {
    const std::string k = kinds[std::uniform_int_distribution<int>(0, 8)(rng)];
    const int arity = k == "NOT" || k == "BUF" ? 1 : k == "MUX2" ? 3 : std::uniform_int_distribution<int>(2, 3)(rng);
    os << "g" << g << " = " << k << "(";
    for (int a = 0; a < arity; ++a) os << (a ? ", " : "") << pick(nets.size());
    os << ")\n";
    nets.push_back("g" + std::to_string(g));
  }
  const int scan = spec.flops - spec.non_scan;
  std::vector<std::vector<int>> chain_cells(static_cast<std::size_t>(std::max(spec.chains, 1)));
  for (int f = 0; f < scan; ++f) chain_cells[static_cast<std::size_t>(f % spec.chains)].push_back(f);
  for (int f = 0; f < spec.flops; ++f) {
    const std::string d = pick(nets.size());
    const std::string dom = "d" + std::to_string(f % spec.domains);
    if (f < scan) {
      const auto& cells = chain_cells[static_cast<std::size_t>(f % spec.chains)];
      const auto pos = std::find(cells.begin(), cells.end(), f) - cells.begin();
      const std::string si = pos == 0 ? "si" + std::to_string(f % spec.chains) : "q" + std::to_string(cells[static_cast<std::size_t>(pos - 1)]);
      os << "q" << f << " = SDFF(" << d << ", si=" << si << ", domain=" << dom << ")\n";
    } else {
      os << "q" << f << " = DFF(" << d << ", domain=" << dom << ")\n";
    }
  }
  for (int g = spec.gates - 3; g < spec.gates; ++g)
    if (g >= 0) os << "OUTPUT(g" << g << ")\n";
  for (int c = 0; c < spec.chains; ++c) {
    const auto& cells = chain_cells[static_cast<std::size_t>(c)];
    if (cells.empty()) continue;
    os << "CHAIN c" << c << " SI=si" << c << " SO=q" << cells.back() << " CELLS=";
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << "q" << cells[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace testing_helpers

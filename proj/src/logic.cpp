#include "dftclk/logic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace dftclk {

char to_char(Logic v)
{
  switch (v) {
  case Logic::Zero: return '0';
  case Logic::One: return '1';
  default: return 'x';
  }
}

Logic logic_from_char(char c)
{
  switch (c) {
  case '0': return Logic::Zero;
  case '1': return Logic::One;
  case 'x':
  case 'X': return Logic::X;
  default: throw std::invalid_argument(std::string("not a logic value: '") + c + "'");
  }
}

namespace {

Logic and_all(std::span<const Logic> in)
{
  bool any_x = false;
  for (Logic v : in) {
    if (v == Logic::Zero) return Logic::Zero;
    if (v == Logic::X) any_x = true;
  }
  return any_x ? Logic::X : Logic::One;
}

Logic or_all(std::span<const Logic> in)
{
  bool any_x = false;
  for (Logic v : in) {
    if (v == Logic::One) return Logic::One;
    if (v == Logic::X) any_x = true;
  }
  return any_x ? Logic::X : Logic::Zero;
}

Logic xor_all(std::span<const Logic> in)
{
  bool acc = false;
  for (Logic v : in) {
    if (v == Logic::X) return Logic::X;
    acc ^= (v == Logic::One);
  }
  return from_bool(acc);
}

}  // namespace

Logic eval_gate(GateKind kind, std::span<const Logic> in)
{
  switch (kind) {
  case GateKind::And: return and_all(in);
  case GateKind::Nand: return logic_not(and_all(in));
  case GateKind::Or: return or_all(in);
  case GateKind::Nor: return logic_not(or_all(in));
  case GateKind::Xor: return xor_all(in);
  case GateKind::Xnor: return logic_not(xor_all(in));
  case GateKind::Not: return logic_not(in[0]);
  case GateKind::Buf: return in[0];
  case GateKind::Mux2: {
    const Logic sel = in[2];
    if (sel == Logic::Zero) return in[0];
    if (sel == Logic::One) return in[1];
    return in[0] == in[1] ? in[0] : Logic::X;
  }
  }
  return Logic::X;
}

Word3 eval_gate_word(GateKind kind, std::span<const Word3> in)
{
  switch (kind) {
  case GateKind::And:
  case GateKind::Nand: {
    Word3 acc = in[0];
    for (std::size_t i = 1; i < in.size(); ++i) acc = w3_and(acc, in[i]);
    return kind == GateKind::And ? acc : w3_not(acc);
  }
  case GateKind::Or:
  case GateKind::Nor: {
    Word3 acc = in[0];
    for (std::size_t i = 1; i < in.size(); ++i) acc = w3_or(acc, in[i]);
    return kind == GateKind::Or ? acc : w3_not(acc);
  }
  case GateKind::Xor:
  case GateKind::Xnor: {
    Word3 acc = in[0];
    for (std::size_t i = 1; i < in.size(); ++i) acc = w3_xor(acc, in[i]);
    return kind == GateKind::Xor ? acc : w3_not(acc);
  }
  case GateKind::Not: return w3_not(in[0]);
  case GateKind::Buf: return in[0];
  case GateKind::Mux2: return w3_mux(in[0], in[1], in[2]);
  }
  return Word3::all_x();
}

namespace {
constexpr std::array<const char*, 9> kKindNames = {"AND", "NAND", "OR",  "NOR", "XOR",
                                                   "XNOR", "NOT", "BUF", "MUX2"};
}

const char* gate_kind_name(GateKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

bool parse_gate_kind(const std::string& name, GateKind& out)
{
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "INV") upper = "NOT";
  if (upper == "BUFF") upper = "BUF";
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (upper == kKindNames[i]) {
      out = static_cast<GateKind>(i);
      return true;
    }
  }
  return false;
}

bool arity_ok(GateKind kind, std::size_t n)
{
  switch (kind) {
  case GateKind::Not:
  case GateKind::Buf: return n == 1;
  case GateKind::Mux2: return n == 3;
  default: return n >= 2;
  }
}

}  // namespace dftclk

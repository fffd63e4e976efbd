// Three-valued logic used by every simulator in the toolkit.
#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace dftclk {

enum class Logic : std::uint8_t { Zero = 0, One = 1, X = 2 };

enum class GateKind : std::uint8_t { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Mux2 };

inline constexpr bool is_binary(Logic v) { return v != Logic::X; }

inline constexpr Logic logic_not(Logic v)
{
  switch (v) {
  case Logic::Zero: return Logic::One;
  case Logic::One: return Logic::Zero;
  default: return Logic::X;
  }
}

inline constexpr Logic from_bool(bool b) { return b ? Logic::One : Logic::Zero; }

char to_char(Logic v);
Logic logic_from_char(char c);  // '0', '1', 'x'/'X'; throws std::invalid_argument otherwise

/// Evaluate a gate over scalar values. MUX2 inputs are (in0, in1, sel).
Logic eval_gate(GateKind kind, std::span<const Logic> in);

const char* gate_kind_name(GateKind kind);
bool parse_gate_kind(const std::string& name, GateKind& out);
/// Arity check: NOT/BUF take one input, MUX2 three, everything else two or more.
bool arity_ok(GateKind kind, std::size_t n);

/// 64 lanes of three-valued logic. A lane is One if its bit is set in `one`,
/// Zero if set in `zero`, X if set in neither. Both set never happens.
struct Word3 {
  std::uint64_t one = 0;
  std::uint64_t zero = 0;

  static constexpr Word3 all_x() { return {0, 0}; }
  static constexpr Word3 constant(Logic v, std::uint64_t lanes = ~0ULL)
  {
    switch (v) {
    case Logic::One: return {lanes, 0};
    case Logic::Zero: return {0, lanes};
    default: return {0, 0};
    }
  }
  Logic lane(unsigned i) const
  {
    if ((one >> i) & 1U) return Logic::One;
    if ((zero >> i) & 1U) return Logic::Zero;
    return Logic::X;
  }
  void set_lane(unsigned i, Logic v)
  {
    const std::uint64_t bit = 1ULL << i;
    one &= ~bit;
    zero &= ~bit;
    if (v == Logic::One) one |= bit;
    if (v == Logic::Zero) zero |= bit;
  }
  std::uint64_t binary() const { return one | zero; }
  friend bool operator==(const Word3&, const Word3&) = default;
};

inline Word3 w3_not(Word3 a) { return {a.zero, a.one}; }
inline Word3 w3_and(Word3 a, Word3 b) { return {a.one & b.one, a.zero | b.zero}; }
inline Word3 w3_or(Word3 a, Word3 b) { return {a.one | b.one, a.zero & b.zero}; }
inline Word3 w3_xor(Word3 a, Word3 b)
{
  return {(a.one & b.zero) | (a.zero & b.one), (a.one & b.one) | (a.zero & b.zero)};
}
inline Word3 w3_mux(Word3 in0, Word3 in1, Word3 sel)
{
  return {(sel.zero & in0.one) | (sel.one & in1.one) | (in0.one & in1.one),
          (sel.zero & in0.zero) | (sel.one & in1.zero) | (in0.zero & in1.zero)};
}
/// Lanes where both words are binary and disagree.
inline std::uint64_t w3_diff(Word3 a, Word3 b) { return (a.one & b.zero) | (a.zero & b.one); }

Word3 eval_gate_word(GateKind kind, std::span<const Word3> in);

}  // namespace dftclk

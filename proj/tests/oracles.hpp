#pragma once

// Test-only oracles, kept independent of the code paths they check.

#include <vector>

#include "betgame/measure.hpp"

namespace betgame::oracles {

// Membership of a fully assigned prefix (bits[p-1] is the value at position p)
// in a clopen expression. Every atom position must lie within the vector.
inline bool expr_contains(const ClopenExpr& e, const std::vector<int>& bits) {
  switch (e.kind) {
    case ClopenExpr::Kind::Full: return true;
    case ClopenExpr::Kind::Empty: return false;
    case ClopenExpr::Kind::Cell:
      for (const auto& [p, b] : e.cell.entries())
        if (bits[static_cast<std::size_t>(p - 1)] != (b ? 1 : 0)) return false;
      return true;
    case ClopenExpr::Kind::Mod: {
      long ones = 0;
      for (Position p : e.mod.I) ones += bits[static_cast<std::size_t>(p - 1)];
      return ones % e.mod.m == e.mod.o;
    }
    case ClopenExpr::Kind::Not: return !expr_contains(*e.a, bits);
    case ClopenExpr::Kind::And: return expr_contains(*e.a, bits) && expr_contains(*e.b, bits);
    case ClopenExpr::Kind::Or: return expr_contains(*e.a, bits) || expr_contains(*e.b, bits);
  }
  return false;
}

// Exact measure by enumerating all assignments of positions [1, L].
inline Rational measure_bruteforce(const ExprPtr& e, long L) {
  long count = 0;
  std::vector<int> bits(static_cast<std::size_t>(L), 0);
  for (long mask = 0; mask < (1L << L); ++mask) {
    for (long p = 0; p < L; ++p) bits[static_cast<std::size_t>(p)] = (mask >> p) & 1;
    if (expr_contains(*e, bits)) ++count;
  }
  return rat(count, 1L << L);
}

} // namespace betgame::oracles

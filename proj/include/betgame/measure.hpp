#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "betgame/core.hpp"

namespace betgame {

// Sum of C(u, i) over i in [0, u] with i ≡ r (mod m). Backed by a process-wide
// table filled row by row; thread-safe.
BigInt binomial_residue_sum(long u, long m, long r);

// Measure of the clopen set of sequences consistent with r: 2^-|support|.
Rational measure_restriction(const Restriction& r);

// lambda(M | r~). With u unrestricted positions of I and j ones already forced
// by r, equals 2^-u * sum of C(u,i) over (j+i) ≡ o (mod m).
Rational measure_modulo_given_restriction(const ModuloSet& M, const Restriction& r);

// (1-xi)·y <= x <= y/(1-xi), exactly. Requires 0 <= xi < 1.
bool xi_approx(const Rational& x, const Rational& y, const Rational& xi);

// ns_unrestricted(r, I) >= (m/xi)^2, compared exactly.
bool modulo_independence_precondition(std::span<const Position> I, long m, const Rational& xi,
                                      const Restriction& r);

// Asserts xi_approx(lambda(Mod(I,m,o) | r~), 1/m, xi) for every remainder o.
// Throws PreconditionError when the precondition above fails. xi == 1 is
// accepted and trivially true.
bool check_modulo_independence(std::span<const Position> I, long m, const Rational& xi,
                               const Restriction& r);

// Same bounds with xi = m/sqrt(u) for u = ns_unrestricted(r, I), decided by
// squared comparisons so no irrational value is materialized. Requires u > m^2.
bool check_modulo_independence_sqrt(std::span<const Position> I, long m, const Restriction& r);

// Expression tree over clopen atoms.
class ClopenExpr;
using ExprPtr = std::shared_ptr<const ClopenExpr>;

class ClopenExpr {
 public:
  enum class Kind { Full, Empty, Cell, Mod, Not, And, Or };

  Kind kind;
  Restriction cell; // Kind::Cell
  ModuloSet mod;    // Kind::Mod
  ExprPtr a, b;     // operands for Not/And/Or

  Json to_json() const;
};

ExprPtr expr_full();
ExprPtr expr_empty();
ExprPtr expr_cell(const Restriction& r);
ExprPtr expr_modulo(const ModuloSet& M);
ExprPtr expr_not(const ExprPtr& x);
ExprPtr expr_and(const ExprPtr& x, const ExprPtr& y);
ExprPtr expr_or(const ExprPtr& x, const ExprPtr& y);
ExprPtr expr_diff(const ExprPtr& x, const ExprPtr& y);
ExprPtr expr_union(const std::vector<ExprPtr>& xs);

// Largest position mentioned by any atom (0 if none).
Position expr_max_position(const ExprPtr& e);

// Exact measure by recursive position splitting with memoization. The overload
// with a universe rejects expressions mentioning positions beyond the bound.
Rational measure_expr(const ExprPtr& e);
Rational measure_expr(const ExprPtr& e, const PositionUniverse& universe);

// lambda((union over groups of their cells) ∩ within), where the cells inside
// one group are pairwise disjoint. `within` = nullopt means the whole space.
// Inclusion-exclusion across groups; exact.
Rational measure_cells_union_in(const std::vector<std::vector<Restriction>>& groups,
                                const std::optional<ModuloSet>& within);

Rational measure_modulo(const ModuloSet& M);

} // namespace betgame

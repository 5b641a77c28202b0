#pragma once

#include <optional>
#include <vector>

#include "betgame/measure.hpp"
#include "betgame/strategy.hpp"

namespace betgame {

// Ordered family B_1..B_n; the i-th strategy carries probability 2^-i. The
// ordering is fixed for the lifetime of a game (capital bounds attach by index).
struct StrategyFamily {
  std::vector<BettingStrategy> strategies;

  StrategyFamily() = default;
  explicit StrategyFamily(int n) : strategies(static_cast<std::size_t>(n)) {}

  int size() const { return static_cast<int>(strategies.size()); }
  const BettingStrategy& at(int i) const { return strategies.at(static_cast<std::size_t>(i - 1)); }
  BettingStrategy& at(int i) { return strategies.at(static_cast<std::size_t>(i - 1)); }

  static Rational weight(int i) { return pow2(-i); } // 1-based
};

// Sum over i and leaf-strings s of 2^-i c_i(s) lambda(cell_i(s) | X).
// Throws PreconditionError when X has measure zero.
Rational expected_earning(const StrategyFamily& F, const ExprPtr& X);
Rational expected_earning(const StrategyFamily& F, const ModuloSet& M);

// Index (0-based into parts) of a part whose earning does not exceed the
// earning on the union. Parts must partition their union with positive
// measures, checked exactly through measures.
std::size_t min_earning_part(const StrategyFamily& F, const std::vector<ExprPtr>& parts);

struct LowCapitalSubset {
  ExprPtr Y;
  Rational measureY;
  Rational measureZ;
  std::vector<Rational> boundPerStrategy; // 2^i q earn, 1-based order
  bool strictlyAboveD;
  Json to_json() const;
};

// Removes from X the leaf-cells whose capital exceeds 2^i q earn
// (q = lambda(X)/(lambda(X)-d)); guarantees lambda(Y) >= d.
LowCapitalSubset low_capital_subset(const StrategyFamily& F, const ExprPtr& X, const Rational& d);

struct KlEtaReport {
  Rational xi;
  RestrictionMultiSet theta, delta; // witnesses
  Rational lambdaM, lambdaMprime;
  Rational thetaSumSize, deltaSumSize;
  Rational thetaCondM, deltaCondM;
  Rational earnBefore;                 // on M
  std::optional<Rational> earnAfter;   // on M', absent when vacuous
  std::optional<Rational> rhs;         // bound, present when denominators positive
  bool vacuous = false;                // lambda(M) = 0 or lambda(M') = 0
  bool denominatorPositive = false;
  bool mainHolds = true;               // only meaningful when applicable
  bool eqMeasureApplicable = false;
  bool eqMeasureHolds = true;          // lambda(M)/lambda(M') bound
  bool eqDeltaHolds = true;            // lambda(Delta~|M) <= lambda+(Delta)/(1-xi)
  bool allChecksHold() const;
  Json to_json() const;
};

// Exact verification of the earning bound for families before -> after on the
// modulo set M with chubbiness bound phi (> m^2, perfect square).
KlEtaReport verify_kl_eta(const StrategyFamily& before, const StrategyFamily& after,
                          const ModuloSet& M, const BigInt& phi);

// Multiset of (I,phi)-lean leaf-restrictions across the family.
RestrictionMultiSet lean_leaf_multiset(const StrategyFamily& F, std::span<const Position> I,
                                       const BigInt& phi);

// Multiset of leaf-restrictions of `after` that were slimmed down relative to
// `before`: their ancestor leaf in `before` was chubby and they are slim.
RestrictionMultiSet slimmed_down_multiset(const StrategyFamily& before, const StrategyFamily& after,
                                          std::span<const Position> I, const BigInt& phi);

} // namespace betgame

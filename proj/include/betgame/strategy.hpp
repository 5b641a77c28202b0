#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "betgame/core.hpp"

namespace betgame {

// A finite non-monotonic betting strategy as an incrementally grown bet tree.
// Outcome strings are '0'/'1' paths from the root (the empty string). Node
// indices are stable and append-only: a parent always precedes its children.
class BettingStrategy {
 public:
  struct Node {
    std::int32_t parent = -1;
    std::int32_t child[2] = {-1, -1};
    std::int32_t depth = 0;
    std::int8_t bitFromParent = -1;
    Position betPos = 0; // valid when internal
    Rational mass;
  };

  // The initial strategy: only the empty string, empty restriction, mass 1.
  BettingStrategy();

  int nodeCount() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int idx) const { return nodes_.at(static_cast<std::size_t>(idx)); }
  bool isLeaf(int idx) const { return node(idx).child[0] < 0; }

  std::string pathOf(int idx) const;
  int nodeAt(std::string_view path) const; // -1 when the path is not a node

  Restriction restrictionOf(int idx) const;
  // The bit forced at p along the path to idx, if any.
  std::optional<bool> pathAssignment(int idx, Position p) const;

  // c(s) = mass(s) * 2^|s|.
  Rational capital(int idx) const;

  std::vector<int> leafIndices() const;

  // Defines a bet at the given leaf: position p (unassigned on the path),
  // children masses mass0 + mass1 == mass(leaf). Returns the 0-child index;
  // the 1-child is the next one. Throws BetError on any violation.
  int defineBet(int leafIdx, Position p, const Rational& mass0, const Rational& mass1);

 private:
  std::vector<Node> nodes_;
};

// Value-semantics form of the incremental step: returns the grown strategy.
BettingStrategy define_bet(const BettingStrategy& B, std::string_view leafPath, Position p,
                           const Rational& mass0, const Rational& mass1);

Rational capital(const BettingStrategy& B, std::string_view path);

// Per-node capital c and running maximum over prefixes.
struct CapitalReport {
  std::vector<Rational> capital;
  std::vector<Rational> maxCapital;
};
CapitalReport capital_report(const BettingStrategy& B);

// Follows the unique root-to-leaf path consistent with w (w[p-1] is the bit at
// position p) and returns the maximum capital along it. Throws UniverseError
// when the path bets beyond w.
Rational maximal_achieved_capital(const BettingStrategy& B, std::span<const int> w);

// Savings transformation: banked/for-play split per node, with the number of
// bank transfers on the path.
struct SavingsAccounts {
  std::vector<Rational> play;
  std::vector<Rational> bank;
  std::vector<long> transfers;
};
SavingsAccounts savings_accounts(const BettingStrategy& B);

// Same restrictions and bet positions; masses rebuilt from the savings
// accounts, mass'(s) = (play + bank) * 2^-|s|.
BettingStrategy with_savings(const BettingStrategy& B);

// c(s) >= maxCapital(s) - 2 at every node.
bool check_conservative(const BettingStrategy& B);

// For B' = with_savings(B): certifies 2^{c'(s)+2} > maxCapital_B(s) at every
// node via the integer form (bank >= transfers and maxCapital < 2^{transfers+2}).
bool check_savings_lowerbound(const BettingStrategy& B);

// Node-superset check for B -> B' (same masses and bet positions on shared nodes).
bool is_extension_of(const BettingStrategy& after, const BettingStrategy& before);

Json strategy_to_json(const BettingStrategy& B);
BettingStrategy strategy_from_json(const Json& j);

} // namespace betgame

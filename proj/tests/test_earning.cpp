#include <doctest.h>

#include "betgame/earning.hpp"
#include "betgame/errors.hpp"
#include "betgame/rng.hpp"

using namespace betgame;

TEST_CASE("expected earning of initial families") {
  for (int n : {1, 2, 5}) {
    StrategyFamily F(n);
    CHECK(expected_earning(F, expr_full()) == Rational(1) - pow2(-n));
  }
  // two initial strategies on any modulo set
  StrategyFamily F2(2);
  CHECK(expected_earning(F2, ModuloSet{interval(1, 6), 3, 1}) == rat(3, 4));
  CHECK(expected_earning(F2, ModuloSet{interval(2, 9), 2, 0}) == rat(3, 4));
}

TEST_CASE("expected earning weighs leaves by conditional cell measure") {
  StrategyFamily F(1);
  F.at(1) = define_bet(F.at(1), "", 3, rat(3, 4), rat(1, 4));
  ExprPtr X = expr_cell(Restriction::of({{3, false}}));
  CHECK(expected_earning(F, X) == rat(3, 4)); // (1/2) * (3/2)
  CHECK_THROWS_AS(expected_earning(F, expr_empty()), PreconditionError);
  // fast modulo-set path agrees with the expression path
  ModuloSet M{interval(1, 5), 2, 1};
  CHECK(expected_earning(F, M) == expected_earning(F, expr_modulo(M)));
}

TEST_CASE("minimal earning part") {
  // symmetry: initial strategies earn the same on every remainder class
  StrategyFamily F(2);
  PositionSet I = interval(1, 6);
  std::vector<ExprPtr> parts;
  for (long o = 0; o < 3; ++o) parts.push_back(expr_modulo(ModuloSet{I, 3, o}));
  std::size_t idx = min_earning_part(F, parts);
  CHECK(expected_earning(F, parts[idx]) == expected_earning(F, expr_union(parts)));

  // all mass on one half: the other half earns nothing and is selected
  StrategyFamily G(1);
  G.at(1) = define_bet(G.at(1), "", 1, Rational(1), Rational(0));
  std::vector<ExprPtr> halves = {expr_cell(Restriction::of({{1, false}})),
                                 expr_cell(Restriction::of({{1, true}}))};
  CHECK(min_earning_part(G, halves) == 1);
  CHECK(expected_earning(G, halves[1]) == 0);

  std::vector<ExprPtr> overlapping = {expr_full(), expr_cell(Restriction::of({{1, true}}))};
  CHECK_THROWS_AS(min_earning_part(G, overlapping), PreconditionError);
  std::vector<ExprPtr> withEmpty = {expr_full(), expr_empty()};
  CHECK_THROWS_AS(min_earning_part(G, withEmpty), PreconditionError);
}

TEST_CASE("low-capital subset on a pinned instance") {
  StrategyFamily F(1);
  F.at(1) = define_bet(F.at(1), "", 2, rat(3, 4), rat(1, 4)); // leaves capital 3/2 and 1/2
  LowCapitalSubset r = low_capital_subset(F, expr_full(), rat(1, 4));
  CHECK(r.boundPerStrategy[0] == rat(4, 3)); // 2 * (4/3) * (1/2)
  CHECK(r.measureZ == rat(1, 2));            // exactly the 3/2-capital leaf
  CHECK(r.measureY == rat(1, 2));
  CHECK(r.strictlyAboveD);

  // initial family: nothing exceeds the bound, Y = X
  StrategyFamily I2(2);
  LowCapitalSubset whole = low_capital_subset(I2, expr_full(), rat(1, 3));
  CHECK(whole.measureZ == 0);
  CHECK(whole.measureY == 1);

  CHECK_THROWS_AS(low_capital_subset(F, expr_full(), Rational(1)), PreconditionError);
  CHECK_THROWS_AS(low_capital_subset(F, expr_full(), Rational(0)), PreconditionError);
}

TEST_CASE("lean and slimmed-down multisets") {
  PositionSet I = interval(1, 4);
  BigInt phi(2);
  StrategyFamily before(2);
  // strategy 1 restricts three of four positions: lean (one unrestricted)
  before.at(1) = define_bet(before.at(1), "", 1, rat(1, 2), rat(1, 2));
  before.at(1) = define_bet(before.at(1), "0", 2, rat(1, 4), rat(1, 4));
  before.at(1) = define_bet(before.at(1), "00", 3, rat(1, 8), rat(1, 8));
  RestrictionMultiSet lean = lean_leaf_multiset(before, I, phi);
  CHECK(lean.distinctCount() == 2); // "000" and "001" cells
  CHECK(lean.sumSize() == rat(1, 4));

  StrategyFamily after = before;
  after.at(2) = define_bet(after.at(2), "", 1, rat(1, 2), rat(1, 2));
  after.at(2) = define_bet(after.at(2), "1", 2, rat(1, 2), Rational(0));
  after.at(2) = define_bet(after.at(2), "10", 3, rat(1, 2), Rational(0));
  RestrictionMultiSet delta = slimmed_down_multiset(before, after, I, phi);
  // the two depth-3 leaves of strategy 2 descend from the chubby root and are slim
  CHECK(delta.sumSize() == rat(1, 4));
}

namespace {

void grow_random_in(BettingStrategy& B, Rng& rng, int bets, const PositionSet& I) {
  for (int b = 0; b < bets; ++b) {
    int idx = 0;
    while (!B.isLeaf(idx)) idx = B.node(idx).child[rng.below(2)];
    if (B.node(idx).depth >= 8) continue;
    Position p = 0;
    std::size_t start = rng.below(I.size());
    for (std::size_t off = 0; off < I.size(); ++off) {
      Position cand = I[(start + off) % I.size()];
      if (!B.pathAssignment(idx, cand)) {
        p = cand;
        break;
      }
    }
    if (p == 0) continue;
    Rational mass = B.node(idx).mass;
    Rational m0 = mass * rat(rng.range(0, 4), 4);
    B.defineBet(idx, p, m0, mass - m0);
  }
}

} // namespace

TEST_CASE("earning bound verifier on pinned and structured instances") {
  long m = 2;
  BigInt phi = 16 * BigInt(m) * BigInt(m); // 64, xi = 1/4
  PositionSet I = interval(1, 64);
  ModuloSet M{I, m, 0};

  // no new bets: Delta empty, the two-factor bound holds
  StrategyFamily F(2);
  KlEtaReport same = verify_kl_eta(F, F, M, phi);
  CHECK(!same.vacuous);
  CHECK(same.denominatorPositive);
  CHECK(same.deltaSumSize == 0);
  CHECK(same.mainHolds);
  CHECK(same.allChecksHold());

  // one strategy slims a leaf chain fully inside the modulo set's positions
  StrategyFamily before(1);
  StrategyFamily after = before;
  Rng rng(41);
  grow_random_in(after.at(1), rng, 70, I); // deep bets in I slim leaves (|I| = phi)
  KlEtaReport rep = verify_kl_eta(before, after, M, phi);
  CHECK(rep.allChecksHold());

  CHECK_THROWS_AS(verify_kl_eta(before, after, M, BigInt(65)), PreconditionError);
  CHECK_THROWS_AS(verify_kl_eta(after, before, M, phi), PreconditionError);
  ModuloSet tooSmall{interval(1, 2), 2, 0};
  CHECK_THROWS_AS(verify_kl_eta(before, after, tooSmall, BigInt(4)), PreconditionError);

  // |I| below phi makes the empty restriction lean: everything lands in Theta,
  // M' is empty and the report is vacuous (nothing asserted)
  StrategyFamily tiny(1);
  ModuloSet smallM{interval(1, 2), 2, 0};
  KlEtaReport vac = verify_kl_eta(tiny, tiny, smallM, BigInt(9));
  CHECK(vac.vacuous);
  CHECK(vac.allChecksHold());
  CHECK(vac.to_json().at("witnesses").at("theta").size() == 1);
}

TEST_CASE("the verifier's composed measures match the generic expression engine") {
  Rng rng(77);
  for (int t = 0; t < 60; ++t) {
    long m = 2;
    BigInt phi(9); // phi > m^2 and a perfect square; xi = 2/3
    long sizeI = 9 + static_cast<long>(rng.below(3));
    PositionSet I = interval(1, sizeI);
    StrategyFamily before(static_cast<int>(1 + rng.below(2)));
    for (int i = 1; i <= before.size(); ++i)
      grow_random_in(before.at(i), rng, static_cast<int>(rng.below(4)), I);
    StrategyFamily after = before;
    for (int i = 1; i <= after.size(); ++i)
      grow_random_in(after.at(i), rng, static_cast<int>(rng.below(5)), I);
    ModuloSet M{I, m, rng.range(0, m - 1)};
    KlEtaReport rep = verify_kl_eta(before, after, M, phi);

    ExprPtr removed = expr_empty();
    RestrictionMultiSet theta = lean_leaf_multiset(before, I, phi);
    RestrictionMultiSet delta = slimmed_down_multiset(before, after, I, phi);
    for (const auto& [r, mult] : theta.entries()) removed = expr_or(removed, expr_cell(r));
    for (const auto& [r, mult] : delta.entries()) removed = expr_or(removed, expr_cell(r));
    ExprPtr Mprime = expr_diff(expr_modulo(M), removed);
    CHECK(rep.lambdaMprime == measure_expr(Mprime));
    if (!rep.vacuous) {
      REQUIRE(rep.earnAfter.has_value());
      CHECK(*rep.earnAfter == expected_earning(after, Mprime));
    }
  }
}

TEST_CASE("subset earning bound, randomized") {
  Rng rng(55);
  for (int t = 0; t < 120; ++t) {
    StrategyFamily F(static_cast<int>(1 + rng.below(3)));
    PositionSet I = interval(1, 8);
    for (int i = 1; i <= F.size(); ++i)
      grow_random_in(F.at(i), rng, static_cast<int>(rng.below(8)), I);
    ModuloSet M{I, 2, rng.range(0, 1)};
    ExprPtr X = expr_modulo(M);
    ExprPtr Xp = expr_and(X, expr_cell(Restriction::of({{rng.range(1, 8), rng.below(2) == 1}})));
    Rational lamX = measure_expr(X), lamXp = measure_expr(Xp);
    if (lamXp == 0) continue;
    CHECK(expected_earning(F, Xp) * lamXp <= expected_earning(F, X) * lamX);
  }
}

#include <doctest.h>

#include "betgame/errors.hpp"
#include "betgame/measure.hpp"
#include "betgame/rng.hpp"
#include "betgame/strategy.hpp"

using namespace betgame;

namespace {

// Random tree growth with masses in 32nds of the leaf mass.
BettingStrategy random_strategy(Rng& rng, int bets, int maxDepth = 12) {
  BettingStrategy B;
  for (int b = 0; b < bets; ++b) {
    int idx = 0;
    while (!B.isLeaf(idx)) idx = B.node(idx).child[rng.below(2)];
    if (B.node(idx).depth >= maxDepth) continue;
    Position p = rng.range(1, 64);
    if (B.pathAssignment(idx, p)) continue;
    Rational mass = B.node(idx).mass;
    Rational m0 = mass * rat(rng.range(0, 32), 32);
    B.defineBet(idx, p, m0, mass - m0);
  }
  return B;
}

// All-in chain of k wins on the '0' side, betting positions 1..k.
BettingStrategy doubling_run(int k) {
  BettingStrategy B;
  std::string path;
  for (int i = 1; i <= k; ++i) {
    int leaf = B.nodeAt(path);
    B.defineBet(leaf, i, B.node(leaf).mass, Rational(0));
    path += '0';
  }
  return B;
}

} // namespace

TEST_CASE("defining a bet splits capital as a fair wager") {
  BettingStrategy B = define_bet(BettingStrategy(), "", 3, rat(3, 4), rat(1, 4));
  CHECK(capital(B, "0") == rat(3, 2));
  CHECK(capital(B, "1") == rat(1, 2));
  CHECK(capital(B, "") == 1);
  CHECK(B.restrictionOf(B.nodeAt("0")) == Restriction::of({{3, false}}));
  CHECK(B.restrictionOf(B.nodeAt("1")) == Restriction::of({{3, true}}));

  BettingStrategy even = define_bet(BettingStrategy(), "", 5, rat(1, 2), rat(1, 2));
  CHECK(capital(even, "0") == capital(even, ""));
  CHECK(capital(even, "1") == capital(even, ""));

  BettingStrategy allIn = define_bet(BettingStrategy(), "", 2, Rational(1), Rational(0));
  CHECK(capital(allIn, "0") == 2);
  CHECK(capital(allIn, "1") == 0);
}

TEST_CASE("capital from mass and depth") {
  BettingStrategy B = define_bet(BettingStrategy(), "", 1, rat(3, 4), rat(1, 4));
  B = define_bet(B, "1", 2, rat(1, 4), Rational(0));
  CHECK(capital(B, "") == 1);
  CHECK(capital(B, "0") == rat(3, 2)); // mass 3/4 at depth 1
  CHECK(capital(B, "10") == 1);        // mass 1/4 at depth 2
  CHECK_THROWS_AS(capital(B, "0001"), BetError);
}

TEST_CASE("bet validation errors are distinct") {
  BettingStrategy B = define_bet(BettingStrategy(), "", 3, rat(1, 2), rat(1, 2));
  CHECK_THROWS_WITH_AS(define_bet(B, "0", 3, rat(1, 4), rat(1, 4)),
                       doctest::Contains("already restricted"), BetError);
  CHECK_THROWS_WITH_AS(define_bet(B, "", 5, rat(1, 2), rat(1, 2)),
                       doctest::Contains("not a leaf"), BetError);
  CHECK_THROWS_WITH_AS(define_bet(B, "0", 5, rat(1, 4), rat(1, 2)),
                       doctest::Contains("sum to the leaf mass"), BetError);
  CHECK_THROWS_AS(define_bet(B, "0", 5, rat(3, 4), rat(-1, 4)), BetError);
  CHECK_THROWS_AS(define_bet(B, "01", 5, rat(1, 4), rat(1, 4)), BetError);
}

TEST_CASE("maximal achieved capital walks the consistent path") {
  std::vector<int> w0 = {1, 1, 0, 1}; // bit 3 = 0
  std::vector<int> w1 = {1, 1, 1, 1}; // bit 3 = 1
  CHECK(maximal_achieved_capital(BettingStrategy(), w0) == 1);

  BettingStrategy B = define_bet(BettingStrategy(), "", 3, rat(3, 4), rat(1, 4));
  CHECK(maximal_achieved_capital(B, w0) == rat(3, 2));
  CHECK(maximal_achieved_capital(B, w1) == 1); // max(1, 1/2)

  std::vector<int> tooSmall = {0, 0};
  CHECK_THROWS_AS(maximal_achieved_capital(B, tooSmall), UniverseError);
}

TEST_CASE("mass conservation and unit leaf mass") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    BettingStrategy B = random_strategy(rng, static_cast<int>(rng.below(30)));
    Rational leafSum = 0;
    for (int i = 0; i < B.nodeCount(); ++i) {
      if (B.isLeaf(i)) {
        leafSum += B.node(i).mass;
      } else {
        CHECK(B.node(i).mass ==
              B.node(B.node(i).child[0]).mass + B.node(B.node(i).child[1]).mass);
      }
    }
    CHECK(leafSum == 1);
    // expected capital over leaves on the whole space is exactly 1
    Rational expectedCapital = 0;
    for (int leaf : B.leafIndices())
      expectedCapital += B.capital(leaf) * measure_restriction(B.restrictionOf(leaf));
    CHECK(expectedCapital == 1);
  }
}

TEST_CASE("savings transformation on an all-in winning run") {
  for (int k : {1, 3, 5}) {
    BettingStrategy B = doubling_run(k);
    SavingsAccounts acc = savings_accounts(B);
    std::string path(static_cast<std::size_t>(k), '0');
    int leaf = B.nodeAt(path);
    CHECK(acc.play[static_cast<std::size_t>(leaf)] == 1);
    CHECK(acc.bank[static_cast<std::size_t>(leaf)] == k);
    CHECK(acc.transfers[static_cast<std::size_t>(leaf)] == k);
    BettingStrategy Bp = with_savings(B);
    CHECK(capital(Bp, path) == Rational(k + 1));
  }
}

TEST_CASE("savings on a losing or zero-wager bet") {
  // wagered fraction 1/2, lost: for-play halves, bank unchanged
  BettingStrategy B = define_bet(BettingStrategy(), "", 1, rat(3, 4), rat(1, 4));
  SavingsAccounts acc = savings_accounts(B);
  int lost = B.nodeAt("1");
  CHECK(acc.play[static_cast<std::size_t>(lost)] == rat(1, 2));
  CHECK(acc.bank[static_cast<std::size_t>(lost)] == 0);

  // zero wager: both accounts unchanged on both sides
  BettingStrategy Z = define_bet(BettingStrategy(), "", 1, rat(1, 2), rat(1, 2));
  SavingsAccounts zacc = savings_accounts(Z);
  for (const char* path : {"0", "1"}) {
    int idx = Z.nodeAt(path);
    CHECK(zacc.play[static_cast<std::size_t>(idx)] == 1);
    CHECK(zacc.bank[static_cast<std::size_t>(idx)] == 0);
  }
}

TEST_CASE("savings below a zero-capital node inherits the accounts") {
  // all-in on '0', then keep betting on the dead '1' branch
  BettingStrategy B = define_bet(BettingStrategy(), "", 1, Rational(1), Rational(0));
  B = define_bet(B, "1", 2, Rational(0), Rational(0));
  B = define_bet(B, "10", 3, Rational(0), Rational(0));
  SavingsAccounts acc = savings_accounts(B);
  Rational playAtDead = acc.play[static_cast<std::size_t>(B.nodeAt("1"))];
  Rational bankAtDead = acc.bank[static_cast<std::size_t>(B.nodeAt("1"))];
  for (const char* path : {"10", "11", "100", "101"}) {
    int idx = B.nodeAt(path);
    CHECK(acc.play[static_cast<std::size_t>(idx)] == playAtDead);
    CHECK(acc.bank[static_cast<std::size_t>(idx)] == bankAtDead);
  }
  CHECK(check_conservative(with_savings(B)));
}

TEST_CASE("conservativeness") {
  CHECK(check_conservative(BettingStrategy()));

  // win to 8, then crash to 1: violates c >= maxc - 2
  BettingStrategy B = doubling_run(3);
  int leaf = B.nodeAt("000");
  B.defineBet(leaf, 4, rat(1, 16), rat(15, 16));
  CHECK(capital(B, "0000") == 1);
  CHECK(!check_conservative(B));

  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    BettingStrategy R = random_strategy(rng, static_cast<int>(rng.below(30)));
    CHECK(check_conservative(with_savings(R)));
  }
}

TEST_CASE("savings capital lower bound") {
  CHECK(check_savings_lowerbound(doubling_run(5))); // c' = 6 > log 32 - 2 = 3

  // max capital pinned at 1 (fair bets only): bound holds trivially
  BettingStrategy fair;
  std::string path;
  for (int d = 0; d < 6; ++d) {
    int leaf = fair.nodeAt(path);
    Rational half = fair.node(leaf).mass / 2;
    fair.defineBet(leaf, d + 1, half, half);
    path += d % 2 ? '1' : '0';
  }
  CHECK(capital_report(fair).maxCapital.back() == 1);
  CHECK(check_savings_lowerbound(fair));

  BettingStrategy losing = define_bet(BettingStrategy(), "", 1, rat(1, 4), rat(3, 4));
  CHECK(check_savings_lowerbound(losing));

  Rng rng(13);
  for (int t = 0; t < 1000; ++t) {
    BettingStrategy B = random_strategy(rng, static_cast<int>(rng.below(40)));
    CHECK(check_savings_lowerbound(B));
  }
}

TEST_CASE("savings preserves the tree and its bet positions") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    BettingStrategy B = random_strategy(rng, static_cast<int>(rng.below(25)));
    BettingStrategy Bp = with_savings(B);
    REQUIRE(Bp.nodeCount() == B.nodeCount());
    for (int i = 0; i < B.nodeCount(); ++i) {
      int j = Bp.nodeAt(B.pathOf(i));
      REQUIRE(j >= 0);
      CHECK(Bp.restrictionOf(j) == B.restrictionOf(i));
      if (!B.isLeaf(i)) CHECK(Bp.node(j).betPos == B.node(i).betPos);
    }
    // max capital stays within 2 of the current capital (conservative, sharp form)
    CapitalReport rep = capital_report(Bp);
    for (int i = 0; i < Bp.nodeCount(); ++i)
      CHECK(rep.maxCapital[static_cast<std::size_t>(i)] <
            rep.capital[static_cast<std::size_t>(i)] + 2);
  }
}

TEST_CASE("strategy JSON dump round-trips") {
  Rng rng(27);
  for (int t = 0; t < 40; ++t) {
    BettingStrategy B = random_strategy(rng, static_cast<int>(rng.below(20)));
    Json dump = strategy_to_json(B);
    BettingStrategy back = strategy_from_json(dump);
    CHECK(strategy_to_json(back) == dump);
  }
  CHECK_THROWS_AS(strategy_from_json(Json{{"nodes", Json::array()}}), ParseError);
}

TEST_CASE("extension check") {
  BettingStrategy B = define_bet(BettingStrategy(), "", 2, rat(1, 2), rat(1, 2));
  BettingStrategy Bmore = define_bet(B, "0", 7, rat(1, 2), Rational(0));
  CHECK(is_extension_of(Bmore, B));
  CHECK(!is_extension_of(B, Bmore));
  BettingStrategy other = define_bet(BettingStrategy(), "", 2, rat(1, 4), rat(3, 4));
  CHECK(!is_extension_of(Bmore, other));
}

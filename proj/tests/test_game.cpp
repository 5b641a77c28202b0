#include <doctest.h>

#include "betgame/errors.hpp"
#include "betgame/gamblers.hpp"
#include "betgame/game.hpp"
#include "betgame/verify.hpp"

using namespace betgame;

TEST_CASE("goal detection") {
  std::vector<Rational> H = {Rational(2), Rational(2)};
  StrategyFamily F(2);
  ModuloSet C{interval(1, 6), 2, 0};
  CHECK(!goal_achieved(C, F, H)); // initial capitals are 1 everywhere

  // a strategy exceeding h = 1 on the whole class Mod({1},2,0) = {1 -> 0}
  StrategyFamily G(1);
  G.at(1) = define_bet(G.at(1), "", 1, rat(3, 4), rat(1, 4));
  ModuloSet C1{interval(1, 1), 2, 0};
  CHECK(goal_achieved(C1, G, {Rational(1)}));
  CHECK(!goal_achieved(C1, G, {rat(3, 2)}));
}

TEST_CASE("surviving subset measures") {
  std::vector<Rational> H = {Rational(1)};
  ModuloSet C{interval(1, 2), 2, 0}; // cells 00 and 11, measure 1/2

  StrategyFamily initial(1);
  SurvivingSubset whole = surviving_subset(C, initial, {Rational(2)});
  CHECK(whole.measure == measure_modulo(C));

  // capital 3/2 > 1 exactly on {1 -> 0}: half of C survives
  StrategyFamily G(1);
  G.at(1) = define_bet(G.at(1), "", 1, rat(3, 4), rat(1, 4));
  SurvivingSubset half = surviving_subset(C, G, H);
  CHECK(half.measure == measure_modulo(C) / 2);
  // witness evaluates to the same measure
  CHECK(measure_expr(half.witness) == half.measure);
}

TEST_CASE("null gambler loses the first goal and the chooser wins") {
  ChooserParams params = desk_params_calm();
  NullGambler g;
  GameOptions opt;
  opt.horizon = 50;
  opt.gamblerName = "null";
  GameTranscript tr = run_game(params, g, opt);
  CHECK(tr.turns.size() == 2); // quiesces right after the single emission
  CHECK(tr.emissions.size() == 1);
  CHECK(tr.verdict.winner == Verdict::Winner::Chooser);
  CHECK(tr.verdict.goalsAchieved == std::vector<bool>{false});
  CHECK(tr.verdict.survivingSubsetMeasure == tr.emissions[0].chosenMeasure);
  CHECK(tr.allRequiredChecksPassed);
}

TEST_CASE("transcripts replay to identical metrics") {
  ChooserParams params = desk_params_active();
  auto g = make_gambler("random", 3, params);
  GameOptions opt;
  opt.horizon = 400;
  opt.gamblerName = "random";
  opt.seed = 3;
  GameTranscript tr = run_game(params, *g, opt);
  Json dumped = tr.to_json();
  GameTranscript again = replay(dumped);
  CHECK(again.to_json() == dumped);
}

TEST_CASE("identical seeds give byte-identical transcripts") {
  ChooserParams params = desk_params_active();
  GameOptions opt;
  opt.horizon = 300;
  opt.gamblerName = "random";
  opt.seed = 99;
  auto g1 = make_gambler("random", 99, params);
  auto g2 = make_gambler("random", 99, params);
  std::string a = run_game(params, *g1, opt).to_json().dump();
  std::string b = run_game(params, *g2, opt).to_json().dump();
  CHECK(a == b);
}

TEST_CASE("savings wrapper keeps the official strategies conservative") {
  ChooserParams params = desk_params_active();
  auto g = make_gambler("savings:random", 17, params);
  GameOptions opt;
  opt.horizon = 500;
  opt.gamblerName = "savings:random";
  opt.seed = 17;
  opt.enforceConservative = true; // any non-conservative bet would abort the run
  GameTranscript tr = run_game(params, *g, opt);
  for (int i = 1; i <= params.n; ++i) CHECK(check_conservative(tr.finalStrategies.at(i)));

  // the emitted strategies equal the savings transform of the inner ones
  auto* wrapper = dynamic_cast<SavingsWrapper*>(g.get());
  REQUIRE(wrapper);
  for (int i = 1; i <= params.n; ++i) {
    BettingStrategy expected = with_savings(wrapper->originalStrategies().at(i));
    const BettingStrategy& got = tr.finalStrategies.at(i);
    REQUIRE(expected.nodeCount() == got.nodeCount());
    for (int idx = 0; idx < got.nodeCount(); ++idx) {
      int e = expected.nodeAt(got.pathOf(idx));
      REQUIRE(e >= 0);
      CHECK(expected.node(e).mass == got.node(idx).mass);
    }
  }
}

TEST_CASE("conservative enforcement rejects a doubling gambler") {
  ChooserParams params = desk_params_calm();
  GreedyDoubler g;
  GameOptions opt;
  opt.horizon = 100;
  opt.gamblerName = "greedy-doubler";
  opt.enforceConservative = true;
  // the third all-in bet would drop the losing branch to 0 < maxCapital - 2
  CHECK_THROWS_WITH_AS(run_game(params, g, opt), doctest::Contains("non-conservative"), Error);
}

TEST_CASE("gambler actions and verdicts serialize") {
  GamblerAction bet = GamblerAction::bet(2, "01", 44, rat(1, 4), rat(1, 8));
  CHECK(GamblerAction::from_json(bet.to_json()).to_json() == bet.to_json());
  GamblerAction pass = GamblerAction::noBet();
  CHECK(GamblerAction::from_json(pass.to_json()).to_json() == pass.to_json());
  CHECK_THROWS_AS(make_gambler("no-such-gambler", 0, desk_params_calm()), ParseError);
}

TEST_CASE("malformed gambler bets propagate as bet errors") {
  ChooserParams params = desk_params_calm();
  std::vector<GamblerAction> script = {
      GamblerAction::bet(1, "0101", 3, rat(1, 2), rat(1, 2))}; // unknown outcome string
  ScriptedGambler g("scripted", script);
  GameOptions opt;
  opt.horizon = 10;
  opt.gamblerName = "scripted";
  CHECK_THROWS_AS(run_game(params, g, opt), BetError);

  std::vector<GamblerAction> badIndex = {GamblerAction::bet(7, "", 3, rat(1, 2), rat(1, 2))};
  ScriptedGambler g2("scripted", badIndex);
  CHECK_THROWS_AS(run_game(params, g2, opt), Error);
}

TEST_CASE("goal is vacuously achieved on an empty modulo class") {
  // remainder 3 is unreachable with two positions: the class has measure zero
  ModuloSet empty{interval(1, 2), 4, 3};
  CHECK(measure_modulo(empty) == 0);
  StrategyFamily F(1);
  CHECK(goal_achieved(empty, F, {Rational(2)}));
}

TEST_CASE("a systematic slimmer forces further chosen sets with passing checks") {
  ChooserParams params = desk_params_active();
  ParityChaser g;
  GameOptions opt;
  opt.horizon = 10000;
  opt.gamblerName = "parity-chaser";
  GameTranscript tr = run_game(params, g, opt);
  CHECK(tr.emissions.size() >= 2);
  CHECK(tr.allRequiredChecksPassed);
  bool sawKlEta = false;
  for (const auto& e : tr.emissions)
    if (e.klEta) {
      sawKlEta = true;
      CHECK(e.klEta->allChecksHold());
    }
  CHECK(sawKlEta);
  // chosen-measure running total never decreases
  Rational prev = 0;
  for (const auto& t : tr.turns) {
    CHECK(t.chosenMeasureTotal >= prev);
    prev = t.chosenMeasureTotal;
  }
}

TEST_CASE("greedy doubler exceeds its bound only on a thin cell") {
  ChooserParams params = desk_params_calm();
  GreedyDoubler g;
  GameOptions opt;
  opt.horizon = 100;
  opt.gamblerName = "greedy-doubler";
  GameTranscript tr = run_game(params, g, opt);
  CHECK(tr.verdict.winner == Verdict::Winner::Chooser);
  CHECK(!tr.verdict.goalsAchieved[0]);
  // capital 2^d on one cell: the surviving subset loses at most 2^-10 + 2^-11
  Rational lost = tr.emissions[0].chosenMeasure - tr.verdict.survivingSubsetMeasure;
  CHECK(lost <= pow2(-10) + pow2(-11));
  CHECK(tr.verdict.survivingSubsetMeasure > tr.verdict.residueThreshold);
}

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "betgame/chooser.hpp"

namespace betgame {

struct GamblerAction {
  bool isBet = false;
  int strategyIndex = 0; // 1-based
  std::string leafPath;
  Position position = 0;
  Rational mass0, mass1;

  static GamblerAction noBet() { return {}; }
  static GamblerAction bet(int strategy, std::string path, Position p, Rational m0, Rational m1);

  Json to_json() const;
  static GamblerAction from_json(const Json& j);
};

struct GameView {
  int turn;
  const std::optional<ModuloSet>& chosenThisTurn;
  const std::vector<ModuloSet>& chosenSoFar;
  const PositionSet& currentI;
  long currentO;
  const ChooserParams& params;
  const StrategyFamily& strategies;
};

class Gambler {
 public:
  virtual ~Gambler() = default;
  virtual std::string name() const = 0;
  virtual GamblerAction act(const GameView& view) = 0;
  // True when the gambler will never bet again; lets quiet games end early.
  virtual bool finished() const { return false; }
};

struct Verdict {
  enum class Winner { Chooser, Gambler, UndecidedAtHorizon };
  Winner winner = Winner::UndecidedAtHorizon;
  Rational survivingSubsetMeasure;  // of the last chosen set
  Rational residueThreshold;        // sum over i > n of 1/h_i
  bool capitalBoundsOk = true;      // surviving points stay below every h_i
  std::vector<bool> goalsAchieved;  // per chosen set, with the final strategies
  bool residueImplicationOk = true; // surviving(last) > threshold => union keeps a surviving point
  Json to_json() const;
};
const char* to_string(Verdict::Winner w);

struct TurnRecord {
  int turn = 0;
  std::optional<ModuloSet> chosen;
  GamblerAction action;
  Rational slimmedSumSize;
  Rational earnOnCurrentM;
  Rational chosenMeasureTotal; // running sum of chosen-set measures
  Json to_json() const;
};

struct GameOptions {
  int horizon = 10000;
  bool enforceConservative = false;
  std::string gamblerName; // recorded in the config block
  std::uint64_t seed = 0;
};

struct GameTranscript {
  Json config;
  std::vector<TurnRecord> turns;
  std::vector<EmissionReport> emissions;
  Verdict verdict;
  StrategyFamily finalStrategies;
  bool allRequiredChecksPassed = true;
  std::vector<std::string> failures;

  Json to_json() const;
  std::string to_csv() const;
};

GameTranscript run_game(const ChooserParams& params, Gambler& gambler, const GameOptions& options);

// True iff on every sequence of C some strategy's path capital exceeds its
// bound; decided exactly through measures, never by sampling.
bool goal_achieved(const ModuloSet& C, const StrategyFamily& F, const std::vector<Rational>& H);

struct SurvivingSubset {
  Rational measure;
  ExprPtr witness;
};
// Exact measure (and a clopen witness) of the sequences of C on which every
// strategy keeps its maximal achieved capital at or below its bound.
SurvivingSubset surviving_subset(const ModuloSet& C, const StrategyFamily& F,
                                 const std::vector<Rational>& H);

// Re-runs the recorded actions and verifies all metrics reproduce exactly.
GameTranscript replay(const Json& transcriptJson);

} // namespace betgame

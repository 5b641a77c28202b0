#pragma once

#include <deque>
#include <memory>

#include "betgame/game.hpp"
#include "betgame/rng.hpp"

namespace betgame {

// Never bets.
class NullGambler : public Gambler {
 public:
  std::string name() const override { return "null"; }
  GamblerAction act(const GameView&) override { return GamblerAction::noBet(); }
  bool finished() const override { return true; }
};

// Monotone all-in bets on positions 1, 2, 3, ... guessing 0; stops once the
// winning path's capital clears four times the largest bound.
class GreedyDoubler : public Gambler {
 public:
  std::string name() const override { return "greedy-doubler"; }
  GamblerAction act(const GameView& view) override;
  bool finished() const override { return done_; }

 private:
  std::string path_;
  Position nextPos_ = 1;
  bool done_ = false;
};

// Zero-wager reader that systematically restricts positions of the current I,
// breadth-first across all strategies, thinning leaves toward slimness.
class ParityChaser : public Gambler {
 public:
  std::string name() const override { return "parity-chaser"; }
  GamblerAction act(const GameView& view) override;
  bool finished() const override { return done_; }

 private:
  struct Pending {
    int strategy = 0; // 1-based; 0 = none
    int leafIdx = -1;
  };
  std::vector<std::deque<int>> queues_; // node indices per strategy
  Pending pending_;
  int roundRobin_ = 0;
  bool started_ = false;
  bool done_ = false;
};

// Seeded random bets: random strategy, random leaf, position usually inside
// the current I, dyadic wagered fractions.
class RandomGambler : public Gambler {
 public:
  explicit RandomGambler(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  GamblerAction act(const GameView& view) override;

 private:
  Rng rng_;
};

// Applies the savings transformation bet by bet to an inner gambler: the inner
// gambler plays against its own untransformed strategies while the emitted
// bets carry the banked masses, so the official strategies stay conservative.
class SavingsWrapper : public Gambler {
 public:
  SavingsWrapper(std::unique_ptr<Gambler> inner, const ChooserParams& params);
  std::string name() const override { return "savings:" + inner_->name(); }
  GamblerAction act(const GameView& view) override;
  bool finished() const override { return inner_->finished(); }

  const StrategyFamily& originalStrategies() const { return originals_; }

 private:
  std::unique_ptr<Gambler> inner_;
  StrategyFamily originals_;
  std::vector<std::vector<Rational>> play_, bank_;
};

// Feeds back a recorded action sequence (transcript replay).
class ScriptedGambler : public Gambler {
 public:
  ScriptedGambler(std::string name, std::vector<GamblerAction> actions)
      : name_(std::move(name)), actions_(std::move(actions)) {}
  std::string name() const override { return name_; }
  GamblerAction act(const GameView&) override {
    if (next_ >= actions_.size()) return GamblerAction::noBet();
    return actions_[next_++];
  }
  bool finished() const override { return next_ >= actions_.size(); }

 private:
  std::string name_;
  std::vector<GamblerAction> actions_;
  std::size_t next_ = 0;
};

// Names: null, greedy-doubler, parity-chaser, random, savings:<inner>.
std::unique_ptr<Gambler> make_gambler(const std::string& name, std::uint64_t seed,
                                      const ChooserParams& params);
std::vector<std::string> packaged_gambler_names();

} // namespace betgame

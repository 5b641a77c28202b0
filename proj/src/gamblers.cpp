#include "betgame/gamblers.hpp"

#include <algorithm>

#include "betgame/errors.hpp"

namespace betgame {

GamblerAction GreedyDoubler::act(const GameView& view) {
  if (done_) return GamblerAction::noBet();
  const BettingStrategy& B = view.strategies.at(1);
  int leaf = B.nodeAt(path_);
  if (leaf < 0) throw InvariantViolation("greedy-doubler lost its path");
  Rational target = 4 * view.params.hBound(view.params.n);
  if (B.capital(leaf) > target) {
    done_ = true;
    return GamblerAction::noBet();
  }
  Rational mass = B.node(leaf).mass;
  GamblerAction a = GamblerAction::bet(1, path_, nextPos_, mass, Rational(0));
  path_ += '0';
  ++nextPos_;
  return a;
}

GamblerAction ParityChaser::act(const GameView& view) {
  int n = view.params.n;
  if (!started_) {
    started_ = true;
    queues_.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) queues_[static_cast<std::size_t>(i)].push_back(0);
  }
  if (pending_.strategy != 0) {
    const BettingStrategy& B = view.strategies.at(pending_.strategy);
    const auto& node = B.node(pending_.leafIdx);
    auto& q = queues_[static_cast<std::size_t>(pending_.strategy - 1)];
    q.push_back(node.child[0]);
    q.push_back(node.child[1]);
    pending_ = {};
  }
  if (done_) return GamblerAction::noBet();
  for (int attempt = 0; attempt < n; ++attempt) {
    int strat = (roundRobin_ + attempt) % n + 1;
    auto& q = queues_[static_cast<std::size_t>(strat - 1)];
    while (!q.empty()) {
      int leaf = q.front();
      const BettingStrategy& B = view.strategies.at(strat);
      // First position of the current I not yet restricted on this path.
      Position p = 0;
      for (Position candidate : view.currentI) {
        if (!B.pathAssignment(leaf, candidate)) {
          p = candidate;
          break;
        }
      }
      if (p == 0) {
        q.pop_front(); // leaf restricts the entire current I
        continue;
      }
      q.pop_front();
      Rational half = B.node(leaf).mass / 2;
      pending_ = {strat, leaf};
      roundRobin_ = strat % n;
      return GamblerAction::bet(strat, B.pathOf(leaf), p, half, half);
    }
  }
  done_ = true;
  return GamblerAction::noBet();
}

GamblerAction RandomGambler::act(const GameView& view) {
  if (rng_.chance(1, 10)) return GamblerAction::noBet();
  int strat = static_cast<int>(rng_.range(1, view.params.n));
  const BettingStrategy& B = view.strategies.at(strat);
  int idx = 0;
  while (!B.isLeaf(idx)) idx = B.node(idx).child[rng_.below(2)];

  Position p = 0;
  if (rng_.chance(7, 10)) {
    for (Position candidate : view.currentI) {
      if (!B.pathAssignment(idx, candidate)) {
        p = candidate;
        break;
      }
    }
  }
  if (p == 0) {
    Position ell = view.currentI.empty() ? 1 : view.currentI.back();
    Position candidate = ell + 1 + static_cast<Position>(rng_.below(64));
    while (B.pathAssignment(idx, candidate)) ++candidate;
    p = candidate;
  }

  Rational mass = B.node(idx).mass;
  Rational f = rat(rng_.range(0, 16), 16);
  Rational hi = mass * (Rational(1) + f) / 2;
  Rational lo = mass - hi;
  bool guessOne = rng_.below(2) == 1;
  return GamblerAction::bet(strat, B.pathOf(idx), p, guessOne ? lo : hi, guessOne ? hi : lo);
}

SavingsWrapper::SavingsWrapper(std::unique_ptr<Gambler> inner, const ChooserParams& params)
    : inner_(std::move(inner)), originals_(params.n) {
  play_.assign(static_cast<std::size_t>(params.n), {Rational(1)});
  bank_.assign(static_cast<std::size_t>(params.n), {Rational(0)});
}

GamblerAction SavingsWrapper::act(const GameView& view) {
  GameView innerView{view.turn,   view.chosenThisTurn, view.chosenSoFar, view.currentI,
                     view.currentO, view.params,         originals_};
  GamblerAction action = inner_->act(innerView);
  if (!action.isBet) return action;

  BettingStrategy& B = originals_.at(action.strategyIndex);
  int leaf = B.nodeAt(action.leafPath);
  if (leaf < 0)
    throw BetError(BetError::Reason::UnknownNode,
                   "savings wrapper: unknown outcome string " + action.leafPath);
  Rational cs = B.capital(leaf);
  int depth = B.node(leaf).depth;
  Rational c0 = action.mass0 * pow2(depth + 1);
  Rational c1 = action.mass1 * pow2(depth + 1);
  Rational f = 0;
  int guessed = 0;
  if (cs != 0) {
    guessed = c1 > c0 ? 1 : 0;
    f = ((guessed ? c1 : c0) - cs) / cs;
  }

  auto& play = play_[static_cast<std::size_t>(action.strategyIndex - 1)];
  auto& bank = bank_[static_cast<std::size_t>(action.strategyIndex - 1)];
  int base = B.defineBet(leaf, action.position, action.mass0, action.mass1);
  play.resize(static_cast<std::size_t>(B.nodeCount()));
  bank.resize(static_cast<std::size_t>(B.nodeCount()));
  std::size_t lf = static_cast<std::size_t>(leaf);
  std::size_t gi = static_cast<std::size_t>(base + guessed);
  std::size_t oi = static_cast<std::size_t>(base + (1 - guessed));
  Rational grown = (Rational(1) + f) * play[lf];
  if (grown >= 2) {
    play[gi] = grown / 2;
    bank[gi] = bank[lf] + grown / 2;
  } else {
    play[gi] = grown;
    bank[gi] = bank[lf];
  }
  play[oi] = (Rational(1) - f) * play[lf];
  bank[oi] = bank[lf];

  Rational weight = pow2(-(depth + 1));
  Rational m0 = (play[static_cast<std::size_t>(base)] + bank[static_cast<std::size_t>(base)]) * weight;
  Rational m1 =
      (play[static_cast<std::size_t>(base + 1)] + bank[static_cast<std::size_t>(base + 1)]) * weight;
  return GamblerAction::bet(action.strategyIndex, action.leafPath, action.position, m0, m1);
}

std::unique_ptr<Gambler> make_gambler(const std::string& name, std::uint64_t seed,
                                      const ChooserParams& params) {
  const std::string savingsPrefix = "savings:";
  if (name.rfind(savingsPrefix, 0) == 0) {
    auto inner = make_gambler(name.substr(savingsPrefix.size()), seed, params);
    return std::make_unique<SavingsWrapper>(std::move(inner), params);
  }
  if (name == "null") return std::make_unique<NullGambler>();
  if (name == "greedy-doubler") return std::make_unique<GreedyDoubler>();
  if (name == "parity-chaser") return std::make_unique<ParityChaser>();
  if (name == "random") return std::make_unique<RandomGambler>(seed);
  throw ParseError("unknown gambler: " + name);
}

std::vector<std::string> packaged_gambler_names() {
  return {"null", "greedy-doubler", "parity-chaser", "random", "savings:random",
          "savings:greedy-doubler"};
}

} // namespace betgame

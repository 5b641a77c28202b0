#include "betgame/game.hpp"

#include <algorithm>
#include <sstream>

#include "betgame/errors.hpp"
#include "betgame/gamblers.hpp"

namespace betgame {

GamblerAction GamblerAction::bet(int strategy, std::string path, Position p, Rational m0,
                                 Rational m1) {
  GamblerAction a;
  a.isBet = true;
  a.strategyIndex = strategy;
  a.leafPath = std::move(path);
  a.position = p;
  a.mass0 = std::move(m0);
  a.mass1 = std::move(m1);
  return a;
}

Json GamblerAction::to_json() const {
  Json j;
  if (!isBet) {
    j["type"] = "no-bet";
    return j;
  }
  j["type"] = "bet";
  j["strategy"] = strategyIndex;
  j["leaf"] = leafPath;
  j["position"] = position;
  j["mass0"] = rational_to_json(mass0);
  j["mass1"] = rational_to_json(mass1);
  return j;
}

GamblerAction GamblerAction::from_json(const Json& j) {
  if (j.at("type").get<std::string>() == "no-bet") return noBet();
  return bet(j.at("strategy").get<int>(), j.at("leaf").get<std::string>(),
             j.at("position").get<Position>(), rational_from_json(j.at("mass0")),
             rational_from_json(j.at("mass1")));
}

const char* to_string(Verdict::Winner w) {
  switch (w) {
    case Verdict::Winner::Chooser: return "chooser";
    case Verdict::Winner::Gambler: return "gambler";
    case Verdict::Winner::UndecidedAtHorizon: return "undecided-at-horizon";
  }
  return "?";
}

Json Verdict::to_json() const {
  Json j;
  j["winner"] = to_string(winner);
  j["surviving_subset_measure"] = rational_to_json(survivingSubsetMeasure);
  j["residue_threshold"] = rational_to_json(residueThreshold);
  j["capital_bounds_ok"] = capitalBoundsOk;
  j["goals_achieved"] = goalsAchieved;
  j["residue_implication_ok"] = residueImplicationOk;
  return j;
}

Json TurnRecord::to_json() const {
  Json j;
  j["turn"] = turn;
  j["chosen"] = chosen ? chosen->to_json() : Json(nullptr);
  j["action"] = action.to_json();
  Json m;
  m["slimmed_sum_size"] = rational_to_json(slimmedSumSize);
  m["earn_on_current_m"] = rational_to_json(earnOnCurrentM);
  m["chosen_measure_total"] = rational_to_json(chosenMeasureTotal);
  j["metrics"] = std::move(m);
  return j;
}

Json GameTranscript::to_json() const {
  Json j;
  j["schema"] = 1;
  j["config"] = config;
  Json ts = Json::array();
  for (const auto& t : turns) ts.push_back(t.to_json());
  j["turns"] = std::move(ts);
  Json es = Json::array();
  for (const auto& e : emissions) es.push_back(e.to_json());
  j["emissions"] = std::move(es);
  j["verdict"] = verdict.to_json();
  j["all_required_checks_passed"] = allRequiredChecksPassed;
  j["failures"] = failures;
  return j;
}

std::string GameTranscript::to_csv() const {
  std::ostringstream out;
  out << "turn,chosen,slimmed_sum_size,earn_on_current_m,chosen_measure_total\n";
  for (const auto& t : turns) {
    out << t.turn << ',';
    if (t.chosen)
      out << "Mod(|I|=" << t.chosen->I.size() << ";m=" << t.chosen->m << ";o=" << t.chosen->o
          << ')';
    out << ',' << to_string(t.slimmedSumSize) << ',' << to_string(t.earnOnCurrentM) << ','
        << to_string(t.chosenMeasureTotal) << '\n';
  }
  return out.str();
}

namespace {

// Cells of minimal tree nodes whose capital exceeds the bound: any sequence
// whose path meets such a node has maximal achieved capital above it.
std::vector<Restriction> exceed_cells(const BettingStrategy& B, const Rational& bound) {
  std::vector<Restriction> cells;
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    int idx = stack.back();
    stack.pop_back();
    if (B.capital(idx) > bound) {
      cells.push_back(B.restrictionOf(idx));
      continue;
    }
    if (!B.isLeaf(idx)) {
      stack.push_back(B.node(idx).child[0]);
      stack.push_back(B.node(idx).child[1]);
    }
  }
  return cells;
}

std::vector<std::vector<Restriction>> exceed_groups(const StrategyFamily& F,
                                                    const std::vector<Rational>& H) {
  if (static_cast<int>(H.size()) < F.size())
    throw PreconditionError("capital bound list shorter than the family");
  std::vector<std::vector<Restriction>> groups;
  for (int i = 1; i <= F.size(); ++i)
    groups.push_back(exceed_cells(F.at(i), H[static_cast<std::size_t>(i - 1)]));
  return groups;
}

} // namespace

bool goal_achieved(const ModuloSet& C, const StrategyFamily& F, const std::vector<Rational>& H) {
  Rational lambdaC = measure_modulo(C);
  if (lambdaC == 0) return true;
  Rational covered = measure_cells_union_in(exceed_groups(F, H), C);
  return covered == lambdaC;
}

SurvivingSubset surviving_subset(const ModuloSet& C, const StrategyFamily& F,
                                 const std::vector<Rational>& H) {
  auto groups = exceed_groups(F, H);
  SurvivingSubset out;
  out.measure = measure_modulo(C) - measure_cells_union_in(groups, C);
  ExprPtr e = expr_modulo(C);
  for (const auto& g : groups)
    for (const auto& cell : g) e = expr_diff(e, expr_cell(cell));
  out.witness = e;
  return out;
}

GameTranscript run_game(const ChooserParams& params, Gambler& gambler,
                        const GameOptions& options) {
  params.validate();
  if (options.horizon < 1) throw PreconditionError("horizon must be at least 1");

  GameTranscript tr;
  tr.config["params"] = params.to_json();
  tr.config["gambler"] = options.gamblerName.empty() ? gambler.name() : options.gamblerName;
  tr.config["seed"] = options.seed;
  tr.config["horizon"] = options.horizon;
  tr.config["enforce_conservative"] = options.enforceConservative;
  tr.config["diagnostics"] = diagnose_params(params).to_json();

  StrategyFamily F(params.n);
  ChooserState chooser(params);
  // Running per-node maximum capital, for conservative enforcement.
  std::vector<std::vector<Rational>> maxCap(static_cast<std::size_t>(params.n),
                                            std::vector<Rational>{Rational(1)});

  Rational chosenTotal = 0;
  for (int turn = 1; turn <= options.horizon; ++turn) {
    EmissionReport rep;
    std::optional<ModuloSet> chosenNow = chooser.decide(F, &rep);
    if (chosenNow) {
      chosenTotal += rep.chosenMeasure;
      if (!rep.requiredOk()) {
        tr.allRequiredChecksPassed = false;
        tr.failures.push_back("emission " + std::to_string(rep.emissionIndex) +
                              " failed a required property check");
      }
      tr.emissions.push_back(rep);
    }

    GameView view{turn,          chosenNow, chooser.chosenSets(), chooser.currentI(),
                  chooser.currentO(), params,    F};
    GamblerAction action = gambler.act(view);

    if (action.isBet) {
      if (action.strategyIndex < 1 || action.strategyIndex > params.n)
        throw Error("gambler bet on strategy " + std::to_string(action.strategyIndex) +
                    " outside [1, n]");
      BettingStrategy& B = F.at(action.strategyIndex);
      int leafIdx = B.nodeAt(action.leafPath);
      if (leafIdx < 0)
        throw BetError(BetError::Reason::UnknownNode,
                       "gambler bet on unknown outcome string: " + action.leafPath);
      auto& mc = maxCap[static_cast<std::size_t>(action.strategyIndex - 1)];
      if (options.enforceConservative) {
        Rational c0 = action.mass0 * pow2(B.node(leafIdx).depth + 1);
        Rational c1 = action.mass1 * pow2(B.node(leafIdx).depth + 1);
        if (std::min(c0, c1) < mc[static_cast<std::size_t>(leafIdx)] - 2)
          throw Error("bet rejected: it would make strategy " +
                      std::to_string(action.strategyIndex) + " non-conservative");
      }
      int base = B.defineBet(leafIdx, action.position, action.mass0, action.mass1);
      mc.resize(static_cast<std::size_t>(B.nodeCount()));
      for (int child = base; child <= base + 1; ++child)
        mc[static_cast<std::size_t>(child)] =
            std::max(mc[static_cast<std::size_t>(leafIdx)], B.capital(child));
    }

    chooser.sync(F);

    TurnRecord record;
    record.turn = turn;
    record.chosen = chosenNow;
    record.action = action;
    record.slimmedSumSize = chooser.slimmedSumSize();
    record.earnOnCurrentM = chooser.earnOnCurrentM();
    record.chosenMeasureTotal = chosenTotal;
    tr.turns.push_back(std::move(record));

    if (!chosenNow && !action.isBet && gambler.finished()) break;
  }

  // Adjudication with the final strategies.
  std::vector<Rational> H = params.hBounds();
  const auto& sets = chooser.chosenSets();
  Verdict v;
  v.residueThreshold = params.residueThreshold();
  bool allGoals = true;
  for (const auto& C : sets) {
    bool achieved = goal_achieved(C, F, H);
    v.goalsAchieved.push_back(achieved);
    allGoals = allGoals && achieved;
  }
  SurvivingSubset last = surviving_subset(sets.back(), F, H);
  v.survivingSubsetMeasure = last.measure;
  v.capitalBoundsOk = true;
  if (allGoals) {
    v.winner = Verdict::Winner::Gambler;
  } else if (last.measure > v.residueThreshold) {
    v.winner = Verdict::Winner::Chooser;
  } else {
    v.winner = Verdict::Winner::UndecidedAtHorizon;
  }
  // Winning-with-residue implication: some recorded set keeps a surviving
  // point, so the whole chosen union does.
  if (last.measure > v.residueThreshold) {
    Rational best = 0;
    for (const auto& C : sets) best = std::max(best, surviving_subset(C, F, H).measure);
    v.residueImplicationOk = best > 0;
    if (!v.residueImplicationOk) {
      tr.allRequiredChecksPassed = false;
      tr.failures.push_back("winning-with-residue implication failed");
    }
  }
  tr.verdict = std::move(v);
  tr.finalStrategies = F;

  if (static_cast<int>(sets.size()) > 8 * params.n + 1) {
    tr.allRequiredChecksPassed = false;
    tr.failures.push_back("more than 8n+1 sets chosen");
  }
  return tr;
}

GameTranscript replay(const Json& transcriptJson) {
  const Json& config = transcriptJson.at("config");
  ChooserParams params = ChooserParams::from_json(config.at("params"));
  GameOptions options;
  options.horizon = config.at("horizon").get<int>();
  options.enforceConservative = config.at("enforce_conservative").get<bool>();
  options.gamblerName = config.at("gambler").get<std::string>();
  options.seed = config.at("seed").get<std::uint64_t>();

  std::vector<GamblerAction> actions;
  for (const auto& t : transcriptJson.at("turns"))
    actions.push_back(GamblerAction::from_json(t.at("action")));
  ScriptedGambler scripted(options.gamblerName, actions);
  GameTranscript again = run_game(params, scripted, options);

  if (again.turns.size() != transcriptJson.at("turns").size())
    throw InvariantViolation("replay produced a different number of turns");
  std::size_t idx = 0;
  for (const auto& t : transcriptJson.at("turns")) {
    const TurnRecord& r = again.turns[idx++];
    if (Json(t.at("metrics")) != Json(r.to_json().at("metrics")))
      throw InvariantViolation("replay metrics diverged at turn " + std::to_string(r.turn));
  }
  return again;
}

} // namespace betgame

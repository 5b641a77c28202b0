#include "betgame/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "betgame/errors.hpp"
#include "betgame/gamblers.hpp"
#include "betgame/game.hpp"
#include "betgame/verify.hpp"

namespace betgame {

namespace {

Json error_json(const std::string& type, const std::string& detail) {
  Json j;
  j["error"]["type"] = type;
  j["error"]["detail"] = detail;
  return j;
}

void write_text(const std::optional<std::string>& path, const std::string& text,
                std::ostream& fallback) {
  if (!path) {
    fallback << text << '\n';
    return;
  }
  std::ofstream f(*path, std::ios::binary);
  if (!f) throw Error("cannot open output file: " + *path);
  f << text << '\n';
}

} // namespace

int cmd_params(int k, std::ostream& out) {
  ChooserParams p = params_from_k(k);
  out << p.to_json().dump(2) << '\n';
  return 0;
}

int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err) {
  ChooserParams params;
  try {
    if (config.k && config.deskParamsPath)
      throw ParseError("give either --k or --desk-params, not both");
    if (config.k) {
      params = params_from_k(*config.k);
    } else if (config.deskParamsPath) {
      std::ifstream f(*config.deskParamsPath);
      if (!f) throw ParseError("cannot read params file: " + *config.deskParamsPath);
      Json j = Json::parse(f);
      params = ChooserParams::from_json(j);
    } else {
      throw ParseError("simulate needs --k or --desk-params");
    }
  } catch (const std::exception& e) {
    err << error_json("usage", e.what()).dump(2) << '\n';
    return 2;
  }

  bool runnable = params.ell.fits_slong_p() && params.ell.get_si() <= config.positionBudget;
  if (config.dryRun) {
    Json j;
    j["params"] = params.to_json();
    j["diagnostics"] = diagnose_params(params).to_json();
    j["runnable_within_budget"] = runnable;
    if (!runnable)
      j["refused"] = "ell exceeds the position budget of " + std::to_string(config.positionBudget) +
                     "; not simulating";
    else
      j["refused"] = "dry run; not simulating";
    out << j.dump(2) << '\n';
    return 0;
  }
  if (!runnable) {
    err << error_json("usage", "ell exceeds the position budget of " +
                                   std::to_string(config.positionBudget) +
                                   "; use --dry-run to inspect these parameters")
               .dump(2)
        << '\n';
    return 2;
  }

  try {
    auto gambler = make_gambler(config.gambler, config.seed, params);
    GameOptions opt;
    opt.horizon = config.horizon;
    opt.enforceConservative = config.enforceConservative;
    opt.gamblerName = config.gambler;
    opt.seed = config.seed;
    GameTranscript tr = run_game(params, *gambler, opt);
    write_text(config.outPath, tr.to_json().dump(2), out);
    if (config.csvPath) write_text(config.csvPath, tr.to_csv(), out);
    if (!tr.allRequiredChecksPassed) {
      std::string detail;
      for (const auto& f : tr.failures) detail += f + "; ";
      err << error_json("invariant", detail).dump(2) << '\n';
      return 1;
    }
    return 0;
  } catch (const ParseError& e) {
    err << error_json("usage", e.what()).dump(2) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << error_json("invariant", e.what()).dump(2) << '\n';
    return 1;
  }
}

int cmd_verify(const VerifyConfig& config, std::ostream& out, std::ostream& err) {
  auto names = suite_names();
  if (std::find(names.begin(), names.end(), config.suite) == names.end()) {
    std::string known;
    for (const auto& n : names) known += n + " ";
    err << error_json("usage", "unknown suite '" + config.suite + "'; known: " + known).dump(2)
        << '\n';
    return 2;
  }
  SuiteReport rep = run_suite(config.suite, config.cases, config.seed, config.threads);
  write_text(config.outPath, rep.to_json().dump(2), out);
  return rep.failed == 0 ? 0 : 1;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Exact-arithmetic simulator and verification suite for the betting game on clopen "
               "sets"};
  app.require_subcommand(1);

  int paramsK = 0;
  CLI::App* params = app.add_subcommand("params", "Derive game parameters from the size parameter");
  params->add_option("--k", paramsK, "size parameter")->required();

  SimulateConfig sim;
  int simK = -1;
  std::string deskPath;
  CLI::App* simulate = app.add_subcommand("simulate", "Run one chooser-vs-gambler game");
  simulate->add_option("--k", simK, "derive parameters from the size parameter");
  simulate->add_option("--desk-params", deskPath, "JSON file with desk-scale parameters");
  simulate->add_option("--gambler", sim.gambler,
                       "null | greedy-doubler | parity-chaser | random | savings:<name>");
  simulate->add_option("--seed", sim.seed, "seed for seeded gamblers");
  simulate->add_option("--horizon", sim.horizon, "turn cutoff");
  std::string outPath, csvPath;
  simulate->add_option("--out", outPath, "transcript JSON path (default: stdout)");
  simulate->add_option("--csv", csvPath, "per-turn metrics CSV path");
  simulate->add_flag("--dry-run", sim.dryRun, "print parameters and refuse to run");
  simulate->add_flag("--enforce-conservative", sim.enforceConservative,
                     "reject bets that make a strategy non-conservative");
  simulate->add_option("--position-budget", sim.positionBudget,
                       "largest ell that may be materialized");

  VerifyConfig ver;
  CLI::App* verify = app.add_subcommand("verify", "Run a property-verification suite");
  verify->add_option("--suite", ver.suite, "suite name")->required();
  verify->add_option("--cases", ver.cases, "number of randomized cases");
  verify->add_option("--seed", ver.seed, "seed");
  verify->add_option("--threads", ver.threads, "worker threads");
  std::string verOut;
  verify->add_option("--out", verOut, "report JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (params->parsed()) return cmd_params(paramsK, std::cout);
  if (simulate->parsed()) {
    if (simK >= 0) sim.k = simK;
    if (!deskPath.empty()) sim.deskParamsPath = deskPath;
    if (!outPath.empty()) sim.outPath = outPath;
    if (!csvPath.empty()) sim.csvPath = csvPath;
    return cmd_simulate(sim, std::cout, std::cerr);
  }
  if (verify->parsed()) {
    if (!verOut.empty()) ver.outPath = verOut;
    return cmd_verify(ver, std::cout, std::cerr);
  }
  return 2;
}

} // namespace betgame

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "betgame/cli.hpp"
#include "betgame/chooser.hpp"
#include "betgame/verify.hpp"

using namespace betgame;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("params command prints the derived values") {
  std::ostringstream out;
  CHECK(cmd_params(0, out) == 0);
  Json j = Json::parse(out.str());
  CHECK(j.at("m") == "256");
  CHECK(j.at("n") == 12);
  CHECK(j.at("h")[0] == "512");
  CHECK(j == params_from_k(0).to_json());
}

TEST_CASE("simulate refuses k-scale parameters unless dry-running") {
  std::ostringstream out, err;
  SimulateConfig cfg;
  cfg.k = 0;
  cfg.dryRun = true;
  CHECK(cmd_simulate(cfg, out, err) == 0);
  Json j = Json::parse(out.str());
  CHECK(j.contains("refused"));
  CHECK(j.at("runnable_within_budget") == false);

  std::ostringstream out2, err2;
  cfg.dryRun = false;
  CHECK(cmd_simulate(cfg, out2, err2) == 2);
  CHECK(Json::parse(err2.str()).at("error").at("type") == "usage");
}

TEST_CASE("simulate usage errors") {
  std::ostringstream out, err;
  SimulateConfig cfg; // neither --k nor --desk-params
  CHECK(cmd_simulate(cfg, out, err) == 2);

  std::ostringstream out2, err2;
  SimulateConfig bad;
  bad.deskParamsPath = temp_path("betgame-no-such-file.json");
  CHECK(cmd_simulate(bad, out2, err2) == 2);
}

TEST_CASE("simulate runs desk configs from files, deterministically") {
  std::string configPath = std::string(BETGAME_CONFIG_DIR) + "/desk-m4-active.json";
  {
    std::ifstream f(configPath);
    REQUIRE(f.good());
    ChooserParams fromFile = ChooserParams::from_json(Json::parse(f));
    CHECK(fromFile.to_json() == desk_params_active().to_json());
  }
  SimulateConfig cfg;
  cfg.deskParamsPath = configPath;
  cfg.gambler = "parity-chaser";
  cfg.seed = 7;
  cfg.horizon = 2000;
  cfg.outPath = temp_path("betgame-cli-a.json");
  cfg.csvPath = temp_path("betgame-cli-a.csv");
  std::ostringstream out, err;
  CHECK(cmd_simulate(cfg, out, err) == 0);

  SimulateConfig cfg2 = cfg;
  cfg2.outPath = temp_path("betgame-cli-b.json");
  cfg2.csvPath = temp_path("betgame-cli-b.csv");
  std::ostringstream out2, err2;
  CHECK(cmd_simulate(cfg2, out2, err2) == 0);

  CHECK(slurp(*cfg.outPath) == slurp(*cfg2.outPath));
  CHECK(slurp(*cfg.csvPath) == slurp(*cfg2.csvPath));
  Json t = Json::parse(slurp(*cfg.outPath));
  CHECK(t.at("schema") == 1);
  CHECK(t.at("config").at("gambler") == "parity-chaser");
  std::string csv = slurp(*cfg.csvPath);
  CHECK(csv.rfind("turn,chosen,", 0) == 0);

  for (const auto& p : {*cfg.outPath, *cfg.csvPath, *cfg2.outPath, *cfg2.csvPath})
    std::remove(p.c_str());
}

TEST_CASE("verify command reports and gates on failures") {
  std::ostringstream out, err;
  VerifyConfig bad;
  bad.suite = "no-such-suite";
  CHECK(cmd_verify(bad, out, err) == 2);

  std::ostringstream out2, err2;
  VerifyConfig ok;
  ok.suite = "savings";
  ok.cases = 25;
  ok.seed = 1;
  CHECK(cmd_verify(ok, out2, err2) == 0);
  Json rep = Json::parse(out2.str());
  CHECK(rep.at("suite") == "savings");
  CHECK(rep.at("failed") == 0);
  CHECK(rep.at("passed") == 25);
}

TEST_CASE("verify results do not depend on the thread count") {
  SuiteReport seq = run_suite("earning", 40, 5, 1);
  SuiteReport par = run_suite("earning", 40, 5, 4);
  CHECK(seq.passed == par.passed);
  CHECK(seq.failed == par.failed);
  CHECK(seq.to_json() == par.to_json());
}

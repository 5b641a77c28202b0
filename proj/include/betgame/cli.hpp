#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace betgame {

// Exit codes: 0 pass, 1 assertion/invariant failure, 2 usage error.
int run_cli(int argc, const char* const* argv);

int cmd_params(int k, std::ostream& out);

struct SimulateConfig {
  std::optional<int> k;
  std::optional<std::string> deskParamsPath;
  std::string gambler = "null";
  std::uint64_t seed = 0;
  int horizon = 10000;
  std::optional<std::string> outPath;
  std::optional<std::string> csvPath;
  bool dryRun = false;
  bool enforceConservative = false;
  long positionBudget = 1'000'000;
};
int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err);

struct VerifyConfig {
  std::string suite;
  long cases = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<std::string> outPath;
};
int cmd_verify(const VerifyConfig& config, std::ostream& out, std::ostream& err);

} // namespace betgame

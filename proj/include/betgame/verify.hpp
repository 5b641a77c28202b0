#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "betgame/chooser.hpp"

namespace betgame {

struct Counterexample {
  long caseIndex = -1;
  std::string description;
};

struct SuiteReport {
  std::string suite;
  long cases = 0;
  std::uint64_t seed = 0;
  long passed = 0;
  long failed = 0;
  std::vector<Counterexample> counterexamples;
  std::vector<std::string> notes;

  Json to_json() const;
};

// Suites: proposition, savings, earning, kl-eta, slim, grow, good-mod,
// chooser-claims. Cases shard across threads; results are independent of the
// thread count.
SuiteReport run_suite(const std::string& name, long cases, std::uint64_t seed, int threads = 1);
std::vector<std::string> suite_names();

// Reference desk-scale parameter sets (m = 4, phi = 16 m^2, n = 2). The calm
// interval keeps leaves chubby for a long time; the active one is barely wider
// than phi so slimming is reachable within a short game.
ChooserParams desk_params_calm();
ChooserParams desk_params_active();

} // namespace betgame

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "betgame/earning.hpp"

namespace betgame {

struct ChooserParams {
  int k = -1; // provenance: >= 0 when derived from the size parameter
  BigInt m = 2;
  BigInt phi = 0;
  BigInt ell = 0;
  int n = 1;
  Rational slimThreshold = rat(3, 8);
  Rational leanThreshold = rat(1, 4); // delta
  Rational c = rat(3, 2);
  Rational earnBound = Rational(3); // = 1/(1 - 1/c)

  Rational hBound(int i) const;          // h_i = 2^{i+8}
  std::vector<Rational> hBounds() const; // h_1..h_n
  Rational residueThreshold() const;     // sum over i > n of 1/h_i = 2^-(n+8)
  Rational xi() const;                   // m / sqrt(phi), rational by validation

  void validate() const;
  Json to_json() const;
  static ChooserParams from_json(const Json& j);
};

ChooserParams params_from_k(int k);

// Which guarantee preconditions the parameters satisfy; desk-scale configs
// fail some of these by design and the per-turn assertions they gate are
// then reported but not required.
struct ParamsDiagnostics {
  struct Entry {
    std::string name;
    bool holds;
    std::string detail;
  };
  std::vector<Entry> entries;
  bool allHold = true;
  Json to_json() const;
};
ParamsDiagnostics diagnose_params(const ChooserParams& params);

// Block construction: partitions I into floor(|I|/ceil(q|I|)) consecutive
// blocks of length ceil(q|I|) and returns one minimizing the multiplicity- and
// measure-weighted unrestricted count. Preconditions: every member of R is
// (I,phi)-slim and 3/|I| <= q <= 1/4.
PositionSet slim_to_restricted(const RestrictionMultiSet& R, std::span<const Position> I,
                               const BigInt& phi, const Rational& q);

struct GrowResult {
  PositionSet I;
  int iterations = 0;
};

// Iterates slim_to_restricted until the (I',phi)-lean sum-size is at most
// delta. x must equal the sum-size of members restricting entire I.
GrowResult grow_restricted(const RestrictionMultiSet& R, std::span<const Position> I,
                           const BigInt& phi, const Rational& delta, const Rational& x);

// Desk-scale variant: runs the same construction with clamped block sizes and
// an iteration cap instead of rejecting when the size precondition fails.
struct GrowOutcome {
  PositionSet I;
  int iterations = 0;
  bool preconditionsHeld = false;
  bool leanBoundReached = false; // lean sum-size <= delta at exit
  std::string preconditionDetail;
};
GrowOutcome grow_restricted_relaxed(const RestrictionMultiSet& R, std::span<const Position> I,
                                    const BigInt& phi, const Rational& delta, const Rational& x);

struct RemainderScan {
  struct Entry {
    long o;
    Rational measure;
    std::optional<Rational> earn;     // absent for zero-measure sets
    std::optional<Rational> thetaCond;
    bool qualifies = false;
  };
  std::vector<Entry> entries;
  std::optional<long> found;    // smallest qualifying remainder
  long fallback = 0;            // deterministic best-effort choice
  Json to_json() const;
};

// Scans o in [0, m): qualifying means earn_F(Mod(I,m,o)) <= 1/(1-1/c) and
// lambda(Theta~ | Mod(I,m,o)) <= c * delta.
RemainderScan scan_remainders(const StrategyFamily& F, const RestrictionMultiSet& Theta,
                              std::span<const Position> I, long m, const Rational& c,
                              const Rational& delta);

// Throws InvariantViolation when no remainder qualifies; under the
// lambda(Theta~) < delta precondition a qualifying one always exists.
long find_good_remainder(const StrategyFamily& F, const RestrictionMultiSet& Theta,
                         std::span<const Position> I, long m, const Rational& c,
                         const Rational& delta);

struct EmissionReport {
  int emissionIndex = 0; // 1-based
  int turn = 0;
  ModuloSet chosen;
  Rational chosenMeasure;
  Rational slimmedTrigger;    // accumulated slimmed-down sum-size at the trigger
  Rational psiSumSize;        // restrict entire new I
  Rational thetaSumSize;      // lean w.r.t. new I (lambda+)
  Rational thetaUnionMeasure; // lambda(Theta~)
  Rational thetaCondM;
  std::optional<Rational> earnOnM;
  std::optional<Rational> chubbyOnlyEarn; // diagnostic
  int shrinkIterations = 0;
  int shrinkExponentTotal = 0;
  bool keptSameI = true;
  bool growPreconditionsHeld = true;
  bool goodModPreconditionHeld = true;
  bool scanFound = true;
  // Properties of earlier emissions feed the guarantees of later ones; once an
  // emission ran with violated preconditions the chain is broken and later
  // property checks are informational only.
  bool chainIntactAtEmission = true;
  bool i1SumHolds = true;   // psi sum >= (index-1)/8
  bool i1SizeHolds = true;  // |I| (phi/delta)^K >= ell and 8 psi >= K
  bool i2Holds = true;      // theta sum-size <= leanThreshold
  bool m1Holds = true;      // theta | M <= c * delta
  bool m2Holds = true;      // earn on M <= earnBound
  bool clMSizeApplicable = false;
  bool clMSizeHolds = true; // xi_approx(lambda(M), 1/m, 1/4) when |I| >= 16 m^2
  std::optional<KlEtaReport> klEta; // vs. the previous emission

  bool required() const; // do I/M property failures count as game failures
  bool requiredOk() const;
  Json to_json() const;
};

// Turn-by-turn chooser. decide() is the chooser move at the start of a turn;
// sync() absorbs the bets made during the turn. Strategies must grow
// append-only between calls (node indices stable).
class ChooserState {
 public:
  explicit ChooserState(const ChooserParams& params);

  std::optional<ModuloSet> decide(const StrategyFamily& F, EmissionReport* report);
  void sync(const StrategyFamily& F);

  int turnCount() const { return turn_; }
  int emissionCount() const { return static_cast<int>(chosen_.size()); }
  const std::vector<ModuloSet>& chosenSets() const { return chosen_; }
  const PositionSet& currentI() const { return I_; }
  long currentO() const { return o_; }
  Rational slimmedSumSize() const { return slimmedSum_; }
  Rational currentMeasure() const { return lambdaM_; }
  // Expected earning of the first-n family on the current modulo set.
  Rational earnOnCurrentM() const;

 private:
  struct NodeInfo {
    long assignedInI = 0;
    long onesInI = 0;
    bool inDelta = false;
  };

  bool chubbyCount(long assigned) const; // |I| - assigned >= phi
  Rational leafModuloCond(int strat, int node) const;
  void rebaseline(const StrategyFamily& F);
  void absorb(const StrategyFamily& F);
  RestrictionMultiSet leafMultiset(const StrategyFamily& F, std::span<const Position> I,
                                   Classification wanted) const;

  ChooserParams params_;
  long mLong_ = 0;
  int turn_ = 0;
  PositionSet I_;
  long o_ = 0;
  Rational lambdaM_;
  Rational slimmedSum_;
  Rational earnNum_; // sum of 2^-i mass(leaf) lambda(M | cell)
  int shrinkExponent_ = 0;
  std::vector<ModuloSet> chosen_;
  std::vector<std::vector<NodeInfo>> info_; // per strategy, per node index
  std::vector<int> seen_;                   // processed node count per strategy
  StrategyFamily snapshot_;                 // family at the last emission
  bool haveSnapshot_ = false;
  bool chainIntact_ = true;
};

} // namespace betgame

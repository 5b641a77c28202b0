#include "betgame/chooser.hpp"

#include <algorithm>
#include <sstream>

#include "betgame/errors.hpp"

namespace betgame {

Rational ChooserParams::hBound(int i) const { return pow2(i + 8); }

std::vector<Rational> ChooserParams::hBounds() const {
  std::vector<Rational> h;
  h.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) h.push_back(hBound(i));
  return h;
}

Rational ChooserParams::residueThreshold() const { return pow2(-(n + 8)); }

Rational ChooserParams::xi() const {
  BigInt ratio = phi / (m * m);
  BigInt root;
  if (!is_perfect_square(ratio, &root) || root == 0)
    throw PreconditionError("phi/m^2 must be a positive perfect square");
  return rat(BigInt(1), root);
}

void ChooserParams::validate() const {
  if (m < 2) throw PreconditionError("m must be at least 2");
  if (phi <= m * m) throw PreconditionError("phi must exceed m^2");
  if (phi % (m * m) != 0 || !is_perfect_square(phi / (m * m)))
    throw PreconditionError("phi/m^2 must be a perfect square");
  if (ell < 1) throw PreconditionError("ell must be positive");
  if (n < 1) throw PreconditionError("n must be at least 1");
  if (!(leanThreshold > 0) || !(leanThreshold < rat(1, 2)))
    throw PreconditionError("lean threshold must lie in (0, 1/2)");
  if (!(slimThreshold > 0)) throw PreconditionError("slim threshold must be positive");
  if (!(c > 1)) throw PreconditionError("c must exceed 1");
  Rational derived = Rational(1) / (Rational(1) - Rational(1) / c);
  if (earnBound != derived)
    throw PreconditionError("earn bound must equal 1/(1-1/c) = " + to_string(derived));
}

Json ChooserParams::to_json() const {
  Json j;
  j["k"] = k >= 0 ? Json(k) : Json(nullptr);
  j["m"] = to_string(m);
  j["n"] = n;
  j["phi"] = to_string(phi);
  j["ell"] = to_string(ell);
  j["slim_threshold"] = rational_to_json(slimThreshold);
  j["lean_threshold"] = rational_to_json(leanThreshold);
  j["c"] = rational_to_json(c);
  j["earn_bound"] = rational_to_json(earnBound);
  Json h = Json::array();
  for (int i = 1; i <= n; ++i) h.push_back(to_string(hBound(i).get_num()));
  j["h"] = std::move(h);
  j["residue_threshold"] = rational_to_json(residueThreshold());
  return j;
}

namespace {
BigInt read_big(const Json& j) {
  if (j.is_string()) return bigint_from_string(j.get<std::string>());
  return BigInt(j.get<long>());
}
} // namespace

ChooserParams ChooserParams::from_json(const Json& j) {
  ChooserParams p;
  if (j.contains("k") && !j.at("k").is_null()) p.k = j.at("k").get<int>();
  p.m = read_big(j.at("m"));
  p.phi = read_big(j.at("phi"));
  p.ell = read_big(j.at("ell"));
  p.n = j.at("n").get<int>();
  if (j.contains("slim_threshold")) p.slimThreshold = rational_from_json(j.at("slim_threshold"));
  if (j.contains("lean_threshold")) p.leanThreshold = rational_from_json(j.at("lean_threshold"));
  if (j.contains("c")) p.c = rational_from_json(j.at("c"));
  if (j.contains("earn_bound")) p.earnBound = rational_from_json(j.at("earn_bound"));
  p.validate();
  return p;
}

ChooserParams params_from_k(int k) {
  if (k < 0) throw PreconditionError("k must be non-negative");
  ChooserParams p;
  p.k = k;
  p.m = ipow(BigInt(2), static_cast<unsigned long>(2 * (k + 4)));
  p.n = 2 * k + 12; // 4 + log2(m)
  p.phi = 16 * p.m * p.m;
  p.ell = ipow(4 * p.phi, static_cast<unsigned long>(8 * p.n + 3));
  p.validate();
  return p;
}

namespace {

// Smallest non-negative integer g with g*deltaPrime + x >= total.
long minimal_g(const Rational& total, const Rational& x, const Rational& deltaPrime) {
  if (x >= total) return 0;
  Rational need = (total - x) / deltaPrime;
  BigInt g;
  mpz_cdiv_q(g.get_mpz_t(), need.get_num().get_mpz_t(), need.get_den().get_mpz_t());
  if (!g.fits_slong_p()) throw PreconditionError("iteration bound g does not fit a machine word");
  return g.get_si();
}

// |I| > (phi/delta)^(g+2), decided exactly; shortcuts astronomically large
// right-hand sides through a power-of-two lower bound.
bool size_precondition(long sizeI, const BigInt& phi, const Rational& delta, long g) {
  unsigned long e = static_cast<unsigned long>(g) + 2;
  if (e > 63) return false; // (phi/delta) > 4, so the bound exceeds 2^126
  BigInt lhs = BigInt(sizeI);
  // sizeI > (phi*den/num)^e  <=>  sizeI * num^e > (phi*den)^e
  BigInt num = delta.get_num(), den = delta.get_den();
  return lhs * ipow(num, e) > ipow(phi * den, e);
}

Rational restricting_sum(const RestrictionMultiSet& R, std::span<const Position> I) {
  Rational x = 0;
  for (const auto& [r, mult] : R.entries())
    if (r.restrictsAll(I)) x += Rational(mult) * measure_restriction(r);
  return x;
}

RestrictionMultiSet lean_members(const RestrictionMultiSet& R, std::span<const Position> I,
                                 const BigInt& phi) {
  RestrictionMultiSet lean;
  for (const auto& [r, mult] : R.entries())
    if (classify(r, I, phi) == Classification::Lean) lean.add(r, mult);
  return lean;
}

PositionSet best_block(const RestrictionMultiSet& R, std::span<const Position> I, long blockLen) {
  long nb = static_cast<long>(I.size()) / blockLen;
  PositionSet best;
  Rational bestScore;
  for (long b = 0; b < nb; ++b) {
    PositionSet block(I.begin() + b * blockLen, I.begin() + (b + 1) * blockLen);
    Rational score = 0;
    for (const auto& [r, mult] : R.entries()) {
      long u = r.unrestrictedIn(block);
      if (u > 0) score += Rational(mult) * Rational(u) * measure_restriction(r);
    }
    if (b == 0 || score < bestScore) {
      best = std::move(block);
      bestScore = score;
    }
  }
  return best;
}

long ceil_times(const Rational& q, long sizeI) {
  Rational ql = q * Rational(sizeI);
  BigInt c;
  mpz_cdiv_q(c.get_mpz_t(), ql.get_num().get_mpz_t(), ql.get_den().get_mpz_t());
  return c.get_si();
}

} // namespace

PositionSet slim_to_restricted(const RestrictionMultiSet& R, std::span<const Position> I,
                               const BigInt& phi, const Rational& q) {
  long sizeI = static_cast<long>(I.size());
  if (sizeI < 1) throw PreconditionError("slim_to_restricted: empty position set");
  std::size_t memberIndex = 0;
  for (const auto& [r, mult] : R.entries()) {
    if (is_chubby(r, I, phi))
      throw PreconditionError("slim_to_restricted: member " + std::to_string(memberIndex) +
                              " is (I,phi)-chubby");
    ++memberIndex;
  }
  if (q < rat(3, sizeI) || q > rat(1, 4))
    throw PreconditionError("slim_to_restricted: q out of [3/|I|, 1/4], q = " + to_string(q));
  long blockLen = ceil_times(q, sizeI);
  return best_block(R, I, blockLen);
}

GrowResult grow_restricted(const RestrictionMultiSet& R, std::span<const Position> I,
                           const BigInt& phi, const Rational& delta, const Rational& x) {
  if (phi < 2) throw PreconditionError("grow_restricted: phi must be at least 2");
  if (!(delta > 0) || !(delta < rat(1, 2)))
    throw PreconditionError("grow_restricted: delta must lie in (0, 1/2)");
  Rational xActual = restricting_sum(R, I);
  if (x != xActual)
    throw PreconditionError("grow_restricted: x = " + to_string(x) +
                            " but the restricting sum-size is " + to_string(xActual));
  Rational deltaPrime = delta * (Rational(1) - 2 * delta);
  long g = minimal_g(R.sumSize(), x, deltaPrime);
  if (!size_precondition(static_cast<long>(I.size()), phi, delta, g)) {
    std::ostringstream msg;
    msg << "grow_restricted: |I| = " << I.size() << " violates |I| > (phi/delta)^(g+2) with g = "
        << g;
    throw PreconditionError(msg.str());
  }
  Rational q = delta / Rational(phi);
  GrowResult out;
  out.I.assign(I.begin(), I.end());
  while (true) {
    RestrictionMultiSet lean = lean_members(R, out.I, phi);
    if (lean.sumSize() <= delta) return out;
    if (out.iterations >= g)
      throw InvariantViolation("grow_restricted: exceeded the iteration bound g = " +
                               std::to_string(g));
    out.I = slim_to_restricted(lean, out.I, phi, q);
    ++out.iterations;
  }
}

GrowOutcome grow_restricted_relaxed(const RestrictionMultiSet& R, std::span<const Position> I,
                                    const BigInt& phi, const Rational& delta, const Rational& x) {
  GrowOutcome out;
  out.preconditionsHeld = true;
  Rational deltaPrime = delta * (Rational(1) - 2 * delta);
  long g = 1;
  try {
    g = std::max(minimal_g(R.sumSize(), x, deltaPrime), 1L);
  } catch (const PreconditionError&) {
    out.preconditionsHeld = false;
    out.preconditionDetail = "iteration bound g overflows";
  }
  try {
    if (phi < 2) throw PreconditionError("phi must be at least 2");
    if (!(delta > 0) || !(delta < rat(1, 2))) throw PreconditionError("delta out of (0, 1/2)");
    if (out.preconditionsHeld && !size_precondition(static_cast<long>(I.size()), phi, delta, g)) {
      std::ostringstream msg;
      msg << "|I| = " << I.size() << " violates |I| > (phi/delta)^(g+2), g = " << g;
      throw PreconditionError(msg.str());
    }
  } catch (const PreconditionError& e) {
    out.preconditionsHeld = false;
    out.preconditionDetail = e.what();
  }
  Rational q = delta / Rational(phi);
  out.I.assign(I.begin(), I.end());
  long cap = std::max(g, 1L);
  while (true) {
    RestrictionMultiSet lean = lean_members(R, out.I, phi);
    if (lean.sumSize() <= delta) {
      out.leanBoundReached = true;
      return out;
    }
    if (out.iterations >= cap) {
      out.leanBoundReached = false;
      if (out.preconditionsHeld) {
        out.preconditionsHeld = false;
        out.preconditionDetail = "iteration bound exceeded";
      }
      return out;
    }
    long blockLen = std::max(1L, ceil_times(q, static_cast<long>(out.I.size())));
    blockLen = std::min(blockLen, static_cast<long>(out.I.size()));
    out.I = best_block(lean, out.I, blockLen);
    ++out.iterations;
  }
}

Json RemainderScan::to_json() const {
  Json j;
  Json es = Json::array();
  for (const auto& e : entries) {
    Json x;
    x["o"] = e.o;
    x["measure"] = rational_to_json(e.measure);
    x["earn"] = e.earn ? rational_to_json(*e.earn) : Json(nullptr);
    x["theta_cond"] = e.thetaCond ? rational_to_json(*e.thetaCond) : Json(nullptr);
    x["qualifies"] = e.qualifies;
    es.push_back(std::move(x));
  }
  j["entries"] = std::move(es);
  j["found"] = found ? Json(*found) : Json(nullptr);
  j["fallback"] = fallback;
  return j;
}

namespace {

// Partition distinct cells into groups that are pairwise disjoint inside,
// so inclusion-exclusion across groups is exact.
std::vector<std::vector<Restriction>> disjoint_groups(const RestrictionMultiSet& R) {
  std::vector<std::vector<Restriction>> groups;
  for (const auto& [r, mult] : R.entries()) {
    bool placed = false;
    for (auto& g : groups) {
      bool ok = true;
      for (const auto& other : g)
        if (r.merged(other)) {
          ok = false;
          break;
        }
      if (ok) {
        g.push_back(r);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({r});
  }
  return groups;
}

Rational union_measure_in(const RestrictionMultiSet& R, const std::optional<ModuloSet>& within) {
  auto groups = disjoint_groups(R);
  if (groups.size() <= 12) return measure_cells_union_in(groups, within);
  // Too much overlap for inclusion-exclusion; fall back to the expression engine.
  ExprPtr u = expr_empty();
  for (const auto& [r, mult] : R.entries()) u = expr_or(u, expr_cell(r));
  if (within) u = expr_and(u, expr_modulo(*within));
  return measure_expr(u);
}

} // namespace

RemainderScan scan_remainders(const StrategyFamily& F, const RestrictionMultiSet& Theta,
                              std::span<const Position> I, long m, const Rational& c,
                              const Rational& delta) {
  if (!(c > 1)) throw PreconditionError("scan_remainders: c must exceed 1");
  RemainderScan scan;
  Rational earnCap = Rational(1) / (Rational(1) - Rational(1) / c);
  Rational thetaCap = c * delta;
  std::optional<long> bestFallback;
  Rational bestTheta, bestEarn;
  int bestViolations = 3;
  for (long o = 0; o < m; ++o) {
    RemainderScan::Entry e;
    e.o = o;
    ModuloSet M{PositionSet(I.begin(), I.end()), m, o};
    e.measure = measure_modulo(M);
    if (e.measure > 0) {
      e.earn = expected_earning(F, M);
      e.thetaCond = union_measure_in(Theta, M) / e.measure;
      e.qualifies = *e.earn <= earnCap && *e.thetaCond <= thetaCap;
      if (e.qualifies && !scan.found) scan.found = o;
      int violations = (*e.earn > earnCap ? 1 : 0) + (*e.thetaCond > thetaCap ? 1 : 0);
      bool better = !bestFallback || violations < bestViolations ||
                    (violations == bestViolations &&
                     (*e.thetaCond < bestTheta ||
                      (*e.thetaCond == bestTheta && *e.earn < bestEarn)));
      if (better) {
        bestFallback = o;
        bestViolations = violations;
        bestTheta = *e.thetaCond;
        bestEarn = *e.earn;
      }
    }
    scan.entries.push_back(std::move(e));
  }
  if (bestFallback) scan.fallback = *bestFallback;
  return scan;
}

long find_good_remainder(const StrategyFamily& F, const RestrictionMultiSet& Theta,
                         std::span<const Position> I, long m, const Rational& c,
                         const Rational& delta) {
  Rational thetaUnion = union_measure_in(Theta, std::nullopt);
  if (!(thetaUnion < delta))
    throw PreconditionError("find_good_remainder: lambda(Theta~) = " + to_string(thetaUnion) +
                            " is not below delta = " + to_string(delta));
  RemainderScan scan = scan_remainders(F, Theta, I, m, c, delta);
  if (!scan.found)
    throw InvariantViolation("find_good_remainder: no qualifying remainder; this contradicts the "
                             "existence guarantee");
  return *scan.found;
}

Json ParamsDiagnostics::to_json() const {
  Json j = Json::array();
  for (const auto& e : entries) {
    Json x;
    x["name"] = e.name;
    x["holds"] = e.holds;
    x["detail"] = e.detail;
    j.push_back(std::move(x));
  }
  Json out;
  out["entries"] = std::move(j);
  out["all_hold"] = allHold;
  return out;
}

ParamsDiagnostics diagnose_params(const ChooserParams& p) {
  ParamsDiagnostics d;
  auto add = [&](std::string name, bool holds, std::string detail) {
    d.entries.push_back({std::move(name), holds, std::move(detail)});
    d.allHold = d.allHold && holds;
  };

  BigInt ellFormula = ipow(4 * p.phi, static_cast<unsigned long>(8 * p.n + 3));
  add("ell-formula", p.ell == ellFormula, "ell == (4 phi)^(8n+3)");

  BigInt mFormula = ipow(BigInt(2), static_cast<unsigned long>(std::max(p.n - 4, 0)));
  add("n-formula", p.m == mFormula, "n == 4 + log2(m)");

  add("phi-formula", p.phi == 16 * p.m * p.m, "phi == 16 m^2");

  add("first-choice-independence", p.ell >= p.phi,
      "|I_1| >= (m/xi)^2 so the first chosen set has measure ~ 1/m");

  add("xi-below-half", p.phi > 4 * p.m * p.m, "1 - 2 xi > 0 (earning bound denominators)");

  Rational deltaPrime = p.leanThreshold * (Rational(1) - 2 * p.leanThreshold);
  long g = minimal_g(Rational(p.n), Rational(0), deltaPrime);
  // ell > (phi/delta)^(g+2), compared exactly on big integers
  unsigned long e = static_cast<unsigned long>(g) + 2;
  bool sizeOk = p.ell * ipow(p.leanThreshold.get_num(), e) >
                ipow(p.phi * p.leanThreshold.get_den(), e);
  add("grow-worst-case-size", sizeOk,
      "ell > (phi/delta)^(g+2) for g = ceil(n/delta') = " + std::to_string(g) +
          " (worst case x = 0)");
  return d;
}

bool EmissionReport::required() const {
  return chainIntactAtEmission && growPreconditionsHeld && goodModPreconditionHeld && scanFound;
}

bool EmissionReport::requiredOk() const {
  bool ok = true;
  if (required()) ok = i1SumHolds && i1SizeHolds && i2Holds && m1Holds && m2Holds;
  if (clMSizeApplicable) ok = ok && clMSizeHolds;
  if (klEta && !klEta->allChecksHold()) ok = false;
  return ok;
}

Json EmissionReport::to_json() const {
  Json j;
  j["emission"] = emissionIndex;
  j["turn"] = turn;
  j["chosen"] = chosen.to_json();
  j["measure"] = rational_to_json(chosenMeasure);
  j["slimmed_trigger"] = rational_to_json(slimmedTrigger);
  j["psi_sum_size"] = rational_to_json(psiSumSize);
  j["theta_sum_size"] = rational_to_json(thetaSumSize);
  j["theta_union_measure"] = rational_to_json(thetaUnionMeasure);
  j["theta_cond_m"] = rational_to_json(thetaCondM);
  j["earn_on_m"] = earnOnM ? rational_to_json(*earnOnM) : Json(nullptr);
  j["chubby_only_earn"] = chubbyOnlyEarn ? rational_to_json(*chubbyOnlyEarn) : Json(nullptr);
  j["shrink_iterations"] = shrinkIterations;
  j["shrink_exponent_total"] = shrinkExponentTotal;
  j["kept_same_i"] = keptSameI;
  j["grow_preconditions_held"] = growPreconditionsHeld;
  j["good_mod_precondition_held"] = goodModPreconditionHeld;
  j["scan_found"] = scanFound;
  j["chain_intact"] = chainIntactAtEmission;
  j["required"] = required();
  Json props;
  props["i1_sum"] = i1SumHolds;
  props["i1_size"] = i1SizeHolds;
  props["i2"] = i2Holds;
  props["m1"] = m1Holds;
  props["m2"] = m2Holds;
  j["properties"] = std::move(props);
  j["cl_m_size_applicable"] = clMSizeApplicable;
  j["cl_m_size_holds"] = clMSizeHolds;
  j["kl_eta"] = klEta ? klEta->to_json() : Json(nullptr);
  j["required_ok"] = requiredOk();
  return j;
}

ChooserState::ChooserState(const ChooserParams& params) : params_(params) {
  params_.validate();
  if (!params_.m.fits_slong_p() || !params_.ell.fits_slong_p() || !params_.phi.fits_slong_p())
    throw Error("parameters too large to simulate; use params/--dry-run for k-scale values");
  if (params_.ell.get_si() > 2'000'000)
    throw Error("ell too large to materialize the first position interval");
  if (params_.m.get_si() > 65536) throw Error("modulus too large for the residue tables");
  mLong_ = params_.m.get_si();
  info_.resize(static_cast<std::size_t>(params_.n));
  seen_.assign(static_cast<std::size_t>(params_.n), 0);
}

bool ChooserState::chubbyCount(long assigned) const {
  return BigInt(static_cast<long>(I_.size()) - assigned) >= params_.phi;
}

Rational ChooserState::leafModuloCond(int strat, int node) const {
  const NodeInfo& ni = info_[static_cast<std::size_t>(strat)][static_cast<std::size_t>(node)];
  long u = static_cast<long>(I_.size()) - ni.assignedInI;
  BigInt s = binomial_residue_sum(u, mLong_, o_ - ni.onesInI);
  if (s == 0) return Rational(0);
  return rat(s, ipow(BigInt(2), static_cast<unsigned long>(u)));
}

void ChooserState::rebaseline(const StrategyFamily& F) {
  slimmedSum_ = 0;
  earnNum_ = 0;
  for (int i = 1; i <= params_.n; ++i) {
    const BettingStrategy& B = F.at(i);
    auto& vec = info_[static_cast<std::size_t>(i - 1)];
    vec.assign(static_cast<std::size_t>(B.nodeCount()), NodeInfo{});
    for (int idx = 1; idx < B.nodeCount(); ++idx) {
      int par = B.node(idx).parent;
      Position p = B.node(par).betPos;
      bool inI = position_set_contains(I_, p);
      vec[idx].assignedInI = vec[par].assignedInI + (inI ? 1 : 0);
      vec[idx].onesInI = vec[par].onesInI + ((inI && B.node(idx).bitFromParent == 1) ? 1 : 0);
      vec[idx].inDelta = false;
    }
    for (int idx = 0; idx < B.nodeCount(); ++idx)
      if (B.isLeaf(idx) && B.node(idx).mass != 0)
        earnNum_ += StrategyFamily::weight(i) * B.node(idx).mass * leafModuloCond(i - 1, idx);
    seen_[static_cast<std::size_t>(i - 1)] = B.nodeCount();
  }
  snapshot_ = F;
  haveSnapshot_ = true;
}

void ChooserState::absorb(const StrategyFamily& F) {
  for (int i = 1; i <= params_.n; ++i) {
    const BettingStrategy& B = F.at(i);
    auto& vec = info_[static_cast<std::size_t>(i - 1)];
    int idx = seen_[static_cast<std::size_t>(i - 1)];
    if (idx == B.nodeCount()) continue;
    vec.resize(static_cast<std::size_t>(B.nodeCount()));
    for (; idx + 1 < B.nodeCount(); idx += 2) {
      int c0 = idx, c1 = idx + 1;
      int par = B.node(c0).parent;
      if (par < 0 || B.node(c1).parent != par || B.node(c0).bitFromParent != 0 ||
          B.node(c1).bitFromParent != 1)
        throw PreconditionError("strategies did not grow append-only since the last sync");
      const NodeInfo parInfo = vec[static_cast<std::size_t>(par)];
      // The parent stops being a leaf: retire its contributions.
      if (parInfo.inDelta) slimmedSum_ -= pow2(-B.node(par).depth);
      if (B.node(par).mass != 0)
        earnNum_ -= StrategyFamily::weight(i) * B.node(par).mass * leafModuloCond(i - 1, par);
      Position p = B.node(par).betPos;
      bool inI = position_set_contains(I_, p);
      bool parentChubby = chubbyCount(parInfo.assignedInI);
      for (int bit = 0; bit < 2; ++bit) {
        int child = bit == 0 ? c0 : c1;
        NodeInfo ci;
        ci.assignedInI = parInfo.assignedInI + (inI ? 1 : 0);
        ci.onesInI = parInfo.onesInI + ((inI && bit == 1) ? 1 : 0);
        bool childChubby = chubbyCount(ci.assignedInI);
        ci.inDelta = !childChubby && (parInfo.inDelta || parentChubby);
        vec[static_cast<std::size_t>(child)] = ci;
        if (ci.inDelta) slimmedSum_ += pow2(-B.node(child).depth);
        if (B.node(child).mass != 0)
          earnNum_ += StrategyFamily::weight(i) * B.node(child).mass * leafModuloCond(i - 1, child);
      }
    }
    seen_[static_cast<std::size_t>(i - 1)] = B.nodeCount();
  }
}

void ChooserState::sync(const StrategyFamily& F) { absorb(F); }

Rational ChooserState::earnOnCurrentM() const {
  if (lambdaM_ == 0) return Rational(0);
  return earnNum_ / lambdaM_;
}

RestrictionMultiSet ChooserState::leafMultiset(const StrategyFamily& F,
                                               std::span<const Position> I,
                                               Classification wanted) const {
  std::vector<Restriction> cells;
  for (int i = 1; i <= params_.n; ++i) {
    const BettingStrategy& B = F.at(i);
    for (int leaf : B.leafIndices()) {
      Restriction r = B.restrictionOf(leaf);
      if (classify(r, I, params_.phi) == wanted) cells.push_back(std::move(r));
    }
  }
  return RestrictionMultiSet::fromCells(std::move(cells));
}

namespace {

RestrictionMultiSet all_leaf_multiset(const StrategyFamily& F, int n) {
  std::vector<Restriction> cells;
  for (int i = 1; i <= n; ++i) {
    const BettingStrategy& B = F.at(i);
    for (int leaf : B.leafIndices()) cells.push_back(B.restrictionOf(leaf));
  }
  return RestrictionMultiSet::fromCells(std::move(cells));
}

} // namespace

std::optional<ModuloSet> ChooserState::decide(const StrategyFamily& F, EmissionReport* report) {
  if (F.size() < params_.n) throw PreconditionError("family smaller than the configured n");
  ++turn_;

  if (turn_ == 1) {
    I_ = interval(1, params_.ell.get_si());
    o_ = 0;
    ModuloSet M{I_, mLong_, o_};
    lambdaM_ = measure_modulo(M);
    chosen_.push_back(M);
    shrinkExponent_ = 0;
    rebaseline(F);
    EmissionReport rep;
    rep.emissionIndex = 1;
    rep.turn = turn_;
    rep.chosen = M;
    rep.chosenMeasure = lambdaM_;
    rep.slimmedTrigger = 0;
    rep.psiSumSize = restricting_sum(all_leaf_multiset(F, params_.n), I_);
    RestrictionMultiSet theta = leafMultiset(F, I_, Classification::Lean);
    rep.thetaSumSize = theta.sumSize();
    rep.thetaUnionMeasure = union_measure_in(theta, std::nullopt);
    rep.thetaCondM = lambdaM_ > 0 ? union_measure_in(theta, M) / lambdaM_ : Rational(0);
    rep.earnOnM = lambdaM_ > 0 ? std::optional<Rational>(earnOnCurrentM()) : std::nullopt;
    rep.shrinkIterations = 0;
    rep.shrinkExponentTotal = 0;
    rep.keptSameI = true;
    rep.chainIntactAtEmission = true;
    rep.i1SumHolds = rep.psiSumSize >= 0;
    rep.i1SizeHolds = BigInt(static_cast<long>(I_.size())) >= params_.ell;
    rep.i2Holds = rep.thetaSumSize <= params_.leanThreshold;
    rep.m1Holds = rep.thetaCondM <= params_.c * params_.leanThreshold;
    rep.m2Holds = !rep.earnOnM || *rep.earnOnM <= params_.earnBound;
    rep.clMSizeApplicable = BigInt(static_cast<long>(I_.size())) >= 16 * params_.m * params_.m;
    rep.clMSizeHolds =
        !rep.clMSizeApplicable || xi_approx(lambdaM_, rat(BigInt(1), params_.m), rat(1, 4));
    chainIntact_ = rep.required() && rep.i1SumHolds && rep.i1SizeHolds && rep.i2Holds &&
                   rep.m1Holds && rep.m2Holds;
    if (report) *report = rep;
    return chosen_.back();
  }

  if (!(slimmedSum_ > params_.slimThreshold)) return std::nullopt;

  if (emissionCount() >= 8 * params_.n + 1)
    throw InvariantViolation("the chooser would exceed 8n+1 chosen sets");

  EmissionReport rep;
  rep.turn = turn_;
  rep.emissionIndex = emissionCount() + 1;
  rep.slimmedTrigger = slimmedSum_;
  rep.chainIntactAtEmission = chainIntact_;

  // Branch on the lean mass of the current I.
  RestrictionMultiSet leanCurrent = leafMultiset(F, I_, Classification::Lean);
  Rational leanSum = leanCurrent.sumSize();
  PositionSet Inext;
  if (leanSum <= params_.leanThreshold) {
    Inext = I_;
    rep.keptSameI = true;
    rep.growPreconditionsHeld = true;
    rep.shrinkIterations = 0;
  } else {
    RestrictionMultiSet allLeaves = all_leaf_multiset(F, params_.n);
    Rational x = restricting_sum(allLeaves, I_);
    GrowOutcome grown =
        grow_restricted_relaxed(allLeaves, I_, params_.phi, params_.leanThreshold, x);
    Inext = std::move(grown.I);
    rep.keptSameI = false;
    rep.shrinkIterations = grown.iterations;
    rep.growPreconditionsHeld = grown.preconditionsHeld && grown.leanBoundReached;
    shrinkExponent_ += grown.iterations;
  }
  rep.shrinkExponentTotal = shrinkExponent_;

  RestrictionMultiSet thetaNext = leafMultiset(F, Inext, Classification::Lean);
  rep.thetaSumSize = thetaNext.sumSize();
  rep.thetaUnionMeasure = union_measure_in(thetaNext, std::nullopt);
  rep.goodModPreconditionHeld = rep.thetaUnionMeasure <= params_.leanThreshold;

  RemainderScan scan =
      scan_remainders(F, thetaNext, Inext, mLong_, params_.c, params_.leanThreshold);
  rep.scanFound = scan.found.has_value();
  long oNext;
  if (scan.found) {
    oNext = *scan.found;
  } else if (rep.goodModPreconditionHeld) {
    throw InvariantViolation(
        "no qualifying remainder although the lean-mass precondition held (turn " +
        std::to_string(turn_) + ")");
  } else {
    oNext = scan.fallback;
  }

  ModuloSet M{Inext, mLong_, oNext};
  Rational lambdaNext = measure_modulo(M);
  if (lambdaNext == 0) throw InvariantViolation("chose a modulo set of measure zero");

  rep.chosen = M;
  rep.chosenMeasure = lambdaNext;
  rep.psiSumSize = restricting_sum(all_leaf_multiset(F, params_.n), Inext);
  rep.thetaCondM = union_measure_in(thetaNext, M) / lambdaNext;
  rep.earnOnM = expected_earning(F, M);

  // Diagnostic: earning restricted to sequences in no slim leaf-cell.
  {
    std::vector<std::vector<Restriction>> slimGroups(static_cast<std::size_t>(params_.n));
    std::size_t cells = 0;
    for (int i = 1; i <= params_.n; ++i)
      for (int leaf : F.at(i).leafIndices()) {
        Restriction r = F.at(i).restrictionOf(leaf);
        if (is_slim(r, Inext, params_.phi)) {
          slimGroups[static_cast<std::size_t>(i - 1)].push_back(r);
          ++cells;
        }
      }
    if (cells <= 800) {
      Rational removed = measure_cells_union_in(slimGroups, M);
      Rational lambdaChubbyOnly = lambdaNext - removed;
      if (lambdaChubbyOnly > 0) {
        Rational num = 0;
        for (int i = 1; i <= params_.n; ++i) {
          const BettingStrategy& B = F.at(i);
          Rational inner = 0;
          for (int leaf : B.leafIndices()) {
            if (B.node(leaf).mass == 0) continue;
            Restriction cell = B.restrictionOf(leaf);
            Rational cellAndM =
                measure_restriction(cell) * measure_modulo_given_restriction(M, cell);
            if (cellAndM == 0) continue;
            std::vector<std::vector<Restriction>> clipped(slimGroups.size());
            for (std::size_t gi = 0; gi < slimGroups.size(); ++gi)
              for (const auto& c : slimGroups[gi])
                if (auto merged = cell.merged(c)) clipped[gi].push_back(*merged);
            inner += B.capital(leaf) * (cellAndM - measure_cells_union_in(clipped, M));
          }
          num += StrategyFamily::weight(i) * inner;
        }
        rep.chubbyOnlyEarn = num / lambdaChubbyOnly;
      }
    }
  }

  // Property checks; required only when this emission's preconditions held.
  // Each emission adds at least min(slimThreshold - leanThreshold, delta') of
  // restricting sum-size; at the standard thresholds both terms are 1/8.
  Rational deltaPrime = params_.leanThreshold * (Rational(1) - 2 * params_.leanThreshold);
  Rational step = std::min(params_.slimThreshold - params_.leanThreshold, deltaPrime);
  rep.i1SumHolds = step <= 0 || rep.psiSumSize >= Rational(rep.emissionIndex - 1) * step;
  {
    Rational base = Rational(params_.phi) / params_.leanThreshold;
    BigInt num = base.get_num(), den = base.get_den();
    unsigned long K = static_cast<unsigned long>(shrinkExponent_);
    bool sizeOk = BigInt(static_cast<long>(Inext.size())) * ipow(num, K) >= params_.ell * ipow(den, K);
    rep.i1SizeHolds = sizeOk && 8 * rep.psiSumSize >= Rational(shrinkExponent_);
  }
  rep.i2Holds = rep.thetaSumSize <= params_.leanThreshold;
  rep.m1Holds = rep.thetaCondM <= params_.c * params_.leanThreshold;
  rep.m2Holds = *rep.earnOnM <= params_.earnBound;
  rep.clMSizeApplicable = BigInt(static_cast<long>(Inext.size())) >= 16 * params_.m * params_.m;
  rep.clMSizeHolds =
      !rep.clMSizeApplicable || xi_approx(lambdaNext, rat(BigInt(1), params_.m), rat(1, 4));

  if (haveSnapshot_) {
    long leafCount = 0;
    for (int i = 1; i <= params_.n; ++i)
      leafCount += (F.at(i).nodeCount() + 1) / 2;
    // The verifier clips every leaf against every removed cell; keep it to
    // turn-by-turn tree sizes.
    const ModuloSet& prevM = chosen_.back();
    if (leafCount <= 5000 && measure_modulo(prevM) > 0)
      rep.klEta = verify_kl_eta(snapshot_, F, prevM, params_.phi);
  }

  chainIntact_ = rep.required() && rep.i1SumHolds && rep.i1SizeHolds && rep.i2Holds &&
                 rep.m1Holds && rep.m2Holds;

  chosen_.push_back(M);
  I_ = std::move(Inext);
  o_ = oNext;
  lambdaM_ = lambdaNext;
  rebaseline(F);
  if (report) *report = rep;
  return chosen_.back();
}

} // namespace betgame

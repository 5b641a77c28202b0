#include "betgame/earning.hpp"

#include <algorithm>
#include <set>

#include "betgame/errors.hpp"

namespace betgame {

Rational expected_earning(const StrategyFamily& F, const ExprPtr& X) {
  Rational lambdaX = measure_expr(X);
  if (lambdaX == 0) throw PreconditionError("expected earning on a zero-measure set");
  Rational total = 0;
  for (int i = 1; i <= F.size(); ++i) {
    const BettingStrategy& B = F.at(i);
    Rational inner = 0;
    for (int leaf : B.leafIndices()) {
      Rational cap = B.capital(leaf);
      if (cap == 0) continue;
      Rational cellAndX = measure_expr(expr_and(expr_cell(B.restrictionOf(leaf)), X));
      if (cellAndX == 0) continue;
      inner += cap * cellAndX;
    }
    total += StrategyFamily::weight(i) * inner;
  }
  return total / lambdaX;
}

Rational expected_earning(const StrategyFamily& F, const ModuloSet& M) {
  Rational lambdaM = measure_modulo(M);
  if (lambdaM == 0) throw PreconditionError("expected earning on a zero-measure set");
  Rational total = 0;
  for (int i = 1; i <= F.size(); ++i) {
    const BettingStrategy& B = F.at(i);
    Rational inner = 0;
    for (int leaf : B.leafIndices()) {
      if (B.node(leaf).mass == 0) continue;
      // c(s) λ(cell ∩ M) = mass(s) λ(M | cell)
      inner += B.node(leaf).mass * measure_modulo_given_restriction(M, B.restrictionOf(leaf));
    }
    total += StrategyFamily::weight(i) * inner;
  }
  return total / lambdaM;
}

std::size_t min_earning_part(const StrategyFamily& F, const std::vector<ExprPtr>& parts) {
  if (parts.empty()) throw PreconditionError("empty partition");
  Rational sum = 0;
  for (const auto& part : parts) {
    Rational lam = measure_expr(part);
    if (lam == 0) throw PreconditionError("partition part with zero measure");
    sum += lam;
  }
  ExprPtr whole = expr_union(parts);
  Rational lambdaWhole = measure_expr(whole);
  if (sum != lambdaWhole)
    throw PreconditionError("parts are not a partition: measures sum to " + to_string(sum) +
                            " but the union has measure " + to_string(lambdaWhole));
  Rational total = expected_earning(F, whole);
  std::size_t best = 0;
  Rational bestEarn;
  for (std::size_t idx = 0; idx < parts.size(); ++idx) {
    Rational e = expected_earning(F, parts[idx]);
    if (idx == 0 || e < bestEarn) {
      best = idx;
      bestEarn = e;
    }
  }
  if (bestEarn > total)
    throw InvariantViolation("minimal part earning exceeds the earning on the union");
  return best;
}

Json LowCapitalSubset::to_json() const {
  Json j;
  j["measure_y"] = rational_to_json(measureY);
  j["measure_z"] = rational_to_json(measureZ);
  Json bounds = Json::array();
  for (const auto& b : boundPerStrategy) bounds.push_back(rational_to_json(b));
  j["capital_bounds"] = std::move(bounds);
  j["strictly_above_d"] = strictlyAboveD;
  j["witness"] = Y->to_json();
  return j;
}

LowCapitalSubset low_capital_subset(const StrategyFamily& F, const ExprPtr& X, const Rational& d) {
  Rational lambdaX = measure_expr(X);
  if (!(d > 0) || !(d < lambdaX))
    throw PreconditionError("low_capital_subset needs 0 < d < lambda(X)");
  Rational q = lambdaX / (lambdaX - d);
  Rational earn = expected_earning(F, X);

  LowCapitalSubset out;
  ExprPtr z = expr_empty();
  for (int i = 1; i <= F.size(); ++i) {
    Rational bound = pow2(i) * q * earn;
    out.boundPerStrategy.push_back(bound);
    const BettingStrategy& B = F.at(i);
    for (int leaf : B.leafIndices()) {
      if (B.capital(leaf) > bound)
        z = expr_or(z, expr_and(expr_cell(B.restrictionOf(leaf)), X));
    }
  }
  out.Y = expr_diff(X, z);
  out.measureZ = measure_expr(z);
  out.measureY = measure_expr(out.Y);
  out.strictlyAboveD = out.measureY > d;
  if (out.measureY < d)
    throw InvariantViolation("low-capital subset came out smaller than d");
  return out;
}

RestrictionMultiSet lean_leaf_multiset(const StrategyFamily& F, std::span<const Position> I,
                                       const BigInt& phi) {
  RestrictionMultiSet theta;
  for (int i = 1; i <= F.size(); ++i) {
    const BettingStrategy& B = F.at(i);
    for (int leaf : B.leafIndices()) {
      Restriction r = B.restrictionOf(leaf);
      if (classify(r, I, phi) == Classification::Lean) theta.add(r);
    }
  }
  return theta;
}

RestrictionMultiSet slimmed_down_multiset(const StrategyFamily& before, const StrategyFamily& after,
                                          std::span<const Position> I, const BigInt& phi) {
  if (before.size() != after.size())
    throw PreconditionError("families must have the same number of strategies");
  RestrictionMultiSet delta;
  for (int i = 1; i <= before.size(); ++i) {
    const BettingStrategy& Bb = before.at(i);
    const BettingStrategy& Ba = after.at(i);
    std::set<std::string> beforeLeaves;
    for (int leaf : Bb.leafIndices()) beforeLeaves.insert(Bb.pathOf(leaf));
    for (int leaf : Ba.leafIndices()) {
      std::string path = Ba.pathOf(leaf);
      // Ancestor leaf in `before`: the unique prefix that is a leaf there.
      std::string prefix;
      bool found = beforeLeaves.count(path) > 0;
      if (found) {
        prefix = path;
      } else {
        for (std::size_t len = 0; len < path.size(); ++len) {
          prefix = path.substr(0, len);
          if (beforeLeaves.count(prefix)) {
            found = true;
            break;
          }
        }
      }
      if (!found) throw PreconditionError("after-strategy is not an extension of before-strategy");
      Restriction ancestor = Bb.restrictionOf(Bb.nodeAt(prefix));
      if (!is_chubby(ancestor, I, phi)) continue;
      Restriction r = Ba.restrictionOf(leaf);
      if (is_slim(r, I, phi)) delta.add(r);
    }
  }
  return delta;
}

bool KlEtaReport::allChecksHold() const {
  if (vacuous) return true;
  bool ok = eqDeltaHolds;
  if (denominatorPositive) ok = ok && mainHolds;
  if (eqMeasureApplicable) ok = ok && eqMeasureHolds;
  return ok;
}

Json KlEtaReport::to_json() const {
  Json j;
  j["xi"] = rational_to_json(xi);
  j["lambda_m"] = rational_to_json(lambdaM);
  j["lambda_m_prime"] = rational_to_json(lambdaMprime);
  j["theta_sum_size"] = rational_to_json(thetaSumSize);
  j["delta_sum_size"] = rational_to_json(deltaSumSize);
  j["theta_cond_m"] = rational_to_json(thetaCondM);
  j["delta_cond_m"] = rational_to_json(deltaCondM);
  j["earn_before"] = rational_to_json(earnBefore);
  j["lhs"] = earnAfter ? rational_to_json(*earnAfter) : Json(nullptr);
  j["rhs"] = rhs ? rational_to_json(*rhs) : Json(nullptr);
  j["slack"] = (earnAfter && rhs) ? rational_to_json(*rhs - *earnAfter) : Json(nullptr);
  j["vacuous"] = vacuous;
  j["denominator_positive"] = denominatorPositive;
  j["main_holds"] = mainHolds;
  j["eq_measure_applicable"] = eqMeasureApplicable;
  j["eq_measure_holds"] = eqMeasureHolds;
  j["eq_delta_holds"] = eqDeltaHolds;
  Json w;
  w["theta"] = theta.to_json();
  w["delta"] = delta.to_json();
  j["witnesses"] = std::move(w);
  return j;
}

namespace {

// Per-strategy groups of pairwise-disjoint cells: lean before-leaves plus
// slimmed-down after-leaves (they descend from distinct before-leaves).
struct CellGroups {
  std::vector<std::vector<Restriction>> thetaOnly;
  std::vector<std::vector<Restriction>> deltaOnly;
  std::vector<std::vector<Restriction>> combined;
};

CellGroups collect_groups(const StrategyFamily& before, const StrategyFamily& after,
                          std::span<const Position> I, const BigInt& phi) {
  CellGroups g;
  int n = before.size();
  g.thetaOnly.resize(static_cast<std::size_t>(n));
  g.deltaOnly.resize(static_cast<std::size_t>(n));
  g.combined.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const BettingStrategy& Bb = before.at(i);
    const BettingStrategy& Ba = after.at(i);
    std::set<std::string> beforeLeaves;
    for (int leaf : Bb.leafIndices()) {
      Restriction r = Bb.restrictionOf(leaf);
      beforeLeaves.insert(Bb.pathOf(leaf));
      if (classify(r, I, phi) == Classification::Lean) {
        g.thetaOnly[i - 1].push_back(r);
        g.combined[i - 1].push_back(r);
      }
    }
    for (int leaf : Ba.leafIndices()) {
      std::string path = Ba.pathOf(leaf);
      std::string prefix;
      bool found = false;
      for (std::size_t len = 0; len <= path.size(); ++len) {
        prefix = path.substr(0, len);
        if (beforeLeaves.count(prefix)) {
          found = true;
          break;
        }
      }
      if (!found) throw PreconditionError("after-strategy is not an extension of before-strategy");
      if (!is_chubby(Bb.restrictionOf(Bb.nodeAt(prefix)), I, phi)) continue;
      Restriction r = Ba.restrictionOf(leaf);
      if (is_slim(r, I, phi)) {
        g.deltaOnly[i - 1].push_back(r);
        g.combined[i - 1].push_back(r);
      }
    }
  }
  return g;
}

} // namespace

KlEtaReport verify_kl_eta(const StrategyFamily& before, const StrategyFamily& after,
                          const ModuloSet& M, const BigInt& phi) {
  M.validate();
  if (before.size() != after.size())
    throw PreconditionError("families must have the same number of strategies");
  for (int i = 1; i <= before.size(); ++i)
    if (!is_extension_of(after.at(i), before.at(i)))
      throw PreconditionError("after-family is not an extension of the before-family");
  BigInt m2 = BigInt(M.m) * BigInt(M.m);
  if (phi <= m2) throw PreconditionError("verify_kl_eta needs phi > m^2");
  BigInt root;
  if (!is_perfect_square(phi, &root))
    throw PreconditionError("verify_kl_eta needs phi to be a perfect square");

  KlEtaReport rep;
  rep.xi = rat(BigInt(M.m), root); // m / sqrt(phi) < 1

  rep.theta = lean_leaf_multiset(before, M.I, phi);
  rep.delta = slimmed_down_multiset(before, after, M.I, phi);
  rep.thetaSumSize = rep.theta.sumSize();
  rep.deltaSumSize = rep.delta.sumSize();

  CellGroups groups = collect_groups(before, after, M.I, phi);

  rep.lambdaM = measure_modulo(M);
  if (rep.lambdaM == 0) {
    rep.vacuous = true;
    rep.lambdaMprime = 0;
    rep.thetaCondM = rep.deltaCondM = 0;
    rep.earnBefore = 0;
    return rep;
  }
  Rational removedAndM = measure_cells_union_in(groups.combined, M);
  rep.lambdaMprime = rep.lambdaM - removedAndM;
  rep.thetaCondM = measure_cells_union_in(groups.thetaOnly, M) / rep.lambdaM;
  rep.deltaCondM = measure_cells_union_in(groups.deltaOnly, M) / rep.lambdaM;
  rep.earnBefore = expected_earning(before, M);

  // eq_D|M_D: lambda(Delta~ | M) <= lambda+(Delta) / (1 - xi).
  Rational oneMinusXi = Rational(1) - rep.xi;
  rep.eqDeltaHolds = rep.deltaCondM * oneMinusXi <= rep.deltaSumSize;

  if (rep.lambdaMprime == 0) {
    rep.vacuous = true;
    return rep;
  }

  // eq_M_M'_measure, when its denominator is positive.
  Rational eqDen = Rational(1) - rep.thetaCondM - rep.deltaCondM;
  rep.eqMeasureApplicable = eqDen > 0;
  if (rep.eqMeasureApplicable)
    rep.eqMeasureHolds = rep.lambdaM * eqDen <= rep.lambdaMprime;

  // Expected earning of `after` on M' = M minus the removed cells, leaf by leaf.
  Rational earnNum = 0;
  for (int i = 1; i <= after.size(); ++i) {
    const BettingStrategy& B = after.at(i);
    Rational inner = 0;
    for (int leaf : B.leafIndices()) {
      if (B.node(leaf).mass == 0) continue;
      Restriction cell = B.restrictionOf(leaf);
      Rational cellAndM = measure_restriction(cell) * measure_modulo_given_restriction(M, cell);
      if (cellAndM == 0) continue;
      std::vector<std::vector<Restriction>> clipped(groups.combined.size());
      for (std::size_t gi = 0; gi < groups.combined.size(); ++gi)
        for (const auto& c : groups.combined[gi])
          if (auto merged = cell.merged(c)) clipped[gi].push_back(*merged);
      Rational cellAndRemoved = measure_cells_union_in(clipped, M);
      inner += B.capital(leaf) * (cellAndM - cellAndRemoved);
    }
    earnNum += StrategyFamily::weight(i) * inner;
  }
  rep.earnAfter = earnNum / rep.lambdaMprime;

  Rational oneMinusTwoXi = Rational(1) - 2 * rep.xi;
  Rational mainDen = Rational(1) - rep.thetaCondM - rep.deltaSumSize / oneMinusXi;
  rep.denominatorPositive = oneMinusTwoXi > 0 && mainDen > 0;
  if (rep.denominatorPositive) {
    rep.rhs = rep.earnBefore / (oneMinusTwoXi * mainDen);
    rep.mainHolds = *rep.earnAfter <= *rep.rhs;
  }
  return rep;
}

} // namespace betgame

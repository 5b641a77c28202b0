#include "betgame/verify.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <sstream>
#include <thread>

#include "betgame/errors.hpp"
#include "betgame/gamblers.hpp"
#include "betgame/game.hpp"
#include "betgame/rng.hpp"

namespace betgame {

Json SuiteReport::to_json() const {
  Json j;
  j["suite"] = suite;
  j["cases"] = cases;
  j["seed"] = seed;
  j["passed"] = passed;
  j["failed"] = failed;
  Json cx = Json::array();
  for (const auto& c : counterexamples) {
    Json e;
    e["case"] = c.caseIndex;
    e["description"] = c.description;
    cx.push_back(std::move(e));
  }
  j["counterexamples"] = std::move(cx);
  j["notes"] = notes;
  return j;
}

namespace {

using CaseFn = std::function<std::optional<std::string>(long)>;

// Runs fn(0..cases-1) across threads; outcome independent of the sharding.
void run_cases(SuiteReport& rep, long cases, int threads, const CaseFn& fn) {
  std::vector<std::optional<std::string>> results(static_cast<std::size_t>(cases));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      long idx = next.fetch_add(1);
      if (idx >= cases) return;
      try {
        results[static_cast<std::size_t>(idx)] = fn(idx);
      } catch (const std::exception& e) {
        results[static_cast<std::size_t>(idx)] = std::string("exception: ") + e.what();
      }
    }
  };
  int nThreads = std::max(1, threads);
  if (nThreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nThreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (long idx = 0; idx < cases; ++idx) {
    rep.cases++;
    if (results[static_cast<std::size_t>(idx)]) {
      rep.failed++;
      if (rep.counterexamples.size() < 25)
        rep.counterexamples.push_back({idx, *results[static_cast<std::size_t>(idx)]});
    } else {
      rep.passed++;
    }
  }
}

void run_single(SuiteReport& rep, const std::string& label,
                const std::function<std::optional<std::string>()>& fn) {
  rep.cases++;
  std::optional<std::string> failure;
  try {
    failure = fn();
  } catch (const std::exception& e) {
    failure = std::string("exception: ") + e.what();
  }
  if (failure) {
    rep.failed++;
    rep.counterexamples.push_back({-1, label + ": " + *failure});
  } else {
    rep.passed++;
  }
}

// ---- shared fuzz helpers ----------------------------------------------------

// Random bets at random leaves; masses split in 32nds of the leaf mass.
void grow_random(BettingStrategy& B, Rng& rng, int bets, int maxDepth,
                 const std::function<Position(Rng&, const BettingStrategy&, int)>& pickPos) {
  for (int b = 0; b < bets; ++b) {
    int idx = 0;
    while (!B.isLeaf(idx)) idx = B.node(idx).child[rng.below(2)];
    if (B.node(idx).depth >= maxDepth) continue;
    Position p = pickPos(rng, B, idx);
    if (p <= 0) continue;
    Rational mass = B.node(idx).mass;
    Rational m0 = mass * rat(rng.range(0, 32), 32);
    B.defineBet(idx, p, m0, mass - m0);
  }
}

Position pick_small_position(Rng& rng, const BettingStrategy& B, int leaf) {
  for (int attempt = 0; attempt < 12; ++attempt) {
    Position p = rng.range(1, 64);
    if (!B.pathAssignment(leaf, p)) return p;
  }
  return 0;
}

// Mostly positions of I that are still free on the path.
std::function<Position(Rng&, const BettingStrategy&, int)> pick_in_set(const PositionSet& I) {
  return [I](Rng& rng, const BettingStrategy& B, int leaf) -> Position {
    if (!rng.chance(1, 5)) {
      std::size_t start = rng.below(I.size());
      for (std::size_t off = 0; off < I.size(); ++off) {
        Position p = I[(start + off) % I.size()];
        if (!B.pathAssignment(leaf, p)) return p;
      }
    }
    Position p = I.back() + 1 + static_cast<Position>(rng.below(40));
    while (B.pathAssignment(leaf, p)) ++p;
    return p;
  };
}

StrategyFamily random_family(Rng& rng, int n, int maxBets, int maxDepth) {
  StrategyFamily F(n);
  for (int i = 1; i <= n; ++i)
    grow_random(F.at(i), rng, static_cast<int>(rng.below(static_cast<std::uint64_t>(maxBets) + 1)),
                maxDepth, pick_small_position);
  return F;
}

std::string show(const Rational& q) { return to_string(q); }

// ---- proposition ------------------------------------------------------------

std::optional<std::string> proposition_grid_case(long m, long u) {
  PositionSet I = interval(1, u);
  Restriction empty;
  if (!check_modulo_independence_sqrt(I, m, empty))
    return "grid m=" + std::to_string(m) + " u=" + std::to_string(u) +
           ": conditional measure not within m/sqrt(u) of 1/m";
  Rational sum = 0;
  for (long o = 0; o < m; ++o) sum += measure_modulo(ModuloSet{I, m, o});
  if (sum != 1)
    return "grid m=" + std::to_string(m) + " u=" + std::to_string(u) +
           ": remainders do not partition the space";
  return std::nullopt;
}

std::optional<std::string> proposition_random_case(std::uint64_t caseSeed) {
  Rng rng(caseSeed);
  long m = rng.range(2, 6);
  long u = rng.range(4 * m * m, 400);
  long extra = rng.range(0, 20);
  Position base = 1 + static_cast<Position>(rng.below(50));
  PositionSet I = interval(base, base + u + extra - 1);
  // Restrict `extra` positions of I plus a few outside.
  Restriction r;
  for (long j = 0; j < extra; ++j) r = r.with(I[static_cast<std::size_t>(j)], rng.below(2) == 1);
  for (int j = 0; j < 3; ++j) {
    Position p = I.back() + 1 + static_cast<Position>(rng.below(30));
    if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
  }
  if (r.unrestrictedIn(I) != u) return "generator produced a wrong unrestricted count";
  if (!check_modulo_independence_sqrt(I, m, r))
    return "random m=" + std::to_string(m) + " u=" + std::to_string(u) +
           ": conditional measure not within m/sqrt(u) of 1/m";
  Rational sum = 0;
  for (long o = 0; o < m; ++o)
    sum += measure_modulo_given_restriction(ModuloSet{I, m, o}, r);
  if (sum != 1) return "conditional measures of the remainders do not sum to 1";
  return std::nullopt;
}

std::optional<std::string> central_binomial_claim(long maxU) {
  for (long u = 1; u <= maxU; ++u) {
    BigInt c = binomial(static_cast<unsigned long>(u), static_cast<unsigned long>(u / 2));
    if (c * c * u >= ipow(BigInt(2), static_cast<unsigned long>(2 * u)))
      return "C(u, u/2)^2 u < 4^u fails at u = " + std::to_string(u);
  }
  return std::nullopt;
}

std::optional<std::string> unimodal_claim_case(std::uint64_t caseSeed) {
  Rng rng(caseSeed);
  long z = rng.range(1, 30);
  long d = rng.range(1, z);
  std::vector<long> v(static_cast<std::size_t>(z));
  long cur = rng.range(0, 50);
  for (long i = 0; i < d; ++i) {
    cur += rng.range(0, 40);
    v[static_cast<std::size_t>(i)] = cur;
  }
  for (long i = d; i < z; ++i) {
    cur -= rng.range(0, 40);
    cur = std::max(cur, 0L);
    v[static_cast<std::size_t>(i)] = cur;
  }
  // enforce unimodality after clamping
  for (long i = d; i + 1 < z; ++i)
    v[static_cast<std::size_t>(i + 1)] = std::min(v[static_cast<std::size_t>(i + 1)],
                                                  v[static_cast<std::size_t>(i)]);
  long even = 0, odd = 0, peak = 0;
  for (long i = 0; i < z; ++i) {
    long x = v[static_cast<std::size_t>(i)];
    peak = std::max(peak, x);
    // 1-based indices
    if ((i + 1) % 2 == 0)
      even += x;
    else
      odd += x;
  }
  if (std::abs(even - odd) > peak)
    return "alternating sums of a unimodal sequence differ by more than its maximum";
  return std::nullopt;
}

void suite_proposition(SuiteReport& rep, long cases, std::uint64_t seed, int threads) {
  std::vector<std::pair<long, long>> grid;
  for (long m = 2; m <= 6; ++m)
    for (long u = 4 * m * m; u <= 400; ++u) grid.emplace_back(m, u);
  run_cases(rep, static_cast<long>(grid.size()), threads, [&](long idx) {
    auto [m, u] = grid[static_cast<std::size_t>(idx)];
    return proposition_grid_case(m, u);
  });
  rep.notes.push_back("grid: all (m, u) with m in [2,6], u in [(2m)^2, 400]");
  run_cases(rep, cases, threads,
            [&](long idx) { return proposition_random_case(Rng::derive(seed, idx)); });
  run_single(rep, "central-binomial", [] { return central_binomial_claim(4096); });
  run_cases(rep, std::max(cases / 4, 50L), threads, [&](long idx) {
    return unimodal_claim_case(Rng::derive(seed ^ 0xabcdef, idx));
  });
}

// ---- savings ----------------------------------------------------------------

std::optional<std::string> savings_case(std::uint64_t caseSeed) {
  Rng rng(caseSeed);
  BettingStrategy B;
  grow_random(B, rng, static_cast<int>(1 + rng.below(40)), 12, pick_small_position);

  BettingStrategy Bp = with_savings(B); // throws if masses stop being a mass function
  if (!check_conservative(Bp)) return "savings output is not conservative";
  if (!check_savings_lowerbound(B)) return "savings capital lower bound fails";
  if (Bp.nodeCount() != B.nodeCount()) return "savings changed the tree size";
  for (int i = 0; i < B.nodeCount(); ++i) {
    int j = Bp.nodeAt(B.pathOf(i));
    if (j < 0) return "savings changed the tree structure";
    if (!B.isLeaf(i) && Bp.node(j).betPos != B.node(i).betPos)
      return "savings changed a bet position";
  }
  CapitalReport rp = capital_report(Bp);
  for (int i = 0; i < Bp.nodeCount(); ++i)
    if (!(rp.maxCapital[static_cast<std::size_t>(i)] < rp.capital[static_cast<std::size_t>(i)] + 2))
      return "max capital of the savings strategy reaches c' + 2";
  Rational leafMass = 0;
  for (int leaf : Bp.leafIndices()) leafMass += Bp.node(leaf).mass;
  if (leafMass != 1) return "leaf masses of the savings strategy do not sum to 1";
  return std::nullopt;
}

// ---- earning ----------------------------------------------------------------

std::optional<std::string> earning_case(std::uint64_t caseSeed, long idx) {
  Rng rng(caseSeed);
  switch (idx % 4) {
    case 0: {
      int n = static_cast<int>(1 + rng.below(4));
      StrategyFamily F = random_family(rng, n, 12, 10);
      Rational earn = expected_earning(F, expr_full());
      Rational expectedV = Rational(1) - pow2(-n);
      if (earn != expectedV)
        return "earning on the whole space is " + show(earn) + ", expected " + show(expectedV);
      return std::nullopt;
    }
    case 1: {
      StrategyFamily F = random_family(rng, static_cast<int>(1 + rng.below(3)), 10, 8);
      ExprPtr X = expr_empty();
      for (int c = 0; c < 3; ++c) {
        Restriction r;
        for (int e = 0; e < 2; ++e) {
          Position p = rng.range(1, 10);
          if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
        }
        X = expr_or(X, expr_cell(r));
      }
      Restriction clip;
      Position p = rng.range(1, 10);
      clip = clip.with(p, rng.below(2) == 1);
      ExprPtr Xp = expr_and(X, expr_cell(clip));
      Rational lamX = measure_expr(X), lamXp = measure_expr(Xp);
      if (lamX == 0 || lamXp == 0) return std::nullopt;
      Rational lhs = expected_earning(F, Xp) * lamXp;
      Rational rhs = expected_earning(F, X) * lamX;
      if (lhs > rhs)
        return "subset earning bound fails: earn(X') lambda(X') = " + show(lhs) + " > " + show(rhs);
      return std::nullopt;
    }
    case 2: {
      StrategyFamily F = random_family(rng, static_cast<int>(1 + rng.below(3)), 10, 8);
      std::vector<ExprPtr> parts;
      if (rng.below(2) == 0) {
        Position p = rng.range(1, 8), q = rng.range(1, 8);
        if (q == p) q = p + 1;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            parts.push_back(expr_cell(Restriction::of({{p, a == 1}, {q, b == 1}})));
      } else {
        long m = rng.range(2, 4);
        PositionSet I = interval(1, rng.range(m, 8));
        for (long o = 0; o < m; ++o) parts.push_back(expr_modulo(ModuloSet{I, m, o}));
        for (const auto& part : parts)
          if (measure_expr(part) == 0) return std::nullopt;
      }
      std::size_t pick = min_earning_part(F, parts);
      Rational partEarn = expected_earning(F, parts[pick]);
      Rational unionEarn = expected_earning(F, expr_union(parts));
      if (partEarn > unionEarn)
        return "selected part earns " + show(partEarn) + " above the union's " + show(unionEarn);
      return std::nullopt;
    }
    default: {
      StrategyFamily F = random_family(rng, static_cast<int>(1 + rng.below(3)), 10, 8);
      ExprPtr X = expr_full();
      if (rng.below(2) == 0) {
        long m = rng.range(2, 4);
        PositionSet I = interval(1, rng.range(m + 1, 10));
        ModuloSet M{I, m, rng.range(0, m - 1)};
        if (measure_modulo(M) == 0) return std::nullopt;
        X = expr_modulo(M);
      }
      Rational lamX = measure_expr(X);
      Rational d = lamX * rat(rng.range(1, 3), 4);
      LowCapitalSubset r = low_capital_subset(F, X, d);
      if (r.measureY < d) return "low-capital subset smaller than d";
      if (r.measureY < lamX - r.measureZ) return "lambda(Y) < lambda(X) - lambda(Z)";
      for (int i = 1; i <= F.size(); ++i) {
        const BettingStrategy& B = F.at(i);
        for (int leaf : B.leafIndices()) {
          if (B.capital(leaf) <= r.boundPerStrategy[static_cast<std::size_t>(i - 1)]) continue;
          Rational overlap = measure_expr(expr_and(expr_cell(B.restrictionOf(leaf)), r.Y));
          if (overlap != 0)
            return "a leaf with capital above the bound still meets Y (strategy " +
                   std::to_string(i) + ")";
        }
      }
      return std::nullopt;
    }
  }
}

// ---- kl-eta -----------------------------------------------------------------

std::optional<std::string> kl_eta_case(std::uint64_t caseSeed, long idx, long* applicable) {
  Rng rng(caseSeed);
  const long ms[3] = {2, 3, 4};
  long m = ms[rng.below(3)];
  BigInt phi = 16 * BigInt(m) * BigInt(m);
  long sizeI = phi.get_si() + static_cast<long>(rng.below(4));
  Position base = 1 + static_cast<Position>(rng.below(16));
  PositionSet I = interval(base, base + sizeI - 1);
  int n = static_cast<int>(1 + rng.below(3));

  StrategyFamily before(n);
  for (int i = 1; i <= n; ++i)
    grow_random(before.at(i), rng, static_cast<int>(rng.below(7)), 8, pick_in_set(I));
  StrategyFamily after = before;
  if (idx % 10 != 0) {
    for (int i = 1; i <= n; ++i)
      grow_random(after.at(i), rng, static_cast<int>(rng.below(9)), 8, pick_in_set(I));
  }
  ModuloSet M{I, m, rng.range(0, m - 1)};
  KlEtaReport rep = verify_kl_eta(before, after, M, phi);
  if (!rep.vacuous && rep.denominatorPositive && applicable) ++*applicable;
  if (!rep.allChecksHold()) {
    std::ostringstream msg;
    msg << "kl-eta checks failed: " << rep.to_json().dump();
    return msg.str();
  }
  return std::nullopt;
}

// ---- slim -------------------------------------------------------------------

Rational restricting_sum_of(const RestrictionMultiSet& R, std::span<const Position> I) {
  Rational x = 0;
  for (const auto& [r, mult] : R.entries())
    if (r.restrictsAll(I)) x += Rational(mult) * measure_restriction(r);
  return x;
}

std::optional<std::string> slim_case(std::uint64_t caseSeed, long idx) {
  Rng rng(caseSeed);
  long sizeI = idx % 2 == 0 ? rng.range(12, 14) : rng.range(15, 40);
  Position base = 1 + static_cast<Position>(rng.below(30));
  PositionSet I = interval(base, base + sizeI - 1);
  BigInt phi(rng.range(1, 6));
  long den = 64;
  long lo = (3 * den + sizeI - 1) / sizeI; // ceil(3 den / |I|)
  long a = rng.range(lo, den / 4);
  Rational q = rat(a, den);

  RestrictionMultiSet R;
  int members = static_cast<int>(1 + rng.below(6));
  for (int j = 0; j < members; ++j) {
    long u = static_cast<long>(rng.below(static_cast<std::uint64_t>(
        std::min(phi.get_si(), sizeI))));
    // assign all of I except u random positions
    std::vector<Position> shuffled(I.begin(), I.end());
    for (std::size_t s = shuffled.size(); s > 1; --s)
      std::swap(shuffled[s - 1], shuffled[rng.below(s)]);
    Restriction r;
    for (std::size_t s = 0; s + static_cast<std::size_t>(u) < shuffled.size(); ++s)
      r = r.with(shuffled[s], rng.below(2) == 1);
    if (rng.chance(1, 3)) {
      Position outside = I.back() + 1 + static_cast<Position>(rng.below(10));
      if (!r.assigns(outside)) r = r.with(outside, rng.below(2) == 1);
    }
    BigInt mult = rng.chance(1, 2)
                      ? BigInt(1 + static_cast<long>(rng.below(1000)))
                      : ipow(BigInt(2), rng.below(static_cast<std::uint64_t>(r.supportSize()) + 1));
    R.add(r, mult);
  }

  PositionSet Iprime = slim_to_restricted(R, I, phi, q);
  if (!is_subset(Iprime, I)) return "selected block is not a subset of I";
  if (Rational(static_cast<long>(Iprime.size())) < q * Rational(sizeI))
    return "selected block smaller than q|I|";
  Rational guarantee = (Rational(1) - 2 * q * Rational(phi)) * R.sumSize();
  Rational got = restricting_sum_of(R, Iprime);
  if (got < guarantee)
    return "restricting sum-size " + show(got) + " below the guarantee " + show(guarantee);

  if (sizeI <= 14) {
    long blockLen = static_cast<long>(Iprime.size());
    Rational best = -1;
    std::vector<int> pick;
    std::function<void(std::size_t, long)> rec = [&](std::size_t from, long remaining) {
      if (remaining == 0) {
        PositionSet subset;
        for (int pi : pick) subset.push_back(I[static_cast<std::size_t>(pi)]);
        Rational v = restricting_sum_of(R, subset);
        if (v > best) best = v;
        return;
      }
      for (std::size_t p = from; p + static_cast<std::size_t>(remaining) <= I.size(); ++p) {
        pick.push_back(static_cast<int>(p));
        rec(p + 1, remaining - 1);
        pick.pop_back();
      }
    };
    rec(0, blockLen);
    if (got > best) return "construction exceeded the exhaustive maximum (bug in the oracle?)";
    if (best < guarantee) return "exhaustive maximum itself violates the guarantee";
  }
  return std::nullopt;
}

// ---- grow -------------------------------------------------------------------

Restriction restrict_all_except(const PositionSet& I, Position hole, Rng& rng) {
  std::vector<std::pair<Position, bool>> entries;
  entries.reserve(I.size());
  for (Position p : I)
    if (p != hole) entries.emplace_back(p, rng.below(2) == 1);
  return Restriction::fromEntries(std::move(entries));
}

long rational_ceil(const Rational& x) {
  BigInt c;
  mpz_cdiv_q(c.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  return c.get_si();
}

std::optional<std::string> grow_case(std::uint64_t caseSeed, long idx) {
  Rng rng(caseSeed);
  BigInt phi(2);
  bool trivial = idx % 3 == 0; // lean mass already at or below delta
  Rational delta = trivial || rng.chance(1, 2) ? rat(1, 4) : rat(5, 16);
  Rational deltaPrime = delta * (Rational(1) - 2 * delta);

  Rational leanTarget;
  if (trivial) {
    leanTarget = delta * rat(1 + static_cast<long>(rng.below(3)), 4); // <= 3/4 delta
  } else {
    long gMin = 1;
    while (Rational(gMin) * deltaPrime <= delta) ++gMin;
    // lean target in (delta, gMin deltaPrime]
    Rational hi = Rational(gMin) * deltaPrime;
    leanTarget = delta + (hi - delta) * rat(1 + static_cast<long>(rng.below(7)), 8);
  }
  long g = std::max(rational_ceil(leanTarget / deltaPrime), 1L);
  // smallest size with |I| > (phi/delta)^(g+2)
  Rational bound = Rational(1);
  Rational baseRatio = Rational(phi) / delta;
  for (long e = 0; e < g + 2; ++e) bound *= baseRatio;
  long sizeI = rational_ceil(bound) + 1 + static_cast<long>(rng.below(32));
  PositionSet I = interval(1, sizeI);

  RestrictionMultiSet R;
  // Lean members: exactly one unrestricted position each (phi = 2).
  int members = static_cast<int>(1 + rng.below(4));
  Rational remaining = leanTarget;
  for (int j = 0; j < members; ++j) {
    Rational share = j + 1 == members ? remaining : remaining * rat(1, 2);
    remaining -= share;
    Position hole = I[rng.below(I.size())];
    Restriction r = restrict_all_except(I, hole, rng);
    // multiplicity = floor(share / 2^-(|I|-1)); adjusts the share by < 2^-1000
    Rational scaled = share * pow2(sizeI - 1);
    BigInt mult = scaled.get_num() / scaled.get_den();
    if (mult < 1) mult = 1;
    R.add(r, mult);
  }
  // Occasionally members restricting the entire interval.
  if (rng.chance(1, 2)) {
    Restriction r = restrict_all_except(I, 0, rng);
    R.add(r, ipow(BigInt(2), rng.below(static_cast<std::uint64_t>(sizeI / 2))));
  }
  Rational x = restricting_sum_of(R, I);

  GrowResult res = grow_restricted(R, I, phi, delta, x);
  if (res.iterations > g)
    return "used " + std::to_string(res.iterations) + " iterations, bound " + std::to_string(g);
  Rational qPow = Rational(1);
  Rational q = delta / Rational(phi);
  for (int e = 0; e < res.iterations; ++e) qPow *= q;
  if (Rational(static_cast<long>(res.I.size())) < qPow * Rational(sizeI))
    return "|I'| fell below (delta/phi)^k |I|";
  RestrictionMultiSet lean;
  for (const auto& [r, mult] : R.entries())
    if (classify(r, res.I, phi) == Classification::Lean) lean.add(r, mult);
  if (lean.sumSize() > delta) return "lean sum-size above delta after the construction";
  Rational restrict = restricting_sum_of(R, res.I);
  if (restrict < x + Rational(res.iterations) * deltaPrime)
    return "restricting sum-size " + show(restrict) + " below x + k delta' = " +
           show(x + Rational(res.iterations) * deltaPrime);
  if (trivial && res.iterations != 0) return "expected the trivial case to keep I";
  return std::nullopt;
}

// ---- good-mod ---------------------------------------------------------------

std::optional<std::string> good_mod_case(std::uint64_t caseSeed) {
  Rng rng(caseSeed);
  long m = rng.range(2, 5);
  long L = m * m + rng.range(0, 30);
  Position base = 1 + static_cast<Position>(rng.below(20));
  PositionSet I = interval(base, base + L - 1);
  int n = static_cast<int>(1 + rng.below(3));
  Rng famRng(caseSeed ^ 0x5eed);
  StrategyFamily F(n);
  for (int i = 1; i <= n; ++i)
    grow_random(F.at(i), famRng, static_cast<int>(famRng.below(10)), 8, pick_in_set(I));

  Rational delta = rng.chance(1, 2) ? rat(1, 4) : rat(3, 8);
  Rational c = rng.chance(1, 2) ? rat(3, 2) : Rational(2);

  RestrictionMultiSet theta;
  int cells = static_cast<int>(rng.below(6));
  for (int j = 0; j < cells; ++j) {
    Restriction r;
    int len = static_cast<int>(3 + rng.below(9));
    for (int e = 0; e < len; ++e) {
      Position p = rng.chance(3, 4) ? I[rng.below(I.size())]
                                    : I.back() + 1 + static_cast<Position>(rng.below(16));
      if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
    }
    // accept the cell only while the union stays strictly below delta
    RestrictionMultiSet candidate = theta;
    candidate.add(r);
    ExprPtr u = expr_empty();
    for (const auto& [tr, mult] : candidate.entries()) u = expr_or(u, expr_cell(tr));
    if (!(measure_expr(u) < delta)) break;
    theta = std::move(candidate);
  }

  long o = find_good_remainder(F, theta, I, m, c, delta);
  ModuloSet M{I, m, o};
  Rational lam = measure_modulo(M);
  if (lam == 0) return "selected remainder has measure zero";
  Rational earn = expected_earning(F, M);
  Rational earnCap = Rational(1) / (Rational(1) - Rational(1) / c);
  if (earn > earnCap) return "earning " + show(earn) + " above the cap " + show(earnCap);
  ExprPtr u = expr_empty();
  for (const auto& [tr, mult] : theta.entries()) u = expr_or(u, expr_cell(tr));
  Rational cond = measure_expr(expr_and(u, expr_modulo(M))) / lam;
  if (cond > c * delta) return "conditional theta measure above c delta";
  return std::nullopt;
}

// ---- chooser-claims ---------------------------------------------------------

std::optional<std::string> cl_size_scan() {
  for (int k = 0; k <= 16; ++k) {
    ChooserParams p = params_from_k(k);
    Rational total = Rational(8 * p.n + 1) * rat(4, 3) / Rational(p.m);
    if (!(total < pow2(-k)))
      return "total measure bound fails at k = " + std::to_string(k) + ": " + show(total);
  }
  return std::nullopt;
}

std::optional<std::string> params_spot_values() {
  ChooserParams p0 = params_from_k(0);
  if (p0.m != 256 || p0.n != 12) return "k=0 gives m=" + to_string(p0.m);
  if (p0.phi != ipow(BigInt(2), 20)) return "k=0 phi wrong";
  if (p0.ell != ipow(BigInt(2), 2178)) return "k=0 ell wrong";
  if (p0.hBound(1) != Rational(512)) return "h_1 != 512";
  if (p0.xi() != rat(1, 4)) return "xi != 1/4";
  ChooserParams p1 = params_from_k(1);
  if (p1.m != 1024 || p1.n != 14 || p1.phi != ipow(BigInt(2), 24) ||
      p1.ell != ipow(BigInt(2), 2990))
    return "k=1 parameter values wrong";
  ChooserParams p4 = params_from_k(4);
  if (p4.m != ipow(BigInt(2), 16) || p4.n != 20) return "k=4 parameter values wrong";
  return std::nullopt;
}

std::optional<std::string> desk_game_claims(const ChooserParams& params,
                                            const std::string& gambler, std::uint64_t seed,
                                            int horizon) {
  auto g = make_gambler(gambler, seed, params);
  GameOptions opt;
  opt.horizon = horizon;
  opt.gamblerName = gambler;
  opt.seed = seed;
  GameTranscript tr = run_game(params, *g, opt);
  if (static_cast<int>(tr.emissions.size()) > 8 * params.n + 1)
    return gambler + ": more than 8n+1 chosen sets";
  if (!tr.allRequiredChecksPassed) {
    std::string detail;
    for (const auto& f : tr.failures) detail += f + "; ";
    return gambler + ": required checks failed: " + detail;
  }
  Rational budget = Rational(8 * params.n + 1) * rat(4, 3) / Rational(params.m);
  if (tr.turns.back().chosenMeasureTotal > budget)
    return gambler + ": chosen measure exceeds the claim budget";
  return std::nullopt;
}

void suite_chooser_claims(SuiteReport& rep, long cases, std::uint64_t seed, int threads) {
  run_single(rep, "cl-size-scan", cl_size_scan);
  run_single(rep, "params-spot-values", params_spot_values);
  struct GameCase {
    ChooserParams params;
    std::string gambler;
    std::uint64_t seed;
  };
  std::vector<GameCase> games;
  long randomSeeds = std::max(1L, std::min(cases / 50, 4L));
  for (const auto& params : {desk_params_calm(), desk_params_active()}) {
    games.push_back({params, "null", 0});
    games.push_back({params, "parity-chaser", 0});
    games.push_back({params, "greedy-doubler", 0});
    for (long s = 0; s < randomSeeds; ++s) {
      games.push_back({params, "random", Rng::derive(seed, static_cast<std::uint64_t>(s))});
      games.push_back(
          {params, "savings:random", Rng::derive(seed ^ 0xf00d, static_cast<std::uint64_t>(s))});
    }
  }
  run_cases(rep, static_cast<long>(games.size()), threads, [&](long idx) {
    const GameCase& gc = games[static_cast<std::size_t>(idx)];
    return desk_game_claims(gc.params, gc.gambler, gc.seed, 1500);
  });
  rep.notes.push_back("desk games at horizon 1500; full-horizon runs live in the acceptance suite");
}

} // namespace

ChooserParams desk_params_calm() {
  ChooserParams p;
  p.m = 4;
  p.phi = 256; // 16 m^2, xi = 1/4
  p.ell = 320;
  p.n = 2;
  p.validate();
  return p;
}

ChooserParams desk_params_active() {
  ChooserParams p;
  p.m = 4;
  p.phi = 256;
  p.ell = 262; // barely wider than phi: seven bets inside I already slim a leaf
  p.n = 2;
  p.validate();
  return p;
}

std::vector<std::string> suite_names() {
  return {"proposition", "savings", "earning", "kl-eta", "slim", "grow", "good-mod",
          "chooser-claims"};
}

SuiteReport run_suite(const std::string& name, long cases, std::uint64_t seed, int threads) {
  SuiteReport rep;
  rep.suite = name;
  rep.seed = seed;
  if (name == "proposition") {
    suite_proposition(rep, cases, seed, threads);
  } else if (name == "savings") {
    run_cases(rep, cases, threads,
              [&](long idx) { return savings_case(Rng::derive(seed, idx)); });
  } else if (name == "earning") {
    run_cases(rep, cases, threads,
              [&](long idx) { return earning_case(Rng::derive(seed, idx), idx); });
  } else if (name == "kl-eta") {
    std::atomic<long> applicable{0};
    std::vector<long> locals(static_cast<std::size_t>(cases), 0);
    run_cases(rep, cases, threads, [&](long idx) {
      long local = 0;
      auto out = kl_eta_case(Rng::derive(seed, idx), idx, &local);
      if (local) applicable.fetch_add(local);
      return out;
    });
    rep.notes.push_back("applicable (non-vacuous, positive denominator): " +
                        std::to_string(applicable.load()) + "/" + std::to_string(cases));
  } else if (name == "slim") {
    run_cases(rep, cases, threads,
              [&](long idx) { return slim_case(Rng::derive(seed, idx), idx); });
  } else if (name == "grow") {
    run_cases(rep, cases, threads,
              [&](long idx) { return grow_case(Rng::derive(seed, idx), idx); });
  } else if (name == "good-mod") {
    run_cases(rep, cases, threads,
              [&](long idx) { return good_mod_case(Rng::derive(seed, idx)); });
  } else if (name == "chooser-claims") {
    suite_chooser_claims(rep, cases, seed, threads);
  } else {
    throw ParseError("unknown suite: " + name);
  }
  return rep;
}

} // namespace betgame

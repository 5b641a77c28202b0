#include <doctest.h>

#include "betgame/errors.hpp"
#include "betgame/measure.hpp"
#include "betgame/rng.hpp"
#include "oracles.hpp"

using namespace betgame;

TEST_CASE("measure of a restriction cell") {
  CHECK(measure_restriction(Restriction()) == 1);
  CHECK(measure_restriction(Restriction::of({{1, true}, {5, false}, {9, true}})) == rat(1, 8));
  // two one-position cells on the same position partition the space
  RestrictionMultiSet R;
  R.add(Restriction::of({{4, false}}));
  R.add(Restriction::of({{4, true}}));
  CHECK(R.sumSize() == 1);
}

TEST_CASE("conditional measure of a modulo set") {
  CHECK(measure_modulo_given_restriction(ModuloSet{interval(1, 3), 2, 1}, Restriction()) ==
        rat(1, 2));
  CHECK(measure_modulo_given_restriction(ModuloSet{interval(1, 4), 3, 0}, Restriction()) ==
        rat(5, 16));
  CHECK(measure_modulo_given_restriction(ModuloSet{interval(1, 3), 2, 0},
                                         Restriction::of({{1, true}})) == rat(1, 2));
  // restriction cell disjoint from the modulo set
  Restriction rAll = Restriction::of({{1, false}, {2, false}});
  CHECK(measure_modulo_given_restriction(ModuloSet{interval(1, 2), 2, 1}, rAll) == 0);
}

TEST_CASE("binomial residue sums against the direct definition") {
  Rng rng(5);
  for (int t = 0; t < 120; ++t) {
    long u = rng.range(0, 60);
    long m = rng.range(1, 7);
    long r = rng.range(0, m - 1);
    BigInt direct = 0;
    for (long i = r % m; i <= u; i += m)
      direct += binomial(static_cast<unsigned long>(u), static_cast<unsigned long>(i));
    if (r % m > u) direct = 0;
    CHECK(binomial_residue_sum(u, m, r) == direct);
  }
}

TEST_CASE("remainder classes partition conditionally on any restriction") {
  Rng rng(17);
  for (int t = 0; t < 150; ++t) {
    long m = rng.range(2, 6);
    PositionSet I = interval(1, rng.range(1, 24));
    Restriction r;
    for (int e = 0; e < static_cast<int>(rng.below(10)); ++e) {
      Position p = rng.range(1, 30);
      if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
    }
    Rational sum = 0;
    for (long o = 0; o < m; ++o)
      sum += measure_modulo_given_restriction(ModuloSet{I, m, o}, r);
    CHECK(sum == 1);
  }
}

TEST_CASE("xi approximation") {
  CHECK(xi_approx(rat(1, 3), rat(1, 3), rat(1, 7)));
  CHECK(xi_approx(rat(5, 16), rat(1, 3), rat(1, 9)));
  CHECK(!xi_approx(Rational(0), rat(1, 3), rat(1, 4)));
  CHECK_THROWS_AS(xi_approx(Rational(1), Rational(1), Rational(1)), PreconditionError);
  CHECK_THROWS_AS(xi_approx(Rational(1), Rational(1), rat(-1, 2)), PreconditionError);
}

TEST_CASE("modulo independence checks") {
  CHECK(check_modulo_independence(interval(1, 16), 2, rat(1, 2), Restriction()));
  CHECK(check_modulo_independence(interval(1, 64), 2, rat(1, 4), Restriction()));
  CHECK(check_modulo_independence(interval(1, 9), 3, Rational(1), Restriction()));
  CHECK_THROWS_AS(check_modulo_independence(interval(1, 8), 3, Rational(1), Restriction()),
                  PreconditionError);
  CHECK_THROWS_AS(check_modulo_independence(interval(1, 100), 2, Rational(0), Restriction()),
                  PreconditionError);
  CHECK(check_modulo_independence_sqrt(interval(1, 64), 2, Restriction()));
  CHECK_THROWS_AS(check_modulo_independence_sqrt(interval(1, 4), 2, Restriction()),
                  PreconditionError);
}

TEST_CASE("expression measures on pinned cases") {
  CHECK(measure_expr(expr_not(expr_cell(Restriction()))) == 0);
  CHECK(measure_expr(expr_or(expr_cell(Restriction::of({{1, false}})),
                             expr_cell(Restriction::of({{1, true}})))) == 1);
  CHECK(measure_expr(expr_and(expr_modulo(ModuloSet{interval(1, 2), 2, 0}),
                              expr_cell(Restriction::of({{1, true}})))) == rat(1, 4));
  CHECK(measure_expr(expr_diff(expr_full(), expr_modulo(ModuloSet{interval(1, 3), 2, 1}))) ==
        rat(1, 2));
}

TEST_CASE("expression measure rejects positions beyond the universe") {
  ExprPtr e = expr_cell(Restriction::of({{20, true}}));
  CHECK_THROWS_AS(measure_expr(e, PositionUniverse{10}), UniverseError);
  CHECK(measure_expr(e, PositionUniverse{20}) == rat(1, 2));
}

namespace {

ExprPtr random_expr(Rng& rng, long L, int depth) {
  if (depth == 0 || rng.chance(2, 5)) {
    if (rng.chance(2, 5)) {
      long m = rng.range(2, 4);
      PositionSet I;
      for (Position p = 1; p <= L; ++p)
        if (rng.chance(1, 2)) I.push_back(p);
      if (I.empty()) I.push_back(rng.range(1, L));
      return expr_modulo(ModuloSet{I, m, rng.range(0, m - 1)});
    }
    Restriction r;
    for (int e = 0; e < static_cast<int>(rng.below(4)); ++e) {
      Position p = rng.range(1, L);
      if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
    }
    return expr_cell(r);
  }
  ExprPtr a = random_expr(rng, L, depth - 1);
  ExprPtr b = random_expr(rng, L, depth - 1);
  switch (rng.below(4)) {
    case 0: return expr_and(a, b);
    case 1: return expr_or(a, b);
    case 2: return expr_diff(a, b);
    default: return expr_not(a);
  }
}

} // namespace

TEST_CASE("expression measure agrees with brute-force enumeration") {
  Rng rng(23);
  for (int t = 0; t < 150; ++t) {
    long L = rng.range(2, 12);
    ExprPtr e = random_expr(rng, L, 3);
    CHECK(measure_expr(e, PositionUniverse{L}) == oracles::measure_bruteforce(e, L));
  }
  // a couple of larger universes
  for (int t = 0; t < 10; ++t) {
    long L = 16;
    ExprPtr e = random_expr(rng, L, 3);
    CHECK(measure_expr(e, PositionUniverse{L}) == oracles::measure_bruteforce(e, L));
  }
}

TEST_CASE("grouped cell unions agree with the expression engine") {
  Rng rng(31);
  for (int t = 0; t < 120; ++t) {
    long L = rng.range(3, 10);
    // groups: random strategies' worth of disjoint cells via a fixed position split
    std::vector<std::vector<Restriction>> groups;
    int G = static_cast<int>(1 + rng.below(3));
    for (int g = 0; g < G; ++g) {
      Position split = rng.range(1, L);
      std::vector<Restriction> cells;
      for (int bit = 0; bit < 2; ++bit) {
        if (rng.chance(1, 4)) continue;
        Restriction r = Restriction::of({{split, bit == 1}});
        for (int e = 0; e < static_cast<int>(rng.below(3)); ++e) {
          Position p = rng.range(1, L);
          if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
        }
        cells.push_back(r);
      }
      groups.push_back(cells);
    }
    std::optional<ModuloSet> within;
    if (rng.chance(1, 2)) within = ModuloSet{interval(1, L), rng.range(2, 4), 0};

    ExprPtr u = expr_empty();
    for (const auto& g : groups)
      for (const auto& cell : g) u = expr_or(u, expr_cell(cell));
    if (within) u = expr_and(u, expr_modulo(*within));
    CHECK(measure_cells_union_in(groups, within) == measure_expr(u));
  }
}

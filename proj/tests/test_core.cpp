#include <doctest.h>

#include "betgame/core.hpp"
#include "betgame/errors.hpp"
#include "betgame/rng.hpp"

using namespace betgame;

TEST_CASE("restriction assignment and lookup") {
  Restriction r = Restriction::of({{3, true}, {1, false}});
  CHECK(r.supportSize() == 2);
  CHECK(r.at(1) == false);
  CHECK(r.at(3) == true);
  CHECK(!r.at(2).has_value());
  CHECK_THROWS_AS(r.with(3, false), PreconditionError);
  CHECK(r.without(3).supportSize() == 1);
  CHECK(r.without(7) == r);
  CHECK_THROWS_AS(Restriction::fromEntries({{2, true}, {2, false}}), PreconditionError);
}

TEST_CASE("ns_unrestricted counts") {
  PositionSet I5 = interval(1, 5);
  CHECK(ns_unrestricted(Restriction(), I5) == 5);

  Restriction r12 = Restriction::of({{1, false}, {2, true}});
  PositionSet I14 = interval(1, 4);
  CHECK(ns_unrestricted(r12, I14) == 2);

  Restriction r1234 = Restriction::of({{1, false}, {2, true}, {3, false}, {4, true}});
  PositionSet I23 = interval(2, 3);
  CHECK(ns_unrestricted(r1234, I23) == 0);
}

TEST_CASE("classification") {
  PositionSet I10 = interval(1, 10);
  CHECK(classify(Restriction(), I10, 3) == Classification::Chubby);

  Restriction all;
  for (Position p : I10) all = all.with(p, p % 2 == 0);
  CHECK(classify(all, I10, 3) == Classification::RestrictsEntire);
  CHECK(classify(all, I10, 1) == Classification::RestrictsEntire);

  Restriction eight;
  for (Position p = 1; p <= 8; ++p) eight = eight.with(p, false);
  CHECK(ns_unrestricted(eight, I10) == 2);
  CHECK(classify(eight, I10, 3) == Classification::Lean);
  CHECK(is_slim(eight, I10, 3));
  CHECK(!is_chubby(eight, I10, 3));
}

TEST_CASE("classification is monotone under new assignments") {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    PositionSet I = interval(1, rng.range(1, 12));
    BigInt phi(rng.range(1, 6));
    Restriction r;
    bool wasSlim = false;
    for (int step = 0; step < 14; ++step) {
      bool slim = is_slim(r, I, phi);
      if (wasSlim) CHECK(slim); // never back to chubby
      wasSlim = slim;
      Position p = rng.range(1, 14);
      if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
    }
  }
}

TEST_CASE("multiset join") {
  RestrictionMultiSet a, b;
  CHECK(join(a, b).empty());

  Restriction r = Restriction::of({{2, true}});
  a.add(r);
  b.add(r);
  RestrictionMultiSet j = join(a, b);
  CHECK(j.distinctCount() == 1);
  CHECK(j.entries()[0].second == 2);
  CHECK(j.sumSize() == rat(1, 1));

  // Leaf-restrictions of n initial strategies join to sum-size n.
  RestrictionMultiSet leaves;
  int n = 5;
  for (int i = 0; i < n; ++i) leaves.add(Restriction());
  CHECK(leaves.sumSize() == Rational(n));
}

TEST_CASE("sum-size is additive under join") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    RestrictionMultiSet a, b;
    for (int e = 0; e < 4; ++e) {
      Restriction r;
      for (int q = 0; q < static_cast<int>(rng.below(4)); ++q) {
        Position p = rng.range(1, 8);
        if (!r.assigns(p)) r = r.with(p, rng.below(2) == 1);
      }
      BigInt mult(1 + static_cast<long>(rng.below(9)));
      if (rng.below(2))
        a.add(r, mult);
      else
        b.add(r, mult);
    }
    CHECK(join(a, b).sumSize() == a.sumSize() + b.sumSize());
  }
}

TEST_CASE("multiplicities must be positive") {
  RestrictionMultiSet R;
  CHECK_THROWS_AS(R.add(Restriction(), 0), PreconditionError);
  CHECK_THROWS_AS(R.add(Restriction(), -3), PreconditionError);
}

TEST_CASE("modulo set validation") {
  CHECK_THROWS_AS((ModuloSet{{}, 2, 0}.validate()), PreconditionError);
  CHECK_THROWS_AS((ModuloSet{interval(1, 3), 1, 0}.validate()), PreconditionError);
  CHECK_THROWS_AS((ModuloSet{interval(1, 3), 3, 3}.validate()), PreconditionError);
  ModuloSet ok{interval(1, 3), 3, 2};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("serialization round trips") {
  Restriction r = Restriction::of({{4, true}, {9, false}, {2, true}});
  CHECK(Restriction::from_json(r.to_json()) == r);
  CHECK(r.to_json().dump() == "{\"2\":1,\"4\":1,\"9\":0}");

  ModuloSet M{make_position_set({5, 1, 3}), 4, 2};
  CHECK(ModuloSet::from_json(M.to_json()) == M);

  CHECK(to_string(rat(3, 4)) == "3/4");
  CHECK(to_string(rat(5, 1)) == "5/1");
  CHECK(to_string(rat(-2, 4)) == "-1/2");
  CHECK(rational_from_string("6/8") == rat(3, 4));
  CHECK(rational_from_string("7") == Rational(7));
  CHECK_THROWS_AS(rational_from_string("x/y"), ParseError);

  RestrictionMultiSet R;
  R.add(r, BigInt("123456789012345678901234567890"));
  R.add(Restriction(), 2);
  CHECK(RestrictionMultiSet::from_json(R.to_json()) == R);
}

TEST_CASE("position set helpers") {
  PositionSet I = make_position_set({5, 1, 3, 3});
  CHECK(I == PositionSet{1, 3, 5});
  CHECK(position_set_contains(I, 3));
  CHECK(!position_set_contains(I, 2));
  CHECK(is_subset(PositionSet{1, 5}, I));
  CHECK(!is_subset(PositionSet{1, 2}, I));
  CHECK(interval(3, 2).empty());
}

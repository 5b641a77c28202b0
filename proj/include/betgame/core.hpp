#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "betgame/json.hpp"
#include "betgame/rational.hpp"

namespace betgame {

// Positions are 1-based indices into an infinite binary sequence.
using Position = std::int64_t;

// Position sets are kept sorted and duplicate-free.
using PositionSet = std::vector<Position>;

PositionSet make_position_set(std::vector<Position> v);
PositionSet interval(Position lo, Position hi); // [lo, hi]
bool position_set_contains(std::span<const Position> I, Position p);
bool is_subset(std::span<const Position> sub, std::span<const Position> super);

// All positions relevant to a computation lie in [1, bound].
struct PositionUniverse {
  Position bound = 0;
};

// A finite partial assignment of bits to positions. Positions outside the
// support are unconstrained; the consistent sequences form a clopen set.
class Restriction {
 public:
  Restriction() = default;

  static Restriction of(std::initializer_list<std::pair<Position, bool>> entries);

  // Bulk constructor; entries need not be sorted, duplicates are rejected.
  static Restriction fromEntries(std::vector<std::pair<Position, bool>> entries);

  bool assigns(Position p) const;
  std::optional<bool> at(Position p) const;

  // Returns a copy with p assigned; p must be unassigned.
  Restriction with(Position p, bool bit) const;

  // Returns a copy with p unassigned (no-op when p is not in the support).
  Restriction without(Position p) const;

  std::size_t supportSize() const { return entries_.size(); }
  bool emptySupport() const { return entries_.empty(); }
  const std::vector<std::pair<Position, bool>>& entries() const { return entries_; }
  Position maxPosition() const; // 0 when empty

  long unrestrictedIn(std::span<const Position> I) const;
  long assignedIn(std::span<const Position> I) const;
  long onesIn(std::span<const Position> I) const;
  bool restrictsAll(std::span<const Position> I) const;

  // Intersection of the two clopen sets, as a restriction; nullopt when the
  // assignments conflict (empty intersection).
  std::optional<Restriction> merged(const Restriction& other) const;

  bool operator==(const Restriction&) const = default;
  std::strong_ordering operator<=>(const Restriction&) const = default;

  Json to_json() const;
  static Restriction from_json(const Json& j);

 private:
  std::vector<std::pair<Position, bool>> entries_; // sorted by position
};

long ns_unrestricted(const Restriction& r, std::span<const Position> I);

enum class Classification { Chubby, Lean, RestrictsEntire };

// Chubby iff at least phi positions of I are unrestricted; RestrictsEntire iff
// none are; Lean otherwise. Slim = Lean or RestrictsEntire.
Classification classify(const Restriction& r, std::span<const Position> I, const BigInt& phi);
bool is_chubby(const Restriction& r, std::span<const Position> I, const BigInt& phi);
bool is_slim(const Restriction& r, std::span<const Position> I, const BigInt& phi);

const char* to_string(Classification c);

// Sequences whose count of ones on positions I is congruent to o mod m.
struct ModuloSet {
  PositionSet I;
  long m = 2;
  long o = 0;

  void validate() const; // throws PreconditionError on bad fields

  bool operator==(const ModuloSet&) const = default;

  Json to_json() const;
  static ModuloSet from_json(const Json& j);
};

// Multiset of finite restrictions. Multiplicities are big integers: sum-sizes
// of interest are ~1 while member measures can be 2^-huge.
class RestrictionMultiSet {
 public:
  RestrictionMultiSet() = default;

  void add(const Restriction& r, const BigInt& multiplicity = 1);

  // Bulk constructor with unit multiplicities; O(n log n).
  static RestrictionMultiSet fromCells(std::vector<Restriction> cells);

  bool empty() const { return entries_.empty(); }
  std::size_t distinctCount() const { return entries_.size(); }
  const std::vector<std::pair<Restriction, BigInt>>& entries() const { return entries_; }

  // lambda^+: multiplicity-weighted sum of member measures.
  Rational sumSize() const;

  bool operator==(const RestrictionMultiSet&) const = default;

  Json to_json() const;
  static RestrictionMultiSet from_json(const Json& j);

 private:
  std::vector<std::pair<Restriction, BigInt>> entries_; // sorted by restriction, mult >= 1
};

RestrictionMultiSet join(const RestrictionMultiSet& a, const RestrictionMultiSet& b);

// Rationals serialize as "num/den" strings.
Json rational_to_json(const Rational& q);
Rational rational_from_json(const Json& j);

} // namespace betgame

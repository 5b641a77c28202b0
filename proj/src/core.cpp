#include "betgame/core.hpp"

#include <algorithm>

#include "betgame/errors.hpp"

namespace betgame {

PositionSet make_position_set(std::vector<Position> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

PositionSet interval(Position lo, Position hi) {
  PositionSet v;
  if (hi < lo) return v;
  v.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (Position p = lo; p <= hi; ++p) v.push_back(p);
  return v;
}

bool position_set_contains(std::span<const Position> I, Position p) {
  return std::binary_search(I.begin(), I.end(), p);
}

bool is_subset(std::span<const Position> sub, std::span<const Position> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

Restriction Restriction::of(std::initializer_list<std::pair<Position, bool>> entries) {
  Restriction r;
  for (const auto& [p, b] : entries) r = r.with(p, b);
  return r;
}

Restriction Restriction::fromEntries(std::vector<std::pair<Position, bool>> entries) {
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].first == entries[i - 1].first)
      throw PreconditionError("duplicate position in restriction entries");
  if (!entries.empty() && entries.front().first < 1)
    throw PreconditionError("positions are 1-based");
  Restriction r;
  r.entries_ = std::move(entries);
  return r;
}

bool Restriction::assigns(Position p) const { return at(p).has_value(); }

std::optional<bool> Restriction::at(Position p) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), p,
                             [](const auto& e, Position q) { return e.first < q; });
  if (it != entries_.end() && it->first == p) return it->second;
  return std::nullopt;
}

Restriction Restriction::with(Position p, bool bit) const {
  if (p < 1) throw PreconditionError("positions are 1-based");
  if (assigns(p)) throw PreconditionError("position already assigned in restriction");
  Restriction r = *this;
  auto it = std::lower_bound(r.entries_.begin(), r.entries_.end(), p,
                             [](const auto& e, Position q) { return e.first < q; });
  r.entries_.insert(it, {p, bit});
  return r;
}

Restriction Restriction::without(Position p) const {
  Restriction r = *this;
  auto it = std::lower_bound(r.entries_.begin(), r.entries_.end(), p,
                             [](const auto& e, Position q) { return e.first < q; });
  if (it != r.entries_.end() && it->first == p) r.entries_.erase(it);
  return r;
}

Position Restriction::maxPosition() const {
  return entries_.empty() ? 0 : entries_.back().first;
}

long Restriction::assignedIn(std::span<const Position> I) const {
  long count = 0;
  auto it = entries_.begin();
  for (Position p : I) {
    while (it != entries_.end() && it->first < p) ++it;
    if (it == entries_.end()) break;
    if (it->first == p) ++count;
  }
  return count;
}

long Restriction::unrestrictedIn(std::span<const Position> I) const {
  return static_cast<long>(I.size()) - assignedIn(I);
}

long Restriction::onesIn(std::span<const Position> I) const {
  long count = 0;
  auto it = entries_.begin();
  for (Position p : I) {
    while (it != entries_.end() && it->first < p) ++it;
    if (it == entries_.end()) break;
    if (it->first == p && it->second) ++count;
  }
  return count;
}

bool Restriction::restrictsAll(std::span<const Position> I) const {
  return unrestrictedIn(I) == 0;
}

std::optional<Restriction> Restriction::merged(const Restriction& other) const {
  Restriction out;
  out.entries_.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin(), ae = entries_.end();
  auto b = other.entries_.begin(), be = other.entries_.end();
  while (a != ae || b != be) {
    if (b == be || (a != ae && a->first < b->first)) {
      out.entries_.push_back(*a++);
    } else if (a == ae || b->first < a->first) {
      out.entries_.push_back(*b++);
    } else {
      if (a->second != b->second) return std::nullopt;
      out.entries_.push_back(*a);
      ++a;
      ++b;
    }
  }
  return out;
}

Json Restriction::to_json() const {
  Json j = Json::object();
  for (const auto& [p, b] : entries_) j[std::to_string(p)] = b ? 1 : 0;
  return j;
}

Restriction Restriction::from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("restriction must be a JSON object");
  std::vector<std::pair<Position, bool>> entries;
  for (const auto& [key, val] : j.items()) {
    Position p = 0;
    try {
      p = std::stoll(key);
    } catch (...) {
      throw ParseError("bad restriction position: " + key);
    }
    int bit = val.get<int>();
    if (p < 1 || (bit != 0 && bit != 1)) throw ParseError("bad restriction entry");
    entries.emplace_back(p, bit == 1);
  }
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].first == entries[i - 1].first) throw ParseError("duplicate restriction position");
  Restriction r;
  for (const auto& [p, b] : entries) r = r.with(p, b);
  return r;
}

long ns_unrestricted(const Restriction& r, std::span<const Position> I) {
  return r.unrestrictedIn(I);
}

Classification classify(const Restriction& r, std::span<const Position> I, const BigInt& phi) {
  long u = r.unrestrictedIn(I);
  if (phi <= u) return Classification::Chubby;
  if (u == 0) return Classification::RestrictsEntire;
  return Classification::Lean;
}

bool is_chubby(const Restriction& r, std::span<const Position> I, const BigInt& phi) {
  return classify(r, I, phi) == Classification::Chubby;
}

bool is_slim(const Restriction& r, std::span<const Position> I, const BigInt& phi) {
  return classify(r, I, phi) != Classification::Chubby;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Chubby: return "chubby";
    case Classification::Lean: return "lean";
    case Classification::RestrictsEntire: return "restricts-entire";
  }
  return "?";
}

void ModuloSet::validate() const {
  if (I.empty()) throw PreconditionError("modulo set needs a nonempty position set");
  if (m < 2) throw PreconditionError("modulus must be at least 2");
  if (o < 0 || o >= m) throw PreconditionError("remainder out of range");
  if (!std::is_sorted(I.begin(), I.end()) || std::adjacent_find(I.begin(), I.end()) != I.end())
    throw PreconditionError("position set must be sorted and duplicate-free");
  if (I.front() < 1) throw PreconditionError("positions are 1-based");
}

Json ModuloSet::to_json() const {
  Json j;
  j["I"] = I;
  j["m"] = m;
  j["o"] = o;
  return j;
}

ModuloSet ModuloSet::from_json(const Json& j) {
  ModuloSet M;
  M.I = j.at("I").get<std::vector<Position>>();
  M.m = j.at("m").get<long>();
  M.o = j.at("o").get<long>();
  M.validate();
  return M;
}

void RestrictionMultiSet::add(const Restriction& r, const BigInt& multiplicity) {
  if (multiplicity < 1) throw PreconditionError("multiplicity must be positive");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), r,
                             [](const auto& e, const Restriction& q) { return e.first < q; });
  if (it != entries_.end() && it->first == r) {
    it->second += multiplicity;
  } else {
    entries_.insert(it, {r, multiplicity});
  }
}

RestrictionMultiSet RestrictionMultiSet::fromCells(std::vector<Restriction> cells) {
  std::sort(cells.begin(), cells.end());
  RestrictionMultiSet out;
  out.entries_.reserve(cells.size());
  for (auto& r : cells) {
    if (!out.entries_.empty() && out.entries_.back().first == r)
      out.entries_.back().second += 1;
    else
      out.entries_.emplace_back(std::move(r), BigInt(1));
  }
  return out;
}

Rational RestrictionMultiSet::sumSize() const {
  Rational total = 0;
  for (const auto& [r, mult] : entries_)
    total += Rational(mult) * pow2(-static_cast<long>(r.supportSize()));
  return total;
}

Json RestrictionMultiSet::to_json() const {
  Json j = Json::array();
  for (const auto& [r, mult] : entries_) {
    Json e;
    e["restriction"] = r.to_json();
    e["multiplicity"] = to_string(mult);
    j.push_back(e);
  }
  return j;
}

RestrictionMultiSet RestrictionMultiSet::from_json(const Json& j) {
  RestrictionMultiSet R;
  for (const auto& e : j) {
    BigInt mult = e.at("multiplicity").is_string()
                      ? bigint_from_string(e.at("multiplicity").get<std::string>())
                      : BigInt(e.at("multiplicity").get<long>());
    R.add(Restriction::from_json(e.at("restriction")), mult);
  }
  return R;
}

RestrictionMultiSet join(const RestrictionMultiSet& a, const RestrictionMultiSet& b) {
  RestrictionMultiSet out = a;
  for (const auto& [r, mult] : b.entries()) out.add(r, mult);
  return out;
}

Json rational_to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  return rational_from_string(j.get<std::string>());
}

} // namespace betgame

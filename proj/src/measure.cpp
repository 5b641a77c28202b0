#include "betgame/measure.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "betgame/errors.hpp"

namespace betgame {

namespace {

std::mutex g_tableMutex;
// Per modulus: rows[u] has m entries, rows[u][r] = sum of C(u,i), i ≡ r (mod m).
std::map<long, std::vector<std::vector<BigInt>>> g_tables;

} // namespace

BigInt binomial_residue_sum(long u, long m, long r) {
  if (u < 0 || m < 1) throw PreconditionError("binomial_residue_sum: bad arguments");
  r = ((r % m) + m) % m;
  std::lock_guard<std::mutex> lock(g_tableMutex);
  auto& rows = g_tables[m];
  if (rows.empty()) {
    rows.emplace_back(static_cast<std::size_t>(m), BigInt(0));
    rows[0][0] = 1;
  }
  while (static_cast<long>(rows.size()) <= u) {
    const auto& prev = rows.back();
    std::vector<BigInt> next(static_cast<std::size_t>(m));
    for (long c = 0; c < m; ++c) next[c] = prev[c] + prev[(c - 1 + m) % m];
    rows.push_back(std::move(next));
  }
  return rows[static_cast<std::size_t>(u)][static_cast<std::size_t>(r)];
}

Rational measure_restriction(const Restriction& r) {
  return pow2(-static_cast<long>(r.supportSize()));
}

Rational measure_modulo_given_restriction(const ModuloSet& M, const Restriction& r) {
  M.validate();
  long u = r.unrestrictedIn(M.I);
  long j = r.onesIn(M.I);
  BigInt s = binomial_residue_sum(u, M.m, M.o - j);
  if (s == 0) return Rational(0);
  return rat(s, ipow(BigInt(2), static_cast<unsigned long>(u)));
}

Rational measure_modulo(const ModuloSet& M) {
  return measure_modulo_given_restriction(M, Restriction());
}

bool xi_approx(const Rational& x, const Rational& y, const Rational& xi) {
  if (xi < 0 || xi >= 1) throw PreconditionError("xi_approx needs 0 <= xi < 1");
  Rational oneMinus = Rational(1) - xi;
  if (x < oneMinus * y) return false;
  // x <= y / (1-xi)  <=>  x (1-xi) <= y
  return x * oneMinus <= y;
}

bool modulo_independence_precondition(std::span<const Position> I, long m, const Rational& xi,
                                      const Restriction& r) {
  // u >= (m/xi)^2  <=>  u * num(xi)^2 >= m^2 * den(xi)^2
  BigInt u(r.unrestrictedIn(I));
  BigInt num = xi.get_num(), den = xi.get_den();
  return u * num * num >= BigInt(m) * BigInt(m) * den * den;
}

bool check_modulo_independence(std::span<const Position> I, long m, const Rational& xi,
                               const Restriction& r) {
  if (m < 2) throw PreconditionError("modulus must be at least 2");
  if (xi < 0 || xi > 1) throw PreconditionError("xi must be in [0, 1]");
  if (!modulo_independence_precondition(I, m, xi, r))
    throw PreconditionError("check_modulo_independence: ns_unrestricted below (m/xi)^2");
  if (xi == 1) return true; // both bounds degenerate
  Rational target = rat(1, m);
  ModuloSet M{PositionSet(I.begin(), I.end()), m, 0};
  for (long o = 0; o < m; ++o) {
    M.o = o;
    if (!xi_approx(measure_modulo_given_restriction(M, r), target, xi)) return false;
  }
  return true;
}

bool check_modulo_independence_sqrt(std::span<const Position> I, long m, const Restriction& r) {
  if (m < 2) throw PreconditionError("modulus must be at least 2");
  long u = r.unrestrictedIn(I);
  BigInt m2 = BigInt(m) * BigInt(m);
  if (BigInt(u) <= m2) throw PreconditionError("check_modulo_independence_sqrt needs u > m^2");
  ModuloSet M{PositionSet(I.begin(), I.end()), m, 0};
  for (long o = 0; o < m; ++o) {
    M.o = o;
    Rational lam = measure_modulo_given_restriction(M, r);
    // lower bound: 1 - m*lam <= m/sqrt(u), squared when the left side is positive
    Rational low = Rational(1) - Rational(m) * lam;
    if (low > 0) {
      Rational lhs = low * low * Rational(u);
      if (lhs > Rational(m2)) return false;
    }
    // upper bound: 1 - 1/(m*lam) <= m/sqrt(u); lam > 0 is guaranteed by u > m^2 >= m
    Rational ml = Rational(m) * lam;
    Rational high = Rational(1) - rat(BigInt(1), BigInt(1)) / ml;
    if (high > 0) {
      Rational lhs = high * high * Rational(u);
      if (lhs > Rational(m2)) return false;
    }
  }
  return true;
}

namespace {

ExprPtr make_leafless(ClopenExpr::Kind kind) {
  auto e = std::make_shared<ClopenExpr>();
  e->kind = kind;
  return e;
}

const ExprPtr g_full = make_leafless(ClopenExpr::Kind::Full);
const ExprPtr g_empty = make_leafless(ClopenExpr::Kind::Empty);

} // namespace

ExprPtr expr_full() { return g_full; }
ExprPtr expr_empty() { return g_empty; }

ExprPtr expr_cell(const Restriction& r) {
  if (r.emptySupport()) return g_full;
  auto e = std::make_shared<ClopenExpr>();
  e->kind = ClopenExpr::Kind::Cell;
  e->cell = r;
  return e;
}

ExprPtr expr_modulo(const ModuloSet& M) {
  M.validate();
  auto e = std::make_shared<ClopenExpr>();
  e->kind = ClopenExpr::Kind::Mod;
  e->mod = M;
  return e;
}

ExprPtr expr_not(const ExprPtr& x) {
  switch (x->kind) {
    case ClopenExpr::Kind::Full: return g_empty;
    case ClopenExpr::Kind::Empty: return g_full;
    case ClopenExpr::Kind::Not: return x->a;
    default: break;
  }
  auto e = std::make_shared<ClopenExpr>();
  e->kind = ClopenExpr::Kind::Not;
  e->a = x;
  return e;
}

ExprPtr expr_and(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind == ClopenExpr::Kind::Empty || y->kind == ClopenExpr::Kind::Empty) return g_empty;
  if (x->kind == ClopenExpr::Kind::Full) return y;
  if (y->kind == ClopenExpr::Kind::Full) return x;
  if (x->kind == ClopenExpr::Kind::Cell && y->kind == ClopenExpr::Kind::Cell) {
    auto merged = x->cell.merged(y->cell);
    return merged ? expr_cell(*merged) : g_empty;
  }
  auto e = std::make_shared<ClopenExpr>();
  e->kind = ClopenExpr::Kind::And;
  e->a = x;
  e->b = y;
  return e;
}

ExprPtr expr_or(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind == ClopenExpr::Kind::Full || y->kind == ClopenExpr::Kind::Full) return g_full;
  if (x->kind == ClopenExpr::Kind::Empty) return y;
  if (y->kind == ClopenExpr::Kind::Empty) return x;
  auto e = std::make_shared<ClopenExpr>();
  e->kind = ClopenExpr::Kind::Or;
  e->a = x;
  e->b = y;
  return e;
}

ExprPtr expr_diff(const ExprPtr& x, const ExprPtr& y) { return expr_and(x, expr_not(y)); }

ExprPtr expr_union(const std::vector<ExprPtr>& xs) {
  ExprPtr acc = g_empty;
  for (const auto& x : xs) acc = expr_or(acc, x);
  return acc;
}

Json ClopenExpr::to_json() const {
  Json j;
  switch (kind) {
    case Kind::Full: j["op"] = "full"; break;
    case Kind::Empty: j["op"] = "empty"; break;
    case Kind::Cell:
      j["op"] = "cell";
      j["restriction"] = cell.to_json();
      break;
    case Kind::Mod:
      j["op"] = "mod";
      j["modulo"] = mod.to_json();
      break;
    case Kind::Not:
      j["op"] = "not";
      j["a"] = a->to_json();
      break;
    case Kind::And:
      j["op"] = "and";
      j["a"] = a->to_json();
      j["b"] = b->to_json();
      break;
    case Kind::Or:
      j["op"] = "or";
      j["a"] = a->to_json();
      j["b"] = b->to_json();
      break;
  }
  return j;
}

Position expr_max_position(const ExprPtr& e) {
  switch (e->kind) {
    case ClopenExpr::Kind::Full:
    case ClopenExpr::Kind::Empty: return 0;
    case ClopenExpr::Kind::Cell: return e->cell.maxPosition();
    case ClopenExpr::Kind::Mod: return e->mod.I.empty() ? 0 : e->mod.I.back();
    case ClopenExpr::Kind::Not: return expr_max_position(e->a);
    default: return std::max(expr_max_position(e->a), expr_max_position(e->b));
  }
}

namespace {

void encode_expr(const ClopenExpr& e, std::string& out) {
  switch (e.kind) {
    case ClopenExpr::Kind::Full: out += 'F'; return;
    case ClopenExpr::Kind::Empty: out += 'E'; return;
    case ClopenExpr::Kind::Cell:
      out += 'C';
      for (const auto& [p, b] : e.cell.entries()) {
        out += std::to_string(p);
        out += b ? '+' : '-';
      }
      return;
    case ClopenExpr::Kind::Mod:
      out += 'M';
      for (Position p : e.mod.I) {
        out += std::to_string(p);
        out += ',';
      }
      out += ';';
      out += std::to_string(e.mod.m);
      out += ':';
      out += std::to_string(e.mod.o);
      return;
    case ClopenExpr::Kind::Not:
      out += "!(";
      encode_expr(*e.a, out);
      out += ')';
      return;
    case ClopenExpr::Kind::And:
    case ClopenExpr::Kind::Or:
      out += e.kind == ClopenExpr::Kind::And ? "&(" : "|(";
      encode_expr(*e.a, out);
      out += ',';
      encode_expr(*e.b, out);
      out += ')';
      return;
  }
}

// Condition the expression on sigma_p = bit.
ExprPtr condition(const ExprPtr& e, Position p, bool bit) {
  switch (e->kind) {
    case ClopenExpr::Kind::Full:
    case ClopenExpr::Kind::Empty: return e;
    case ClopenExpr::Kind::Cell: {
      auto v = e->cell.at(p);
      if (!v) return e;
      return *v == bit ? expr_cell(e->cell.without(p)) : expr_empty();
    }
    case ClopenExpr::Kind::Mod: {
      if (!position_set_contains(e->mod.I, p)) return e;
      ModuloSet M = e->mod;
      M.I.erase(std::lower_bound(M.I.begin(), M.I.end(), p));
      if (bit) M.o = ((M.o - 1) % M.m + M.m) % M.m;
      if (M.I.empty()) return M.o == 0 ? expr_full() : expr_empty();
      return expr_modulo(M);
    }
    case ClopenExpr::Kind::Not: return expr_not(condition(e->a, p, bit));
    case ClopenExpr::Kind::And: return expr_and(condition(e->a, p, bit), condition(e->b, p, bit));
    case ClopenExpr::Kind::Or: return expr_or(condition(e->a, p, bit), condition(e->b, p, bit));
  }
  return e;
}

struct AtomScan {
  std::map<Position, int> cellPositions; // position -> frequency across cell atoms
  std::vector<const ModuloSet*> mods;
};

void scan_atoms(const ClopenExpr& e, AtomScan& s) {
  switch (e.kind) {
    case ClopenExpr::Kind::Cell:
      for (const auto& [p, b] : e.cell.entries()) s.cellPositions[p]++;
      return;
    case ClopenExpr::Kind::Mod: s.mods.push_back(&e.mod); return;
    case ClopenExpr::Kind::Not: scan_atoms(*e.a, s); return;
    case ClopenExpr::Kind::And:
    case ClopenExpr::Kind::Or:
      scan_atoms(*e.a, s);
      scan_atoms(*e.b, s);
      return;
    default: return;
  }
}

bool eval_with_count_residue(const ClopenExpr& e, long residue) {
  switch (e.kind) {
    case ClopenExpr::Kind::Full: return true;
    case ClopenExpr::Kind::Empty: return false;
    case ClopenExpr::Kind::Mod: return residue % e.mod.m == e.mod.o;
    case ClopenExpr::Kind::Not: return !eval_with_count_residue(*e.a, residue);
    case ClopenExpr::Kind::And:
      return eval_with_count_residue(*e.a, residue) && eval_with_count_residue(*e.b, residue);
    case ClopenExpr::Kind::Or:
      return eval_with_count_residue(*e.a, residue) || eval_with_count_residue(*e.b, residue);
    case ClopenExpr::Kind::Cell: throw InvariantViolation("cell atom left in modulo-only residual");
  }
  return false;
}

class Evaluator {
 public:
  Rational eval(const ExprPtr& e) {
    if (e->kind == ClopenExpr::Kind::Full) return Rational(1);
    if (e->kind == ClopenExpr::Kind::Empty) return Rational(0);
    if (e->kind == ClopenExpr::Kind::Cell) return measure_restriction(e->cell);
    if (e->kind == ClopenExpr::Kind::Mod) return measure_modulo(e->mod);

    std::string key;
    encode_expr(*e, key);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    AtomScan scan;
    scan_atoms(*e, scan);

    Rational result;
    if (!scan.cellPositions.empty()) {
      result = split(e, most_frequent(scan.cellPositions));
    } else {
      // Only modulo atoms remain.
      bool sameI = true;
      for (const auto* M : scan.mods)
        if (M->I != scan.mods.front()->I) {
          sameI = false;
          break;
        }
      if (sameI) {
        result = modulo_only(e, *scan.mods.front(), scan.mods);
      } else {
        result = split(e, uncommon_position(scan.mods));
      }
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

 private:
  Rational split(const ExprPtr& e, Position p) {
    return (eval(condition(e, p, false)) + eval(condition(e, p, true))) / 2;
  }

  static Position most_frequent(const std::map<Position, int>& freq) {
    Position best = freq.begin()->first;
    int bestCount = freq.begin()->second;
    for (const auto& [p, c] : freq)
      if (c > bestCount) best = p, bestCount = c;
    return best;
  }

  // A position contained in some atom but not in all of them.
  static Position uncommon_position(const std::vector<const ModuloSet*>& mods) {
    const auto& first = mods.front()->I;
    for (const auto* M : mods) {
      if (M->I == first) continue;
      for (Position p : M->I)
        if (!position_set_contains(first, p)) return p;
      for (Position p : first)
        if (!position_set_contains(M->I, p)) return p;
    }
    throw InvariantViolation("no distinguishing position among modulo atoms");
  }

  Rational modulo_only(const ExprPtr& e, const ModuloSet& witness,
                       const std::vector<const ModuloSet*>& mods) {
    long lcm = 1;
    for (const auto* M : mods) {
      lcm = std::lcm(lcm, M->m);
      if (lcm > 1 << 20) throw Error("modulo lcm too large for residue evaluation");
    }
    long u = static_cast<long>(witness.I.size());
    BigInt acc = 0;
    for (long c = 0; c < lcm; ++c)
      if (eval_with_count_residue(*e, c)) acc += binomial_residue_sum(u, lcm, c);
    if (acc == 0) return Rational(0);
    return rat(acc, ipow(BigInt(2), static_cast<unsigned long>(u)));
  }

  std::unordered_map<std::string, Rational> memo_;
};

} // namespace

Rational measure_expr(const ExprPtr& e) {
  Evaluator ev;
  return ev.eval(e);
}

Rational measure_expr(const ExprPtr& e, const PositionUniverse& universe) {
  Position maxPos = expr_max_position(e);
  if (maxPos > universe.bound)
    throw UniverseError(maxPos, "expression mentions position " + std::to_string(maxPos) +
                                    " beyond universe bound " + std::to_string(universe.bound));
  return measure_expr(e);
}

namespace {

Rational cell_weight(const Restriction& r, const std::optional<ModuloSet>& within) {
  Rational w = measure_restriction(r);
  if (within) w *= measure_modulo_given_restriction(*within, r);
  return w;
}

void ie_recurse(const std::vector<std::vector<Restriction>>& groups,
                const std::optional<ModuloSet>& within, std::size_t fromGroup,
                const Restriction& acc, int picked, Rational& total) {
  for (std::size_t g = fromGroup; g < groups.size(); ++g) {
    for (const auto& cell : groups[g]) {
      auto merged = acc.merged(cell);
      if (!merged) continue;
      Rational w = cell_weight(*merged, within);
      if (picked % 2 == 0)
        total += w;
      else
        total -= w;
      ie_recurse(groups, within, g + 1, *merged, picked + 1, total);
    }
  }
}

} // namespace

Rational measure_cells_union_in(const std::vector<std::vector<Restriction>>& groups,
                                const std::optional<ModuloSet>& within) {
  Rational total = 0;
  ie_recurse(groups, within, 0, Restriction(), 0, total);
  return total;
}

} // namespace betgame

#include "betgame/strategy.hpp"

#include <algorithm>
#include <map>

#include "betgame/errors.hpp"

namespace betgame {

BettingStrategy::BettingStrategy() {
  Node root;
  root.mass = 1;
  nodes_.push_back(std::move(root));
}

std::string BettingStrategy::pathOf(int idx) const {
  std::string path;
  for (int cur = idx; cur != 0; cur = node(cur).parent)
    path.push_back(node(cur).bitFromParent ? '1' : '0');
  std::reverse(path.begin(), path.end());
  return path;
}

int BettingStrategy::nodeAt(std::string_view path) const {
  int cur = 0;
  for (char ch : path) {
    if (ch != '0' && ch != '1') return -1;
    cur = node(cur).child[ch - '0'];
    if (cur < 0) return -1;
  }
  return cur;
}

Restriction BettingStrategy::restrictionOf(int idx) const {
  std::vector<std::pair<Position, bool>> entries;
  entries.reserve(static_cast<std::size_t>(node(idx).depth));
  for (int cur = idx; cur != 0; cur = node(cur).parent)
    entries.emplace_back(node(node(cur).parent).betPos, node(cur).bitFromParent == 1);
  return Restriction::fromEntries(std::move(entries));
}

std::optional<bool> BettingStrategy::pathAssignment(int idx, Position p) const {
  for (int cur = idx; cur != 0; cur = node(cur).parent)
    if (node(node(cur).parent).betPos == p) return node(cur).bitFromParent == 1;
  return std::nullopt;
}

Rational BettingStrategy::capital(int idx) const {
  return node(idx).mass * pow2(node(idx).depth);
}

std::vector<int> BettingStrategy::leafIndices() const {
  std::vector<int> out;
  for (int i = 0; i < nodeCount(); ++i)
    if (isLeaf(i)) out.push_back(i);
  return out;
}

int BettingStrategy::defineBet(int leafIdx, Position p, const Rational& mass0,
                               const Rational& mass1) {
  if (leafIdx < 0 || leafIdx >= nodeCount())
    throw BetError(BetError::Reason::UnknownNode, "no such node: " + std::to_string(leafIdx));
  if (!isLeaf(leafIdx))
    throw BetError(BetError::Reason::NotALeaf, "bet target is not a leaf-string");
  if (p < 1 || pathAssignment(leafIdx, p).has_value())
    throw BetError(BetError::Reason::PositionRestricted,
                   "position " + std::to_string(p) + " already restricted on this path");
  if (mass0 < 0 || mass1 < 0)
    throw BetError(BetError::Reason::NegativeMass, "bet masses must be non-negative");
  if (mass0 + mass1 != node(leafIdx).mass)
    throw BetError(BetError::Reason::MassMismatch,
                   "children masses must sum to the leaf mass exactly");

  nodes_[static_cast<std::size_t>(leafIdx)].betPos = p;
  int base = nodeCount();
  for (int bit = 0; bit < 2; ++bit) {
    Node child;
    child.parent = leafIdx;
    child.depth = node(leafIdx).depth + 1;
    child.bitFromParent = static_cast<std::int8_t>(bit);
    child.mass = bit == 0 ? mass0 : mass1;
    nodes_.push_back(std::move(child));
  }
  nodes_[static_cast<std::size_t>(leafIdx)].child[0] = base;
  nodes_[static_cast<std::size_t>(leafIdx)].child[1] = base + 1;
  return base;
}

BettingStrategy define_bet(const BettingStrategy& B, std::string_view leafPath, Position p,
                           const Rational& mass0, const Rational& mass1) {
  BettingStrategy out = B;
  int idx = out.nodeAt(leafPath);
  if (idx < 0)
    throw BetError(BetError::Reason::UnknownNode, "no such outcome string: " + std::string(leafPath));
  out.defineBet(idx, p, mass0, mass1);
  return out;
}

Rational capital(const BettingStrategy& B, std::string_view path) {
  int idx = B.nodeAt(path);
  if (idx < 0)
    throw BetError(BetError::Reason::UnknownNode, "no such outcome string: " + std::string(path));
  return B.capital(idx);
}

CapitalReport capital_report(const BettingStrategy& B) {
  CapitalReport r;
  int n = B.nodeCount();
  r.capital.resize(static_cast<std::size_t>(n));
  r.maxCapital.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    r.capital[i] = B.capital(i);
    r.maxCapital[i] = i == 0 ? r.capital[i] : std::max(r.maxCapital[B.node(i).parent], r.capital[i]);
  }
  return r;
}

Rational maximal_achieved_capital(const BettingStrategy& B, std::span<const int> w) {
  int cur = 0;
  Rational best = B.capital(0);
  while (!B.isLeaf(cur)) {
    Position p = B.node(cur).betPos;
    if (p > static_cast<Position>(w.size()))
      throw UniverseError(p, "assignment does not cover position " + std::to_string(p));
    int bit = w[static_cast<std::size_t>(p - 1)] ? 1 : 0;
    cur = B.node(cur).child[bit];
    best = std::max(best, B.capital(cur));
  }
  return best;
}

SavingsAccounts savings_accounts(const BettingStrategy& B) {
  int n = B.nodeCount();
  SavingsAccounts acc;
  acc.play.resize(static_cast<std::size_t>(n));
  acc.bank.resize(static_cast<std::size_t>(n));
  acc.transfers.resize(static_cast<std::size_t>(n));
  acc.play[0] = 1;
  acc.bank[0] = 0;
  acc.transfers[0] = 0;
  for (int i = 0; i < n; ++i) {
    if (B.isLeaf(i)) continue;
    int c0 = B.node(i).child[0];
    int c1 = B.node(i).child[1];
    Rational cs = B.capital(i);
    Rational f = 0;
    int guessed = 0;
    if (cs != 0) {
      Rational cap0 = B.capital(c0);
      Rational cap1 = B.capital(c1);
      guessed = cap1 > cap0 ? 1 : 0;
      f = ((guessed ? cap1 : cap0) - cs) / cs;
    }
    int cb = B.node(i).child[guessed];
    int other = B.node(i).child[1 - guessed];
    Rational grown = (Rational(1) + f) * acc.play[i];
    if (grown >= 2) {
      acc.play[cb] = grown / 2;
      acc.bank[cb] = acc.bank[i] + grown / 2;
      acc.transfers[cb] = acc.transfers[i] + 1;
    } else {
      acc.play[cb] = grown;
      acc.bank[cb] = acc.bank[i];
      acc.transfers[cb] = acc.transfers[i];
    }
    acc.play[other] = (Rational(1) - f) * acc.play[i];
    acc.bank[other] = acc.bank[i];
    acc.transfers[other] = acc.transfers[i];
  }
  return acc;
}

BettingStrategy with_savings(const BettingStrategy& B) {
  SavingsAccounts acc = savings_accounts(B);
  // c'(s0)+c'(s1) = 2 c'(s) holds (a transfer conserves play+bank), so the new
  // masses form a mass function and the tree can be rebuilt bet by bet, which
  // revalidates every invariant.
  std::vector<Rational> newMass(static_cast<std::size_t>(B.nodeCount()));
  for (int i = 0; i < B.nodeCount(); ++i)
    newMass[i] = (acc.play[i] + acc.bank[i]) * pow2(-B.node(i).depth);

  BettingStrategy rebuilt;
  // Replay in index order; parents precede children, but the rebuilt tree
  // assigns its own indices, so keep a map.
  std::vector<int> toRebuilt(static_cast<std::size_t>(B.nodeCount()), -1);
  toRebuilt[0] = 0;
  for (int i = 0; i < B.nodeCount(); ++i) {
    if (B.isLeaf(i)) continue;
    int c0 = B.node(i).child[0];
    int c1 = B.node(i).child[1];
    int base = rebuilt.defineBet(toRebuilt[i], B.node(i).betPos, newMass[c0], newMass[c1]);
    toRebuilt[c0] = base;
    toRebuilt[c1] = base + 1;
  }
  return rebuilt;
}

bool check_conservative(const BettingStrategy& B) {
  CapitalReport r = capital_report(B);
  for (int i = 0; i < B.nodeCount(); ++i)
    if (r.capital[i] < r.maxCapital[i] - 2) return false;
  return true;
}

bool check_savings_lowerbound(const BettingStrategy& B) {
  SavingsAccounts acc = savings_accounts(B);
  CapitalReport orig = capital_report(B);
  for (int i = 0; i < B.nodeCount(); ++i) {
    if (acc.play[i] < 0 || acc.bank[i] < acc.transfers[i]) return false;
    // maxCapital < 2^{transfers+2} certifies 2^{c'+2} > maxCapital since
    // c' = play + bank >= transfers.
    if (orig.maxCapital[i] >= pow2(acc.transfers[i] + 2)) return false;
  }
  return true;
}

bool is_extension_of(const BettingStrategy& after, const BettingStrategy& before) {
  for (int i = 0; i < before.nodeCount(); ++i) {
    int j = after.nodeAt(before.pathOf(i));
    if (j < 0) return false;
    if (after.node(j).mass != before.node(i).mass) return false;
    if (!before.isLeaf(i)) {
      if (after.isLeaf(j)) return false;
      if (after.node(j).betPos != before.node(i).betPos) return false;
    }
  }
  return true;
}

Json strategy_to_json(const BettingStrategy& B) {
  std::vector<int> order(static_cast<std::size_t>(B.nodeCount()));
  for (int i = 0; i < B.nodeCount(); ++i) order[i] = i;
  std::vector<std::string> paths(order.size());
  for (int i = 0; i < B.nodeCount(); ++i) paths[i] = B.pathOf(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::pair(paths[a].size(), paths[a]) < std::pair(paths[b].size(), paths[b]);
  });
  Json nodes = Json::array();
  for (int i : order) {
    Json n;
    n["path"] = paths[i];
    n["restriction"] = B.restrictionOf(i).to_json();
    n["mass"] = rational_to_json(B.node(i).mass);
    if (B.isLeaf(i))
      n["bet_position"] = nullptr;
    else
      n["bet_position"] = B.node(i).betPos;
    nodes.push_back(std::move(n));
  }
  Json j;
  j["nodes"] = std::move(nodes);
  return j;
}

BettingStrategy strategy_from_json(const Json& j) {
  struct Entry {
    Json restriction;
    Rational mass;
    std::optional<Position> betPos;
  };
  std::map<std::string, Entry> entries;
  for (const auto& n : j.at("nodes")) {
    Entry e;
    e.restriction = n.at("restriction");
    e.mass = rational_from_json(n.at("mass"));
    if (!n.at("bet_position").is_null()) e.betPos = n.at("bet_position").get<Position>();
    auto [it, fresh] = entries.emplace(n.at("path").get<std::string>(), std::move(e));
    if (!fresh) throw ParseError("duplicate node path: " + it->first);
  }
  auto rootIt = entries.find("");
  if (rootIt == entries.end()) throw ParseError("strategy dump lacks the empty string");
  if (rootIt->second.mass != 1) throw ParseError("root mass must be 1");

  BettingStrategy B;
  // Process paths shortest-first so parents exist before children.
  std::vector<const std::string*> order;
  for (const auto& [path, e] : entries) order.push_back(&path);
  std::sort(order.begin(), order.end(), [](const std::string* a, const std::string* b) {
    return std::pair(a->size(), *a) < std::pair(b->size(), *b);
  });
  for (const std::string* path : order) {
    const Entry& e = entries.at(*path);
    if (!e.betPos) continue;
    auto c0 = entries.find(*path + "0");
    auto c1 = entries.find(*path + "1");
    if (c0 == entries.end() || c1 == entries.end())
      throw ParseError("internal node without both children: " + *path);
    int idx = B.nodeAt(*path);
    if (idx < 0) throw ParseError("node unreachable from the root: " + *path);
    B.defineBet(idx, *e.betPos, c0->second.mass, c1->second.mass);
  }
  if (static_cast<std::size_t>(B.nodeCount()) != entries.size())
    throw ParseError("strategy dump contains unreachable nodes");
  for (int i = 0; i < B.nodeCount(); ++i) {
    const Entry& e = entries.at(B.pathOf(i));
    if (Restriction::from_json(e.restriction) != B.restrictionOf(i))
      throw ParseError("restriction disagrees with the bet positions at " + B.pathOf(i));
  }
  return B;
}

} // namespace betgame

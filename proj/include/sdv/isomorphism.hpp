#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sdv/graph.hpp"

namespace sdv {

namespace detail {

// Structural signature of a blank node: sorted incident-triple shapes with
// blank positions wildcarded. Used to prune the mapping search.
inline std::string bnode_signature(const Graph& g, TermId node) {
  std::vector<std::string> parts;
  for (const Triple& t : g.triples()) {
    if (t.s != node && t.o != node) continue;
    std::string line;
    auto render = [&](TermId id) {
      if (TermPool::kind(id) == TermKind::BlankNode) return std::string("*");
      return TermPool::key(id);
    };
    line += (t.s == node) ? "S" : render(t.s);
    line += ' ';
    line += TermPool::key(t.p);
    line += ' ';
    line += (t.o == node) ? "O" : render(t.o);
    parts.push_back(std::move(line));
  }
  std::sort(parts.begin(), parts.end());
  std::string sig;
  for (const auto& p : parts) {
    sig += p;
    sig += '\n';
  }
  return sig;
}

inline std::vector<TermId> blank_nodes(const Graph& g) {
  std::unordered_set<TermId> seen;
  std::vector<TermId> out;
  for (const Triple& t : g.triples()) {
    for (TermId id : {t.s, t.o}) {
      if (TermPool::kind(id) == TermKind::BlankNode && seen.insert(id).second) out.push_back(id);
    }
  }
  return out;
}

} // namespace detail

/// True when the two graphs are equal up to blank-node relabeling. Ground
/// triples must match exactly; blank-node mapping is found by backtracking
/// with signature pruning.
inline bool isomorphic(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;

  std::vector<TermId> ab = detail::blank_nodes(a);
  std::vector<TermId> bb = detail::blank_nodes(b);
  if (ab.size() != bb.size()) return false;

  if (ab.empty()) return a == b;

  // ground triples must coincide exactly
  for (const Triple& t : a.triples()) {
    bool ground = TermPool::kind(t.s) != TermKind::BlankNode &&
                  TermPool::kind(t.o) != TermKind::BlankNode;
    if (ground && !b.contains(t)) return false;
  }

  std::unordered_map<TermId, std::string> sig_a, sig_b;
  for (TermId n : ab) sig_a[n] = detail::bnode_signature(a, n);
  for (TermId n : bb) sig_b[n] = detail::bnode_signature(b, n);

  // candidates per a-node, most constrained first
  std::vector<std::pair<TermId, std::vector<TermId>>> order;
  for (TermId n : ab) {
    std::vector<TermId> cands;
    for (TermId m : bb)
      if (sig_b[m] == sig_a[n]) cands.push_back(m);
    if (cands.empty()) return false;
    order.emplace_back(n, std::move(cands));
  }
  std::sort(order.begin(), order.end(),
            [](const auto& x, const auto& y) { return x.second.size() < y.second.size(); });

  std::unordered_map<TermId, TermId> mapping;
  std::unordered_set<TermId> used;

  auto verify = [&]() {
    for (const Triple& t : a.triples()) {
      auto map_term = [&](TermId id) {
        auto it = mapping.find(id);
        return it == mapping.end() ? id : it->second;
      };
      if (!b.contains(Triple{map_term(t.s), t.p, map_term(t.o)})) return false;
    }
    return true;
  };

  std::function<bool(size_t)> assign = [&](size_t i) -> bool {
    if (i == order.size()) return verify();
    TermId n = order[i].first;
    for (TermId m : order[i].second) {
      if (used.count(m)) continue;
      mapping[n] = m;
      used.insert(m);
      if (assign(i + 1)) return true;
      used.erase(m);
      mapping.erase(n);
    }
    return false;
  };
  return assign(0);
}

} // namespace sdv

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sdv/term.hpp"

namespace sdv {

/// One asserted statement. Subject is an IRI or blank node, predicate an IRI,
/// object any non-variable term. Ids come from the process-wide TermPool.
struct Triple {
  TermId s = 0, p = 0, o = 0;
  bool operator==(const Triple&) const = default;
};

struct TripleHash {
  size_t operator()(const Triple& t) const {
    uint64_t h = 1469598103934665603ull;
    for (uint64_t v : {uint64_t(t.s), uint64_t(t.p), uint64_t(t.o)}) {
      h ^= v + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

/// A triple with variables allowed in any position.
struct TriplePattern {
  TermId s = 0, p = 0, o = 0;
  bool operator==(const TriplePattern&) const = default;
};

/// Partial solution: variable id -> bound term id. Small sorted vector, cheap
/// to copy during joins.
class Binding {
public:
  std::optional<TermId> get(TermId var) const {
    auto it = find(var);
    return it != map_.end() && it->first == var ? std::optional<TermId>(it->second) : std::nullopt;
  }

  /// Binds var to value. Returns false when var is already bound to a
  /// different value (the binding is left unchanged).
  bool bind(TermId var, TermId value) {
    auto it = find(var);
    if (it != map_.end() && it->first == var) return it->second == value;
    map_.insert(it, {var, value});
    return true;
  }

  size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }
  const std::vector<std::pair<TermId, TermId>>& entries() const { return map_; }

  bool operator==(const Binding&) const = default;

  /// Deterministic one-line rendering, used for proof files and sorting.
  std::string to_string() const {
    std::string out;
    for (const auto& [var, val] : map_) {
      if (!out.empty()) out += ' ';
      out += TermPool::key(var);
      out += '=';
      out += TermPool::key(val);
    }
    return out;
  }

private:
  std::vector<std::pair<TermId, TermId>>::const_iterator find(TermId var) const {
    return std::lower_bound(map_.begin(), map_.end(), var,
                            [](const auto& e, TermId v) { return e.first < v; });
  }
  std::vector<std::pair<TermId, TermId>>::iterator find(TermId var) {
    return std::lower_bound(map_.begin(), map_.end(), var,
                            [](const auto& e, TermId v) { return e.first < v; });
  }

  std::vector<std::pair<TermId, TermId>> map_;
};

/// Substitute a binding into a pattern term: bound variables are replaced,
/// free variables stay as-is.
inline TermId substitute(TermId id, const Binding& b) {
  if (!is_variable(id)) return id;
  if (auto v = b.get(id)) return *v;
  return id;
}

/// Unifies a pattern with a concrete triple, extending the binding in place.
/// Returns false (binding partially extended) when they do not unify.
inline bool unify_triple(const TriplePattern& p, const Triple& t, Binding& b) {
  auto slot = [&](TermId pat, TermId val) {
    TermId r = substitute(pat, b);
    if (is_variable(r)) return b.bind(r, val);
    return r == val;
  };
  return slot(p.s, t.s) && slot(p.p, t.p) && slot(p.o, t.o);
}

/// Set of triples with SPO term indexes, a prefix map and an optional base
/// IRI. Duplicate insertion is a no-op. The dedup set and the indexes are
/// built lazily (bulk-adopted graphs often never need them) and appended
/// incrementally afterwards. Construction is single-owner; once a graph is
/// shared across threads it must no longer be mutated.
class Graph {
public:
  Graph() = default;
  Graph(const Graph& o) { *this = o; }
  Graph(Graph&& o) noexcept { *this = std::move(o); }
  Graph& operator=(const Graph& o) {
    if (this == &o) return *this;
    std::scoped_lock lock(o.cache_mu_);
    triples_ = o.triples_;
    set_ = o.set_;
    by_s_ = o.by_s_;
    by_p_ = o.by_p_;
    by_o_ = o.by_o_;
    set_count_.store(o.set_count_.load());
    index_count_.store(o.index_count_.load());
    prefixes_ = o.prefixes_;
    base_ = o.base_;
    subject_sorted_ = o.subject_sorted_;
    return *this;
  }
  Graph& operator=(Graph&& o) noexcept {
    triples_ = std::move(o.triples_);
    set_ = std::move(o.set_);
    by_s_ = std::move(o.by_s_);
    by_p_ = std::move(o.by_p_);
    by_o_ = std::move(o.by_o_);
    set_count_.store(o.set_count_.load());
    index_count_.store(o.index_count_.load());
    prefixes_ = std::move(o.prefixes_);
    base_ = std::move(o.base_);
    subject_sorted_ = std::move(o.subject_sorted_);
    return *this;
  }

  bool insert(const Triple& t) {
    validate(t);
    return insert_unchecked(t);
  }

  bool insert(const Term& s, const Term& p, const Term& o) {
    return insert(Triple{TermPool::intern(s), TermPool::intern(p), TermPool::intern(o)});
  }

  /// Takes over a pre-deduplicated triple vector (the caller also guarantees
  /// triple validity). Set and indexes are only built if a later operation
  /// asks for them.
  void adopt_unique(std::vector<Triple>&& triples) {
    if (!triples_.empty()) throw ModelError("adopt_unique on a non-empty graph");
    triples_ = std::move(triples);
  }

  bool contains(const Triple& t) const {
    ensure_set();
    return set_.count(t) != 0;
  }

  void reserve(size_t n) {
    triples_.reserve(n);
    set_.reserve(n);
  }

  size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const std::vector<Triple>& triples() const { return triples_; }

  void set_base(std::string base) { base_ = std::move(base); }
  const std::string& base() const { return base_; }

  void add_prefix(const std::string& name, const std::string& iri) { prefixes_[name] = iri; }
  const std::map<std::string, std::string>& prefixes() const { return prefixes_; }
  void merge_prefixes(const std::map<std::string, std::string>& other) {
    for (const auto& [k, v] : other) prefixes_.emplace(k, v); // existing entries win
  }

  /// Yields every extension of seed under which the pattern instantiates to a
  /// triple of this graph. A fully concrete pattern yields seed itself once
  /// if the triple is asserted.
  template <class F>
  void match(const TriplePattern& pat, const Binding& seed, F&& emit) const {
    TermId s = substitute(pat.s, seed);
    TermId p = substitute(pat.p, seed);
    TermId o = substitute(pat.o, seed);
    bool vs = is_variable(s), vp = is_variable(p), vo = is_variable(o);

    auto try_triple = [&](const Triple& t) {
      // reject on concrete slots before paying for a binding copy
      if (!vs && t.s != s) return;
      if (!vp && t.p != p) return;
      if (!vo && t.o != o) return;
      Binding ext = seed;
      if (vs && !ext.bind(s, t.s)) return;
      if (vp) {
        TermId p2 = substitute(p, ext); // the same variable may have just been bound
        if (is_variable(p2) ? !ext.bind(p2, t.p) : t.p != p2) return;
      }
      if (vo) {
        TermId o2 = substitute(o, ext);
        if (is_variable(o2) ? !ext.bind(o2, t.o) : t.o != o2) return;
      }
      emit(std::move(ext), t);
    };

    if (vs && vp && vo) {
      for (const Triple& t : triples_) try_triple(t);
      return;
    }
    ensure_indexes();
    // pick the smallest bucket among concrete positions; a missing bucket
    // means zero matches
    const std::vector<uint32_t>* best = nullptr;
    bool miss = false;
    auto consider = [&](const std::unordered_map<TermId, std::vector<uint32_t>>& index,
                        TermId id) {
      if (miss) return;
      auto it = index.find(id);
      if (it == index.end()) {
        miss = true;
        return;
      }
      if (!best || it->second.size() < best->size()) best = &it->second;
    };
    if (!vs) consider(by_s_, s);
    if (!vo) consider(by_o_, o);
    if (!vp) consider(by_p_, p);
    if (miss) return;
    for (uint32_t idx : *best) try_triple(triples_[idx]);
  }

  std::vector<Binding> match_all(const TriplePattern& pat, const Binding& seed = {}) const {
    std::vector<Binding> out;
    match(pat, seed, [&](Binding b, const Triple&) { out.push_back(std::move(b)); });
    return out;
  }

  /// Adds every triple of other; blank nodes are merged by label. Prefixes
  /// from other fill gaps but do not override.
  void absorb(const Graph& other) {
    for (const Triple& t : other.triples()) insert_unchecked(t);
    merge_prefixes(other.prefixes());
  }

  static Graph merged(std::span<const Graph* const> graphs) {
    Graph g;
    for (const Graph* in : graphs) g.absorb(*in);
    return g;
  }

  /// Triples grouped by subject (stable order within a group), built lazily
  /// and cached. The returned snapshot stays valid independent of later
  /// insertions; star-shaped joins scan it sequentially.
  std::shared_ptr<const std::vector<Triple>> subject_sorted() const {
    std::lock_guard lock(cache_mu_);
    if (!subject_sorted_ || subject_sorted_->size() != triples_.size()) {
      auto sorted = std::make_shared<std::vector<Triple>>(triples_);
      std::stable_sort(sorted->begin(), sorted->end(),
                       [](const Triple& a, const Triple& b) { return a.s < b.s; });
      subject_sorted_ = std::move(sorted);
    }
    return subject_sorted_;
  }

  bool operator==(const Graph& other) const { // set equality, labels included
    if (size() != other.size()) return false;
    for (const Triple& t : triples_)
      if (!other.contains(t)) return false;
    return true;
  }

private:
  static void validate(const Triple& t) {
    TermKind ks = TermPool::kind(t.s), kp = TermPool::kind(t.p), ko = TermPool::kind(t.o);
    if (ks == TermKind::Variable || kp == TermKind::Variable || ko == TermKind::Variable)
      throw ModelError("variable term in asserted triple");
    if (ks == TermKind::Literal) throw ModelError("literal subject in asserted triple");
    if (kp != TermKind::Iri) throw ModelError("non-IRI predicate in asserted triple");
  }

  bool insert_unchecked(const Triple& t) {
    ensure_set();
    if (!set_.insert(t).second) return false;
    triples_.push_back(t);
    set_count_.store(triples_.size(), std::memory_order_release);
    return true;
  }

  // lazy caches: cheap watermark check first, then append under the lock
  void ensure_set() const {
    if (set_count_.load(std::memory_order_acquire) == triples_.size()) return;
    std::lock_guard lock(cache_mu_);
    for (size_t i = set_count_.load(std::memory_order_relaxed); i < triples_.size(); ++i)
      set_.insert(triples_[i]);
    set_count_.store(triples_.size(), std::memory_order_release);
  }

  void ensure_indexes() const {
    if (index_count_.load(std::memory_order_acquire) == triples_.size()) return;
    std::lock_guard lock(cache_mu_);
    for (size_t i = index_count_.load(std::memory_order_relaxed); i < triples_.size(); ++i) {
      const Triple& t = triples_[i];
      by_s_[t.s].push_back(uint32_t(i));
      by_p_[t.p].push_back(uint32_t(i));
      by_o_[t.o].push_back(uint32_t(i));
    }
    index_count_.store(triples_.size(), std::memory_order_release);
  }

  std::vector<Triple> triples_;
  mutable std::unordered_set<Triple, TripleHash> set_;
  mutable std::unordered_map<TermId, std::vector<uint32_t>> by_s_, by_p_, by_o_;
  mutable std::atomic<size_t> set_count_{0};   // triples_ prefix reflected in set_
  mutable std::atomic<size_t> index_count_{0}; // triples_ prefix reflected in the indexes
  std::map<std::string, std::string> prefixes_;
  std::string base_;
  mutable std::mutex cache_mu_;
  mutable std::shared_ptr<const std::vector<Triple>> subject_sorted_;
};

} // namespace sdv

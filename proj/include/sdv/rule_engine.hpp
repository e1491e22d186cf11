#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sdv/builtins.hpp"
#include "sdv/graph.hpp"
#include "sdv/n3_rules.hpp"
#include "sdv/proof.hpp"
#include "sdv/query.hpp" // join_order
#include "sdv/turtle.hpp"

namespace sdv {

enum class ApplyMode { SinglePass, Fixpoint };

struct SourceGraph {
  std::string id;
  const Graph* graph = nullptr;
};

struct ProofOptions {
  bool want = false;
  bool all_justifications = false;
};

struct ApplyResult {
  Graph derived; // every consequent instantiation, set semantics
  std::optional<Proof> proof;
  std::vector<std::string> warnings;
  size_t iterations = 0;
};

namespace detail {

struct Provenance {
  enum class Kind { Asserted, Derived } kind = Kind::Asserted;
  size_t index = 0; // source ordinal or step id
};

struct Firing {
  size_t rule_ordinal = 0;
  Binding binding;
};

/// Enumerates all antecedent solutions of one rule against a graph. Builtins
/// fire as soon as their inputs are bound; a builtin left unevaluated at the
/// end of a solution means its inputs can never be bound, which is a rule
/// evaluation error.
class RuleMatcher {
public:
  RuleMatcher(const Rule& rule, const Graph& graph, std::vector<std::string>& warnings)
      : rule_(rule), graph_(graph), warnings_(&warnings) {
    patterns_ = rule.patterns();
    builtins_ = rule.builtins();
    defs_.reserve(builtins_.size());
    for (const BuiltinAtom& atom : builtins_) {
      const BuiltinDef* def = BuiltinRegistry::find(TermPool::term_ref(atom.builtin).value);
      if (!def)
        throw EvalError("unknown builtin " + TermPool::term_ref(atom.builtin).value, rule.id);
      defs_.push_back(def);
    }
    memo_.resize(builtins_.size());
    order_ = join_order(patterns_, {});
  }

  template <class F>
  void enumerate(F&& emit) {
    if (builtins_.size() > 32)
      throw EvalError("more than 32 builtin atoms in " + rule_.id, rule_.id);
    uint32_t done = 0;
    Binding seed;
    if (!run_builtins(seed, done)) return;

    // star-shaped antecedent (every pattern subject is the same variable):
    // scan the subject-grouped snapshot once and join inside each group,
    // which stays flat as the graph outgrows the caches
    TermId star = star_subject();
    if (star != 0 && graph_.size() > 512 && !seed.get(star)) {
      auto sorted = graph_.subject_sorted();
      const std::vector<Triple>& ts = *sorted;
      size_t i = 0;
      while (i < ts.size()) {
        size_t j = i;
        TermId subj = ts[i].s;
        while (j < ts.size() && ts[j].s == subj) ++j;
        Binding b = seed;
        b.bind(star, subj);
        star_solve(0, b, done, std::span<const Triple>(ts.data() + i, j - i), emit);
        i = j;
      }
      return;
    }
    solve(0, seed, done, emit);
  }

private:
  bool all_done(uint32_t done) const {
    return done == (builtins_.empty() ? 0u : (builtins_.size() == 32 ? ~0u : (1u << builtins_.size()) - 1));
  }

  // evaluate every not-yet-done builtin whose inputs are bound; repeat until
  // no progress. Returns false when the current branch dies.
  bool run_builtins(Binding& b, uint32_t& done) {
    bool progress = true;
    while (progress && !all_done(done)) {
      progress = false;
      for (size_t i = 0; i < builtins_.size(); ++i) {
        if ((done & (1u << i)) || !inputs_bound(builtins_[i], *defs_[i], b)) continue;
        done |= 1u << i;
        progress = true;
        if (!apply_builtin(i, b)) return false;
      }
    }
    return true;
  }

  struct MemoVal {
    bool fired = false;
    TermId result = 0;
  };
  struct MemoKeyHash {
    size_t operator()(const std::array<TermId, 4>& k) const {
      uint64_t h = 1469598103934665603ull;
      for (TermId id : k) {
        h ^= id + 0x9e3779b97f4a7c15ull;
        h *= 1099511628211ull;
      }
      return static_cast<size_t>(h);
    }
  };

  // builtins are pure, so evaluations are memoized per resolved input tuple;
  // the object of a function atom is compared/bound outside the memo
  bool apply_builtin(size_t i, Binding& b) {
    const BuiltinAtom& atom = builtins_[i];
    const BuiltinDef& def = *defs_[i];
    bool filter = def.kind == BuiltinKind::Filter;
    size_t total = atom.args.size() + (filter ? 1 : 0);
    if (total > 4) { // wide atoms stay unmemoized
      BuiltinEval record;
      std::optional<Binding> ext = eval_builtin(atom, b, &record, &def);
      if (!record.warning.empty()) warnings_->push_back(rule_.id + ": " + record.warning);
      if (!ext) return false;
      b = std::move(*ext);
      return true;
    }

    std::array<TermId, 4> key{};
    for (size_t k = 0; k < atom.args.size(); ++k) key[k] = substitute(atom.args[k], b);
    if (filter) key[atom.args.size()] = substitute(atom.object, b);

    auto [it, fresh] = memo_[i].try_emplace(key);
    if (fresh) {
      std::vector<Term> inputs;
      inputs.reserve(total);
      for (size_t k = 0; k < total; ++k) inputs.push_back(TermPool::term(key[k]));
      if (filter) {
        auto pass = def.pred(inputs);
        if (!pass)
          warnings_->push_back(rule_.id + ": unusable input for " +
                               TermPool::term_ref(atom.builtin).value);
        it->second = MemoVal{pass && *pass, 0};
      } else {
        auto out = def.fn(inputs);
        if (!out) {
          warnings_->push_back(rule_.id + ": unusable input for " +
                               TermPool::term_ref(atom.builtin).value);
          it->second = MemoVal{false, 0};
        } else {
          it->second = MemoVal{true, TermPool::intern(*out)};
        }
      }
    }

    const MemoVal v = it->second;
    if (!v.fired) return false;
    if (filter) return true;
    TermId obj = substitute(atom.object, b);
    if (is_variable(obj)) return b.bind(obj, v.result);
    return obj == v.result;
  }

  static bool inputs_bound(const BuiltinAtom& atom, const BuiltinDef& def, const Binding& b) {
    for (TermId a : atom.args)
      if (is_variable(substitute(a, b))) return false;
    if (def.kind == BuiltinKind::Filter && is_variable(substitute(atom.object, b))) return false;
    return true;
  }

  /// The variable every pattern uses as its subject, or 0 when the rule is
  /// not star-shaped.
  TermId star_subject() const {
    if (patterns_.empty()) return 0;
    TermId star = 0;
    for (const TriplePattern& p : patterns_) {
      if (!is_variable(p.s)) return 0;
      if (star && p.s != star) return 0;
      star = p.s;
    }
    return star;
  }

  template <class F>
  void star_solve(size_t i, const Binding& b, uint32_t done, std::span<const Triple> group,
                  F&& emit) {
    if (i == patterns_.size()) {
      for (size_t k = 0; k < builtins_.size(); ++k) {
        if (!(done & (1u << k)))
          throw EvalError("builtin inputs never bound in " + rule_.id,
                          TermPool::term_ref(builtins_[k].builtin).value);
      }
      emit(b);
      return;
    }
    const TriplePattern& pat = patterns_[order_[i]];
    // pre-substitute the pattern once; copy the binding only for real matches
    TermId ps = substitute(pat.s, b);
    TermId pp = substitute(pat.p, b);
    TermId po = substitute(pat.o, b);
    bool vs = is_variable(ps), vp = is_variable(pp), vo = is_variable(po);
    for (const Triple& t : group) {
      if (!vs && ps != t.s) continue;
      if (!vp && pp != t.p) continue;
      if (!vo && po != t.o) continue;
      Binding ext = b;
      if (!unify_triple(pat, t, ext)) continue;
      uint32_t done2 = done;
      if (!run_builtins(ext, done2)) continue;
      star_solve(i + 1, ext, done2, group, emit);
    }
  }

  template <class F>
  void solve(size_t i, const Binding& b, uint32_t done, F&& emit) {
    if (i == patterns_.size()) {
      for (size_t k = 0; k < builtins_.size(); ++k) {
        if (!(done & (1u << k)))
          throw EvalError("builtin inputs never bound in " + rule_.id,
                          TermPool::term_ref(builtins_[k].builtin).value);
      }
      emit(b);
      return;
    }
    const TriplePattern& pat = patterns_[order_[i]];
    graph_.match(pat, b, [&](Binding ext, const Triple&) {
      uint32_t done2 = done;
      if (!run_builtins(ext, done2)) return;
      solve(i + 1, ext, done2, emit);
    });
  }

  const Rule& rule_;
  const Graph& graph_;
  std::vector<std::string>* warnings_;
  std::vector<TriplePattern> patterns_;
  std::vector<BuiltinAtom> builtins_;
  std::vector<const BuiltinDef*> defs_;
  std::vector<std::unordered_map<std::array<TermId, 4>, MemoVal, MemoKeyHash>> memo_;
  std::vector<size_t> order_;
};

inline ProofStep make_step(size_t id, const Rule& rule, const Binding& binding,
                           std::span<const SourceGraph> inputs,
                           const std::unordered_map<Triple, Provenance, TripleHash>& prov) {
  ProofStep step;
  step.id = id;
  step.rule_id = rule.id;
  step.binding = binding;
  for (const RuleAtom& atom : rule.antecedent) {
    ProofPremise prem;
    if (atom.kind == RuleAtom::Kind::Pattern) {
      Triple t{substitute(atom.pattern.s, binding), substitute(atom.pattern.p, binding),
               substitute(atom.pattern.o, binding)};
      auto it = prov.find(t);
      if (it != prov.end() && it->second.kind == Provenance::Kind::Asserted) {
        prem.kind = ProofPremise::Kind::Asserted;
        prem.source = inputs[it->second.index].id;
      } else {
        prem.kind = ProofPremise::Kind::Derived;
        prem.step = it != prov.end() ? it->second.index : 0;
      }
      prem.triple = t;
    } else {
      prem.kind = ProofPremise::Kind::Builtin;
      prem.builtin_iri = TermPool::term(atom.builtin.builtin).value;
      BuiltinEval record;
      eval_builtin(atom.builtin, binding, &record); // deterministic re-evaluation
      prem.inputs = std::move(record.inputs);
      prem.output = std::move(record.output);
    }
    step.premises.push_back(std::move(prem));
  }
  for (const TriplePattern& p : rule.consequent)
    step.conclusions.push_back(
        Triple{substitute(p.s, binding), substitute(p.p, binding), substitute(p.o, binding)});
  return step;
}

} // namespace detail

/// Applies a rule set to the union of the input graphs.
///
/// single-pass matches every rule against the asserted triples only and
/// collects all firings; fixpoint re-asserts derived triples and repeats
/// until nothing new appears (rules are range-restricted and generate no
/// fresh nodes, so this terminates; the iteration cap is a safety valve).
///
/// The derived graph contains every consequent instantiation under set
/// semantics. With proofs enabled, firings are ordered deterministically and
/// every derived triple is justified by at least one step; firings that add
/// nothing new are dropped unless all_justifications is set.
inline ApplyResult apply_rules(std::span<const SourceGraph> inputs, const RuleSet& rules,
                               ApplyMode mode, const ProofOptions& popts = {},
                               size_t iteration_cap = 100) {
  ApplyResult result;
  Graph working;
  std::unordered_map<Triple, detail::Provenance, TripleHash> prov;

  size_t input_size = 0;
  for (const SourceGraph& in : inputs) input_size += in.graph->size();
  working.reserve(input_size + input_size / 2);
  if (popts.want) prov.reserve(input_size);

  for (size_t i = 0; i < inputs.size(); ++i) {
    for (const Triple& t : inputs[i].graph->triples()) {
      bool fresh = working.insert(t);
      if (fresh && popts.want)
        prov.emplace(t, detail::Provenance{detail::Provenance::Kind::Asserted, i});
    }
    working.merge_prefixes(inputs[i].graph->prefixes());
  }
  result.derived.merge_prefixes(rules.prefixes);
  result.derived.reserve(input_size);

  Proof proof;
  proof.mode = mode == ApplyMode::Fixpoint ? "fixpoint" : "single-pass";
  if (popts.want) {
    for (const SourceGraph& in : inputs) proof.sources.emplace_back(in.id, graph_hash(*in.graph));
  }

  std::set<std::pair<size_t, std::string>> seen_firings; // all_justifications dedup
  // triples already concluded by a recorded step: a conclusion may coincide
  // with an asserted triple (not "new" for the fixpoint) and still need a
  // justifying step for proof completeness
  std::unordered_set<Triple, TripleHash> justified;

  size_t iteration = 0;
  while (true) {
    if (iteration >= iteration_cap)
      throw EvalError("rule application did not reach a fixpoint within " +
                      std::to_string(iteration_cap) + " iterations");
    ++iteration;

    // Triples found this iteration; inserted into the working graph only
    // after the sweep, so every rule matches the same snapshot.
    std::vector<Triple> pending;
    std::unordered_set<Triple, TripleHash> pending_set;
    // growth tracking only matters for fixpoint iteration and proofs; the
    // plain single-pass path streams conclusions and dedups once at the end
    const bool track_growth = mode == ApplyMode::Fixpoint || popts.want;
    std::vector<Triple> streamed;
    std::vector<Triple> conclusions; // reused across firings

    auto handle_firing = [&](const detail::Firing& f) {
      const Rule& rule = rules.rules[f.rule_ordinal];
      conclusions.clear();
      bool any_unjustified = false;
      for (const TriplePattern& p : rule.consequent) {
        Triple t{substitute(p.s, f.binding), substitute(p.p, f.binding),
                 substitute(p.o, f.binding)};
        if (TermPool::kind(t.s) == TermKind::Literal || TermPool::kind(t.p) != TermKind::Iri)
          throw EvalError("consequent of " + rule.id + " instantiates to an invalid triple",
                          rule.id);
        conclusions.push_back(t);
        if (popts.want && !justified.count(t)) any_unjustified = true;
      }

      bool record_step = false;
      if (popts.want) {
        record_step = popts.all_justifications
                          ? seen_firings.emplace(f.rule_ordinal, f.binding.to_string()).second
                          : any_unjustified;
      }
      size_t step_id = proof.steps.size();
      if (record_step) {
        proof.steps.push_back(detail::make_step(step_id, rule, f.binding, inputs, prov));
        for (const Triple& t : conclusions) justified.insert(t);
      }

      for (const Triple& t : conclusions) {
        if (!track_growth) {
          streamed.push_back(t);
          continue;
        }
        result.derived.insert(t);
        if (!working.contains(t) && pending_set.insert(t).second) {
          pending.push_back(t);
          if (record_step)
            prov.emplace(t, detail::Provenance{detail::Provenance::Kind::Derived, step_id});
        }
      }
    };

    if (popts.want) {
      // deterministic step order: sort firings by rule and binding
      std::vector<detail::Firing> firings;
      for (size_t r = 0; r < rules.rules.size(); ++r) {
        detail::RuleMatcher matcher(rules.rules[r], working, result.warnings);
        matcher.enumerate([&](const Binding& b) { firings.push_back({r, b}); });
      }
      std::stable_sort(firings.begin(), firings.end(),
                       [](const detail::Firing& a, const detail::Firing& b) {
                         if (a.rule_ordinal != b.rule_ordinal)
                           return a.rule_ordinal < b.rule_ordinal;
                         return a.binding.to_string() < b.binding.to_string();
                       });
      for (const detail::Firing& f : firings) handle_firing(f);
    } else {
      for (size_t r = 0; r < rules.rules.size(); ++r) {
        detail::RuleMatcher matcher(rules.rules[r], working, result.warnings);
        matcher.enumerate([&](const Binding& b) { handle_firing({r, b}); });
      }
    }

    if (!track_growth) { // single pass without proofs: bulk dedup
      std::sort(streamed.begin(), streamed.end(), [](const Triple& a, const Triple& b) {
        if (a.s != b.s) return a.s < b.s;
        if (a.p != b.p) return a.p < b.p;
        return a.o < b.o;
      });
      streamed.erase(std::unique(streamed.begin(), streamed.end()), streamed.end());
      result.derived.adopt_unique(std::move(streamed)); // shape-validated above
    }

    result.iterations = iteration;
    if (mode == ApplyMode::SinglePass || pending.empty()) break;
    for (const Triple& t : pending) working.insert(t);
  }

  if (popts.want) {
    proof.conclusion_hash = graph_hash(result.derived);
    result.proof = std::move(proof);
  }
  return result;
}

/// Convenience overload for a single anonymous input graph.
inline ApplyResult apply_rules(const Graph& input, const RuleSet& rules, ApplyMode mode,
                               const ProofOptions& popts = {}, size_t iteration_cap = 100) {
  SourceGraph sg{"input", &input};
  return apply_rules(std::span<const SourceGraph>(&sg, 1), rules, mode, popts, iteration_cap);
}

} // namespace sdv

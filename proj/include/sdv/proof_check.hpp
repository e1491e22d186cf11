#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdv/builtins.hpp"
#include "sdv/n3_rules.hpp"
#include "sdv/proof.hpp"
#include "sdv/rule_engine.hpp" // SourceGraph
#include "sdv/turtle.hpp"      // graph_hash

namespace sdv {

/// Result of checking a proof. step is -1 for proof-level failures.
struct Verdict {
  bool valid = false;
  std::string reason;
  long step = -1;

  static Verdict ok() { return {true, "", -1}; }
  static Verdict bad(std::string reason, long step = -1) {
    return {false, std::move(reason), step};
  }
};

/// Independent proof checker. Re-derives nothing: it only substitutes
/// bindings, tests membership in the named sources and earlier steps,
/// re-evaluates recorded builtin calls and recomputes the conclusion digest.
/// It deliberately shares no matching or saturation code with apply_rules.
inline Verdict check_proof(const Proof& proof, std::span<const SourceGraph> asserted,
                           const RuleSet& rules) {
  std::unordered_map<std::string, const Graph*> sources;
  for (const SourceGraph& sg : asserted) sources.emplace(sg.id, sg.graph);

  for (const auto& [id, hash] : proof.sources) {
    auto it = sources.find(id);
    if (it == sources.end()) return Verdict::bad("asserted source '" + id + "' not provided");
    if (graph_hash(*it->second) != hash)
      return Verdict::bad("hash mismatch for asserted source '" + id + "'");
  }

  auto ground = [](const Triple& t) {
    return !is_variable(t.s) && !is_variable(t.p) && !is_variable(t.o);
  };

  for (size_t i = 0; i < proof.steps.size(); ++i) {
    const ProofStep& step = proof.steps[i];
    long sid = static_cast<long>(i);
    if (step.id != i) return Verdict::bad("step ids out of order", sid);

    const Rule* rule = rules.find(step.rule_id);
    if (!rule) return Verdict::bad("unknown rule '" + step.rule_id + "'", sid);

    if (step.premises.size() != rule->antecedent.size())
      return Verdict::bad("premise count does not match the rule antecedent", sid);

    for (size_t k = 0; k < rule->antecedent.size(); ++k) {
      const RuleAtom& atom = rule->antecedent[k];
      const ProofPremise& prem = step.premises[k];

      if (atom.kind == RuleAtom::Kind::Pattern) {
        if (prem.kind == ProofPremise::Kind::Builtin)
          return Verdict::bad("premise kind does not match the rule atom", sid);
        Triple expect{substitute(atom.pattern.s, step.binding),
                      substitute(atom.pattern.p, step.binding),
                      substitute(atom.pattern.o, step.binding)};
        if (!ground(expect)) return Verdict::bad("binding leaves a premise non-ground", sid);
        if (!(expect == prem.triple))
          return Verdict::bad("premise does not match the substituted antecedent", sid);
        if (prem.kind == ProofPremise::Kind::Asserted) {
          auto it = sources.find(prem.source);
          if (it == sources.end())
            return Verdict::bad("premise cites unknown source '" + prem.source + "'", sid);
          if (!it->second->contains(prem.triple))
            return Verdict::bad("premise not found in source '" + prem.source + "'", sid);
        } else {
          if (prem.step >= i) return Verdict::bad("premise cites a later step", sid);
          const auto& concl = proof.steps[prem.step].conclusions;
          bool found = false;
          for (const Triple& t : concl)
            if (t == prem.triple) found = true;
          if (!found)
            return Verdict::bad("premise not concluded by step " + std::to_string(prem.step), sid);
        }
      } else {
        if (prem.kind != ProofPremise::Kind::Builtin)
          return Verdict::bad("premise kind does not match the rule atom", sid);
        Term biri = TermPool::term(atom.builtin.builtin);
        if (prem.builtin_iri != biri.value)
          return Verdict::bad("builtin premise cites a different builtin", sid);
        const BuiltinDef* def = BuiltinRegistry::find(biri.value);
        if (!def) return Verdict::bad("unknown builtin <" + biri.value + ">", sid);

        // recorded inputs must equal the substituted arguments
        std::vector<Term> expect_inputs;
        for (TermId a : atom.builtin.args) {
          TermId r = substitute(a, step.binding);
          if (is_variable(r)) return Verdict::bad("builtin input not bound by binding", sid);
          expect_inputs.push_back(TermPool::term(r));
        }
        if (def->kind == BuiltinKind::Filter) {
          TermId r = substitute(atom.builtin.object, step.binding);
          if (is_variable(r)) return Verdict::bad("builtin input not bound by binding", sid);
          expect_inputs.push_back(TermPool::term(r));
        }
        if (expect_inputs != prem.inputs)
          return Verdict::bad("builtin inputs do not match the binding", sid);

        if (def->kind == BuiltinKind::Filter) {
          auto pass = def->pred(prem.inputs);
          if (!pass || !*pass) return Verdict::bad("builtin filter does not hold", sid);
          if (prem.output) return Verdict::bad("filter builtin with recorded output", sid);
        } else {
          auto out = def->fn(prem.inputs);
          if (!out) return Verdict::bad("builtin does not evaluate on recorded inputs", sid);
          if (!prem.output || !(*out == *prem.output))
            return Verdict::bad("builtin output does not re-evaluate to recorded value", sid);
          TermId obj = substitute(atom.builtin.object, step.binding);
          if (is_variable(obj) || obj != TermPool::intern(*out))
            return Verdict::bad("builtin result does not match the binding", sid);
        }
      }
    }

    if (step.conclusions.size() != rule->consequent.size())
      return Verdict::bad("conclusion count does not match the rule consequent", sid);
    for (size_t k = 0; k < rule->consequent.size(); ++k) {
      const TriplePattern& p = rule->consequent[k];
      Triple expect{substitute(p.s, step.binding), substitute(p.p, step.binding),
                    substitute(p.o, step.binding)};
      if (!ground(expect)) return Verdict::bad("binding leaves a conclusion non-ground", sid);
      if (!(expect == step.conclusions[k]))
        return Verdict::bad("conclusion does not match the substituted consequent", sid);
    }
  }

  Graph derived;
  for (const ProofStep& step : proof.steps)
    for (const Triple& t : step.conclusions) derived.insert(t);
  if (graph_hash(derived) != proof.conclusion_hash)
    return Verdict::bad("conclusion hash does not match the step conclusions");

  return Verdict::ok();
}

} // namespace sdv

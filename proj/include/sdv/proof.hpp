#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdv/graph.hpp"

namespace sdv {

/// Where a premise triple came from, or the record of a builtin evaluation.
struct ProofPremise {
  enum class Kind { Asserted, Derived, Builtin };
  Kind kind = Kind::Asserted;
  Triple triple{};           // Asserted / Derived
  std::string source;        // Asserted: source id
  size_t step = 0;           // Derived: id of the concluding step
  std::string builtin_iri;   // Builtin
  std::vector<Term> inputs;  // Builtin: resolved inputs in atom order
  std::optional<Term> output;
};

/// One rule firing: substituting the binding into the rule's antecedent
/// reproduces exactly the premises, substituting into the consequent
/// reproduces exactly the conclusions.
struct ProofStep {
  size_t id = 0;
  std::string rule_id;
  Binding binding;
  std::vector<ProofPremise> premises;
  std::vector<Triple> conclusions;
};

/// Checkable record of a conversion: asserted sources (by id and digest),
/// topologically ordered steps, and the digest of the derived graph.
struct Proof {
  std::string mode; // "single-pass" | "fixpoint"
  std::vector<std::pair<std::string, std::string>> sources; // (id, graph hash)
  std::vector<ProofStep> steps;
  std::string conclusion_hash;

  nlohmann::json to_json() const;
  static Proof from_json(const nlohmann::json& j);
};

namespace detail {

inline nlohmann::json triple_json(const Triple& t) {
  return nlohmann::json::array(
      {TermPool::key(t.s), TermPool::key(t.p), TermPool::key(t.o)});
}

inline Triple triple_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ModelError("malformed triple in proof");
  return Triple{TermPool::intern(parse_term_key(j[0].get<std::string>())),
                TermPool::intern(parse_term_key(j[1].get<std::string>())),
                TermPool::intern(parse_term_key(j[2].get<std::string>()))};
}

} // namespace detail

inline nlohmann::json Proof::to_json() const {
  nlohmann::json j;
  j["format"] = "sdv-proof/1";
  j["mode"] = mode;
  j["sources"] = nlohmann::json::array();
  for (const auto& [id, hash] : sources) j["sources"].push_back({{"id", id}, {"hash", hash}});
  j["steps"] = nlohmann::json::array();
  for (const ProofStep& s : steps) {
    nlohmann::json js;
    js["id"] = s.id;
    js["rule"] = s.rule_id;
    nlohmann::json binding = nlohmann::json::object();
    for (const auto& [var, val] : s.binding.entries())
      binding[TermPool::term(var).value] = TermPool::key(val);
    js["binding"] = std::move(binding);
    js["premises"] = nlohmann::json::array();
    for (const ProofPremise& p : s.premises) {
      nlohmann::json jp;
      switch (p.kind) {
        case ProofPremise::Kind::Asserted:
          jp["kind"] = "asserted";
          jp["source"] = p.source;
          jp["triple"] = detail::triple_json(p.triple);
          break;
        case ProofPremise::Kind::Derived:
          jp["kind"] = "derived";
          jp["step"] = p.step;
          jp["triple"] = detail::triple_json(p.triple);
          break;
        case ProofPremise::Kind::Builtin:
          jp["kind"] = "builtin";
          jp["builtin"] = p.builtin_iri;
          jp["inputs"] = nlohmann::json::array();
          for (const Term& t : p.inputs) jp["inputs"].push_back(term_key(t));
          if (p.output) jp["output"] = term_key(*p.output);
          break;
      }
      js["premises"].push_back(std::move(jp));
    }
    js["conclusions"] = nlohmann::json::array();
    for (const Triple& t : s.conclusions) js["conclusions"].push_back(detail::triple_json(t));
    j["steps"].push_back(std::move(js));
  }
  j["conclusion_hash"] = conclusion_hash;
  return j;
}

inline Proof Proof::from_json(const nlohmann::json& j) {
  Proof p;
  if (j.value("format", "") != "sdv-proof/1") throw ModelError("unsupported proof format");
  p.mode = j.value("mode", "single-pass");
  for (const auto& s : j.at("sources"))
    p.sources.emplace_back(s.at("id").get<std::string>(), s.at("hash").get<std::string>());
  for (const auto& js : j.at("steps")) {
    ProofStep step;
    step.id = js.at("id").get<size_t>();
    step.rule_id = js.at("rule").get<std::string>();
    for (const auto& [var, val] : js.at("binding").items())
      step.binding.bind(TermPool::intern_var(var),
                        TermPool::intern(parse_term_key(val.get<std::string>())));
    for (const auto& jp : js.at("premises")) {
      ProofPremise prem;
      std::string kind = jp.at("kind").get<std::string>();
      if (kind == "asserted") {
        prem.kind = ProofPremise::Kind::Asserted;
        prem.source = jp.at("source").get<std::string>();
        prem.triple = detail::triple_from_json(jp.at("triple"));
      } else if (kind == "derived") {
        prem.kind = ProofPremise::Kind::Derived;
        prem.step = jp.at("step").get<size_t>();
        prem.triple = detail::triple_from_json(jp.at("triple"));
      } else if (kind == "builtin") {
        prem.kind = ProofPremise::Kind::Builtin;
        prem.builtin_iri = jp.at("builtin").get<std::string>();
        for (const auto& in : jp.at("inputs"))
          prem.inputs.push_back(parse_term_key(in.get<std::string>()));
        if (jp.contains("output"))
          prem.output = parse_term_key(jp.at("output").get<std::string>());
      } else {
        throw ModelError("unknown premise kind '" + kind + "'");
      }
      step.premises.push_back(std::move(prem));
    }
    for (const auto& jt : js.at("conclusions"))
      step.conclusions.push_back(detail::triple_from_json(jt));
    p.steps.push_back(std::move(step));
  }
  p.conclusion_hash = j.at("conclusion_hash").get<std::string>();
  return p;
}

} // namespace sdv

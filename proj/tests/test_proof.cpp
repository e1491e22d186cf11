#include <doctest.h>

#include "sdv/proof.hpp"
#include "sdv/proof_check.hpp"
#include "sdv/rule_engine.hpp"
#include "sdv/turtle.hpp"

#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace sdv;
using namespace testsupport;

namespace {

struct GoldenRun {
  Graph source;
  RuleSet rules;
  Proof proof;
  Graph derived;
};

GoldenRun golden_run() {
  GoldenRun run;
  run.source = load_ttl("golden/expected/source_demographics.ttl");
  run.rules =
      parse_rules(slurp(fixtures_dir() / "golden/entities/demographics/rules.n3"), "rules.n3");
  SourceGraph sg{"source-entity", &run.source};
  ApplyResult r = apply_rules({&sg, 1}, run.rules, ApplyMode::SinglePass, {true, false});
  run.proof = std::move(*r.proof);
  run.derived = std::move(r.derived);
  return run;
}

Verdict check(const GoldenRun& run, const Proof& p) {
  SourceGraph sg{"source-entity", &run.source};
  return check_proof(p, {&sg, 1}, run.rules);
}

// Semantically breaking single mutations. Each returns a description.
std::string mutate(Rng& rng, Proof& p, const GoldenRun& run) {
  REQUIRE(!p.steps.empty());
  ProofStep& step = p.steps[rng.below(p.steps.size())];
  size_t kind = rng.below(3);
  if (kind == 0 && step.binding.entries().empty()) kind = 1; // nothing to rebind
  switch (kind) {
    case 0: { // altered binding: rebind one variable to a different term
      const auto& entries = step.binding.entries();
      REQUIRE(!entries.empty());
      size_t k = rng.below(entries.size());
      Binding mutated;
      for (size_t i = 0; i < entries.size(); ++i) {
        TermId val = entries[i].second;
        if (i == k) val = TermPool::intern(Term::iri("http://mutated.invalid/" +
                                                     std::to_string(rng.below(1u << 30))));
        mutated.bind(entries[i].first, val);
      }
      step.binding = mutated;
      return "binding";
    }
    case 1: { // altered conclusion object
      REQUIRE(!step.conclusions.empty());
      Triple& t = step.conclusions[rng.below(step.conclusions.size())];
      t.o = TermPool::intern(Term::literal("mutated-" + std::to_string(rng.below(1u << 30))));
      return "conclusion";
    }
    default: { // altered premise provenance
      std::vector<size_t> idx;
      for (size_t i = 0; i < step.premises.size(); ++i)
        if (step.premises[i].kind != ProofPremise::Kind::Builtin) idx.push_back(i);
      REQUIRE(!idx.empty());
      ProofPremise& prem = step.premises[idx[rng.below(idx.size())]];
      if (prem.kind == ProofPremise::Kind::Asserted && rng.chance(0.5)) {
        prem.source = "mutated:no-such-source";
      } else {
        prem.kind = ProofPremise::Kind::Derived;
        prem.step = p.steps.size() + 7; // cites a step that does not exist yet
      }
      (void)run;
      return "provenance";
    }
  }
}

} // namespace

TEST_CASE("proof: golden conversion proof is sound and complete") {
  GoldenRun run = golden_run();
  CHECK(run.proof.steps.size() == 3);
  CHECK(run.proof.mode == "single-pass");
  Verdict v = check(run, run.proof);
  CHECK(v.valid);

  // completeness: every derived triple appears in some step's conclusions
  for (const Triple& t : run.derived.triples()) {
    bool found = false;
    for (const ProofStep& s : run.proof.steps)
      for (const Triple& c : s.conclusions)
        if (c == t) found = true;
    CHECK(found);
  }
}

TEST_CASE("proof: JSON round trip preserves validity") {
  GoldenRun run = golden_run();
  nlohmann::json j = run.proof.to_json();
  Proof back = Proof::from_json(j);
  CHECK(back.steps.size() == run.proof.steps.size());
  CHECK(back.conclusion_hash == run.proof.conclusion_hash);
  CHECK(check(run, back).valid);
}

TEST_CASE("proof: single altered conclusion is caught at its step") {
  GoldenRun run = golden_run();
  Proof tampered = run.proof;
  tampered.steps[1].conclusions[0].o = TermPool::intern(Term::literal("Mallory"));
  Verdict v = check(run, tampered);
  CHECK_FALSE(v.valid);
  CHECK(v.step == 1);
}

TEST_CASE("proof: wrong rule set is rejected") {
  GoldenRun run = golden_run();
  RuleSet other =
      parse_rules(slurp(fixtures_dir() / "golden/entities/omop/person/rules.n3"), "omop.n3");
  SourceGraph sg{"source-entity", &run.source};
  Verdict v = check_proof(run.proof, {&sg, 1}, other);
  CHECK_FALSE(v.valid);
  CHECK(v.reason.find("unknown rule") != std::string::npos);
}

TEST_CASE("proof: wrong source graph is rejected by hash") {
  GoldenRun run = golden_run();
  Graph other = parse_turtle("<http://e.invalid/s> <http://e.invalid/p> 1 .");
  SourceGraph sg{"source-entity", &other};
  Verdict v = check_proof(run.proof, {&sg, 1}, run.rules);
  CHECK_FALSE(v.valid);
  CHECK(v.reason.find("hash mismatch") != std::string::npos);
}

TEST_CASE("proof: missing source is rejected") {
  GoldenRun run = golden_run();
  SourceGraph sg{"some-other-id", &run.source};
  Verdict v = check_proof(run.proof, {&sg, 1}, run.rules);
  CHECK_FALSE(v.valid);
}

TEST_CASE("proof: conclusion hash binds the emitted graph") {
  GoldenRun run = golden_run();
  Proof tampered = run.proof;
  tampered.conclusion_hash[0] = tampered.conclusion_hash[0] == 'a' ? 'b' : 'a';
  Verdict v = check(run, tampered);
  CHECK_FALSE(v.valid);
  CHECK(v.reason.find("conclusion hash") != std::string::npos);
}

TEST_CASE("proof: 100 random single mutations are each rejected with a step") {
  GoldenRun run = golden_run();
  Rng rng(481516);
  int rejected_with_step = 0;
  for (int i = 0; i < 100; ++i) {
    Proof mutated = run.proof;
    std::string kind = mutate(rng, mutated, run);
    Verdict v = check(run, mutated);
    CAPTURE(i);
    CAPTURE(kind);
    CHECK_FALSE(v.valid);
    if (v.step >= 0) ++rejected_with_step;
  }
  CHECK(rejected_with_step == 100);
}

TEST_CASE("proof: fixpoint proofs over random rules stay sound, mutations break them") {
  Rng rng(160342);
  Vocab v = make_vocab(rng, false, true);
  int mutated_checked = 0;
  for (int round = 0; round < 60; ++round) {
    Graph g = random_graph(rng, v, 25);
    RuleSet rules = random_rules(rng, v, 4, true);
    SourceGraph sg{"random-input", &g};
    ApplyResult r = apply_rules({&sg, 1}, rules, ApplyMode::Fixpoint, {true, false});
    Verdict ok = check_proof(*r.proof, {&sg, 1}, rules);
    CAPTURE(round);
    REQUIRE(ok.valid);

    // completeness on the way: every derived triple concluded somewhere
    for (const Triple& t : r.derived.triples()) {
      bool found = false;
      for (const ProofStep& s : r.proof->steps)
        for (const Triple& c : s.conclusions)
          if (c == t) found = true;
      CHECK(found);
    }

    if (!r.proof->steps.empty()) {
      Proof bad = *r.proof;
      GoldenRun fake;
      fake.source = g;
      fake.rules = rules;
      mutate(rng, bad, fake);
      Verdict rejected = check_proof(bad, {&sg, 1}, rules);
      CHECK_FALSE(rejected.valid);
      ++mutated_checked;
    }
  }
  CHECK(mutated_checked > 10); // enough random runs derive something
}

TEST_CASE("proof: all-justifications records duplicate derivations") {
  Graph g = parse_turtle(R"(
<http://e.invalid/a> <http://e.invalid/p> <http://e.invalid/b> .
<http://e.invalid/a> <http://e.invalid/q> <http://e.invalid/b> .
)");
  RuleSet rules = parse_rules(R"(
PREFIX e: <http://e.invalid/>
{ ?x e:p ?y. } => { ?x e:r ?y. }.
{ ?x e:q ?y. } => { ?x e:r ?y. }.
)");
  SourceGraph sg{"g", &g};
  ApplyResult first = apply_rules({&sg, 1}, rules, ApplyMode::SinglePass, {true, false});
  CHECK(first.proof->steps.size() == 1); // duplicate firing dropped
  ApplyResult all = apply_rules({&sg, 1}, rules, ApplyMode::SinglePass, {true, true});
  CHECK(all.proof->steps.size() == 2); // both justifications kept
  CHECK(check_proof(*all.proof, {&sg, 1}, rules).valid);
}

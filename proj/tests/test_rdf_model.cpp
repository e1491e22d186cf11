#include <doctest.h>

#include <algorithm>

#include "sdv/graph.hpp"
#include "sdv/isomorphism.hpp"
#include "sdv/turtle.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace sdv;
using namespace testsupport;

TEST_CASE("terms: literal datatype defaults") {
  Term plain = Term::literal("abc");
  CHECK(plain.datatype == xsd::string_);
  Term tagged = Term::lang_literal("abc", "en");
  CHECK(tagged.datatype == rdf_langString);
  CHECK(tagged.lang == "en");
}

TEST_CASE("terms: key round trip") {
  std::vector<Term> terms = {
      Term::iri("http://example.org/x"),
      Term::blank("b1"),
      Term::variable("v"),
      Term::literal("plain"),
      Term::literal("1990", xsd::integer_),
      Term::lang_literal("hello", "en-GB"),
      Term::literal("line\nbreak\t\"quoted\"", xsd::string_),
  };
  for (const Term& t : terms) {
    CAPTURE(term_key(t));
    CHECK(parse_term_key(term_key(t)) == t);
  }
}

TEST_CASE("terms: lexical equality, no value-space normalization") {
  Term a = Term::literal("1990-02-08T00:00:00+01:00", xsd::dateTime_);
  Term b = Term::literal("1990-02-08T00:00:00+01:00", xsd::dateTime_);
  Term c = Term::literal("1990-02-07T23:00:00Z", xsd::dateTime_); // same instant, different lexical
  CHECK(a == b);
  CHECK(TermPool::intern(a) == TermPool::intern(b));
  CHECK_FALSE(a == c);
  CHECK(TermPool::intern(a) != TermPool::intern(c));
}

TEST_CASE("graph: set semantics and validation") {
  Graph g;
  Term s = Term::iri("http://x.invalid/s");
  Term p = Term::iri("http://x.invalid/p");
  CHECK(g.insert(s, p, Term::literal("v")));
  CHECK_FALSE(g.insert(s, p, Term::literal("v"))); // duplicate is a no-op
  CHECK(g.size() == 1);

  CHECK_THROWS_AS(g.insert(s, p, Term::variable("v")), ModelError);
  CHECK_THROWS_AS(g.insert(Term::literal("l"), p, s), ModelError);
  CHECK_THROWS_AS(g.insert(s, Term::blank("b"), s), ModelError);
}

TEST_CASE("graph: union is commutative, associative, idempotent") {
  Rng rng(7101);
  Vocab v = make_vocab(rng, true, false);
  for (int i = 0; i < 40; ++i) {
    Graph a = random_graph(rng, v, 25);
    Graph b = random_graph(rng, v, 25);
    Graph c = random_graph(rng, v, 25);

    Graph ab = a;
    ab.absorb(b);
    Graph ba = b;
    ba.absorb(a);
    CHECK(ab == ba);

    Graph ab_c = ab;
    ab_c.absorb(c);
    Graph bc = b;
    bc.absorb(c);
    Graph a_bc = a;
    a_bc.absorb(bc);
    CHECK(ab_c == a_bc);

    Graph aa = a;
    aa.absorb(a);
    CHECK(aa == a);
  }
}

TEST_CASE("match: golden binding over the demographics source shape") {
  Graph g = parse_turtle(R"(
@prefix patient: <http://www.agfa.com/orbis-schema/Patient#> .
@prefix natperson: <http://www.agfa.com/orbis-schema/Natperson#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
<http://example.org/resource/Patient/1001> patient:persnr <http://example.org/resource/Natperson/1001> .
<http://example.org/resource/Natperson/1001> natperson:vorname "Agfa" .
<http://example.org/resource/Natperson/1001> natperson:name "Healthcare" .
<http://example.org/resource/Natperson/1001> natperson:gebdat "1990-02-08T00:00:00+01:00"^^xsd:dateTime .
)");
  TriplePattern pat{TermPool::intern_var("patient"),
                    TermPool::intern_iri("http://www.agfa.com/orbis-schema/Patient#persnr"),
                    TermPool::intern_var("person")};
  auto bindings = g.match_all(pat);
  REQUIRE(bindings.size() == 1);
  CHECK(*bindings[0].get(TermPool::intern_var("patient")) ==
        TermPool::intern_iri("http://example.org/resource/Patient/1001"));
  CHECK(*bindings[0].get(TermPool::intern_var("person")) ==
        TermPool::intern_iri("http://example.org/resource/Natperson/1001"));
}

TEST_CASE("match: empty graph yields nothing") {
  Graph g;
  TriplePattern pat{TermPool::intern_var("s"), TermPool::intern_var("p"),
                    TermPool::intern_var("o")};
  CHECK(g.match_all(pat).empty());
}

TEST_CASE("match: all-concrete pattern is a membership test") {
  Graph g;
  Term s = Term::iri("http://x.invalid/s"), p = Term::iri("http://x.invalid/p");
  g.insert(s, p, Term::integer(1));
  TriplePattern hit{TermPool::intern(s), TermPool::intern(p), TermPool::intern(Term::integer(1))};
  TriplePattern miss{TermPool::intern(s), TermPool::intern(p), TermPool::intern(Term::integer(2))};
  CHECK(g.match_all(hit).size() == 1);
  CHECK(g.match_all(hit)[0].empty()); // the seed itself
  CHECK(g.match_all(miss).empty());
}

TEST_CASE("match: equals exhaustive enumeration on random graphs") {
  Rng rng(40402);
  Vocab v = make_vocab(rng, true, false);
  for (int round = 0; round < 150; ++round) {
    Graph g = random_graph(rng, v, 50);
    TriplePattern pat = random_pattern(rng, v);
    Binding seed;
    if (rng.chance(0.3)) seed.bind(v.vars[0], TermPool::intern(rng.pick(v.subjects)));

    auto got = g.match_all(pat, seed);
    auto expect = oracle_match(g, pat, seed);
    auto key = [](const Binding& b) { return b.to_string(); };
    std::vector<std::string> gk, ek;
    for (const auto& b : got) gk.push_back(key(b));
    for (const auto& b : expect) ek.push_back(key(b));
    std::sort(gk.begin(), gk.end());
    std::sort(ek.begin(), ek.end());
    CHECK(gk == ek);
    CHECK(std::adjacent_find(gk.begin(), gk.end()) == gk.end()); // no duplicates
  }
}

TEST_CASE("isomorphism: blank node relabeling") {
  Graph a = parse_turtle("_:x <http://p.invalid/p> _:y . _:y <http://p.invalid/p> _:x .");
  Graph b = parse_turtle("_:m <http://p.invalid/p> _:n . _:n <http://p.invalid/p> _:m .");
  CHECK(isomorphic(a, b));

  Graph c = parse_turtle("_:m <http://p.invalid/p> _:m .");
  CHECK_FALSE(isomorphic(a, c));

  Graph d = parse_turtle("_:x <http://p.invalid/p> _:y . _:x <http://p.invalid/p> _:x .");
  CHECK_FALSE(isomorphic(a, d));
}

TEST_CASE("isomorphism: differing ground triples are caught") {
  Graph a = parse_turtle("<http://x.invalid/a> <http://x.invalid/p> 1 .");
  Graph b = parse_turtle("<http://x.invalid/a> <http://x.invalid/p> 2 .");
  CHECK_FALSE(isomorphic(a, b));
  CHECK(isomorphic(a, a));
}

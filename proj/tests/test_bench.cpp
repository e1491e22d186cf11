#include <doctest.h>

#include "sdv/bench.hpp"
#include "sdv/isomorphism.hpp"

#include "support/fixtures.hpp"

using namespace sdv;
using namespace testsupport;

TEST_CASE("bench: synthetic generator is seeded and sized") {
  SyntheticData a = synthetic_diagnosis(70'000, 11);
  SyntheticData b = synthetic_diagnosis(70'000, 11);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].values == b.rows[i].values);

  Graph g = map_rows(a.schema, a.rows);
  CHECK(g.size() >= 69'000);
  CHECK(g.size() <= 71'000);

  SyntheticData different = synthetic_diagnosis(70'000, 12);
  CHECK_FALSE(map_rows(different.schema, different.rows) == g);

  CHECK(synthetic_diagnosis(0, 1).rows.empty());
}

TEST_CASE("bench: 4-way row split converts to the same graph as one shot") {
  // ~10k diagnosis rows
  SyntheticData data = synthetic_diagnosis(70'000, 3);
  RuleSet rules = parse_rules(synthetic_diagnosis_rules(), "rules.n3");

  Graph whole = apply_rules(map_rows(data.schema, data.rows), rules, ApplyMode::SinglePass).derived;

  Graph unioned;
  size_t chunk = (data.rows.size() + 3) / 4;
  for (size_t p = 0; p < 4; ++p) {
    size_t begin = std::min(data.rows.size(), p * chunk);
    size_t end = std::min(data.rows.size(), begin + chunk);
    Graph part = map_rows(data.schema,
                          std::span<const Row>(data.rows.data() + begin, end - begin));
    unioned.absorb(apply_rules(part, rules, ApplyMode::SinglePass).derived);
  }
  CHECK(unioned.size() == whole.size());
  CHECK(isomorphic(unioned, whole));

  // the bench runner reports the same derived count either way
  BenchRow one = run_bench_case(rules, 70'000, 3, 1, 1);
  BenchRow four = run_bench_case(rules, 70'000, 3, 1, 4);
  CHECK(one.derived_triples == four.derived_triples);
  CHECK(four.partitions == 4);
}

TEST_CASE("bench: size 0 reports a zero row without crashing") {
  RuleSet rules = parse_rules(synthetic_diagnosis_rules(), "rules.n3");
  BenchRow r = run_bench_case(rules, 0, 1, 1, 1);
  CHECK(r.records == 0);
  CHECK(r.input_triples == 0);
  CHECK(r.derived_triples == 0);
  std::string csv = bench_csv(std::span<const BenchRow>(&r, 1));
  CHECK(csv.find("\n0,0,0,") != std::string::npos);
}

TEST_CASE("bench: total time is monotone in input size") {
  RuleSet rules = parse_rules(synthetic_diagnosis_rules(), "rules.n3");
  BenchRow small = run_bench_case(rules, 2'000, 5, 1, 1);
  BenchRow large = run_bench_case(rules, 200'000, 5, 1, 1);
  CHECK(small.retrieve_s + small.convert_s < large.retrieve_s + large.convert_s);
}

#include <doctest.h>

#include "sdv/etl.hpp"
#include "sdv/turtle.hpp"

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace sdv;
using namespace testsupport;

namespace {

TargetTableSpec person_spec() {
  return load_target_spec(slurp(fixtures_dir() / "golden/etl/person.spec"),
                          slurp(fixtures_dir() / "golden/etl/person.rq"));
}

} // namespace

TEST_CASE("target spec: golden PERSON manifest") {
  TargetTableSpec spec = person_spec();
  CHECK(spec.table == "PERSON");
  CHECK(spec.columns.size() == 4);
  CHECK(spec.key_column == "person_id");
  CHECK(spec.key_index() == 0);
  CHECK(spec.subject_key == SubjectKeyRule::LastSegment);
}

TEST_CASE("target spec: arity and key validation") {
  CHECK_THROWS_AS(load_target_spec("target T\nkey k\ncolumn k:integer\ncolumn extra:integer\n",
                                   "SELECT ?k WHERE { ?k ?p ?o }"),
                  ConfigError);
  CHECK_THROWS_AS(load_target_spec("target T\nkey missing\ncolumn k:integer\n",
                                   "SELECT ?k WHERE { ?k ?p ?o }"),
                  ConfigError);
}

TEST_CASE("project: golden application entity becomes the PERSON row") {
  Graph entity = load_ttl("golden/expected/omop_person.ttl");
  TableRows rows = project(entity, person_spec());
  REQUIRE(rows.rows.size() == 1);
  CHECK(rows.columns == std::vector<std::string>{"person_id", "year_of_birth", "month_of_birth",
                                                 "day_of_birth"});
  CHECK(rows.rows[0] == std::vector<std::string>{"1001", "1990", "2", "8"});
}

TEST_CASE("project: empty entity yields zero rows") {
  CHECK(project(Graph{}, person_spec()).rows.empty());
}

TEST_CASE("project: canonical lexical forms") {
  Graph g;
  Term s = Term::iri("http://e.invalid/res/Thing/0042");
  Term p1 = Term::iri("http://e.invalid/o#n");
  Term p2 = Term::iri("http://e.invalid/o#d");
  g.insert(s, p1, Term::literal("+0090", xsd::integer_));
  g.insert(s, p2, Term::literal("1990-02-08T00:00:00+01:00", xsd::dateTime_));

  TargetTableSpec spec = load_target_spec(R"(
target THING
key thing_id
column thing_id:integer
column n:integer
column d:date
)",
                                          R"(
PREFIX o: <http://e.invalid/o#>
SELECT ?s ?n ?d WHERE { ?s o:n ?n . ?s o:d ?d . }
)");
  TableRows rows = project(g, spec);
  REQUIRE(rows.rows.size() == 1);
  CHECK(rows.rows[0][0] == "0042"); // key = last IRI segment, verbatim
  CHECK(rows.rows[0][1] == "90");   // canonical integer
  CHECK(rows.rows[0][2] == "1990-02-08"); // date part of the dateTime
}

TEST_CASE("project: 1k synthetic persons count equals subjects with a year") {
  Rng rng(1100);
  Graph g;
  size_t with_year = 0;
  for (int i = 0; i < 1000; ++i) {
    Term s = Term::iri("http://e.invalid/res/P/" + std::to_string(i));
    bool has_year = rng.chance(0.8);
    if (has_year) {
      ++with_year;
      g.insert(s, Term::iri("http://o.invalid/yearOfBirth"), Term::integer(1900 + rng.range(0, 99)));
    }
    g.insert(s, Term::iri("http://o.invalid/note"), Term::literal("x"));
  }
  TargetTableSpec spec = load_target_spec(
      "target P\nkey person_id\ncolumn person_id:integer\ncolumn year_of_birth:integer\n",
      "PREFIX o: <http://o.invalid/>\nSELECT ?p ?y WHERE { ?p o:yearOfBirth ?y }");
  CHECK(project(g, spec).rows.size() == with_year);
}

TEST_CASE("load: golden row, then idempotent duplicate skip") {
  auto dir = scratch_dir("etl-golden");
  Graph entity = load_ttl("golden/expected/omop_person.ttl");
  TargetTableSpec spec = person_spec();
  TableRows rows = project(entity, spec);

  LoadReport first = load(rows, spec, dir);
  CHECK(first.inserted == 1);
  CHECK(first.skipped_duplicate_key == 0);
  CHECK(first.rejected == 0);
  CHECK(slurp(dir / "PERSON.csv") == slurp(fixtures_dir() / "golden/expected/PERSON.csv"));

  LoadReport second = load(rows, spec, dir);
  CHECK(second.inserted == 0);
  CHECK(second.skipped_duplicate_key == 1);
  CHECK(slurp(dir / "PERSON.csv") == slurp(fixtures_dir() / "golden/expected/PERSON.csv"));

  nlohmann::json j = second.to_json();
  CHECK(j["skipped_duplicate_key"] == 1);
}

TEST_CASE("load: replace policy overwrites the stored row") {
  auto dir = scratch_dir("etl-replace");
  TargetTableSpec spec = load_target_spec(
      "target T\nkey id\ncolumn id:integer\ncolumn v:string\non_duplicate replace\n",
      "PREFIX o: <http://o.invalid/>\nSELECT ?s ?v WHERE { ?s o:v ?v }");
  TableRows rows;
  rows.columns = {"id", "v"};
  rows.rows = {{"1", "old"}};
  load(rows, spec, dir);
  rows.rows = {{"1", "new"}};
  LoadReport r = load(rows, spec, dir);
  CHECK(r.inserted == 1);
  CHECK(slurp(dir / "T.csv") == "id,v\n1,new\n");
}

TEST_CASE("load: fault injection, rejected count equals injected count") {
  Rng rng(9442);
  auto dir = scratch_dir("etl-faults");
  TargetTableSpec spec = load_target_spec(
      "target T\nkey id\ncolumn id:integer\ncolumn n:integer\n",
      "PREFIX o: <http://o.invalid/>\nSELECT ?s ?n WHERE { ?s o:n ?n }");

  TableRows rows;
  rows.columns = {"id", "n"};
  size_t injected = 0;
  for (int i = 0; i < 10000; ++i) {
    if (rng.chance(0.01)) {
      ++injected;
      rows.rows.push_back({std::to_string(i), "not-a-number"});
    } else {
      rows.rows.push_back({std::to_string(i), std::to_string(i * 2)});
    }
  }
  LoadReport r = load(rows, spec, dir);
  CHECK(r.rejected == injected);
  CHECK(r.inserted == rows.rows.size() - injected);
  CHECK(r.inserted + r.skipped_duplicate_key + r.rejected == rows.rows.size());
  CHECK(r.log.size() == injected);
}

TEST_CASE("project: null key is an error") {
  Graph g;
  g.insert(Term::iri("http://e.invalid/res/P/1"), Term::iri("http://o.invalid/y"),
           Term::integer(1990));
  // ?other never binds (OPTIONAL), so the key cell would be empty
  TargetTableSpec spec = load_target_spec(
      "target T\nkey k\ncolumn k:string\ncolumn y:integer\n",
      "PREFIX o: <http://o.invalid/>\nSELECT ?other ?y WHERE { ?p o:y ?y . OPTIONAL { ?p o:nope "
      "?other } }");
  CHECK_THROWS_AS(project(g, spec), EvalError);
}

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "sdv/isomorphism.hpp"
#include "sdv/turtle.hpp"

#include "support/fixtures.hpp"

using namespace testsupport;

namespace {

struct CliResult {
  int exit_code;
  std::string output; // stdout + stderr
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(SDV_BINARY_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string output;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  while (fgets(buf.data(), buf.size(), pipe)) output += buf.data();
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, output};
}

std::string golden_config() { return (fixtures_dir() / "golden/config.txt").string(); }
std::string threerow_config() { return (fixtures_dir() / "threerow/config.txt").string(); }

const std::string kPatientParam =
    "--param patient_uri=http://example.org/resource/Patient/1001";

} // namespace

TEST_CASE("cli: run produces the golden application entity, byte-stable") {
  auto dir = scratch_dir("cli-run");
  std::string out = (dir / "person.ttl").string();
  CliResult r = run_cli("run omop/person --config " + golden_config() + " " + kPatientParam +
                        " --out " + out);
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  sdv::Graph got = sdv::parse_turtle(slurp(out));
  CHECK(sdv::isomorphic(got, load_ttl("golden/expected/omop_person.ttl")));

  std::string again = (dir / "person2.ttl").string();
  CliResult r2 = run_cli("run omop/person --config " + golden_config() + " " + kPatientParam +
                         " --out " + again);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(out) == slurp(again)); // byte-identical across runs
}

TEST_CASE("cli: run over the 3-row source without a filter returns all patients") {
  CliResult r = run_cli("run demographics --config " + threerow_config());
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  sdv::Graph g = sdv::parse_turtle(r.output);
  // 3 patients x (2 types + familyName + birthDate) = 12
  CHECK(g.size() == 12);
}

TEST_CASE("cli: unknown entity exits with the 404-equivalent code") {
  CliResult r = run_cli("run no/such/entity --config " + golden_config());
  CHECK(r.exit_code == 3);
}

TEST_CASE("cli: missing required parameter exits with the 400-equivalent code") {
  CliResult r = run_cli("run omop/person --config " + golden_config());
  CHECK(r.exit_code == 4);
}

TEST_CASE("cli: verify accepts the emitted proof and rejects tampering") {
  auto dir = scratch_dir("cli-verify");
  std::string entity = (dir / "domain.ttl").string();
  std::string proof = (dir / "proof.json").string();
  std::string src = (dir / "source.ttl").string();
  std::string adr = (dir / "address.ttl").string();

  REQUIRE(run_cli("run orbis/demographics/demographics --config " + golden_config() + " " +
                  kPatientParam + " --out " + src)
              .exit_code == 0);
  REQUIRE(run_cli("run orbis/demographics/address --config " + golden_config() + " " +
                  kPatientParam + " --out " + adr)
              .exit_code == 0);
  REQUIRE(run_cli("run demographics --config " + golden_config() + " " + kPatientParam +
                  " --out " + entity + " --proof-out " + proof)
              .exit_code == 0);

  std::string rules = (fixtures_dir() / "golden/entities/demographics/rules.n3").string();

  // proof source ids are the fetched input URLs; --input splits id=path at
  // the last '='
  auto j = nlohmann::json::parse(slurp(proof));
  REQUIRE(j["sources"].size() == 2);
  std::string inputs = " --input \"" + j["sources"][0]["id"].get<std::string>() + "=" + src +
                       "\" --input \"" + j["sources"][1]["id"].get<std::string>() + "=" + adr +
                       "\"";

  CliResult ok = run_cli("verify --proof " + proof + " --rules " + rules + inputs);
  CAPTURE(ok.output);
  CHECK(ok.exit_code == 0);

  nlohmann::json bad = j;
  bad["steps"][0]["conclusions"][0][2] = "\"tampered\"";
  std::string bad_proof = (dir / "proof-bad.json").string();
  spit(bad_proof, bad.dump(2));
  CliResult rej = run_cli("verify --proof " + bad_proof + " --rules " + rules + inputs);
  CHECK(rej.exit_code == 7);
  CHECK(rej.output.find("step") != std::string::npos);

  // wrong rule file: ids do not resolve
  std::string wrong_rules = (fixtures_dir() / "golden/entities/omop/person/rules.n3").string();
  CliResult wrong = run_cli("verify --proof " + proof + " --rules " + wrong_rules + inputs);
  CHECK(wrong.exit_code == 7);
}

TEST_CASE("cli: partition flag unions the sub-entities") {
  CliResult whole = run_cli("run bench/domain --config " +
                            (fixtures_dir() / "bench/config.txt").string());
  REQUIRE(whole.exit_code == 0);
  CliResult parts = run_cli("run bench/domain --config " +
                            (fixtures_dir() / "bench/config.txt").string() +
                            " --partition month=1,2,3,4,5,6,7,8,9,10,11,12");
  REQUIRE(parts.exit_code == 0);
  CHECK(sdv::isomorphic(sdv::parse_turtle(whole.output), sdv::parse_turtle(parts.output)));
}

TEST_CASE("cli: bench runs a tiny size and emits the report CSV") {
  auto dir = scratch_dir("cli-bench");
  std::string out = (dir / "bench.csv").string();
  CliResult r = run_cli("bench bench/domain --config " +
                        (fixtures_dir() / "bench/config.txt").string() +
                        " --sizes 0,2000 --reps 1 --seed 7 --out " + out);
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  std::string csv = slurp(out);
  CHECK(csv.find("target_triples") != std::string::npos);
  CHECK(csv.find("\n0,0,0,") != std::string::npos); // size 0: no crash, zero row
  CHECK(csv.find("\n2000,") != std::string::npos);
}

TEST_CASE("cli: serve fails fast on a broken entities root, naming the entity") {
  auto dir = scratch_dir("cli-serve-broken");
  spit(dir / "entities/bad/config", "kind converted\nrules rules.n3\n");
  spit(dir / "entities/bad/rules.n3",
       "{ ?s <http://p.invalid/a> ?o. } => { ?s <http://p.invalid/b> ?o. }.");
  spit(dir / "entities/bad/inputs.list", "/entities/gone\n");
  spit(dir / "config.txt", "entities_root entities\nlisten 127.0.0.1:0\n");
  CliResult r = run_cli("serve --config " + (dir / "config.txt").string());
  CHECK(r.exit_code == 8);
  CHECK(r.output.find("bad") != std::string::npos);
  CHECK(r.output.find("gone") != std::string::npos);
}

TEST_CASE("cli: usage errors exit with 2") {
  CHECK(run_cli("run").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
}

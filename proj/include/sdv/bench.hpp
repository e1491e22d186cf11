#pragma once

#include <chrono>
#include <cstdint>
#include <future>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdv/direct_mapping.hpp"
#include "sdv/rule_engine.hpp"

namespace sdv {

/// Seeded synthetic Layer-1 data shaped like a clinical diagnosis feed: a
/// PATIENT table and a DIAGNOSIS table with code/date/severity/status
/// columns. Row counts are derived from a target input-triple count so runs
/// are comparable across sizes.
struct SyntheticData {
  TableSchemaSet schema;
  std::vector<Row> rows;
  size_t diagnosis_rows = 0;
};

inline TableSchemaSet synthetic_diagnosis_schema() {
  TableSchemaSet set;
  set.resource_base = "http://bench.invalid/resource";
  set.onto_base = "http://bench.invalid/schema";
  set.default_tz = "+01:00";

  TableSchema patient;
  patient.name = "PATIENT";
  patient.pk = "id";
  patient.columns.push_back({"id", ColumnType::Integer, false, std::nullopt});
  set.tables.emplace("PATIENT", std::move(patient));

  TableSchema diagnosis;
  diagnosis.name = "DIAGNOSIS";
  diagnosis.pk = "id";
  diagnosis.columns.push_back({"id", ColumnType::Integer, false, std::nullopt});
  diagnosis.columns.push_back({"patnr", ColumnType::Integer, false, ForeignKey{"PATIENT", "id"}});
  diagnosis.columns.push_back({"code", ColumnType::String, false, std::nullopt});
  diagnosis.columns.push_back({"recorded", ColumnType::DateTime, false, std::nullopt});
  diagnosis.columns.push_back({"month", ColumnType::Integer, false, std::nullopt});
  diagnosis.columns.push_back({"severity", ColumnType::Integer, false, std::nullopt});
  diagnosis.columns.push_back({"status", ColumnType::String, false, std::nullopt});
  set.tables.emplace("DIAGNOSIS", std::move(diagnosis));
  return set;
}

/// Conversion rules for the synthetic feed, shaped like real source-to-domain
/// mappings: every rule anchors the record type and joins the properties it
/// translates, with date-part extraction and guarded classifications.
inline std::string synthetic_diagnosis_rules() {
  return R"(PREFIX diagnosis: <http://bench.invalid/schema/Diagnosis#>
PREFIX patient: <http://bench.invalid/schema/Patient#>
PREFIX dom: <http://bench.invalid/domain#>
PREFIX func: <http://www.w3.org/2007/rif-builtin-function#>
PREFIX math: <http://www.w3.org/2000/10/swap/math#>
PREFIX log: <http://www.w3.org/2000/10/swap/log#>

{ ?d a diagnosis:Class. ?d diagnosis:patnr ?p. } => { ?d a dom:Diagnosis. ?d dom:subject ?p. ?p a dom:Patient. }.
{ ?d a diagnosis:Class. ?d diagnosis:code ?c. ?d diagnosis:status ?st. } => { ?d dom:code ?c. }.
{ ?d a diagnosis:Class. ?d diagnosis:recorded ?t. (?t) func:year-from-dateTime ?y. } => { ?d dom:year ?y. }.
{ ?d a diagnosis:Class. ?d diagnosis:recorded ?t. (?t) func:month-from-dateTime ?m. } => { ?d dom:month ?m. }.
{ ?d a diagnosis:Class. ?d diagnosis:recorded ?t. (?t) func:day-from-dateTime ?day. } => { ?d dom:day ?day. }.
{ ?d a diagnosis:Class. ?d diagnosis:severity ?s. ?s math:greaterThan 3. } => { ?d a dom:SevereDiagnosis. }.
{ ?d a diagnosis:Class. ?d diagnosis:status ?st. ?st log:equalTo "active". } => { ?d a dom:ActiveDiagnosis. }.
{ ?d a diagnosis:Class. ?d diagnosis:code ?c. ?d diagnosis:status ?st. (?c "/" ?st) func:concat ?label. } => { ?d dom:label ?label. }.
{ ?d a diagnosis:Class. ?d diagnosis:patnr ?p. ?d diagnosis:severity ?s. ?s math:greaterThan 4. } => { ?p a dom:FlaggedPatient. }.
)";
}

/// Triples per diagnosis row: 1 type + 6 columns.
inline constexpr size_t kTriplesPerDiagnosisRow = 7;

inline SyntheticData synthetic_diagnosis(size_t target_triples, uint64_t seed) {
  SyntheticData data;
  data.schema = synthetic_diagnosis_schema();

  if (target_triples == 0) return data;

  // n_diag*7 + ceil(n_diag/50) ~ target, one patient per 50 diagnoses
  size_t n_diag =
      std::max<size_t>(1, (target_triples * 50) / (50 * kTriplesPerDiagnosisRow + 1));
  size_t n_patient = (n_diag + 49) / 50;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> month(1, 12);
  std::uniform_int_distribution<int> day(1, 28);
  std::uniform_int_distribution<int> severity(1, 5);
  std::uniform_int_distribution<int> code(100, 999);
  std::uniform_int_distribution<int> status(0, 2);
  static const char* statuses[] = {"active", "resolved", "ruled-out"};

  for (size_t i = 0; i < n_patient; ++i) {
    Row row;
    row.table = "PATIENT";
    row.values = {std::to_string(i + 1)};
    data.rows.push_back(std::move(row));
  }
  for (size_t i = 0; i < n_diag; ++i) {
    Row row;
    row.table = "DIAGNOSIS";
    int m = month(rng);
    char recorded[32];
    std::snprintf(recorded, sizeof recorded, "2014-%02d-%02d 09:%02d:00", m, day(rng),
                  int(i % 60));
    row.values = {std::to_string(i + 1),
                  std::to_string(i % n_patient + 1),
                  "C" + std::to_string(code(rng)),
                  recorded,
                  std::to_string(m),
                  std::to_string(severity(rng)),
                  statuses[status(rng)]};
    data.rows.push_back(std::move(row));
  }
  data.diagnosis_rows = n_diag;
  return data;
}

// ---------------------------------------------------------------------------

/// One measured size point of a bench run.
struct BenchRow {
  size_t target_triples = 0;
  size_t input_triples = 0;
  size_t records = 0; // diagnosis rows
  double retrieve_s = 0;
  double convert_s = 0;
  size_t derived_triples = 0;
  double records_per_s = 0;
  double derived_per_s = 0;
  int reps = 1;
  int partitions = 1;
};

/// Generates synthetic data at the target size, maps it to RDF (the
/// retrieve phase), then applies the rules (the convert phase). With
/// partitions > 1 the row stream is split and converted concurrently, the
/// derived graphs unioned. Times are best-of-reps, which filters scheduler
/// noise out of the small sizes.
inline BenchRow run_bench_case(const RuleSet& rules, size_t target_triples, uint64_t seed,
                               int reps = 1, int partitions = 1) {
  using clock = std::chrono::steady_clock;
  BenchRow out;
  out.target_triples = target_triples;
  out.reps = std::max(1, reps);
  out.partitions = std::max(1, partitions);

  SyntheticData data = synthetic_diagnosis(target_triples, seed);
  out.records = data.diagnosis_rows;

  double retrieve_best = 0, convert_best = 0;
  for (int rep = 0; rep < out.reps; ++rep) {
    auto t0 = clock::now();
    std::vector<Graph> graphs;
    if (out.partitions == 1) {
      graphs.push_back(map_rows(data.schema, data.rows));
    } else {
      size_t chunk = (data.rows.size() + out.partitions - 1) / out.partitions;
      for (int p = 0; p < out.partitions; ++p) {
        size_t begin = std::min(data.rows.size(), size_t(p) * chunk);
        size_t end = std::min(data.rows.size(), begin + chunk);
        graphs.push_back(map_rows(data.schema,
                                  std::span<const Row>(data.rows.data() + begin, end - begin)));
      }
    }
    auto t1 = clock::now();

    Graph derived;
    if (out.partitions == 1) {
      ApplyResult r = apply_rules(graphs[0], rules, ApplyMode::SinglePass);
      derived = std::move(r.derived);
    } else {
      std::vector<std::future<Graph>> futures;
      for (Graph& g : graphs) {
        futures.push_back(std::async(std::launch::async, [&rules, &g] {
          return apply_rules(g, rules, ApplyMode::SinglePass).derived;
        }));
      }
      for (auto& f : futures) derived.absorb(f.get());
    }
    auto t2 = clock::now();

    double retrieve = std::chrono::duration<double>(t1 - t0).count();
    double convert = std::chrono::duration<double>(t2 - t1).count();
    if (rep == 0 || retrieve < retrieve_best) retrieve_best = retrieve;
    if (rep == 0 || convert < convert_best) convert_best = convert;
    size_t input_triples = 0;
    for (const Graph& g : graphs) input_triples += g.size();
    out.input_triples = input_triples;
    out.derived_triples = derived.size();
  }

  out.retrieve_s = retrieve_best;
  out.convert_s = convert_best;
  if (out.convert_s > 0) {
    out.records_per_s = double(out.records) / out.convert_s;
    out.derived_per_s = double(out.derived_triples) / out.convert_s;
  }
  return out;
}

/// CSV suitable for plotting throughput/scalability curves.
inline std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out = "target_triples,input_triples,records,retrieve_s,convert_s,derived_triples,"
                    "records_per_s,derived_per_s,reps,partitions\n";
  char line[256];
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.6f,%.6f,%zu,%.1f,%.1f,%d,%d\n",
                  r.target_triples, r.input_triples, r.records, r.retrieve_s, r.convert_s,
                  r.derived_triples, r.records_per_s, r.derived_per_s, r.reps, r.partitions);
    out += line;
  }
  return out;
}

} // namespace sdv

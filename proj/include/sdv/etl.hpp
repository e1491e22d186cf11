#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdv/csv.hpp"
#include "sdv/direct_mapping.hpp" // ColumnType helpers
#include "sdv/kvdoc.hpp"
#include "sdv/query.hpp"

namespace sdv {

enum class SubjectKeyRule { LastSegment, FullIri };
enum class DuplicatePolicy { Skip, Replace };

struct TargetColumn {
  std::string name;
  ColumnType type = ColumnType::String;
};

/// How an application entity projects into one target table: a SELECT query
/// whose projection order matches the column order, plus the rule turning
/// the subject IRI into the key value.
struct TargetTableSpec {
  std::string table;
  std::vector<TargetColumn> columns;
  std::string key_column;
  SelectQuery query;
  SubjectKeyRule subject_key = SubjectKeyRule::LastSegment;
  DuplicatePolicy on_duplicate = DuplicatePolicy::Skip;

  size_t key_index() const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == key_column) return i;
    throw ConfigError("key column '" + key_column + "' is not declared in target '" + table + "'");
  }
};

/// Projected rows ready for loading.
struct TableRows {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows; // already rendered to lexical forms
};

struct LoadReport {
  std::string table;
  size_t inserted = 0;
  size_t skipped_duplicate_key = 0;
  size_t rejected = 0;
  std::vector<std::string> log;

  nlohmann::json to_json() const {
    return {{"table", table},
            {"inserted", inserted},
            {"skipped_duplicate_key", skipped_duplicate_key},
            {"rejected", rejected}};
  }
};

// ---------------------------------------------------------------------------
// Target spec manifest

inline TargetTableSpec load_target_spec(std::string_view manifest, std::string_view query_text) {
  TargetTableSpec spec;
  for (const KvLine& kv : read_kv_lines(manifest)) {
    if (kv.key == "target") {
      spec.table = kv.value;
    } else if (kv.key == "key") {
      spec.key_column = kv.value;
    } else if (kv.key == "column") {
      size_t colon = kv.value.find(':');
      if (colon == std::string::npos)
        throw ConfigError("target column '" + kv.value + "' needs name:type (line " +
                          std::to_string(kv.line) + ")");
      TargetColumn col;
      col.name = kv.value.substr(0, colon);
      auto type = parse_column_type(kv.value.substr(colon + 1));
      if (!type) throw ConfigError("unknown datatype in target column '" + kv.value + "'");
      col.type = *type;
      spec.columns.push_back(std::move(col));
    } else if (kv.key == "subject_key") {
      if (kv.value == "last-segment") spec.subject_key = SubjectKeyRule::LastSegment;
      else if (kv.value == "full-iri") spec.subject_key = SubjectKeyRule::FullIri;
      else throw ConfigError("unknown subject_key rule '" + kv.value + "'");
    } else if (kv.key == "on_duplicate") {
      if (kv.value == "skip") spec.on_duplicate = DuplicatePolicy::Skip;
      else if (kv.value == "replace") spec.on_duplicate = DuplicatePolicy::Replace;
      else throw ConfigError("unknown on_duplicate policy '" + kv.value + "'");
    } else if (kv.key == "query") {
      // file reference, resolved by the caller; tolerated here
    } else {
      throw ConfigError("unknown target spec key '" + kv.key + "' (line " +
                        std::to_string(kv.line) + ")");
    }
  }
  if (spec.table.empty()) throw ConfigError("target spec is missing 'target'");
  if (spec.key_column.empty()) throw ConfigError("target spec is missing 'key'");
  spec.query = parse_select(query_text);
  if (spec.query.projection.size() != spec.columns.size())
    throw ConfigError("target '" + spec.table + "': SELECT projects " +
                      std::to_string(spec.query.projection.size()) + " variables but " +
                      std::to_string(spec.columns.size()) + " columns are declared");
  spec.key_index(); // validates the key column exists
  return spec;
}

/// Reads "<spec>.spec" style manifests from disk; the 'query' key names the
/// SELECT file relative to the manifest.
inline TargetTableSpec load_target_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read target spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::string manifest = buf.str();

  std::string query_file;
  for (const KvLine& kv : read_kv_lines(manifest))
    if (kv.key == "query") query_file = kv.value;
  if (query_file.empty()) throw ConfigError("target spec " + path.string() + " is missing 'query'");
  std::ifstream qin(path.parent_path() / query_file);
  if (!qin) throw ConfigError("cannot read query file '" + query_file + "' for " + path.string());
  std::stringstream qbuf;
  qbuf << qin.rdbuf();
  return load_target_spec(manifest, qbuf.str());
}

// ---------------------------------------------------------------------------
// Projection

namespace detail {

inline std::string canonical_integer(std::string_view s) {
  bool neg = false;
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  while (i + 1 < s.size() && s[i] == '0') ++i;
  std::string digits(s.substr(i));
  if (digits == "0") neg = false;
  return (neg ? "-" : "") + digits;
}

inline std::string canonical_decimal(std::string_view s) {
  bool neg = false;
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  std::string intpart, fracpart;
  size_t dot = s.find('.', i);
  if (dot == std::string_view::npos) {
    intpart = std::string(s.substr(i));
  } else {
    intpart = std::string(s.substr(i, dot - i));
    fracpart = std::string(s.substr(dot + 1));
  }
  while (intpart.size() > 1 && intpart.front() == '0') intpart.erase(intpart.begin());
  if (intpart.empty()) intpart = "0";
  while (!fracpart.empty() && fracpart.back() == '0') fracpart.pop_back();
  std::string out = intpart;
  if (!fracpart.empty()) out += "." + fracpart;
  if (out == "0") neg = false;
  return (neg ? "-" : "") + out;
}

inline std::string last_iri_segment(std::string_view iri) {
  size_t cut = iri.find_last_of("/#");
  return std::string(cut == std::string_view::npos ? iri : iri.substr(cut + 1));
}

/// Target-type canonical rendering of a projected term. IRIs render as the
/// full IRI (the key column applies its own rule first).
inline std::string render_cell(const Term& t, ColumnType type) {
  if (t.is_iri() || t.is_blank()) return t.value;
  switch (type) {
    case ColumnType::Integer:
      return integer_value_ok(t.value) ? canonical_integer(t.value) : t.value;
    case ColumnType::Decimal:
      return decimal_value_ok(t.value) ? canonical_decimal(t.value) : t.value;
    case ColumnType::Date:
      if (t.datatype == xsd::dateTime_ && t.value.size() >= 10) return t.value.substr(0, 10);
      return t.value;
    default: return t.value;
  }
}

inline bool cell_type_ok(const std::string& cell, ColumnType type) {
  switch (type) {
    case ColumnType::Integer: return integer_value_ok(cell);
    case ColumnType::Decimal: return decimal_value_ok(cell) || integer_value_ok(cell);
    case ColumnType::Boolean: return cell == "true" || cell == "false";
    case ColumnType::DateTime: return parse_datetime(cell).has_value();
    case ColumnType::Date: return parse_date(cell).has_value();
    case ColumnType::String: return true;
  }
  return false;
}

} // namespace detail

/// Projects an application entity to rows: SELECT over the graph, subject
/// IRIs in the key position reduced per the subject-key rule, literals in
/// canonical lexical form. A row with an empty key is an error.
inline TableRows project(const Graph& g, const TargetTableSpec& spec) {
  RowSet rs = eval_select(spec.query, g);
  if (rs.columns.size() != spec.columns.size())
    throw EvalError("projection arity mismatch for target '" + spec.table + "'");
  size_t key = spec.key_index();

  TableRows out;
  for (const TargetColumn& c : spec.columns) out.columns.push_back(c.name);
  for (const auto& row : rs.rows) {
    std::vector<std::string> cells(spec.columns.size());
    for (size_t i = 0; i < row.size(); ++i) {
      if (!row[i]) {
        cells[i].clear();
        continue;
      }
      Term t = TermPool::term(*row[i]);
      if (i == key && t.is_iri() && spec.subject_key == SubjectKeyRule::LastSegment) {
        cells[i] = detail::last_iri_segment(t.value);
      } else {
        cells[i] = detail::render_cell(t, spec.columns[i].type);
      }
    }
    if (cells[key].empty())
      throw EvalError("null key in projection for target '" + spec.table + "'");
    out.rows.push_back(std::move(cells));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loading

/// Appends rows to <store>/<table>.csv. Duplicate keys are skipped and
/// counted (or replace the stored row under the replace policy); rows whose
/// cells violate the declared types are rejected and logged. The report
/// totals always reconcile: inserted + skipped + rejected = |rows|.
inline LoadReport load(const TableRows& rows, const TargetTableSpec& spec,
                       const std::filesystem::path& store) {
  LoadReport report;
  report.table = spec.table;
  size_t key = spec.key_index();

  std::filesystem::create_directories(store);
  std::filesystem::path file = store / (spec.table + ".csv");

  std::vector<std::vector<std::string>> existing;
  std::map<std::string, size_t> by_key;
  if (std::filesystem::exists(file)) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    CsvTable t = parse_csv(buf.str());
    if (t.header != rows.columns)
      throw ConfigError("existing table file " + file.string() + " has a different header");
    existing = std::move(t.rows);
    for (size_t i = 0; i < existing.size(); ++i) by_key.emplace(existing[i][key], i);
  }

  for (const auto& row : rows.rows) {
    bool ok = true;
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i].empty()) continue; // null cell
      if (!detail::cell_type_ok(row[i], spec.columns[i].type)) {
        report.log.push_back("rejected key=" + row[key] + ": column '" + rows.columns[i] +
                             "' value '" + row[i] + "' is not a valid " +
                             column_type_name(spec.columns[i].type));
        ++report.rejected;
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    auto it = by_key.find(row[key]);
    if (it != by_key.end()) {
      if (spec.on_duplicate == DuplicatePolicy::Skip) {
        ++report.skipped_duplicate_key;
        report.log.push_back("skipped duplicate key=" + row[key]);
      } else {
        existing[it->second] = row;
        ++report.inserted;
        report.log.push_back("replaced key=" + row[key]);
      }
      continue;
    }
    by_key.emplace(row[key], existing.size());
    existing.push_back(row);
    ++report.inserted;
  }

  std::ofstream out(file, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << csv_row(rows.columns);
  for (const auto& row : existing) out << csv_row(row);
  return report;
}

} // namespace sdv

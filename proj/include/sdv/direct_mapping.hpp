#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdv/csv.hpp"
#include "sdv/datetime.hpp"
#include "sdv/graph.hpp"
#include "sdv/kvdoc.hpp"
#include "sdv/scanner.hpp" // has_scheme

namespace sdv {

enum class ColumnType { Integer, Decimal, String, DateTime, Date, Boolean };

inline const char* column_type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Integer: return "integer";
    case ColumnType::Decimal: return "decimal";
    case ColumnType::String: return "string";
    case ColumnType::DateTime: return "dateTime";
    case ColumnType::Date: return "date";
    case ColumnType::Boolean: return "boolean";
  }
  return "?";
}

inline std::optional<ColumnType> parse_column_type(std::string_view s) {
  if (s == "integer") return ColumnType::Integer;
  if (s == "decimal") return ColumnType::Decimal;
  if (s == "string") return ColumnType::String;
  if (s == "dateTime") return ColumnType::DateTime;
  if (s == "date") return ColumnType::Date;
  if (s == "boolean") return ColumnType::Boolean;
  return std::nullopt;
}

inline const std::string& xsd_type_iri(ColumnType t) {
  switch (t) {
    case ColumnType::Integer: return xsd::integer_;
    case ColumnType::Decimal: return xsd::decimal_;
    case ColumnType::String: return xsd::string_;
    case ColumnType::DateTime: return xsd::dateTime_;
    case ColumnType::Date: return xsd::date_;
    case ColumnType::Boolean: return xsd::boolean_;
  }
  return xsd::string_;
}

struct ForeignKey {
  std::string table;
  std::string column;
};

struct Column {
  std::string name;
  ColumnType type = ColumnType::String;
  bool nullable = false;
  std::optional<ForeignKey> fk;
};

/// First character upper-cased, the rest lowered: NATPERSON -> Natperson.
inline std::string capitalize_table(std::string_view name) {
  std::string out(name);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

struct TableSchema {
  std::string name;
  std::vector<Column> columns;
  std::string pk;
  bool expose_pk = false;

  const Column* find_column(std::string_view col) const {
    for (const Column& c : columns)
      if (c.name == col) return &c;
    return nullptr;
  }
};

/// Layer-1 description: table schemas plus the IRI conventions. Resource
/// IRIs are <resource_base>/<Tablename>/<pk>; the per-table vocabulary lives
/// under <onto_base>/<Tablename>#, with the table class at fragment Class.
struct TableSchemaSet {
  std::string resource_base;
  std::string onto_base;
  std::string default_tz = "+01:00"; // appended to zone-less dateTime values
  std::map<std::string, TableSchema> tables;

  std::string table_namespace(std::string_view table) const {
    return onto_base + "/" + capitalize_table(table) + "#";
  }
  std::string class_iri(std::string_view table) const {
    return table_namespace(table) + "Class";
  }
  std::string property_iri(std::string_view table, std::string_view column) const {
    return table_namespace(table) + std::string(column);
  }
  std::string resource_iri(std::string_view table, std::string_view pk_value) const {
    return resource_base + "/" + capitalize_table(table) + "/" + std::string(pk_value);
  }

  const TableSchema* find(std::string_view table) const {
    auto it = tables.find(std::string(table));
    return it == tables.end() ? nullptr : &it->second;
  }
};

/// One source row: values aligned with the schema's column order, nullopt
/// for NULL cells.
struct Row {
  std::string table;
  std::vector<std::optional<std::string>> values;
};

// ---------------------------------------------------------------------------
// Schema manifest

namespace detail {

inline Column parse_column_spec(const std::string& spec, size_t line) {
  // name:type[:nullable][:fk=Table.col]
  Column col;
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string::npos ? std::string::npos
                                                                  : colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 2) throw ConfigError("column spec '" + spec + "' needs name:type (line " +
                                          std::to_string(line) + ")");
  col.name = parts[0];
  auto type = parse_column_type(parts[1]);
  if (!type)
    throw ConfigError("unknown datatype '" + parts[1] + "' in column '" + col.name + "' (line " +
                      std::to_string(line) + ")");
  col.type = *type;
  for (size_t i = 2; i < parts.size(); ++i) {
    const std::string& flag = parts[i];
    if (flag == "nullable") {
      col.nullable = true;
    } else if (flag.rfind("fk=", 0) == 0) {
      std::string target = flag.substr(3);
      size_t dot = target.find('.');
      if (dot == std::string::npos)
        throw ConfigError("foreign key '" + flag + "' needs Table.column (line " +
                          std::to_string(line) + ")");
      col.fk = ForeignKey{target.substr(0, dot), target.substr(dot + 1)};
    } else {
      throw ConfigError("unknown column flag '" + flag + "' (line " + std::to_string(line) + ")");
    }
  }
  return col;
}

} // namespace detail

/// Reads a schema manifest. Validates duplicate tables, unknown datatypes,
/// dangling foreign keys, and primary key declarations.
inline TableSchemaSet load_schema(std::string_view manifest) {
  TableSchemaSet set;
  TableSchema* current = nullptr;
  for (const KvLine& kv : read_kv_lines(manifest)) {
    if (kv.key == "resource_base") {
      set.resource_base = kv.value;
    } else if (kv.key == "onto_base") {
      set.onto_base = kv.value;
    } else if (kv.key == "default_tz") {
      set.default_tz = kv.value;
    } else if (kv.key == "table") {
      if (kv.value.empty()) throw ConfigError("table needs a name (line " + std::to_string(kv.line) + ")");
      if (set.tables.count(kv.value))
        throw ConfigError("duplicate table '" + kv.value + "' (line " + std::to_string(kv.line) + ")");
      current = &set.tables[kv.value];
      current->name = kv.value;
    } else if (kv.key == "pk" || kv.key == "column" || kv.key == "expose_pk") {
      if (!current)
        throw ConfigError("'" + kv.key + "' outside a table section (line " +
                          std::to_string(kv.line) + ")");
      if (kv.key == "pk") current->pk = kv.value;
      else if (kv.key == "column") current->columns.push_back(detail::parse_column_spec(kv.value, kv.line));
      else current->expose_pk = kv.value == "true";
    } else {
      throw ConfigError("unknown manifest key '" + kv.key + "' (line " + std::to_string(kv.line) + ")");
    }
  }

  if (!set.tables.empty()) {
    if (!detail::has_scheme(set.resource_base))
      throw ConfigError("resource_base '" + set.resource_base + "' is not an absolute IRI");
    if (!detail::has_scheme(set.onto_base))
      throw ConfigError("onto_base '" + set.onto_base + "' is not an absolute IRI");
  }
  for (auto& [name, schema] : set.tables) {
    if (schema.pk.empty()) throw ConfigError("table '" + name + "' has no primary key");
    const Column* pk = schema.find_column(schema.pk);
    if (!pk) throw ConfigError("table '" + name + "': primary key column '" + schema.pk +
                               "' is not declared");
    if (pk->nullable)
      throw ConfigError("table '" + name + "': primary key column may not be nullable");
    for (const Column& col : schema.columns) {
      if (!col.fk) continue;
      const TableSchema* target = set.find(col.fk->table);
      if (!target)
        throw ConfigError("table '" + name + "': foreign key '" + col.name +
                          "' points to unknown table '" + col.fk->table + "'");
      if (!target->find_column(col.fk->column))
        throw ConfigError("table '" + name + "': foreign key '" + col.name +
                          "' points to unknown column '" + col.fk->table + "." + col.fk->column + "'");
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Ontology generation

/// Table -> rdfs:Class, column -> rdf:Property with rdfs:domain the table
/// class and rdfs:range the XSD datatype class; a foreign-key column ranges
/// over the class the key points to.
inline Graph generate_ontology(const TableSchemaSet& set) {
  Graph g;
  g.add_prefix("rdf", std::string(ns::rdf));
  g.add_prefix("rdfs", std::string(ns::rdfs));
  g.add_prefix("xsd", std::string(ns::xsd));
  Term rdfs_class = Term::iri(std::string(ns::rdfs) + "Class");
  Term rdf_property = Term::iri(std::string(ns::rdf) + "Property");
  Term domain = Term::iri(std::string(ns::rdfs) + "domain");
  Term range = Term::iri(std::string(ns::rdfs) + "range");
  Term type = Term::iri(rdf_type);

  for (const auto& [name, schema] : set.tables) {
    std::string prefix = name;
    for (char& c : prefix) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    g.add_prefix(prefix, set.table_namespace(name));

    Term cls = Term::iri(set.class_iri(name));
    g.insert(cls, type, rdfs_class);
    for (const Column& col : schema.columns) {
      Term prop = Term::iri(set.property_iri(name, col.name));
      g.insert(prop, type, rdf_property);
      g.insert(prop, domain, cls);
      if (col.fk) {
        g.insert(prop, range, Term::iri(set.class_iri(col.fk->table)));
      } else {
        g.insert(prop, range, Term::iri(xsd_type_iri(col.type)));
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Row mapping

namespace detail {

inline bool integer_value_ok(std::string_view s) {
  size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

inline bool value_matches_type(ColumnType type, const std::string& value, const std::string& tz);

inline bool decimal_value_ok(std::string_view s) {
  size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  bool digit = false, dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (dot) return false;
      dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else {
      return false;
    }
  }
  return digit;
}

/// Source dateTime: "YYYY-MM-DD HH:MM:SS" or ISO T form; a value without a
/// zone gets the schema's default zone appended.
inline std::optional<std::string> render_datetime(std::string_view raw, const std::string& tz) {
  std::string lex(raw);
  size_t space = lex.find(' ');
  if (space != std::string::npos) lex[space] = 'T';
  auto dt = parse_datetime(lex);
  if (dt && dt->zone != DateTime::Zone::None) return lex;
  if (dt) {
    std::string with_tz = lex + tz;
    if (parse_datetime(with_tz)) return with_tz;
  }
  return std::nullopt;
}

inline bool value_matches_type(ColumnType type, const std::string& value, const std::string& tz) {
  switch (type) {
    case ColumnType::Integer: return integer_value_ok(value);
    case ColumnType::Decimal: return decimal_value_ok(value);
    case ColumnType::Boolean: return value == "true" || value == "false";
    case ColumnType::DateTime: return render_datetime(value, tz).has_value();
    case ColumnType::Date: return parse_date(value).has_value();
    case ColumnType::String: return true;
  }
  return false;
}

} // namespace detail

/// Maps rows to their Layer-2 RDF form. Per row: one rdf:type triple plus
/// one triple per non-null column; foreign keys become object links to the
/// target row's resource IRI; the primary key value only becomes a literal
/// triple when the table sets expose_pk. Order-independent by construction.
inline Graph map_rows(const TableSchemaSet& set, std::span<const Row> rows) {
  Graph g;
  std::vector<Triple> out; // bulk-built, dedup once at the end
  out.reserve(rows.size() * 4);
  g.add_prefix("rdf", std::string(ns::rdf));
  g.add_prefix("xsd", std::string(ns::xsd));

  // table-level constants interned once
  struct TableIds {
    const TableSchema* schema;
    size_t pk_index;
    TermId class_id;
    std::vector<TermId> predicates;
    std::string resource_prefix; // "<resource_base>/<Tablename>/"
  };
  std::map<std::string, TableIds> ids;
  for (const auto& [name, schema] : set.tables) {
    std::string prefix = name;
    for (char& c : prefix) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    g.add_prefix(prefix, set.table_namespace(name));

    TableIds t;
    t.schema = &schema;
    const Column* pk_col = schema.find_column(schema.pk);
    t.pk_index = size_t(pk_col - schema.columns.data());
    t.class_id = TermPool::intern_iri(set.class_iri(name));
    for (const Column& col : schema.columns)
      t.predicates.push_back(TermPool::intern_iri(set.property_iri(name, col.name)));
    t.resource_prefix = set.resource_base + "/" + capitalize_table(name) + "/";
    ids.emplace(name, std::move(t));
  }
  TermId type_id = TermPool::intern_iri(rdf_type);

  for (const Row& row : rows) {
    auto it = ids.find(row.table);
    if (it == ids.end()) throw ConfigError("row references unknown table '" + row.table + "'");
    const TableIds& t = it->second;
    const TableSchema& schema = *t.schema;
    if (row.values.size() != schema.columns.size())
      throw ConfigError("row arity does not match schema of '" + row.table + "'");

    const Column& pk_col = schema.columns[t.pk_index];
    const auto& pk_value = row.values[t.pk_index];
    if (!pk_value) throw ConfigError("null primary key in table '" + row.table + "'");
    if (!detail::value_matches_type(pk_col.type, *pk_value, set.default_tz))
      throw ConfigError("table '" + row.table + "', primary key value '" + *pk_value +
                        "' does not match type " + column_type_name(pk_col.type));

    TermId subject = TermPool::intern(Term::iri(t.resource_prefix + *pk_value));
    out.push_back(Triple{subject, type_id, t.class_id});

    for (size_t i = 0; i < schema.columns.size(); ++i) {
      const Column& col = schema.columns[i];
      const auto& value = row.values[i];
      if (!value) continue;
      if (i == t.pk_index && !schema.expose_pk) continue;

      auto type_error = [&]() -> ConfigError {
        return ConfigError("table '" + row.table + "', column '" + col.name + "': value '" +
                           *value + "' does not match type " + column_type_name(col.type));
      };
      if (col.fk) {
        if (col.type == ColumnType::Integer && !detail::integer_value_ok(*value))
          throw type_error();
        TermId object = TermPool::intern(Term::iri(set.resource_iri(col.fk->table, *value)));
        out.push_back(Triple{subject, t.predicates[i], object});
        continue;
      }
      Term object;
      switch (col.type) {
        case ColumnType::Integer:
          if (!detail::integer_value_ok(*value)) throw type_error();
          object = Term::literal(*value, xsd::integer_);
          break;
        case ColumnType::Decimal:
          if (!detail::decimal_value_ok(*value)) throw type_error();
          object = Term::literal(*value, xsd::decimal_);
          break;
        case ColumnType::Boolean:
          if (*value != "true" && *value != "false") throw type_error();
          object = Term::literal(*value, xsd::boolean_);
          break;
        case ColumnType::DateTime: {
          auto lex = detail::render_datetime(*value, set.default_tz);
          if (!lex) throw type_error();
          object = Term::literal(*lex, xsd::dateTime_);
          break;
        }
        case ColumnType::Date:
          if (!parse_date(*value)) throw type_error();
          object = Term::literal(*value, xsd::date_);
          break;
        case ColumnType::String: object = Term::literal(*value); break;
      }
      out.push_back(Triple{subject, t.predicates[i], TermPool::intern(object)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Triple& a, const Triple& b) {
    if (a.s != b.s) return a.s < b.s;
    if (a.p != b.p) return a.p < b.p;
    return a.o < b.o;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  g.adopt_unique(std::move(out));
  return g;
}

/// Binds a parsed CSV document to a table's schema: header names must cover
/// exactly the schema columns (any order); empty fields are NULL.
inline std::vector<Row> rows_from_csv(const TableSchema& schema, const CsvTable& csv) {
  std::vector<size_t> index(schema.columns.size());
  std::set<std::string> seen;
  for (size_t i = 0; i < schema.columns.size(); ++i) {
    const std::string& want = schema.columns[i].name;
    auto it = std::find(csv.header.begin(), csv.header.end(), want);
    if (it == csv.header.end())
      throw ConfigError("CSV for table '" + schema.name + "' is missing column '" + want + "'");
    index[i] = size_t(it - csv.header.begin());
    seen.insert(want);
  }
  for (const std::string& col : csv.header)
    if (!seen.count(col))
      throw ConfigError("CSV for table '" + schema.name + "' has undeclared column '" + col + "'");

  std::vector<Row> rows;
  rows.reserve(csv.rows.size());
  for (const auto& raw : csv.rows) {
    Row row;
    row.table = schema.name;
    row.values.reserve(schema.columns.size());
    for (size_t i = 0; i < schema.columns.size(); ++i) {
      const std::string& cell = raw[index[i]];
      if (cell.empty()) row.values.push_back(std::nullopt);
      else row.values.push_back(cell);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace sdv

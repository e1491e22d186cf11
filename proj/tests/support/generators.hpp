#pragma once

#include <random>
#include <string>
#include <vector>

#include "sdv/direct_mapping.hpp"
#include "sdv/graph.hpp"
#include "sdv/n3_rules.hpp"
#include "sdv/query.hpp"

namespace testsupport {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}

  size_t below(size_t n) { return n == 0 ? 0 : std::uniform_int_distribution<size_t>(0, n - 1)(eng); }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(eng) < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
};

// Small closed vocabulary so random patterns actually join.
struct Vocab {
  std::vector<sdv::Term> subjects;   // IRIs (and blank nodes when enabled)
  std::vector<sdv::Term> predicates; // IRIs
  std::vector<sdv::Term> objects;    // IRIs + literals
  std::vector<sdv::TermId> vars;
};

inline Vocab make_vocab(Rng& rng, bool with_bnodes, bool with_dates) {
  Vocab v;
  for (int i = 0; i < 6; ++i) v.subjects.push_back(sdv::Term::iri("http://t.invalid/s" + std::to_string(i)));
  if (with_bnodes)
    for (int i = 0; i < 3; ++i) v.subjects.push_back(sdv::Term::blank("n" + std::to_string(i)));
  for (int i = 0; i < 5; ++i) v.predicates.push_back(sdv::Term::iri("http://t.invalid/p" + std::to_string(i)));
  for (const sdv::Term& s : v.subjects) v.objects.push_back(s);
  for (int i = 0; i < 4; ++i) v.objects.push_back(sdv::Term::literal("lit" + std::to_string(i)));
  for (int i = 0; i < 5; ++i) v.objects.push_back(sdv::Term::integer(rng.range(-5, 20)));
  if (with_dates) {
    for (int i = 0; i < 4; ++i) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d+01:00", rng.range(1900, 2030),
                    rng.range(1, 12), rng.range(1, 28), rng.range(0, 23), rng.range(0, 59),
                    rng.range(0, 59));
      v.objects.push_back(sdv::Term::literal(buf, sdv::xsd::dateTime_));
    }
  }
  for (int i = 0; i < 6; ++i)
    v.vars.push_back(sdv::TermPool::intern_var("v" + std::to_string(i)));
  return v;
}

inline sdv::Graph random_graph(Rng& rng, const Vocab& v, size_t max_triples) {
  sdv::Graph g;
  size_t n = rng.below(max_triples + 1);
  for (size_t i = 0; i < n; ++i)
    g.insert(rng.pick(v.subjects), rng.pick(v.predicates), rng.pick(v.objects));
  return g;
}

inline sdv::TriplePattern random_pattern(Rng& rng, const Vocab& v, double var_p = 0.5) {
  auto slot = [&](const std::vector<sdv::Term>& pool) {
    if (rng.chance(var_p)) return rng.pick(v.vars);
    return sdv::TermPool::intern(rng.pick(pool));
  };
  return sdv::TriplePattern{slot(v.subjects), slot(v.predicates), slot(v.objects)};
}

inline sdv::FilterExprPtr random_filter(Rng& rng, const Vocab& v) {
  using E = sdv::FilterExpr;
  auto operand = [&](sdv::TermId id) {
    auto e = std::make_shared<E>();
    e->op = E::Op::Operand;
    e->operand = id;
    return e;
  };
  auto cmp = std::make_shared<E>();
  static const E::Op ops[] = {E::Op::Eq, E::Op::Ne, E::Op::Lt, E::Op::Le, E::Op::Gt, E::Op::Ge};
  cmp->op = ops[rng.below(6)];
  cmp->lhs = operand(rng.pick(v.vars));
  cmp->rhs = rng.chance(0.5) ? operand(rng.pick(v.vars))
                             : operand(sdv::TermPool::intern(rng.pick(v.objects)));
  if (rng.chance(0.25)) {
    auto neg = std::make_shared<E>();
    neg->op = E::Op::Not;
    neg->lhs = cmp;
    return neg;
  }
  return cmp;
}

/// BGP with at most `patterns` triple patterns, optionally one OPTIONAL
/// sub-group and one FILTER, mirroring the supported query subset.
inline sdv::GroupPattern random_group(Rng& rng, const Vocab& v, int patterns, bool allow_optional,
                                      bool allow_filter) {
  sdv::GroupPattern g;
  int n = rng.range(1, patterns);
  for (int i = 0; i < n; ++i) {
    sdv::GroupElement e;
    e.kind = sdv::GroupElement::Kind::Pattern;
    e.pattern = random_pattern(rng, v);
    g.elements.push_back(std::move(e));
  }
  if (allow_optional && rng.chance(0.6)) {
    sdv::GroupElement e;
    e.kind = sdv::GroupElement::Kind::Optional;
    auto inner = std::make_shared<sdv::GroupPattern>();
    int m = rng.range(1, 2);
    for (int i = 0; i < m; ++i) {
      sdv::GroupElement p;
      p.kind = sdv::GroupElement::Kind::Pattern;
      p.pattern = random_pattern(rng, v);
      inner->elements.push_back(std::move(p));
    }
    e.optional = inner;
    size_t at = rng.below(g.elements.size() + 1);
    g.elements.insert(g.elements.begin() + at, std::move(e));
  }
  if (allow_filter && rng.chance(0.6)) {
    sdv::GroupElement e;
    e.kind = sdv::GroupElement::Kind::Filter;
    e.filter = random_filter(rng, v);
    g.elements.push_back(std::move(e));
  }
  return g;
}

inline std::vector<sdv::TermId> group_vars(const sdv::GroupPattern& g) {
  std::set<sdv::TermId> vars;
  sdv::collect_group_vars(g, vars);
  return {vars.begin(), vars.end()};
}

inline sdv::ConstructQuery random_construct(Rng& rng, const Vocab& v) {
  sdv::ConstructQuery q;
  q.where = random_group(rng, v, 4, true, true);
  std::vector<sdv::TermId> vars = group_vars(q.where);
  if (vars.empty()) {
    q.where.elements.insert(q.where.elements.begin(), [&] {
      sdv::GroupElement e;
      e.kind = sdv::GroupElement::Kind::Pattern;
      e.pattern = sdv::TriplePattern{v.vars[0], sdv::TermPool::intern(rng.pick(v.predicates)),
                                     v.vars[1]};
      return e;
    }());
    vars = group_vars(q.where);
  }
  int n = rng.range(1, 3);
  for (int i = 0; i < n; ++i) {
    auto slot = [&](const std::vector<sdv::Term>& pool) {
      if (rng.chance(0.6)) return vars[rng.below(vars.size())];
      return sdv::TermPool::intern(rng.pick(pool));
    };
    q.construct.push_back(
        sdv::TriplePattern{slot(v.subjects), slot(v.predicates), slot(v.objects)});
  }
  return q;
}

inline sdv::SelectQuery random_select(Rng& rng, const Vocab& v) {
  sdv::SelectQuery q;
  q.where = random_group(rng, v, 4, true, true);
  std::vector<sdv::TermId> vars = group_vars(q.where);
  if (vars.empty()) {
    sdv::GroupElement e;
    e.kind = sdv::GroupElement::Kind::Pattern;
    e.pattern = sdv::TriplePattern{v.vars[0], sdv::TermPool::intern(rng.pick(v.predicates)),
                                   v.vars[1]};
    q.where.elements.insert(q.where.elements.begin(), std::move(e));
    vars = group_vars(q.where);
  }
  size_t n = 1 + rng.below(vars.size());
  for (size_t i = 0; i < n; ++i) {
    sdv::TermId var = vars[i];
    q.projection.push_back(var);
    q.projection_names.push_back(sdv::TermPool::term(var).value);
  }
  if (rng.chance(0.5)) q.order_by.push_back(q.projection[rng.below(q.projection.size())]);
  return q;
}

/// Range-restricted random rules over the vocabulary; consequent subjects
/// only use variables that occur in antecedent subject positions (so firings
/// never instantiate a literal subject), optional date/comparison builtins.
inline sdv::RuleSet random_rules(Rng& rng, const Vocab& v, int max_rules, bool with_builtins) {
  sdv::RuleSet rs;
  int n = rng.range(1, max_rules);
  for (int r = 0; r < n; ++r) {
    sdv::Rule rule;
    rule.id = "random#" + std::to_string(r);
    int pats = rng.range(1, 3);
    std::set<sdv::TermId> bound, subject_safe;
    for (int i = 0; i < pats; ++i) {
      sdv::RuleAtom atom;
      atom.kind = sdv::RuleAtom::Kind::Pattern;
      atom.pattern = random_pattern(rng, v, 0.65);
      rule.antecedent.push_back(atom);
      sdv::collect_pattern_vars(atom.pattern, bound);
      if (sdv::is_variable(atom.pattern.s)) subject_safe.insert(atom.pattern.s);
    }
    std::vector<sdv::TermId> bound_v(bound.begin(), bound.end());

    if (with_builtins && rng.chance(0.5) && !bound_v.empty()) {
      sdv::RuleAtom atom;
      atom.kind = sdv::RuleAtom::Kind::Builtin;
      if (rng.chance(0.5)) {
        // (?t) func:month-from-dateTime ?m   — result var usable in consequent
        static const char* fields[] = {"year-from-dateTime", "month-from-dateTime",
                                       "day-from-dateTime"};
        atom.builtin.builtin = sdv::TermPool::intern_iri(std::string(sdv::ns::rif_func) +
                                                         fields[rng.below(3)]);
        atom.builtin.args = {bound_v[rng.below(bound_v.size())]};
        sdv::TermId result = sdv::TermPool::intern_var("b" + std::to_string(r));
        atom.builtin.object = result;
        bound.insert(result);
      } else {
        static const char* cmps[] = {"greaterThan", "lessThan", "equalTo"};
        atom.builtin.builtin = sdv::TermPool::intern_iri(std::string(sdv::ns::swap_math) +
                                                         cmps[rng.below(3)]);
        atom.builtin.args = {bound_v[rng.below(bound_v.size())]};
        atom.builtin.object = sdv::TermPool::intern(sdv::Term::integer(rng.range(-5, 20)));
      }
      atom.builtin.ordinal = rule.antecedent.size();
      rule.antecedent.push_back(atom);
    }

    std::vector<sdv::TermId> safe_v(subject_safe.begin(), subject_safe.end());
    std::vector<sdv::TermId> all_bound(bound.begin(), bound.end());
    int heads = rng.range(1, 2);
    for (int i = 0; i < heads; ++i) {
      sdv::TriplePattern head;
      head.s = (!safe_v.empty() && rng.chance(0.7)) ? safe_v[rng.below(safe_v.size())]
                                                    : sdv::TermPool::intern(rng.pick(v.subjects));
      head.p = sdv::TermPool::intern(rng.pick(v.predicates));
      head.o = (!all_bound.empty() && rng.chance(0.7)) ? all_bound[rng.below(all_bound.size())]
                                                       : sdv::TermPool::intern(rng.pick(v.objects));
      rule.consequent.push_back(head);
    }
    rs.rules.push_back(std::move(rule));
  }
  return rs;
}

/// Random schema/dataset pair with the ingredients of the counting law:
/// nullable columns, foreign keys, and a known non-null non-PK cell count.
struct RandomMappingDataset {
  sdv::TableSchemaSet set;
  std::vector<sdv::Row> rows;
  size_t nonnull_nonpk_cells = 0;
};

inline RandomMappingDataset random_mapping_dataset(Rng& rng) {
  RandomMappingDataset ds;
  ds.set.resource_base = "http://r.invalid/res";
  ds.set.onto_base = "http://r.invalid/onto";

  int n_tables = rng.range(1, 3);
  std::vector<std::string> names;
  for (int t = 0; t < n_tables; ++t) {
    std::string name = "T" + std::to_string(t);
    sdv::TableSchema schema;
    schema.name = name;
    schema.pk = "id";
    schema.columns.push_back({"id", sdv::ColumnType::Integer, false, std::nullopt});
    int extra = rng.range(0, 4);
    for (int c = 0; c < extra; ++c) {
      sdv::Column col;
      col.name = "c" + std::to_string(c);
      col.nullable = true;
      switch (rng.below(4)) {
        case 0: col.type = sdv::ColumnType::Integer; break;
        case 1: col.type = sdv::ColumnType::String; break;
        case 2: col.type = sdv::ColumnType::Boolean; break;
        default: col.type = sdv::ColumnType::Date; break;
      }
      if (!names.empty() && rng.chance(0.3)) {
        col.type = sdv::ColumnType::Integer;
        col.fk = sdv::ForeignKey{rng.pick(names), "id"};
      }
      schema.columns.push_back(std::move(col));
    }
    ds.set.tables.emplace(name, std::move(schema));
    names.push_back(name);
  }

  int pk = 0;
  for (auto& [name, schema] : ds.set.tables) {
    int n_rows = rng.range(0, 12);
    for (int r = 0; r < n_rows; ++r) {
      sdv::Row row;
      row.table = name;
      row.values.push_back(std::to_string(++pk));
      for (size_t c = 1; c < schema.columns.size(); ++c) {
        if (rng.chance(0.25)) {
          row.values.push_back(std::nullopt);
          continue;
        }
        ++ds.nonnull_nonpk_cells;
        switch (schema.columns[c].type) {
          case sdv::ColumnType::Integer:
            row.values.push_back(std::to_string(rng.range(0, 99)));
            break;
          case sdv::ColumnType::String:
            row.values.push_back("s" + std::to_string(rng.range(0, 99)));
            break;
          case sdv::ColumnType::Boolean:
            row.values.push_back(rng.chance(0.5) ? "true" : "false");
            break;
          default: row.values.push_back("2020-01-0" + std::to_string(rng.range(1, 9))); break;
        }
      }
      ds.rows.push_back(std::move(row));
    }
  }
  return ds;
}

} // namespace testsupport

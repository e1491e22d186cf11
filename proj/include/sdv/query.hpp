#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdv/graph.hpp"
#include "sdv/scanner.hpp"

namespace sdv {

// ---------------------------------------------------------------------------
// AST

struct FilterExpr {
  enum class Op { Operand, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not };
  Op op = Op::Operand;
  TermId operand = 0; // Op::Operand only: variable or concrete term
  std::shared_ptr<const FilterExpr> lhs, rhs;
};
using FilterExprPtr = std::shared_ptr<const FilterExpr>;

struct GroupPattern;

struct GroupElement {
  enum class Kind { Pattern, Optional, Filter };
  Kind kind = Kind::Pattern;
  TriplePattern pattern;
  std::shared_ptr<const GroupPattern> optional;
  FilterExprPtr filter;
};

/// WHERE-clause group: ordered triple patterns, OPTIONAL sub-groups and
/// FILTER constraints.
struct GroupPattern {
  std::vector<GroupElement> elements;
};

struct ConstructQuery {
  std::map<std::string, std::string> prefixes;
  std::vector<TriplePattern> construct;
  GroupPattern where;
};

struct SelectQuery {
  std::map<std::string, std::string> prefixes;
  std::vector<TermId> projection; // variable ids in declaration order
  std::vector<std::string> projection_names;
  GroupPattern where;
  std::vector<TermId> order_by;
};

using Query = std::variant<ConstructQuery, SelectQuery>;

/// SELECT result: one row per solution, empty cells for unbound variables.
/// Rows are in deterministic order (ORDER BY variables first, canonical
/// full-row order as tiebreak).
struct RowSet {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<TermId>>> rows;
};

inline void collect_pattern_vars(const TriplePattern& p, std::set<TermId>& out) {
  for (TermId id : {p.s, p.p, p.o})
    if (is_variable(id)) out.insert(id);
}

inline void collect_group_vars(const GroupPattern& g, std::set<TermId>& out) {
  for (const GroupElement& e : g.elements) {
    if (e.kind == GroupElement::Kind::Pattern) collect_pattern_vars(e.pattern, out);
    else if (e.kind == GroupElement::Kind::Optional) collect_group_vars(*e.optional, out);
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

class QueryParser {
public:
  explicit QueryParser(std::string_view text) : scan_(text) {}

  Query run() {
    prologue();
    scan_.skip_ws();
    if (scan_.try_keyword("CONSTRUCT")) return construct_query();
    if (scan_.try_keyword("SELECT")) return select_query();
    scan_.fail("expected SELECT or CONSTRUCT");
  }

private:
  void prologue() {
    while (true) {
      scan_.skip_ws();
      if (scan_.try_keyword("PREFIX")) {
        scan_.skip_ws();
        std::string name = scan_.parse_prefix_name();
        scan_.skip_ws();
        prefixes_[name] = scan_.parse_iriref(base_);
      } else if (scan_.try_keyword("BASE")) {
        scan_.skip_ws();
        base_ = scan_.parse_iriref(base_);
      } else {
        break;
      }
    }
  }

  Query construct_query() {
    ConstructQuery q;
    q.prefixes = prefixes_;
    scan_.skip_ws();
    scan_.expect('{');
    q.construct = triples_block();
    scan_.skip_ws();
    scan_.expect('}');
    scan_.skip_ws();
    if (!scan_.try_keyword("WHERE")) scan_.fail("expected WHERE");
    scan_.skip_ws();
    q.where = group_pattern();
    validate_construct(q);
    return q;
  }

  Query select_query() {
    SelectQuery q;
    q.prefixes = prefixes_;
    scan_.skip_ws();
    while (scan_.peek() == '?') {
      Term v = scan_.parse_variable();
      q.projection.push_back(TermPool::intern(v));
      q.projection_names.push_back(v.value);
      scan_.skip_ws();
    }
    if (q.projection.empty()) scan_.fail("SELECT needs at least one variable");
    scan_.try_keyword("WHERE");
    scan_.skip_ws();
    q.where = group_pattern();
    scan_.skip_ws();
    if (scan_.try_keyword("ORDER")) {
      scan_.skip_ws();
      if (!scan_.try_keyword("BY")) scan_.fail("expected BY after ORDER");
      scan_.skip_ws();
      while (scan_.peek() == '?') {
        q.order_by.push_back(TermPool::intern(scan_.parse_variable()));
        scan_.skip_ws();
      }
      if (q.order_by.empty()) scan_.fail("ORDER BY needs at least one variable");
    }
    std::set<TermId> vars;
    collect_group_vars(q.where, vars);
    for (TermId v : q.projection)
      if (!vars.count(v))
        scan_.fail("projected variable ?" + TermPool::term(v).value + " not in WHERE clause");
    return q;
  }

  void validate_construct(const ConstructQuery& q) {
    std::set<TermId> where_vars;
    collect_group_vars(q.where, where_vars);
    for (const TriplePattern& p : q.construct) {
      for (TermId id : {p.s, p.p, p.o})
        if (is_variable(id) && !where_vars.count(id))
          scan_.fail("template variable ?" + TermPool::term(id).value + " not in WHERE clause");
    }
  }

  GroupPattern group_pattern() {
    GroupPattern g;
    scan_.expect('{');
    scan_.skip_ws();
    while (!scan_.eof() && scan_.peek() != '}') {
      if (scan_.try_keyword("OPTIONAL")) {
        scan_.skip_ws();
        GroupElement e;
        e.kind = GroupElement::Kind::Optional;
        e.optional = std::make_shared<GroupPattern>(group_pattern());
        g.elements.push_back(std::move(e));
      } else if (scan_.try_keyword("FILTER")) {
        scan_.skip_ws();
        scan_.expect('(');
        GroupElement e;
        e.kind = GroupElement::Kind::Filter;
        e.filter = or_expr();
        scan_.skip_ws();
        scan_.expect(')');
        g.elements.push_back(std::move(e));
      } else {
        for (const TriplePattern& p : triples_unit()) {
          GroupElement e;
          e.pattern = p;
          g.elements.push_back(std::move(e));
        }
      }
      scan_.skip_ws();
      if (scan_.peek() == '.') {
        scan_.get();
        scan_.skip_ws();
      }
    }
    scan_.expect('}');
    return g;
  }

  // one subject with its predicate-object list
  std::vector<TriplePattern> triples_unit() {
    std::vector<TriplePattern> out;
    TermId subject = parse_term(Position::Subject);
    scan_.skip_ws();
    while (true) {
      TermId predicate = parse_term(Position::Predicate);
      scan_.skip_ws();
      while (true) {
        TermId object = parse_term(Position::Object);
        out.push_back(TriplePattern{subject, predicate, object});
        scan_.skip_ws();
        if (scan_.peek() == ',') {
          scan_.get();
          scan_.skip_ws();
          continue;
        }
        break;
      }
      if (scan_.peek() == ';') {
        scan_.get();
        scan_.skip_ws();
        char c = scan_.peek();
        if (c == '.' || c == '}') break;
        continue;
      }
      break;
    }
    return out;
  }

  // '.'-separated triples until the closing '}'
  std::vector<TriplePattern> triples_block() {
    std::vector<TriplePattern> out;
    scan_.skip_ws();
    while (!scan_.eof() && scan_.peek() != '}') {
      auto unit = triples_unit();
      out.insert(out.end(), unit.begin(), unit.end());
      scan_.skip_ws();
      if (scan_.peek() == '.') {
        scan_.get();
        scan_.skip_ws();
      } else {
        break;
      }
    }
    return out;
  }

  enum class Position { Subject, Predicate, Object };

  TermId parse_term(Position pos) {
    char c = scan_.peek();
    if (c == '?') return TermPool::intern(scan_.parse_variable());
    if (c == '<') return TermPool::intern_iri(scan_.parse_iriref(base_));
    if (c == '_' || c == '[') scan_.fail("blank nodes are not supported in queries");
    if (pos == Position::Predicate && c == 'a') {
      char next = scan_.peek(1);
      if (!Scanner::is_name_char(next) && next != ':') {
        scan_.get();
        return TermPool::intern_iri(rdf_type);
      }
    }
    if (pos == Position::Object) {
      if (c == '"')
        return TermPool::intern(scan_.finish_literal(scan_.parse_string(), base_, prefixes_));
      if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && std::isdigit(static_cast<unsigned char>(scan_.peek(1)))))
        return TermPool::intern(scan_.parse_number());
      if (scan_.try_keyword("true")) return TermPool::intern(Term::boolean(true));
      if (scan_.try_keyword("false")) return TermPool::intern(Term::boolean(false));
    }
    if (scan_.looks_like_pname()) return TermPool::intern_iri(scan_.parse_pname(prefixes_));
    scan_.fail("expected term");
  }

  FilterExprPtr or_expr() {
    FilterExprPtr lhs = and_expr();
    while (true) {
      scan_.skip_ws();
      if (!scan_.try_consume("||")) return lhs;
      scan_.skip_ws();
      auto node = std::make_shared<FilterExpr>();
      node->op = FilterExpr::Op::Or;
      node->lhs = lhs;
      node->rhs = and_expr();
      lhs = node;
    }
  }

  FilterExprPtr and_expr() {
    FilterExprPtr lhs = rel_expr();
    while (true) {
      scan_.skip_ws();
      if (!scan_.try_consume("&&")) return lhs;
      scan_.skip_ws();
      auto node = std::make_shared<FilterExpr>();
      node->op = FilterExpr::Op::And;
      node->lhs = lhs;
      node->rhs = rel_expr();
      lhs = node;
    }
  }

  FilterExprPtr rel_expr() {
    FilterExprPtr lhs = unary_expr();
    scan_.skip_ws();
    FilterExpr::Op op;
    if (scan_.try_consume("!=")) op = FilterExpr::Op::Ne;
    else if (scan_.try_consume("<=")) op = FilterExpr::Op::Le;
    else if (scan_.try_consume(">=")) op = FilterExpr::Op::Ge;
    else if (scan_.try_consume("=")) op = FilterExpr::Op::Eq;
    else if (scan_.try_consume("<")) op = FilterExpr::Op::Lt;
    else if (scan_.try_consume(">")) op = FilterExpr::Op::Gt;
    else return lhs;
    scan_.skip_ws();
    auto node = std::make_shared<FilterExpr>();
    node->op = op;
    node->lhs = lhs;
    node->rhs = unary_expr();
    return node;
  }

  FilterExprPtr unary_expr() {
    scan_.skip_ws();
    if (scan_.peek() == '!' && scan_.peek(1) != '=') {
      scan_.get();
      auto node = std::make_shared<FilterExpr>();
      node->op = FilterExpr::Op::Not;
      node->lhs = unary_expr();
      return node;
    }
    if (scan_.peek() == '(') {
      scan_.get();
      FilterExprPtr inner = or_expr();
      scan_.skip_ws();
      scan_.expect(')');
      return inner;
    }
    auto node = std::make_shared<FilterExpr>();
    node->op = FilterExpr::Op::Operand;
    node->operand = parse_operand();
    return node;
  }

  TermId parse_operand() {
    char c = scan_.peek();
    if (c == '?') return TermPool::intern(scan_.parse_variable());
    if (c == '<') return TermPool::intern_iri(scan_.parse_iriref(base_));
    if (c == '"')
      return TermPool::intern(scan_.finish_literal(scan_.parse_string(), base_, prefixes_));
    if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(scan_.peek(1)))))
      return TermPool::intern(scan_.parse_number());
    if (scan_.try_keyword("true")) return TermPool::intern(Term::boolean(true));
    if (scan_.try_keyword("false")) return TermPool::intern(Term::boolean(false));
    if (scan_.looks_like_pname()) return TermPool::intern_iri(scan_.parse_pname(prefixes_));
    scan_.fail("expected filter operand");
  }

  Scanner scan_;
  std::string base_;
  std::map<std::string, std::string> prefixes_;
};

} // namespace detail

inline Query parse_query(std::string_view text) { return detail::QueryParser(text).run(); }

inline ConstructQuery parse_construct(std::string_view text) {
  Query q = parse_query(text);
  if (auto* c = std::get_if<ConstructQuery>(&q)) return std::move(*c);
  throw ParseError("expected a CONSTRUCT query", 1, 1);
}

inline SelectQuery parse_select(std::string_view text) {
  Query q = parse_query(text);
  if (auto* s = std::get_if<SelectQuery>(&q)) return std::move(*s);
  throw ParseError("expected a SELECT query", 1, 1);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

enum class Truth { True, False, Error };

inline Truth eval_filter(const FilterExpr& e, const Binding& b);

inline std::optional<TermId> resolve_operand(TermId id, const Binding& b) {
  if (!is_variable(id)) return id;
  return b.get(id);
}

inline Truth compare_terms(FilterExpr::Op op, TermId lhs, TermId rhs) {
  Term a = TermPool::term(lhs), c = TermPool::term(rhs);
  auto na = numeric_value(a), nc = numeric_value(c);
  if (op == FilterExpr::Op::Eq || op == FilterExpr::Op::Ne) {
    bool eq = (na && nc) ? *na == *nc : lhs == rhs;
    return (eq == (op == FilterExpr::Op::Eq)) ? Truth::True : Truth::False;
  }
  // order comparisons: numbers by value, literals lexically; IRIs and blank
  // nodes do not order
  int cmp;
  if (na && nc) {
    cmp = (*na < *nc) ? -1 : (*na > *nc ? 1 : 0);
  } else if (a.is_literal() && c.is_literal()) {
    cmp = term_compare(a, c);
  } else {
    return Truth::Error;
  }
  switch (op) {
    case FilterExpr::Op::Lt: return cmp < 0 ? Truth::True : Truth::False;
    case FilterExpr::Op::Le: return cmp <= 0 ? Truth::True : Truth::False;
    case FilterExpr::Op::Gt: return cmp > 0 ? Truth::True : Truth::False;
    case FilterExpr::Op::Ge: return cmp >= 0 ? Truth::True : Truth::False;
    default: return Truth::Error;
  }
}

inline Truth eval_filter(const FilterExpr& e, const Binding& b) {
  switch (e.op) {
    case FilterExpr::Op::Operand: {
      auto t = resolve_operand(e.operand, b);
      if (!t) return Truth::Error;
      Term term = TermPool::term(*t);
      if (term.is_literal() && term.datatype == xsd::boolean_)
        return term.value == "true" ? Truth::True : Truth::False;
      return Truth::Error;
    }
    case FilterExpr::Op::Not: {
      Truth v = eval_filter(*e.lhs, b);
      if (v == Truth::Error) return v;
      return v == Truth::True ? Truth::False : Truth::True;
    }
    case FilterExpr::Op::And: {
      Truth l = eval_filter(*e.lhs, b), r = eval_filter(*e.rhs, b);
      if (l == Truth::False || r == Truth::False) return Truth::False;
      if (l == Truth::Error || r == Truth::Error) return Truth::Error;
      return Truth::True;
    }
    case FilterExpr::Op::Or: {
      Truth l = eval_filter(*e.lhs, b), r = eval_filter(*e.rhs, b);
      if (l == Truth::True || r == Truth::True) return Truth::True;
      if (l == Truth::Error || r == Truth::Error) return Truth::Error;
      return Truth::False;
    }
    default: {
      auto lhs = resolve_operand(e.lhs->operand, b);
      auto rhs = resolve_operand(e.rhs->operand, b);
      if (!lhs || !rhs) return Truth::Error;
      return compare_terms(e.op, *lhs, *rhs);
    }
  }
}

/// Greedy static join order for a run of triple patterns: repeatedly pick the
/// pattern with the most positions already concrete or bound.
inline std::vector<size_t> join_order(std::span<const TriplePattern> patterns,
                                      std::set<TermId> bound) {
  std::vector<size_t> order;
  std::vector<bool> used(patterns.size(), false);
  for (size_t step = 0; step < patterns.size(); ++step) {
    int best_score = -1;
    size_t best = 0;
    for (size_t i = 0; i < patterns.size(); ++i) {
      if (used[i]) continue;
      int score = 0;
      for (TermId id : {patterns[i].s, patterns[i].p, patterns[i].o})
        if (!is_variable(id) || bound.count(id)) ++score;
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    used[best] = true;
    order.push_back(best);
    collect_pattern_vars(patterns[best], bound);
  }
  return order;
}

inline std::vector<Binding> eval_group(const GroupPattern& g, const Graph& graph,
                                       const Binding& seed);

inline void eval_elements(std::span<const GroupElement> elements, const Graph& graph,
                          std::vector<Binding>& sols, std::set<TermId>& bound_vars) {
  size_t i = 0;
  while (i < elements.size()) {
    if (elements[i].kind == GroupElement::Kind::Pattern) {
      size_t j = i;
      std::vector<TriplePattern> run;
      while (j < elements.size() && elements[j].kind == GroupElement::Kind::Pattern)
        run.push_back(elements[j++].pattern);
      for (size_t idx : join_order(run, bound_vars)) {
        std::vector<Binding> next;
        for (const Binding& sol : sols)
          graph.match(run[idx], sol, [&](Binding ext, const Triple&) {
            next.push_back(std::move(ext));
          });
        sols = std::move(next);
      }
      for (const TriplePattern& p : run) collect_pattern_vars(p, bound_vars);
      i = j;
    } else if (elements[i].kind == GroupElement::Kind::Optional) {
      std::vector<Binding> next;
      for (const Binding& sol : sols) {
        std::vector<Binding> inner = eval_group(*elements[i].optional, graph, sol);
        if (inner.empty()) next.push_back(sol);
        else next.insert(next.end(), inner.begin(), inner.end());
      }
      sols = std::move(next);
      collect_group_vars(*elements[i].optional, bound_vars);
      ++i;
    } else {
      const FilterExpr& f = *elements[i].filter;
      std::erase_if(sols, [&](const Binding& b) { return eval_filter(f, b) != Truth::True; });
      ++i;
    }
  }
}

inline std::vector<Binding> eval_group(const GroupPattern& g, const Graph& graph,
                                       const Binding& seed) {
  std::vector<Binding> sols{seed};
  std::set<TermId> bound;
  for (const auto& [var, val] : seed.entries()) bound.insert(var);
  eval_elements(g.elements, graph, sols, bound);
  return sols;
}

} // namespace detail

/// Evaluates a CONSTRUCT query. Template triples with unbound variables (an
/// OPTIONAL part that did not match) are skipped individually; the result is
/// a set-semantics graph carrying the query's prefixes.
inline Graph eval_construct(const ConstructQuery& q, const Graph& g) {
  Graph out;
  for (const auto& [name, iri] : q.prefixes) out.add_prefix(name, iri);
  for (const Binding& sol : detail::eval_group(q.where, g, {})) {
    for (const TriplePattern& p : q.construct) {
      TermId s = substitute(p.s, sol);
      TermId pr = substitute(p.p, sol);
      TermId o = substitute(p.o, sol);
      if (is_variable(s) || is_variable(pr) || is_variable(o)) continue;
      if (TermPool::kind(s) == TermKind::Literal) continue;
      if (TermPool::kind(pr) != TermKind::Iri) continue;
      out.insert(Triple{s, pr, o});
    }
  }
  return out;
}

/// Evaluates a SELECT query into a deterministic RowSet.
inline RowSet eval_select(const SelectQuery& q, const Graph& g) {
  RowSet rs;
  rs.columns = q.projection_names;
  for (const Binding& sol : detail::eval_group(q.where, g, {})) {
    std::vector<std::optional<TermId>> row;
    row.reserve(q.projection.size());
    for (TermId var : q.projection) row.push_back(sol.get(var));
    rs.rows.push_back(std::move(row));
  }

  // deterministic order: ORDER BY variables first, then whole-row canonical
  // key order; unbound cells sort before bound ones
  std::vector<size_t> order_cols;
  for (TermId v : q.order_by) {
    auto it = std::find(q.projection.begin(), q.projection.end(), v);
    if (it != q.projection.end()) order_cols.push_back(size_t(it - q.projection.begin()));
  }
  auto cell_cmp = [](const std::optional<TermId>& a, const std::optional<TermId>& b) -> int {
    if (!a && !b) return 0;
    if (!a) return -1;
    if (!b) return 1;
    if (*a == *b) return 0;
    return term_compare(TermPool::term(*a), TermPool::term(*b));
  };
  std::sort(rs.rows.begin(), rs.rows.end(), [&](const auto& a, const auto& b) {
    for (size_t c : order_cols) {
      int cmp = cell_cmp(a[c], b[c]);
      if (cmp != 0) return cmp < 0;
    }
    for (size_t c = 0; c < a.size(); ++c) {
      int cmp = cell_cmp(a[c], b[c]);
      if (cmp != 0) return cmp < 0;
    }
    return false;
  });
  return rs;
}

// For entities whose ORDER BY references non-projected variables the sort
// falls back to full-row order; projected ORDER BY is the supported shape.

} // namespace sdv

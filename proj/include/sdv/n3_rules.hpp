#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdv/builtins.hpp"
#include "sdv/graph.hpp"
#include "sdv/scanner.hpp"

namespace sdv {

/// One antecedent atom: an ordinary triple pattern or a builtin application.
struct RuleAtom {
  enum class Kind { Pattern, Builtin };
  Kind kind = Kind::Pattern;
  TriplePattern pattern;
  BuiltinAtom builtin;
};

/// Forward-chaining implication { antecedent } => { consequent }. Rules are
/// range-restricted: every consequent variable is bound by the antecedent.
struct Rule {
  std::string id; // "<source>#<ordinal>"
  std::vector<RuleAtom> antecedent;
  std::vector<TriplePattern> consequent;

  std::vector<TriplePattern> patterns() const {
    std::vector<TriplePattern> out;
    for (const RuleAtom& a : antecedent)
      if (a.kind == RuleAtom::Kind::Pattern) out.push_back(a.pattern);
    return out;
  }

  std::vector<BuiltinAtom> builtins() const {
    std::vector<BuiltinAtom> out;
    for (const RuleAtom& a : antecedent)
      if (a.kind == RuleAtom::Kind::Builtin) out.push_back(a.builtin);
    return out;
  }
};

struct RuleSet {
  std::vector<Rule> rules;
  std::map<std::string, std::string> prefixes;

  const Rule* find(std::string_view id) const {
    for (const Rule& r : rules)
      if (r.id == id) return &r;
    return nullptr;
  }

  bool empty() const { return rules.empty(); }
  size_t size() const { return rules.size(); }
};

namespace detail {

/// Reader for the supported rule subset: prefix declarations and
/// { triples } => { triples } . formulas with ?variables and builtin atoms
/// whose subject may be a ( ... ) argument list.
class RuleReader {
public:
  RuleReader(std::string_view text, std::string_view source)
      : scan_(text), source_(source) {}

  RuleSet run() {
    RuleSet rs;
    scan_.skip_ws();
    while (!scan_.eof()) {
      if (scan_.peek() == '@') {
        directive();
      } else if (scan_.try_keyword("PREFIX")) {
        prefix_decl(false);
      } else if (scan_.try_keyword("BASE")) {
        base_decl(false);
      } else if (scan_.peek() == '{') {
        rs.rules.push_back(rule(rs.rules.size()));
      } else {
        scan_.fail("expected rule or directive");
      }
      scan_.skip_ws();
    }
    rs.prefixes = prefixes_;
    return rs;
  }

private:
  void directive() {
    scan_.get();
    std::string word = scan_.parse_name();
    if (word == "prefix") prefix_decl(true);
    else if (word == "base") base_decl(true);
    else scan_.fail("unknown directive @" + word);
  }

  void prefix_decl(bool dotted) {
    scan_.skip_ws();
    std::string name = scan_.parse_prefix_name();
    scan_.skip_ws();
    prefixes_[name] = scan_.parse_iriref(base_);
    scan_.skip_ws();
    if (dotted) scan_.expect('.');
  }

  void base_decl(bool dotted) {
    scan_.skip_ws();
    base_ = scan_.parse_iriref(base_);
    scan_.skip_ws();
    if (dotted) scan_.expect('.');
  }

  Rule rule(size_t ordinal) {
    Rule r;
    r.id = source_ + "#" + std::to_string(ordinal);
    r.antecedent = antecedent_graph();
    scan_.skip_ws();
    if (!scan_.try_consume("=>")) scan_.fail("expected =>");
    scan_.skip_ws();
    r.consequent = consequent_graph();
    scan_.skip_ws();
    scan_.expect('.');
    validate(r);
    return r;
  }

  std::vector<RuleAtom> antecedent_graph() {
    std::vector<RuleAtom> atoms;
    scan_.expect('{');
    scan_.skip_ws();
    while (!scan_.eof() && scan_.peek() != '}') {
      if (scan_.peek() == '(') {
        atoms.push_back(builtin_atom(atoms.size()));
      } else {
        statement_atoms(atoms);
      }
      scan_.skip_ws();
      if (scan_.peek() == '.') {
        scan_.get();
        scan_.skip_ws();
      }
    }
    scan_.expect('}');
    return atoms;
  }

  std::vector<TriplePattern> consequent_graph() {
    std::vector<TriplePattern> out;
    scan_.expect('{');
    scan_.skip_ws();
    while (!scan_.eof() && scan_.peek() != '}') {
      std::vector<RuleAtom> atoms;
      statement_atoms(atoms);
      for (const RuleAtom& a : atoms) {
        if (a.kind != RuleAtom::Kind::Pattern)
          scan_.fail("builtin atoms are not allowed in a consequent");
        out.push_back(a.pattern);
      }
      scan_.skip_ws();
      if (scan_.peek() == '.') {
        scan_.get();
        scan_.skip_ws();
      }
    }
    scan_.expect('}');
    return out;
  }

  /// (arg ...) builtin ?result
  RuleAtom builtin_atom(size_t ordinal) {
    RuleAtom atom;
    atom.kind = RuleAtom::Kind::Builtin;
    atom.builtin.ordinal = ordinal;
    scan_.expect('(');
    scan_.skip_ws();
    while (!scan_.eof() && scan_.peek() != ')') {
      atom.builtin.args.push_back(parse_term(Position::Object));
      scan_.skip_ws();
    }
    scan_.expect(')');
    if (atom.builtin.args.empty()) scan_.fail("empty builtin argument list");
    scan_.skip_ws();
    size_t line = scan_.line(), col = scan_.column();
    TermId pred = parse_term(Position::Predicate);
    Term pt = TermPool::term(pred);
    const BuiltinDef* def = pt.is_iri() ? BuiltinRegistry::find(pt.value) : nullptr;
    if (!def) throw ParseError("unknown builtin IRI <" + pt.value + ">", line, col);
    if (atom.builtin.args.size() < def->min_args || atom.builtin.args.size() > def->max_args)
      throw ParseError("builtin <" + pt.value + "> arity mismatch", line, col);
    atom.builtin.builtin = pred;
    scan_.skip_ws();
    atom.builtin.object = parse_term(Position::Object);
    return atom;
  }

  /// subject predicate-object list; predicates that are registered builtin
  /// IRIs turn the statement into a builtin atom with a one-element subject.
  void statement_atoms(std::vector<RuleAtom>& atoms) {
    TermId subject = parse_term(Position::Subject);
    scan_.skip_ws();
    while (true) {
      TermId predicate = parse_term(Position::Predicate);
      scan_.skip_ws();
      while (true) {
        TermId object = parse_term(Position::Object);
        Term pt = TermPool::term(predicate);
        const BuiltinDef* def = pt.is_iri() ? BuiltinRegistry::find(pt.value) : nullptr;
        if (def) {
          RuleAtom atom;
          atom.kind = RuleAtom::Kind::Builtin;
          atom.builtin.builtin = predicate;
          atom.builtin.args = {subject};
          atom.builtin.object = object;
          atom.builtin.ordinal = atoms.size();
          atoms.push_back(std::move(atom));
        } else {
          RuleAtom atom;
          atom.pattern = TriplePattern{subject, predicate, object};
          atoms.push_back(std::move(atom));
        }
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
  }

  enum class Position { Subject, Predicate, Object };

  TermId parse_term(Position pos) {
    char c = scan_.peek();
    if (c == '?') return TermPool::intern(scan_.parse_variable());
    if (c == '<') return TermPool::intern_iri(scan_.parse_iriref(base_));
    if (c == '_' || c == '[')
      scan_.fail("blank nodes are not supported in rules");
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

  void validate(const Rule& r) {
    std::set<TermId> bound;
    for (const RuleAtom& a : r.antecedent) {
      if (a.kind == RuleAtom::Kind::Pattern) {
        collect_vars(a.pattern, bound);
      } else {
        const BuiltinDef* def = BuiltinRegistry::find(TermPool::term(a.builtin.builtin).value);
        if (def && def->kind == BuiltinKind::Function && is_variable(a.builtin.object))
          bound.insert(a.builtin.object);
      }
    }
    for (const TriplePattern& p : r.consequent) {
      for (TermId id : {p.s, p.p, p.o}) {
        if (is_variable(id) && !bound.count(id))
          scan_.fail("consequent variable ?" + TermPool::term(id).value +
                     " not bound by the antecedent of " + r.id);
      }
      if (!is_variable(p.s) && TermPool::kind(p.s) == TermKind::Literal)
        scan_.fail("literal subject in consequent of " + r.id);
      if (!is_variable(p.p) && TermPool::kind(p.p) != TermKind::Iri)
        scan_.fail("non-IRI predicate in consequent of " + r.id);
    }
  }

  static void collect_vars(const TriplePattern& p, std::set<TermId>& out) {
    for (TermId id : {p.s, p.p, p.o})
      if (is_variable(id)) out.insert(id);
  }

  Scanner scan_;
  std::string source_;
  std::string base_;
  std::map<std::string, std::string> prefixes_;
};

} // namespace detail

/// Parses a rule document. Rule ids are "<source>#<ordinal>" and stay stable
/// across reparses of the same file.
inline RuleSet parse_rules(std::string_view text, std::string_view source = "rules") {
  return detail::RuleReader(text, source).run();
}

} // namespace sdv

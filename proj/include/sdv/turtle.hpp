#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdv/graph.hpp"
#include "sdv/hash.hpp"
#include "sdv/scanner.hpp"

namespace sdv {

namespace detail {

/// Turtle subset reader: prefixes, IRIs, prefixed names, blank nodes (labels
/// and []), literals with the numeric/boolean shorthand, 'a', ';' and ','.
/// Collections are not supported in data documents. Blank-node labels are
/// freshened per document (b1, b2, ... in order of first appearance), so two
/// parses never share labels accidentally.
class TurtleReader {
public:
  TurtleReader(std::string_view text, std::string_view base) : scan_(text), base_(base) {}

  Graph run() {
    Graph g;
    scan_.skip_ws();
    while (!scan_.eof()) {
      if (scan_.peek() == '@') {
        directive(g);
      } else if (scan_.try_keyword("PREFIX")) {
        prefix_decl(g, false);
      } else if (scan_.try_keyword("BASE")) {
        base_decl(false);
      } else {
        triples(g);
      }
      scan_.skip_ws();
    }
    return g;
  }

private:
  void directive(Graph& g) {
    scan_.get(); // '@'
    std::string word = scan_.parse_name();
    if (word == "prefix") prefix_decl(g, true);
    else if (word == "base") base_decl(true);
    else scan_.fail("unknown directive @" + word);
  }

  void prefix_decl(Graph& g, bool dotted) {
    scan_.skip_ws();
    std::string name = scan_.parse_prefix_name();
    scan_.skip_ws();
    std::string iri = scan_.parse_iriref(base_);
    prefixes_[name] = iri;
    g.add_prefix(name, iri);
    scan_.skip_ws();
    if (dotted) scan_.expect('.');
  }

  void base_decl(bool dotted) {
    scan_.skip_ws();
    base_ = scan_.parse_iriref(base_);
    scan_.skip_ws();
    if (dotted) scan_.expect('.');
  }

  void triples(Graph& g) {
    Term subject = parse_subject(g);
    scan_.skip_ws();
    predicate_object_list(g, subject);
    scan_.skip_ws();
    scan_.expect('.');
  }

  void predicate_object_list(Graph& g, const Term& subject) {
    while (true) {
      Term predicate = parse_predicate();
      scan_.skip_ws();
      while (true) {
        Term object = parse_object(g);
        g.insert(subject, predicate, object);
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
        if (scan_.peek() == '.' || scan_.peek() == ']') break; // trailing ';'
        continue;
      }
      break;
    }
  }

  Term parse_subject(Graph& g) {
    char c = scan_.peek();
    if (c == '<') return Term::iri(scan_.parse_iriref(base_));
    if (c == '_') return parse_blank_label();
    if (c == '[') return parse_blank_property_list(g);
    if (c == '(') scan_.fail("collections are not supported");
    if (scan_.looks_like_pname()) return Term::iri(scan_.parse_pname(prefixes_));
    scan_.fail("expected subject");
  }

  Term parse_predicate() {
    char c = scan_.peek();
    if (c == '<') return Term::iri(scan_.parse_iriref(base_));
    if (c == 'a') {
      char next = scan_.peek(1);
      if (!detail::Scanner::is_name_char(next) && next != ':') {
        scan_.get();
        return Term::iri(rdf_type);
      }
    }
    if (scan_.looks_like_pname()) return Term::iri(scan_.parse_pname(prefixes_));
    scan_.fail("expected predicate");
  }

  Term parse_object(Graph& g) {
    char c = scan_.peek();
    if (c == '<') return Term::iri(scan_.parse_iriref(base_));
    if (c == '_') return parse_blank_label();
    if (c == '[') return parse_blank_property_list(g);
    if (c == '(') scan_.fail("collections are not supported");
    if (c == '"') {
      std::string lexical = scan_.parse_string();
      return scan_.finish_literal(std::move(lexical), base_, prefixes_);
    }
    if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(scan_.peek(1)))))
      return scan_.parse_number();
    if (scan_.try_keyword("true")) return Term::boolean(true);
    if (scan_.try_keyword("false")) return Term::boolean(false);
    if (scan_.looks_like_pname()) return Term::iri(scan_.parse_pname(prefixes_));
    scan_.fail("expected object");
  }

  Term parse_blank_label() {
    scan_.expect('_');
    scan_.expect(':');
    std::string label;
    if (scan_.eof() || !(std::isalnum(static_cast<unsigned char>(scan_.peek())) || scan_.peek() == '_'))
      scan_.fail("expected blank node label");
    while (!scan_.eof() && detail::Scanner::is_name_char(scan_.peek())) label += scan_.get();
    auto it = bnode_map_.find(label);
    if (it != bnode_map_.end()) return Term::blank(it->second);
    std::string fresh = "b" + std::to_string(++bnode_counter_);
    bnode_map_.emplace(std::move(label), fresh);
    return Term::blank(fresh);
  }

  Term parse_blank_property_list(Graph& g) {
    scan_.expect('[');
    Term node = Term::blank("b" + std::to_string(++bnode_counter_));
    scan_.skip_ws();
    if (scan_.peek() == ']') {
      scan_.get();
      return node;
    }
    predicate_object_list(g, node);
    scan_.skip_ws();
    scan_.expect(']');
    return node;
  }

  detail::Scanner scan_;
  std::string base_;
  std::map<std::string, std::string> prefixes_;
  std::unordered_map<std::string, std::string> bnode_map_;
  size_t bnode_counter_ = 0;
};

inline bool integer_lexical(std::string_view s) {
  size_t i = (s.size() > 0 && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

inline bool decimal_lexical(std::string_view s) {
  size_t i = (s.size() > 0 && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  size_t dot = s.find('.', i);
  if (dot == std::string_view::npos || dot + 1 >= s.size()) return false;
  for (size_t k = i; k < s.size(); ++k) {
    if (k == dot) continue;
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
  }
  return true;
}

inline bool double_lexical(std::string_view s) {
  size_t e = s.find_first_of("eE");
  if (e == std::string_view::npos || e == 0 || e + 1 >= s.size()) return false;
  std::string_view mantissa = s.substr(0, e);
  std::string_view exponent = s.substr(e + 1);
  if (!integer_lexical(exponent)) return false;
  return integer_lexical(mantissa) || decimal_lexical(mantissa);
}

inline bool pn_local_ok(std::string_view local) {
  if (local.empty()) return true; // "prefix:" alone is legal
  for (char c : local)
    if (!Scanner::is_name_char(c)) return false;
  return local.back() != '-';
}

} // namespace detail

/// Parses a Turtle document. Prefixes are recorded on the returned graph;
/// blank-node labels are fresh per document. Errors carry line:column.
inline Graph parse_turtle(std::string_view text, std::string_view base = {}) {
  detail::TurtleReader reader(text, base);
  return reader.run();
}

/// Deterministic Turtle writer: prefixes sorted by name, triples sorted by
/// canonical (subject, predicate, object) key order, grouped with ';' and
/// ','. The same graph always serializes to identical bytes.
inline std::string serialize_turtle(const Graph& g) {
  auto key_of = [](TermId id) -> const std::string& { return TermPool::key_ref(id); };

  std::vector<Triple> sorted = g.triples();
  std::sort(sorted.begin(), sorted.end(), [&](const Triple& a, const Triple& b) {
    if (key_of(a.s) != key_of(b.s)) return key_of(a.s) < key_of(b.s);
    if (key_of(a.p) != key_of(b.p)) return key_of(a.p) < key_of(b.p);
    return key_of(a.o) < key_of(b.o);
  });

  // longest-namespace prefix abbreviation; ties resolved by prefix name
  std::vector<std::pair<std::string, std::string>> namespaces; // (iri, name)
  for (const auto& [name, iri] : g.prefixes()) namespaces.emplace_back(iri, name);
  std::sort(namespaces.begin(), namespaces.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.second < b.second;
  });

  auto render_iri = [&](const std::string& value) -> std::string {
    for (const auto& [iri, name] : namespaces) {
      if (value.size() >= iri.size() && value.compare(0, iri.size(), iri) == 0) {
        std::string_view local(value.c_str() + iri.size());
        if (detail::pn_local_ok(local)) return name + ":" + std::string(local);
      }
    }
    return "<" + value + ">";
  };

  auto render = [&](const Term& t) -> std::string {
    if (t.is_iri()) return render_iri(t.value);
    if (t.is_blank()) return "_:" + t.value;
    // literal
    if (t.lang.empty()) {
      if (t.datatype == xsd::integer_ && detail::integer_lexical(t.value)) return t.value;
      if (t.datatype == xsd::decimal_ && detail::decimal_lexical(t.value)) return t.value;
      if (t.datatype == xsd::double_ && detail::double_lexical(t.value)) return t.value;
      if (t.datatype == xsd::boolean_ && (t.value == "true" || t.value == "false")) return t.value;
    }
    std::string out = "\"";
    detail::escape_into(out, t.value);
    out += '"';
    if (!t.lang.empty()) {
      out += '@';
      out += t.lang;
    } else if (t.datatype != xsd::string_) {
      out += "^^";
      out += render_iri(t.datatype);
    }
    return out;
  };

  std::string doc;
  for (const auto& [name, iri] : g.prefixes()) {
    doc += "@prefix ";
    doc += name;
    doc += ": <";
    doc += iri;
    doc += "> .\n";
  }
  if (!g.prefixes().empty() && !sorted.empty()) doc += '\n';

  const std::string* prev_s = nullptr;
  const std::string* prev_p = nullptr;
  for (const Triple& t : sorted) {
    const std::string& sk = key_of(t.s);
    const std::string& pk = key_of(t.p);
    Term s = TermPool::term(t.s), p = TermPool::term(t.p), o = TermPool::term(t.o);
    std::string pred = (p.value == rdf_type && p.is_iri()) ? "a" : render(p);
    if (prev_s && *prev_s == sk) {
      if (prev_p && *prev_p == pk) {
        doc += " , ";
      } else {
        doc += " ;\n    ";
        doc += pred;
        doc += ' ';
      }
    } else {
      if (prev_s) doc += " .\n";
      doc += render(s);
      doc += ' ';
      doc += pred;
      doc += ' ';
    }
    doc += render(o);
    prev_s = &sk;
    prev_p = &pk;
  }
  if (prev_s) doc += " .\n";
  return doc;
}

/// Prefix-independent digest: SHA-256 over the sorted canonical triple lines.
/// Blank-node labels participate as-is.
inline std::string graph_hash(const Graph& g) {
  std::vector<std::string> lines;
  lines.reserve(g.size());
  for (const Triple& t : g.triples()) {
    std::string line = TermPool::key_ref(t.s);
    line += ' ';
    line += TermPool::key_ref(t.p);
    line += ' ';
    line += TermPool::key_ref(t.o);
    line += " .\n";
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  Sha256 h;
  for (const std::string& line : lines) h.update(line);
  return h.hex_digest();
}

} // namespace sdv

#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "sdv/errors.hpp"

namespace sdv {

namespace ns {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view rif_func = "http://www.w3.org/2007/rif-builtin-function#";
inline constexpr std::string_view swap_math = "http://www.w3.org/2000/10/swap/math#";
inline constexpr std::string_view swap_log = "http://www.w3.org/2000/10/swap/log#";
} // namespace ns

namespace xsd {
inline const std::string string_ = std::string(ns::xsd) + "string";
inline const std::string integer_ = std::string(ns::xsd) + "integer";
inline const std::string decimal_ = std::string(ns::xsd) + "decimal";
inline const std::string double_ = std::string(ns::xsd) + "double";
inline const std::string boolean_ = std::string(ns::xsd) + "boolean";
inline const std::string dateTime_ = std::string(ns::xsd) + "dateTime";
inline const std::string date_ = std::string(ns::xsd) + "date";
} // namespace xsd

inline const std::string rdf_type = std::string(ns::rdf) + "type";
inline const std::string rdf_langString = std::string(ns::rdf) + "langString";

enum class TermKind : uint8_t { Iri, BlankNode, Literal, Variable };

/// One RDF term. Literals always carry exactly one datatype IRI; a language
/// tag forces rdf:langString. Variables only ever appear inside patterns and
/// rules, never in asserted graphs.
struct Term {
  TermKind kind = TermKind::Iri;
  std::string value;    // IRI string | blank node label | lexical form | variable name
  std::string datatype; // literal datatype IRI, empty for non-literals
  std::string lang;     // language tag, empty unless rdf:langString

  static Term iri(std::string v) { return {TermKind::Iri, std::move(v), {}, {}}; }
  static Term blank(std::string label) { return {TermKind::BlankNode, std::move(label), {}, {}}; }
  static Term variable(std::string name) { return {TermKind::Variable, std::move(name), {}, {}}; }

  static Term literal(std::string lexical, std::string datatype = {}) {
    Term t{TermKind::Literal, std::move(lexical), std::move(datatype), {}};
    if (t.datatype.empty()) t.datatype = xsd::string_;
    return t;
  }

  static Term lang_literal(std::string lexical, std::string lang) {
    return {TermKind::Literal, std::move(lexical), rdf_langString, std::move(lang)};
  }

  static Term integer(long long v) { return literal(std::to_string(v), xsd::integer_); }
  static Term boolean(bool v) { return literal(v ? "true" : "false", xsd::boolean_); }

  bool is_iri() const { return kind == TermKind::Iri; }
  bool is_blank() const { return kind == TermKind::BlankNode; }
  bool is_literal() const { return kind == TermKind::Literal; }
  bool is_variable() const { return kind == TermKind::Variable; }

  bool operator==(const Term&) const = default;
};

namespace detail {

inline void escape_into(std::string& out, std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xF];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
}

} // namespace detail

/// Canonical single-line rendering of a term. Doubles as the total order used
/// for deterministic serialization and as the term syntax inside proof files.
inline std::string term_key(const Term& t) {
  std::string out;
  switch (t.kind) {
    case TermKind::Iri:
      out += '<';
      out += t.value;
      out += '>';
      break;
    case TermKind::BlankNode:
      out += "_:";
      out += t.value;
      break;
    case TermKind::Variable:
      out += '?';
      out += t.value;
      break;
    case TermKind::Literal:
      out += '"';
      detail::escape_into(out, t.value);
      out += '"';
      if (!t.lang.empty()) {
        out += '@';
        out += t.lang;
      } else if (t.datatype != xsd::string_) {
        out += "^^<";
        out += t.datatype;
        out += '>';
      }
      break;
  }
  return out;
}

/// Inverse of term_key. Accepts only the canonical forms term_key emits.
inline Term parse_term_key(std::string_view s) {
  auto fail = [&] { throw ModelError("malformed term key: " + std::string(s)); };
  if (s.empty()) fail();
  if (s.front() == '<') {
    if (s.back() != '>') fail();
    return Term::iri(std::string(s.substr(1, s.size() - 2)));
  }
  if (s.size() >= 2 && s[0] == '_' && s[1] == ':') return Term::blank(std::string(s.substr(2)));
  if (s.front() == '?') return Term::variable(std::string(s.substr(1)));
  if (s.front() == '"') {
    std::string lexical;
    size_t i = 1;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '\\') {
        if (i + 1 >= s.size()) fail();
        char e = s[++i];
        switch (e) {
          case '"': lexical += '"'; break;
          case '\\': lexical += '\\'; break;
          case 'n': lexical += '\n'; break;
          case 'r': lexical += '\r'; break;
          case 't': lexical += '\t'; break;
          case 'u': {
            if (i + 4 >= s.size()) fail();
            unsigned v = 0;
            for (int k = 0; k < 4; ++k) {
              char h = s[++i];
              v <<= 4;
              if (h >= '0' && h <= '9') v |= unsigned(h - '0');
              else if (h >= 'A' && h <= 'F') v |= unsigned(h - 'A' + 10);
              else if (h >= 'a' && h <= 'f') v |= unsigned(h - 'a' + 10);
              else fail();
            }
            if (v < 0x80) lexical += static_cast<char>(v);
            else fail(); // escapes are only emitted for control chars
            break;
          }
          default: fail();
        }
      } else if (c == '"') {
        break;
      } else {
        lexical += c;
      }
    }
    if (i >= s.size()) fail();
    std::string_view rest = s.substr(i + 1);
    if (rest.empty()) return Term::literal(std::move(lexical));
    if (rest.front() == '@') return Term::lang_literal(std::move(lexical), std::string(rest.substr(1)));
    if (rest.size() > 4 && rest.substr(0, 3) == "^^<" && rest.back() == '>')
      return Term::literal(std::move(lexical), std::string(rest.substr(3, rest.size() - 4)));
    fail();
  }
  fail();
  return {};
}

/// Interned term handle. The two low bits carry the TermKind, so kind tests
/// never touch memory; the remaining bits index the pool.
using TermId = uint32_t;

/// Process-wide append-only term interner. Identical terms share one id, so
/// triples and bindings compare by id. Entries live in fixed-size chunks
/// whose addresses never move, which makes every read path lock-free; the
/// mutex only serializes interning.
class TermPool {
public:
  static TermId intern(const Term& t) {
    std::string key = term_key(t);
    TermPool& p = instance();
    std::lock_guard lock(p.mu_);
    auto it = p.index_.find(std::string_view(key));
    if (it != p.index_.end()) return it->second;
    uint32_t index = p.count_.load(std::memory_order_relaxed);
    if (index >= (uint32_t(1) << 30)) throw Error("term pool exhausted");
    Entry* chunk = p.chunks_[index >> kChunkBits].load(std::memory_order_relaxed);
    if (!chunk) {
      chunk = new Entry[kChunkSize];
      p.chunks_[index >> kChunkBits].store(chunk, std::memory_order_release);
    }
    Entry& e = chunk[index & (kChunkSize - 1)];
    e.term = t;
    e.key = std::move(key);
    TermId id = (index << 2) | uint32_t(t.kind);
    p.index_.emplace(std::string_view(e.key), id);
    p.count_.store(index + 1, std::memory_order_release);
    return id;
  }

  static TermId intern_iri(std::string_view iri) { return intern(Term::iri(std::string(iri))); }
  static TermId intern_var(std::string_view name) { return intern(Term::variable(std::string(name))); }

  /// Stable reference: entries are never moved or removed.
  static const Term& term_ref(TermId id) { return entry(id).term; }
  static Term term(TermId id) { return entry(id).term; }

  static const std::string& key_ref(TermId id) { return entry(id).key; }
  static std::string key(TermId id) { return entry(id).key; }

  static TermKind kind(TermId id) { return TermKind(id & 3u); }

  static size_t size() { return instance().count_.load(std::memory_order_acquire); }

private:
  static constexpr size_t kChunkBits = 16;
  static constexpr size_t kChunkSize = size_t(1) << kChunkBits;
  static constexpr size_t kMaxChunks = size_t(1) << 14; // 2^30 terms

  struct Entry {
    Term term;
    std::string key;
  };

  static const Entry& entry(TermId id) {
    uint32_t index = id >> 2;
    Entry* chunk = instance().chunks_[index >> kChunkBits].load(std::memory_order_acquire);
    return chunk[index & (kChunkSize - 1)];
  }

  static TermPool& instance() {
    static TermPool pool;
    return pool;
  }

  std::array<std::atomic<Entry*>, kMaxChunks> chunks_{};
  std::unordered_map<std::string_view, TermId> index_;
  std::atomic<uint32_t> count_{0};
  std::mutex mu_;
};

inline bool is_variable(TermId id) { return TermPool::kind(id) == TermKind::Variable; }

/// Numeric value of a literal, when its datatype is one of the numeric XSD
/// types and the lexical form parses.
inline std::optional<double> numeric_value(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  if (t.datatype != xsd::integer_ && t.datatype != xsd::decimal_ && t.datatype != xsd::double_)
    return std::nullopt;
  const std::string& s = t.value;
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

/// Total order over terms: numeric literals compare by value (lexical form as
/// tiebreak), everything else by canonical key. Returns <0, 0, >0.
inline int term_compare(const Term& a, const Term& b) {
  auto na = numeric_value(a);
  auto nb = numeric_value(b);
  if (na && nb && *na != *nb) return *na < *nb ? -1 : 1;
  std::string ka = term_key(a), kb = term_key(b);
  if (ka < kb) return -1;
  if (ka > kb) return 1;
  return 0;
}

} // namespace sdv

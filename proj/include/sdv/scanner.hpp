#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "sdv/errors.hpp"
#include "sdv/term.hpp"

namespace sdv::detail {

inline bool has_scheme(std::string_view iri) {
  if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
  for (size_t i = 1; i < iri.size(); ++i) {
    char c = iri[i];
    if (c == ':') return true;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  return false;
}

/// Minimal relative-reference resolution against a base IRI (merge rules of
/// RFC 3986 without dot-segment removal).
inline std::string resolve_iri(std::string_view ref, std::string_view base) {
  if (has_scheme(ref)) return std::string(ref);
  std::string b(base);
  if (ref.empty()) return b;
  size_t frag = b.find('#');
  if (frag != std::string::npos) b.resize(frag);
  if (ref[0] == '#') return b + std::string(ref);
  size_t query = b.find('?');
  if (query != std::string::npos) b.resize(query);
  if (ref[0] == '?') return b + std::string(ref);
  size_t scheme_end = b.find(':');
  size_t authority_end = std::string::npos;
  if (scheme_end != std::string::npos && b.compare(scheme_end, 3, "://") == 0) {
    authority_end = b.find('/', scheme_end + 3);
  }
  if (ref[0] == '/') {
    if (authority_end == std::string::npos) return b + std::string(ref);
    return b.substr(0, authority_end) + std::string(ref);
  }
  size_t last_slash = b.rfind('/');
  if (last_slash == std::string::npos || (authority_end != std::string::npos && last_slash < authority_end))
    return b + "/" + std::string(ref);
  return b.substr(0, last_slash + 1) + std::string(ref);
}

inline void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

/// Character cursor with line/column tracking and the token-level pieces the
/// Turtle, query and rule parsers share: IRI refs, prefixed names, literals,
/// variables, numbers.
class Scanner {
public:
  explicit Scanner(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  size_t line() const { return line_; }
  size_t column() const { return col_; }

  char peek(size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  char get() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') get();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else {
        break;
      }
    }
  }

  bool try_consume(std::string_view token) {
    if (text_.compare(pos_, token.size(), token) != 0) return false;
    for (size_t i = 0; i < token.size(); ++i) get();
    return true;
  }

  /// Matches a keyword followed by a non-name character (case-insensitive).
  bool try_keyword(std::string_view kw) {
    if (pos_ + kw.size() > text_.size()) return false;
    for (size_t i = 0; i < kw.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(text_[pos_ + i])) !=
          std::tolower(static_cast<unsigned char>(kw[i])))
        return false;
    }
    char next = peek(kw.size());
    if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
    for (size_t i = 0; i < kw.size(); ++i) get();
    return true;
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  /// <...> IRI reference, resolving \u escapes and relative references.
  std::string parse_iriref(std::string_view base) {
    expect('<');
    std::string iri;
    while (true) {
      if (eof()) fail("unterminated IRI");
      char c = get();
      if (c == '>') break;
      if (c == '\n') fail("newline inside IRI");
      if (c == '\\') {
        if (peek() == 'u' || peek() == 'U') {
          int digits = get() == 'u' ? 4 : 8;
          uint32_t cp = 0;
          for (int i = 0; i < digits; ++i) {
            if (eof()) fail("truncated \\u escape");
            cp = cp * 16 + hex_value(get());
          }
          append_utf8(iri, cp);
        } else {
          fail("invalid escape in IRI");
        }
      } else {
        iri += c;
      }
    }
    if (!has_scheme(iri)) {
      if (base.empty()) fail("relative IRI <" + iri + "> with no base");
      return resolve_iri(iri, base);
    }
    return iri;
  }

  static bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_name() {
    if (eof() || !is_name_start(peek())) fail("expected name");
    std::string out;
    while (!eof() && is_name_char(peek())) out += get();
    return out;
  }

  /// PNAME_NS of a @prefix directive: "name:" with possibly empty name.
  std::string parse_prefix_name() {
    std::string name;
    while (!eof() && is_name_char(peek())) name += get();
    expect(':');
    return name;
  }

  bool looks_like_pname() const {
    size_t i = pos_;
    while (i < text_.size() && is_name_char(text_[i])) ++i;
    return i < text_.size() && text_[i] == ':';
  }

  /// prefix:local, expanded through the prefix map.
  std::string parse_pname(const std::map<std::string, std::string>& prefixes) {
    std::string prefix;
    while (!eof() && is_name_char(peek())) prefix += get();
    expect(':');
    auto it = prefixes.find(prefix);
    if (it == prefixes.end()) fail("undefined prefix '" + prefix + ":'");
    std::string local;
    // allow digits to lead a local name; '.' only between other characters
    while (!eof()) {
      char c = peek();
      if (is_name_char(c)) {
        local += get();
      } else if (c == '.' && is_name_char(peek(1))) {
        local += get();
      } else {
        break;
      }
    }
    return it->second + local;
  }

  /// Quoted string body: "..." or """...""" with the usual escapes.
  std::string parse_string() {
    expect('"');
    bool long_form = false;
    if (peek() == '"' && peek(1) == '"') {
      get();
      get();
      long_form = true;
    } else if (peek() == '"') { // empty short string
      get();
      return {};
    }
    std::string out;
    while (true) {
      if (eof()) fail("unterminated string literal");
      char c = get();
      if (c == '"') {
        if (!long_form) break;
        if (peek() == '"' && peek(1) == '"') {
          get();
          get();
          break;
        }
        out += c;
        continue;
      }
      if (c == '\n' && !long_form) fail("newline in string literal");
      if (c == '\\') {
        if (eof()) fail("truncated escape");
        char e = get();
        switch (e) {
          case 't': out += '\t'; break;
          case 'n': out += '\n'; break;
          case 'r': out += '\r'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case '"': out += '"'; break;
          case '\'': out += '\''; break;
          case '\\': out += '\\'; break;
          case 'u':
          case 'U': {
            int digits = e == 'u' ? 4 : 8;
            uint32_t cp = 0;
            for (int i = 0; i < digits; ++i) {
              if (eof()) fail("truncated \\u escape");
              cp = cp * 16 + hex_value(get());
            }
            append_utf8(out, cp);
            break;
          }
          default: fail("invalid string escape");
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  /// Numeric shorthand. Keeps the lexical form exactly as written.
  Term parse_number() {
    std::string lex;
    if (peek() == '+' || peek() == '-') lex += get();
    bool digits_before = false, has_dot = false, has_exp = false;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      lex += get();
      digits_before = true;
    }
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      has_dot = true;
      lex += get();
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) lex += get();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      has_exp = true;
      lex += get();
      if (peek() == '+' || peek() == '-') lex += get();
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) lex += get();
    }
    if (!digits_before && !has_dot) fail("malformed numeric literal");
    if (has_exp) return Term::literal(lex, xsd::double_);
    if (has_dot) return Term::literal(lex, xsd::decimal_);
    return Term::literal(lex, xsd::integer_);
  }

  Term parse_variable() {
    expect('?');
    return Term::variable(parse_name());
  }

  /// Optional @lang or ^^<datatype> suffix after a string body.
  Term finish_literal(std::string lexical, std::string_view base,
                      const std::map<std::string, std::string>& prefixes) {
    if (peek() == '@') {
      get();
      std::string lang;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-'))
        lang += get();
      if (lang.empty()) fail("empty language tag");
      return Term::lang_literal(std::move(lexical), std::move(lang));
    }
    if (peek() == '^' && peek(1) == '^') {
      get();
      get();
      std::string dt;
      if (peek() == '<') dt = parse_iriref(base);
      else dt = parse_pname(prefixes);
      return Term::literal(std::move(lexical), std::move(dt));
    }
    return Term::literal(std::move(lexical));
  }

private:
  uint32_t hex_value(char c) {
    if (c >= '0' && c <= '9') return uint32_t(c - '0');
    if (c >= 'a' && c <= 'f') return uint32_t(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return uint32_t(c - 'A' + 10);
    fail("invalid hex digit in escape");
  }

  std::string_view text_;
  size_t pos_ = 0;
  size_t line_ = 1;
  size_t col_ = 1;
};

} // namespace sdv::detail

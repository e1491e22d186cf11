#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdv/errors.hpp"

namespace sdv {

/// Parameterized query text with $name$ substitution markers and
/// $if(name)$ ... $endif$ guard blocks. Guards nest but never interleave.
/// Substitution is purely textual and happens before query parsing.
struct QueryTemplate {
  std::string text;
  std::set<std::string> parameters;

  static QueryTemplate parse(std::string_view text);
};

namespace detail {

struct Marker {
  enum class Kind { None, If, Endif, Param } kind = Kind::None;
  std::string name;
  size_t end = 0; // offset just past the marker
};

/// Recognizes a marker starting at text[pos] (which must be '$'). Anything
/// that does not match the marker grammar is literal text.
inline Marker read_marker(std::string_view text, size_t pos) {
  Marker m;
  size_t i = pos + 1;
  auto name_end = [&](size_t from) {
    size_t j = from;
    while (j < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
      ++j;
    return j;
  };
  if (text.compare(i, 3, "if(") == 0) {
    size_t j = name_end(i + 3);
    if (j > i + 3 && j + 1 < text.size() && text[j] == ')' && text[j + 1] == '$') {
      m.kind = Marker::Kind::If;
      m.name = std::string(text.substr(i + 3, j - (i + 3)));
      m.end = j + 2;
      return m;
    }
    return m;
  }
  if (text.compare(i, 6, "endif$") == 0) {
    m.kind = Marker::Kind::Endif;
    m.end = i + 6;
    return m;
  }
  size_t j = name_end(i);
  if (j > i && j < text.size() && text[j] == '$') {
    m.kind = Marker::Kind::Param;
    m.name = std::string(text.substr(i, j - i));
    m.end = j + 1;
  }
  return m;
}

} // namespace detail

inline QueryTemplate QueryTemplate::parse(std::string_view text) {
  QueryTemplate t;
  t.text = std::string(text);
  size_t depth = 0;
  size_t line = 1, col = 1;
  for (size_t i = 0; i < text.size();) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (text[i] != '$') {
      ++col;
      ++i;
      continue;
    }
    detail::Marker m = detail::read_marker(text, i);
    switch (m.kind) {
      case detail::Marker::Kind::If:
        ++depth;
        t.parameters.insert(m.name);
        break;
      case detail::Marker::Kind::Endif:
        if (depth == 0) throw ParseError("$endif$ without matching $if$", line, col);
        --depth;
        break;
      case detail::Marker::Kind::Param:
        t.parameters.insert(m.name);
        break;
      case detail::Marker::Kind::None:
        m.end = i + 1; // literal '$'
        break;
    }
    col += m.end - i;
    i = m.end;
  }
  if (depth != 0) throw ParseError("unterminated $if$ block", line, col);
  return t;
}

/// Expands a template: guard blocks are kept iff their parameter is present,
/// $name$ markers inside kept text are replaced with the raw value. A marker
/// whose parameter is absent (and not guarded away) is an error, as is a
/// value containing '>' substituted directly inside <...>.
inline std::string instantiate(const QueryTemplate& t,
                               const std::map<std::string, std::string>& params) {
  const std::string& text = t.text;
  std::string out;
  std::vector<bool> include_stack{true};
  auto included = [&] { return include_stack.back(); };

  for (size_t i = 0; i < text.size();) {
    if (text[i] != '$') {
      if (included()) out += text[i];
      ++i;
      continue;
    }
    detail::Marker m = detail::read_marker(text, i);
    switch (m.kind) {
      case detail::Marker::Kind::If:
        include_stack.push_back(included() && params.count(m.name) != 0);
        break;
      case detail::Marker::Kind::Endif:
        include_stack.pop_back();
        break;
      case detail::Marker::Kind::Param:
        if (included()) {
          auto it = params.find(m.name);
          if (it == params.end())
            throw ConfigError("unresolved template parameter $" + m.name + "$");
          bool iri_position = i > 0 && text[i - 1] == '<';
          if (iri_position && it->second.find('>') != std::string::npos)
            throw ConfigError("parameter '" + m.name + "' contains '>' in IRI position");
          out += it->second;
        }
        break;
      case detail::Marker::Kind::None:
        if (included()) out += '$';
        m.end = i + 1;
        break;
    }
    i = m.end;
  }
  return out;
}

} // namespace sdv

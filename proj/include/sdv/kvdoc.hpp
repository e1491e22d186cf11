#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sdv {

/// One "key value..." line of a manifest document.
struct KvLine {
  std::string key;
  std::string value;
  size_t line = 0;
};

/// Shared manifest grammar: UTF-8 lines, '#' comments, blank lines ignored,
/// first whitespace run separates the key from the (trimmed) value.
inline std::vector<KvLine> read_kv_lines(std::string_view text) {
  std::vector<KvLine> out;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string_view::npos || line[start] == '#') continue;
    line.remove_prefix(start);
    size_t sep = line.find_first_of(" \t");
    KvLine kv;
    kv.line = line_no;
    if (sep == std::string_view::npos) {
      kv.key = std::string(line);
    } else {
      kv.key = std::string(line.substr(0, sep));
      size_t vstart = line.find_first_not_of(" \t", sep);
      if (vstart != std::string_view::npos) {
        std::string_view v = line.substr(vstart);
        size_t vend = v.find_last_not_of(" \t");
        kv.value = std::string(v.substr(0, vend + 1));
      }
    }
    out.push_back(std::move(kv));
  }
  return out;
}

} // namespace sdv

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sdv {

/// Parsed xsd:dateTime / xsd:date fields. No value-space normalization is
/// performed anywhere: the timezone stays whatever the lexical form said.
struct DateTime {
  long long year = 0;
  int month = 1, day = 1, hour = 0, minute = 0, second = 0;
  std::string fraction;                 // digits after the seconds dot, possibly empty
  enum class Zone { None, Utc, Offset } zone = Zone::None;
  int offset_minutes = 0;               // signed, only meaningful for Zone::Offset
};

inline bool is_leap_year(long long y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(long long y, int m) {
  static const int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return (m >= 1 && m <= 12) ? d[m - 1] : 0;
}

namespace detail {

inline bool read_digits(std::string_view s, size_t& i, int count, long long& out) {
  out = 0;
  for (int k = 0; k < count; ++k) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
    ++i;
  }
  return true;
}

inline bool read_date_part(std::string_view s, size_t& i, DateTime& dt) {
  bool neg = false;
  if (i < s.size() && s[i] == '-') {
    neg = true;
    ++i;
  }
  size_t start = i;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  size_t ydigits = i - start;
  if (ydigits < 4) return false;
  if (ydigits > 4 && s[start] == '0') return false; // no leading zeros beyond 4 digits
  long long y = 0;
  for (size_t k = start; k < i; ++k) y = y * 10 + (s[k] - '0');
  dt.year = neg ? -y : y;
  long long m = 0, d = 0;
  if (i >= s.size() || s[i] != '-') return false;
  ++i;
  if (!read_digits(s, i, 2, m)) return false;
  if (i >= s.size() || s[i] != '-') return false;
  ++i;
  if (!read_digits(s, i, 2, d)) return false;
  dt.month = int(m);
  dt.day = int(d);
  if (m < 1 || m > 12) return false;
  if (d < 1 || d > days_in_month(dt.year, dt.month)) return false;
  return true;
}

inline bool read_zone(std::string_view s, size_t& i, DateTime& dt) {
  if (i >= s.size()) {
    dt.zone = DateTime::Zone::None;
    return true;
  }
  if (s[i] == 'Z') {
    ++i;
    dt.zone = DateTime::Zone::Utc;
    return i == s.size();
  }
  if (s[i] != '+' && s[i] != '-') return false;
  int sign = s[i] == '+' ? 1 : -1;
  ++i;
  long long h = 0, m = 0;
  if (!read_digits(s, i, 2, h)) return false;
  if (i >= s.size() || s[i] != ':') return false;
  ++i;
  if (!read_digits(s, i, 2, m)) return false;
  if (h > 14 || m > 59 || (h == 14 && m != 0)) return false;
  dt.zone = DateTime::Zone::Offset;
  dt.offset_minutes = sign * int(h * 60 + m);
  return i == s.size();
}

} // namespace detail

/// Strict parse of an xsd:dateTime lexical form
/// (YYYY-MM-DDThh:mm:ss[.fff][Z|±hh:mm]). Returns nullopt when malformed.
inline std::optional<DateTime> parse_datetime(std::string_view s) {
  DateTime dt;
  size_t i = 0;
  if (!detail::read_date_part(s, i, dt)) return std::nullopt;
  if (i >= s.size() || s[i] != 'T') return std::nullopt;
  ++i;
  long long h = 0, m = 0, sec = 0;
  if (!detail::read_digits(s, i, 2, h)) return std::nullopt;
  if (i >= s.size() || s[i] != ':') return std::nullopt;
  ++i;
  if (!detail::read_digits(s, i, 2, m)) return std::nullopt;
  if (i >= s.size() || s[i] != ':') return std::nullopt;
  ++i;
  if (!detail::read_digits(s, i, 2, sec)) return std::nullopt;
  if (h > 23 || m > 59 || sec > 59) return std::nullopt;
  dt.hour = int(h);
  dt.minute = int(m);
  dt.second = int(sec);
  if (i < s.size() && s[i] == '.') {
    ++i;
    size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == start) return std::nullopt;
    dt.fraction = std::string(s.substr(start, i - start));
  }
  if (!detail::read_zone(s, i, dt)) return std::nullopt;
  return dt;
}

/// Strict parse of an xsd:date lexical form (YYYY-MM-DD, optional zone).
inline std::optional<DateTime> parse_date(std::string_view s) {
  DateTime dt;
  size_t i = 0;
  if (!detail::read_date_part(s, i, dt)) return std::nullopt;
  if (!detail::read_zone(s, i, dt)) return std::nullopt;
  return dt;
}

} // namespace sdv

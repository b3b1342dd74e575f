#pragma once

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "dyadic/errors.hpp"

namespace dyadic {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline long double to_long_double(const Rational& r) {
  return static_cast<long double>(r.numerator()) / static_cast<long double>(r.denominator());
}

/// 2^e as an exact rational, |e| <= 62.
inline Rational pow2(int e) {
  if (e >= 0) return Rational(std::int64_t{1} << e);
  return Rational(1, std::int64_t{1} << (-e));
}

inline std::int64_t floor_int(const Rational& r) {
  std::int64_t q = r.numerator() / r.denominator();
  if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
  return q;
}

inline std::int64_t ceil_int(const Rational& r) { return -floor_int(-r); }

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::int64_t parse_int(std::string_view s, std::string_view whole) {
  s = trim(s);
  if (s.empty()) throw ConfigError("not a rational number: '" + std::string(whole) + "'");
  std::size_t pos = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    pos = 1;
  }
  if (pos == s.size()) throw ConfigError("not a rational number: '" + std::string(whole) + "'");
  std::int64_t v = 0;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c < '0' || c > '9') throw ConfigError("not a rational number: '" + std::string(whole) + "'");
    v = v * 10 + (c - '0');
  }
  return neg ? -v : v;
}

}  // namespace detail

/// Parses "a", "a/b", or a finite decimal "a.bcd" exactly.
inline Rational parse_rational(std::string_view text) {
  const std::string_view s = detail::trim(text);
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto den = detail::parse_int(s.substr(slash + 1), text);
    if (den == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return Rational(detail::parse_int(s.substr(0, slash), text), den);
  }
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    const std::string_view frac = s.substr(dot + 1);
    if (frac.size() > 15) throw ConfigError("too many decimals in '" + std::string(text) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::string_view ip = s.substr(0, dot);
    const bool neg = !ip.empty() && ip.front() == '-';
    const std::int64_t whole = (ip.empty() || ip == "-" || ip == "+") ? 0 : detail::parse_int(ip, text);
    const std::int64_t f = frac.empty() ? 0 : detail::parse_int(frac, text);
    const std::int64_t mag = (whole < 0 ? -whole : whole) * scale + f;
    return Rational(neg ? -mag : mag, scale);
  }
  return Rational(detail::parse_int(s, text));
}

}  // namespace dyadic

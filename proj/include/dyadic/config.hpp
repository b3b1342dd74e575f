#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dyadic/errors.hpp"
#include "dyadic/exponents.hpp"
#include "dyadic/rational.hpp"
#include "dyadic/sharpness.hpp"

namespace dyadic {

enum class OutputFormat { Csv, Json };

struct RunConfig {
  int n = 1;
  int m = 1;
  Rational alpha{0};
  std::vector<Rational> p;
  std::optional<Rational> q;
  WeightMode mode = WeightMode::Homogeneous;
  std::vector<double> eps;
  int mesh_level = 6;
  Rational root_lo{0};
  Rational root_hi{1};
  int scan_level = 6;
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::Csv;

  /// q is derived from homogeneity when absent.
  ExponentData exponents() const {
    if (q) return ExponentData(n, m, alpha, p, *q, mode);
    if (mode == WeightMode::TwoWeight) throw ConfigError("two-weight mode needs an explicit q");
    if (static_cast<int>(p.size()) != m) {
      throw ConfigError("expected " + std::to_string(m) + " exponents p_i, got " + std::to_string(p.size()));
    }
    return ExponentData::homogeneous(n, m, alpha, p);
  }

  RootSystem system() const { return RootSystem::from_bounds(n, root_lo, root_hi, mesh_level); }

  ExperimentConfig experiment(Theorem t) const {
    ExperimentConfig cfg{exponents()};
    cfg.theorem = t;
    cfg.eps = eps;
    cfg.mesh_level = mesh_level;
    cfg.root_lo = root_lo;
    cfg.root_hi = root_hi;
    cfg.scan_level = scan_level;
    return cfg;
  }
};

/// "2^-3..2^-10" (every power between), or a comma list of "2^-k" and
/// rationals.
inline std::vector<double> parse_eps_list(const std::string& text) {
  const auto power = [&](std::string_view s) -> std::optional<int> {
    s = detail::trim(s);
    if (s.rfind("2^", 0) != 0) return std::nullopt;
    return static_cast<int>(detail::parse_int(s.substr(2), text));
  };
  const auto value = [&](std::string_view s) {
    if (const auto k = power(s)) return std::ldexp(1.0, *k);
    return to_double(parse_rational(s));
  };
  std::vector<double> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto a = power(std::string_view(text).substr(0, dots));
    const auto b = power(std::string_view(text).substr(dots + 2));
    if (!a || !b) throw ConfigError("eps range must read 2^a..2^b, got '" + text + "'");
    const int step = *a <= *b ? 1 : -1;
    for (int k = *a;; k += step) {
      out.push_back(std::ldexp(1.0, k));
      if (k == *b) break;
    }
    return out;
  }
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(value(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

inline std::pair<Rational, Rational> parse_root(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("root must read lo:hi, got '" + text + "'");
  const Rational lo = parse_rational(std::string_view(text).substr(0, colon));
  const Rational hi = parse_rational(std::string_view(text).substr(colon + 1));
  if (!(lo < hi)) throw ConfigError("root needs lo < hi, got '" + text + "'");
  return {lo, hi};
}

inline std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(parse_rational(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("format must be csv or json, got '" + s + "'");
}

inline WeightMode parse_mode(const std::string& s) {
  if (s == "homogeneous") return WeightMode::Homogeneous;
  if (s == "two-weight" || s == "two_weight") return WeightMode::TwoWeight;
  throw ConfigError("mode must be homogeneous or two-weight, got '" + s + "'");
}

/// Flat `key = value` text, `#` starts a comment. Every problem found is
/// reported in one ConfigError.
inline RunConfig parse_config(const std::string& text) {
  static const std::set<std::string> required{"n",        "m",    "alpha",      "p",    "eps_list",
                                              "mesh_level", "root", "scan_level", "seed", "format"};
  static const std::set<std::string> optional{"q", "mode"};
  std::vector<std::string> problems;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key(detail::trim(body.substr(0, eq)));
    const std::string val(detail::trim(body.substr(eq + 1)));
    if (!required.count(key) && !optional.count(key)) {
      problems.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } else if (kv.count(key)) {
      problems.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    } else {
      kv[key] = val;
    }
  }
  for (const auto& k : required) {
    if (!kv.count(k)) problems.push_back("missing key '" + k + "'");
  }
  RunConfig c;
  const auto field = [&](const std::string& key, auto&& assign) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      assign(it->second);
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  };
  const auto to_int = [](const std::string& s) {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw ConfigError("not an integer: '" + s + "'");
    return v;
  };
  field("n", [&](const std::string& s) { c.n = to_int(s); });
  field("m", [&](const std::string& s) { c.m = to_int(s); });
  field("alpha", [&](const std::string& s) { c.alpha = parse_rational(s); });
  field("p", [&](const std::string& s) { c.p = parse_rational_list(s); });
  field("q", [&](const std::string& s) { c.q = parse_rational(s); });
  field("mode", [&](const std::string& s) { c.mode = parse_mode(s); });
  field("eps_list", [&](const std::string& s) { c.eps = parse_eps_list(s); });
  field("mesh_level", [&](const std::string& s) { c.mesh_level = to_int(s); });
  field("scan_level", [&](const std::string& s) { c.scan_level = to_int(s); });
  field("root", [&](const std::string& s) { std::tie(c.root_lo, c.root_hi) = parse_root(s); });
  field("seed", [&](const std::string& s) {
    std::size_t used = 0;
    c.seed = std::stoull(s, &used);
    if (used != s.size()) throw ConfigError("not an unsigned integer: '" + s + "'");
  });
  field("format", [&](const std::string& s) { c.format = parse_format(s); });
  if (kv.count("n") && kv.count("m") && kv.count("alpha") && kv.count("p")) {
    if (c.q) {
      for (auto& s : ExponentData::problems(c.n, c.m, c.alpha, c.p, *c.q, c.mode)) problems.push_back(std::move(s));
    } else if (c.mode == WeightMode::TwoWeight) {
      problems.push_back("two-weight mode needs an explicit q");
    } else {
      try {
        (void)c.exponents();
      } catch (const ConfigError& e) {
        problems.push_back(e.what());
      }
    }
  }
  if (c.scan_level > c.mesh_level) problems.push_back("scan_level must not exceed mesh_level");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dyadic

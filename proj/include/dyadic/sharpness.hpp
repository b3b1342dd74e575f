#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dyadic/cube_family.hpp"
#include "dyadic/errors.hpp"
#include "dyadic/exponents.hpp"
#include "dyadic/grid_function.hpp"
#include "dyadic/operators.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/weights.hpp"

namespace dyadic {

enum class Theorem { T1, T2, T3 };

inline std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::T1: return "t1";
    case Theorem::T2: return "t2";
    case Theorem::T3: return "t3";
  }
  return "?";
}

inline Theorem parse_theorem(const std::string& s) {
  if (s == "t1" || s == "T1") return Theorem::T1;
  if (s == "t2" || s == "T2") return Theorem::T2;
  if (s == "t3" || s == "T3") return Theorem::T3;
  throw ConfigError("unknown theorem '" + s + "' (expected t1, t2 or t3)");
}

/// Power-law sweep of the extremal families, in n = 1.
struct ExperimentConfig {
  ExponentData exponents;
  Theorem theorem = Theorem::T1;
  std::vector<double> eps{};
  int mesh_level = 10;
  Rational root_lo{-1};
  Rational root_hi{1};
  std::optional<int> scan_level{};      // defaults to mesh_level
  std::optional<int> integral_level{};  // quadrature mesh for T2, defaults to min(mesh_level, 8)
  int refine_depth = 3;
  int tail_offset = 6;                  // annulus at 2^{-(level - tail_offset)}
  double slope_tolerance = 0.1;
  double ratio_limit = 8.0;
  double domination_tolerance = 0.1;

  int scan() const { return scan_level.value_or(mesh_level); }
  int quadrature_level() const { return integral_level.value_or(std::min(mesh_level, 8)); }
};

/// Every violated hypothesis of the configured experiment, empty when valid.
inline std::vector<std::string> hypothesis_problems(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  const auto& e = cfg.exponents;
  if (e.n() != 1) out.push_back("sharpness experiments run in n = 1 (got n = " + std::to_string(e.n()) + ")");
  if (e.mode() != WeightMode::Homogeneous) out.push_back("sharpness experiments need the homogeneous relation");
  if (cfg.eps.empty()) out.push_back("eps list is empty");
  for (double x : cfg.eps) {
    if (!(x > 0.0 && x <= 1.0)) out.push_back("eps values must lie in (0, 1], got " + std::to_string(x));
  }
  if (!(cfg.root_lo <= Rational(-1)) || !(cfg.root_hi >= Rational(1))) {
    out.push_back("root must contain [-1, 1)");
  }
  if (cfg.mesh_level < cfg.tail_offset + 2) {
    out.push_back("mesh_level must be >= " + std::to_string(cfg.tail_offset + 2));
  }
  if (cfg.scan() > cfg.mesh_level || cfg.scan() < 2) out.push_back("scan_level must lie in [2, mesh_level]");
  if (cfg.theorem == Theorem::T2 &&
      (cfg.quadrature_level() > cfg.mesh_level || cfg.quadrature_level() < cfg.tail_offset + 2)) {
    out.push_back("integral_level must lie in [tail_offset + 2, mesh_level]");
  }
  if (!out.empty()) return out;
  const int m = e.m();
  const Rational one_minus = Rational(1) - e.alpha_exact() / Rational(e.n());
  if (cfg.theorem != Theorem::T3) {
    if (m != 2) out.push_back("the t1/t2 extremal family is defined for m = 2 (got m = " + std::to_string(m) + ")");
    if (!(e.alpha_exact() > 0) || !(e.alpha_exact() < Rational(e.n()))) out.push_back("t1/t2 need 0 < alpha < n");
    if (!out.empty()) return out;
  }
  const int i0 = e.argmax_conjugate();
  Rational max_pc = e.p_conjugate_exact(i0);
  if (cfg.theorem == Theorem::T1) {
    Rational others(0);
    for (int i = 0; i < m; ++i) {
      if (i != i0) others = std::max(others, e.p_conjugate_exact(i));
    }
    if (max_pc * one_minus < others) {
      out.push_back("hypothesis p'_{i0}(1 - alpha/n) >= max_{i != i0} p'_i fails: " + to_string(max_pc) + " * " +
                    to_string(one_minus) + " = " + to_string(max_pc * one_minus) + " < " + to_string(others));
    }
  } else if (cfg.theorem == Theorem::T2) {
    const Rational q = e.q_exact();
    Rational inner = max_pc / q;
    for (int j = 0; j < m; ++j) {
      Rational mx = q;
      for (int i = 0; i < m; ++i) {
        if (i != j) mx = std::max(mx, e.p_conjugate_exact(i));
      }
      inner = std::min(inner, mx / e.p_conjugate_exact(j));
    }
    if (inner > one_minus) {
      out.push_back("hypothesis min{max_i p'_i / q, min_j max_{i != j}{p'_i, q} / p'_j} <= 1 - alpha/n fails: " +
                    to_string(inner) + " > " + to_string(one_minus));
    }
    if (max_pc < q) {
      out.push_back("max_i p'_i = " + to_string(max_pc) + " < q = " + to_string(q) +
                    ": only the max_i p'_i >= q branch has a constructive extremal family");
    }
  }
  return out;
}

inline void validate(const ExperimentConfig& cfg) {
  const auto problems = hypothesis_problems(cfg);
  if (problems.empty()) return;
  std::string msg = "invalid " + to_string(cfg.theorem) + " experiment:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

struct FitResult {
  double slope = 0.0;  // d log(value) / d log(1/eps)
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::vector<double> residuals;
};

/// Least squares of log(value) against log(1/eps).
inline FitResult fit_exponent(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError("fit_exponent needs at least 3 points");
  std::vector<double> xs, ys;
  for (const auto& [eps, v] : points) {
    if (!(eps > 0.0)) throw DomainError("fit_exponent: eps must be positive");
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("fit_exponent: values must be positive and finite");
    xs.push_back(-std::log(eps));
    ys.push_back(std::log(v));
  }
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("fit_exponent: repeated eps makes the regression degenerate");
  }
  const double N = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= N;
  my /= N;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (r.intercept + r.slope * xs[i]);
    r.residuals.push_back(res);
    ssr += res * res;
  }
  r.stderr_slope = std::sqrt(ssr / (N - 2.0) / sxx);
  return r;
}

/// f_i = |x|^{d_i} chi_B and w_i = |x|^{c_i} for one eps.
struct ExtremalFamily {
  std::vector<double> data_degrees;
  std::vector<double> weight_degrees;
};

inline ExtremalFamily extremal_family(const ExperimentConfig& cfg, double eps) {
  const auto& e = cfg.exponents;
  const double n = e.n();
  ExtremalFamily fam;
  if (cfg.theorem == Theorem::T3) {
    for (int i = 0; i < e.m(); ++i) {
      fam.data_degrees.push_back(eps - n);
      fam.weight_degrees.push_back((n - eps) / e.p_conjugate(i));
    }
    return fam;
  }
  const int i0 = e.argmax_conjugate();
  for (int i = 0; i < e.m(); ++i) {
    fam.data_degrees.push_back(i == i0 ? eps - n : (eps - n) / e.p(i));
    fam.weight_degrees.push_back(i == i0 ? (n - eps) / e.p_conjugate(i) : 0.0);
  }
  return fam;
}

/// Data functions f_i = |x|^{d_i} chi_B as exact cell averages.
inline std::vector<GridFunction> extremal_data(const ExtremalFamily& fam, const RootSystem& sys) {
  std::vector<GridFunction> f;
  for (double d : fam.data_degrees) {
    const auto p = discretize_power(d, sys);
    std::vector<double> v(p.values().begin(), p.values().end());
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (!in_unit_ball(sys.cell_center(c))) v[c] = 0.0;
    }
    f.emplace_back(sys, std::move(v));
  }
  return f;
}

/// ||G||_{L^q(u)} for an operator output homogeneous of degree beta near the
/// origin against u = |x|^b: mesh integral for |x| >= 2^{-J}, the annulus
/// 2^{-J-2} <= |x| < 2^{-J} closed by the geometric series of its dilates.
inline double norm_with_tail(const GridFunction& G, const GridFunction& u, double q, double beta, double b, int J) {
  const auto& sys = G.system();
  const int n = sys.dim();
  const double gamma = q * beta + b;
  if (!(gamma + n > 0.0)) throw DomainError("||G||_{L^q(u)} diverges at the origin (q beta + b <= -n)");
  const double rho = std::pow(4.0, -(gamma + n));
  const double outer = std::ldexp(1.0, -J), inner = std::ldexp(1.0, -J - 2);
  long double far = 0.0L, ring = 0.0L;
  for (std::size_t c = 0; c < G.size(); ++c) {
    const auto x = sys.cell_center(c);
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double r = std::sqrt(r2);
    const long double term = std::pow(G[c], q) * u[c];
    if (r >= outer) far += term;
    else if (r >= inner) ring += term;
  }
  const long double total = (far + ring / (1.0L - rho)) * sys.cell_volume();
  return std::pow(static_cast<double>(total), 1.0 / q);
}

struct ExperimentRow {
  double eps = 0.0;
  std::vector<double> norm_f;
  double a_pq = 0.0;
  std::vector<double> a_infty;
  double lhs_norm = 0.0;
  double bound = 0.0;        // theorem bound, sharp exponent, constant 1
  double bound_ratio = 0.0;  // lhs_norm / bound
  std::optional<double> domination;  // T2: max over cells of M / I
};

struct SlopeCheck {
  std::string quantity;
  double exponent = 0.0;  // fitted power of eps, negative for blow-up
  double stderr_slope = 0.0;
  std::vector<double> residuals;
  std::optional<double> target;
  bool lower_bound = false;  // target is a floor, not an equality
  bool pass = true;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
  std::vector<SlopeCheck> slopes;
  double ratio_variation = 1.0;  // max / min of bound_ratio over the sweep
  bool ratio_pass = true;
  std::optional<double> domination_spread;  // T2: max |C/median - 1|
  bool domination_pass = true;

  bool pass() const {
    bool ok = ratio_pass && domination_pass;
    for (const auto& s : slopes) ok = ok && s.pass;
    return ok;
  }

  const SlopeCheck* slope(const std::string& name) const {
    for (const auto& s : slopes) {
      if (s.quantity == name) return &s;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline ExperimentRow run_row(const ExperimentConfig& cfg, const RootSystem& sys, const CubeFamily& F, double eps) {
  const auto& e = cfg.exponents;
  const int m = e.m(), n = e.n();
  const auto fam = extremal_family(cfg, eps);
  ExperimentRow row;
  row.eps = eps;
  for (int i = 0; i < m; ++i) {
    const double pi = e.p(i);
    row.norm_f.push_back(std::pow(power_ball_integral(pi * (fam.data_degrees[i] + fam.weight_degrees[i]), 1.0, n), 1.0 / pi));
  }
  const auto wv = WeightVector::power(e, sys, fam.weight_degrees);
  row.a_pq = a_Pq_constant(wv, F).value;
  for (int i = 0; i < m; ++i) {
    const double sdeg = -e.p_conjugate(i) * fam.weight_degrees[i];
    row.a_infty.push_back(a_infty_constant(wv.sigma(i), F, SelfSimilarTail{sdeg}).value);
  }
  double beta = e.alpha(), b = 0.0;
  for (int i = 0; i < m; ++i) {
    beta += fam.data_degrees[i];
    b += e.q() * fam.weight_degrees[i];
  }
  const auto f = extremal_data(fam, sys);
  const auto M = multilinear_maximal(f, e);
  if (cfg.theorem == Theorem::T2) {
    const int Lq = cfg.quadrature_level();
    const auto qsys = RootSystem::from_bounds(n, cfg.root_lo, cfg.root_hi, Lq);
    const auto fq = extremal_data(fam, qsys);
    const auto I = multilinear_integral(fq, e, cfg.refine_depth);
    const auto Mq = multilinear_maximal(fq, e);
    const auto uq = discretize_power(b, qsys);
    row.lhs_norm = norm_with_tail(I, uq, e.q(), beta, b, Lq - cfg.tail_offset);
    double C = 0.0;
    for (std::size_t c = 0; c < I.size(); ++c) {
      if (I[c] > 0.0) C = std::max(C, Mq[c] / I[c]);
    }
    row.domination = C;
  } else {
    row.lhs_norm = norm_with_tail(M, wv.u(), e.q(), beta, b, cfg.mesh_level - cfg.tail_offset);
  }
  double prod_f = 1.0;
  for (double x : row.norm_f) prod_f *= x;
  const double one_minus = 1.0 - e.alpha() / n;
  double max_pc = 0.0;
  for (int i = 0; i < m; ++i) max_pc = std::max(max_pc, e.p_conjugate(i));
  switch (cfg.theorem) {
    case Theorem::T1:
      row.bound = std::pow(row.a_pq, one_minus * max_pc / e.q()) * prod_f;
      break;
    case Theorem::T2:
      row.bound = std::pow(row.a_pq, one_minus * std::max(1.0, max_pc / e.q())) * prod_f;
      break;
    case Theorem::T3: {
      double mixed = std::pow(row.a_pq, 1.0 / e.q());
      const double mix_exp = 1.0 - e.alpha() * e.p_total() / n;
      for (int i = 0; i < m; ++i) mixed *= std::pow(row.a_infty[i], mix_exp / e.p(i));
      row.bound = mixed * prod_f;
      break;
    }
  }
  row.bound_ratio = row.lhs_norm / row.bound;
  return row;
}

}  // namespace detail

/// Target eps-exponents of the extremal quantities.
inline std::vector<SlopeCheck> slope_targets(const ExperimentConfig& cfg) {
  const auto& e = cfg.exponents;
  const int m = e.m();
  std::vector<SlopeCheck> out;
  for (int i = 0; i < m; ++i) {
    SlopeCheck s;
    s.quantity = "norm_f" + std::to_string(i + 1);
    s.target = -1.0 / e.p(i);
    out.push_back(s);
  }
  SlopeCheck apq;
  apq.quantity = "a_Pq";
  if (cfg.theorem == Theorem::T3) {
    apq.target = -e.q() * (m - 1.0 / e.p_total());
  } else {
    apq.target = -e.q() / e.p_conjugate(e.argmax_conjugate());
  }
  out.push_back(apq);
  for (int i = 0; i < m; ++i) {
    SlopeCheck s;
    s.quantity = "a_infty_" + std::to_string(i + 1);
    if (cfg.theorem == Theorem::T3) {
      s.target = -1.0;
      s.lower_bound = true;
    }
    out.push_back(s);
  }
  SlopeCheck lhs;
  lhs.quantity = "lhs_norm";
  lhs.target = cfg.theorem == Theorem::T3 ? -(m + 1.0 / e.q()) : -(1.0 + 1.0 / e.q());
  out.push_back(lhs);
  return out;
}

/// Sweeps eps for the configured theorem. Rows come in eps order; slopes
/// are fitted when the sweep has at least 5 points.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const int n = cfg.exponents.n();
  const auto sys = RootSystem::from_bounds(n, cfg.root_lo, cfg.root_hi, cfg.mesh_level);
  const CubeFamily F(sys, cfg.scan());
  ExperimentReport rep{cfg, std::vector<ExperimentRow>(cfg.eps.size()), {}, 1.0, true, std::nullopt, true};
  parallel_for(cfg.eps.size(), [&](std::size_t k) { rep.rows[k] = detail::run_row(cfg, sys, F, cfg.eps[k]); });
  double lo = rep.rows[0].bound_ratio, hi = lo;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.bound_ratio);
    hi = std::max(hi, r.bound_ratio);
  }
  rep.ratio_variation = hi / lo;
  rep.ratio_pass = rep.ratio_variation <= cfg.ratio_limit;
  if (cfg.theorem == Theorem::T2) {
    std::vector<double> cs;
    for (const auto& r : rep.rows) cs.push_back(*r.domination);
    auto sorted = cs;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    double spread = 0.0;
    for (double c : cs) spread = std::max(spread, std::abs(c / med - 1.0));
    rep.domination_spread = spread;
    rep.domination_pass = spread <= cfg.domination_tolerance;
  }
  if (cfg.eps.size() < 5) return rep;
  const int m = cfg.exponents.m();
  for (auto s : slope_targets(cfg)) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rep.rows) {
      double v = r.lhs_norm;
      if (s.quantity == "a_Pq") v = r.a_pq;
      for (int i = 0; i < m; ++i) {
        if (s.quantity == "norm_f" + std::to_string(i + 1)) v = r.norm_f[i];
        if (s.quantity == "a_infty_" + std::to_string(i + 1)) v = r.a_infty[i];
      }
      pts.emplace_back(r.eps, v);
    }
    const auto fit = fit_exponent(pts);
    s.exponent = 0.0 - fit.slope;
    s.stderr_slope = fit.stderr_slope;
    s.residuals = fit.residuals;
    if (s.target) {
      s.pass = s.lower_bound ? s.exponent >= *s.target - cfg.slope_tolerance
                             : std::abs(s.exponent - *s.target) <= cfg.slope_tolerance;
    }
    rep.slopes.push_back(std::move(s));
  }
  return rep;
}

inline ExperimentReport run_thm1(ExperimentConfig cfg) {
  cfg.theorem = Theorem::T1;
  return run_experiment(cfg);
}

inline ExperimentReport run_thm2(ExperimentConfig cfg) {
  cfg.theorem = Theorem::T2;
  return run_experiment(cfg);
}

inline ExperimentReport run_thm3(ExperimentConfig cfg) {
  cfg.theorem = Theorem::T3;
  return run_experiment(cfg);
}

/// CSV rows `eps,norm_f1..norm_fm,a_Pq,a_infty_1..m,lhs_norm` at 17
/// significant digits, then a summary block.
inline std::string to_csv(const ExperimentReport& rep) {
  const int m = rep.config.exponents.m();
  std::ostringstream os;
  os << "eps";
  for (int i = 1; i <= m; ++i) os << ",norm_f" << i;
  os << ",a_Pq";
  for (int i = 1; i <= m; ++i) os << ",a_infty_" << i;
  os << ",lhs_norm\n";
  for (const auto& r : rep.rows) {
    os << detail::num(r.eps);
    for (double x : r.norm_f) os << ',' << detail::num(x);
    os << ',' << detail::num(r.a_pq);
    for (double x : r.a_infty) os << ',' << detail::num(x);
    os << ',' << detail::num(r.lhs_norm) << '\n';
  }
  os << "\n# summary " << to_string(rep.config.theorem) << '\n';
  os << "quantity,fitted_exponent,stderr,target,kind,pass\n";
  for (const auto& s : rep.slopes) {
    os << s.quantity << ',' << detail::num(s.exponent) << ',' << detail::num(s.stderr_slope) << ','
       << (s.target ? detail::num(*s.target) : "") << ',' << (s.target ? (s.lower_bound ? "floor" : "equal") : "report")
       << ',' << (s.pass ? "PASS" : "FAIL") << '\n';
  }
  os << "bound_ratio_variation," << detail::num(rep.ratio_variation) << ",," << detail::num(rep.config.ratio_limit)
     << ",ceiling," << (rep.ratio_pass ? "PASS" : "FAIL") << '\n';
  if (rep.domination_spread) {
    os << "domination_spread," << detail::num(*rep.domination_spread) << ",,"
       << detail::num(rep.config.domination_tolerance) << ",ceiling," << (rep.domination_pass ? "PASS" : "FAIL")
       << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const ExperimentReport& rep) {
  using nlohmann::json;
  const auto& e = rep.config.exponents;
  json p = json::array();
  for (const auto& x : e.p_exact()) p.push_back(to_string(x));
  json out{{"theorem", to_string(rep.config.theorem)},
           {"n", e.n()},
           {"m", e.m()},
           {"alpha", to_string(e.alpha_exact())},
           {"p", p},
           {"q", to_string(e.q_exact())},
           {"mesh_level", rep.config.mesh_level},
           {"scan_level", rep.config.scan()}};
  if (rep.config.theorem == Theorem::T2) out["integral_level"] = rep.config.quadrature_level();
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json row{{"eps", r.eps},         {"norm_f", r.norm_f},   {"a_Pq", r.a_pq},
             {"a_infty", r.a_infty}, {"lhs_norm", r.lhs_norm}, {"bound", r.bound},
             {"bound_ratio", r.bound_ratio}};
    if (r.domination) row["domination"] = *r.domination;
    rows.push_back(row);
  }
  out["rows"] = rows;
  json slopes = json::array();
  for (const auto& s : rep.slopes) {
    json j{{"quantity", s.quantity}, {"exponent", s.exponent}, {"stderr", s.stderr_slope},
           {"residuals", s.residuals}, {"pass", s.pass}};
    j["target"] = s.target ? json(*s.target) : json(nullptr);
    j["kind"] = s.target ? (s.lower_bound ? "floor" : "equal") : "report";
    slopes.push_back(j);
  }
  out["slopes"] = slopes;
  out["bound_ratio_variation"] = rep.ratio_variation;
  out["bound_ratio_pass"] = rep.ratio_pass;
  if (rep.domination_spread) {
    out["domination_spread"] = *rep.domination_spread;
    out["domination_pass"] = rep.domination_pass;
  }
  out["pass"] = rep.pass();
  return out;
}

/// 2^{-a}, 2^{-a-1}, ..., 2^{-b}.
inline std::vector<double> dyadic_eps_range(int a, int b) {
  if (a > b) throw ConfigError("eps range exponents must satisfy a <= b");
  std::vector<double> out;
  for (int k = a; k <= b; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

}  // namespace dyadic

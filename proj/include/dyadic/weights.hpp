#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/cube_family.hpp"
#include "dyadic/errors.hpp"
#include "dyadic/exponents.hpp"
#include "dyadic/grid_function.hpp"
#include "dyadic/parallel.hpp"

namespace dyadic {

/// Averages of f over every cube of F, in F's enumeration order.
inline std::vector<double> family_averages(const GridFunction& f, const CubeFamily& F) {
  if (!(f.system() == F.system())) throw DomainError("grid function and cube family use different meshes");
  const CellIntegrator I(f);
  std::vector<double> out(F.size());
  parallel_for(F.size(), [&](std::size_t i) { out[i] = I.average(F.cube(i)); });
  return out;
}

/// Largest per-cube value and the cube attaining it (first on ties).
struct ScanResult {
  double value = 0.0;
  DyadicCube cube;
};

inline ScanResult scan_max(const CubeFamily& F, const std::vector<double>& per_cube) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < per_cube.size(); ++i) {
    if (per_cube[i] > per_cube[best] || (std::isnan(per_cube[best]) && !std::isnan(per_cube[i]))) best = i;
  }
  return {per_cube[best], F.cube(best)};
}

/// Weight vector with the derived weights materialized once:
/// sigma_i = w_i^{-p_i'} and u = (w_1 ... w_m)^q.
class WeightVector {
 public:
  /// sigma_i and u computed cellwise from w.
  WeightVector(ExponentData e, std::vector<GridFunction> w) : e_(std::move(e)), w_(std::move(w)) {
    check_slots();
    const auto& sys = w_[0].system();
    for (int i = 0; i < e_.m(); ++i) sigma_.push_back(w_[i].pow(-e_.p_conjugate(i)));
    std::vector<double> prod(sys.cell_count(), 1.0);
    for (const auto& wi : w_) {
      wi.require_same_mesh(w_[0]);
      for (std::size_t c = 0; c < prod.size(); ++c) prod[c] *= std::max(wi[c], kWeightFloor);
    }
    u_ = GridFunction(sys, std::move(prod)).pow(e_.q());
  }

  /// Power weights w_i = |x|^{a_i}. Each of w_i, sigma_i and u is the exact
  /// cell average of its own power, so cells at the origin stay faithful.
  static WeightVector power(ExponentData e, const RootSystem& sys, std::vector<double> degrees) {
    if (static_cast<int>(degrees.size()) != e.m()) throw ConfigError("one power degree per weight is required");
    std::vector<GridFunction> w, sigma;
    double total = 0.0;
    for (int i = 0; i < e.m(); ++i) {
      w.push_back(discretize_power(degrees[i], sys));
      sigma.push_back(discretize_power(-e.p_conjugate(i) * degrees[i], sys));
      total += degrees[i];
    }
    GridFunction u = discretize_power(e.q() * total, sys);
    WeightVector out(std::move(e), std::move(w), std::move(sigma), std::move(u));
    out.degrees_ = std::move(degrees);
    return out;
  }

  static WeightVector ones(ExponentData e, const RootSystem& sys) {
    std::vector<GridFunction> w(e.m(), GridFunction::constant(sys, 1.0));
    return WeightVector(std::move(e), std::move(w));
  }

  const ExponentData& exponents() const { return e_; }
  int m() const { return e_.m(); }
  const RootSystem& system() const { return w_[0].system(); }
  const GridFunction& w(int i) const { return w_[i]; }
  const GridFunction& sigma(int i) const { return sigma_[i]; }
  const GridFunction& u() const { return u_; }
  /// Degrees a_i when built by power(), else empty.
  const std::optional<std::vector<double>>& power_degrees() const { return degrees_; }

 private:
  WeightVector(ExponentData e, std::vector<GridFunction> w, std::vector<GridFunction> sigma, GridFunction u)
      : e_(std::move(e)), w_(std::move(w)), sigma_(std::move(sigma)), u_(std::move(u)) {
    check_slots();
  }

  void check_slots() const {
    if (static_cast<int>(w_.size()) != e_.m()) {
      throw ConfigError("expected " + std::to_string(e_.m()) + " weights, got " + std::to_string(w_.size()));
    }
  }

  ExponentData e_;
  std::vector<GridFunction> w_;
  std::vector<GridFunction> sigma_;
  GridFunction u_;
  std::optional<std::vector<double>> degrees_;
};

/// Per-cube multilinear Muckenhoupt quantity (avg u) prod (avg sigma_i)^{q/p_i'}.
inline std::vector<double> a_Pq_per_cube(const WeightVector& wv, const CubeFamily& F) {
  const auto& e = wv.exponents();
  auto out = family_averages(wv.u(), F);
  for (int i = 0; i < wv.m(); ++i) {
    const auto s = family_averages(wv.sigma(i), F);
    const double ex = e.q() / e.p_conjugate(i);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] *= std::pow(s[c], ex);
  }
  return out;
}

inline ScanResult a_Pq_constant(const WeightVector& wv, const CubeFamily& F) {
  if (wv.exponents().mode() != WeightMode::Homogeneous) {
    throw ConfigError("the A_{P,q} constant needs exponents in homogeneous mode");
  }
  return scan_max(F, a_Pq_per_cube(wv, F));
}

/// Linear A_{p,q} constant sup (avg w^q)(avg w^{-p'})^{q/p'}.
inline ScanResult linear_apq_constant(const GridFunction& w, double p, double q, const CubeFamily& F) {
  if (!(p > 1.0) || !(q > 0.0)) throw DomainError("linear A_{p,q} needs p > 1 and q > 0");
  const double pc = p / (p - 1.0);
  auto a = family_averages(w.pow(q), F);
  const auto b = family_averages(w.pow(-pc), F);
  for (std::size_t c = 0; c < a.size(); ++c) a[c] *= std::pow(b[c], q / pc);
  return scan_max(F, a);
}

/// Two-weight constant sup |Q|^{alpha/n + 1/q - 1/p} (avg u)^{1/q} prod (avg sigma_i)^{1/p_i'}.
inline ScanResult two_weight_constant(const GridFunction& u, const WeightVector& wv, const CubeFamily& F) {
  const auto& e = wv.exponents();
  const double power = e.alpha() / e.n() + 1.0 / e.q() - 1.0 / e.p_total();
  auto out = family_averages(u, F);
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = std::pow(F.cube(c).volume(), power) * std::pow(out[c], 1.0 / e.q());
  }
  for (int i = 0; i < wv.m(); ++i) {
    const auto s = family_averages(wv.sigma(i), F);
    const double ex = 1.0 / e.p_conjugate(i);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] *= std::pow(s[c], ex);
  }
  return scan_max(F, out);
}

/// sup (avg w)(avg w^{-1/(s-1)})^{s-1}.
inline ScanResult muckenhoupt_ap_constant(const GridFunction& w, double s, const CubeFamily& F) {
  if (!(s > 1.0)) throw DomainError("A_s constant needs s > 1");
  auto a = family_averages(w, F);
  const auto b = family_averages(w.pow(-1.0 / (s - 1.0)), F);
  for (std::size_t c = 0; c < a.size(); ++c) a[c] *= std::pow(b[c], s - 1.0);
  return scan_max(F, a);
}

/// Self-similar continuation of the maximal function below the scan level
/// for weights homogeneous of the given degree about the origin. Dilation
/// by 4 maps every grid to itself, so the finest cube R touching the origin
/// is the quarter of its grandparent 4R and the integral over R is the
/// geometric tail rho/(1-rho) times the integral over 4R \ R, with
/// rho = 4^{-(degree + n)}.
struct SelfSimilarTail {
  double degree = 0.0;
};

namespace detail {

inline bool origin_in_closure(const DyadicCube& q) {
  for (int d = 0; d < q.dim(); ++d) {
    if (Rational(0) < q.lower(d) || q.upper(d) < Rational(0)) return false;
  }
  return true;
}

class MaximalIntegral {
 public:
  MaximalIntegral(const CubeFamily& F, const std::vector<double>& avg, std::optional<SelfSimilarTail> tail)
      : F_(F), avg_(avg), tail_(tail), finest_(F.scan_level()) {
    if (tail_) {
      const double n = F.system().dim();
      if (!(tail_->degree + n > 0.0)) throw DomainError("self-similar tail needs degree > -n");
      rho_ = std::pow(4.0, -(tail_->degree + n));
    }
  }

  /// Integral over q of the maximal function of w chi_top restricted to
  /// same-grid cubes between q and the scan level, given the running
  /// maximum of averages over the cubes from top down to q's parent.
  double integral(const DyadicCube& q, double above) const {
    const double here = std::max(above, avg(q));
    if (q.level() == finest_) return q.volume() * here;
    if (tail_ && q.level() == finest_ - 2 && origin_in_closure(q)) {
      const DyadicCube inner(finest_, q.index(), q.shift());
      if (!q.contains(inner)) throw std::logic_error("quarter cube " + to_string(inner) + " escapes its grandparent");
      double annulus = 0.0;
      for (const auto& c : q.children()) {
        const double cm = std::max(here, avg(c));
        for (const auto& g : c.children()) {
          if (g == inner) continue;
          annulus += g.volume() * std::max(cm, avg(g));
        }
      }
      return annulus / (1.0 - rho_);
    }
    double sum = 0.0;
    for (const auto& c : q.children()) sum += integral(c, here);
    return sum;
  }

 private:
  double avg(const DyadicCube& q) const {
    const std::size_t i = F_.index_of(q);
    if (i == CubeFamily::npos) throw std::logic_error("cube " + to_string(q) + " missing from the scan family");
    return avg_[i];
  }

  const CubeFamily& F_;
  const std::vector<double>& avg_;
  std::optional<SelfSimilarTail> tail_;
  int finest_;
  double rho_ = 0.0;
};

}  // namespace detail

/// Fujii-Wilson constant sup_Q (1/w(Q)) int_Q M(w chi_Q), with M the
/// maximal function over the cubes of Q's own grid inside Q down to the
/// scan level.
inline ScanResult a_infty_constant(const GridFunction& w, const CubeFamily& F,
                                   std::optional<SelfSimilarTail> tail = std::nullopt) {
  const auto avg = family_averages(w, F);
  const detail::MaximalIntegral mi(F, avg, tail);
  std::vector<double> out(F.size());
  parallel_for(F.size(), [&](std::size_t i) {
    const DyadicCube q = F.cube(i);
    const double mass = avg[i] * q.volume();
    if (!(mass > 0.0)) throw DomainError("w(Q) = 0 on " + to_string(q));
    out[i] = mi.integral(q, 0.0) / mass;
  });
  return scan_max(F, out);
}

struct ReverseHolderResult {
  double r = 1.0;
  double a_infty = 1.0;
  double worst_ratio = 1.0;
  DyadicCube cube;
};

/// Sharp reverse Holder check with r = 1 + 1/(2^{11+n} [w]_{A_infty}):
/// worst ratio of (avg w^r)^{1/r} to avg w over F.
inline ReverseHolderResult reverse_holder_check(const GridFunction& w, const CubeFamily& F) {
  const auto ai = a_infty_constant(w, F);
  const double tau = std::ldexp(1.0, 11 + w.system().dim());
  const double r = 1.0 + 1.0 / (tau * ai.value);
  const auto a = family_averages(w, F);
  const auto b = family_averages(w.pow(r), F);
  std::vector<double> ratio(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) ratio[c] = std::pow(b[c], 1.0 / r) / a[c];
  const auto worst = scan_max(F, ratio);
  return {r, ai.value, worst.value, worst.cube};
}

/// Dual vector: slot i becomes (w_1 ... w_m)^{-1} with exponent q', and the
/// target exponent becomes p_i'.
inline WeightVector dual_vector(const WeightVector& wv, int i) {
  const auto& e = wv.exponents();
  if (e.mode() != WeightMode::Homogeneous) throw ConfigError("dual vector needs homogeneous exponents");
  if (!(e.q_exact() > Rational(1))) throw DomainError("dual vector needs q > 1 so that q' exists");
  if (i < 0 || i >= e.m()) throw DomainError("dual slot out of range");
  auto p = e.p_exact();
  p[i] = e.q_exact() / (e.q_exact() - Rational(1));
  ExponentData dual(e.n(), e.m(), e.alpha_exact(), p, e.p_conjugate_exact(i));
  if (const auto& deg = wv.power_degrees()) {
    auto d = *deg;
    double total = 0.0;
    for (double a : *deg) total += a;
    d[i] = -total;
    return WeightVector::power(std::move(dual), wv.system(), std::move(d));
  }
  std::vector<double> prod(wv.system().cell_count(), 1.0);
  for (int j = 0; j < e.m(); ++j) {
    for (std::size_t c = 0; c < prod.size(); ++c) prod[c] *= std::max(wv.w(j)[c], kWeightFloor);
  }
  std::vector<GridFunction> w;
  for (int j = 0; j < e.m(); ++j) w.push_back(wv.w(j));
  w[i] = GridFunction(wv.system(), std::move(prod)).pow(-1.0);
  return WeightVector(std::move(dual), std::move(w));
}

struct HolderReport {
  bool holds = true;
  double worst_ratio = 0.0;  // max over Q of |Q| / right-hand side
  DyadicCube cube;
  std::size_t checked = 0;
};

/// Per-cube check of
///   |Q| <= u(Q)^{1/((m - alpha/n) q)} prod sigma_i(Q)^{1/((m - alpha/n) p_i')},
/// whose exponents sum to one by homogeneity. `rel_tol` absorbs rounding.
inline HolderReport holder_identity_check(const WeightVector& wv, const CubeFamily& F, double rel_tol = 1e-12) {
  const auto& e = wv.exponents();
  const double s = e.m() - e.alpha() / e.n();
  const auto u = family_averages(wv.u(), F);
  std::vector<double> log_rhs(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) log_rhs[c] = std::log(u[c]) / (s * e.q());
  for (int i = 0; i < wv.m(); ++i) {
    const auto sg = family_averages(wv.sigma(i), F);
    for (std::size_t c = 0; c < u.size(); ++c) log_rhs[c] += std::log(sg[c]) / (s * e.p_conjugate(i));
  }
  // The exponents sum to one, so the volume factors cancel and |Q| / rhs is
  // one over the product of averages raised to the same exponents.
  std::vector<double> ratio(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) ratio[c] = std::exp(-log_rhs[c]);
  const auto worst = scan_max(F, ratio);
  return {worst.value <= 1.0 + rel_tol, worst.value, worst.cube, F.size()};
}

}  // namespace dyadic

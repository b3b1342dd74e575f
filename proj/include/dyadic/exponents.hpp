#pragma once

#include <string>
#include <vector>

#include "dyadic/errors.hpp"
#include "dyadic/rational.hpp"

namespace dyadic {

enum class WeightMode { Homogeneous, TwoWeight };

/// Exponent data of a multilinear fractional problem, kept as exact
/// rationals. Homogeneous mode enforces 1/p_1 + ... + 1/p_m = 1/q + alpha/n;
/// two-weight mode only asks p <= q.
class ExponentData {
 public:
  /// Every problem with the inputs, empty when they are consistent.
  static std::vector<std::string> problems(int n, int m, const Rational& alpha, const std::vector<Rational>& p,
                                           const Rational& q, WeightMode mode) {
    std::vector<std::string> out;
    if (n < 1) out.push_back("n must be >= 1");
    if (m < 1) out.push_back("m must be >= 1");
    if (static_cast<int>(p.size()) != m) {
      out.push_back("expected " + std::to_string(m) + " exponents p_i, got " + std::to_string(p.size()));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] > 1)) out.push_back("p_" + std::to_string(i + 1) + " = " + to_string(p[i]) + " must exceed 1");
    }
    if (alpha < 0 || !(alpha < Rational(m * n))) out.push_back("alpha must lie in [0, mn)");
    if (!(q > 0)) out.push_back("q must be positive");
    if (!out.empty()) return out;
    Rational inv_p(0);
    for (const auto& pi : p) inv_p += Rational(1) / pi;
    if (mode == WeightMode::Homogeneous) {
      if (inv_p != Rational(1) / q + alpha / Rational(n)) {
        out.push_back("homogeneity 1/p_1 + ... + 1/p_m = 1/q + alpha/n fails: " + to_string(inv_p) +
                      " != " + to_string(Rational(1) / q + alpha / Rational(n)));
      }
    } else if (Rational(1) / inv_p > q) {
      out.push_back("two-weight mode requires p <= q (p = " + to_string(Rational(1) / inv_p) + ")");
    }
    return out;
  }

  ExponentData(int n, int m, Rational alpha, std::vector<Rational> p, Rational q,
               WeightMode mode = WeightMode::Homogeneous)
      : n_(n), m_(m), alpha_(alpha), p_(std::move(p)), q_(q), mode_(mode) {
    const auto errs = problems(n_, m_, alpha_, p_, q_, mode_);
    if (!errs.empty()) {
      std::string msg = "invalid exponents:";
      for (const auto& e : errs) msg += "\n  - " + e;
      throw ConfigError(msg);
    }
  }

  /// q derived from homogeneity.
  static ExponentData homogeneous(int n, int m, Rational alpha, std::vector<Rational> p) {
    Rational inv_q = -alpha / Rational(n);
    for (const auto& pi : p) {
      if (pi == Rational(0)) throw ConfigError("p_i must be nonzero");
      inv_q += Rational(1) / pi;
    }
    if (!(inv_q > 0)) throw ConfigError("homogeneity gives 1/q = " + to_string(inv_q) + " <= 0");
    return ExponentData(n, m, alpha, std::move(p), Rational(1) / inv_q, WeightMode::Homogeneous);
  }

  int n() const { return n_; }
  int m() const { return m_; }
  WeightMode mode() const { return mode_; }
  const Rational& alpha_exact() const { return alpha_; }
  const std::vector<Rational>& p_exact() const { return p_; }
  const Rational& q_exact() const { return q_; }

  Rational p_total_exact() const {
    Rational s(0);
    for (const auto& pi : p_) s += Rational(1) / pi;
    return Rational(1) / s;
  }
  Rational p_conjugate_exact(int i) const { return p_[i] / (p_[i] - 1); }

  double alpha() const { return to_double(alpha_); }
  double q() const { return to_double(q_); }
  double p(int i) const { return to_double(p_[i]); }
  double p_total() const { return to_double(p_total_exact()); }
  double p_conjugate(int i) const { return to_double(p_conjugate_exact(i)); }

  /// Index of the largest conjugate exponent (first on ties).
  int argmax_conjugate() const {
    int best = 0;
    for (int i = 1; i < m_; ++i) {
      if (p_conjugate_exact(i) > p_conjugate_exact(best)) best = i;
    }
    return best;
  }

 private:
  int n_;
  int m_;
  Rational alpha_;
  std::vector<Rational> p_;
  Rational q_;
  WeightMode mode_;
};

}  // namespace dyadic

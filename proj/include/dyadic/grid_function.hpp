#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/cube.hpp"
#include "dyadic/errors.hpp"

namespace dyadic {

/// Positive floor applied whenever a weight is inverted.
inline constexpr double kWeightFloor = 1e-300;

/// Nonnegative cell-constant function on the mesh of a RootSystem. Used for
/// data, weights, and densities alike.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(RootSystem system, std::vector<double> values)
      : system_(std::move(system)), values_(std::move(values)) {
    if (values_.size() != system_.cell_count()) {
      throw DomainError("grid function has " + std::to_string(values_.size()) + " values for " +
                        std::to_string(system_.cell_count()) + " cells");
    }
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("grid function values must be finite and >= 0");
    }
  }

  static GridFunction constant(const RootSystem& sys, double c) {
    return GridFunction(sys, std::vector<double>(sys.cell_count(), c));
  }

  /// Samples fn at every cell center.
  static GridFunction from_centers(const RootSystem& sys, const std::function<double(std::span<const double>)>& fn) {
    std::vector<double> v(sys.cell_count());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto x = sys.cell_center(i);
      v[i] = fn(x);
    }
    return GridFunction(sys, std::move(v));
  }

  const RootSystem& system() const { return system_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Cellwise power with the weight floor applied first.
  GridFunction pow(double e) const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(std::max(values_[i], kWeightFloor), e);
    return GridFunction(system_, std::move(v));
  }

  GridFunction scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return GridFunction(system_, std::move(v));
  }

  GridFunction times(const GridFunction& other) const {
    require_same_mesh(other);
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] * other.values_[i];
    return GridFunction(system_, std::move(v));
  }

  /// Zero outside the cells whose centers satisfy keep.
  GridFunction restricted(const std::function<bool(std::span<const double>)>& keep) const {
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!keep(system_.cell_center(i))) v[i] = 0.0;
    }
    return GridFunction(system_, std::move(v));
  }

  void require_same_mesh(const GridFunction& other) const {
    if (!(system_ == other.system_)) throw DomainError("grid functions live on different meshes");
  }

 private:
  RootSystem system_;
  std::vector<double> values_;
};

/// Exact integrals of a cell-constant function over dyadic cubes, including
/// cubes of the shifted grids that cut mesh cells. Covered cells are summed
/// directly with their exact coverage fractions; all terms are nonnegative
/// so the sum keeps full relative precision even for tiny cubes.
class CellIntegrator {
 public:
  explicit CellIntegrator(const GridFunction& f) : sys_(f.system()), values_(f.values().begin(), f.values().end()) {
    for (int d = 0; d < sys_.dim(); ++d) root_lo_.push_back(sys_.lower(d));
  }

  const RootSystem& system() const { return sys_; }

  /// Integral over q; q must lie in the root.
  double integral(const DyadicCube& q) const {
    if (!sys_.contains(q)) throw OutOfSystemError("cube " + to_string(q) + " is outside the root system");
    const int n = sys_.dim();
    const Rational scale = pow2(sys_.max_level());
    std::vector<std::int64_t> first(n), last(n);
    std::vector<std::vector<long double>> cover(n);
    for (int d = 0; d < n; ++d) {
      const Rational lo = (q.lower(d) - root_lo_[d]) * scale;
      const Rational hi = (q.upper(d) - root_lo_[d]) * scale;
      first[d] = floor_int(lo);
      last[d] = ceil_int(hi);
      for (std::int64_t c = first[d]; c < last[d]; ++c) {
        const Rational a = std::max(lo, Rational(c));
        const Rational b = std::min(hi, Rational(c + 1));
        cover[d].push_back(to_long_double(b - a));
      }
    }
    const auto per = static_cast<std::size_t>(sys_.cells_per_dim());
    long double sum = 0.0L;
    std::vector<std::int64_t> c(first);
    while (true) {
      long double w = 1.0L;
      std::size_t flat = 0;
      for (int d = n - 1; d >= 0; --d) {
        w *= cover[d][static_cast<std::size_t>(c[d] - first[d])];
        flat = flat * per + static_cast<std::size_t>(c[d]);
      }
      sum += w * values_[flat];
      int d = 0;
      while (d < n && ++c[d] == last[d]) {
        c[d] = first[d];
        ++d;
      }
      if (d == n) break;
    }
    return static_cast<double>(sum * static_cast<long double>(sys_.cell_volume()));
  }

  double average(const DyadicCube& q) const { return integral(q) / q.volume(); }

 private:
  RootSystem sys_;
  std::vector<double> values_;
  std::vector<Rational> root_lo_;
};

/// Integral of f over a cube inside the root.
inline double integrate(const GridFunction& f, const DyadicCube& q) { return CellIntegrator(f).integral(q); }

/// (int |f|^q dmu)^{1/q} with mu a density on the same mesh; q may be +inf
/// (essential sup over cells of positive mu-mass).
inline double lq_norm(const GridFunction& f, const GridFunction& mu, double q) {
  f.require_same_mesh(mu);
  if (!(q > 0.0)) throw DomainError("lq_norm needs q > 0");
  if (std::isinf(q)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (mu[i] > 0.0) m = std::max(m, f[i]);
    }
    return m;
  }
  long double s = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 0.0 && mu[i] > 0.0) s += std::pow(static_cast<long double>(f[i]), static_cast<long double>(q)) * mu[i];
  }
  s *= f.system().cell_volume();
  return static_cast<double>(std::pow(s, 1.0L / static_cast<long double>(q)));
}

/// Surface measure of the unit sphere in R^n (2 when n = 1).
inline double sphere_measure(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// int_{B(0,R)} |x|^a dx = omega_{n-1} R^{n+a} / (n+a).
inline double power_ball_integral(double a, double radius, int n) {
  if (!(a > -n)) throw DomainError("int_B |x|^a diverges for a <= -n");
  return sphere_measure(n) * std::pow(radius, n + a) / (n + a);
}

namespace detail {

/// int_{lo}^{hi} x^a dx for 0 <= lo < hi and a > -1, stable for a near -1.
inline double power_segment(double lo, double hi, double a) {
  const double s = a + 1.0;
  if (lo == 0.0) return std::pow(hi, s) / s;
  return std::pow(lo, s) * std::expm1(s * std::log(hi / lo)) / s;
}

/// Average of |x|^a over the interval [lo, hi).
inline double power_interval_average(double lo, double hi, double a) {
  if (a == 0.0) return 1.0;
  double total = 0.0;
  if (hi <= 0.0) {
    total = power_segment(-hi, -lo, a);
  } else if (lo >= 0.0) {
    total = power_segment(lo, hi, a);
  } else {
    total = power_segment(0.0, -lo, a) + power_segment(0.0, hi, a);
  }
  return total / (hi - lo);
}

/// Gauss-Legendre nodes/weights on [0,1], fixed 16 points.
inline const std::vector<std::pair<double, double>>& gauss16() {
  static const std::vector<std::pair<double, double>> rule = [] {
    constexpr int kN = 16;
    std::vector<std::pair<double, double>> r;
    for (int i = 1; i <= kN; ++i) {
      double x = std::cos(std::numbers::pi * (i - 0.25) / (kN + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= kN; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kN * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.emplace_back(0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp));
    }
    return r;
  }();
  return rule;
}

/// Average of |x|^a over the square [0,h)^2 in polar coordinates; the radial
/// integral is closed form and the angular one is smooth.
inline double power_corner_square_average(double h, double a) {
  // int_0^{pi/4} int_0^{h / cos th} r^{a+1} dr dth, doubled by symmetry.
  const double s = a + 2.0;
  double ang = 0.0;
  for (auto [u, w] : gauss16()) {
    const double th = u * std::numbers::pi / 4.0;
    ang += w * std::pow(std::cos(th), -s);
  }
  ang *= std::numbers::pi / 4.0;
  return 2.0 * std::pow(h, s) / s * ang / (h * h);
}

}  // namespace detail

/// Cell averages of |x|^a. Exact in n = 1; in n = 2 cells with a corner at
/// the origin use a polar evaluation; other cells use the midpoint value.
inline GridFunction discretize_power(double a, const RootSystem& sys) {
  const int n = sys.dim();
  if (!(a > -n)) throw DomainError("|x|^a is not locally integrable for a <= -n");
  const double h = sys.cell_side();
  std::vector<double> v(sys.cell_count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto c = sys.cell_center(i);
    if (n == 1) {
      v[i] = detail::power_interval_average(c[0] - 0.5 * h, c[0] + 0.5 * h, a);
      continue;
    }
    bool touches_origin = true;
    for (double x : c) touches_origin = touches_origin && std::abs(std::abs(x) - 0.5 * h) < 1e-3 * h;
    if (a == 0.0) {
      v[i] = 1.0;
    } else if (touches_origin && n == 2) {
      v[i] = detail::power_corner_square_average(h, a);
    } else {
      double r2 = 0.0;
      for (double x : c) r2 += x * x;
      v[i] = std::pow(r2, 0.5 * a);
    }
  }
  return GridFunction(sys, std::move(v));
}

/// Indicator of the open unit ball, decided at cell centers.
inline bool in_unit_ball(std::span<const double> x) {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  return r2 < 1.0;
}

}  // namespace dyadic

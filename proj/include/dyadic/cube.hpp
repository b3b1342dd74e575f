#pragma once

// Exact dyadic cubes for the standard grid and its 2^n one-third shifts.
//
// A cube of the grid with shift t at level k is
//     2^{-k} ([0,1)^n + j + (-1)^k t),   t in {0, 1/3}^n,
// half-open in every coordinate. Endpoints are rationals with denominator
// dividing 3 * 2^k, so every membership test below is exact.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/errors.hpp"
#include "dyadic/rational.hpp"

namespace dyadic {

/// Per-coordinate shift selection: bit d set means t_d = 1/3, else t_d = 0.
struct Shift {
  unsigned bits = 0;

  bool shifted(int d) const { return ((bits >> d) & 1u) != 0; }
  auto operator<=>(const Shift&) const = default;

  /// All 2^n shifts of dimension n, standard grid first.
  static std::vector<Shift> all(int n) {
    std::vector<Shift> out;
    for (unsigned b = 0; b < (1u << n); ++b) out.push_back(Shift{b});
    return out;
  }
};

inline std::string to_string(Shift t, int n) {
  std::string s;
  for (int d = 0; d < n; ++d) {
    if (d > 0) s += ',';
    s += t.shifted(d) ? "1/3" : "0";
  }
  return s;
}

using Point = std::vector<Rational>;

class DyadicCube {
 public:
  DyadicCube() = default;
  DyadicCube(int level, std::vector<std::int64_t> index, Shift shift)
      : level_(level), index_(std::move(index)), shift_(shift) {}

  int dim() const { return static_cast<int>(index_.size()); }
  int level() const { return level_; }
  const std::vector<std::int64_t>& index() const { return index_; }
  Shift shift() const { return shift_; }

  Rational side() const { return pow2(-level_); }
  double side_length() const { return std::ldexp(1.0, -level_); }
  double volume() const { return std::ldexp(1.0, -level_ * dim()); }

  /// Signed shift numerator along d in units of 1/3: (-1)^k * 3 t_d.
  int signed_shift(int d) const {
    if (!shift_.shifted(d)) return 0;
    return (level_ % 2 == 0) ? 1 : -1;
  }

  Rational lower(int d) const {
    return pow2(-level_) * Rational(3 * index_[d] + signed_shift(d), 3);
  }
  Rational upper(int d) const { return lower(d) + side(); }

  bool contains(const Point& x) const {
    for (int d = 0; d < dim(); ++d) {
      if (x[d] < lower(d) || !(x[d] < upper(d))) return false;
    }
    return true;
  }

  /// Inclusion for cubes of the same grid, decided on integer indices.
  bool contains(const DyadicCube& other) const {
    if (other.shift_ != shift_ || other.level_ < level_) return false;
    DyadicCube a = other;
    while (a.level_ > level_) a = a.parent();
    return a.index_ == index_;
  }

  /// Geometric inclusion for cubes of possibly different grids.
  bool contains_box(const DyadicCube& other) const {
    for (int d = 0; d < dim(); ++d) {
      if (other.lower(d) < lower(d) || upper(d) < other.upper(d)) return false;
    }
    return true;
  }

  bool intersects(const DyadicCube& other) const {
    for (int d = 0; d < dim(); ++d) {
      if (!(other.lower(d) < upper(d)) || !(lower(d) < other.upper(d))) return false;
    }
    return true;
  }

  /// Parent in the same grid. Shifted grids nest because the sign of the
  /// shift alternates with the level.
  DyadicCube parent() const {
    std::vector<std::int64_t> j(index_.size());
    for (int d = 0; d < dim(); ++d) {
      const int s = shift_.shifted(d) ? ((level_ - 1) % 2 == 0 ? 1 : -1) : 0;
      const std::int64_t num = index_[d] - s;
      j[d] = (num >= 0) ? num / 2 : -((-num + 1) / 2);
    }
    return DyadicCube(level_ - 1, std::move(j), shift_);
  }

  /// Child selected by corner bits (bit d set: upper half along d).
  DyadicCube child(unsigned corner) const {
    std::vector<std::int64_t> j(index_.size());
    for (int d = 0; d < dim(); ++d) {
      j[d] = 2 * index_[d] + ((corner >> d) & 1u) + signed_shift(d);
    }
    return DyadicCube(level_ + 1, std::move(j), shift_);
  }

  std::vector<DyadicCube> children() const {
    std::vector<DyadicCube> out;
    out.reserve(std::size_t{1} << dim());
    for (unsigned c = 0; c < (1u << dim()); ++c) out.push_back(child(c));
    return out;
  }

  auto operator<=>(const DyadicCube&) const = default;
  bool operator==(const DyadicCube&) const = default;

 private:
  int level_ = 0;
  std::vector<std::int64_t> index_;
  Shift shift_{};
};

inline std::string to_string(const DyadicCube& q) {
  std::string s;
  for (int d = 0; d < q.dim(); ++d) {
    if (d > 0) s += " x ";
    s += "[" + to_string(q.lower(d)) + "," + to_string(q.upper(d)) + ")";
  }
  return s + " (level " + std::to_string(q.level()) + ", t=" + to_string(q.shift(), q.dim()) + ")";
}

/// The unique cube of grid t at level k that contains x.
inline DyadicCube cube_at(const Point& x, int level, Shift t) {
  std::vector<std::int64_t> j(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    const int s = t.shifted(static_cast<int>(d)) ? (level % 2 == 0 ? 1 : -1) : 0;
    j[d] = floor_int(x[d] * pow2(level) - Rational(s, 3));
  }
  return DyadicCube(level, std::move(j), t);
}

/// Finite truncation of the dyadic system: a box of `extent` standard cubes
/// per coordinate at `root_level`, meshed by standard cubes at `max_level`.
class RootSystem {
 public:
  RootSystem() = default;
  RootSystem(int n, int root_level, std::vector<std::int64_t> lower_index, std::int64_t extent, int max_level)
      : n_(n), root_level_(root_level), lower_index_(std::move(lower_index)), extent_(extent), max_level_(max_level) {
    if (n_ < 1) throw ConfigError("dimension must be positive");
    if (static_cast<int>(lower_index_.size()) != n_) throw ConfigError("root index has wrong dimension");
    if (extent_ < 1) throw ConfigError("root extent must be positive");
    if (max_level_ < root_level_) throw ConfigError("max_level must be >= level of the root");
    const std::int64_t per_dim = extent_ << (max_level_ - root_level_);
    double total = 1.0;
    for (int d = 0; d < n_; ++d) total *= static_cast<double>(per_dim);
    if (total > 1e8) throw ConfigError("mesh too large: " + std::to_string(total) + " cells");
  }

  /// [0,1)^n meshed at max_level.
  static RootSystem unit(int n, int max_level) {
    return RootSystem(n, 0, std::vector<std::int64_t>(n, 0), 1, max_level);
  }

  /// [lo,hi)^n; the bounds must be multiples of a common power of two.
  static RootSystem from_bounds(int n, Rational lo, Rational hi, int max_level) {
    if (!(lo < hi)) throw ConfigError("root bounds must satisfy lo < hi");
    for (int k = -40; k <= max_level; ++k) {
      const Rational a = lo * pow2(k);
      const Rational b = hi * pow2(k);
      if (a.denominator() == 1 && b.denominator() == 1) {
        return RootSystem(n, k, std::vector<std::int64_t>(n, a.numerator()), b.numerator() - a.numerator(),
                          max_level);
      }
    }
    throw ConfigError("root bounds [" + to_string(lo) + "," + to_string(hi) +
                      ") are not aligned with the mesh level");
  }

  int dim() const { return n_; }
  int root_level() const { return root_level_; }
  int max_level() const { return max_level_; }
  std::int64_t extent() const { return extent_; }
  const std::vector<std::int64_t>& lower_index() const { return lower_index_; }

  Rational lower(int d) const { return pow2(-root_level_) * Rational(lower_index_[d]); }
  Rational upper(int d) const { return pow2(-root_level_) * Rational(lower_index_[d] + extent_); }

  std::int64_t cells_per_dim() const { return extent_ << (max_level_ - root_level_); }
  std::size_t cell_count() const {
    std::size_t c = 1;
    for (int d = 0; d < n_; ++d) c *= static_cast<std::size_t>(cells_per_dim());
    return c;
  }
  double cell_side() const { return std::ldexp(1.0, -max_level_); }
  double cell_volume() const { return std::ldexp(1.0, -max_level_ * n_); }

  /// Coarsest level at which a cube can fit in the root.
  int coarsest_level() const {
    int k = root_level_;
    std::int64_t e = extent_;
    while (e >= 2) {
      e /= 2;
      --k;
    }
    return k;
  }

  bool contains(const DyadicCube& q) const {
    if (q.dim() != n_) return false;
    for (int d = 0; d < n_; ++d) {
      if (q.lower(d) < lower(d) || upper(d) < q.upper(d)) return false;
    }
    return true;
  }

  /// Multi-index of a flat cell index; coordinate 0 varies fastest.
  std::vector<std::int64_t> cell_coords(std::size_t flat) const {
    std::vector<std::int64_t> c(n_);
    const auto per = static_cast<std::size_t>(cells_per_dim());
    for (int d = 0; d < n_; ++d) {
      c[d] = static_cast<std::int64_t>(flat % per);
      flat /= per;
    }
    return c;
  }

  std::size_t flat_index(std::span<const std::int64_t> c) const {
    std::size_t flat = 0;
    const auto per = static_cast<std::size_t>(cells_per_dim());
    for (int d = n_ - 1; d >= 0; --d) flat = flat * per + static_cast<std::size_t>(c[d]);
    return flat;
  }

  /// Cell center in floating point.
  std::vector<double> cell_center(std::size_t flat) const {
    const auto c = cell_coords(flat);
    std::vector<double> x(n_);
    for (int d = 0; d < n_; ++d) x[d] = to_double(lower(d)) + (static_cast<double>(c[d]) + 0.5) * cell_side();
    return x;
  }

  /// The mesh cell (standard cube at max_level) with the given flat index.
  DyadicCube cell_cube(std::size_t flat) const {
    auto c = cell_coords(flat);
    const std::int64_t scale = std::int64_t{1} << (max_level_ - root_level_);
    for (int d = 0; d < n_; ++d) c[d] += lower_index_[d] * scale;
    return DyadicCube(max_level_, std::move(c), Shift{});
  }

  /// Half-open range [first, last) of cell indices along d whose centers lie in q.
  std::pair<std::int64_t, std::int64_t> center_range(const DyadicCube& q, int d) const {
    const Rational scale = pow2(max_level_);
    const Rational a = (q.lower(d) - lower(d)) * scale - Rational(1, 2);
    const Rational b = (q.upper(d) - lower(d)) * scale - Rational(1, 2);
    const std::int64_t per = cells_per_dim();
    return {std::clamp<std::int64_t>(ceil_int(a), 0, per), std::clamp<std::int64_t>(ceil_int(b), 0, per)};
  }

  /// Flat indices of every cell whose center lies in q.
  std::vector<std::size_t> cells_in(const DyadicCube& q) const {
    std::vector<std::pair<std::int64_t, std::int64_t>> r(n_);
    for (int d = 0; d < n_; ++d) {
      r[d] = center_range(q, d);
      if (r[d].first >= r[d].second) return {};
    }
    std::vector<std::size_t> out;
    std::vector<std::int64_t> c(n_);
    for (int d = 0; d < n_; ++d) c[d] = r[d].first;
    while (true) {
      out.push_back(flat_index(c));
      int d = 0;
      while (d < n_ && ++c[d] == r[d].second) {
        c[d] = r[d].first;
        ++d;
      }
      if (d == n_) break;
    }
    return out;
  }

  bool operator==(const RootSystem&) const = default;

 private:
  int n_ = 1;
  int root_level_ = 0;
  std::vector<std::int64_t> lower_index_{0};
  std::int64_t extent_ = 1;
  int max_level_ = 0;
};

/// Parent of q, refusing to leave the root system.
inline DyadicCube checked_parent(const RootSystem& sys, const DyadicCube& q) {
  DyadicCube p = q.parent();
  if (!sys.contains(p)) throw OutOfSystemError("parent of " + to_string(q) + " leaves the root system");
  return p;
}

/// Axis-parallel half-open cube [lower, lower + side)^n with rational data.
struct GeneralCube {
  Point lower;
  Rational side;
};

struct Covering {
  Shift shift;
  DyadicCube cube;
};

/// A cube of one of the 2^n shifted grids containing q with side at most
/// 6 * side(q). A cube that is itself dyadic in some grid covers itself;
/// otherwise every level with 3 l(q) <= 2^{-k} <= 6 l(q) is tried, finest
/// first, shifts in increasing order.
inline Covering covering_cube(const GeneralCube& q) {
  if (!(q.side > 0)) throw DomainError("covering_cube needs a positive side length");
  const int n = static_cast<int>(q.lower.size());
  const auto fits = [&](const DyadicCube& c) {
    for (int d = 0; d < n; ++d) {
      if (q.lower[d] < c.lower(d) || c.upper(d) < q.lower[d] + q.side) return false;
    }
    return true;
  };
  // Self-cover when q is itself a grid cube.
  const Rational inv = Rational(1) / q.side;
  if (inv.denominator() == 1 || q.side.denominator() == 1) {
    int k = 0;
    Rational s(1);
    while (s > q.side) {
      s /= 2;
      ++k;
    }
    while (s < q.side) {
      s *= 2;
      --k;
    }
    if (s == q.side) {
      for (Shift t : Shift::all(n)) {
        DyadicCube c = cube_at(q.lower, k, t);
        bool same = true;
        for (int d = 0; d < n; ++d) same = same && c.lower(d) == q.lower[d];
        if (same) return {t, c};
      }
    }
  }
  // Finest level with side >= 3 l(q).
  int k = 0;
  Rational s(1);
  const Rational need = 3 * q.side;
  while (s < need) {
    s *= 2;
    --k;
  }
  while (s / 2 >= need) {
    s /= 2;
    ++k;
  }
  for (; s <= 6 * q.side; s *= 2, --k) {
    for (Shift t : Shift::all(n)) {
      DyadicCube c = cube_at(q.lower, k, t);
      if (fits(c)) return {t, c};
    }
  }
  throw std::logic_error("covering_cube: no shifted dyadic cube covers the input; the one-third covering is broken");
}

}  // namespace dyadic

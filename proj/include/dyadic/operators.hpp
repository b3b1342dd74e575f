#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyadic/cube_family.hpp"
#include "dyadic/errors.hpp"
#include "dyadic/exponents.hpp"
#include "dyadic/grid_function.hpp"
#include "dyadic/parallel.hpp"

namespace dyadic {

/// Operator values, one per mesh cell, evaluated at cell centers.
using OperatorOutput = GridFunction;

namespace detail {

inline void require_inputs(std::span<const GridFunction> f, const ExponentData& e) {
  if (static_cast<int>(f.size()) != e.m()) {
    throw ConfigError("expected " + std::to_string(e.m()) + " functions, got " + std::to_string(f.size()));
  }
  for (const auto& fi : f) {
    fi.require_same_mesh(f[0]);
    if (fi.system().dim() != e.n()) throw ConfigError("function dimension differs from n");
  }
}

}  // namespace detail

/// Fractional product Q -> |Q|^{alpha/n - m} prod_i int_Q f_i for every cube of F.
inline std::vector<double> fractional_cube_values(std::span<const GridFunction> f, double alpha,
                                                  const CubeFamily& F) {
  const int n = F.system().dim();
  const int m = static_cast<int>(f.size());
  std::vector<CellIntegrator> I;
  for (const auto& fi : f) I.emplace_back(fi);
  std::vector<double> v(F.size());
  parallel_for(F.size(), [&](std::size_t c) {
    const DyadicCube q = F.cube(c);
    double prod = 1.0;
    for (const auto& in : I) {
      prod *= in.integral(q);
      if (prod == 0.0) break;
    }
    v[c] = prod == 0.0 ? 0.0 : std::pow(q.volume(), alpha / n - m) * prod;
  });
  return v;
}

/// Cellwise maximum of per-cube values over the cubes containing each cell center.
inline OperatorOutput sup_over_cubes(const CubeFamily& F, const std::vector<double>& v) {
  const auto& sys = F.system();
  std::vector<double> out(sys.cell_count(), 0.0);
  for (std::size_t c = 0; c < F.size(); ++c) {
    if (v[c] <= 0.0) continue;
    for (std::size_t cell : sys.cells_in(F.cube(c))) out[cell] = std::max(out[cell], v[c]);
  }
  return OperatorOutput(sys, std::move(out));
}

/// Multilinear fractional maximal function over the cubes of the selected
/// grids (default all 2^n) that fit in the root, down to the mesh level.
inline OperatorOutput multilinear_maximal(std::span<const GridFunction> f, const ExponentData& e,
                                          std::optional<std::vector<Shift>> grids = std::nullopt) {
  detail::require_inputs(f, e);
  const auto& sys = f[0].system();
  const CubeFamily F = grids ? CubeFamily(sys, sys.max_level(), *grids) : CubeFamily(sys, sys.max_level());
  return sup_over_cubes(F, fractional_cube_values(f, e.alpha(), F));
}

namespace detail {

/// Offset-indexed quadrature weights for the multilinear fractional kernel on
/// a uniform mesh. Entry o = (o_1, ..., o_m), each o_i in [-(N-1), N-1]^n,
/// approximates the kernel integral over the cell tuple displaced by o from
/// the output cell.
class KernelTable {
 public:
  KernelTable(int n, int m, std::int64_t N, double h, double alpha, int depth)
      : dims_(n * m), N_(N), span_(2 * N - 1) {
    double total = 1.0;
    for (int i = 0; i < dims_; ++i) total *= static_cast<double>(span_);
    if (total > static_cast<double>(std::size_t{1} << 26)) {
      throw DomainError("fractional integral quadrature table too large (" + std::to_string(total) + " entries)");
    }
    w_.assign(static_cast<std::size_t>(total), 0.0);
    const double power = alpha - n * m;
    const double threshold = (m + 1) * h;
    const int sub = 1 << depth;
    const double cell_mass = std::pow(h, n * m);
    std::vector<std::int64_t> o(dims_);
    for (std::size_t idx = 0; idx < w_.size(); ++idx) {
      decode(idx, o);
      const std::size_t mirror = encode_negated(o);
      if (mirror < idx) {
        w_[idx] = w_[mirror];
        continue;
      }
      const double dmid = denominator(n, m, o, h, nullptr, 0);
      if (dmid >= threshold) {
        w_[idx] = cell_mass * std::pow(dmid, power);
        continue;
      }
      // Midpoints of 2^depth sub-cells per coordinate in every slot.
      const double sub_mass = cell_mass * std::pow(1.0 / sub, n * m);
      std::vector<int> k(dims_, 0);
      long double acc = 0.0L;
      while (true) {
        acc += std::pow(denominator(n, m, o, h, k.data(), sub), power);
        int d = 0;
        while (d < dims_ && ++k[d] == sub) {
          k[d] = 0;
          ++d;
        }
        if (d == dims_) break;
      }
      w_[idx] = static_cast<double>(acc) * sub_mass;
    }
  }

  double at(std::size_t idx) const { return w_[idx]; }
  std::size_t size() const { return w_.size(); }
  std::int64_t span() const { return span_; }

  void decode(std::size_t idx, std::vector<std::int64_t>& o) const {
    for (int d = 0; d < dims_; ++d) {
      o[d] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(span_)) - (N_ - 1);
      idx /= static_cast<std::size_t>(span_);
    }
  }

  std::size_t encode_negated(const std::vector<std::int64_t>& o) const {
    std::size_t idx = 0;
    for (int d = dims_ - 1; d >= 0; --d) idx = idx * static_cast<std::size_t>(span_) + static_cast<std::size_t>(-o[d] + N_ - 1);
    return idx;
  }

 private:
  // sum_i |x - y_i| with x the output cell center and y_i the point of
  // cell o_i at sub-cell k (or the midpoint when k is null).
  static double denominator(int n, int m, const std::vector<std::int64_t>& o, double h, const int* k, int sub) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      double r2 = 0.0;
      for (int d = 0; d < n; ++d) {
        const int j = i * n + d;
        double off = static_cast<double>(o[j]);
        if (k != nullptr) off += (k[j] + 0.5) / sub - 0.5;
        r2 += off * off;
      }
      s += std::sqrt(r2) * h;
    }
    return s;
  }

  int dims_;
  std::int64_t N_;
  std::int64_t span_;
  std::vector<double> w_;
};

}  // namespace detail

/// Multilinear fractional integral by tensor midpoint quadrature over mesh
/// cells. Cell tuples whose midpoint kernel denominator is below (m+1) h are
/// subdivided into 2^refine_depth sub-cells per coordinate. The weights are
/// symmetric under o -> -o and summed in pairs, so mirror-symmetric data
/// gives bit-identical mirrored outputs.
inline OperatorOutput multilinear_integral(std::span<const GridFunction> f, const ExponentData& e,
                                           int refine_depth = 3) {
  detail::require_inputs(f, e);
  const int n = e.n(), m = e.m();
  if (!(e.alpha() > 0.0) || !(e.alpha() < n * m)) throw DomainError("fractional integral needs 0 < alpha < mn");
  if (refine_depth < 1) throw DomainError("refine_depth must be >= 1 (the diagonal cell is singular)");
  const auto& sys = f[0].system();
  const std::int64_t N = sys.cells_per_dim();
  const detail::KernelTable W(n, m, N, sys.cell_side(), e.alpha(), refine_depth);
  const std::size_t half = W.size() / 2;  // the zero offset sits at the center
  std::vector<double> out(sys.cell_count());
  parallel_for(out.size(), [&](std::size_t cell) {
    const auto x = sys.cell_coords(cell);
    std::vector<std::int64_t> o(n * m), y(n);
    const auto value = [&](const std::vector<std::int64_t>& off, int sign) {
      double prod = 1.0;
      for (int i = 0; i < m; ++i) {
        for (int d = 0; d < n; ++d) {
          y[d] = x[d] + sign * off[i * n + d];
          if (y[d] < 0 || y[d] >= N) return 0.0;
        }
        prod *= f[i][sys.flat_index(y)];
        if (prod == 0.0) return 0.0;
      }
      return prod;
    };
    long double acc = 0.0L;
    for (std::size_t idx = 0; idx < half; ++idx) {
      W.decode(idx, o);
      const double pair = value(o, 1) + value(o, -1);
      if (pair != 0.0) acc += static_cast<long double>(W.at(idx)) * pair;
    }
    W.decode(half, o);
    acc += static_cast<long double>(W.at(half)) * value(o, 1);
    out[cell] = static_cast<double>(acc);
  });
  return OperatorOutput(sys, std::move(out));
}

/// Weighted dyadic fractional maximal function
///   sup_{Q in grid t, x in Q} w(Q)^{alpha/n - 1} int_Q |f| w.
inline OperatorOutput dyadic_weighted_maximal(const GridFunction& f, const GridFunction& w, double alpha,
                                              Shift t = Shift{}) {
  f.require_same_mesh(w);
  const auto& sys = f.system();
  const int n = sys.dim();
  if (alpha < 0.0 || !(alpha < n)) throw DomainError("weighted maximal needs 0 <= alpha < n");
  const CubeFamily F(sys, sys.max_level(), {t});
  const CellIntegrator Ifw(f.times(w)), Iw(w);
  std::vector<double> v(F.size());
  parallel_for(F.size(), [&](std::size_t c) {
    const DyadicCube q = F.cube(c);
    const double num = Ifw.integral(q);
    if (num == 0.0) {
      v[c] = 0.0;
      return;
    }
    const double wq = Iw.integral(q);
    if (!(wq > 0.0)) throw DomainError("w(Q) = 0 with int_Q |f| w > 0 on " + to_string(q));
    v[c] = std::pow(wq, alpha / n - 1.0) * num;
  });
  return sup_over_cubes(F, v);
}

/// Sparse fractional operator (sum_Q (|Q|^{alpha/n - m} prod int_Q f_i)^q chi_Q)^{1/q}.
/// With q = 1 this is the plain sparse operator.
inline OperatorOutput sparse_integral_q(std::span<const GridFunction> f, std::span<const DyadicCube> cubes,
                                        const ExponentData& e, double q) {
  detail::require_inputs(f, e);
  if (!(q > 0.0)) throw DomainError("sparse operator needs q > 0");
  const auto& sys = f[0].system();
  std::vector<CellIntegrator> I;
  for (const auto& fi : f) I.emplace_back(fi);
  std::vector<double> out(sys.cell_count(), 0.0);
  for (const auto& Q : cubes) {
    if (!sys.contains(Q)) throw OutOfSystemError("sparse cube " + to_string(Q) + " is outside the root system");
    double prod = 1.0;
    for (const auto& in : I) prod *= in.integral(Q);
    if (prod == 0.0) continue;
    const double term = std::pow(std::pow(Q.volume(), e.alpha() / e.n() - e.m()) * prod, q);
    for (std::size_t cell : sys.cells_in(Q)) out[cell] += term;
  }
  for (double& x : out) x = std::pow(x, 1.0 / q);
  return OperatorOutput(sys, std::move(out));
}

inline OperatorOutput sparse_integral(std::span<const GridFunction> f, std::span<const DyadicCube> cubes,
                                      const ExponentData& e) {
  return sparse_integral_q(f, cubes, e, 1.0);
}

}  // namespace dyadic

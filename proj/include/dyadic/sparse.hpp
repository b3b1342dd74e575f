#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dyadic/cube_family.hpp"
#include "dyadic/errors.hpp"
#include "dyadic/exponents.hpp"
#include "dyadic/grid_function.hpp"
#include "dyadic/operators.hpp"

namespace dyadic {

/// Leveled stopping family {Q_{j,k}} on one grid. E(Q) is Q minus the next
/// generation, kept as explicit cell lists (cells by center).
struct SparseFamily {
  struct Generation {
    int k = 0;
    std::vector<DyadicCube> cubes;
    std::vector<double> values;                  // stopping quantity per cube, NaN when unknown
    std::vector<std::vector<std::size_t>> E;     // cell indices per cube
  };

  RootSystem system;
  Shift grid{};
  double a = 0.0;             // stopping ratio
  double upper_factor = 0.0;  // 2^{mn - alpha}
  std::vector<Generation> generations;  // increasing k

  bool empty() const { return generations.empty(); }

  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& g : generations) s += g.cubes.size();
    return s;
  }

  std::vector<DyadicCube> cubes() const {
    std::vector<DyadicCube> out;
    for (const auto& g : generations) out.insert(out.end(), g.cubes.begin(), g.cubes.end());
    return out;
  }

  const Generation* generation(int k) const {
    for (const auto& g : generations) {
      if (g.k == k) return &g;
    }
    return nullptr;
  }

  /// Fills every E(Q) from the cubes. Generations are sorted by k and each
  /// generation's cubes by (level, index).
  void rebuild_masks() {
    std::sort(generations.begin(), generations.end(), [](const auto& x, const auto& y) { return x.k < y.k; });
    for (auto& g : generations) {
      std::vector<std::size_t> order(g.cubes.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return g.cubes[x] < g.cubes[y]; });
      Generation sorted;
      sorted.k = g.k;
      for (std::size_t i : order) {
        sorted.cubes.push_back(g.cubes[i]);
        sorted.values.push_back(i < g.values.size() ? g.values[i] : std::numeric_limits<double>::quiet_NaN());
      }
      g = std::move(sorted);
    }
    for (auto& g : generations) {
      std::vector<char> next(system.cell_count(), 0);
      if (const Generation* nx = generation(g.k + 1)) {
        for (const auto& q : nx->cubes) {
          for (std::size_t c : system.cells_in(q)) next[c] = 1;
        }
      }
      g.E.clear();
      for (const auto& q : g.cubes) {
        std::vector<std::size_t> e;
        for (std::size_t c : system.cells_in(q)) {
          if (!next[c]) e.push_back(c);
        }
        g.E.push_back(std::move(e));
      }
    }
  }
};

inline double stopping_ratio(const ExponentData& e) {
  return std::pow(2.0, (e.m() - e.alpha() / e.n()) * (e.n() + 1));
}

inline double stopping_upper_factor(const ExponentData& e) { return std::pow(2.0, e.m() * e.n() - e.alpha()); }

struct SparseBuild {
  SparseFamily family;
  OperatorOutput maximal;  // dyadic maximal function on the grid of the family
};

/// Stopping-time construction on grid t. Q_{j,k} are the maximal cubes of
/// the grid with a^k < |Q|^{alpha/n - m} prod int_Q f_i, for k from the
/// first generation in which every cube with no parent inside the root
/// obeys the upper bound 2^{mn - alpha} a^k, up to the last nonempty one.
inline SparseBuild build_sparse_detail(std::span<const GridFunction> f, const ExponentData& e, Shift t = Shift{}) {
  detail::require_inputs(f, e);
  const auto& sys = f[0].system();
  const CubeFamily F(sys, sys.max_level(), {t});
  const auto v = fractional_cube_values(f, e.alpha(), F);
  SparseBuild out{SparseFamily{sys, t, stopping_ratio(e), stopping_upper_factor(e), {}}, sup_over_cubes(F, v)};
  const double a = out.family.a, C = out.family.upper_factor;
  const auto cubes = F.cubes();
  std::vector<std::size_t> parent(cubes.size(), CubeFamily::npos);
  double vmax = 0.0, top_max = 0.0;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (!std::isfinite(v[i])) throw DomainError("unbounded input: infinite stopping quantity on " + to_string(cubes[i]));
    parent[i] = F.index_of(cubes[i].parent());
    vmax = std::max(vmax, v[i]);
    if (parent[i] == CubeFamily::npos) top_max = std::max(top_max, v[i]);
  }
  if (vmax == 0.0) return out;
  const double la = std::log(a);
  int k_max = static_cast<int>(std::ceil(std::log(vmax) / la)) - 1;
  while (std::pow(a, k_max + 1) < vmax) ++k_max;
  while (!(std::pow(a, k_max) < vmax)) --k_max;
  int k_min = k_max;
  if (top_max > 0.0) {
    k_min = static_cast<int>(std::floor(std::log(top_max / C) / la));
    while (C * std::pow(a, k_min) < top_max) ++k_min;
    while (C * std::pow(a, k_min - 1) >= top_max) --k_min;
  } else {
    // No top cube carries mass: start where the smallest positive value enters.
    double vmin = vmax;
    for (double x : v) {
      if (x > 0.0) vmin = std::min(vmin, x);
    }
    k_min = static_cast<int>(std::floor(std::log(vmin) / la));
    while (!(std::pow(a, k_min) < vmin)) --k_min;
  }
  std::vector<char> above(cubes.size());
  for (int k = k_min; k <= k_max; ++k) {
    const double level = std::pow(a, k);
    SparseFamily::Generation g;
    g.k = k;
    // Parents precede children in the enumeration order.
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      const std::size_t p = parent[i];
      above[i] = (p != CubeFamily::npos) && (above[p] || v[p] > level);
      if (v[i] > level && !above[i]) {
        g.cubes.push_back(cubes[i]);
        g.values.push_back(v[i]);
      }
    }
    if (!g.cubes.empty()) out.family.generations.push_back(std::move(g));
  }
  out.family.rebuild_masks();
  return out;
}

inline SparseFamily build_sparse(std::span<const GridFunction> f, const ExponentData& e, Shift t = Shift{}) {
  return build_sparse_detail(f, e, t).family;
}

inline OperatorOutput sparse_integral(std::span<const GridFunction> f, const SparseFamily& S, const ExponentData& e) {
  const auto cubes = S.cubes();
  return sparse_integral(f, std::span<const DyadicCube>(cubes), e);
}

inline OperatorOutput sparse_integral_q(std::span<const GridFunction> f, const SparseFamily& S, const ExponentData& e,
                                        double q) {
  const auto cubes = S.cubes();
  return sparse_integral_q(f, std::span<const DyadicCube>(cubes), e, q);
}

struct SparseReport {
  bool valid = true;
  std::string invariant;  // name of the first violated invariant
  std::string message;
  std::optional<DyadicCube> cube;
};

/// Checks disjointness, nesting, density, the E sets and, where the
/// stopping values are known, the selection bounds. Volumes are exact
/// rationals; E sets are compared cell by cell.
inline SparseReport verify_sparse(const SparseFamily& S) {
  const auto fail = [](std::string inv, std::string msg, const DyadicCube& q) {
    return SparseReport{false, std::move(inv), std::move(msg), q};
  };
  const auto& sys = S.system;
  const int n = sys.dim();
  const auto vol = [n](const DyadicCube& q) { return pow2(-q.level() * n); };
  for (const auto& g : S.generations) {
    for (const auto& q : g.cubes) {
      if (q.shift() != S.grid) return fail("grid", "cube is not on the family's grid", q);
      if (!sys.contains(q)) return fail("root", "cube lies outside the root system", q);
    }
  }
  for (const auto& g : S.generations) {
    for (std::size_t i = 0; i < g.cubes.size(); ++i) {
      for (std::size_t j = i + 1; j < g.cubes.size(); ++j) {
        if (g.cubes[i].intersects(g.cubes[j])) {
          return fail("disjointness", "generation " + std::to_string(g.k) + " cubes overlap: " + to_string(g.cubes[i]) +
                                          " and " + to_string(g.cubes[j]),
                      g.cubes[j]);
        }
      }
    }
  }
  for (std::size_t gi = 1; gi < S.generations.size(); ++gi) {
    const auto& g = S.generations[gi];
    const auto* below = S.generation(g.k - 1);
    for (const auto& q : g.cubes) {
      bool inside = false;
      if (below != nullptr) {
        for (const auto& p : below->cubes) inside = inside || p.contains_box(q);
      }
      if (!inside) {
        return fail("nesting", "generation " + std::to_string(g.k) + " cube is not inside generation " +
                                   std::to_string(g.k - 1),
                    q);
      }
    }
  }
  for (const auto& g : S.generations) {
    const auto* next = S.generation(g.k + 1);
    for (const auto& q : g.cubes) {
      Rational covered(0);
      if (next != nullptr) {
        for (const auto& c : next->cubes) {
          if (q.contains_box(c)) covered += vol(c);
        }
      }
      if (covered * 2 > vol(q)) {
        return fail("density", "next generation covers " + to_string(covered / vol(q)) + " of the cube (limit 1/2)", q);
      }
      // |E(Q)| = |Q| - |Gamma_{k+1} cap Q| by nesting.
      if ((vol(q) - covered) * 2 < vol(q)) return fail("E-measure", "|E(Q)| < |Q|/2", q);
    }
  }
  std::vector<const DyadicCube*> owner(sys.cell_count(), nullptr);
  for (const auto& g : S.generations) {
    std::vector<char> next(sys.cell_count(), 0);
    if (const auto* nx = S.generation(g.k + 1)) {
      for (const auto& c : nx->cubes) {
        for (std::size_t cell : sys.cells_in(c)) next[cell] = 1;
      }
    }
    if (g.E.size() != g.cubes.size()) return fail("E-mask", "missing E sets", g.cubes.front());
    for (std::size_t i = 0; i < g.cubes.size(); ++i) {
      std::vector<std::size_t> expect;
      for (std::size_t cell : sys.cells_in(g.cubes[i])) {
        if (!next[cell]) expect.push_back(cell);
      }
      if (expect != g.E[i]) return fail("E-mask", "E(Q) differs from Q minus the next generation", g.cubes[i]);
      for (std::size_t cell : g.E[i]) {
        if (owner[cell] != nullptr) {
          return fail("E-disjointness", "E sets of " + to_string(*owner[cell]) + " and this cube share a cell",
                      g.cubes[i]);
        }
        owner[cell] = &g.cubes[i];
      }
    }
  }
  for (const auto& g : S.generations) {
    const double lo = std::pow(S.a, g.k), hi = S.upper_factor * lo;
    for (std::size_t i = 0; i < g.cubes.size() && i < g.values.size(); ++i) {
      const double v = g.values[i];
      if (std::isnan(v)) continue;
      if (!(lo < v) || v > hi) {
        std::ostringstream os;
        os.precision(17);
        os << "stopping value " << v << " outside (" << lo << ", " << hi << "]";
        return fail("selection", os.str(), g.cubes[i]);
      }
    }
  }
  return {};
}

struct DominationResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::size_t cubes = 0;
};

/// Both sides of the level-set estimate
///   int_{Omega} (M f)^q u <= a^q sum_Q v(Q)^q u(E(Q)),
/// with M the dyadic maximal function on grid t and Omega the first
/// generation's level set. Zero data gives ratio 0.
inline DominationResult sparse_domination_check(std::span<const GridFunction> f, const ExponentData& e,
                                                const GridFunction& u, Shift t = Shift{}) {
  const auto built = build_sparse_detail(f, e, t);
  const auto& S = built.family;
  u.require_same_mesh(f[0]);
  DominationResult r;
  if (S.empty()) return r;
  const double q = e.q(), h = u.system().cell_volume();
  long double lhs = 0.0L, rhs = 0.0L;
  const double first = std::pow(S.a, S.generations.front().k);
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (built.maximal[c] > first) lhs += std::pow(built.maximal[c], q) * u[c] * h;
  }
  for (const auto& g : S.generations) {
    for (std::size_t i = 0; i < g.cubes.size(); ++i) {
      long double ue = 0.0L;
      for (std::size_t c : g.E[i]) ue += u[c] * h;
      rhs += std::pow(g.values[i], q) * ue;
    }
  }
  rhs *= std::pow(S.a, q);
  r.lhs = static_cast<double>(lhs);
  r.rhs = static_cast<double>(rhs);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  r.cubes = S.size();
  return r;
}

/// Nonnegative cube-indexed sequence with its reference measure.
struct CarlesonSequence {
  std::map<DyadicCube, double> entries;
  GridFunction mu;
};

struct CarlesonResult {
  double constant = 0.0;  // sup_R (1/mu(R)) sum_{Q in R} c_Q, may be +inf
  double lhs = 0.0;       // sum |a_Q|^r c_Q
  double rhs = 0.0;       // int (M a)^r dmu
  bool holds = true;      // lhs <= constant * rhs
  std::optional<DyadicCube> worst;
};

/// Carleson constant over the cubes of the entries' grid inside the root.
/// All cubes must share one grid and sit at or above the mesh level.
inline CarlesonResult carleson_embedding_check(const std::map<DyadicCube, double>& a, const CarlesonSequence& c,
                                               double r) {
  if (!(r > 0.0)) throw DomainError("Carleson embedding needs r > 0");
  const auto& sys = c.mu.system();
  std::optional<Shift> grid;
  const auto check_cube = [&](const DyadicCube& q) {
    if (!sys.contains(q)) throw OutOfSystemError("cube " + to_string(q) + " is outside the root system");
    if (q.level() > sys.max_level()) throw DomainError("cube " + to_string(q) + " is finer than the mesh");
    if (grid && *grid != q.shift()) throw ConfigError("Carleson data must live on a single grid");
    grid = q.shift();
  };
  for (const auto& [q, x] : c.entries) {
    check_cube(q);
    if (!(x >= 0.0)) throw DomainError("Carleson sequence values must be >= 0");
  }
  for (const auto& [q, x] : a) check_cube(q);
  CarlesonResult res;
  if (!grid) return res;
  const CubeFamily F(sys, sys.max_level(), {*grid});
  std::vector<double> sums(F.size(), 0.0);
  for (const auto& [q, x] : c.entries) {
    DyadicCube p = q;
    for (std::size_t i = F.index_of(p); i != CubeFamily::npos; p = p.parent(), i = F.index_of(p)) sums[i] += x;
  }
  const CellIntegrator I(c.mu);
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (sums[i] == 0.0) continue;
    const DyadicCube R = F.cube(i);
    const double m = I.integral(R);
    const double ratio = m > 0.0 ? sums[i] / m : std::numeric_limits<double>::infinity();
    if (ratio > res.constant) {
      res.constant = ratio;
      res.worst = R;
    }
  }
  long double lhs = 0.0L;
  for (const auto& [q, x] : c.entries) {
    const auto it = a.find(q);
    if (it != a.end()) lhs += std::pow(std::abs(it->second), r) * x;
  }
  std::vector<double> Ma(sys.cell_count(), 0.0);
  for (const auto& [q, x] : a) {
    for (std::size_t cell : sys.cells_in(q)) Ma[cell] = std::max(Ma[cell], std::abs(x));
  }
  long double rhs = 0.0L;
  for (std::size_t cell = 0; cell < Ma.size(); ++cell) rhs += std::pow(Ma[cell], r) * c.mu[cell];
  res.lhs = static_cast<double>(lhs);
  res.rhs = static_cast<double>(rhs * sys.cell_volume());
  res.holds = res.lhs <= res.constant * res.rhs || res.lhs == 0.0;
  return res;
}

/// c_Q = sigma(Q) over the cubes of a sparse family.
inline CarlesonSequence sparse_sigma_sequence(const SparseFamily& S, const GridFunction& sigma) {
  CarlesonSequence c{{}, sigma};
  const CellIntegrator I(sigma);
  for (const auto& q : S.cubes()) c.entries[q] += I.integral(q);
  return c;
}

/// Text form: a header line `sparse <n> <a> <upper_factor>`, then for each
/// generation a line `generation <k>` followed by its cubes as
/// `t level j_1 ... j_n`, sorted by (level, j). t is 0 or 1/3 per
/// coordinate, comma separated.
inline std::string serialize_sparse(const SparseFamily& S) {
  std::ostringstream os;
  os.precision(17);
  const int n = S.system.dim();
  os << "sparse " << n << ' ' << S.a << ' ' << S.upper_factor << '\n';
  for (const auto& g : S.generations) {
    os << "generation " << g.k << '\n';
    std::vector<DyadicCube> cubes = g.cubes;
    std::sort(cubes.begin(), cubes.end(), [](const DyadicCube& x, const DyadicCube& y) {
      return std::pair(x.level(), x.index()) < std::pair(y.level(), y.index());
    });
    for (const auto& q : cubes) {
      os << to_string(q.shift(), n) << ' ' << q.level();
      for (auto j : q.index()) os << ' ' << j;
      os << '\n';
    }
  }
  return os.str();
}

/// Inverse of serialize_sparse; E sets are rebuilt on `sys`, stopping values
/// are unknown.
inline SparseFamily parse_sparse(const std::string& text, const RootSystem& sys) {
  std::istringstream in(text);
  std::string line;
  SparseFamily S{sys, Shift{}, 0.0, 0.0, {}};
  bool header = false, have_grid = false;
  int lineno = 0;
  const auto bad = [&](const std::string& why) {
    return ConfigError("sparse family line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (!header) {
      int n = 0;
      if (head != "sparse" || !(ls >> n >> S.a >> S.upper_factor)) throw bad("expected 'sparse <n> <a> <factor>'");
      if (n != sys.dim()) throw bad("dimension differs from the root system");
      header = true;
      continue;
    }
    if (head == "generation") {
      SparseFamily::Generation g;
      if (!(ls >> g.k)) throw bad("expected 'generation <k>'");
      S.generations.push_back(std::move(g));
      continue;
    }
    if (S.generations.empty()) throw bad("cube before any generation line");
    Shift t{};
    std::size_t d = 0, pos = 0;
    while (pos <= head.size()) {
      const std::size_t comma = std::min(head.find(',', pos), head.size());
      const std::string part = head.substr(pos, comma - pos);
      if (part == "1/3") t.bits |= 1u << d;
      else if (part != "0") throw bad("bad shift '" + head + "'");
      ++d;
      pos = comma + 1;
    }
    if (static_cast<int>(d) != sys.dim()) throw bad("shift has wrong dimension");
    int level = 0;
    std::vector<std::int64_t> j(sys.dim());
    if (!(ls >> level)) throw bad("missing level");
    for (auto& x : j) {
      if (!(ls >> x)) throw bad("missing index");
    }
    std::string extra;
    if (ls >> extra) throw bad("trailing text '" + extra + "'");
    if (have_grid && t != S.grid) throw bad("cubes from more than one grid");
    S.grid = t;
    have_grid = true;
    S.generations.back().cubes.emplace_back(level, std::move(j), t);
  }
  if (!header) throw ConfigError("empty sparse family text");
  for (const auto& q : S.cubes()) {
    if (!sys.contains(q)) throw ConfigError("sparse cube " + to_string(q) + " is outside the root system");
  }
  S.rebuild_masks();
  return S;
}

}  // namespace dyadic

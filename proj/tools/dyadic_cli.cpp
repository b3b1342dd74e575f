#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dyadic/dyadic.hpp"

using namespace dyadic;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<int> n, m, level, scan, integral_level, depth, cases;
  std::optional<std::uint64_t> seed;
  std::string p, alpha, q, mode, root, eps, format, out;
  std::string data = "random";
  std::string weights = "ones";
  std::string grid;
  std::string grids = "all";
  double r = 1.0;
  bool strict = false;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "key = value config file; flags override it");
  app->add_option("--n", o.n, "dimension");
  app->add_option("--m", o.m, "number of functions");
  app->add_option("--p", o.p, "comma list of exponents p_i (rationals)");
  app->add_option("--alpha", o.alpha, "fractional order (rational)");
  app->add_option("--q", o.q, "target exponent; derived by homogeneity when absent");
  app->add_option("--mode", o.mode, "homogeneous or two-weight");
  app->add_option("--level", o.level, "mesh level");
  app->add_option("--scan", o.scan, "finest level scanned by the constants");
  app->add_option("--root", o.root, "root box lo:hi in every coordinate");
  app->add_option("--seed", o.seed, "seed of the case generator");
  app->add_option("--format", o.format, "csv or json");
  app->add_option("--out", o.out, "output file (default stdout)");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (std::isfinite(x) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

RunConfig resolve(const Options& o, RunConfig base) {
  if (!o.config.empty()) base = load_config(o.config);
  if (o.n) base.n = *o.n;
  if (!o.p.empty()) {
    base.p = parse_rational_list(o.p);
    if (!o.m) base.m = static_cast<int>(base.p.size());
  }
  if (o.m) base.m = *o.m;
  if (!o.alpha.empty()) base.alpha = parse_rational(o.alpha);
  if (!o.q.empty()) base.q = parse_rational(o.q);
  if (!o.mode.empty()) base.mode = parse_mode(o.mode);
  if (o.level) {
    base.mesh_level = *o.level;
    if (!o.scan) base.scan_level = *o.level;
  }
  if (o.scan) base.scan_level = *o.scan;
  if (!o.root.empty()) std::tie(base.root_lo, base.root_hi) = parse_root(o.root);
  if (o.seed) base.seed = *o.seed;
  if (!o.format.empty()) base.format = parse_format(o.format);
  if (!o.eps.empty()) base.eps = parse_eps_list(o.eps);
  if (base.p.empty()) throw ConfigError("exponents p_i are required (--p or config key p)");
  if (base.scan_level > base.mesh_level) throw ConfigError("scan level must not exceed the mesh level");
  return base;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw ConfigError("cannot write '" + o.out + "'");
  f << text;
}

std::vector<GridFunction> make_data(const std::string& kind, const RootSystem& sys, int m, std::uint64_t seed) {
  std::vector<GridFunction> f;
  for (int i = 0; i < m; ++i) {
    if (kind == "random") {
      auto rng = case_rng(seed, static_cast<std::uint64_t>(i));
      f.push_back(random_nonneg(sys, rng));
    } else if (kind == "ones") {
      f.push_back(GridFunction::constant(sys, 1.0));
    } else if (kind == "indicator") {
      f.push_back(GridFunction::from_centers(sys, [](std::span<const double> x) {
        for (double c : x) {
          if (c < 0.0 || c >= 1.0) return 0.0;
        }
        return 1.0;
      }));
    } else {
      throw ConfigError("--data must be random, ones or indicator, got '" + kind + "'");
    }
  }
  return f;
}

WeightVector make_weights(const std::string& kind, const ExponentData& e, const RootSystem& sys, std::uint64_t seed) {
  if (kind == "ones") return WeightVector::ones(e, sys);
  if (kind == "random") {
    std::vector<GridFunction> w;
    for (int i = 0; i < e.m(); ++i) {
      auto rng = case_rng(seed, 1000 + static_cast<std::uint64_t>(i));
      w.push_back(random_step_weight(sys, rng));
    }
    return WeightVector(e, std::move(w));
  }
  if (kind.rfind("power:", 0) == 0) {
    std::vector<double> deg;
    for (const auto& x : parse_rational_list(kind.substr(6))) deg.push_back(to_double(x));
    return WeightVector::power(e, sys, std::move(deg));
  }
  throw ConfigError("--weights must be ones, random or power:<d_1,...,d_m>, got '" + kind + "'");
}

Shift parse_shift(const std::string& s, int n) {
  if (s.empty()) return Shift{};
  Shift t{};
  int d = 0;
  std::string_view rest = s;
  while (true) {
    const auto comma = rest.find(',');
    const auto part = detail::trim(rest.substr(0, comma));
    if (part == "1/3") t.bits |= 1u << d;
    else if (part != "0") throw ConfigError("grid shifts are 0 or 1/3, got '" + std::string(part) + "'");
    ++d;
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (d != n) throw ConfigError("--grid needs one shift per coordinate");
  return t;
}

std::string cell_table(const GridFunction& g, OutputFormat fmt_kind) {
  const auto& sys = g.system();
  if (fmt_kind == OutputFormat::Json) {
    json cells = json::array();
    for (std::size_t c = 0; c < g.size(); ++c) cells.push_back({{"x", sys.cell_center(c)}, {"value", g[c]}});
    return json{{"cells", cells}}.dump(2) + "\n";
  }
  std::ostringstream os;
  for (int d = 1; d <= sys.dim(); ++d) os << 'x' << d << ',';
  os << "value\n";
  for (std::size_t c = 0; c < g.size(); ++c) {
    for (double x : sys.cell_center(c)) os << fmt(x) << ',';
    os << fmt(g[c]) << '\n';
  }
  return os.str();
}

std::string quantity_table(const std::vector<std::pair<std::string, double>>& rows, OutputFormat f) {
  if (f == OutputFormat::Json) {
    json j = json::object();
    for (const auto& [k, v] : rows) j[k] = v;
    return j.dump(2) + "\n";
  }
  std::string s = "quantity,value\n";
  for (const auto& [k, v] : rows) s += k + "," + fmt(v) + "\n";
  return s;
}

int run_maximal(const Options& o) {
  const auto rc = resolve(o, RunConfig{});
  const auto e = rc.exponents();
  const auto sys = rc.system();
  const auto f = make_data(o.data, sys, e.m(), rc.seed);
  std::optional<std::vector<Shift>> grids;
  if (o.grids == "standard") grids = std::vector<Shift>{Shift{}};
  else if (o.grids != "all") throw ConfigError("--grids must be all or standard");
  emit(o, cell_table(multilinear_maximal(f, e, grids), rc.format));
  return 0;
}

int run_integral(const Options& o) {
  const auto rc = resolve(o, RunConfig{});
  const auto e = rc.exponents();
  const auto sys = rc.system();
  const auto f = make_data(o.data, sys, e.m(), rc.seed);
  emit(o, cell_table(multilinear_integral(f, e, o.depth.value_or(3)), rc.format));
  return 0;
}

int run_sparse(const Options& o) {
  const auto rc = resolve(o, RunConfig{});
  const auto e = rc.exponents();
  const auto sys = rc.system();
  const auto f = make_data(o.data, sys, e.m(), rc.seed);
  const Shift t = parse_shift(o.grid, rc.n);
  const auto S = build_sparse(f, e, t);
  const auto rep = verify_sparse(S);
  const auto u = make_weights(o.weights, e, sys, rc.seed).u();
  const auto dom = sparse_domination_check(f, e, u, t);
  if (rc.format == OutputFormat::Json) {
    json gens = json::array();
    for (const auto& g : S.generations) {
      json cubes = json::array();
      for (const auto& q : g.cubes) cubes.push_back(to_string(q));
      gens.push_back({{"k", g.k}, {"cubes", cubes}});
    }
    emit(o, json{{"a", S.a},
                 {"generations", gens},
                 {"valid", rep.valid},
                 {"domination", {{"lhs", dom.lhs}, {"rhs", dom.rhs}, {"ratio", dom.ratio}}}}
                    .dump(2) +
                "\n");
  } else {
    emit(o, serialize_sparse(S) + "# domination lhs " + fmt(dom.lhs) + " rhs " + fmt(dom.rhs) + " ratio " +
                fmt(dom.ratio) + "\n");
  }
  if (!rep.valid) {
    throw InvariantViolation("sparse family violates " + rep.invariant + " at " +
                             (rep.cube ? to_string(*rep.cube) : std::string("?")) + ": " + rep.message);
  }
  if (dom.ratio > 1.0) throw InvariantViolation("level-set domination ratio " + fmt(dom.ratio) + " exceeds 1");
  return 0;
}

int run_constants(const Options& o) {
  const auto rc = resolve(o, RunConfig{});
  const auto e = rc.exponents();
  const auto sys = rc.system();
  const CubeFamily F(sys, rc.scan_level);
  const auto wv = make_weights(o.weights, e, sys, rc.seed);
  std::vector<std::pair<std::string, double>> rows;
  if (e.mode() == WeightMode::Homogeneous) rows.emplace_back("a_Pq", a_Pq_constant(wv, F).value);
  rows.emplace_back("two_weight", two_weight_constant(wv.u(), wv, F).value);
  for (int i = 0; i < e.m(); ++i) {
    rows.emplace_back("a_infty_sigma_" + std::to_string(i + 1), a_infty_constant(wv.sigma(i), F).value);
  }
  emit(o, quantity_table(rows, rc.format));
  return 0;
}

int run_rh_check(const Options& o) {
  RunConfig base;
  base.p = {Rational(2)};
  const auto rc = resolve(o, base);
  const auto sys = rc.system();
  const CubeFamily F(sys, rc.scan_level);
  const int cases = o.cases.value_or(10);
  std::vector<std::pair<std::string, double>> rows;
  std::optional<std::string> bad;
  for (int k = 0; k < cases; ++k) {
    GridFunction w = GridFunction::constant(sys, 1.0);
    if (o.weights.rfind("power:", 0) == 0) {
      w = discretize_power(to_double(parse_rational(o.weights.substr(6))), sys);
    } else {
      auto rng = case_rng(rc.seed, static_cast<std::uint64_t>(k));
      w = random_step_weight(sys, rng);
    }
    const auto res = reverse_holder_check(w, F);
    rows.emplace_back("case_" + std::to_string(k) + "_worst_ratio", res.worst_ratio);
    if (res.worst_ratio > 2.0 && !bad) {
      bad = "case " + std::to_string(k) + ": reverse Holder ratio " + fmt(res.worst_ratio) + " > 2 on " +
            to_string(res.cube);
    }
  }
  emit(o, quantity_table(rows, rc.format));
  if (bad) throw InvariantViolation(*bad);
  return 0;
}

int run_carleson(const Options& o) {
  RunConfig base;
  base.p = {Rational(2)};
  const auto rc = resolve(o, base);
  const auto sys = rc.system();
  const CubeFamily F(sys, rc.mesh_level, {Shift{}});
  const int cases = o.cases.value_or(10);
  std::vector<std::pair<std::string, double>> rows;
  std::optional<std::string> bad;
  for (int k = 0; k < cases; ++k) {
    auto rng = case_rng(rc.seed, static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> val(0.0, 3.0);
    std::bernoulli_distribution pick(0.2);
    CarlesonSequence c{{}, random_step_weight(sys, rng)};
    std::map<DyadicCube, double> a;
    for (const auto& q : F.cubes()) {
      if (pick(rng)) c.entries[q] = val(rng);
      if (pick(rng)) a[q] = val(rng) - 1.5;
    }
    const auto res = carleson_embedding_check(a, c, o.r);
    rows.emplace_back("case_" + std::to_string(k) + "_lhs", res.lhs);
    rows.emplace_back("case_" + std::to_string(k) + "_bound", res.constant * res.rhs);
    if (!res.holds && !bad) bad = "case " + std::to_string(k) + ": Carleson embedding fails";
  }
  emit(o, quantity_table(rows, rc.format));
  if (bad) throw InvariantViolation(*bad);
  return 0;
}

int run_sharpness(const Options& o, Theorem t) {
  RunConfig base;
  base.m = 2;
  base.mesh_level = 10;
  base.scan_level = 10;
  base.root_lo = Rational(-1);
  base.root_hi = Rational(1);
  base.eps = dyadic_eps_range(3, 10);
  const auto rc = resolve(o, base);
  auto cfg = rc.experiment(t);
  if (o.integral_level) cfg.integral_level = *o.integral_level;
  const auto rep = run_experiment(cfg);
  emit(o, rc.format == OutputFormat::Json ? to_json(rep).dump(2) + "\n" : to_csv(rep));
  if (o.strict && !rep.pass()) throw InvariantViolation("sharpness checks failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic multilinear fractional operators: evaluation, constants, sparse checks, sharpness sweeps"};
  app.require_subcommand(1);
  Options o;
  auto* maximal = app.add_subcommand("maximal", "multilinear fractional maximal function on the mesh");
  auto* integral = app.add_subcommand("integral", "multilinear fractional integral by quadrature");
  auto* sparse = app.add_subcommand("sparse", "build, verify and serialize a sparse family");
  auto* constants = app.add_subcommand("constants", "weight characteristics");
  auto* rh = app.add_subcommand("rh-check", "sharp reverse Holder check on step or power weights");
  auto* carleson = app.add_subcommand("carleson", "Carleson embedding on random sequences");
  auto* sharp = app.add_subcommand("sharpness", "extremal-family eps sweeps");
  sharp->require_subcommand(1);
  std::map<CLI::App*, Theorem> theorems;
  for (auto [name, th] : {std::pair{"t1", Theorem::T1}, std::pair{"t2", Theorem::T2}, std::pair{"t3", Theorem::T3}}) {
    auto* s = sharp->add_subcommand(name, "sweep for theorem " + std::string(name));
    add_common(s, o);
    s->add_option("--eps", o.eps, "eps list, e.g. 2^-3..2^-10");
    s->add_option("--integral-level", o.integral_level, "quadrature mesh level (t2)");
    s->add_flag("--strict", o.strict, "exit 1 when a slope or ratio check fails");
    theorems[s] = th;
  }
  for (auto* s : {maximal, integral, sparse, constants, rh, carleson}) add_common(s, o);
  for (auto* s : {maximal, integral, sparse}) s->add_option("--data", o.data, "random, ones or indicator");
  maximal->add_option("--grids", o.grids, "all or standard");
  integral->add_option("--depth", o.depth, "near-diagonal refinement depth");
  sparse->add_option("--grid", o.grid, "shift per coordinate, e.g. 0 or 1/3,0");
  sparse->add_option("--weights", o.weights, "weight for u: ones, random or power:<d_1,...>");
  constants->add_option("--weights", o.weights, "ones, random or power:<d_1,...,d_m>");
  rh->add_option("--weights", o.weights, "random or power:<d>");
  rh->add_option("--cases", o.cases, "number of random weights");
  carleson->add_option("--cases", o.cases, "number of random instances");
  carleson->add_option("--r", o.r, "embedding exponent r > 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (maximal->parsed()) return run_maximal(o);
    if (integral->parsed()) return run_integral(o);
    if (sparse->parsed()) return run_sparse(o);
    if (constants->parsed()) return run_constants(o);
    if (rh->parsed()) return run_rh_check(o);
    if (carleson->parsed()) return run_carleson(o);
    for (const auto& [s, th] : theorems) {
      if (s->parsed()) return run_sharpness(o, th);
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const OutOfSystemError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

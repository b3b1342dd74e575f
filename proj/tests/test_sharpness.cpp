#include <gtest/gtest.h>

#include <cmath>

#include "dyadic/sharpness.hpp"

using namespace dyadic;

namespace {

ExperimentConfig t1_config() {
  ExperimentConfig cfg{ExponentData::homogeneous(1, 2, Rational(1, 2), {Rational(4, 3), Rational(4)})};
  cfg.theorem = Theorem::T1;
  cfg.eps = dyadic_eps_range(3, 10);
  return cfg;
}

ExperimentConfig t3_config() {
  ExperimentConfig cfg{ExponentData::homogeneous(1, 2, Rational(1, 2), {Rational(2), Rational(2)})};
  cfg.theorem = Theorem::T3;
  cfg.eps = dyadic_eps_range(3, 10);
  return cfg;
}

}  // namespace

TEST(FitExponent, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 3; k <= 10; ++k) {
    const double e = std::ldexp(1.0, -k);
    pts.emplace_back(e, 7.0 * std::pow(e, -1.5));
  }
  const auto fit = fit_exponent(pts);
  EXPECT_NEAR(fit.slope, 1.5, 1e-13);
  EXPECT_NEAR(fit.stderr_slope, 0.0, 1e-13);
  EXPECT_NEAR(std::exp(fit.intercept), 7.0, 1e-12);
}

TEST(FitExponent, PerturbedLawApproachesOne) {
  double prev_err = 1.0;
  for (int deep : {6, 10, 16}) {
    std::vector<std::pair<double, double>> pts;
    for (int k = deep - 5; k <= deep; ++k) {
      const double e = std::ldexp(1.0, -k);
      pts.emplace_back(e, (1.0 + e) / e);
    }
    const auto fit = fit_exponent(pts);
    const double err = std::abs(fit.slope - 1.0);
    EXPECT_LT(err, prev_err);
    EXPECT_GT(fit.stderr_slope, 0.0);
    prev_err = err;
  }
}

TEST(FitExponent, RejectsDegenerateInput) {
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {0.25, 2.0}}), DomainError);
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {0.5, 2.0}, {0.25, 3.0}}), DomainError);
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {0.25, 0.0}, {0.125, 3.0}}), DomainError);
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {0.25, -2.0}, {0.125, 3.0}}), DomainError);
}

TEST(Hypotheses, T1RejectsEqualExponents) {
  auto cfg = t1_config();
  cfg.exponents = ExponentData::homogeneous(1, 2, Rational(1, 2), {Rational(2), Rational(2)});
  const auto problems = hypothesis_problems(cfg);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("p'_{i0}(1 - alpha/n) >= max_{i != i0} p'_i"), std::string::npos) << problems[0];
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  EXPECT_TRUE(hypothesis_problems(t1_config()).empty());
}

TEST(Hypotheses, T2NeedsConstructiveBranch) {
  auto cfg = t1_config();
  cfg.theorem = Theorem::T2;
  EXPECT_TRUE(hypothesis_problems(cfg).empty());
  cfg.exponents = ExponentData::homogeneous(1, 2, Rational(1, 2), {Rational(3), Rational(3)});  // q = 6, p' = 3/2
  const auto problems = hypothesis_problems(cfg);
  bool named = false;
  for (const auto& p : problems) named = named || p.find("max_i p'_i >= q branch") != std::string::npos;
  EXPECT_TRUE(named);
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Hypotheses, SweepAndMeshChecks) {
  auto cfg = t3_config();
  cfg.eps = {0.5, 0.0, 2.0};
  cfg.mesh_level = 5;
  EXPECT_EQ(hypothesis_problems(cfg).size(), 3u);
}

TEST(Experiment, UnitEpsDegeneratesToOneRow) {
  for (auto cfg : {t1_config(), t3_config()}) {
    cfg.eps = {1.0};
    cfg.mesh_level = 8;
    const auto rep = run_experiment(cfg);
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_TRUE(rep.slopes.empty());
    const auto& r = rep.rows[0];
    EXPECT_TRUE(std::isfinite(r.lhs_norm));
    EXPECT_GT(r.lhs_norm, 0.0);
    for (double a : r.a_infty) EXPECT_TRUE(std::isfinite(a));
  }
}

TEST(Experiment, AllOnesWeightsGiveUnitConstants) {
  const auto e = ExponentData::homogeneous(1, 2, Rational(1, 2), {Rational(2), Rational(2)});
  const auto sys = RootSystem::from_bounds(1, Rational(-1), Rational(1), 8);
  const CubeFamily F(sys, 8);
  const auto wv = WeightVector::power(e, sys, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(a_Pq_constant(wv, F).value, 1.0);
  for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(a_infty_constant(wv.sigma(i), F, SelfSimilarTail{0.0}).value, 1.0);
}

TEST(Experiment, NormsMatchMeshIntegration) {
  auto cfg = t1_config();
  const auto sys = RootSystem::from_bounds(1, Rational(-1), Rational(1), 10);
  for (double eps : cfg.eps) {
    const auto fam = extremal_family(cfg, eps);
    for (int i = 0; i < 2; ++i) {
      const double p = cfg.exponents.p(i);
      const double deg = p * (fam.data_degrees[i] + fam.weight_degrees[i]);
      const double mesh = integrate(discretize_power(deg, sys), DyadicCube(0, {-1}, Shift{})) +
                          integrate(discretize_power(deg, sys), DyadicCube(0, {0}, Shift{}));
      const double exact = power_ball_integral(deg, 1.0, 1);
      EXPECT_NEAR(mesh, exact, 0.01 * exact);
    }
  }
}

TEST(Experiment, TwoWeightCrossCheck) {
  const auto cfg = t3_config();
  const auto sys = RootSystem::from_bounds(1, Rational(-1), Rational(1), 9);
  const CubeFamily F(sys, 9);
  for (double eps : {0.125, 0.03125, 0.0078125}) {
    const auto wv = WeightVector::power(cfg.exponents, sys, extremal_family(cfg, eps).weight_degrees);
    const double a = a_Pq_constant(wv, F).value;
    EXPECT_NEAR(two_weight_constant(wv.u(), wv, F).value, std::pow(a, 1.0 / cfg.exponents.q()), 1e-12 * a);
  }
}

TEST(Experiment, T1SlopesMatchTargets) {
  const auto rep = run_thm1(t1_config());
  ASSERT_EQ(rep.rows.size(), 8u);
  for (const auto& s : rep.slopes) {
    EXPECT_TRUE(s.pass) << s.quantity << " " << s.exponent;
    EXPECT_EQ(s.residuals.size(), 8u);
  }
  EXPECT_NEAR(rep.slope("lhs_norm")->exponent, -1.5, 0.1);
  EXPECT_NEAR(rep.slope("a_Pq")->exponent, -0.5, 0.1);
  EXPECT_TRUE(rep.ratio_pass) << rep.ratio_variation;
}

TEST(Experiment, T3SlopesMatchTargets) {
  const auto rep = run_thm3(t3_config());
  for (const auto& s : rep.slopes) EXPECT_TRUE(s.pass) << s.quantity << " " << s.exponent;
  EXPECT_NEAR(rep.slope("a_Pq")->exponent, -2.0, 0.1);
  EXPECT_NEAR(rep.slope("lhs_norm")->exponent, -2.5, 0.1);
  EXPECT_GE(rep.slope("a_infty_1")->exponent, -1.1);
  EXPECT_TRUE(rep.ratio_pass) << rep.ratio_variation;
}

TEST(Experiment, SlopesStableUnderRefinement) {
  auto coarse = t1_config();
  coarse.mesh_level = 9;
  const auto a = run_thm1(coarse);
  const auto b = run_thm1(t1_config());
  for (const auto& s : b.slopes) {
    const auto* c = a.slope(s.quantity);
    ASSERT_NE(c, nullptr);
    EXPECT_LT(std::abs(s.exponent - c->exponent), s.stderr_slope + 0.05) << s.quantity;
  }
}

TEST(Experiment, T1PointwiseLowerBoundConstantStable) {
  // M(f_1, f_2)(x) >= c (1/eps) |x|^{beta} on B(0,1).
  const auto cfg = t1_config();
  const auto& e = cfg.exponents;
  const auto sys = RootSystem::from_bounds(1, Rational(-1), Rational(1), 10);
  std::vector<double> cs;
  for (double eps : cfg.eps) {
    const auto fam = extremal_family(cfg, eps);
    const auto M = multilinear_maximal(extremal_data(fam, sys), e);
    const double beta = e.alpha() + fam.data_degrees[0] + fam.data_degrees[1];
    double c = 1e300;
    for (std::size_t i = 0; i < M.size(); ++i) {
      const double r = std::abs(sys.cell_center(i)[0]);
      c = std::min(c, M[i] * eps * std::pow(r, -beta));
    }
    EXPECT_GT(c, 0.0);
    cs.push_back(c);
  }
  const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
  EXPECT_LT(*hi / *lo, 2.0);
}

TEST(Report, CsvAndJsonShape) {
  auto cfg = t1_config();
  cfg.mesh_level = 8;
  cfg.eps = dyadic_eps_range(3, 7);
  const auto rep = run_experiment(cfg);
  const auto csv = to_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "eps,norm_f1,norm_f2,a_Pq,a_infty_1,a_infty_2,lhs_norm");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const double first_lhs = std::stod(line.substr(line.rfind(',') + 1));
  EXPECT_EQ(first_lhs, rep.rows[0].lhs_norm);
  EXPECT_NE(csv.find("# summary t1"), std::string::npos);
  const auto j = nlohmann::json::parse(to_json(rep).dump());
  EXPECT_EQ(j["rows"].size(), 5u);
  EXPECT_EQ(j["rows"][2]["a_Pq"].get<double>(), rep.rows[2].a_pq);
  EXPECT_EQ(j["q"], "2");
  EXPECT_EQ(j["pass"].get<bool>(), rep.pass());
}

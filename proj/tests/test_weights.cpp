#include <gtest/gtest.h>

#include <cmath>

#include "dyadic/random.hpp"
#include "dyadic/weights.hpp"

using namespace dyadic;

namespace {

ExponentData ex(int n, Rational alpha, std::vector<Rational> p) {
  const int m = static_cast<int>(p.size());
  return ExponentData::homogeneous(n, m, alpha, std::move(p));
}

WeightVector random_vector(const ExponentData& e, const RootSystem& sys, std::uint64_t seed, std::uint64_t k) {
  auto rng = case_rng(seed, k);
  std::vector<GridFunction> w;
  for (int i = 0; i < e.m(); ++i) w.push_back(random_step_weight(sys, rng));
  return WeightVector(e, std::move(w));
}

}  // namespace

TEST(Constants, AllOnesGiveOne) {
  const auto sys = RootSystem::unit(1, 5);
  const CubeFamily F(sys, 5);
  const auto e = ex(1, Rational(1, 2), {Rational(2), Rational(2)});
  const auto wv = WeightVector::ones(e, sys);
  EXPECT_DOUBLE_EQ(a_Pq_constant(wv, F).value, 1.0);
  EXPECT_DOUBLE_EQ(two_weight_constant(wv.u(), wv, F).value, 1.0);
  EXPECT_DOUBLE_EQ(a_infty_constant(wv.w(0), F).value, 1.0);
  EXPECT_DOUBLE_EQ(muckenhoupt_ap_constant(wv.w(0), 3.0, F).value, 1.0);
  EXPECT_DOUBLE_EQ(reverse_holder_check(wv.w(0), F).worst_ratio, 1.0);
  const auto d = dual_vector(wv, 0);
  EXPECT_DOUBLE_EQ(a_Pq_constant(d, F).value, 1.0);
}

TEST(Constants, SingleWeightReducesToLinear) {
  const auto sys = RootSystem::unit(1, 6);
  const CubeFamily F(sys, 6);
  const auto e = ex(1, Rational(1, 3), {Rational(3, 2)});
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto wv = random_vector(e, sys, 5, k);
    const double a = a_Pq_constant(wv, F).value;
    const double b = linear_apq_constant(wv.w(0), e.p(0), e.q(), F).value;
    EXPECT_NEAR(a, b, 1e-12 * b);
  }
}

TEST(Constants, TwoWeightReductionAndScaling) {
  const auto sys = RootSystem::unit(1, 6);
  const CubeFamily F(sys, 6);
  const auto e = ex(1, Rational(1, 2), {Rational(4, 3), Rational(4)});
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto wv = random_vector(e, sys, 17, k);
    const double a = a_Pq_constant(wv, F).value;
    const double tw = two_weight_constant(wv.u(), wv, F).value;
    EXPECT_NEAR(tw, std::pow(a, 1.0 / e.q()), 1e-12 * tw);
    EXPECT_NEAR(two_weight_constant(wv.u().scaled(2.0), wv, F).value, std::pow(2.0, 1.0 / e.q()) * tw, 1e-12 * tw);
  }
}

TEST(Constants, DualIdentityExactOnRandomWeights) {
  const auto sys = RootSystem::unit(1, 6);
  const CubeFamily F(sys, 6);
  const auto e = ex(1, Rational(1, 2), {Rational(4, 3), Rational(4)});
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto wv = random_vector(e, sys, 23, k);
    const double a = a_Pq_constant(wv, F).value;
    for (int i = 0; i < 2; ++i) {
      const auto d = dual_vector(wv, i);
      const double lhs = std::pow(a_Pq_constant(d, F).value, e.q() / e.p_conjugate(i));
      EXPECT_NEAR(lhs, a, 1e-12 * a);
    }
  }
}

TEST(Constants, DualOfPowerVectorStaysPower) {
  const auto sys = RootSystem::from_bounds(1, Rational(-1), Rational(1), 8);
  const CubeFamily F(sys, 8);
  const auto e = ex(1, Rational(1, 2), {Rational(4, 3), Rational(4)});
  const auto wv = WeightVector::power(e, sys, {0.8 / 4.0, 0.0});
  const auto d = dual_vector(wv, 0);
  ASSERT_TRUE(d.power_degrees().has_value());
  EXPECT_DOUBLE_EQ((*d.power_degrees())[0], -0.2);
  const double lhs = std::pow(a_Pq_constant(d, F).value, e.q() / e.p_conjugate(0));
  EXPECT_NEAR(lhs, a_Pq_constant(wv, F).value, 1e-9 * lhs);
}

TEST(Constants, DualNeedsQAboveOne) {
  const auto sys = RootSystem::unit(1, 3);
  const auto e = ex(1, Rational(1, 2), {Rational(2), Rational(2)});  // q = 2
  EXPECT_NO_THROW(dual_vector(WeightVector::ones(e, sys), 1));
  const auto e1 = ex(1, Rational(0), {Rational(2), Rational(2)});  // q = 1
  EXPECT_THROW(dual_vector(WeightVector::ones(e1, sys), 0), DomainError);
}

TEST(Constants, MonotoneUnderRefinement) {
  const auto sys = RootSystem::unit(1, 7);
  const CubeFamily coarse(sys, 4), fine(sys, 7);
  const auto e = ex(1, Rational(1, 2), {Rational(2), Rational(2)});
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto wv = random_vector(e, sys, 31, k);
    EXPECT_LE(a_Pq_constant(wv, coarse).value, a_Pq_constant(wv, fine).value);
    EXPECT_LE(a_infty_constant(wv.w(0), coarse).value, a_infty_constant(wv.w(0), fine).value);
    EXPECT_LE(muckenhoupt_ap_constant(wv.w(1), 2.0, coarse).value, muckenhoupt_ap_constant(wv.w(1), 2.0, fine).value);
  }
}

TEST(AInfty, TwoCellHandEnumeration) {
  // Cubes [0,1), [0,1/2), [1/2,1) with w = a on the left, b on the right.
  const auto sys = RootSystem::unit(1, 1);
  const CubeFamily F(sys, 1, {Shift{0}});
  ASSERT_EQ(F.size(), 3u);
  const double a = 5.0, b = 2.0;
  const GridFunction w(sys, {a, b});
  // Q = [0,1): M = a on the left half, (a+b)/2 on the right half.
  const double expect = (a / 2 + (a + b) / 4) / ((a + b) / 2);
  EXPECT_NEAR(a_infty_constant(w, F).value, expect, 1e-15);
}

TEST(AInfty, SelfSimilarTailCapturesInverseEpsilon) {
  // sigma = |x|^{eps - 1}: the constant grows like 1/eps only when the
  // maximal function is continued below the mesh.
  const auto sys = RootSystem::from_bounds(1, Rational(-1), Rational(1), 10);
  const CubeFamily F(sys, 10);
  std::vector<double> scaled;
  for (int j = 3; j <= 8; ++j) {
    const double eps = std::ldexp(1.0, -j);
    const auto s = discretize_power(eps - 1.0, sys);
    const double plain = a_infty_constant(s, F).value;
    const double tail = a_infty_constant(s, F, SelfSimilarTail{eps - 1.0}).value;
    EXPECT_GE(tail, plain);
    scaled.push_back(tail * eps);
  }
  for (double v : scaled) {
    EXPECT_GT(v, 0.2 * scaled.back());
    EXPECT_LT(v, 5.0 * scaled.back());
  }
}

TEST(Muckenhoupt, SquareRootWeightPlateaus) {
  const auto sys = RootSystem::from_bounds(1, Rational(-1), Rational(1), 12);
  const auto w = discretize_power(0.5, sys);
  std::vector<double> c;
  for (int L = 4; L <= 12; L += 2) c.push_back(muckenhoupt_ap_constant(w, 2.0, CubeFamily(sys, L)).value);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i], c[i - 1]);
  EXPECT_LT((c.back() - c[c.size() - 2]) / c.back(), 1e-2);
}

TEST(Muckenhoupt, ProductWeightInAmq) {
  const auto sys = RootSystem::unit(1, 10);
  const auto e = ex(1, Rational(1, 2), {Rational(4, 3), Rational(4)});
  const auto wv = random_vector(e, sys, 3, 1);
  const double s = e.m() * e.q();
  const double c8 = muckenhoupt_ap_constant(wv.u(), s, CubeFamily(sys, 8)).value;
  const double c10 = muckenhoupt_ap_constant(wv.u(), s, CubeFamily(sys, 10)).value;
  EXPECT_TRUE(std::isfinite(c10));
  EXPECT_LE(c8, c10);
  for (int i = 0; i < 2; ++i) {
    EXPECT_TRUE(std::isfinite(muckenhoupt_ap_constant(wv.sigma(i), e.m() * e.p_conjugate(i), CubeFamily(sys, 10)).value));
  }
}

TEST(ReverseHolder, RandomStepWeights) {
  const auto sys = RootSystem::unit(1, 8);
  const CubeFamily F(sys, 8);
  for (std::uint64_t k = 0; k < 20; ++k) {
    auto rng = case_rng(41, k);
    const auto w = random_step_weight(sys, rng);
    const auto rh = reverse_holder_check(w, F);
    EXPECT_GT(rh.r, 1.0);
    EXPECT_LE(rh.worst_ratio, 2.0) << "seed 41 case " << k << " at " << to_string(rh.cube);
  }
}

TEST(Holder, HoldsPerCube) {
  const auto sys = RootSystem::unit(1, 6);
  const CubeFamily F(sys, 6);
  const auto e = ex(1, Rational(1, 2), {Rational(4, 3), Rational(4)});
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto rep = holder_identity_check(random_vector(e, sys, 53, k), F);
    EXPECT_TRUE(rep.holds) << rep.worst_ratio << " at " << to_string(rep.cube);
    EXPECT_EQ(rep.checked, F.size());
  }
  const auto ones = holder_identity_check(WeightVector::ones(e, sys), F);
  EXPECT_NEAR(ones.worst_ratio, 1.0, 1e-14);
}

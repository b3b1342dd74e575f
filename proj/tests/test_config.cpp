#include <gtest/gtest.h>

#include "dyadic/config.hpp"

using namespace dyadic;

namespace {

const char* kValid = R"(# bilinear run
n = 1
m = 2
alpha = 1/2
p = 4/3, 4
eps_list = 2^-3..2^-6
mesh_level = 8
root = -1:1
scan_level = 7
seed = 42
format = json
)";

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalFileDerivesQ) {
  const auto c = parse_config(kValid);
  EXPECT_EQ(c.m, 2);
  EXPECT_EQ(c.p, (std::vector<Rational>{Rational(4, 3), Rational(4)}));
  EXPECT_EQ(c.exponents().q_exact(), Rational(2));
  EXPECT_EQ(c.eps, (std::vector<double>{0.125, 0.0625, 0.03125, 0.015625}));
  EXPECT_EQ(c.root_lo, Rational(-1));
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.format, OutputFormat::Json);
  const auto cfg = c.experiment(Theorem::T1);
  EXPECT_EQ(cfg.mesh_level, 8);
  EXPECT_EQ(cfg.scan(), 7);
}

TEST(Config, InconsistentQNamesHomogeneity) {
  const auto msg = message_of(std::string(kValid) + "q = 3\n");
  EXPECT_NE(msg.find("homogeneity"), std::string::npos) << msg;
}

TEST(Config, TwoWeightModeAcceptsLargerQ) {
  const auto c = parse_config(std::string(kValid) + "q = 5\nmode = two-weight\n");
  EXPECT_EQ(c.exponents().mode(), WeightMode::TwoWeight);
  EXPECT_EQ(c.exponents().q_exact(), Rational(5));
  EXPECT_NE(message_of(std::string(kValid) + "mode = two-weight\n").find("explicit q"), std::string::npos);
}

TEST(Config, EveryProblemIsListed) {
  const std::string text = "n = 1\nm = two\nalpha = 1/2\np = 2,2\ncolour = red\nseed = 1\nseed = 2\nformat = xml\n";
  const auto msg = message_of(text);
  for (const char* needle : {"unknown key 'colour'", "duplicate key 'seed'", "missing key 'root'",
                             "missing key 'eps_list'", "m:", "format:"}) {
    EXPECT_NE(msg.find(needle), std::string::npos) << needle << "\n" << msg;
  }
}

TEST(Config, ValueParsers) {
  EXPECT_EQ(parse_eps_list("2^-1, 1/8,0.5"), (std::vector<double>{0.5, 0.125, 0.5}));
  EXPECT_EQ(parse_eps_list("2^-2..2^-1"), (std::vector<double>{0.25, 0.5}));
  EXPECT_THROW(parse_eps_list("1/2..2^-3"), ConfigError);
  EXPECT_THROW(parse_root("1:1"), ConfigError);
  EXPECT_THROW(parse_root("0,1"), ConfigError);
  EXPECT_THROW(parse_mode("mixed"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/run.cfg"), ConfigError);
}

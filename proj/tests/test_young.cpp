#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "ocap/conditions.hpp"
#include "ocap/young.hpp"

using namespace ocap;

namespace {

std::vector<YoungSpec> builtin_families() {
  return {YoungSpec::power(1.5),          YoungSpec::power(2.0),         YoungSpec::power(3.0),
          YoungSpec::power_log(2.0, 1.0), YoungSpec::power_log(1.5, 0.5), YoungSpec::exp_log(2.0, 0.5),
          YoungSpec::exp_log(2.0, 0.0),   YoungSpec::exp_loglog(2.0, 1.0, 0.0),
          YoungSpec::exp_loglog(2.5, 0.5, 0.9)};
}

double central_difference(const YoungSpec& s, double t, double h = 1e-6) {
  return (s.value(t + h) - s.value(t - h)) / (2.0 * h);
}

}  // namespace

TEST(YoungEval, PowerSquare) { EXPECT_EQ(YoungSpec::power(2).value(3.0), 9.0); }

TEST(YoungEval, PowerLogAtZero) { EXPECT_EQ(YoungSpec::power_log(2, 1).value(0.0), 0.0); }

TEST(YoungEval, PowerLogAtOneMatchesIntegratedDensity) {
  auto s = YoungSpec::power_log(2, 1);
  // Integrate a numerically differentiated Phi from 0 to 1.
  double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double t) { return central_difference(s, std::max(t, 1e-6)); }, 0.0, 1.0, 15, 1e-12);
  EXPECT_NEAR(s.value(1.0), std::log(std::numbers::e + 1.0), 1e-15);
  EXPECT_NEAR(s.value(1.0), 1.31326, 1e-5);
  EXPECT_NEAR(integral, s.value(1.0), 1e-8);
}

TEST(YoungEval, Derivatives) {
  EXPECT_EQ(YoungSpec::power(2).derivative(3.0), 6.0);
  EXPECT_DOUBLE_EQ(YoungSpec::power(3).derivative(1.0), 3.0);
  auto s = YoungSpec::power_log(2, 1);
  double expected = 2.0 * std::log(std::numbers::e + 1.0) + 1.0 / (std::numbers::e + 1.0);
  EXPECT_NEAR(s.derivative(1.0), expected, 1e-14);
  EXPECT_NEAR(s.derivative(1.0), 2.8955, 1e-4);
  EXPECT_NEAR(s.derivative(1.0), central_difference(s, 1.0), 1e-6);
}

TEST(YoungEval, ClosedFormDerivativesMatchFiniteDifferences) {
  for (const auto& s : builtin_families())
    for (double t : {0.01, 0.3, 1.0, 7.0, 40.0})
      EXPECT_NEAR(s.derivative(t), central_difference(s, t, 1e-6 * std::max(1.0, t)),
                  1e-6 * std::max(1.0, s.derivative(t)))
          << to_string(s.family()) << " t=" << t;
}

TEST(YoungEval, RejectsOutOfRangeParameters) {
  EXPECT_THROW(YoungSpec::power(1.0), ConfigError);
  EXPECT_THROW(YoungSpec::power(0.5), ConfigError);
  EXPECT_THROW(YoungSpec::power_log(2.0, -1.0), ConfigError);
  EXPECT_THROW(YoungSpec::exp_log(2.0, 1.0), ConfigError);
  EXPECT_THROW(YoungSpec::exp_loglog(2.0, 1.0, 1.0), ConfigError);
  EXPECT_THROW(YoungSpec::exp_loglog(2.0, 1.0, 0.5, 2.0), ConfigError);
  EXPECT_THROW(parse_family("gaussian"), ConfigError);
}

TEST(YoungInvariants, ConvexityOnRandomTriples) {
  std::mt19937_64 gen(20261015);
  std::uniform_real_distribution<double> pos(0.0, 1e6), w(0.0, 1.0);
  for (const auto& s : builtin_families()) {
    for (int k = 0; k < 10000; ++k) {
      double a = pos(gen), b = pos(gen), l = w(gen);
      double lhs = s.value(l * a + (1 - l) * b);
      double rhs = l * s.value(a) + (1 - l) * s.value(b);
      ASSERT_LE(lhs, rhs + 1e-10 * std::max(1.0, rhs)) << to_string(s.family());
      double mid = s.value(0.5 * (a + b)), avg = 0.5 * (s.value(a) + s.value(b));
      ASSERT_LE(mid, avg + 1e-10 * std::max(1.0, avg)) << to_string(s.family());
    }
  }
}

TEST(YoungInvariants, ZeroIncreasingAndLimits) {
  for (const auto& s : builtin_families()) {
    EXPECT_EQ(s.value(0.0), 0.0);
    double prev_value = 0.0, prev_slope = 0.0;
    for (int k = -8; k <= 8; ++k) {
      double t = std::pow(10.0, k);
      double v = s.value(t);
      EXPECT_GT(v, prev_value);
      EXPECT_GT(v / t, prev_slope);  // Phi(t)/t increasing: -> 0 at 0, -> inf at inf
      prev_value = v;
      prev_slope = v / t;
    }
    EXPECT_LT(s.value(1e-8) / 1e-8, 1e-3);
    EXPECT_LT(1e8 / s.value(1e8), 1e-3);
  }
}

TEST(YoungInvariants, DeltaTwoPlusImpliesDeltaTwo) {
  for (const auto& s : builtin_families()) {
    if (check_delta2_plus(s).pass) {
      EXPECT_TRUE(check_delta2(s).pass) << to_string(s.family());
    }
  }
}

TEST(FactoredPair, ProductReproducesPhi) {
  for (const auto& s : builtin_families()) {
    auto pair = factor_pair(s);
    for (int k = -40; k <= 40; ++k) {
      double t = std::pow(10.0, k / 5.0);
      EXPECT_NEAR(pair.Phi(t), s.value(t), 1e-12 * s.value(t));
    }
  }
}

TEST(FactoredPair, PsiIncreasing) {
  for (const auto& s : builtin_families()) {
    auto Psi = derived_Psi(s);
    double prev = 0.0;
    for (int k = -40; k <= 40; ++k) {
      double v = Psi(std::pow(10.0, k / 5.0));
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(DerivePsi, ConstantFactor) {
  auto psi = derive_psi([](double) { return 1.0; });
  for (double t : {1e-6, 1.0, 1e6}) EXPECT_EQ(psi(t), 1.0);
}

TEST(DerivePsi, LogFactorMatchesClosedForm) {
  for (double theta : {0.5, 1.0, 2.0}) {
    auto s = YoungSpec::power_log(2.0, theta);
    auto psi = factor_pair(s).psi_part;
    for (double t : {1e-4, 0.1, 1.0, 10.0, 1e5})
      EXPECT_NEAR(psi(t), std::pow(std::log(std::numbers::e + 1.0 / t), -theta), 1e-14);
  }
}

TEST(DerivePsi, ExpLogFactorMatchesClosedForm) {
  auto s = YoungSpec::exp_log(2.0, 0.5);
  auto psi = factor_pair(s).psi_part;
  for (double t : {1e-4, 0.1, 1.0, 10.0, 1e5})
    EXPECT_NEAR(psi(t), std::exp(-std::pow(std::log(std::numbers::e + 1.0 / t), 0.5)), 1e-14);
}

TEST(DerivePsi, VanishingFactorIsDomainError) {
  auto psi = derive_psi([](double t) { return t < 1.0 ? 0.0 : 1.0; });
  EXPECT_THROW(psi(2.0), std::domain_error);
  EXPECT_THROW(psi(0.0), std::domain_error);
  EXPECT_EQ(psi(0.5), 1.0);
}

TEST(YoungTable, ParsesAndInterpolates) {
  std::istringstream in("t,Phi\n# comment\n1,1\n2,4\n3,9\n");
  auto tab = YoungTable::from_csv(in);
  EXPECT_EQ(tab.value(0.0), 0.0);
  EXPECT_DOUBLE_EQ(tab.value(0.5), 0.5);
  EXPECT_DOUBLE_EQ(tab.value(1.5), 2.5);
  EXPECT_DOUBLE_EQ(tab.value(4.0), 14.0);  // last slope continues
  EXPECT_DOUBLE_EQ(tab.derivative(2.5), 5.0);
  auto spec = YoungSpec::custom(tab);
  EXPECT_FALSE(spec.has_factorization());
  EXPECT_EQ(spec.domain_limit(), 3.0);
  EXPECT_THROW(spec.factor(1.0), ConfigError);
}

TEST(YoungTable, RejectsBadTables) {
  EXPECT_THROW(YoungTable({1, 2, 3}, {1, 3, 4}), ConfigError);  // not convex
  EXPECT_THROW(YoungTable({1, 1}, {1, 2}), ConfigError);
  EXPECT_THROW(YoungTable({1, 2}, {2, 1}), ConfigError);
  std::istringstream bad("1,1\nx,y\n");
  EXPECT_THROW(YoungTable::from_csv(bad), ConfigError);
  EXPECT_THROW(YoungTable::from_csv_file("/nonexistent/table.csv"), IoError);
}

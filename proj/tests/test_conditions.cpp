#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "ocap/conditions.hpp"
#include "ocap/young.hpp"

using namespace ocap;

namespace {

double L(double t) { return std::log(std::numbers::e + t); }

const Criterion& criterion(const ConditionReport& r, const std::string& name) {
  for (const auto& c : r.criteria)
    if (c.name == name) return c;
  throw std::runtime_error("missing criterion " + name);
}

}  // namespace

TEST(Delta2, PowerIsExactlyTwoToP) {
  auto r = check_delta2(YoungSpec::power(2));
  EXPECT_EQ(r.constant, 4.0);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.grid_shrunk);
}

TEST(Delta2, ExponentialFailsAndShrinksGrid) {
  auto r = check_delta2([](double t) { return std::expm1(t); }, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.bounded);
  EXPECT_TRUE(r.grid_shrunk);

  std::vector<double> t, v;
  for (int k = 1; k <= 400; ++k) {
    t.push_back(0.125 * k);
    v.push_back(std::expm1(0.125 * k));
  }
  auto tab = check_delta2(YoungSpec::custom(YoungTable(t, v)));
  EXPECT_FALSE(tab.pass);
  EXPECT_TRUE(tab.grid_shrunk);
}

TEST(Delta2, PowerLogBoundedByEight) {
  auto r = check_delta2(YoungSpec::power_log(2, 1));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.constant, 8.0);
  // Independent grid search of 4 L(2t) / L(t) at 200 points per decade.
  double best = 0.0;
  for (int k = -1600; k <= 1600; ++k) {
    double s = std::pow(10.0, k / 200.0);
    best = std::max(best, 4.0 * L(2 * s) / L(s));
  }
  EXPECT_NEAR(r.constant, best, 1e-3);
}

TEST(Delta2Plus, ExampleFamilyPasses) {
  auto r = check_delta2_plus(YoungSpec::exp_loglog(2.0, 1.0, 0.0));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.criteria.size(), 6u);
}

TEST(Delta2Plus, PurePowerHasZeroElasticity) {
  auto r = check_delta2_plus(YoungSpec::power(2));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(criterion(r, "elasticity_sup").value, 0.0);
}

TEST(Delta2Plus, LinearFactorFailsTailCriterion) {
  auto r = check_delta2_plus(
      2.0, [](double t) { return t; }, [](double) { return 1.0; });
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(criterion(r, "elasticity_tail").pass);
  EXPECT_NEAR(criterion(r, "elasticity_tail").value, 1.0, 1e-12);
}

TEST(Delta2Plus, ParameterRangeFamiliesPass) {
  for (double theta : {0.0, 0.5, 1.0}) EXPECT_TRUE(check_delta2_plus(YoungSpec::power_log(2, theta)).pass);
  for (double gamma : {0.0, 0.5, 0.9}) EXPECT_TRUE(check_delta2_plus(YoungSpec::exp_loglog(2, 0, gamma)).pass);
  EXPECT_TRUE(check_delta2_plus(YoungSpec::exp_log(2, 0.0)).pass);
}

TEST(Delta2Plus, ExpLogWithPositiveThetaBreaksSquareComparability) {
  // phi(t^2)/phi(t) = exp(L(t^2)^theta - L(t)^theta) is unbounded.
  auto r = check_delta2_plus(YoungSpec::exp_log(2, 0.5));
  EXPECT_FALSE(criterion(r, "square_comparability").pass);
  double q = std::exp(std::pow(L(1e16), 0.5) - std::pow(L(1e8), 0.5));
  EXPECT_GT(q, 5.0);
}

TEST(Delta2Plus, CustomTableHasNoFactorization) {
  auto spec = YoungSpec::custom(YoungTable({1, 2}, {1, 4}));
  EXPECT_THROW(check_delta2_plus(spec), ConfigError);
}

TEST(Submultiplicative, PowerIsExactlyOne) {
  for (double p : {1.1, 2.0, 2.5, 3.7, 5.9}) {
    auto r = check_submultiplicative_f([p](double t) { return std::pow(t, p); });
    EXPECT_NEAR(r.constant, 1.0, 1e-12) << p;
    EXPECT_TRUE(r.pass);
  }
  auto sq = check_submultiplicative_f([](double t) { return t * t; });
  EXPECT_NEAR(sq.constant, 1.0, 1e-14);
}

TEST(Submultiplicative, PowerTimesLogReportsFiniteConstantAndGrowth) {
  auto f = [](double t) { return t * t * L(t); };
  auto r = check_submultiplicative_f(f);
  EXPECT_TRUE(std::isfinite(r.constant));
  EXPECT_GT(r.constant, 1.0);
  // Along st = 1 the ratio is L(s) L(1/s) / L(1), which grows without bound.
  EXPECT_GT(L(1e8) * L(1e-8) / L(1.0), 2.0 * L(1e4) * L(1e-4) / L(1.0) - 1.0);
  EXPECT_FALSE(r.bounded);
}

TEST(Submultiplicative, ZeroDenominatorIsWitnessedFailure) {
  auto step = check_submultiplicative_f([](double t) { return t >= 1e-3 ? 1.0 : 0.0; });
  EXPECT_FALSE(step.pass);
  EXPECT_TRUE(std::isinf(step.constant));
  EXPECT_LT(step.witness_s * step.witness_t, 1e-3);
}

TEST(Pairing, ConstantsGiveOne) {
  auto r = check_pairing([](double) { return 1.0; }, [](double) { return 1.0; });
  EXPECT_EQ(r.constant, 1.0);
  EXPECT_TRUE(r.pass);
}

TEST(Pairing, LogWithReciprocalLogPasses) {
  auto r = check_pairing(L, [](double t) { return 1.0 / L(1.0 / t); });
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(std::isfinite(r.constant));
}

TEST(Pairing, LogWithLogFails) {
  auto r = check_pairing(L, L);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.bounded);
}

TEST(Pairing, DerivedPsiPassesForConcreteFamilies) {
  std::vector<YoungSpec> fam{YoungSpec::power_log(2, 0.5), YoungSpec::power_log(2, 1), YoungSpec::power_log(2, 3),
                             YoungSpec::exp_loglog(2, 0, 0.5), YoungSpec::exp_log(2, 0.25),
                             YoungSpec::exp_log(2, 0.5)};
  for (const auto& s : fam) {
    auto pair = factor_pair(s);
    auto r = check_pairing(pair.phi_part, pair.psi_part);
    EXPECT_TRUE(r.pass) << to_string(s.family()) << " theta=" << s.theta();
    EXPECT_TRUE(std::isfinite(r.constant));
    EXPECT_TRUE(check_submultiplicative_f(pair.f_part).pass);
  }
}

TEST(Conditions, CeilingIsApplied) {
  CheckOptions opt;
  opt.ceiling = 3.0;
  EXPECT_FALSE(check_delta2(YoungSpec::power(2), opt).pass);
  opt.ceiling = 4.0;
  EXPECT_TRUE(check_delta2(YoungSpec::power(2), opt).pass);
}

TEST(Conditions, ShortGridRejected) {
  CheckOptions opt;
  opt.grid.lo = 1e-3;
  opt.grid.hi = 1e3;
  EXPECT_THROW(check_delta2(YoungSpec::power(2), opt), ConfigError);
}

TEST(Conditions, Deterministic) {
  auto a = check_pairing(L, L);
  auto b = check_pairing(L, L);
  EXPECT_EQ(a.constant, b.constant);
  EXPECT_EQ(a.witness_s, b.witness_s);
  EXPECT_EQ(a.witness_t, b.witness_t);
}

TEST(Conditions, IncreasingOnGrid) {
  EXPECT_TRUE(increasing_on_grid([](double t) { return t * t; }));
  EXPECT_FALSE(increasing_on_grid([](double t) { return std::sin(t); }));
}

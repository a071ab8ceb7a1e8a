#include <cmath>
#include <numbers>
#include <thread>

#include <gtest/gtest.h>

#include "ocap/capacity.hpp"
#include "ocap/parallel.hpp"

using namespace ocap;

namespace {

constexpr double pi = std::numbers::pi;

// Condenser capacity of B_r in B_R for Phi = t^p, from the radial p-harmonic profile.
double power_ball_capacity(double p, int n, double r, double R) {
  double omega = n == 2 ? 2 * pi : 4 * pi;
  if (p == n) return omega * std::pow(std::log(R / r), 1 - p);
  double a = (p - n) / (p - 1);
  return omega * std::pow(std::abs(std::pow(R, a) - std::pow(r, a)) / std::abs(a), 1 - p);
}

SetMask ball(const DomainPtr& dom, double r, Point c = {0, 0, 0}) { return SetMask::ball(dom, c, r); }

}  // namespace

TEST(RadialOracle, MatchesClosedForms) {
  EXPECT_NEAR(capacity_ball_radial(0.25, YoungSpec::power(2), 1.0, 2), 2 * pi / std::log(4.0), 1e-6);
  EXPECT_NEAR(capacity_ball_radial(0.25, YoungSpec::power(2), 1.0, 3), 4 * pi * 0.25 / 0.75, 1e-6);
  for (auto [p, n] : {std::pair{3.0, 2}, std::pair{3.0, 3}, std::pair{1.5, 2}, std::pair{2.5, 3}}) {
    double ref = power_ball_capacity(p, n, 0.3, 1.0);
    EXPECT_NEAR(capacity_ball_radial(0.3, YoungSpec::power(p), 1.0, n), ref, 1e-6 * ref) << p << ' ' << n;
  }
  double thin = 2 * pi / std::log(1.0 / 0.9);
  EXPECT_NEAR(capacity_ball_radial(0.9, YoungSpec::power(2), 1.0, 2), thin, 1e-6 * thin);
  EXPECT_THROW(capacity_ball_radial(1.0, YoungSpec::power(2), 1.0, 2), ConfigError);
}

TEST(Capacity, EmptySetIsZero) {
  auto dom = GridDomain::build(2, 1.0, 64);
  auto r = capacity_variational(SetMask(dom), YoungSpec::power(2));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.minimizer.is_zero());
}

TEST(Capacity, PowerTwoBallAgainstLogFormula) {
  auto dom = GridDomain::build(2, 1.0, 128);
  auto r = capacity_variational(ball(dom, 0.25), YoungSpec::power(2));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.method, "variational_descent_ldlt");
  EXPECT_NEAR(r.value, 2 * pi / std::log(4.0), 0.02 * 2 * pi / std::log(4.0));
}

TEST(Capacity, ThinCondenser) {
  auto dom = GridDomain::build(2, 1.0, 128);
  double ref = 2 * pi / std::log(1.0 / 0.9);
  auto r = capacity_variational(ball(dom, 0.9), YoungSpec::power(2));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, ref, 0.1 * ref);
}

TEST(Capacity, PowerLogAgainstRadialOracle) {
  auto dom = GridDomain::build(2, 1.0, 128);
  auto spec = YoungSpec::power_log(2, 1);
  double ref = capacity_ball_radial(0.25, spec, 1.0, 2);
  auto r = capacity_variational(ball(dom, 0.25), spec);
  EXPECT_NEAR(r.value, ref, 0.05 * ref);
}

TEST(Capacity, MinimizerInvariants) {
  auto dom = GridDomain::build(2, 1.0, 64);
  auto spec = YoungSpec::power_log(2, 1);
  auto E = ball(dom, 0.2, {0.1, -0.05, 0});
  auto r = capacity_variational(E, spec);
  for (std::size_t i = 0; i < dom->size(); ++i) {
    EXPECT_GE(r.minimizer[i], -1e-12);
    EXPECT_LE(r.minimizer[i], 1.0 + 1e-12);
    if (E[i]) {
      EXPECT_EQ(r.minimizer[i], 1.0);
    }
    if (!dom->interior(i)) {
      EXPECT_EQ(r.minimizer[i], 0.0);
    }
  }
  EXPECT_EQ(r.value, phi_energy(r.minimizer, spec));
  // Any admissible competitor has at least the minimal energy.
  auto competitor = GridFunction::sample(dom, [](const Point& x) {
    double d = std::hypot(x[0] - 0.1, x[1] + 0.05);
    return std::clamp((0.8 - d) / 0.6, 0.0, 1.0);
  });
  for (std::size_t i = 0; i < dom->size(); ++i)
    if (E[i]) competitor[i] = 1.0;
  EXPECT_LE(r.value, phi_energy(competitor, spec));
}

TEST(Capacity, MonotoneAndSubadditive) {
  auto dom = GridDomain::build(2, 1.0, 64);
  auto spec = YoungSpec::power(2);
  auto A = ball(dom, 0.15, {0.2, 0, 0}), B = ball(dom, 0.15, {-0.25, 0.1, 0});
  auto big = ball(dom, 0.25, {0.2, 0, 0});
  double cA = capacity_variational(A, spec).value, cB = capacity_variational(B, spec).value;
  double cU = capacity_variational(A.united(B), spec).value;
  double cBig = capacity_variational(big, spec).value;
  EXPECT_LE(cA, cBig * (1 + 1e-6));
  EXPECT_LE(cA, cU * (1 + 1e-6));
  EXPECT_LE(cU, (cA + cB) * (1 + 1e-6));
}

TEST(Capacity, ReportsNonConvergence) {
  auto dom = GridDomain::build(2, 1.0, 64);
  SolverOptions opt;
  opt.max_iterations = 1;
  auto r = capacity_variational(ball(dom, 0.25), YoungSpec::power_log(2, 1), opt);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
}

TEST(Capacity, Errors) {
  auto dom = GridDomain::build(2, 1.0, 64);
  EXPECT_THROW(capacity_variational(ball(dom, 0.99), YoungSpec::power(2)), ConfigError);
  std::vector<double> t, v;
  for (int k = 1; k <= 400; ++k) {
    t.push_back(0.125 * k);
    v.push_back(std::expm1(0.125 * k));
  }
  EXPECT_THROW(capacity_variational(ball(dom, 0.25), YoungSpec::custom(YoungTable(t, v))), ConfigError);
}

TEST(Capacity, CgAgreesWithDirect) {
  auto dom = GridDomain::build(2, 1.0, 64);
  auto spec = YoungSpec::power_log(2, 1);
  SolverOptions cg;
  cg.linear_solver = LinearSolver::cg;
  auto a = capacity_variational(ball(dom, 0.25), spec);
  auto b = capacity_variational(ball(dom, 0.25), spec, cg);
  EXPECT_EQ(b.method, "variational_descent_pcg");
  EXPECT_NEAR(a.value, b.value, 1e-4 * a.value);
}

TEST(Capacity, ThreeDimensionalBall) {
  auto dom = GridDomain::build(3, 1.0, 48);
  auto r = capacity_variational(ball(dom, 0.25), YoungSpec::power(2));
  double ref = 4 * pi * 0.25 / 0.75;
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.method, "variational_descent_pcg");
  EXPECT_NEAR(r.value, ref, 0.08 * ref);
}

TEST(Capacity, CacheMemoizesAndIsThreadSafe) {
  auto dom = GridDomain::build(2, 1.0, 48);
  CapacityCache<YoungSpec> cache(YoungSpec::power(2));
  std::vector<SetMask> sets;
  for (int k = 0; k < 6; ++k) sets.push_back(ball(dom, 0.1 + 0.05 * (k % 3)));
  std::vector<double> par(sets.size());
  parallel_for(sets.size(), 4, [&](std::size_t i) { par[i] = cache(sets[i]); });
  EXPECT_EQ(cache.size(), 3u);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ(par[i], par[i % 3]);
    EXPECT_EQ(par[i], capacity_variational(sets[i], YoungSpec::power(2)).value);
  }
}

TEST(BallEstimate, PowerIsReciprocalLog) {
  auto b = ball_capacity_estimate(0.25, YoungSpec::power(2), 1.0, 2);
  EXPECT_NEAR(b.F_value, std::log(4.0), 1e-10);
  EXPECT_NEAR(b.estimate, 1.0 / std::log(4.0), 1e-10);
  auto b3 = ball_capacity_estimate(0.1, YoungSpec::power(3), 1.0, 3);
  EXPECT_NEAR(b3.estimate, std::pow(std::log(10.0), -2.0), 1e-10);
}

TEST(BallEstimate, Errors) {
  EXPECT_THROW(ball_capacity_estimate(0.6, YoungSpec::power(2), 1.0, 2), ConfigError);
  EXPECT_THROW(ball_capacity_estimate(0.2, YoungSpec::power(3), 1.0, 2), ConfigError);
  EXPECT_THROW(ball_capacity_estimate(0.2, YoungSpec::exp_log(2, 0.5), 1.0, 2), ConfigError);
}

#ifndef OCAP_TESTFUNCTIONS_HPP
#define OCAP_TESTFUNCTIONS_HPP

// Compactly supported test functions, scaled so the grid maximum is lambda.
// Lengths are given as fractions of the domain radius R.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ocap/error.hpp"
#include "ocap/grid.hpp"

namespace ocap {

enum class Shape { tent, bump, plateau, two_peak, random_smooth };

inline std::string to_string(Shape s) {
  switch (s) {
    case Shape::tent: return "tent";
    case Shape::bump: return "bump";
    case Shape::plateau: return "plateau";
    case Shape::two_peak: return "two_peak";
    case Shape::random_smooth: return "random_smooth";
  }
  return "?";
}

inline Shape parse_shape(const std::string& s) {
  if (s == "tent") return Shape::tent;
  if (s == "bump") return Shape::bump;
  if (s == "plateau") return Shape::plateau;
  if (s == "two_peak") return Shape::two_peak;
  if (s == "random_smooth") return Shape::random_smooth;
  throw ConfigError("unknown test function shape '" + s + "'");
}

struct TestFunctionSpec {
  Shape shape = Shape::tent;
  double lambda = 1.0;
  double r = 0.5;      // tent radius
  double sigma = 0.5;  // bump radius
  double r_in = 0.2;   // plateau
  double r_out = 0.5;
  std::uint64_t seed = 1;

  std::string tag() const {
    std::string t = to_string(shape);
    if (shape == Shape::random_smooth) t += "_" + std::to_string(seed);
    return t;
  }
};

// The five-shape suite.
inline std::vector<TestFunctionSpec> default_suite(std::uint64_t seed = 1) {
  std::vector<TestFunctionSpec> s(5);
  s[0].shape = Shape::tent;
  s[1].shape = Shape::bump;
  s[2].shape = Shape::plateau;
  s[3].shape = Shape::two_peak;
  s[4].shape = Shape::random_smooth;
  s[4].seed = seed;
  return s;
}

namespace detail {

inline double radius_of(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

inline double tent_at(const Point& x, const Point& c, double r) {
  Point d{x[0] - c[0], x[1] - c[1], x[2] - c[2]};
  return std::max(0.0, 1.0 - radius_of(d) / r);
}

inline double bump_at(double rho, double sigma) {
  double s = rho / sigma;
  return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
}

// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace detail

// Unscaled profile (arbitrary maximum); lengths already in domain units.
inline std::function<double(const Point&)> test_profile(const TestFunctionSpec& spec, double R, int n) {
  using detail::radius_of;
  switch (spec.shape) {
    case Shape::tent: {
      double r = spec.r * R;
      return [r](const Point& x) { return detail::tent_at(x, {0, 0, 0}, r); };
    }
    case Shape::bump: {
      double s = spec.sigma * R;
      return [s](const Point& x) { return detail::bump_at(radius_of(x), s); };
    }
    case Shape::plateau: {
      double a = spec.r_in * R, b = spec.r_out * R;
      if (!(a > 0.0 && b > a)) throw ConfigError("plateau: need 0 < r_in < r_out");
      return [a, b](const Point& x) {
        double rho = radius_of(x);
        return rho <= a ? 1.0 : std::max(0.0, (b - rho) / (b - a));
      };
    }
    case Shape::two_peak: {
      double off = 0.3 * R, r = 0.25 * R;
      return [off, r](const Point& x) {
        return std::max(detail::tent_at(x, {-off, 0, 0}, r), 0.5 * detail::tent_at(x, {off, 0, 0}, r));
      };
    }
    case Shape::random_smooth: {
      std::mt19937_64 gen(spec.seed);
      struct G {
        Point c;
        double w, a;
      };
      std::vector<G> gs(4);
      for (auto& g : gs) {
        double rad = 0.3 * R * detail::uniform01(gen);
        double ang = 2.0 * std::numbers::pi * detail::uniform01(gen);
        double z = n == 3 ? 0.3 * R * (2.0 * detail::uniform01(gen) - 1.0) : 0.0;
        g.c = {rad * std::cos(ang), rad * std::sin(ang), z};
        g.w = R * (0.08 + 0.07 * detail::uniform01(gen));
        g.a = 0.5 + 0.5 * detail::uniform01(gen);
      }
      double cut = 0.6 * R;
      return [gs, cut](const Point& x) {
        double s = 0.0;
        for (const auto& g : gs) {
          Point d{x[0] - g.c[0], x[1] - g.c[1], x[2] - g.c[2]};
          double q = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
          s += g.a * std::exp(-q / (2.0 * g.w * g.w));
        }
        return s * detail::bump_at(radius_of(x), cut);
      };
    }
  }
  throw ConfigError("unknown test function shape");
}

inline GridFunction make_test_function(DomainPtr dom, const TestFunctionSpec& spec) {
  auto f = test_profile(spec, dom->radius(), dom->dim());
  GridFunction u = GridFunction::sample(dom, f);
  double m = u.max_abs();
  if (m == 0.0) throw ConfigError("test function vanishes on the grid");
  u = u.scaled(spec.lambda / m);
  if (!support_mask(u).respects_margin())
    throw ConfigError("test function support reaches the boundary band");
  return u;
}

}  // namespace ocap

#endif  // OCAP_TESTFUNCTIONS_HPP

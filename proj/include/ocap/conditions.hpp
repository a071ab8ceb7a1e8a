#ifndef OCAP_CONDITIONS_HPP
#define OCAP_CONDITIONS_HPP

// Grid certification of the structural conditions on Young functions:
// doubling, the Delta_2^+ block on the factor phi, sub-multiplicativity of f
// and the phi/psi pairing. A supremum over (0, inf) is not computable, so a
// report carries the grid maximum plus a trend verdict: a ratio whose maximum
// is pushed up by more than a relative tolerance when the last three decades
// of the grid are added (at either end, for two-sided conditions) is declared
// unbounded.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ocap/error.hpp"
#include "ocap/young.hpp"

namespace ocap {

struct LogGrid {
  double lo = 1e-8;
  double hi = 1e8;
  int per_decade = 64;

  double decades() const { return std::log10(hi / lo); }

  std::vector<double> points() const {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1)
      throw ConfigError("LogGrid: need 0 < lo < hi and per_decade >= 1");
    auto count = static_cast<std::size_t>(std::llround(decades() * per_decade));
    std::vector<double> pts(count + 1);
    for (std::size_t i = 0; i <= count; ++i)
      pts[i] = lo * std::pow(10.0, static_cast<double>(i) / per_decade);
    pts.back() = hi;
    return pts;
  }

  std::size_t trend_window() const { return static_cast<std::size_t>(3 * per_decade); }
};

struct Criterion {
  std::string name;
  double value = 0.0;
  bool pass = false;
};

struct ConditionReport {
  std::string condition;
  double constant = 0.0;  // best empirical constant over the grid
  double witness_s = std::numeric_limits<double>::quiet_NaN();
  double witness_t = std::numeric_limits<double>::quiet_NaN();
  bool bounded = true;
  bool pass = false;
  double ceiling = std::numeric_limits<double>::infinity();
  LogGrid grid;
  bool grid_shrunk = false;
  std::vector<Criterion> criteria;
};

struct CheckOptions {
  LogGrid grid;
  double ceiling = std::numeric_limits<double>::infinity();
  // Relative rise over the trend window that counts as growth.
  double growth_tolerance = 1e-2;
};

namespace detail {

inline double finite_max(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (std::isnan(x)) continue;
    m = std::max(m, x);
  }
  return m;
}

// The last `window` points raise the running maximum by more than tol
// (relative). Non-finite values in the window count as growth.
inline bool grows_at_end(std::span<const double> v, std::size_t window, double tol) {
  if (v.size() <= window) return false;
  auto head = v.first(v.size() - window);
  double all = finite_max(v);
  if (!std::isfinite(all)) return true;
  double inner = finite_max(head);
  return all > inner * (1.0 + tol) && all > inner + 1e-300;
}

// Two-sided version: trims `window` points off both ends at once, so that a
// ratio unbounded at one end is not masked by a large value at the other.
inline bool grows_at_either_end(std::span<const double> v, std::size_t window, double tol) {
  if (v.size() <= 2 * window) return false;
  double all = finite_max(v);
  if (!std::isfinite(all)) return true;
  double inner = finite_max(v.subspan(window, v.size() - 2 * window));
  return all > inner * (1.0 + tol) && all > inner + 1e-300;
}

inline void require_span(const LogGrid& g) {
  if (g.decades() < 12.0 - 1e-9)
    throw ConfigError("condition grid must span at least 12 decades");
}

// max over the grid square of a(s) b(t) / c(st). Growth is tested by
// trimming three decades off every side and comparing the inner maximum with
// the full one.
inline ConditionReport product_ratio_check(std::string name, const ScalarFunction& a,
                                           const ScalarFunction& b, const ScalarFunction& c,
                                           const CheckOptions& opt) {
  require_span(opt.grid);
  ConditionReport rep;
  rep.condition = std::move(name);
  rep.grid = opt.grid;
  rep.ceiling = opt.ceiling;
  const auto pts = opt.grid.points();
  const std::size_t m = pts.size();
  const std::size_t w = std::min(opt.grid.trend_window(), m - 1);
  std::vector<double> as(m), bt(m);
  for (std::size_t i = 0; i < m; ++i) {
    as[i] = a(pts[i]);
    bt[i] = b(pts[i]);
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  double full = -inf, inner = -inf;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double num = as[i] * bt[j];
      double den = c(pts[i] * pts[j]);
      double r = den > 0.0 ? num / den : (num > 0.0 ? inf : 0.0);
      if (std::isnan(r)) continue;
      if (r > full) {
        full = r;
        rep.witness_s = pts[i];
        rep.witness_t = pts[j];
      }
      if (i >= w && i + w < m && j >= w && j + w < m) inner = std::max(inner, r);
    }
  }
  bool grew = !std::isfinite(full) || (full > inner * (1.0 + opt.growth_tolerance) && full > inner);
  rep.criteria.push_back({"edge_growth", full / inner, !grew});
  rep.bounded = !grew;
  rep.constant = full;
  rep.pass = rep.bounded && full <= opt.ceiling;
  return rep;
}

}  // namespace detail

// Phi(2t) <= C Phi(t). Past the overflow point (or the table end) the grid is
// cut and grid_shrunk is set.
inline ConditionReport check_delta2(const ScalarFunction& Phi, double domain_limit,
                                    const CheckOptions& opt = {}) {
  detail::require_span(opt.grid);
  ConditionReport rep;
  rep.condition = "delta2";
  rep.grid = opt.grid;
  rep.ceiling = opt.ceiling;
  std::vector<double> ratios;
  double best = 0.0;
  for (double t : opt.grid.points()) {
    double top = Phi(2.0 * t);
    if (2.0 * t > domain_limit || !std::isfinite(top)) {
      rep.grid_shrunk = true;
      break;
    }
    double r = top / Phi(t);
    ratios.push_back(r);
    rep.grid.hi = t;
    if (r > best) {
      best = r;
      rep.witness_t = t;
    }
  }
  if (ratios.empty()) throw NumericalError("check_delta2: no grid point survived overflow");
  rep.constant = best;
  bool grow = detail::grows_at_end(ratios, opt.grid.trend_window(), opt.growth_tolerance);
  rep.bounded = !grow && std::isfinite(best);
  rep.criteria.push_back({"growth_at_top", grow ? 1.0 : 0.0, !grow});
  rep.pass = rep.bounded && best <= opt.ceiling;
  return rep;
}

inline ConditionReport check_delta2(const YoungSpec& spec, const CheckOptions& opt = {}) {
  return check_delta2(as_function(spec), spec.domain_limit(), opt);
}

// Delta_2^+ block for Phi = t^p phi(t):
//   (i)   sup t phi'/phi < p
//   (ii)  phi' bounded
//   (iii) phi(t^2) comparable to phi(t)
//   (iv)  t phi'/phi decreasing toward 0 at the top of the grid
// plus phi positive and nondecreasing on the grid.
inline ConditionReport check_delta2_plus(double p, const ScalarFunction& phi,
                                         const ScalarFunction& phi_prime,
                                         const CheckOptions& opt = {}) {
  detail::require_span(opt.grid);
  ConditionReport rep;
  rep.condition = "delta2_plus";
  rep.grid = opt.grid;
  rep.ceiling = opt.ceiling;
  const auto pts = opt.grid.points();
  const auto w = opt.grid.trend_window();
  const std::size_t m = pts.size();

  std::vector<double> elasticity(m), dphi(m), comparability(m), value(m);
  double sup_el = 0.0, sup_d = 0.0, q_max = 0.0, q_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    double t = pts[i];
    value[i] = phi(t);
    dphi[i] = phi_prime(t);
    elasticity[i] = value[i] > 0.0 ? t * dphi[i] / value[i] : std::numeric_limits<double>::infinity();
    double q = phi(t * t) / value[i];
    comparability[i] = std::max(q, 1.0 / q);
    if (elasticity[i] > sup_el) {
      sup_el = elasticity[i];
      rep.witness_t = t;
    }
    sup_d = std::max(sup_d, dphi[i]);
    q_max = std::max(q_max, q);
    q_min = std::min(q_min, q);
  }

  bool positive_increasing = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(value[i] > 0.0)) positive_increasing = false;
    if (i > 0 && value[i] < value[i - 1] * (1.0 - 1e-14)) positive_increasing = false;
  }
  rep.criteria.push_back({"factor_positive_increasing", positive_increasing ? 1.0 : 0.0,
                          positive_increasing});

  rep.criteria.push_back({"elasticity_sup", sup_el, sup_el < p});
  rep.criteria.push_back({"elasticity_gap", p - sup_el, sup_el < p});

  bool d_grow = detail::grows_at_end(dphi, w, opt.growth_tolerance) || !std::isfinite(sup_d);
  rep.criteria.push_back({"derivative_sup", sup_d, !d_grow});

  bool q_grow = detail::grows_at_either_end(comparability, w, opt.growth_tolerance) ||
                !std::isfinite(q_max) || !(q_min > 0.0);
  rep.criteria.push_back({"square_comparability", q_max / q_min, !q_grow});

  // Identically zero elasticity (phi constant) trivially tends to 0.
  std::span<const double> el(elasticity);
  auto tail = el.subspan(m - std::min(w, m - 1) - 1);
  bool tail_ok = tail.back() <= 1e-12;
  if (!tail_ok) {
    bool nonincreasing = true;
    for (std::size_t i = 1; i < tail.size(); ++i)
      if (tail[i] > tail[i - 1] * (1.0 + 1e-12)) nonincreasing = false;
    tail_ok = nonincreasing && tail.back() < tail.front() * (1.0 - 1e-3);
  }
  rep.criteria.push_back({"elasticity_tail", tail.back(), tail_ok});

  rep.constant = sup_el;
  rep.bounded = !d_grow && !q_grow;
  rep.pass = std::all_of(rep.criteria.begin(), rep.criteria.end(),
                         [](const Criterion& c) { return c.pass; }) &&
             sup_el <= opt.ceiling;
  return rep;
}

inline ConditionReport check_delta2_plus(const YoungSpec& spec, const CheckOptions& opt = {}) {
  if (!spec.has_factorization())
    throw ConfigError("check_delta2_plus: Young function has no t^p factorization");
  return check_delta2_plus(
      spec.p(), [&spec](double t) { return spec.factor(t); },
      [&spec](double t) { return spec.factor_derivative(t); }, opt);
}

// f(s) f(t) <= C f(st).
inline ConditionReport check_submultiplicative_f(const ScalarFunction& f,
                                                 const CheckOptions& opt = {}) {
  return detail::product_ratio_check("submultiplicative_f", f, f, f, opt);
}

// phi(s) psi(t) <= C phi(st).
inline ConditionReport check_pairing(const ScalarFunction& phi, const ScalarFunction& psi,
                                     const CheckOptions& opt = {}) {
  return detail::product_ratio_check("pairing", phi, psi, phi, opt);
}

// Increasing on the grid; used as a precondition for Psi.
inline bool increasing_on_grid(const ScalarFunction& g, const LogGrid& grid = {}) {
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : grid.points()) {
    double v = g(t);
    if (!(v > prev) && !(v == prev && v == 0.0)) return false;
    prev = v;
  }
  return true;
}

}  // namespace ocap

#endif  // OCAP_CONDITIONS_HPP

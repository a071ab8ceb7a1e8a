#ifndef OCAP_RIESZ_HPP
#define OCAP_RIESZ_HPP

// Riesz capacity of a node set E:
//
//   R(E) = inf { sum_i w_i Phi(f_i) : f >= 0, (K f)_j >= 1 for j in E }
//
// with K_ji = w_i |x_j - x_i|^{1-n} off the diagonal and the integral of
// |y|^{1-n} over one cell on it. f lives on the nodes inside the ball.
//
// Solved through the dual: for multipliers mu >= 0 the inner minimizer is
// f_i = (Phi')^{-1}((K^T mu)_i / w_i), and the concave dual is maximized by
// projected accelerated ascent with backtracking and adaptive restart. The
// final density is scaled to be exactly feasible, so `value` is an upper
// bound and the duality gap bounds its error.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ocap/capacity.hpp"
#include "ocap/conditions.hpp"
#include "ocap/error.hpp"
#include "ocap/grid.hpp"
#include "ocap/young.hpp"

namespace ocap {

struct RieszOptions {
  double gap_tolerance = 1e-5;  // relative duality gap
  long max_iterations = 200000;
  std::size_t max_set_nodes = 4096;
};

struct RieszResult {
  double value = 0.0;
  double dual_value = 0.0;
  double relative_gap = 0.0;
  double min_constraint = 0.0;  // min_j (K f)_j after scaling
  GridFunction density;
  long iterations = 0;
  bool converged = true;
  std::string method = "riesz_dual_fista";

  nlohmann::ordered_json to_json() const {
    return {{"value", value},     {"iterations", iterations}, {"converged", converged},
            {"method", method},   {"dual_value", dual_value}, {"relative_gap", relative_gap}};
  }
};

// Integral of |y|^{1-n} over a cell of side h centred at the origin.
inline double riesz_cell_integral(int n, double h) {
  if (n == 2) return 4.0 * h * std::log(1.0 + std::numbers::sqrt2);
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [](double u) {
    return gauss_kronrod<double, 31>::integrate(
        [u](double v) { return 1.0 / (1.0 + u * u + v * v); }, -1.0, 1.0, 10, 1e-13);
  };
  double I = gauss_kronrod<double, 31>::integrate(inner, -1.0, 1.0, 10, 1e-13);
  return 6.0 * (0.5 * h) * I;
}

namespace detail {

template <YoungFunction Phi>
double inverse_derivative_fast(const Phi& phi, double y) {
  if constexpr (std::same_as<Phi, YoungSpec>) {
    if (phi.family() == Family::power) {
      if (y <= 0.0) return 0.0;
      return std::pow(y / phi.p(), 1.0 / (phi.p() - 1.0));
    }
  }
  return inverse_derivative(phi, y);
}

}  // namespace detail

template <YoungFunction Phi>
RieszResult riesz_capacity_variational(const SetMask& E, const Phi& phi, const RieszOptions& opt = {}) {
  const DomainPtr& dp = E.domain_ptr();
  const GridDomain& dom = *dp;
  if (!E.respects_margin()) throw ConfigError("riesz capacity: set must lie strictly inside B(0, R - 2h)");
  RieszResult res;
  res.density = GridFunction(dp);
  if (E.empty()) return res;

  std::vector<std::size_t> set_ids;
  for (std::size_t i = 0; i < dom.size(); ++i)
    if (E[i]) set_ids.push_back(i);
  if (set_ids.size() > opt.max_set_nodes)
    throw ConfigError("riesz capacity: set has more than " + std::to_string(opt.max_set_nodes) + " nodes");
  const auto& src = dom.inside_ids();
  const std::size_t m = set_ids.size(), s = src.size();
  const int n = dom.dim();
  const double w = dom.cell_volume();
  const double diag = riesz_cell_integral(n, dom.spacing());

  // Dense kernel, row j = constraint node, column i = source node.
  std::vector<double> K(m * s);
  for (std::size_t j = 0; j < m; ++j) {
    Point xj = dom.position(set_ids[j]);
    for (std::size_t i = 0; i < s; ++i) {
      double r = dom.distance(src[i], xj);
      K[j * s + i] = src[i] == set_ids[j] ? diag : w * (n == 2 ? 1.0 / r : 1.0 / (r * r));
    }
  }

  std::vector<double> f(s), Kf(m), KTmu(s);
  auto density = [&](const std::vector<double>& mu) {
    std::fill(KTmu.begin(), KTmu.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (mu[j] == 0.0) continue;
      const double* row = &K[j * s];
      for (std::size_t i = 0; i < s; ++i) KTmu[i] += mu[j] * row[i];
    }
    for (std::size_t i = 0; i < s; ++i) f[i] = detail::inverse_derivative_fast(phi, KTmu[i] / w);
    for (std::size_t j = 0; j < m; ++j) {
      const double* row = &K[j * s];
      double acc = 0.0;
      for (std::size_t i = 0; i < s; ++i) acc += row[i] * f[i];
      Kf[j] = acc;
    }
  };
  auto primal_energy = [&](double scale) {
    double e = 0.0;
    for (std::size_t i = 0; i < s; ++i) e += w * phi.value(scale * f[i]);
    return e;
  };
  // Dual value at mu given f = f(mu), Kf = K f(mu) already computed.
  auto dual = [&](const std::vector<double>& mu) {
    double d = primal_energy(1.0);
    for (std::size_t j = 0; j < m; ++j) d -= mu[j] * (Kf[j] - 1.0);
    return d;
  };

  std::vector<double> mu(m, 0.0), y(m, 0.0), mu_prev(m, 0.0), grad(m), trial(m);
  double L = 1.0, t = 1.0;
  double best_dual = 0.0, primal = std::numeric_limits<double>::infinity();
  std::vector<double> best_f;
  res.converged = false;

  // Start from the scaled uniform multiplier so the first iterate is feasible.
  std::fill(mu.begin(), mu.end(), 1.0);
  density(mu);
  {
    double kmin = *std::min_element(Kf.begin(), Kf.end());
    double a = 1.0;
    // K f is increasing in mu; grow or shrink until min Kf is near 1.
    for (int k = 0; k < 200 && (kmin < 1.0 || kmin > 2.0); ++k) {
      a *= kmin < 1.0 ? 2.0 : 0.5;
      for (auto& v : mu) v = a;
      density(mu);
      kmin = *std::min_element(Kf.begin(), Kf.end());
    }
  }
  y = mu;
  mu_prev = mu;

  for (long it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    density(y);
    double dy = dual(y);
    for (std::size_t j = 0; j < m; ++j) grad[j] = 1.0 - Kf[j];

    double dnew = 0.0;
    for (int k = 0; k < 100; ++k) {
      double q = 0.0, lin = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        trial[j] = std::max(0.0, y[j] + grad[j] / L);
        double dlt = trial[j] - y[j];
        lin += grad[j] * dlt;
        q += dlt * dlt;
      }
      density(trial);
      dnew = dual(trial);
      if (dnew >= dy + lin - 0.5 * L * q - 1e-15 * std::abs(dy)) break;
      L *= 2.0;
    }
    // trial holds the new iterate with f, Kf evaluated there.
    double kmin = *std::min_element(Kf.begin(), Kf.end());
    if (kmin > 0.0) {
      double scale = 1.0 / kmin;
      double pe = primal_energy(scale);
      if (pe < primal) {
        primal = pe;
        best_f.assign(f.begin(), f.end());
        for (auto& v : best_f) v *= scale;
      }
    }
    best_dual = std::max(best_dual, dnew);

    bool restart = dnew < dy;
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t j = 0; j < m; ++j) {
      double next = trial[j];
      y[j] = restart ? next : next + (t - 1.0) / t_next * (next - mu_prev[j]);
      y[j] = std::max(0.0, y[j]);
      mu_prev[j] = next;
    }
    t = restart ? 1.0 : t_next;
    L *= 0.9;

    double gap = (primal - best_dual) / std::max(primal, 1e-300);
    res.relative_gap = gap;
    if (gap < opt.gap_tolerance) {
      res.converged = true;
      break;
    }
  }

  std::vector<double> out(dom.size(), 0.0);
  for (std::size_t i = 0; i < s; ++i) out[src[i]] = best_f[i];
  res.density = GridFunction(dp, std::move(out));
  res.value = primal;
  res.dual_value = best_dual;

  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const double* row = &K[j * s];
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) acc += row[i] * best_f[i];
    mn = std::min(mn, acc);
  }
  res.min_constraint = mn;
  return res;
}

inline RieszResult riesz_capacity_variational(const SetMask& E, const YoungSpec& spec,
                                              const RieszOptions& opt = {}) {
  if (!spec.has_factorization() || !check_delta2_plus(spec).pass)
    throw ConfigError("riesz capacity: Young function fails the Delta_2^+ check");
  return riesz_capacity_variational<YoungSpec>(E, spec, opt);
}

}  // namespace ocap

#endif  // OCAP_RIESZ_HPP

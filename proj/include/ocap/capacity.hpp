#ifndef OCAP_CAPACITY_HPP
#define OCAP_CAPACITY_HPP

// Variational capacity of node sets:
//
//   C(E) = inf { h^n sum_i Phi(|grad u|_i) : u >= 1 on E, u = 0 on the band }
//
// Nodes of E are pinned at 1 (truncation at 1 never raises the energy, so the
// obstacle is active on all of E at a minimizer). The remaining interior nodes
// are free. Each outer step solves A d = -grad E with A the weighted Laplacian
// built from the lagged diffusivity Phi'(|g|)/|g|, then backtracks by halving until the Armijo condition holds. The linear
// system is factored directly (sparse LDL^T) in 2-D and solved by CG in 3-D,
// where fill-in makes factoring expensive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "ocap/conditions.hpp"
#include "ocap/error.hpp"
#include "ocap/grid.hpp"
#include "ocap/young.hpp"

namespace ocap {

enum class LinearSolver { automatic, direct, cg };

struct SolverOptions {
  double tolerance = 1e-8;  // relative energy decrease per outer step
  long max_iterations = 100000;
  LinearSolver linear_solver = LinearSolver::automatic;
  double cg_tolerance = 1e-5;
  int cg_max_iterations = 20000;
};

struct CapacityResult {
  double value = 0.0;
  GridFunction minimizer;
  long iterations = 0;
  double final_relative_decrease = 0.0;
  bool converged = true;
  std::string method;

  nlohmann::ordered_json to_json() const {
    return {{"value", value}, {"iterations", iterations}, {"converged", converged}, {"method", method}};
  }
};

namespace detail {

// Phi'(t)/t, with the t -> 0 limit approximated at t = 1e-12.
template <YoungFunction Phi>
double diffusivity(const Phi& phi, double t) {
  constexpr double t_min = 1e-12;
  t = std::max(t, t_min);
  return phi.derivative(t) / t;
}

template <YoungFunction Phi>
class EnergyKernel {
 public:
  EnergyKernel(const GridDomain& dom, const Phi& phi) : dom_(dom), phi_(phi) {}

  double energy(std::span<const double> u) const {
    double s = 0.0;
    for (std::size_t i : dom_.inside_ids()) s += phi_.value(magnitude(u, i));
    return s * dom_.cell_volume();
  }

  // Energy, its gradient and the lagged diffusivity per node.
  double energy_gradient(std::span<const double> u, std::span<double> grad,
                         std::span<double> weight) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    const int n = dom_.dim();
    const double h = dom_.spacing();
    const double w = dom_.cell_volume();
    double s = 0.0;
    for (std::size_t i : dom_.inside_ids()) {
      double g[3] = {0, 0, 0};
      double q = 0.0;
      for (int d = 0; d < n; ++d) {
        g[d] = forward_diff(dom_, u, i, d);
        q += g[d] * g[d];
      }
      double m = std::sqrt(q);
      s += phi_.value(m);
      double a = diffusivity(phi_, m);
      weight[i] = a;
      if (m == 0.0) continue;
      for (int d = 0; d < n; ++d) {
        double flux = w * a * g[d] / h;
        grad[i] -= flux;
        if (dom_.has_forward(i, d)) grad[i + dom_.stride(d)] += flux;
      }
    }
    return s * w;
  }

  // out = A v for the weighted Laplacian with per-node weights.
  void apply(std::span<const double> weight, std::span<const double> v, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const int n = dom_.dim();
    const double h = dom_.spacing();
    const double c = dom_.cell_volume() / (h * h);
    for (std::size_t i : dom_.inside_ids()) {
      for (int d = 0; d < n; ++d) {
        bool fwd = dom_.has_forward(i, d);
        double next = fwd ? v[i + dom_.stride(d)] : 0.0;
        double flux = c * weight[i] * (next - v[i]);
        out[i] -= flux;
        if (fwd) out[i + dom_.stride(d)] += flux;
      }
    }
  }

  // The weighted Laplacian restricted to free nodes; col[i] is the column of
  // node i or -1 when it is pinned.
  Eigen::SparseMatrix<double> assemble(std::span<const double> weight, const std::vector<long>& col,
                                       long free_count) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(free_count) * (2 * dom_.dim() + 1));
    const int n = dom_.dim();
    const double h = dom_.spacing();
    const double c = dom_.cell_volume() / (h * h);
    for (std::size_t i : dom_.inside_ids()) {
      for (int d = 0; d < n; ++d) {
        double v = c * weight[i];
        long a = col[i];
        long b = dom_.has_forward(i, d) ? col[i + dom_.stride(d)] : -1;
        if (a >= 0) trip.emplace_back(a, a, v);
        if (b >= 0) trip.emplace_back(b, b, v);
        if (a >= 0 && b >= 0) {
          trip.emplace_back(a, b, -v);
          trip.emplace_back(b, a, -v);
        }
      }
    }
    Eigen::SparseMatrix<double> A(free_count, free_count);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
  }

  void diagonal(std::span<const double> weight, std::span<double> diag) const {
    std::fill(diag.begin(), diag.end(), 0.0);
    const int n = dom_.dim();
    const double h = dom_.spacing();
    const double c = dom_.cell_volume() / (h * h);
    for (std::size_t i : dom_.inside_ids()) {
      for (int d = 0; d < n; ++d) {
        diag[i] += c * weight[i];
        if (dom_.has_forward(i, d)) diag[i + dom_.stride(d)] += c * weight[i];
      }
    }
  }

 private:
  double magnitude(std::span<const double> u, std::size_t i) const {
    double q = 0.0;
    for (int d = 0; d < dom_.dim(); ++d) {
      double g = forward_diff(dom_, u, i, d);
      q += g * g;
    }
    return std::sqrt(q);
  }

  const GridDomain& dom_;
  const Phi& phi_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Jacobi-preconditioned CG for A d = -G on the free nodes; d starts at 0.
template <YoungFunction Phi>
void pcg(const EnergyKernel<Phi>& K, std::span<const double> weight, std::span<const double> diag,
         const std::vector<std::uint8_t>& free, std::span<const double> G, std::span<double> d,
         const SolverOptions& opt) {
  const std::size_t N = d.size();
  std::vector<double> r(N), z(N), p(N), Ap(N);
  for (std::size_t i = 0; i < N; ++i) {
    r[i] = free[i] ? -G[i] : 0.0;
    z[i] = free[i] ? r[i] / diag[i] : 0.0;
  }
  p = z;
  double rz = dot(r, z);
  const double r0 = std::sqrt(dot(r, r));
  for (int k = 0; k < opt.cg_max_iterations; ++k) {
    K.apply(weight, p, Ap);
    for (std::size_t i = 0; i < N; ++i)
      if (!free[i]) Ap[i] = 0.0;
    double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) break;
    double alpha = rz / pAp;
    for (std::size_t i = 0; i < N; ++i) {
      d[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    if (std::sqrt(dot(r, r)) <= opt.cg_tolerance * r0) break;
    for (std::size_t i = 0; i < N; ++i) z[i] = free[i] ? r[i] / diag[i] : 0.0;
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
  }
}

}  // namespace detail

// h^n sum Phi(|grad u|) over the ball; the quantity every capacity value is.
template <YoungFunction Phi>
double phi_energy(const GridFunction& u, const Phi& phi) {
  return detail::EnergyKernel<Phi>(u.domain(), phi).energy(u.values());
}

template <YoungFunction Phi>
CapacityResult capacity_variational(const SetMask& E, const Phi& phi, const SolverOptions& opt = {},
                                    const GridFunction* warm_start = nullptr) {
  const DomainPtr& dp = E.domain_ptr();
  const GridDomain& dom = *dp;
  if (!E.respects_margin()) throw ConfigError("capacity: set must lie strictly inside B(0, R - 2h)");

  CapacityResult res;
  const bool direct = opt.linear_solver == LinearSolver::direct ||
                      (opt.linear_solver == LinearSolver::automatic && dom.dim() == 2);
  res.method = direct ? "variational_descent_ldlt" : "variational_descent_pcg";
  res.minimizer = GridFunction(dp);
  if (E.empty()) return res;

  const std::size_t N = dom.size();
  std::vector<std::uint8_t> free(N, 0);
  std::vector<double> u(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (E[i]) {
      u[i] = 1.0;
    } else if (dom.interior(i)) {
      free[i] = 1;
      if (warm_start) u[i] = std::clamp((*warm_start)[i], 0.0, 1.0);
    }
  }

  std::vector<long> col(N, -1);
  long free_count = 0;
  for (std::size_t i = 0; i < N; ++i)
    if (free[i]) col[i] = free_count++;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;

  detail::EnergyKernel<Phi> K(dom, phi);
  std::vector<double> G(N), a(N), a_pc(N), diag(N), d(N), trial(N);
  double energy = K.energy_gradient(u, G, a);
  double rel = std::numeric_limits<double>::infinity();
  res.converged = false;

  for (long it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    double gmax = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (!free[i]) G[i] = 0.0;
      gmax = std::max(gmax, std::abs(G[i]));
    }
    if (gmax == 0.0) {
      res.converged = true;
      rel = 0.0;
      break;
    }

    // Preconditioner weights: floor the diffusivity so A stays definite.
    double amax = 0.0;
    for (std::size_t i : dom.inside_ids()) amax = std::max(amax, a[i]);
    for (std::size_t i = 0; i < N; ++i) a_pc[i] = std::max(a[i], 1e-8 * amax);
    K.diagonal(a_pc, diag);
    std::fill(d.begin(), d.end(), 0.0);

    if (direct) {
      auto A = K.assemble(a_pc, col, free_count);
      if (!analyzed) {
        ldlt.analyzePattern(A);
        analyzed = true;
      }
      ldlt.factorize(A);
      if (ldlt.info() != Eigen::Success) throw NumericalError("capacity: factorization failed");
      Eigen::VectorXd rhs(free_count);
      for (std::size_t i = 0; i < N; ++i)
        if (free[i]) rhs[col[i]] = -G[i];
      Eigen::VectorXd sol = ldlt.solve(rhs);
      for (std::size_t i = 0; i < N; ++i)
        if (free[i]) d[i] = sol[col[i]];
    } else {
      detail::pcg(K, a_pc, diag, free, G, d, opt);
    }
    double slope = detail::dot(G, d);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < N; ++i) d[i] = free[i] ? -G[i] / diag[i] : 0.0;
      slope = detail::dot(G, d);
    }

    // Armijo backtracking by halving.
    double step = 1.0, trial_energy = energy;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t i = 0; i < N; ++i) trial[i] = u[i] + step * d[i];
      trial_energy = K.energy(trial);
      if (trial_energy <= energy + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No measurable decrease left: the predicted decrease is at rounding level.
      res.converged = -slope <= 1e-10 * energy;
      rel = 0.0;
      break;
    }
    u.swap(trial);
    rel = (energy - trial_energy) / std::max(trial_energy, std::numeric_limits<double>::min());
    energy = K.energy_gradient(u, G, a);
    if (rel < opt.tolerance) {
      res.converged = true;
      break;
    }
  }

  res.final_relative_decrease = rel;
  res.minimizer = GridFunction(dp, std::move(u));
  res.value = phi_energy(res.minimizer, phi);
  return res;
}

// The same, for a parametric spec; rejects specs that fail the doubling check.
inline CapacityResult capacity_variational(const SetMask& E, const YoungSpec& spec,
                                           const SolverOptions& opt = {},
                                           const GridFunction* warm_start = nullptr) {
  static std::mutex m;
  static std::map<std::string, bool> checked;
  std::string key = std::string(to_string(spec.family())) + ':' + std::to_string(spec.p()) + ':' +
                    std::to_string(spec.theta()) + ':' + std::to_string(spec.gamma()) + ':' +
                    std::to_string(spec.c0()) + ':' +
                    std::to_string(reinterpret_cast<std::uintptr_t>(spec.table()));
  bool ok;
  {
    std::lock_guard lock(m);
    auto it = checked.find(key);
    if (it == checked.end()) it = checked.emplace(key, check_delta2(spec).pass).first;
    ok = it->second;
  }
  if (!ok) throw ConfigError("capacity: Young function fails the doubling condition");
  return capacity_variational<YoungSpec>(E, spec, opt, warm_start);
}

// Thread-safe memo of capacities keyed by node set, for one domain and Phi.
template <YoungFunction Phi>
class CapacityCache {
 public:
  struct Entry {
    double value = 0.0;
    bool converged = true;
    long iterations = 0;
  };

  CapacityCache(Phi phi, SolverOptions opt = {}) : phi_(std::move(phi)), opt_(opt) {}

  Entry get(const SetMask& E) {
    std::string key = E.key();
    {
      std::lock_guard lock(mutex_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    auto r = capacity_variational(E, phi_, opt_);
    Entry e{r.value, r.converged, r.iterations};
    std::lock_guard lock(mutex_);
    memo_.emplace(std::move(key), e);
    return e;
  }

  double operator()(const SetMask& E) { return get(E).value; }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return memo_.size();
  }

  const Phi& phi() const { return phi_; }

 private:
  Phi phi_;
  SolverOptions opt_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> memo_;
};

// Area of the unit sphere S^{n-1}.
inline double sphere_area(int n) {
  if (n == 2) return 2.0 * std::numbers::pi;
  if (n == 3) return 4.0 * std::numbers::pi;
  throw ConfigError("dimension must be 2 or 3");
}

namespace detail {

// Smallest g >= 0 with Phi'(g) >= y.
template <YoungFunction Phi>
double inverse_derivative(const Phi& phi, double y) {
  if (y <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int k = 0; phi.derivative(hi) < y; ++k) {
    lo = hi;
    hi *= 2.0;
    if (k > 2000) throw NumericalError("inverse_derivative: no bracket");
  }
  while (hi - lo > 1e-14 * hi) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (phi.derivative(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Condenser capacity of B(0, r) in B(0, R) from the radial reduction: profile
// slopes g_i on `nodes` midpoint intervals, minimizing sum W_i Phi(g_i) with
// sum g_i dr = 1. The optimality condition W_i Phi'(g_i) = mu dr is solved
// exactly per interval and mu is found by bisection.
template <YoungFunction Phi>
double capacity_ball_radial(double r, const Phi& phi, double R, int n, int nodes = 10000) {
  if (!(r > 0.0 && r < R)) throw ConfigError("capacity_ball_radial: need 0 < r < R");
  const double omega = sphere_area(n);
  const double dr = (R - r) / nodes;
  std::vector<double> rho_pow(nodes), g(nodes);
  for (int i = 0; i < nodes; ++i) rho_pow[i] = omega * std::pow(r + (i + 0.5) * dr, n - 1);

  auto total = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < nodes; ++i) {
      g[i] = detail::inverse_derivative(phi, mu / rho_pow[i]);
      s += g[i] * dr;
    }
    return s;
  };
  double lo = 1e-300, hi = 1.0;
  while (total(hi) < 1.0) {
    lo = hi;
    hi *= 2.0;
  }
  while (total(lo) >= 1.0 && lo > 1e-300) lo *= 1e-3;
  for (int k = 0; k < 200 && hi - lo > 1e-14 * hi; ++k) {
    double mid = lo < 1e-200 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    (total(mid) < 1.0 ? lo : hi) = mid;
  }
  double s = total(hi);
  double value = 0.0;
  for (int i = 0; i < nodes; ++i) {
    double gi = g[i] / s;  // exact feasibility
    value += rho_pow[i] * phi.value(gi) * dr;
  }
  return value;
}

struct BallEstimate {
  double r = 0.0;
  double R = 0.0;
  int n = 2;
  double F_value = 0.0;
  double estimate = 0.0;  // F(r)^{1-n}
};

// F(r) = int_r^R s^{-1} phi(1/s)^{-1/(n-1)} ds for Phi = t^n phi(t).
inline BallEstimate ball_capacity_estimate(double r, const YoungSpec& spec, double R, int n) {
  if (!(r > 0.0 && r < 0.5 * R)) throw ConfigError("ball_capacity_estimate: need 0 < r < R/2");
  if (n != 2 && n != 3) throw ConfigError("ball_capacity_estimate: dimension must be 2 or 3");
  if (!spec.has_factorization() || spec.p() != n)
    throw ConfigError("ball_capacity_estimate: Young function must factor as t^n phi(t)");
  if (!check_delta2_plus(spec).pass)
    throw ConfigError("ball_capacity_estimate: factor fails the Delta_2^+ check");
  const double expo = -1.0 / (n - 1);
  auto integrand = [&](double x) { return std::pow(spec.factor(std::exp(-x)), expo); };
  double F = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, std::log(r), std::log(R), 15, 1e-10);
  BallEstimate b;
  b.r = r;
  b.R = R;
  b.n = n;
  b.F_value = F;
  b.estimate = std::pow(F, 1.0 - n);
  return b;
}

}  // namespace ocap

#endif  // OCAP_CAPACITY_HPP

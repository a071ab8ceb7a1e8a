#ifndef OCAP_NORMS_HPP
#define OCAP_NORMS_HPP

#include <cmath>
#include <limits>

#include "ocap/error.hpp"
#include "ocap/grid.hpp"
#include "ocap/young.hpp"

namespace ocap {

struct ModularValue {
  double value = 0.0;
  Family family = Family::power;
  int dim = 0;
  int resolution = 0;
};

// integral of Phi(|u|) over the ball.
template <YoungFunction Phi>
double modular_value(const GridFunction& u, const Phi& phi, double scale = 1.0) {
  const auto& dom = u.domain();
  double s = 0.0;
  for (std::size_t i = 0; i < dom.size(); ++i)
    if (dom.inside(i) && u[i] != 0.0) s += phi.value(std::abs(u[i]) * scale);
  return s * dom.cell_volume();
}

inline ModularValue modular(const GridFunction& u, const YoungSpec& spec) {
  return {modular_value(u, spec), spec.family(), u.domain().dim(), u.domain().resolution()};
}

// Phi^{-1}(y) by bisection on Phi.
template <YoungFunction Phi>
double inverse(const Phi& phi, double y, double rel_tol = 1e-14) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw std::domain_error("inverse: y must be finite and >= 0");
  if (y == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (phi.value(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 2000) throw NumericalError("inverse: no bracket");
  }
  for (int it = 0; it < 400 && hi - lo > rel_tol * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (phi.value(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct LuxemburgOptions {
  double rel_tol = 1e-10;
  int max_doublings = 200;
};

// inf{ s : integral Phi(|u|/s) <= 1 }. s -> modular(u/s) is continuous and
// strictly decreasing where positive, so the root is bracketed by geometric
// growth from [eps, max|u| |B|] and then bisected.
template <YoungFunction Phi>
double luxemburg_norm(const GridFunction& u, const Phi& phi, const LuxemburgOptions& opt = {}) {
  const double umax = u.max_abs();
  if (umax == 0.0) return 0.0;
  auto excess = [&](double s) { return modular_value(u, phi, 1.0 / s) - 1.0; };

  double hi = std::max(umax * u.domain().ball_volume(), 1e-300);
  int n = 0;
  while (excess(hi) > 0.0) {
    hi *= 2.0;
    if (++n > opt.max_doublings) throw NumericalError("luxemburg_norm: upper bracket not found");
  }
  double lo = std::min(hi, umax * 1e-12);
  n = 0;
  while (excess(lo) <= 0.0) {
    lo *= 0.5;
    if (++n > opt.max_doublings) throw NumericalError("luxemburg_norm: lower bracket not found");
  }
  while (hi - lo > opt.rel_tol * hi) {
    double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ocap

#endif  // OCAP_NORMS_HPP

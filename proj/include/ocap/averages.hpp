#ifndef OCAP_AVERAGES_HPP
#define OCAP_AVERAGES_HPP

// Capacitary averages at a point x0 (snapped to the nearest node c):
//
//   A(r) = (1 / C(B(c, r))) sum_k C(E_k) (Psi(min(2^{k+1}, M)) - Psi(2^k))
//   E_k  = B(c, r) & { F > 2^k },  F = |u - u(c)|,  M = max of F on B(c, r)
//
// The top weight is clipped at M so that A(r) <= Psi(osc) holds exactly. The
// maximal operator uses F itself (no subtraction) and takes the max over a
// finite list of radii.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocap/capacity.hpp"
#include "ocap/error.hpp"
#include "ocap/grid.hpp"
#include "ocap/grid_io.hpp"
#include "ocap/parallel.hpp"
#include "ocap/young.hpp"

namespace ocap {

struct AverageValue {
  double value = 0.0;
  double ball_capacity = 0.0;
  double oscillation = 0.0;
  bool converged = true;
};

namespace detail {

inline void require_ball_inside(const GridDomain& dom, const Point& c, double r) {
  double rc = 0.0;
  for (int d = 0; d < dom.dim(); ++d) rc += c[d] * c[d];
  if (!(std::sqrt(rc) + r < dom.radius() - 2.0 * dom.spacing()))
    throw ConfigError("capacitary average: ball must lie inside B(0, R - 2h)");
}

// Normalized dyadic level-capacity sum of G >= 0 restricted to `ball`.
template <YoungFunction Phi>
AverageValue restricted_average(const GridFunction& G, const SetMask& ball, CapacityCache<Phi>& cache,
                                const ScalarFunction& Psi) {
  AverageValue out;
  auto cb = cache.get(ball);
  out.ball_capacity = cb.value;
  out.converged = cb.converged;
  double M = 0.0;
  for (std::size_t i = 0; i < G.size(); ++i)
    if (ball[i]) M = std::max(M, G[i]);
  out.oscillation = M;
  if (M == 0.0 || cb.value == 0.0) return out;
  const int k_max = static_cast<int>(std::ceil(std::log2(M)));
  const int k_min = static_cast<int>(std::floor(std::log2(M))) - 20;
  double s = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    double t = std::ldexp(1.0, k);
    if (t >= M) break;
    SetMask E(G.domain_ptr());
    for (std::size_t i = 0; i < G.size(); ++i)
      if (ball[i] && G[i] > t) E.set(i);
    auto e = cache.get(E);
    out.converged = out.converged && e.converged;
    s += e.value * (Psi(std::min(2.0 * t, M)) - Psi(t));
  }
  out.value = s / cb.value;
  return out;
}

}  // namespace detail

template <YoungFunction Phi>
AverageValue capacitary_average(const GridFunction& u, const Point& x0, double r, CapacityCache<Phi>& cache,
                                const ScalarFunction& Psi) {
  const auto& dom = u.domain();
  std::size_t c = dom.nearest(x0);
  Point pc = dom.position(c);
  detail::require_ball_inside(dom, pc, r);
  auto ball = SetMask::ball(u.domain_ptr(), pc, r);
  const double uc = u[c];
  GridFunction F = map_values(u, [uc](double v) { return std::abs(v - uc); });
  return detail::restricted_average(F, ball, cache, Psi);
}

struct AverageTrace {
  Point center{0, 0, 0};  // snapped
  std::vector<double> radii;
  std::vector<double> averages;
  std::vector<double> envelope;  // Psi(L r)
  double lipschitz = 0.0;        // max F(y) / |y - c| over the largest ball
  bool truncated = false;        // radii below 4h dropped
  bool converged = true;
  double epsilon = 0.05;
  bool tail_nonincreasing = true;
  double final_value = 0.0;
  bool pass = false;
  bool within_envelope = true;

  nlohmann::ordered_json verdict_json() const {
    return {{"center", {center[0], center[1], center[2]}},
            {"final_value", final_value},
            {"tail_nonincreasing", tail_nonincreasing},
            {"within_envelope", within_envelope},
            {"truncated", truncated},
            {"converged", converged},
            {"pass", pass}};
  }
};

struct TraceOptions {
  double R0 = 0.25;
  int j_max = 4;
  double epsilon = 0.05;
  double envelope_slack = 0.10;
  int threads = 1;
};

// Averages over r_j = R0 2^{-j}, j = 0..j_max; radii below 4h are dropped.
// Verdict: last value below epsilon and no increase over the last 3 radii.
template <YoungFunction Phi>
AverageTrace average_trace(const GridFunction& u, const Point& x0, CapacityCache<Phi>& cache,
                           const ScalarFunction& Psi, const TraceOptions& opt = {}) {
  const auto& dom = u.domain();
  AverageTrace tr;
  tr.epsilon = opt.epsilon;
  std::size_t c = dom.nearest(x0);
  tr.center = dom.position(c);
  for (int j = 0; j <= opt.j_max; ++j) {
    double r = opt.R0 * std::ldexp(1.0, -j);
    if (r < 4.0 * dom.spacing()) {
      tr.truncated = true;
      break;
    }
    tr.radii.push_back(r);
  }
  if (tr.radii.empty()) throw ConfigError("average_trace: every radius is below 4h");
  detail::require_ball_inside(dom, tr.center, tr.radii.front());

  const double uc = u[c];
  for (std::size_t i = 0; i < dom.size(); ++i) {
    double dist = dom.distance(i, tr.center);
    if (dist > 0.0 && dist <= tr.radii.front())
      tr.lipschitz = std::max(tr.lipschitz, std::abs(u[i] - uc) / dist);
  }

  tr.averages.resize(tr.radii.size());
  std::vector<char> ok(tr.radii.size(), 1);
  parallel_for(tr.radii.size(), opt.threads, [&](std::size_t j) {
    auto a = capacitary_average(u, tr.center, tr.radii[j], cache, Psi);
    tr.averages[j] = a.value;
    ok[j] = a.converged;
  });
  for (std::size_t j = 0; j < tr.radii.size(); ++j) {
    tr.converged = tr.converged && ok[j];
    double env = Psi(tr.lipschitz * tr.radii[j]);
    tr.envelope.push_back(env);
    if (tr.averages[j] > env * (1.0 + opt.envelope_slack) + 1e-12) tr.within_envelope = false;
  }
  const std::size_t m = tr.averages.size();
  for (std::size_t j = m > 3 ? m - 3 : 0; j + 1 < m; ++j)
    if (tr.averages[j + 1] > tr.averages[j] * (1.0 + 1e-9) + 1e-15) tr.tail_nonincreasing = false;
  tr.final_value = tr.averages.back();
  tr.pass = tr.tail_nonincreasing && tr.final_value < opt.epsilon;
  return tr;
}

// max over radii of the normalized level-capacity sum of F on B(x0, r).
template <YoungFunction Phi>
double capacitary_maximal(const GridFunction& F, const Point& x0, const std::vector<double>& radii,
                          CapacityCache<Phi>& cache, const ScalarFunction& Psi) {
  const auto& dom = F.domain();
  Point pc = dom.position(dom.nearest(x0));
  GridFunction G = F.abs();
  double best = 0.0;
  for (double r : radii) {
    detail::require_ball_inside(dom, pc, r);
    auto ball = SetMask::ball(F.domain_ptr(), pc, r);
    best = std::max(best, detail::restricted_average(G, ball, cache, Psi).value);
  }
  return best;
}

struct WeakTypePoint {
  double t = 0.0;
  std::size_t set_nodes = 0;
  double set_capacity = 0.0;
  double ratio = 0.0;  // C(A_t) Phi(t) / int Phi(F)
};

struct WeakTypeBand {
  std::vector<WeakTypePoint> points;
  double constant = 0.0;  // max ratio
  bool converged = true;
};

// A_t = { sampled x : max_r int_{B(x,r)} Phi(F) / C(B(x,r)) > Phi(t) }, with x
// running over every `stride`-th node whose largest ball fits inside the
// margin. Reports C(A_t) Phi(t) / int Phi(F) for each t.
template <YoungFunction Phi>
WeakTypeBand weak_type_band(const GridFunction& F, const std::vector<double>& radii,
                            const std::vector<double>& thresholds, CapacityCache<Phi>& cache, const Phi& phi,
                            int stride = 8, int threads = 1) {
  const auto& dom = F.domain();
  const auto& dp = F.domain_ptr();
  WeakTypeBand out;
  if (radii.empty()) throw ConfigError("weak_type_band: empty radii list");
  const double rmax = *std::max_element(radii.begin(), radii.end());
  GridFunction PF = map_values(F, [&phi](double v) { return phi.value(std::abs(v)); });
  const double total = integrate(PF);

  std::vector<std::size_t> samples;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    auto idx = dom.index(i);
    bool on = true;
    for (int d = 0; d < dom.dim(); ++d) on = on && idx[d] % stride == stride / 2;
    if (on && dom.norm(i) + rmax < dom.radius() - 2.0 * dom.spacing()) samples.push_back(i);
  }
  std::vector<double> maximal(samples.size(), 0.0);
  std::vector<char> ok(samples.size(), 1);
  const double w = dom.cell_volume();
  parallel_for(samples.size(), threads, [&](std::size_t s) {
    Point pc = dom.position(samples[s]);
    for (double r : radii) {
      auto ball = SetMask::ball(dp, pc, r);
      double mass = 0.0;
      for (std::size_t i = 0; i < dom.size(); ++i)
        if (ball[i] && dom.inside(i)) mass += PF[i];
      auto e = cache.get(ball);
      ok[s] = ok[s] && e.converged;
      if (e.value > 0.0) maximal[s] = std::max(maximal[s], mass * w / e.value);
    }
  });
  for (char c : ok) out.converged = out.converged && c;

  for (double t : thresholds) {
    WeakTypePoint p;
    p.t = t;
    SetMask A(dp);
    for (std::size_t s = 0; s < samples.size(); ++s)
      if (maximal[s] > phi.value(t)) A.set(samples[s]);
    p.set_nodes = A.count();
    auto e = cache.get(A);
    out.converged = out.converged && e.converged;
    p.set_capacity = e.value;
    p.ratio = total > 0.0 ? e.value * phi.value(t) / total : 0.0;
    out.constant = std::max(out.constant, p.ratio);
    out.points.push_back(p);
  }
  return out;
}

inline void write_trace_csv(std::ostream& out, const std::vector<AverageTrace>& traces) {
  out << "x0_1,x0_2,x0_3,r,average\n";
  for (const auto& tr : traces)
    for (std::size_t j = 0; j < tr.radii.size(); ++j)
      out << format_double(tr.center[0]) << ',' << format_double(tr.center[1]) << ','
          << format_double(tr.center[2]) << ',' << format_double(tr.radii[j]) << ','
          << format_double(tr.averages[j]) << '\n';
}

}  // namespace ocap

#endif  // OCAP_AVERAGES_HPP

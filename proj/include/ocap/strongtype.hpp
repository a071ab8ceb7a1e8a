#ifndef OCAP_STRONGTYPE_HPP
#define OCAP_STRONGTYPE_HPP

// Both sides of the capacitary strong-type inequality
//
//   int_0^inf C({|u| > t}) dPsi(t)  <=  K int Phi(|grad u|)
//
// The left side is evaluated as the dyadic upper sum
//   sum_k C({|u| > 2^k}) (Psi(2^{k+1}) - Psi(2^k)),  k_min <= k <= k_max,
// with k_min = floor(log2 max|u|) - 20 and k_max = ceil(log2 max|u|). The
// levels below 2^{k_min} are bounded by C(spt u) Psi(2^{k_min + 1}), which is
// reported as tail_bound rather than added.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocap/capacity.hpp"
#include "ocap/conditions.hpp"
#include "ocap/error.hpp"
#include "ocap/grid.hpp"
#include "ocap/grid_io.hpp"
#include "ocap/parallel.hpp"
#include "ocap/testfunctions.hpp"
#include "ocap/young.hpp"

namespace ocap {

// 0 below 1/2, 2t - 1 on [1/2, 1], 1 above.
inline double truncation_H(double t) {
  if (t <= 0.5) return 0.0;
  if (t >= 1.0) return 1.0;
  return 2.0 * t - 1.0;
}

struct LevelTerm {
  int k = 0;
  double level = 0.0;
  double capacity = 0.0;
  double psi_weight = 0.0;
  double lhs_partial = 0.0;  // capacity * psi_weight
  bool converged = true;
};

struct StrongTypeReport {
  std::string tag;
  double lambda = 1.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double k_emp = 0.0;
  int k_min = 0;
  int k_max = 0;
  std::vector<LevelTerm> levels;
  double tail_bound = 0.0;
  bool converged = true;

  nlohmann::ordered_json summary_json() const {
    return {{"tag", tag},         {"lambda", lambda},   {"lhs", lhs},
            {"rhs", rhs},         {"k_emp", k_emp},     {"converged", converged},
            {"k_min", k_min},     {"k_max", k_max},     {"tail_bound", tail_bound}};
  }
};

inline double empirical_constant(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

template <YoungFunction Phi>
StrongTypeReport lhs_dyadic(const GridFunction& u, CapacityCache<Phi>& cache, const ScalarFunction& Psi,
                            int threads = 1) {
  StrongTypeReport rep;
  const double m = u.max_abs();
  if (m == 0.0) return rep;
  rep.k_max = static_cast<int>(std::ceil(std::log2(m)));
  rep.k_min = static_cast<int>(std::floor(std::log2(m))) - 20;
  const int count = rep.k_max - rep.k_min + 1;
  rep.levels.resize(count);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
    LevelTerm& L = rep.levels[i];
    L.k = rep.k_min + static_cast<int>(i);
    L.level = std::ldexp(1.0, L.k);
    auto e = cache.get(level_mask(u, L.level));
    L.capacity = e.value;
    L.converged = e.converged;
    L.psi_weight = Psi(2.0 * L.level) - Psi(L.level);
    L.lhs_partial = L.capacity * L.psi_weight;
  });
  for (const auto& L : rep.levels) {
    rep.lhs += L.lhs_partial;
    rep.converged = rep.converged && L.converged;
  }
  auto spt = cache.get(support_mask(u));
  rep.converged = rep.converged && spt.converged;
  rep.tail_bound = spt.value * Psi(std::ldexp(1.0, rep.k_min + 1));
  return rep;
}

template <YoungFunction Phi>
double rhs_energy(const GridFunction& u, const Phi& phi) {
  return phi_energy(u, phi);
}

template <YoungFunction Phi>
StrongTypeReport strong_type_report(const GridFunction& u, CapacityCache<Phi>& cache, const Phi& phi,
                                    const ScalarFunction& Psi, int threads = 1) {
  auto rep = lhs_dyadic(u, cache, Psi, threads);
  rep.rhs = rhs_energy(u, phi);
  rep.k_emp = empirical_constant(rep.lhs, rep.rhs);
  return rep;
}

// Lower and upper Riemann sums of t -> C({|u| > t}) against dPsi on a
// geometric grid of `points` per dyadic interval. Only the top `fine_intervals`
// dyadic intervals are subdivided; the others contribute their endpoint
// values (C(2^{k+1}) to the lower sum, C(2^k) to the upper), which bound any
// finer sum on them by monotonicity.
struct RiemannSums {
  double lower = 0.0;
  double upper = 0.0;
  double dyadic_lower = 0.0;  // sum_k C(2^{k+1}) (Psi(2^{k+1}) - Psi(2^k))
  double dyadic_upper = 0.0;  // the dyadic left sum
  int points = 0;
  int fine_intervals = 0;
  bool converged = true;
};

template <YoungFunction Phi>
RiemannSums riemann_sums(const GridFunction& u, CapacityCache<Phi>& cache, const ScalarFunction& Psi,
                         int points = 64, int fine_intervals = 4, int threads = 1) {
  RiemannSums out;
  out.points = points;
  const double m = u.max_abs();
  if (m == 0.0) return out;
  const auto dy = lhs_dyadic(u, cache, Psi, threads);
  const int count = static_cast<int>(dy.levels.size());
  out.fine_intervals = std::min(fine_intervals, count);
  out.converged = dy.converged;

  auto cap_at = [&](int idx) { return idx < count ? dy.levels[idx].capacity : 0.0; };
  for (int i = 0; i < count; ++i) {
    out.dyadic_upper += dy.levels[i].lhs_partial;
    out.dyadic_lower += cap_at(i + 1) * dy.levels[i].psi_weight;
  }

  const int first_fine = count - out.fine_intervals;
  for (int i = 0; i < first_fine; ++i) {
    out.upper += dy.levels[i].lhs_partial;
    out.lower += cap_at(i + 1) * dy.levels[i].psi_weight;
  }

  // Fine levels t_j = 2^{k + j / points}, j = 0..points, for each fine k.
  std::vector<double> t;
  for (int i = first_fine; i < count; ++i) {
    int k = dy.levels[i].k;
    for (int j = 0; j < points; ++j) t.push_back(std::exp2(k + static_cast<double>(j) / points));
  }
  t.push_back(std::ldexp(1.0, dy.levels.back().k + 1));
  std::vector<double> c(t.size());
  std::vector<char> ok(t.size(), 1);
  parallel_for(t.size(), threads, [&](std::size_t j) {
    auto e = cache.get(level_mask(u, t[j]));
    c[j] = e.value;
    ok[j] = e.converged;
  });
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    double w = Psi(t[j + 1]) - Psi(t[j]);
    out.upper += c[j] * w;
    out.lower += c[j + 1] * w;
    out.converged = out.converged && ok[j];
  }
  return out;
}

struct StrongTypeOptions {
  std::vector<double> lambdas;  // empty: {1}
  int threads = 1;
  bool enforce_admissibility = true;
  LogGrid grid;
};

struct StrongTypeSweep {
  std::vector<StrongTypeReport> reports;
  double max_k_emp = 0.0;
  bool finite = true;
  bool converged = true;
  // Per tag: max/min of k_emp over lambda, and whether k_emp rises
  // monotonically as lambda decreases.
  std::map<std::string, double> spread;
  std::map<std::string, bool> grows_as_lambda_shrinks;

  nlohmann::ordered_json verdict_json() const {
    nlohmann::ordered_json j;
    j["max_k_emp"] = max_k_emp;
    j["finite"] = finite;
    j["converged"] = converged;
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [tag, v] : spread)
      s[tag] = {{"spread", v}, {"grows_as_lambda_shrinks", grows_as_lambda_shrinks.at(tag)}};
    j["functions"] = s;
    return j;
  }
};

// Conditions (f sub-multiplicative, phi/psi paired) that make the pair
// admissible. Throws ConfigError when either fails.
inline void require_admissible(const FactoredPair& pair, const LogGrid& grid = {}) {
  CheckOptions opt;
  opt.grid = grid;
  if (!check_submultiplicative_f(pair.f_part, opt).pass)
    throw ConfigError("strong type: f is not sub-multiplicative on the check grid");
  if (!check_pairing(pair.phi_part, pair.psi_part, opt).pass)
    throw ConfigError("strong type: phi and psi fail the pairing condition");
}

template <YoungFunction Phi>
StrongTypeSweep verify_strong_type(const DomainPtr& dom, const std::vector<TestFunctionSpec>& suite,
                                   CapacityCache<Phi>& cache, const Phi& phi, const ScalarFunction& Psi,
                                   const StrongTypeOptions& opt = {},
                                   const FactoredPair* pair = nullptr) {
  if (!increasing_on_grid(Psi, opt.grid)) throw ConfigError("strong type: Psi is not increasing");
  if (opt.enforce_admissibility && pair) require_admissible(*pair, opt.grid);
  std::vector<double> lambdas = opt.lambdas.empty() ? std::vector<double>{1.0} : opt.lambdas;

  StrongTypeSweep out;
  for (const auto& base : suite) {
    std::vector<double> ks;
    for (double lam : lambdas) {
      TestFunctionSpec s = base;
      s.lambda = lam;
      auto u = make_test_function(dom, s);
      auto rep = strong_type_report(u, cache, phi, Psi, opt.threads);
      rep.tag = s.tag();
      rep.lambda = lam;
      ks.push_back(rep.k_emp);
      out.max_k_emp = std::max(out.max_k_emp, rep.k_emp);
      out.finite = out.finite && std::isfinite(rep.k_emp);
      out.converged = out.converged && rep.converged;
      out.reports.push_back(std::move(rep));
    }
    auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
    out.spread[base.tag()] = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    // Sort by lambda ascending; growth toward small lambda means k decreasing in lambda.
    std::vector<std::pair<double, double>> byl;
    for (std::size_t i = 0; i < ks.size(); ++i) byl.emplace_back(lambdas[i], ks[i]);
    std::sort(byl.begin(), byl.end());
    bool grows = byl.size() > 1;
    for (std::size_t i = 1; i < byl.size(); ++i)
      if (!(byl[i - 1].second > byl[i].second)) grows = false;
    out.grows_as_lambda_shrinks[base.tag()] = grows;
  }
  return out;
}

inline void write_levels_csv(std::ostream& out, const std::vector<StrongTypeReport>& reports) {
  out << "tag,lambda,k,level_capacity,psi_weight,lhs_partial\n";
  for (const auto& r : reports)
    for (const auto& L : r.levels)
      out << r.tag << ',' << format_double(r.lambda) << ',' << L.k << ',' << format_double(L.capacity) << ','
          << format_double(L.psi_weight) << ',' << format_double(L.lhs_partial) << '\n';
}

}  // namespace ocap

#endif  // OCAP_STRONGTYPE_HPP

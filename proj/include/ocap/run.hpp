#ifndef OCAP_RUN_HPP
#define OCAP_RUN_HPP

// Scenario drivers behind the command-line front end. Each writes
// manifest.json (the resolved configuration) plus its own tables into the
// output directory and returns an exit status.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocap/averages.hpp"
#include "ocap/capacity.hpp"
#include "ocap/conditions.hpp"
#include "ocap/config.hpp"
#include "ocap/error.hpp"
#include "ocap/grid_io.hpp"
#include "ocap/norms.hpp"
#include "ocap/riesz.hpp"
#include "ocap/strongtype.hpp"
#include "ocap/testfunctions.hpp"
#include "ocap/young.hpp"

namespace ocap {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_nonconvergence = 3, exit_io = 4 };

using Json = nlohmann::ordered_json;

inline Json to_json(const ConditionReport& r) {
  Json crit = Json::array();
  for (const auto& c : r.criteria) crit.push_back({{"name", c.name}, {"value", c.value}, {"pass", c.pass}});
  return {{"condition", r.condition},
          {"constant", r.constant},
          {"witness_s", r.witness_s},
          {"witness_t", r.witness_t},
          {"bounded", r.bounded},
          {"pass", r.pass},
          {"ceiling", std::isfinite(r.ceiling) ? Json(r.ceiling) : Json("inf")},
          {"grid", {{"lo", r.grid.lo}, {"hi", r.grid.hi}, {"per_decade", r.grid.per_decade}}},
          {"grid_shrunk", r.grid_shrunk},
          {"criteria", crit}};
}

// The Phi/Psi pair a configuration describes.
struct ResolvedPair {
  YoungSpec phi;
  ScalarFunction Psi;
  std::optional<FactoredPair> factors;
};

inline ResolvedPair resolve_pair(const RunConfig& c) {
  ResolvedPair r{c.young.build(), {}, std::nullopt};
  if (c.psi_mode == "derived") {
    if (!r.phi.has_factorization()) throw ConfigError("derived Psi needs a factorable Young function");
    r.factors = factor_pair(r.phi);
    r.Psi = derived_Psi(r.phi);
    return r;
  }
  YoungSpec psi = c.psi.build();
  r.Psi = as_function(psi);
  if (r.phi.has_factorization() && psi.has_factorization()) {
    if (psi.p() != r.phi.p()) throw ConfigError("explicit Psi must share the exponent p of Phi");
    double p = r.phi.p();
    YoungSpec phi = r.phi;
    r.factors = FactoredPair{[p](double t) { return t <= 0.0 ? 0.0 : std::pow(t, p); },
                             [phi](double t) { return phi.factor(t); },
                             [psi](double t) { return psi.factor(t); }};
  }
  return r;
}

namespace detail {

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void json(const std::string& name, const Json& j) const {
    std::ofstream out(path(name));
    if (!out) throw IoError("cannot write '" + path(name) + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path(name) + "'");
  }

  template <class F>
  void text(const std::string& name, F&& writer) const {
    std::ofstream out(path(name));
    if (!out) throw IoError("cannot write '" + path(name) + "'");
    writer(out);
    if (!out) throw IoError("write failed for '" + path(name) + "'");
  }

 private:
  std::filesystem::path dir_;
};

inline Point seeded_center(std::mt19937_64& gen, int n, double radius) {
  // Rejection sampling in the cube keeps the draw sequence platform-independent.
  for (;;) {
    Point x{0, 0, 0};
    double q = 0.0;
    for (int d = 0; d < n; ++d) {
      x[d] = radius * (2.0 * uniform01(gen) - 1.0);
      q += x[d] * x[d];
    }
    if (q <= radius * radius) return x;
  }
}

inline int run_check_conditions(const RunConfig& c, const OutputDir& out) {
  auto pair = resolve_pair(c);
  CheckOptions opt;
  opt.grid = c.grid;
  opt.ceiling = c.ceiling;
  Json reports = Json::array();
  reports.push_back(to_json(check_delta2(pair.phi, opt)));
  if (pair.phi.has_factorization()) reports.push_back(to_json(check_delta2_plus(pair.phi, opt)));
  if (pair.factors) {
    reports.push_back(to_json(check_submultiplicative_f(pair.factors->f_part, opt)));
    reports.push_back(to_json(check_pairing(pair.factors->phi_part, pair.factors->psi_part, opt)));
  }
  bool all = true;
  for (const auto& r : reports) all = all && r["pass"].get<bool>();
  out.json("conditions.json", {{"reports", reports}, {"all_pass", all}});
  return exit_ok;
}

inline int run_norm(const RunConfig& c, const OutputDir& out) {
  auto phi = c.young.build();
  auto dom = GridDomain::build(c.n, c.radius, c.resolution);
  GridFunction u;
  std::string tag;
  if (c.norm_function == "file") {
    bool binary = c.norm_input.size() > 4 && c.norm_input.substr(c.norm_input.size() - 4) == ".bin";
    u = binary ? read_binary_file(c.norm_input) : read_csv_file(c.norm_input, dom);
    if (!u.domain().same_as(*dom)) throw ConfigError("[norm] input grid does not match [domain]");
    tag = "file";
  } else {
    auto spec = c.shapes.spec(parse_shape(c.norm_function), c.norm_lambda, c.seed);
    u = make_test_function(dom, spec);
    tag = spec.tag();
  }
  double mod = modular_value(u, phi);
  double s = luxemburg_norm(u, phi);
  double unit = s > 0.0 ? modular_value(u, phi, 1.0 / s) : 0.0;
  out.json("norm.json", {{"function", tag},
                         {"family", to_string(phi.family())},
                         {"dim", c.n},
                         {"resolution", c.resolution},
                         {"modular", mod},
                         {"luxemburg_norm", s},
                         {"modular_at_norm", unit}});
  return exit_ok;
}

inline int run_capacity(const RunConfig& c, const OutputDir& out) {
  auto phi = c.young.build();
  auto dom = GridDomain::build(c.n, c.radius, c.resolution);
  Point center{c.cap_center[0], c.cap_center[1], c.cap_center[2]};
  auto E = SetMask::ball(dom, center, c.cap_radius);
  if (!E.respects_margin()) throw ConfigError("[capacity] ball must lie inside B(0, R - 2h)");
  Json j;
  j["set"] = {{"kind", "ball"}, {"radius", c.cap_radius}, {"nodes", E.count()}};
  bool converged = true;
  if (c.cap_method != "riesz") {
    auto res = capacity_variational(E, phi, c.solver);
    j["variational"] = res.to_json();
    converged = converged && res.converged;
    if (c.write_minimizer) write_csv_file(out.path("minimizer.csv"), res.minimizer);
    bool centred = center[0] == 0.0 && center[1] == 0.0 && center[2] == 0.0;
    if (c.radial_oracle && centred && c.cap_radius < c.radius) {
      double rad = capacity_ball_radial(c.cap_radius, phi, c.radius, c.n);
      j["radial_oracle"] = {{"value", rad}, {"relative_difference", (res.value - rad) / rad}};
    }
    if (centred && phi.has_factorization() && phi.p() == c.n && c.cap_radius < 0.5 * c.radius &&
        check_delta2_plus(phi).pass) {
      auto b = ball_capacity_estimate(c.cap_radius, phi, c.radius, c.n);
      j["ball_estimate"] = {{"F", b.F_value}, {"estimate", b.estimate}, {"ratio", res.value / b.estimate}};
    }
  }
  if (c.cap_method != "variational") {
    RieszOptions ro;
    ro.gap_tolerance = c.riesz_gap;
    ro.max_iterations = c.riesz_max_iterations;
    auto rz = riesz_capacity_variational(E, phi, ro);
    j["riesz"] = rz.to_json();
    converged = converged && rz.converged;
  }
  j["converged"] = converged;
  out.json("capacity.json", j);
  return converged ? exit_ok : exit_nonconvergence;
}

inline int run_strong_type(const RunConfig& c, const OutputDir& out, int threads) {
  auto pair = resolve_pair(c);
  auto dom = GridDomain::build(c.n, c.radius, c.resolution);
  std::vector<TestFunctionSpec> suite;
  for (const auto& s : c.suite) suite.push_back(c.shapes.spec(parse_shape(s), 1.0, c.seed));
  CapacityCache<YoungSpec> cache(pair.phi, c.solver);
  StrongTypeOptions opt;
  opt.lambdas = c.lambdas;
  opt.threads = threads;
  opt.enforce_admissibility = c.enforce_admissibility;
  opt.grid = c.grid;
  if (c.enforce_admissibility && !pair.factors)
    throw ConfigError("strong type: admissibility check needs factorable Phi and Psi");
  capacity_variational(SetMask(dom), pair.phi);  // doubling check up front
  auto sweep = verify_strong_type(dom, suite, cache, pair.phi, pair.Psi, opt,
                                  pair.factors ? &*pair.factors : nullptr);
  Json reports = Json::array();
  for (const auto& r : sweep.reports) reports.push_back(r.summary_json());
  Json j{{"reports", reports}, {"verdict", sweep.verdict_json()}};
  bool converged = sweep.converged;
  if (c.riemann) {
    Json rs = Json::array();
    for (const auto& s : suite) {
      auto u = make_test_function(dom, s);
      auto r = riemann_sums(u, cache, pair.Psi, c.riemann_points, c.riemann_intervals, threads);
      converged = converged && r.converged;
      rs.push_back({{"tag", s.tag()},
                    {"dyadic_lower", r.dyadic_lower},
                    {"riemann_lower", r.lower},
                    {"riemann_upper", r.upper},
                    {"dyadic_upper", r.dyadic_upper},
                    {"points", r.points},
                    {"fine_intervals", r.fine_intervals}});
    }
    j["riemann"] = rs;
  }
  out.text("strong_type_levels.csv", [&](std::ostream& o) { write_levels_csv(o, sweep.reports); });
  out.json("strong_type.json", j);
  return converged ? exit_ok : exit_nonconvergence;
}

inline int run_averages(const RunConfig& c, const OutputDir& out, int threads) {
  auto pair = resolve_pair(c);
  if (!increasing_on_grid(pair.Psi, c.grid)) throw ConfigError("averages: Psi is not increasing");
  auto dom = GridDomain::build(c.n, c.radius, c.resolution);
  CapacityCache<YoungSpec> cache(pair.phi, c.solver);
  capacity_variational(SetMask(dom), pair.phi);

  std::mt19937_64 gen(c.seed);
  std::vector<Point> centers{{0.0, 0.0, 0.0}};
  while (static_cast<int>(centers.size()) < c.centers) centers.push_back(seeded_center(gen, c.n, c.center_radius));

  TraceOptions to;
  to.R0 = c.R0;
  to.j_max = c.j_max;
  to.epsilon = c.epsilon;
  to.threads = threads;

  Json functions = Json::array();
  bool converged = true;
  std::vector<std::pair<std::string, std::vector<AverageTrace>>> all;
  for (const auto& name : c.avg_functions) {
    auto spec = c.shapes.spec(parse_shape(name), 1.0, c.seed);
    auto u = make_test_function(dom, spec);
    std::vector<AverageTrace> traces(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) traces[i] = average_trace(u, centers[i], cache, pair.Psi, to);
    Json tv = Json::array();
    bool pass = true;
    for (const auto& t : traces) {
      tv.push_back(t.verdict_json());
      pass = pass && t.pass && t.within_envelope;
      converged = converged && t.converged;
    }
    Json f{{"function", spec.tag()}, {"pass", pass}, {"traces", tv}};
    if (c.weak_type) {
      auto band = weak_type_band(u, traces.front().radii, c.thresholds, cache, pair.phi, c.weak_stride, threads);
      Json pts = Json::array();
      for (const auto& p : band.points)
        pts.push_back({{"t", p.t}, {"set_nodes", p.set_nodes}, {"capacity", p.set_capacity}, {"ratio", p.ratio}});
      f["weak_type"] = {{"constant", band.constant}, {"points", pts}};
      converged = converged && band.converged;
    }
    functions.push_back(f);
    all.emplace_back(spec.tag(), std::move(traces));
  }
  out.text("averages_trace.csv", [&](std::ostream& o) {
    o << "function,x0_1,x0_2,x0_3,r,average\n";
    for (const auto& [tag, traces] : all)
      for (const auto& tr : traces)
        for (std::size_t j = 0; j < tr.radii.size(); ++j)
          o << tag << ',' << format_double(tr.center[0]) << ',' << format_double(tr.center[1]) << ','
            << format_double(tr.center[2]) << ',' << format_double(tr.radii[j]) << ','
            << format_double(tr.averages[j]) << '\n';
  });
  out.json("averages.json", {{"functions", functions}, {"converged", converged}});
  return converged ? exit_ok : exit_nonconvergence;
}

}  // namespace detail

// Runs a resolved configuration. Exceptions propagate.
inline int run(const RunConfig& c, int threads = 1) {
  detail::OutputDir out(c.out_dir);
  out.json("manifest.json", {{"config", c.to_json()}});
  if (c.scenario == "check-conditions") return detail::run_check_conditions(c, out);
  if (c.scenario == "norm") return detail::run_norm(c, out);
  if (c.scenario == "capacity") return detail::run_capacity(c, out);
  if (c.scenario == "strong-type") return detail::run_strong_type(c, out, threads);
  return detail::run_averages(c, out, threads);
}

}  // namespace ocap

#endif  // OCAP_RUN_HPP

#ifndef OCAP_CONFIG_HPP
#define OCAP_CONFIG_HPP

// Run configuration: an INI-style file of [section] headers and key = value
// lines ('#' and ';' start comments). Every section and key is checked
// against a fixed schema; unknown ones are errors. Defaults fill the rest and
// the resolved values are echoed into the run manifest.
//
//   [young]        family, p, theta, gamma, c0, table
//   [psi]          mode = derived | explicit, then the [young] keys
//   [domain]       n, radius, resolution
//   [run]          seed
//   [solver]       tolerance, max_iterations, linear_solver, cg_tolerance,
//                  riesz_gap, riesz_max_iterations
//   [output]       dir, write_minimizer
//   [check-conditions] ceiling, lo, hi, per_decade
//   [norm]         function, lambda, input
//   [capacity]     center, radius, method, radial_oracle
//   [strong-type]  suite, lambdas, riemann, riemann_points,
//                  riemann_intervals, enforce_admissibility
//   [averages]     functions, centers, center_radius, R0, j_max, epsilon,
//                  weak_type, thresholds, weak_stride
//
// Shape keys r, sigma, r_in, r_out are accepted in [norm], [strong-type] and
// [averages].

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocap/capacity.hpp"
#include "ocap/conditions.hpp"
#include "ocap/error.hpp"
#include "ocap/grid_io.hpp"
#include "ocap/testfunctions.hpp"
#include "ocap/young.hpp"

namespace ocap {

using IniSections = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline IniSections parse_ini(std::istream& in) {
  IniSections out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (out.count(section)) throw ConfigError("duplicate section [" + section + "]");
      out[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!out[section].emplace(key, value).second)
      throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
  }
  return out;
}

inline IniSections parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_ini(in);
}

// Typed access to one section; records which keys were read.
class Section {
 public:
  Section(std::string name, const std::map<std::string, std::string>* kv) : name_(std::move(name)), kv_(kv) {}

  bool has(const std::string& key) const { return kv_ && kv_->count(key); }

  std::string str(const std::string& key, const std::string& def) const {
    return has(key) ? kv_->at(key) : def;
  }

  double num(const std::string& key, double def) const {
    if (!has(key)) return def;
    return parse_double(key, kv_->at(key));
  }

  long integer(const std::string& key, long def) const {
    if (!has(key)) return def;
    const std::string& v = kv_->at(key);
    long out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw bad(key, v, "an integer");
    return out;
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string& v = kv_->at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw bad(key, v, "a boolean");
  }

  std::vector<double> list(const std::string& key, const std::vector<double>& def) const {
    if (!has(key)) return def;
    std::vector<double> out;
    for (const auto& item : split(kv_->at(key))) out.push_back(parse_double(key, item));
    return out;
  }

  std::vector<std::string> words(const std::string& key, const std::vector<std::string>& def) const {
    if (!has(key)) return def;
    return split(kv_->at(key));
  }

 private:
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  double parse_double(const std::string& key, const std::string& v) const {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw bad(key, v, "a number");
    return out;
  }

  ConfigError bad(const std::string& key, const std::string& v, const char* what) const {
    return ConfigError("[" + name_ + "] " + key + " = '" + v + "' is not " + what);
  }

  std::string name_;
  const std::map<std::string, std::string>* kv_;
};

struct YoungRecord {
  std::string family = "power";
  double p = 2.0;
  double theta = 0.0;
  double gamma = 0.0;
  double c0 = YoungSpec::default_c0();
  std::string table;

  YoungSpec build() const {
    Family f = parse_family(family);
    switch (f) {
      case Family::power: return YoungSpec::power(p);
      case Family::power_log: return YoungSpec::power_log(p, theta);
      case Family::exp_log: return YoungSpec::exp_log(p, theta);
      case Family::exp_loglog: return YoungSpec::exp_loglog(p, theta, gamma, c0);
      case Family::custom_table:
        if (table.empty()) throw ConfigError("custom_table needs a 'table' path");
        return YoungSpec::custom(YoungTable::from_csv_file(table));
    }
    throw ConfigError("unknown family");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"family", family}};
    if (family == "custom_table") {
      j["table"] = table;
    } else {
      j["p"] = p;
      j["theta"] = theta;
      j["gamma"] = gamma;
      j["c0"] = c0;
    }
    return j;
  }
};

struct ShapeParams {
  double r = 0.5;
  double sigma = 0.5;
  double r_in = 0.2;
  double r_out = 0.5;

  TestFunctionSpec spec(Shape s, double lambda, std::uint64_t seed) const {
    TestFunctionSpec t;
    t.shape = s;
    t.lambda = lambda;
    t.r = r;
    t.sigma = sigma;
    t.r_in = r_in;
    t.r_out = r_out;
    t.seed = seed;
    return t;
  }

  void add_to(nlohmann::ordered_json& j) const {
    j["r"] = r;
    j["sigma"] = sigma;
    j["r_in"] = r_in;
    j["r_out"] = r_out;
  }
};

struct RunConfig {
  std::string scenario;
  YoungRecord young;
  std::string psi_mode = "derived";
  YoungRecord psi;
  int n = 2;
  double radius = 1.0;
  int resolution = 128;
  std::uint64_t seed = 1;
  SolverOptions solver;
  double riesz_gap = 1e-5;
  long riesz_max_iterations = 200000;
  std::string out_dir = "out";
  bool write_minimizer = false;

  // check-conditions
  double ceiling = std::numeric_limits<double>::infinity();
  LogGrid grid;

  // norm
  std::string norm_function = "tent";
  double norm_lambda = 1.0;
  std::string norm_input;

  // capacity
  std::vector<double> cap_center{0.0, 0.0, 0.0};
  double cap_radius = 0.25;
  std::string cap_method = "variational";
  bool radial_oracle = true;

  // strong-type
  std::vector<std::string> suite{"tent", "bump", "plateau", "two_peak", "random_smooth"};
  std::vector<double> lambdas{0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  bool riemann = false;
  int riemann_points = 64;
  int riemann_intervals = 4;
  bool enforce_admissibility = true;

  // averages
  std::vector<std::string> avg_functions{"bump", "tent"};
  int centers = 9;
  double center_radius = 0.45;
  double R0 = 0.25;
  int j_max = 2;
  double epsilon = 0.05;
  bool weak_type = true;
  std::vector<double> thresholds{0.5, 1.0, 2.0, 4.0};
  int weak_stride = 16;

  ShapeParams shapes;

  nlohmann::ordered_json to_json() const;
};

inline const std::vector<std::string>& scenarios() {
  static const std::vector<std::string> s{"check-conditions", "norm", "capacity", "strong-type", "averages"};
  return s;
}

namespace detail {

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::set<std::string> young{"family", "p", "theta", "gamma", "c0", "table"};
  static const std::map<std::string, std::set<std::string>> s{
      {"young", young},
      {"psi", {"mode", "family", "p", "theta", "gamma", "c0", "table"}},
      {"domain", {"n", "radius", "resolution"}},
      {"run", {"seed"}},
      {"solver",
       {"tolerance", "max_iterations", "linear_solver", "cg_tolerance", "riesz_gap", "riesz_max_iterations"}},
      {"output", {"dir", "write_minimizer"}},
      {"check-conditions", {"ceiling", "lo", "hi", "per_decade"}},
      {"norm", {"function", "lambda", "input", "r", "sigma", "r_in", "r_out"}},
      {"capacity", {"center", "radius", "method", "radial_oracle"}},
      {"strong-type",
       {"suite", "lambdas", "riemann", "riemann_points", "riemann_intervals", "enforce_admissibility", "r",
        "sigma", "r_in", "r_out"}},
      {"averages",
       {"functions", "centers", "center_radius", "R0", "j_max", "epsilon", "weak_type", "thresholds",
        "weak_stride", "r", "sigma", "r_in", "r_out"}},
  };
  return s;
}

inline YoungRecord read_young(const Section& s) {
  YoungRecord y;
  y.family = s.str("family", y.family);
  y.p = s.num("p", y.p);
  y.theta = s.num("theta", y.theta);
  y.gamma = s.num("gamma", y.gamma);
  y.c0 = s.num("c0", y.c0);
  y.table = s.str("table", "");
  parse_family(y.family);
  return y;
}

inline ShapeParams read_shapes(const Section& s, ShapeParams p) {
  p.r = s.num("r", p.r);
  p.sigma = s.num("sigma", p.sigma);
  p.r_in = s.num("r_in", p.r_in);
  p.r_out = s.num("r_out", p.r_out);
  return p;
}

}  // namespace detail

// Validates and resolves a parsed file for `scenario`. Throws ConfigError.
inline RunConfig resolve_config(const IniSections& ini, const std::string& scenario) {
  if (std::find(scenarios().begin(), scenarios().end(), scenario) == scenarios().end())
    throw ConfigError("unknown scenario '" + scenario + "'");
  if (ini.empty()) throw ConfigError("config is empty");
  for (const auto& [name, kv] : ini) {
    auto it = detail::schema().find(name);
    if (it == detail::schema().end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [k, v] : kv)
      if (!it->second.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name + "]");
  }
  if (!ini.count("young")) throw ConfigError("missing [young] section");

  auto sec = [&](const std::string& name) {
    auto it = ini.find(name);
    return Section(name, it == ini.end() ? nullptr : &it->second);
  };

  RunConfig c;
  c.scenario = scenario;
  c.young = detail::read_young(sec("young"));
  c.young.build();

  auto psi = sec("psi");
  c.psi_mode = psi.str("mode", "derived");
  if (c.psi_mode == "explicit") {
    c.psi = detail::read_young(psi);
    c.psi.build();
  } else if (c.psi_mode == "derived") {
    for (const char* k : {"family", "p", "theta", "gamma", "c0", "table"})
      if (psi.has(k)) throw ConfigError("[psi] " + std::string(k) + " is only valid with mode = explicit");
  } else {
    throw ConfigError("[psi] mode must be 'derived' or 'explicit'");
  }

  auto dom = sec("domain");
  c.n = static_cast<int>(dom.integer("n", c.n));
  c.radius = dom.num("radius", c.radius);
  c.resolution = static_cast<int>(dom.integer("resolution", c.n == 3 ? 48 : 128));
  GridDomain::build(c.n, c.radius, c.resolution);

  auto run = sec("run");
  long seed = run.integer("seed", static_cast<long>(c.seed));
  if (seed < 0) throw ConfigError("[run] seed must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);

  auto sol = sec("solver");
  c.solver.tolerance = sol.num("tolerance", c.solver.tolerance);
  c.solver.max_iterations = sol.integer("max_iterations", c.solver.max_iterations);
  std::string ls = sol.str("linear_solver", "auto");
  if (ls == "auto") c.solver.linear_solver = LinearSolver::automatic;
  else if (ls == "direct") c.solver.linear_solver = LinearSolver::direct;
  else if (ls == "cg") c.solver.linear_solver = LinearSolver::cg;
  else throw ConfigError("[solver] linear_solver must be auto, direct or cg");
  c.solver.cg_tolerance = sol.num("cg_tolerance", c.solver.cg_tolerance);
  c.riesz_gap = sol.num("riesz_gap", c.riesz_gap);
  c.riesz_max_iterations = sol.integer("riesz_max_iterations", c.riesz_max_iterations);
  if (!(c.solver.tolerance > 0.0) || c.solver.max_iterations < 1 || !(c.solver.cg_tolerance > 0.0) ||
      !(c.riesz_gap > 0.0) || c.riesz_max_iterations < 1)
    throw ConfigError("[solver] tolerances and iteration caps must be positive");

  auto out = sec("output");
  c.out_dir = out.str("dir", c.out_dir);
  c.write_minimizer = out.flag("write_minimizer", c.write_minimizer);

  auto cc = sec("check-conditions");
  c.ceiling = cc.num("ceiling", c.ceiling);
  c.grid.lo = cc.num("lo", c.grid.lo);
  c.grid.hi = cc.num("hi", c.grid.hi);
  c.grid.per_decade = static_cast<int>(cc.integer("per_decade", c.grid.per_decade));
  c.grid.points();
  detail::require_span(c.grid);

  auto nm = sec("norm");
  c.norm_function = nm.str("function", c.norm_function);
  c.norm_lambda = nm.num("lambda", c.norm_lambda);
  c.norm_input = nm.str("input", "");
  if (c.norm_function == "file") {
    if (c.norm_input.empty()) throw ConfigError("[norm] function = file needs 'input'");
  } else {
    parse_shape(c.norm_function);
  }

  auto cap = sec("capacity");
  auto center = cap.list("center", {0.0, 0.0});
  if (static_cast<int>(center.size()) != c.n) throw ConfigError("[capacity] center needs n coordinates");
  c.cap_center = {0.0, 0.0, 0.0};
  for (int d = 0; d < c.n; ++d) c.cap_center[d] = center[d];
  c.cap_radius = cap.num("radius", c.cap_radius);
  c.cap_method = cap.str("method", c.cap_method);
  if (c.cap_method != "variational" && c.cap_method != "riesz" && c.cap_method != "both")
    throw ConfigError("[capacity] method must be variational, riesz or both");
  c.radial_oracle = cap.flag("radial_oracle", c.radial_oracle);
  if (!(c.cap_radius > 0.0)) throw ConfigError("[capacity] radius must be positive");

  auto st = sec("strong-type");
  c.suite = st.words("suite", c.suite);
  for (const auto& s : c.suite) parse_shape(s);
  c.lambdas = st.list("lambdas", c.lambdas);
  for (double l : c.lambdas)
    if (!(l > 0.0)) throw ConfigError("[strong-type] lambdas must be positive");
  c.riemann = st.flag("riemann", c.riemann);
  c.riemann_points = static_cast<int>(st.integer("riemann_points", c.riemann_points));
  c.riemann_intervals = static_cast<int>(st.integer("riemann_intervals", c.riemann_intervals));
  c.enforce_admissibility = st.flag("enforce_admissibility", c.enforce_admissibility);
  if (c.suite.empty() || c.lambdas.empty()) throw ConfigError("[strong-type] suite and lambdas must be non-empty");
  if (c.riemann_points < 1 || c.riemann_intervals < 1)
    throw ConfigError("[strong-type] riemann_points and riemann_intervals must be positive");

  auto av = sec("averages");
  c.avg_functions = av.words("functions", c.avg_functions);
  for (const auto& s : c.avg_functions) parse_shape(s);
  c.centers = static_cast<int>(av.integer("centers", c.centers));
  c.center_radius = av.num("center_radius", c.center_radius);
  c.R0 = av.num("R0", c.R0);
  c.j_max = static_cast<int>(av.integer("j_max", c.j_max));
  c.epsilon = av.num("epsilon", c.epsilon);
  c.weak_type = av.flag("weak_type", c.weak_type);
  c.thresholds = av.list("thresholds", c.thresholds);
  c.weak_stride = static_cast<int>(av.integer("weak_stride", c.weak_stride));
  if (c.centers < 1 || c.j_max < 0 || !(c.R0 > 0.0) || !(c.center_radius >= 0.0) || c.weak_stride < 1)
    throw ConfigError("[averages] centers, j_max, R0, center_radius and weak_stride out of range");

  // Shape parameters live in the section of the scenario that uses them.
  if (scenario == "norm") c.shapes = detail::read_shapes(nm, c.shapes);
  if (scenario == "strong-type") c.shapes = detail::read_shapes(st, c.shapes);
  if (scenario == "averages") c.shapes = detail::read_shapes(av, c.shapes);
  return c;
}

inline nlohmann::ordered_json RunConfig::to_json() const {
  using J = nlohmann::ordered_json;
  J j;
  j["scenario"] = scenario;
  j["young"] = young.to_json();
  J p{{"mode", psi_mode}};
  if (psi_mode == "explicit") p.update(psi.to_json());
  j["psi"] = p;
  j["domain"] = {{"n", n}, {"radius", radius}, {"resolution", resolution}};
  j["run"] = {{"seed", seed}};
  const char* ls = solver.linear_solver == LinearSolver::direct ? "direct"
                   : solver.linear_solver == LinearSolver::cg   ? "cg"
                                                                : "auto";
  j["solver"] = {{"tolerance", solver.tolerance},       {"max_iterations", solver.max_iterations},
                 {"linear_solver", ls},                 {"cg_tolerance", solver.cg_tolerance},
                 {"riesz_gap", riesz_gap},              {"riesz_max_iterations", riesz_max_iterations}};
  j["output"] = {{"dir", out_dir}, {"write_minimizer", write_minimizer}};
  J s;
  if (scenario == "check-conditions") {
    s = {{"ceiling", std::isfinite(ceiling) ? J(ceiling) : J("inf")},
         {"lo", grid.lo},
         {"hi", grid.hi},
         {"per_decade", grid.per_decade}};
  } else if (scenario == "norm") {
    s = {{"function", norm_function}, {"lambda", norm_lambda}, {"input", norm_input}};
    shapes.add_to(s);
  } else if (scenario == "capacity") {
    s = {{"center", std::vector<double>(cap_center.begin(), cap_center.begin() + n)},
         {"radius", cap_radius},
         {"method", cap_method},
         {"radial_oracle", radial_oracle}};
  } else if (scenario == "strong-type") {
    s = {{"suite", suite},
         {"lambdas", lambdas},
         {"riemann", riemann},
         {"riemann_points", riemann_points},
         {"riemann_intervals", riemann_intervals},
         {"enforce_admissibility", enforce_admissibility}};
    shapes.add_to(s);
  } else {
    s = {{"functions", avg_functions}, {"centers", centers},     {"center_radius", center_radius},
         {"R0", R0},                   {"j_max", j_max},         {"epsilon", epsilon},
         {"weak_type", weak_type},     {"thresholds", thresholds}, {"weak_stride", weak_stride}};
    shapes.add_to(s);
  }
  j[scenario] = s;
  return j;
}

}  // namespace ocap

#endif  // OCAP_CONFIG_HPP

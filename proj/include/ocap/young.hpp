#ifndef OCAP_YOUNG_HPP
#define OCAP_YOUNG_HPP

// Parametric Young functions Phi(t) = t^p * phi(t) and their factors.
//
// Built-in families (L(t) = log(e + t), M(t) = log(c0 + t)):
//
//   power        Phi = t^p
//   power_log    Phi = t^p L^theta
//   exp_log      Phi = t^p exp(L^theta)
//   exp_loglog   Phi = t^p M^theta exp((log M)^gamma)
//   custom_table Phi interpolated piecewise-linearly from (t, Phi) samples
//
// Every family except custom_table carries the factorization t^p * phi(t),
// which the condition checkers and the ball estimate need.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ocap/error.hpp"

namespace ocap {

// Anything the energy solvers can evaluate: Phi and its density Phi'.
template <class F>
concept YoungFunction = requires(const F& f, double t) {
  { f.value(t) } -> std::convertible_to<double>;
  { f.derivative(t) } -> std::convertible_to<double>;
};

using ScalarFunction = std::function<double(double)>;

enum class Family { power, power_log, exp_log, exp_loglog, custom_table };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::power: return "power";
    case Family::power_log: return "power_log";
    case Family::exp_log: return "exp_log";
    case Family::exp_loglog: return "exp_loglog";
    case Family::custom_table: return "custom_table";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  if (name == "power") return Family::power;
  if (name == "power_log") return Family::power_log;
  if (name == "exp_log") return Family::exp_log;
  if (name == "exp_loglog") return Family::exp_loglog;
  if (name == "custom_table") return Family::custom_table;
  throw ConfigError("unknown Young-function family '" + std::string(name) + "'");
}

// Samples of a convex increasing Phi. (0, 0) is implied.
class YoungTable {
 public:
  YoungTable() = default;

  YoungTable(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size() || t.empty())
      throw ConfigError("Young table: need matching, non-empty t and Phi columns");
    if (t.front() < 0.0) throw ConfigError("Young table: t must be nonnegative");
    if (t.front() > 0.0) {
      t.insert(t.begin(), 0.0);
      v.insert(v.begin(), 0.0);
    } else if (v.front() != 0.0) {
      throw ConfigError("Young table: Phi(0) must be 0");
    }
    if (t.size() < 2) throw ConfigError("Young table: need at least one positive sample");
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!(t[i] > t[i - 1])) throw ConfigError("Young table: t must be strictly increasing");
      if (!(v[i] > v[i - 1])) throw ConfigError("Young table: Phi must be strictly increasing");
      if (!std::isfinite(v[i])) throw ConfigError("Young table: Phi must be finite");
    }
    t_ = std::move(t);
    v_ = std::move(v);
    slope_.resize(t_.size() - 1);
    for (std::size_t i = 0; i + 1 < t_.size(); ++i)
      slope_[i] = (v_[i + 1] - v_[i]) / (t_[i + 1] - t_[i]);
    for (std::size_t i = 1; i < slope_.size(); ++i) {
      if (slope_[i] < slope_[i - 1] * (1.0 - 1e-9))
        throw ConfigError("Young table: samples are not convex");
    }
  }

  // CSV rows "t,Phi"; blank lines, '#' comments and one non-numeric header
  // line are skipped.
  static YoungTable from_csv(std::istream& in) {
    std::vector<double> t, v;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      double a = 0, b = 0;
      if (!(row >> a >> b)) {
        if (first) {
          first = false;
          continue;
        }
        throw ConfigError("Young table: malformed row '" + line + "'");
      }
      first = false;
      t.push_back(a);
      v.push_back(b);
    }
    return YoungTable(std::move(t), std::move(v));
  }

  static YoungTable from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open Young table '" + path + "'");
    return from_csv(in);
  }

  double t_max() const { return t_.back(); }
  const std::vector<double>& t() const { return t_; }
  const std::vector<double>& values() const { return v_; }

  double value(double t) const {
    if (t <= 0.0) return 0.0;
    std::size_t i = segment(t);
    return v_[i] + slope_[i] * (t - t_[i]);
  }

  // Right derivative; the last slope continues past t_max.
  double derivative(double t) const {
    if (t < 0.0) return 0.0;
    return slope_[segment(t)];
  }

 private:
  std::size_t segment(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - t_.begin());
    i = i == 0 ? 0 : i - 1;
    return std::min(i, slope_.size() - 1);
  }

  std::vector<double> t_, v_, slope_;
};

// A Young function from one of the built-in families.
class YoungSpec {
 public:
  static constexpr double default_c0() { return 15.154262241479262; }  // e^e

  static YoungSpec power(double p) { return make(Family::power, p, 0.0, 0.0, default_c0()); }
  static YoungSpec power_log(double p, double theta) {
    return make(Family::power_log, p, theta, 0.0, default_c0());
  }
  static YoungSpec exp_log(double p, double theta) {
    return make(Family::exp_log, p, theta, 0.0, default_c0());
  }
  static YoungSpec exp_loglog(double p, double theta, double gamma, double c0 = default_c0()) {
    return make(Family::exp_loglog, p, theta, gamma, c0);
  }
  static YoungSpec custom(YoungTable table) {
    YoungSpec s;
    s.family_ = Family::custom_table;
    s.p_ = std::numeric_limits<double>::quiet_NaN();
    s.table_ = std::make_shared<const YoungTable>(std::move(table));
    return s;
  }

  Family family() const { return family_; }
  double p() const { return p_; }
  double theta() const { return theta_; }
  double gamma() const { return gamma_; }
  double c0() const { return c0_; }
  const YoungTable* table() const { return table_.get(); }

  bool has_factorization() const { return family_ != Family::custom_table; }

  // Largest t at which the function is data rather than extrapolation.
  double domain_limit() const {
    return table_ ? table_->t_max() : std::numeric_limits<double>::infinity();
  }

  double value(double t) const {
    if (t <= 0.0) return 0.0;
    if (family_ == Family::custom_table) return table_->value(t);
    return power_part(t) * factor(t);
  }

  double operator()(double t) const { return value(t); }

  // Phi'(t) = d/dt [t^p phi(t)].
  double derivative(double t) const {
    if (t <= 0.0) return 0.0;
    if (family_ == Family::custom_table) return table_->derivative(t);
    return p_ * power_part(t) / t * factor(t) + power_part(t) * factor_derivative(t);
  }

  // phi in Phi = t^p * phi.
  double factor(double t) const {
    t = std::max(t, 0.0);
    switch (family_) {
      case Family::power: return 1.0;
      case Family::power_log: return theta_ == 0.0 ? 1.0 : std::pow(std::log(std::numbers::e + t), theta_);
      case Family::exp_log: return std::exp(std::pow(std::log(std::numbers::e + t), theta_));
      case Family::exp_loglog: {
        double m = std::log(c0_ + t);
        return std::pow(m, theta_) * std::exp(std::pow(std::log(m), gamma_));
      }
      case Family::custom_table: break;
    }
    throw ConfigError("custom_table Young function has no t^p factorization");
  }

  double factor_derivative(double t) const {
    t = std::max(t, 0.0);
    switch (family_) {
      case Family::power: return 0.0;
      case Family::power_log: {
        if (theta_ == 0.0) return 0.0;
        double l = std::log(std::numbers::e + t);
        return theta_ * std::pow(l, theta_ - 1.0) / (std::numbers::e + t);
      }
      case Family::exp_log: {
        double l = std::log(std::numbers::e + t);
        return factor(t) * theta_ * std::pow(l, theta_ - 1.0) / (std::numbers::e + t);
      }
      case Family::exp_loglog: {
        double m = std::log(c0_ + t);
        double ll = std::log(m);
        double g = gamma_ == 0.0 ? 0.0 : gamma_ * std::pow(ll, gamma_ - 1.0);
        return factor(t) * (theta_ + g) / (m * (c0_ + t));
      }
      case Family::custom_table: break;
    }
    throw ConfigError("custom_table Young function has no t^p factorization");
  }

  void validate() const {
    if (family_ == Family::custom_table) {
      if (!table_) throw ConfigError("custom_table requires a table");
      return;
    }
    if (!(p_ > 1.0) || !std::isfinite(p_)) throw ConfigError("Young function: p must be > 1");
    if (!(theta_ >= 0.0) || !std::isfinite(theta_)) throw ConfigError("Young function: theta must be >= 0");
    if (family_ == Family::exp_log && !(theta_ < 1.0))
      throw ConfigError("exp_log: theta must lie in [0, 1)");
    if (family_ == Family::exp_loglog) {
      if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw ConfigError("exp_loglog: gamma must lie in [0, 1)");
      if (!(c0_ > std::numbers::e)) throw ConfigError("exp_loglog: c0 must exceed e");
    }
  }

 private:
  static YoungSpec make(Family f, double p, double theta, double gamma, double c0) {
    YoungSpec s;
    s.family_ = f;
    s.p_ = p;
    s.theta_ = theta;
    s.gamma_ = gamma;
    s.c0_ = c0;
    s.validate();
    return s;
  }

  double power_part(double t) const { return p_ == 2.0 ? t * t : std::pow(t, p_); }

  Family family_ = Family::power;
  double p_ = 2.0;
  double theta_ = 0.0;
  double gamma_ = 0.0;
  double c0_ = default_c0();
  std::shared_ptr<const YoungTable> table_;
};

static_assert(YoungFunction<YoungSpec>);

// Phi = f * phi and Psi = f * psi, the split the strong-type inequality is
// stated in.
struct FactoredPair {
  ScalarFunction f_part;
  ScalarFunction phi_part;
  ScalarFunction psi_part;

  double Phi(double t) const { return f_part(t) * phi_part(t); }
  double Psi(double t) const { return f_part(t) * psi_part(t); }
};

// t -> 1 / phi(1/t).
inline ScalarFunction derive_psi(ScalarFunction phi) {
  return [phi = std::move(phi)](double t) {
    if (!(t > 0.0)) throw std::domain_error("derive_psi: t must be positive");
    double v = phi(1.0 / t);
    if (!(v > 0.0)) throw std::domain_error("derive_psi: phi vanishes at 1/t");
    return 1.0 / v;
  };
}

inline FactoredPair factor_pair(const YoungSpec& spec) {
  if (!spec.has_factorization())
    throw ConfigError("factor_pair: Young function has no t^p factorization");
  double p = spec.p();
  ScalarFunction phi = [spec](double t) { return spec.factor(t); };
  return FactoredPair{
      [p](double t) { return t <= 0.0 ? 0.0 : std::pow(t, p); },
      phi,
      derive_psi(phi),
  };
}

// Psi(t) = t^p / phi(1/t), extended by Psi(0) = 0.
inline ScalarFunction derived_Psi(const YoungSpec& spec) {
  FactoredPair pair = factor_pair(spec);
  return [pair](double t) { return t <= 0.0 ? 0.0 : pair.Psi(t); };
}

inline ScalarFunction as_function(const YoungSpec& spec) {
  return [spec](double t) { return spec.value(t); };
}

}  // namespace ocap

#endif  // OCAP_YOUNG_HPP

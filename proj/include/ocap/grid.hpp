#ifndef OCAP_GRID_HPP
#define OCAP_GRID_HPP

// Cell-centred Cartesian lattice over [-R, R]^n, n in {2, 3}, carrying the
// ball B(0, R). Node i sits at -R + (i + 1/2) h with h = 2R / resolution.
//
//   inside    |x| <= R      quadrature weight h^n, otherwise 0
//   interior  |x| <= R - h  may carry nonzero W_0 values
//   band      everything else; functions in W_0 vanish there
//
// Gradients are forward differences with zero extension past the lattice
// edge.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ocap/error.hpp"

namespace ocap {

using Point = std::array<double, 3>;

class GridDomain {
 public:
  static constexpr int min_resolution = 32;

  static std::shared_ptr<const GridDomain> build(int n, double R, int resolution) {
    if (n != 2 && n != 3) throw ConfigError("GridDomain: dimension must be 2 or 3");
    if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("GridDomain: radius must be positive");
    if (resolution < min_resolution)
      throw ConfigError("GridDomain: resolution must be at least 32 nodes per diameter");
    return std::shared_ptr<const GridDomain>(new GridDomain(n, R, resolution));
  }

  int dim() const { return n_; }
  double radius() const { return R_; }
  int resolution() const { return N_; }
  double spacing() const { return h_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int d) const { return stride_[d]; }
  double cell_volume() const { return n_ == 2 ? h_ * h_ : h_ * h_ * h_; }

  double coord(int i) const { return -R_ + (i + 0.5) * h_; }

  std::array<int, 3> index(std::size_t id) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < n_; ++d) {
      idx[d] = static_cast<int>(id % N_);
      id /= N_;
    }
    return idx;
  }

  std::size_t id(const std::array<int, 3>& idx) const {
    std::size_t out = 0;
    for (int d = n_ - 1; d >= 0; --d) out = out * N_ + static_cast<std::size_t>(idx[d]);
    return out;
  }

  Point position(std::size_t id) const {
    auto idx = index(id);
    Point x{0.0, 0.0, 0.0};
    for (int d = 0; d < n_; ++d) x[d] = coord(idx[d]);
    return x;
  }

  double norm(std::size_t id) const { return norm_[id]; }
  bool inside(std::size_t id) const { return norm_[id] <= R_; }
  bool interior(std::size_t id) const { return interior_[id] != 0; }
  double weight(std::size_t id) const { return inside(id) ? cell_volume() : 0.0; }

  bool has_forward(std::size_t id, int d) const { return (forward_[id] >> d) & 1u; }

  // Ids of nodes with |x| <= R, ascending.
  const std::vector<std::size_t>& inside_ids() const { return inside_ids_; }

  // Nearest lattice node to x (clamped to the lattice).
  std::size_t nearest(const Point& x) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < n_; ++d) {
      int i = static_cast<int>(std::floor((x[d] + R_) / h_));
      idx[d] = std::clamp(i, 0, N_ - 1);
    }
    return id(idx);
  }

  double distance(std::size_t id, const Point& x) const {
    Point p = position(id);
    double s = 0.0;
    for (int d = 0; d < n_; ++d) s += (p[d] - x[d]) * (p[d] - x[d]);
    return std::sqrt(s);
  }

  double ball_volume() const {
    return n_ == 2 ? std::numbers::pi * R_ * R_ : 4.0 / 3.0 * std::numbers::pi * R_ * R_ * R_;
  }

  bool same_as(const GridDomain& o) const { return n_ == o.n_ && N_ == o.N_ && R_ == o.R_; }

 private:
  GridDomain(int n, double R, int N) : n_(n), R_(R), N_(N), h_(2.0 * R / N) {
    size_ = 1;
    for (int d = 0; d < n_; ++d) {
      stride_[d] = size_;
      size_ *= static_cast<std::size_t>(N_);
    }
    norm_.resize(size_);
    interior_.resize(size_);
    forward_.resize(size_);
    for (std::size_t id = 0; id < size_; ++id) {
      auto idx = index(id);
      auto x = position(id);
      double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      norm_[id] = r;
      interior_[id] = r <= R_ - h_ ? 1 : 0;
      std::uint8_t f = 0;
      for (int d = 0; d < n_; ++d)
        if (idx[d] + 1 < N_) f = static_cast<std::uint8_t>(f | (1u << d));
      forward_[id] = f;
      if (r <= R_) inside_ids_.push_back(id);
    }
  }

  int n_;
  double R_;
  int N_;
  double h_;
  std::size_t size_ = 0;
  std::array<std::size_t, 3> stride_{1, 1, 1};
  std::vector<double> norm_;
  std::vector<std::uint8_t> interior_;
  std::vector<std::uint8_t> forward_;
  std::vector<std::size_t> inside_ids_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

inline void require_same_domain(const GridDomain& a, const GridDomain& b) {
  if (&a != &b && !a.same_as(b)) throw std::invalid_argument("grid objects live on different domains");
}

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(DomainPtr dom, double fill = 0.0)
      : dom_(std::move(dom)), v_(dom_->size(), fill) {}
  GridFunction(DomainPtr dom, std::vector<double> values) : dom_(std::move(dom)), v_(std::move(values)) {
    if (v_.size() != dom_->size()) throw std::invalid_argument("GridFunction: value count mismatch");
  }

  // Samples f at every node; band nodes are set to 0.
  static GridFunction sample(DomainPtr dom, const std::function<double(const Point&)>& f) {
    GridFunction u(dom);
    for (std::size_t i = 0; i < dom->size(); ++i)
      if (dom->interior(i)) u.v_[i] = f(dom->position(i));
    return u;
  }

  const GridDomain& domain() const { return *dom_; }
  const DomainPtr& domain_ptr() const { return dom_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  bool is_zero() const { return max_abs() == 0.0; }

  // Zero on the boundary band, as required of W_0 candidates.
  bool vanishes_on_band() const {
    for (std::size_t i = 0; i < v_.size(); ++i)
      if (!dom_->interior(i) && v_[i] != 0.0) return false;
    return true;
  }

  GridFunction scaled(double lambda) const {
    GridFunction out(*this);
    for (double& x : out.v_) x *= lambda;
    return out;
  }

  GridFunction abs() const {
    GridFunction out(*this);
    for (double& x : out.v_) x = std::abs(x);
    return out;
  }

 private:
  DomainPtr dom_;
  std::vector<double> v_;
};

class SetMask {
 public:
  SetMask() = default;
  explicit SetMask(DomainPtr dom) : dom_(std::move(dom)), m_(dom_->size(), 0) {}

  static SetMask ball(DomainPtr dom, const Point& center, double r) {
    SetMask m(dom);
    for (std::size_t i = 0; i < dom->size(); ++i)
      if (dom->distance(i, center) <= r) m.m_[i] = 1;
    return m;
  }

  const GridDomain& domain() const { return *dom_; }
  const DomainPtr& domain_ptr() const { return dom_; }
  std::size_t size() const { return m_.size(); }
  bool operator[](std::size_t i) const { return m_[i] != 0; }
  void set(std::size_t i, bool on = true) { m_[i] = on ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(m_.begin(), m_.end(), std::uint8_t{1}));
  }
  bool empty() const { return count() == 0; }

  // Marked nodes lie strictly inside B(0, R - 2h).
  bool respects_margin() const {
    const double lim = dom_->radius() - 2.0 * dom_->spacing();
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (m_[i] && !(dom_->norm(i) < lim)) return false;
    return true;
  }

  bool subset_of(const SetMask& o) const {
    require_same_domain(*dom_, o.domain());
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (m_[i] && !o.m_[i]) return false;
    return true;
  }

  SetMask united(const SetMask& o) const {
    require_same_domain(*dom_, o.domain());
    SetMask out(*this);
    for (std::size_t i = 0; i < m_.size(); ++i) out.m_[i] = m_[i] | o.m_[i];
    return out;
  }

  SetMask intersected(const SetMask& o) const {
    require_same_domain(*dom_, o.domain());
    SetMask out(*this);
    for (std::size_t i = 0; i < m_.size(); ++i) out.m_[i] = m_[i] & o.m_[i];
    return out;
  }

  // Packed bits; equal keys on one domain mean equal sets.
  std::string key() const {
    std::string k((m_.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (m_[i]) k[i / 8] = static_cast<char>(k[i / 8] | (1 << (i % 8)));
    return k;
  }

  friend bool operator==(const SetMask& a, const SetMask& b) { return a.m_ == b.m_; }

 private:
  DomainPtr dom_;
  std::vector<std::uint8_t> m_;
};

// n components per node, component-major within a node.
struct VectorField {
  DomainPtr domain;
  int components = 0;
  std::vector<double> data;

  double magnitude(std::size_t i) const {
    double s = 0.0;
    for (int d = 0; d < components; ++d) s += data[i * components + d] * data[i * components + d];
    return std::sqrt(s);
  }
};

namespace detail {

// Forward difference of u along axis d at node i; zero past the lattice edge.
inline double forward_diff(const GridDomain& dom, std::span<const double> u, std::size_t i, int d) {
  double next = dom.has_forward(i, d) ? u[i + dom.stride(d)] : 0.0;
  return (next - u[i]) / dom.spacing();
}

}  // namespace detail

inline VectorField gradient(const GridFunction& u) {
  const auto& dom = u.domain();
  VectorField g{u.domain_ptr(), dom.dim(), std::vector<double>(dom.size() * dom.dim())};
  for (std::size_t i = 0; i < dom.size(); ++i)
    for (int d = 0; d < dom.dim(); ++d)
      g.data[i * dom.dim() + d] = detail::forward_diff(dom, u.values(), i, d);
  return g;
}

inline GridFunction gradient_magnitude(const GridFunction& u) {
  const auto& dom = u.domain();
  GridFunction out(u.domain_ptr());
  for (std::size_t i = 0; i < dom.size(); ++i) {
    double s = 0.0;
    for (int d = 0; d < dom.dim(); ++d) {
      double g = detail::forward_diff(dom, u.values(), i, d);
      s += g * g;
    }
    out[i] = std::sqrt(s);
  }
  return out;
}

// Weighted nodal sum over the ball.
inline double integrate(const GridFunction& field) {
  const auto& dom = field.domain();
  double s = 0.0;
  for (std::size_t i : dom.inside_ids()) s += field[i];
  return s * dom.cell_volume();
}

template <class F>
GridFunction map_values(const GridFunction& u, F&& f) {
  GridFunction out(u.domain_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = f(u[i]);
  return out;
}

// Nodes with |u| > t.
inline SetMask level_mask(const GridFunction& u, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("level_mask: level must be positive");
  SetMask m(u.domain_ptr());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (std::abs(u[i]) > t) m.set(i);
  return m;
}

// {u != 0}.
inline SetMask support_mask(const GridFunction& u) {
  SetMask m(u.domain_ptr());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) m.set(i);
  return m;
}

}  // namespace ocap

#endif  // OCAP_GRID_HPP

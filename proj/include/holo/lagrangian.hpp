#pragma once

#include "holo/core.hpp"

#include <functional>
#include <map>
#include <optional>

namespace holo {

/// A Lagrangian L(x, v, t). Partials that are not supplied analytically are
/// computed by central differences. Lxv(i, j) is the mixed partial in x_i, v_j.
class Lagrangian {
 public:
  using ScalarFn = std::function<double(const PhasePoint&)>;
  using VectorFn = std::function<Vec(const PhasePoint&)>;
  using MatrixFn = std::function<Mat(const PhasePoint&)>;

  Lagrangian() = default;
  Lagrangian(std::string name, int n, ScalarFn value)
      : name_(std::move(name)), n_(n), value_(std::move(value)) {
    if (n < 1) throw InvalidInput("Lagrangian dimension must be at least 1");
    if (!value_) throw InvalidInput("Lagrangian needs a value function");
  }

  Lagrangian& with_Lx(VectorFn f) { return set(lx_, std::move(f)); }
  Lagrangian& with_Lv(VectorFn f) { return set(lv_, std::move(f)); }
  Lagrangian& with_Lt(ScalarFn f) { return set(lt_, std::move(f)); }
  Lagrangian& with_Lvv(MatrixFn f) { return set(lvv_, std::move(f)); }
  Lagrangian& with_Lxv(MatrixFn f) { return set(lxv_, std::move(f)); }
  Lagrangian& with_Lvt(VectorFn f) { return set(lvt_, std::move(f)); }
  Lagrangian& set_fiber_convex(bool on) {
    fiber_convex_ = on;
    return *this;
  }

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  bool fiber_convex() const { return fiber_convex_; }
  bool fully_analytic() const { return lx_ && lv_ && lt_ && lvv_ && lxv_ && lvt_; }

  double operator()(const PhasePoint& p) const { return value_(p); }
  double value(const PhasePoint& p) const { return value_(p); }

  Vec Lx(const PhasePoint& p) const {
    if (lx_) return lx_(p);
    Vec g(n_);
    for (int i = 0; i < n_; ++i) g(i) = central(p, Slot::X, i);
    return g;
  }

  Vec Lv(const PhasePoint& p) const {
    if (lv_) return lv_(p);
    Vec g(n_);
    for (int i = 0; i < n_; ++i) g(i) = central(p, Slot::V, i);
    return g;
  }

  double Lt(const PhasePoint& p) const {
    if (lt_) return lt_(p);
    return central(p, Slot::T, 0);
  }

  Mat Lvv(const PhasePoint& p) const {
    if (lvv_) return lvv_(p);
    Mat h(n_, n_);
    if (lv_) {
      for (int j = 0; j < n_; ++j) h.col(j) = diff_of_Lv(p, Slot::V, j);
      return 0.5 * (h + h.transpose());
    }
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) h(i, j) = h(j, i) = second(p, Slot::V, i, Slot::V, j);
    return h;
  }

  Mat Lxv(const PhasePoint& p) const {
    if (lxv_) return lxv_(p);
    Mat h(n_, n_);
    if (lv_) {
      for (int i = 0; i < n_; ++i) h.row(i) = diff_of_Lv(p, Slot::X, i).transpose();
      return h;
    }
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) h(i, j) = second(p, Slot::X, i, Slot::V, j);
    return h;
  }

  Vec Lvt(const PhasePoint& p) const {
    if (lvt_) return lvt_(p);
    if (lv_) return diff_of_Lv(p, Slot::T, 0);
    Vec g(n_);
    for (int i = 0; i < n_; ++i) g(i) = second(p, Slot::V, i, Slot::T, 0);
    return g;
  }

 private:
  enum class Slot { X, V, T };

  template <class F>
  Lagrangian& set(F& slot, F f) {
    slot = std::move(f);
    return *this;
  }

  static double& coord(PhasePoint& p, Slot s, int i) {
    return s == Slot::X ? p.x(i) : (s == Slot::V ? p.v(i) : p.t);
  }
  static double coord(const PhasePoint& p, Slot s, int i) {
    return s == Slot::X ? p.x(i) : (s == Slot::V ? p.v(i) : p.t);
  }

  static double step1(double y) { return std::cbrt(machine_eps()) * std::max(1.0, std::abs(y)); }
  static double step2(double y) { return std::pow(machine_eps(), 0.25) * std::max(1.0, std::abs(y)); }

  double central(const PhasePoint& p, Slot s, int i) const {
    const double h = step1(coord(p, s, i));
    PhasePoint a = p, b = p;
    coord(a, s, i) += h;
    coord(b, s, i) -= h;
    return (value_(a) - value_(b)) / (2.0 * h);
  }

  Vec diff_of_Lv(const PhasePoint& p, Slot s, int i) const {
    const double h = step1(coord(p, s, i));
    PhasePoint a = p, b = p;
    coord(a, s, i) += h;
    coord(b, s, i) -= h;
    return (lv_(a) - lv_(b)) / (2.0 * h);
  }

  double second(const PhasePoint& p, Slot sa, int i, Slot sb, int j) const {
    const double ha = step2(coord(p, sa, i));
    if (sa == sb && i == j) {
      PhasePoint a = p, b = p;
      coord(a, sa, i) += ha;
      coord(b, sa, i) -= ha;
      return (value_(a) - 2.0 * value_(p) + value_(b)) / (ha * ha);
    }
    const double hb = step2(coord(p, sb, j));
    auto eval = [&](double da, double db) {
      PhasePoint q = p;
      coord(q, sa, i) += da;
      coord(q, sb, j) += db;
      return value_(q);
    };
    return (eval(ha, hb) - eval(ha, -hb) - eval(-ha, hb) + eval(-ha, -hb)) / (4.0 * ha * hb);
  }

  std::string name_;
  int n_ = 1;
  ScalarFn value_;
  VectorFn lx_, lv_, lvt_;
  ScalarFn lt_;
  MatrixFn lvv_, lxv_;
  bool fiber_convex_ = true;
};

using LagrangianParams = std::map<std::string, std::vector<double>>;

namespace detail {

inline double param(const LagrangianParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1) throw InvalidInput("parameter '" + key + "' must be a scalar");
  return it->second.front();
}

inline Lagrangian quadratic_kinetic(std::string name, int n, std::function<double(const Vec&)> U,
                                    std::function<Vec(const Vec&)> dU) {
  Lagrangian L(std::move(name), n,
               [U](const PhasePoint& p) { return 0.5 * p.v.squaredNorm() - U(p.x); });
  L.with_Lx([dU](const PhasePoint& p) -> Vec { return -dU(p.x); })
      .with_Lv([](const PhasePoint& p) -> Vec { return p.v; })
      .with_Lt([](const PhasePoint&) { return 0.0; })
      .with_Lvv([n](const PhasePoint&) -> Mat { return Mat::Identity(n, n); })
      .with_Lxv([n](const PhasePoint&) -> Mat { return Mat::Zero(n, n); })
      .with_Lvt([n](const PhasePoint&) -> Vec { return Vec::Zero(n); });
  return L;
}

}  // namespace detail

inline std::vector<std::string> lagrangian_names() {
  return {"free", "oscillator", "mechanical", "example33", "torus_v2", "double_well", "magnetic", "caldirola"};
}

/// Builds a registered Lagrangian.
///   free          |v|^2 / 2
///   oscillator    |v|^2 / 2 - k |x|^2 / 2                      {k}
///   mechanical    |v|^2 / 2 - sum_i U(x_i), U(y) = sum_p U_p y^p  {U}
///   example33     ((v1-1)^2 + (v2-1)^2) ((v1-1)^2 + (v2+1)^2)  (n = 2)
///   torus_v2      |v|^2
///   double_well   (|v|^2 - 1)^2 + tilt v1                      {tilt}
///   magnetic      |v|^2 / 2 + b (x1 v2 - x2 v1) / 2            {b} (n = 2)
///   caldirola     exp(gamma t) (|v|^2 / 2 - k |x|^2 / 2)       {gamma, k}
inline Lagrangian make_lagrangian(const std::string& name, int n, const LagrangianParams& params = {}) {
  if (n < 1) throw InvalidInput("Lagrangian dimension must be at least 1");
  if (name == "free")
    return detail::quadratic_kinetic("free", n, [](const Vec&) { return 0.0; },
                                     [](const Vec& x) -> Vec { return Vec::Zero(x.size()); });
  if (name == "oscillator") {
    const double k = detail::param(params, "k", 1.0);
    return detail::quadratic_kinetic("oscillator", n,
                                     [k](const Vec& x) { return 0.5 * k * x.squaredNorm(); },
                                     [k](const Vec& x) -> Vec { return k * x; });
  }
  if (name == "mechanical") {
    auto it = params.find("U");
    const std::vector<double> c = it == params.end() ? std::vector<double>{0.0, 0.0, 0.5} : it->second;
    auto U1 = [c](double y) {
      double s = 0.0, pw = 1.0;
      for (double ck : c) s += ck * pw, pw *= y;
      return s;
    };
    auto dU1 = [c](double y) {
      double s = 0.0, pw = 1.0;
      for (std::size_t p = 1; p < c.size(); ++p) s += static_cast<double>(p) * c[p] * pw, pw *= y;
      return s;
    };
    return detail::quadratic_kinetic(
        "mechanical", n,
        [U1](const Vec& x) {
          double s = 0.0;
          for (Eigen::Index i = 0; i < x.size(); ++i) s += U1(x(i));
          return s;
        },
        [dU1](const Vec& x) -> Vec {
          Vec g(x.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) g(i) = dU1(x(i));
          return g;
        });
  }
  if (name == "example33") {
    if (n != 2) throw InvalidInput("example33 is defined for n = 2");
    auto parts = [](const Vec& v, double& a, double& b, Vec& ga, Vec& gb) {
      a = (v(0) - 1) * (v(0) - 1) + (v(1) - 1) * (v(1) - 1);
      b = (v(0) - 1) * (v(0) - 1) + (v(1) + 1) * (v(1) + 1);
      ga = Vec(2), gb = Vec(2);
      ga << 2 * (v(0) - 1), 2 * (v(1) - 1);
      gb << 2 * (v(0) - 1), 2 * (v(1) + 1);
    };
    Lagrangian L("example33", 2, [parts](const PhasePoint& p) {
      double a, b;
      Vec ga, gb;
      parts(p.v, a, b, ga, gb);
      return a * b;
    });
    L.with_Lx([](const PhasePoint&) -> Vec { return Vec::Zero(2); })
        .with_Lv([parts](const PhasePoint& p) -> Vec {
          double a, b;
          Vec ga, gb;
          parts(p.v, a, b, ga, gb);
          return b * ga + a * gb;
        })
        .with_Lt([](const PhasePoint&) { return 0.0; })
        .with_Lvv([parts](const PhasePoint& p) -> Mat {
          double a, b;
          Vec ga, gb;
          parts(p.v, a, b, ga, gb);
          return 2.0 * (a + b) * Mat::Identity(2, 2) + ga * gb.transpose() + gb * ga.transpose();
        })
        .with_Lxv([](const PhasePoint&) -> Mat { return Mat::Zero(2, 2); })
        .with_Lvt([](const PhasePoint&) -> Vec { return Vec::Zero(2); });
    return L;
  }
  if (name == "torus_v2") {
    Lagrangian L("torus_v2", n, [](const PhasePoint& p) { return p.v.squaredNorm(); });
    L.with_Lx([n](const PhasePoint&) -> Vec { return Vec::Zero(n); })
        .with_Lv([](const PhasePoint& p) -> Vec { return 2.0 * p.v; })
        .with_Lt([](const PhasePoint&) { return 0.0; })
        .with_Lvv([n](const PhasePoint&) -> Mat { return 2.0 * Mat::Identity(n, n); })
        .with_Lxv([n](const PhasePoint&) -> Mat { return Mat::Zero(n, n); })
        .with_Lvt([n](const PhasePoint&) -> Vec { return Vec::Zero(n); });
    return L;
  }
  if (name == "double_well") {
    const double tilt = detail::param(params, "tilt", 0.0);
    Lagrangian L("double_well", n, [tilt](const PhasePoint& p) {
      const double r = p.v.squaredNorm() - 1.0;
      return r * r + tilt * p.v(0);
    });
    L.with_Lx([n](const PhasePoint&) -> Vec { return Vec::Zero(n); })
        .with_Lv([tilt](const PhasePoint& p) -> Vec {
          Vec g = 4.0 * (p.v.squaredNorm() - 1.0) * p.v;
          g(0) += tilt;
          return g;
        })
        .with_Lt([](const PhasePoint&) { return 0.0; })
        .with_Lvv([n](const PhasePoint& p) -> Mat {
          return 4.0 * (p.v.squaredNorm() - 1.0) * Mat::Identity(n, n) + 8.0 * p.v * p.v.transpose();
        })
        .with_Lxv([n](const PhasePoint&) -> Mat { return Mat::Zero(n, n); })
        .with_Lvt([n](const PhasePoint&) -> Vec { return Vec::Zero(n); })
        .set_fiber_convex(false);
    return L;
  }
  if (name == "magnetic") {
    if (n != 2) throw InvalidInput("magnetic is defined for n = 2");
    const double b = detail::param(params, "b", 1.0);
    Lagrangian L("magnetic", 2, [b](const PhasePoint& p) {
      return 0.5 * p.v.squaredNorm() + 0.5 * b * (p.x(0) * p.v(1) - p.x(1) * p.v(0));
    });
    L.with_Lx([b](const PhasePoint& p) -> Vec {
       Vec g(2);
       g << 0.5 * b * p.v(1), -0.5 * b * p.v(0);
       return g;
     })
        .with_Lv([b](const PhasePoint& p) -> Vec {
          Vec g(2);
          g << p.v(0) - 0.5 * b * p.x(1), p.v(1) + 0.5 * b * p.x(0);
          return g;
        })
        .with_Lt([](const PhasePoint&) { return 0.0; })
        .with_Lvv([](const PhasePoint&) -> Mat { return Mat::Identity(2, 2); })
        .with_Lxv([b](const PhasePoint&) -> Mat {
          Mat m(2, 2);
          m << 0.0, 0.5 * b, -0.5 * b, 0.0;
          return m;
        })
        .with_Lvt([](const PhasePoint&) -> Vec { return Vec::Zero(2); });
    return L;
  }
  if (name == "caldirola") {
    const double g = detail::param(params, "gamma", 0.5);
    const double k = detail::param(params, "k", 1.0);
    auto base = [k](const PhasePoint& p) { return 0.5 * p.v.squaredNorm() - 0.5 * k * p.x.squaredNorm(); };
    Lagrangian L("caldirola", n, [g, base](const PhasePoint& p) { return std::exp(g * p.t) * base(p); });
    L.with_Lx([g, k](const PhasePoint& p) -> Vec { return -k * std::exp(g * p.t) * p.x; })
        .with_Lv([g](const PhasePoint& p) -> Vec { return std::exp(g * p.t) * p.v; })
        .with_Lt([g, base](const PhasePoint& p) { return g * std::exp(g * p.t) * base(p); })
        .with_Lvv([g, n](const PhasePoint& p) -> Mat { return std::exp(g * p.t) * Mat::Identity(n, n); })
        .with_Lxv([n](const PhasePoint&) -> Mat { return Mat::Zero(n, n); })
        .with_Lvt([g](const PhasePoint& p) -> Vec { return g * std::exp(g * p.t) * p.v; });
    return L;
  }
  throw InvalidInput("unknown Lagrangian '" + name + "'");
}

/// Copy of L that exposes only its value, so every partial is a finite difference.
inline Lagrangian value_only(const Lagrangian& L) {
  Lagrangian copy = L;
  return Lagrangian(L.name() + "/fd", L.n(), [copy](const PhasePoint& p) { return copy(p); })
      .set_fiber_convex(L.fiber_convex());
}

}  // namespace holo

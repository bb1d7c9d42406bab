#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace holo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class UnsupportedSetting : public Error {
 public:
  using Error::Error;
};

class BasisConstructionError : public Error {
 public:
  using Error::Error;
};

class SingularHessian : public Error {
 public:
  SingularHessian(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class FlowEscape : public Error {
 public:
  FlowEscape(const std::string& what, std::size_t atom)
      : Error(what), atom_(atom) {}
  std::size_t atom() const noexcept { return atom_; }

 private:
  std::size_t atom_;
};

class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, Vec certificate)
      : Error(what), certificate_(std::move(certificate)) {}
  const Vec& certificate() const noexcept { return certificate_; }

 private:
  Vec certificate_;
};

// ---------------------------------------------------------------------------
// Phase space

/// A point (x, v, t) of the tangent bundle times the time interval.
struct PhasePoint {
  Vec x;
  Vec v;
  double t = 0.0;

  int dim() const { return static_cast<int>(x.size()); }
};

/// A tangent vector to phase space, one block per coordinate group.
struct PhaseTangent {
  Vec dx;
  Vec dv;
  double dt = 0.0;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Configuration space U times [0, t0]. Each spatial coordinate is either
/// periodic with a period, or lies in a closed interval (possibly infinite).
struct Domain {
  int n = 1;
  double t0 = 1.0;
  std::vector<bool> periodic;
  std::vector<double> period;
  std::vector<std::pair<double, double>> bounds;
  bool time_independent = false;

  static Domain euclidean(int n, double t0) {
    Domain d;
    d.n = n;
    d.t0 = t0;
    d.periodic.assign(n, false);
    d.period.assign(n, 0.0);
    d.bounds.assign(n, {-kInf, kInf});
    d.validate();
    return d;
  }

  static Domain box(std::vector<std::pair<double, double>> b, double t0) {
    Domain d = euclidean(static_cast<int>(b.size()), t0);
    d.bounds = std::move(b);
    d.validate();
    return d;
  }

  static Domain torus(int n, double t0, double period = 1.0) {
    Domain d;
    d.n = n;
    d.t0 = t0;
    d.periodic.assign(n, true);
    d.period.assign(n, period);
    d.bounds.assign(n, {0.0, period});
    d.validate();
    return d;
  }

  Domain& set_time_independent(bool on = true) {
    time_independent = on;
    return *this;
  }

  void validate() const {
    if (n < 1) throw InvalidInput("domain dimension must be at least 1");
    if (!(t0 > 0.0) || !std::isfinite(t0))
      throw InvalidInput("domain time horizon must be positive and finite");
    const auto un = static_cast<std::size_t>(n);
    if (periodic.size() != un || period.size() != un || bounds.size() != un)
      throw InvalidInput("domain coordinate descriptors have wrong length");
    for (std::size_t i = 0; i < un; ++i) {
      if (periodic[i]) {
        if (!(period[i] > 0.0) || !std::isfinite(period[i]))
          throw InvalidInput("periodic coordinate needs a positive period");
      } else if (!(bounds[i].first < bounds[i].second)) {
        throw InvalidInput("coordinate bounds must satisfy lo < hi");
      }
    }
  }

  double wrap(int i, double xi) const {
    const auto k = static_cast<std::size_t>(i);
    if (!periodic[k]) return xi;
    double r = std::fmod(xi, period[k]);
    if (r < 0.0) r += period[k];
    if (r >= period[k]) r -= period[k];
    return r;
  }

  Vec wrap(const Vec& x) const {
    Vec y = x;
    for (int i = 0; i < n; ++i) y(i) = wrap(i, x(i));
    return y;
  }

  bool contains_base(const Vec& x, double tol = 1e-12) const {
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (periodic[k]) continue;
      if (x(i) < bounds[k].first - tol || x(i) > bounds[k].second + tol) return false;
    }
    return true;
  }

  bool contains_time(double t, double tol = 1e-12) const {
    return t >= -tol * t0 && t <= t0 * (1.0 + tol);
  }

  /// Signed displacement b - a, shortest representative on periodic axes.
  Vec displacement(const Vec& a, const Vec& b) const {
    Vec d = b - a;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (periodic[k]) d(i) -= period[k] * std::round(d(i) / period[k]);
    }
    return d;
  }

  bool operator==(const Domain& o) const {
    return n == o.n && t0 == o.t0 && periodic == o.periodic && period == o.period &&
           bounds == o.bounds && time_independent == o.time_independent;
  }
};

// ---------------------------------------------------------------------------
// Jets

/// Value, first and second partials of a scalar function on phase space.
/// hess_xv(i, j) is the mixed partial in x_i and v_j.
struct Jet2 {
  double value = 0.0;
  Vec grad_x, grad_v;
  double dt = 0.0;
  Mat hess_xx, hess_xv, hess_vv;
  Vec dxt, dvt;
  double dtt = 0.0;

  explicit Jet2(int n = 0)
      : grad_x(Vec::Zero(n)),
        grad_v(Vec::Zero(n)),
        hess_xx(Mat::Zero(n, n)),
        hess_xv(Mat::Zero(n, n)),
        hess_vv(Mat::Zero(n, n)),
        dxt(Vec::Zero(n)),
        dvt(Vec::Zero(n)) {}

  double gradient_norm() const {
    return std::sqrt(grad_x.squaredNorm() + grad_v.squaredNorm() + dt * dt);
  }
};

inline double machine_eps() { return std::numeric_limits<double>::epsilon(); }

/// Condition number in the 2-norm; infinity for a singular matrix.
inline double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double lo = s(s.size() - 1);
  if (lo <= 0.0) return kInf;
  return s(0) / lo;
}

}  // namespace holo

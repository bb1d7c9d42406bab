#pragma once

#include "holo/core.hpp"
#include "holo/test_functions.hpp"

#include <functional>

namespace holo {

struct Atom {
  PhasePoint point;
  double weight = 0.0;
};

/// Finite positive combination of Dirac masses on phase space.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  AtomicMeasure(Domain domain, std::vector<Atom> atoms)
      : domain_(std::move(domain)), atoms_(std::move(atoms)) {
    domain_.validate();
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      Atom& a = atoms_[k];
      if (a.point.x.size() != domain_.n || a.point.v.size() != domain_.n)
        throw InvalidInput("atom " + std::to_string(k) + " has the wrong dimension");
      if (!(a.weight > 0.0) || !std::isfinite(a.weight))
        throw InvalidInput("atom " + std::to_string(k) + " has a non-positive weight");
      if (!a.point.x.allFinite() || !a.point.v.allFinite() || !std::isfinite(a.point.t))
        throw InvalidInput("atom " + std::to_string(k) + " is not finite");
      if (!domain_.contains_time(a.point.t, 1e-9))
        throw InvalidInput("atom " + std::to_string(k) + " lies outside [0, t0]");
      a.point.x = domain_.wrap(a.point.x);
      if (!domain_.contains_base(a.point.x, 1e-9))
        throw InvalidInput("atom " + std::to_string(k) + " lies outside the domain");
    }
  }

  const Domain& domain() const { return domain_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const Atom& operator[](std::size_t k) const { return atoms_[k]; }

  double mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight;
    return m;
  }

  /// Sum of weight * g(point) over atoms.
  template <class G>
  double integrate(G&& g) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * g(a.point);
    return s;
  }

 private:
  Domain domain_;
  std::vector<Atom> atoms_;
};

/// Samples of a curve gamma on a time grid covering [0, t0].
struct CurveSamples {
  std::vector<double> times;
  std::vector<Vec> positions;
  std::vector<Vec> velocities;
  std::vector<Vec> accelerations;  // optional

  std::size_t size() const { return times.size(); }
};

enum class QuadratureRule { Trapezoid, Midpoint, Simpson };

inline std::string to_string(QuadratureRule r) {
  switch (r) {
    case QuadratureRule::Trapezoid: return "trapezoid";
    case QuadratureRule::Midpoint: return "midpoint";
    case QuadratureRule::Simpson: return "simpson";
  }
  return "?";
}

inline QuadratureRule quadrature_from_string(const std::string& s) {
  if (s == "trapezoid") return QuadratureRule::Trapezoid;
  if (s == "midpoint") return QuadratureRule::Midpoint;
  if (s == "simpson") return QuadratureRule::Simpson;
  throw InvalidInput("unknown quadrature rule '" + s + "'");
}

namespace detail {

inline void validate_curve(const Domain& dom, const CurveSamples& c, QuadratureRule rule) {
  const std::size_t m = c.times.size();
  if (m < 2) throw InvalidInput("a curve needs at least two samples");
  if (c.positions.size() != m || c.velocities.size() != m)
    throw InvalidInput("curve positions and velocities must match the time grid");
  if (!c.accelerations.empty() && c.accelerations.size() != m)
    throw InvalidInput("curve accelerations must match the time grid");
  for (std::size_t k = 1; k < m; ++k)
    if (!(c.times[k] > c.times[k - 1])) throw InvalidInput("curve times must be strictly increasing");
  const double tol = 1e-9 * dom.t0;
  if (std::abs(c.times.front()) > tol || std::abs(c.times.back() - dom.t0) > tol)
    throw InvalidInput("curve time grid must start at 0 and end at t0");
  for (std::size_t k = 0; k < m; ++k) {
    if (c.positions[k].size() != dom.n || c.velocities[k].size() != dom.n)
      throw InvalidInput("curve sample " + std::to_string(k) + " has the wrong dimension");
    if (!dom.contains_base(dom.wrap(c.positions[k]), 1e-9))
      throw InvalidInput("curve sample " + std::to_string(k) + " leaves the domain");
  }
  if (rule == QuadratureRule::Simpson) {
    if (m % 2 == 0) throw InvalidInput("simpson rule needs an odd number of samples");
    const double h = (c.times.back() - c.times.front()) / static_cast<double>(m - 1);
    for (std::size_t k = 1; k < m; ++k)
      if (std::abs(c.times[k] - c.times[k - 1] - h) > 1e-9 * h)
        throw InvalidInput("simpson rule needs a uniform time grid");
  }
}

struct HermiteMid {
  Vec x, v, a;
};

// Cubic Hermite interpolant through (x, v) at both ends, evaluated at the midpoint.
inline HermiteMid hermite_midpoint(const Vec& xa, const Vec& va, const Vec& xb, const Vec& vb, double h) {
  HermiteMid m;
  m.x = 0.5 * (xa + xb) + (h / 8.0) * (va - vb);
  m.v = 1.5 * (xb - xa) / h - 0.25 * (va + vb);
  m.a = (vb - va) / h;
  return m;
}

}  // namespace detail

/// Quadrature weights the given rule assigns to the sample times.
inline std::vector<double> quadrature_weights(const std::vector<double>& times, QuadratureRule rule) {
  const std::size_t m = times.size();
  std::vector<double> w;
  switch (rule) {
    case QuadratureRule::Trapezoid:
      w.assign(m, 0.0);
      for (std::size_t k = 0; k + 1 < m; ++k) {
        const double h = times[k + 1] - times[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
      }
      break;
    case QuadratureRule::Simpson: {
      const double h = (times.back() - times.front()) / static_cast<double>(m - 1);
      w.assign(m, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        const double c = (k == 0 || k + 1 == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        w[k] = c * h / 3.0;
      }
      break;
    }
    case QuadratureRule::Midpoint:
      for (std::size_t k = 0; k + 1 < m; ++k) w.push_back(times[k + 1] - times[k]);
      break;
  }
  return w;
}

/// Curve measure: atoms (gamma(t_k), gamma'(t_k), t_k) weighted by the quadrature
/// rule. The midpoint rule places atoms at interval midpoints using the cubic
/// Hermite interpolant of the samples.
inline AtomicMeasure from_curve(const Domain& dom, const CurveSamples& c,
                                QuadratureRule rule = QuadratureRule::Trapezoid) {
  dom.validate();
  detail::validate_curve(dom, c, rule);
  const auto w = quadrature_weights(c.times, rule);
  std::vector<Atom> atoms;
  if (rule == QuadratureRule::Midpoint) {
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
      const double h = c.times[k + 1] - c.times[k];
      const auto mid = detail::hermite_midpoint(c.positions[k], c.velocities[k], c.positions[k + 1],
                                                c.velocities[k + 1], h);
      atoms.push_back({{mid.x, mid.v, 0.5 * (c.times[k] + c.times[k + 1])}, w[k]});
    }
  } else {
    for (std::size_t k = 0; k < c.size(); ++k)
      atoms.push_back({{c.positions[k], c.velocities[k], c.times[k]}, w[k]});
  }
  return AtomicMeasure(dom, std::move(atoms));
}

/// Accelerations at the atoms produced by from_curve with the same rule.
inline std::vector<Vec> curve_accelerations(const CurveSamples& c, QuadratureRule rule) {
  if (rule == QuadratureRule::Midpoint) {
    std::vector<Vec> out;
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
      const double h = c.times[k + 1] - c.times[k];
      out.push_back(detail::hermite_midpoint(c.positions[k], c.velocities[k], c.positions[k + 1],
                                             c.velocities[k + 1], h)
                        .a);
    }
    return out;
  }
  if (c.accelerations.size() != c.size())
    throw InvalidInput("curve samples carry no accelerations");
  return c.accelerations;
}

/// Samples t -> (gamma(t), gamma'(t), gamma''(t)) on a uniform grid of `nodes` points.
template <class Pos, class Vel, class Acc>
CurveSamples sample_curve(double t0, std::size_t nodes, Pos&& pos, Vel&& vel, Acc&& acc) {
  if (nodes < 2) throw InvalidInput("a curve needs at least two samples");
  CurveSamples c;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double t = k + 1 == nodes ? t0 : t0 * static_cast<double>(k) / static_cast<double>(nodes - 1);
    c.times.push_back(t);
    c.positions.push_back(pos(t));
    c.velocities.push_back(vel(t));
    c.accelerations.push_back(acc(t));
  }
  return c;
}

/// sum_i lambda_i mu_i over measures on a common domain; lambda is a probability vector.
inline AtomicMeasure convex_combination(const std::vector<std::pair<double, AtomicMeasure>>& parts) {
  if (parts.empty()) throw InvalidInput("convex combination of nothing");
  double total = 0.0;
  for (const auto& [lambda, mu] : parts) {
    if (lambda < 0.0 || !std::isfinite(lambda)) throw InvalidInput("negative convex coefficient");
    if (!(mu.domain() == parts.front().second.domain()))
      throw InvalidInput("convex combination of measures on different domains");
    total += lambda;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("convex coefficients must sum to 1");
  std::vector<Atom> atoms;
  for (const auto& [lambda, mu] : parts) {
    if (lambda == 0.0) continue;
    for (const auto& a : mu.atoms()) atoms.push_back({a.point, lambda * a.weight});
  }
  return AtomicMeasure(parts.front().second.domain(), std::move(atoms));
}

// ---------------------------------------------------------------------------
// Defect reports

struct ProbeDefect {
  std::string id;
  double defect = 0.0;
  double normalized = 0.0;
};

struct DefectReport {
  std::vector<ProbeDefect> per_probe;
  double max_normalized = 0.0;
  int basis_degree = 0;
  double tolerance = 1e-8;

  bool pass() const { return max_normalized <= tolerance; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& p : per_probe) m = std::max(m, std::abs(p.defect));
    return m;
  }

  void add(std::string id, double defect, double mass, double scale) {
    const double denom = mass * scale;
    const double nrm = denom > 0.0 ? std::abs(defect) / denom : 0.0;
    per_probe.push_back({std::move(id), defect, nrm});
    max_normalized = std::max(max_normalized, nrm);
  }
};

/// Per-probe defect sum_k w_k (phi_x . v + phi_t) at the atoms. The normalised
/// defect divides by mass times the largest gradient norm of the probe on the support.
inline DefectReport closedness_residual(const AtomicMeasure& mu, const TestBasis& basis,
                                        double tolerance = 1e-8) {
  if (basis.kind != ProbeKind::Base) throw InvalidInput("closedness needs a base-kind basis");
  DefectReport rep;
  rep.basis_degree = basis.degree;
  rep.tolerance = tolerance;
  const double mass = mu.mass();
  for (const auto& phi : basis) {
    if (!phi.boundary_vanishing())
      throw InvalidInput("closedness probe '" + phi.id() + "' does not vanish at the time boundary");
    double s = 0.0, scale = 0.0;
    for (const auto& a : mu.atoms()) {
      const Jet2 j = phi.jet(a.point);
      s += a.weight * (j.grad_x.dot(a.point.v) + j.dt);
      scale = std::max(scale, j.gradient_norm());
    }
    rep.add(phi.id(), s, mass, scale);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Horizontal flows

/// Time-dependent vector field P(x, t) on the base with its partials.
struct BaseVectorField {
  std::function<Vec(const Vec&, double)> value;
  std::function<Mat(const Vec&, double)> jacobian;        // dP/dx
  std::function<Vec(const Vec&, double)> time_derivative;  // dP/dt
};

/// Transports mu by the time-s flow of P acting on positions, with velocities
/// moved by the derivative of that flow applied to (v, 1). RK4 with `substeps`.
inline AtomicMeasure pushforward_horizontal(const AtomicMeasure& mu, const BaseVectorField& P, double s,
                                            int substeps = 64) {
  if (substeps < 1) throw InvalidInput("substeps must be positive");
  const Domain& dom = mu.domain();
  const double ds = s / substeps;
  std::vector<Atom> out;
  out.reserve(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const Atom& a = mu[k];
    const double t = a.point.t;
    Vec y = a.point.x, u = a.point.v;
    auto rhs = [&](const Vec& yy, const Vec& uu, Vec& dy, Vec& du) {
      dy = P.value(yy, t);
      du = P.jacobian(yy, t) * uu + P.time_derivative(yy, t);
    };
    for (int step = 0; step < substeps; ++step) {
      Vec k1y, k1u, k2y, k2u, k3y, k3u, k4y, k4u;
      rhs(y, u, k1y, k1u);
      rhs(y + 0.5 * ds * k1y, u + 0.5 * ds * k1u, k2y, k2u);
      rhs(y + 0.5 * ds * k2y, u + 0.5 * ds * k2u, k3y, k3u);
      rhs(y + ds * k3y, u + ds * k3u, k4y, k4u);
      y += (ds / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      u += (ds / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      if (!y.allFinite() || !dom.contains_base(dom.wrap(y), 1e-12))
        throw FlowEscape("atom " + std::to_string(k) + " leaves the domain under the flow", k);
    }
    out.push_back({{y, u, t}, a.weight});
  }
  return AtomicMeasure(dom, std::move(out));
}

/// Shifts every velocity by s * w.
inline AtomicMeasure translate_fibers(const AtomicMeasure& mu, const Vec& w, double s) {
  std::vector<Atom> out = mu.atoms();
  for (auto& a : out) a.point.v += s * w;
  return AtomicMeasure(mu.domain(), std::move(out));
}

}  // namespace holo

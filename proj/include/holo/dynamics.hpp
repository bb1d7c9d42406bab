#pragma once

#include "holo/lagrangian.hpp"
#include "holo/measure.hpp"

#include <optional>

namespace holo {

inline constexpr double kDefaultKappaMax = 1e8;

/// Fiber component of the Euler-Lagrange field:
/// Lvv^{-1} (Lx - Lvt - Lxv^T v).
inline Vec el_acceleration(const Lagrangian& L, const PhasePoint& p, double kappa_max = kDefaultKappaMax) {
  const Mat H = L.Lvv(p);
  const double kappa = condition_number(H);
  if (!(kappa <= kappa_max))
    throw SingularHessian("fiber Hessian has condition number " + std::to_string(kappa) +
                              " (limit " + std::to_string(kappa_max) + ")",
                          kappa);
  const Vec rhs = L.Lx(p) - L.Lvt(p) - L.Lxv(p).transpose() * p.v;
  return H.partialPivLu().solve(rhs);
}

/// The second-order Euler-Lagrange vector field (v, a, 1).
inline PhaseTangent el_vector_field(const Lagrangian& L, const PhasePoint& p,
                                    double kappa_max = kDefaultKappaMax) {
  return {p.v, el_acceleration(L, p, kappa_max), 1.0};
}

enum class FlowStatus { Ok, SingularHessian, Escaped };

/// Outcome of integrating the EL field. On failure `point` is the last good state.
struct FlowResult {
  PhasePoint point;
  FlowStatus status = FlowStatus::Ok;
  double failure_time = 0.0;
  std::string detail;

  bool ok() const { return status == FlowStatus::Ok; }
};

/// Time-s map of the EL flow by classical RK4 with step <= `step`. If a domain
/// is given, leaving its base or its time interval is reported as an escape.
inline FlowResult el_flow(const Lagrangian& L, const PhasePoint& p, double s, double step = 1e-3,
                          const Domain* domain = nullptr, double kappa_max = kDefaultKappaMax) {
  if (!(step > 0.0)) throw InvalidInput("flow step must be positive");
  FlowResult res;
  res.point = p;
  if (s == 0.0) return res;
  const int m = static_cast<int>(std::ceil(std::abs(s) / step));
  const double h = s / m;
  PhasePoint y = p;
  auto accel = [&](const PhasePoint& q) { return el_acceleration(L, q, kappa_max); };
  for (int k = 0; k < m; ++k) {
    try {
      const Vec a1 = accel(y);
      PhasePoint y2{y.x + 0.5 * h * y.v, y.v + 0.5 * h * a1, y.t + 0.5 * h};
      const Vec a2 = accel(y2);
      PhasePoint y3{y.x + 0.5 * h * y2.v, y.v + 0.5 * h * a2, y.t + 0.5 * h};
      const Vec a3 = accel(y3);
      PhasePoint y4{y.x + h * y3.v, y.v + h * a3, y.t + h};
      const Vec a4 = accel(y4);
      PhasePoint next{y.x + (h / 6.0) * (y.v + 2.0 * y2.v + 2.0 * y3.v + y4.v),
                      y.v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4), p.t + (k + 1) * h};
      if (domain) {
        next.x = domain->wrap(next.x);
        if (!next.x.allFinite() || !domain->contains_base(next.x) || !domain->contains_time(next.t)) {
          res.point = y;
          res.status = FlowStatus::Escaped;
          res.failure_time = p.t + (k + 1) * h;
          res.detail = "trajectory leaves the domain";
          return res;
        }
      }
      y = std::move(next);
    } catch (const SingularHessian& e) {
      res.point = y;
      res.status = FlowStatus::SingularHessian;
      res.failure_time = y.t;
      res.detail = e.what();
      return res;
    }
  }
  res.point = y;
  return res;
}

/// Samples of the EL orbit through p0 at `nodes` uniform times on [p0.t, p0.t + duration],
/// with accelerations from the EL field.
inline CurveSamples el_curve(const Lagrangian& L, const PhasePoint& p0, double duration, std::size_t nodes,
                             int substeps = 8, double kappa_max = kDefaultKappaMax) {
  if (nodes < 2) throw InvalidInput("an orbit needs at least two samples");
  CurveSamples c;
  const double dt = duration / static_cast<double>(nodes - 1);
  PhasePoint y = p0;
  for (std::size_t k = 0; k < nodes; ++k) {
    if (k > 0) {
      const auto r = el_flow(L, y, dt, dt / substeps, nullptr, kappa_max);
      if (!r.ok()) throw Error("orbit integration failed: " + r.detail);
      y = r.point;
    }
    c.times.push_back(p0.t + (k + 1 == nodes ? duration : dt * static_cast<double>(k)));
    c.positions.push_back(y.x);
    c.velocities.push_back(y.v);
    c.accelerations.push_back(el_acceleration(L, y, kappa_max));
  }
  return c;
}

/// Per-probe defect sum_k w_k (f_t + v . f_x + a . f_v) with a the EL fiber field.
inline DefectReport invariance_residual(const AtomicMeasure& mu, const Lagrangian& L, const TestBasis& basis,
                                        double tolerance = 1e-8, double kappa_max = kDefaultKappaMax) {
  if (basis.kind != ProbeKind::Full) throw InvalidInput("invariance needs a full-kind basis");
  if (L.n() != mu.domain().n) throw InvalidInput("Lagrangian and measure dimensions differ");
  std::vector<Vec> acc;
  acc.reserve(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    try {
      acc.push_back(el_acceleration(L, mu[k].point, kappa_max));
    } catch (const SingularHessian& e) {
      throw SingularHessian("atom " + std::to_string(k) + ": " + e.what(), e.condition());
    }
  }
  DefectReport rep;
  rep.basis_degree = basis.degree;
  rep.tolerance = tolerance;
  const double mass = mu.mass();
  for (const auto& f : basis) {
    if (!f.boundary_vanishing())
      throw InvalidInput("invariance probe '" + f.id() + "' does not vanish at the time boundary");
    double s = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const Atom& a = mu[k];
      const Jet2 j = f.jet(a.point);
      s += a.weight * (j.dt + j.grad_x.dot(a.point.v) + j.grad_v.dot(acc[k]));
      scale = std::max(scale, j.gradient_norm());
    }
    rep.add(f.id(), s, mass, scale);
  }
  return rep;
}

/// v . Lv - L.
inline double energy(const Lagrangian& L, const PhasePoint& p) { return p.v.dot(L.Lv(p)) - L(p); }

}  // namespace holo

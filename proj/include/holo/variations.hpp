#pragma once

#include "holo/closed_velocity.hpp"

#include <memory>
#include <variant>

namespace holo {

/// Fiber-valued field F(x, v, t) with partials; missing partials use central
/// differences with step fd_step * max(1, |coordinate|). Fx(i, j) = dF_i / dx_j.
struct FiberField {
  std::function<Vec(const PhasePoint&)> F;
  std::function<Mat(const PhasePoint&)> Fx;
  std::function<Mat(const PhasePoint&)> Fv;
  std::function<Vec(const PhasePoint&)> Ft;
  double fd_step = 1e-5;

  Vec operator()(const PhasePoint& p) const { return F(p); }

  Mat dx(const PhasePoint& p) const {
    if (Fx) return Fx(p);
    return jacobian(p, true);
  }
  Mat dv(const PhasePoint& p) const {
    if (Fv) return Fv(p);
    return jacobian(p, false);
  }
  Vec dt(const PhasePoint& p) const {
    if (Ft) return Ft(p);
    const double h = fd_step * std::max(1.0, std::abs(p.t));
    PhasePoint a = p, b = p;
    a.t += h;
    b.t -= h;
    return (F(a) - F(b)) / (2.0 * h);
  }

 private:
  Mat jacobian(const PhasePoint& p, bool wrt_x) const {
    const Eigen::Index n = p.x.size();
    Mat J(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      PhasePoint a = p, b = p;
      double& ya = wrt_x ? a.x(j) : a.v(j);
      double& yb = wrt_x ? b.x(j) : b.v(j);
      const double h = fd_step * std::max(1.0, std::abs(ya));
      ya += h;
      yb -= h;
      J.col(j) = (F(a) - F(b)) / (2.0 * h);
    }
    return J;
  }
};

/// Derivative of the flow of a phase-space vector field.
struct VectorFieldVariation {
  std::function<PhaseTangent(const PhasePoint&)> field;
};

/// Horizontal variation along the fiber field F, with second derivative C of the measure.
struct ExactHorizontalVariation {
  FiberField F;
  SecondDerivativeField C;
};

/// Local time reparametrisation at a support point (time-independent setting only).
struct TranspositionalVariation {
  PhasePoint p;
};

/// Second-order fiber variation at p in direction w.
struct FiberHessianVariation {
  PhasePoint p;
  Vec w;
};

/// A linear functional on probes attached to a measure.
class VariationDerivative {
 public:
  using Kind = std::variant<VectorFieldVariation, ExactHorizontalVariation, TranspositionalVariation,
                            FiberHessianVariation>;

  VariationDerivative(std::shared_ptr<const AtomicMeasure> mu, Kind kind)
      : mu_(std::move(mu)), kind_(std::move(kind)) {
    if (!mu_) throw InvalidInput("variation needs a measure");
    if (std::holds_alternative<TranspositionalVariation>(kind_) && !mu_->domain().time_independent)
      throw UnsupportedSetting("transpositional variations need a time-independent domain");
    if (const auto* e = std::get_if<ExactHorizontalVariation>(&kind_))
      if (e->C.size() != mu_->size()) throw InvalidInput("second-derivative field does not match the measure");
    if (const auto* h = std::get_if<FiberHessianVariation>(&kind_))
      if (h->w.size() != mu_->domain().n) throw InvalidInput("fiber direction has the wrong dimension");
  }

  static VariationDerivative vector_field(const AtomicMeasure& mu, std::function<PhaseTangent(const PhasePoint&)> X) {
    return {std::make_shared<const AtomicMeasure>(mu), VectorFieldVariation{std::move(X)}};
  }

  /// Lift of the base flow of P: X = (P, DP v + P_t, 0).
  static VariationDerivative horizontal(const AtomicMeasure& mu, const BaseVectorField& P) {
    return vector_field(mu, [P](const PhasePoint& q) {
      return PhaseTangent{P.value(q.x, q.t), P.jacobian(q.x, q.t) * q.v + P.time_derivative(q.x, q.t), 0.0};
    });
  }

  static VariationDerivative exact_horizontal(const AtomicMeasure& mu, FiberField F, SecondDerivativeField C) {
    return {std::make_shared<const AtomicMeasure>(mu), ExactHorizontalVariation{std::move(F), std::move(C)}};
  }

  static VariationDerivative transpositional(const AtomicMeasure& mu, PhasePoint p) {
    return {std::make_shared<const AtomicMeasure>(mu), TranspositionalVariation{std::move(p)}};
  }

  static VariationDerivative fiber_hessian(const AtomicMeasure& mu, PhasePoint p, Vec w) {
    return {std::make_shared<const AtomicMeasure>(mu), FiberHessianVariation{std::move(p), std::move(w)}};
  }

  const AtomicMeasure& measure() const { return *mu_; }
  const Kind& kind() const { return kind_; }

 private:
  std::shared_ptr<const AtomicMeasure> mu_;
  Kind kind_;
};

/// First partials (and optionally the fiber Hessian) of something paired with a variation.
struct ProbeJet {
  double value = 0.0;
  Vec gx, gv;
  double gt = 0.0;
  Mat hvv;
};

inline ProbeJet probe_jet(const TestFunction& f, const PhasePoint& p, bool with_hessian) {
  Jet2 j = f.jet(p);
  ProbeJet r{j.value, std::move(j.grad_x), std::move(j.grad_v), j.dt, {}};
  if (with_hessian) r.hvv = std::move(j.hess_vv);
  return r;
}

inline ProbeJet probe_jet(const Lagrangian& L, const PhasePoint& p, bool with_hessian) {
  ProbeJet r{L(p), L.Lx(p), L.Lv(p), L.Lt(p), {}};
  if (with_hessian) r.hvv = L.Lvv(p);
  return r;
}

/// <eta, f> for a probe or a Lagrangian.
template <class Probe>
double pair(const VariationDerivative& eta, const Probe& f) {
  const AtomicMeasure& mu = eta.measure();
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, VectorFieldVariation>) {
          double s = 0.0;
          for (const auto& a : mu.atoms()) {
            const ProbeJet j = probe_jet(f, a.point, false);
            const PhaseTangent X = k.field(a.point);
            s += a.weight * (X.dx.dot(j.gx) + X.dv.dot(j.gv) + X.dt * j.gt);
          }
          return s;
        } else if constexpr (std::is_same_v<K, ExactHorizontalVariation>) {
          double s = 0.0;
          for (std::size_t i = 0; i < mu.size(); ++i) {
            const Atom& a = mu[i];
            const ProbeJet j = probe_jet(f, a.point, false);
            const Vec F = k.F(a.point);
            const Vec dF = k.F.dx(a.point) * a.point.v + k.F.dv(a.point) * k.C.at(i) + k.F.dt(a.point);
            s += a.weight * (F.dot(j.gx) + dF.dot(j.gv));
          }
          return s;
        } else if constexpr (std::is_same_v<K, TranspositionalVariation>) {
          const ProbeJet j = probe_jet(f, k.p, false);
          double mean = 0.0;
          for (const auto& a : mu.atoms()) mean += a.weight * probe_jet(f, a.point, false).value;
          mean /= mu.mass();
          return j.value - k.p.v.dot(j.gv) - mean;
        } else {
          const ProbeJet j = probe_jet(f, k.p, true);
          return -k.w.dot(j.hvv * k.w);
        }
      },
      eta.kind());
}

/// Per-probe <eta, d phi o sigma> over a base basis.
inline DefectReport deformability_residual(const VariationDerivative& eta, const TestBasis& base_basis,
                                           double tolerance = 1e-8) {
  if (base_basis.kind != ProbeKind::Base) throw InvalidInput("deformability needs a base-kind basis");
  const AtomicMeasure& mu = eta.measure();
  DefectReport rep;
  rep.basis_degree = base_basis.degree;
  rep.tolerance = tolerance;
  const double mass = mu.mass();
  for (const auto& phi : base_basis) {
    const TestFunction g = phi.exact_differential();
    double scale = 0.0;
    for (const auto& a : mu.atoms()) scale = std::max(scale, g.jet(a.point).gradient_norm());
    rep.add(phi.id(), pair(eta, g), mass, scale);
  }
  return rep;
}

/// Relative L^2(mu) distance from Lv to the span of {phi_x} over the basis.
inline double theta1_residual(const AtomicMeasure& mu, const Lagrangian& L, const TestBasis& base_basis) {
  if (base_basis.kind != ProbeKind::Base) throw InvalidInput("theta1 needs a base-kind basis");
  const int n = mu.domain().n;
  const auto N = static_cast<Eigen::Index>(mu.size());
  Mat A(N * n, static_cast<Eigen::Index>(base_basis.size()));
  Vec b(N * n);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Atom& a = mu[static_cast<std::size_t>(k)];
    const double sw = std::sqrt(a.weight);
    b.segment(k * n, n) = sw * L.Lv(a.point);
    for (std::size_t j = 0; j < base_basis.size(); ++j)
      A.block(k * n, static_cast<Eigen::Index>(j), n, 1) = sw * base_basis[j].jet(a.point).grad_x;
  }
  const double nb = b.norm();
  if (nb == 0.0) return 0.0;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  cod.setThreshold(1e-12);
  const Vec coef = cod.solve(b);
  return (b - A * coef).norm() / nb;
}

/// max over atoms of |E(p) - <mu, E> / mass|, E = v . Lv - L.
inline double theta2_residual(const AtomicMeasure& mu, const Lagrangian& L) {
  if (!mu.domain().time_independent)
    throw UnsupportedSetting("theta2 needs a time-independent domain");
  std::vector<double> E;
  double mean = 0.0;
  for (const auto& a : mu.atoms()) {
    E.push_back(energy(L, a.point));
    mean += a.weight * E.back();
  }
  mean /= mu.mass();
  double r = 0.0;
  for (double e : E) r = std::max(r, std::abs(e - mean));
  return r;
}

/// max over atoms p of |<eta_p, L>| = |L(p) - v . Lv(p) - <mu, L> / mass|.
inline double transpositional_residual(const AtomicMeasure& mu, const Lagrangian& L) {
  if (!mu.domain().time_independent)
    throw UnsupportedSetting("transpositional variations need a time-independent domain");
  const double mean = mu.integrate([&](const PhasePoint& p) { return L(p); }) / mu.mass();
  double r = 0.0;
  for (const auto& a : mu.atoms()) r = std::max(r, std::abs(-energy(L, a.point) - mean));
  return r;
}

struct FiberReport {
  Vec x;
  double t = 0.0;
  std::vector<Vec> velocities;
};

struct GraphCheck {
  bool is_graph = true;
  std::optional<FiberReport> offending;
};

/// Whether each base point (x, t) of the support carries a single velocity up to tol.
inline GraphCheck graph_support_check(const AtomicMeasure& mu, double tol = 1e-8) {
  const Domain& dom = mu.domain();
  const std::size_t N = mu.size();
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mu[a].point.t < mu[b].point.t; });
  std::vector<bool> seen(N, false);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t a = order[i];
    if (seen[a]) continue;
    std::vector<std::size_t> fiber{a};
    seen[a] = true;
    for (std::size_t j = i + 1; j < N; ++j) {
      const std::size_t b = order[j];
      if (mu[b].point.t - mu[a].point.t > tol) break;
      if (seen[b]) continue;
      if (dom.displacement(mu[a].point.x, mu[b].point.x).norm() <= tol) {
        fiber.push_back(b);
        seen[b] = true;
      }
    }
    if (fiber.size() < 2) continue;
    Vec mean = Vec::Zero(dom.n);
    for (std::size_t k : fiber) mean += mu[k].point.v;
    mean /= static_cast<double>(fiber.size());
    double spread = 0.0;
    for (std::size_t k : fiber) spread = std::max(spread, (mu[k].point.v - mean).norm());
    if (spread > tol) {
      FiberReport rep{mu[a].point.x, mu[a].point.t, {}};
      for (std::size_t k : fiber) rep.velocities.push_back(mu[k].point.v);
      return {false, std::move(rep)};
    }
  }
  return {};
}

/// -w^T Lvv(p) w.
inline double fiber_hessian_obstruction(const Lagrangian& L, const PhasePoint& p, const Vec& w) {
  return -w.dot(L.Lvv(p) * w);
}

/// max over points of the Frobenius norm of A - A^T, A = d(Lvv F)/dv.
inline double exactness_residual(const Lagrangian& L, const FiberField& F, const std::vector<PhasePoint>& points) {
  double worst = 0.0;
  for (const auto& p : points) {
    const Eigen::Index n = p.v.size();
    const Vec f = F(p);
    Mat A = L.Lvv(p) * F.dv(p);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = std::cbrt(machine_eps()) * std::max(1.0, std::abs(p.v(j)));
      PhasePoint a = p, b = p;
      a.v(j) += h;
      b.v(j) -= h;
      A.col(j) += ((L.Lvv(a) - L.Lvv(b)) / (2.0 * h)) * f;
    }
    worst = std::max(worst, (A - A.transpose()).norm());
  }
  return worst;
}

/// The fiber field Lvv^{-1} f_v of a probe, partials by differences through the solve.
inline FiberField horizontal_field(const Lagrangian& L, const TestFunction& f, double fd_step = 1e-5) {
  FiberField F;
  F.F = [L, f](const PhasePoint& p) -> Vec { return L.Lvv(p).partialPivLu().solve(f.jet(p).grad_v); };
  F.fd_step = fd_step;
  return F;
}

/// Per-probe <eta_{F, mu, C}, L> with F = Lvv^{-1} f_v.
inline DefectReport horizontal_criticality_residual(const AtomicMeasure& mu, const Lagrangian& L,
                                                    const SecondDerivativeField& C, const TestBasis& basis,
                                                    double tolerance = 1e-8) {
  if (basis.kind != ProbeKind::Full) throw InvalidInput("horizontal criticality needs a full-kind basis");
  auto shared = std::make_shared<const AtomicMeasure>(mu);
  DefectReport rep;
  rep.basis_degree = basis.degree;
  rep.tolerance = tolerance;
  const double mass = mu.mass();
  for (const auto& f : basis) {
    VariationDerivative eta(shared, ExactHorizontalVariation{horizontal_field(L, f), C});
    double scale = 0.0;
    for (const auto& a : mu.atoms()) scale = std::max(scale, f.jet(a.point).gradient_norm());
    rep.add(f.id(), pair(eta, L), mass, scale);
  }
  return rep;
}

struct CertificateCheck {
  double min_excess = 0.0;     // min over samples of L + c - df
  double support_gap = 0.0;    // max over atoms of |L + c - df|
  double integral_gap = 0.0;   // |<mu, df>| / mass
  double tolerance = 1e-6;

  bool dominates() const { return min_excess >= -tolerance; }
  bool tight_on_support() const { return support_gap <= tolerance; }
  bool integral_vanishes() const { return integral_gap <= tolerance; }
  bool pass() const { return dominates() && tight_on_support() && integral_vanishes(); }
  double worst_gap() const { return std::max({std::max(0.0, -min_excess), support_gap, integral_gap}); }
};

/// Checks L + c >= df on the samples, equality on the support, and <mu, df> = 0,
/// with df = f_x . v + f_t for a base probe f.
inline CertificateCheck minimizable_certificate_check(const AtomicMeasure& mu, const Lagrangian& L,
                                                      const TestFunction& f, double c,
                                                      const std::vector<PhasePoint>& samples,
                                                      double tolerance = 1e-6) {
  if (f.kind() != ProbeKind::Base) throw InvalidInput("certificate must be a base-kind function");
  auto df = [&](const PhasePoint& p) {
    const Jet2 j = f.jet(p);
    return j.grad_x.dot(p.v) + j.dt;
  };
  CertificateCheck out;
  out.tolerance = tolerance;
  out.min_excess = kInf;
  for (const auto& p : samples) out.min_excess = std::min(out.min_excess, L(p) + c - df(p));
  if (samples.empty()) out.min_excess = 0.0;
  double integral = 0.0;
  for (const auto& a : mu.atoms()) {
    const double d = df(a.point);
    out.support_gap = std::max(out.support_gap, std::abs(L(a.point) + c - d));
    integral += a.weight * d;
  }
  out.integral_gap = std::abs(integral) / mu.mass();
  return out;
}

}  // namespace holo

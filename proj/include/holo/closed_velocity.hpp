#pragma once

#include "holo/dynamics.hpp"

#include <numeric>

namespace holo {

enum class SecondDerivativeSource { Curve, ElField, LeastSquares, Supplied };

inline std::string to_string(SecondDerivativeSource s) {
  switch (s) {
    case SecondDerivativeSource::Curve: return "curve";
    case SecondDerivativeSource::ElField: return "el-field";
    case SecondDerivativeSource::LeastSquares: return "least-squares";
    case SecondDerivativeSource::Supplied: return "supplied";
  }
  return "?";
}

/// A fiber vector C at each atom of a measure, in atom order.
struct SecondDerivativeField {
  std::vector<Vec> values;
  SecondDerivativeSource source = SecondDerivativeSource::Supplied;
  std::optional<DefectReport> residual;

  std::size_t size() const { return values.size(); }
  const Vec& at(std::size_t atom) const { return values.at(atom); }
};

inline SecondDerivativeField second_derivative_from_el(const AtomicMeasure& mu, const Lagrangian& L,
                                                       double kappa_max = kDefaultKappaMax) {
  SecondDerivativeField C;
  C.source = SecondDerivativeSource::ElField;
  for (const auto& a : mu.atoms()) C.values.push_back(el_acceleration(L, a.point, kappa_max));
  return C;
}

inline SecondDerivativeField second_derivative_from_curve(const CurveSamples& c, QuadratureRule rule) {
  SecondDerivativeField C;
  C.source = SecondDerivativeSource::Curve;
  C.values = curve_accelerations(c, rule);
  return C;
}

/// Field matching convex_combination applied to the same parts.
inline SecondDerivativeField combine_fields(
    const std::vector<std::pair<double, SecondDerivativeField>>& parts) {
  SecondDerivativeField C;
  C.source = parts.empty() ? SecondDerivativeSource::Supplied : parts.front().second.source;
  for (const auto& [lambda, f] : parts) {
    if (lambda == 0.0) continue;
    if (f.source != C.source) C.source = SecondDerivativeSource::Supplied;
    C.values.insert(C.values.end(), f.values.begin(), f.values.end());
  }
  return C;
}

/// Per-probe defect sum_k w_k (f_x . v + f_v . C + f_t).
inline DefectReport lifted_closedness_defect(const AtomicMeasure& mu, const SecondDerivativeField& C,
                                             const TestBasis& basis, double tolerance = 1e-8) {
  if (C.size() != mu.size()) throw InvalidInput("second-derivative field does not match the measure");
  DefectReport rep;
  rep.basis_degree = basis.degree;
  rep.tolerance = tolerance;
  const double mass = mu.mass();
  for (const auto& f : basis) {
    double s = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const Atom& a = mu[k];
      const Jet2 j = f.jet(a.point);
      s += a.weight * (j.grad_x.dot(a.point.v) + j.grad_v.dot(C.at(k)) + j.dt);
      scale = std::max(scale, j.gradient_norm());
    }
    rep.add(f.id(), s, mass, scale);
  }
  return rep;
}

struct EstimatorOptions {
  double rcond = 1e-7;       // relative singular-value cutoff of the trial matrix
  double merge_tol = 1e-9;   // atoms closer than this are merged
  double tolerance = 1e-8;   // pass threshold of the residual report
};

namespace detail {

// Groups atoms whose (x, v, t) agree within tol. Returns the group of each atom.
inline std::vector<std::size_t> merge_groups(const AtomicMeasure& mu, double tol,
                                             std::vector<std::size_t>& representative) {
  const std::size_t N = mu.size();
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t k) {
    const auto& p = mu[k].point;
    std::vector<double> y{p.t};
    for (Eigen::Index i = 0; i < p.x.size(); ++i) y.push_back(p.x(i));
    for (Eigen::Index i = 0; i < p.v.size(); ++i) y.push_back(p.v(i));
    return y;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<std::size_t> group(N, 0);
  representative.clear();
  auto close = [&](std::size_t a, std::size_t b) {
    const auto& p = mu[a].point;
    const auto& q = mu[b].point;
    return std::abs(p.t - q.t) <= tol && (p.x - q.x).cwiseAbs().maxCoeff() <= tol &&
           (p.v - q.v).cwiseAbs().maxCoeff() <= tol;
  };
  for (std::size_t idx = 0; idx < N; ++idx) {
    const std::size_t k = order[idx];
    if (!representative.empty() && close(representative.back(), k)) {
      group[k] = representative.size() - 1;
    } else {
      representative.push_back(k);
      group[k] = representative.size() - 1;
    }
  }
  return group;
}

}  // namespace detail

/// Least-squares second derivative: C minimises the lifted closedness defect over the
/// probes, and among minimisers has the smallest norm in L^2(tau mu), tau being the
/// probes' common time factor. The minimiser then lies in the span of the fields
/// f_v / tau, so it is a smooth field evaluated at every atom.
inline SecondDerivativeField estimate_second_derivative(const AtomicMeasure& mu, const TestBasis& basis,
                                                        const EstimatorOptions& opt = {}) {
  if (basis.kind != ProbeKind::Full) throw InvalidInput("second-derivative estimation needs a full-kind basis");
  if (!basis.boundary_vanishing) throw InvalidInput("second-derivative estimation needs boundary-vanishing probes");
  if (mu.empty()) throw InvalidInput("cannot estimate on an empty measure");
  const int n = mu.domain().n;

  std::vector<std::size_t> rep;
  const auto group = detail::merge_groups(mu, opt.merge_tol, rep);
  const std::size_t G = rep.size();
  std::vector<double> W(G, 0.0);
  for (std::size_t k = 0; k < mu.size(); ++k) W[group[k]] += mu[k].weight;

  const std::size_t P = basis.size();
  std::vector<TestFunction> trial;
  trial.reserve(P);
  for (const auto& f : basis) trial.push_back(f.has_bump() ? f.core() : f);

  Mat T(static_cast<Eigen::Index>(G) * n, static_cast<Eigen::Index>(P));
  Vec r = Vec::Zero(static_cast<Eigen::Index>(P));
  std::vector<std::vector<Vec>> trial_v(P, std::vector<Vec>(G));
  for (std::size_t g = 0; g < G; ++g) {
    const PhasePoint& p = mu[rep[g]].point;
    for (std::size_t j = 0; j < P; ++j) {
      const TestFunction& f = basis[j];
      const double tau = f.has_bump() ? f.bump(p.t) : 1.0;
      const Jet2 jf = f.jet(p);
      r(static_cast<Eigen::Index>(j)) -= W[g] * (jf.grad_x.dot(p.v) + jf.dt);
      trial_v[j][g] = trial[j].jet(p).grad_v;
      T.block(static_cast<Eigen::Index>(g) * n, static_cast<Eigen::Index>(j), n, 1) =
          std::sqrt(W[g] * std::max(tau, 0.0)) * trial_v[j][g];
    }
  }

  Eigen::BDCSVD<Mat> svd(T, Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const Mat& V = svd.matrixV();
  Vec lambda = Vec::Zero(static_cast<Eigen::Index>(P));
  const double cut = s.size() > 0 ? opt.rcond * s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s(i) > cut) || s(i) == 0.0) continue;
    lambda += V.col(i) * (V.col(i).dot(r) / (s(i) * s(i)));
  }

  std::vector<Vec> Cg(G, Vec::Zero(n));
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t j = 0; j < P; ++j) Cg[g] += lambda(static_cast<Eigen::Index>(j)) * trial_v[j][g];

  SecondDerivativeField C;
  C.source = SecondDerivativeSource::LeastSquares;
  C.values.reserve(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) C.values.push_back(Cg[group[k]]);
  C.residual = lifted_closedness_defect(mu, C, basis, opt.tolerance);
  return C;
}

/// Measure on the double tangent bundle, stored as the base measure together with
/// the lifted velocity (vx, vv, vt) at each atom.
struct LiftedMeasure {
  AtomicMeasure base;
  std::vector<Vec> vx;
  std::vector<Vec> vv;
  std::vector<double> vt;

  std::size_t size() const { return base.size(); }
};

inline LiftedMeasure lift(const AtomicMeasure& mu, const SecondDerivativeField& C) {
  if (C.size() != mu.size()) throw InvalidInput("second-derivative field does not match the measure");
  LiftedMeasure out{mu, {}, {}, {}};
  for (std::size_t k = 0; k < mu.size(); ++k) {
    out.vx.push_back(mu[k].point.v);
    out.vv.push_back(C.at(k));
    out.vt.push_back(1.0);
  }
  return out;
}

struct LiftVerification {
  DefectReport weak_equation;       // sum w (f_x . vx + f_v . vv + f_t vt)
  double velocity_mismatch = 0.0;   // max |vx - v|
  double time_mismatch = 0.0;       // max |vt - 1|
  double projection_mismatch = 0.0; // the base is stored, so this is exact

  bool pass(double tol = 1e-8) const {
    return weak_equation.pass() && velocity_mismatch <= tol && time_mismatch <= tol &&
           projection_mismatch <= tol;
  }
};

inline LiftVerification verify_lift(const LiftedMeasure& lifted, const TestBasis& basis, double tolerance = 1e-8) {
  const AtomicMeasure& mu = lifted.base;
  const std::size_t N = mu.size();
  if (lifted.vx.size() != N || lifted.vv.size() != N || lifted.vt.size() != N)
    throw InvalidInput("lifted velocity arrays do not match the base measure");
  LiftVerification out;
  out.weak_equation.basis_degree = basis.degree;
  out.weak_equation.tolerance = tolerance;
  const double mass = mu.mass();
  for (const auto& f : basis) {
    double s = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const Jet2 j = f.jet(mu[k].point);
      s += mu[k].weight * (j.grad_x.dot(lifted.vx[k]) + j.grad_v.dot(lifted.vv[k]) + j.dt * lifted.vt[k]);
      scale = std::max(scale, j.gradient_norm());
    }
    out.weak_equation.add(f.id(), s, mass, scale);
  }
  for (std::size_t k = 0; k < N; ++k) {
    out.velocity_mismatch =
        std::max(out.velocity_mismatch, (lifted.vx[k] - mu[k].point.v).cwiseAbs().maxCoeff());
    out.time_mismatch = std::max(out.time_mismatch, std::abs(lifted.vt[k] - 1.0));
  }
  return out;
}

}  // namespace holo

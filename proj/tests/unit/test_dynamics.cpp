#include "holo/holo.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace holo;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> v) {
  Vec r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

TestBasis single(const TestFunction& f, ProbeKind kind = ProbeKind::Full) {
  TestBasis b;
  b.kind = kind;
  b.degree = 2;
  b.functions = {f};
  return b;
}

}  // namespace

TEST(Lagrangian, RegistryBuildsAndRejects) {
  for (const auto& name : lagrangian_names()) {
    const int n = (name == "example33" || name == "magnetic") ? 2 : 1;
    EXPECT_NO_THROW(make_lagrangian(name, n)) << name;
  }
  EXPECT_THROW(make_lagrangian("nope", 1), InvalidInput);
  EXPECT_THROW(make_lagrangian("magnetic", 1), InvalidInput);
  EXPECT_THROW(make_lagrangian("free", 0), InvalidInput);
  EXPECT_THROW(make_lagrangian("oscillator", 1, {{"k", {1.0, 2.0}}}), InvalidInput);
  EXPECT_FALSE(make_lagrangian("double_well", 1).fiber_convex());
  EXPECT_TRUE(make_lagrangian("oscillator", 1).fiber_convex());
}

TEST(Lagrangian, FiniteDifferenceFallbackAgreesWithAnalytic) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  for (const auto& name : lagrangian_names()) {
    const int n = 2;
    const Lagrangian L = make_lagrangian(name, n);
    const Lagrangian F = value_only(L);
    EXPECT_TRUE(L.fully_analytic());
    EXPECT_FALSE(F.fully_analytic());
    for (int s = 0; s < 20; ++s) {
      const PhasePoint p{vec({U(rng), U(rng)}), vec({U(rng), U(rng)}), 0.5 + 0.4 * U(rng)};
      auto tol = [](double scale) { return 1e-6 * std::max(1.0, scale); };
      EXPECT_NEAR((L.Lx(p) - F.Lx(p)).norm(), 0.0, tol(L.Lx(p).norm())) << name;
      EXPECT_NEAR((L.Lv(p) - F.Lv(p)).norm(), 0.0, tol(L.Lv(p).norm())) << name;
      EXPECT_NEAR(L.Lt(p) - F.Lt(p), 0.0, tol(std::abs(L.Lt(p)))) << name;
      EXPECT_NEAR((L.Lvv(p) - F.Lvv(p)).norm(), 0.0, tol(L.Lvv(p).norm())) << name;
      EXPECT_NEAR((L.Lxv(p) - F.Lxv(p)).norm(), 0.0, tol(L.Lxv(p).norm())) << name;
      EXPECT_NEAR((L.Lvt(p) - F.Lvt(p)).norm(), 0.0, tol(L.Lvt(p).norm())) << name;
      const Mat H = F.Lvv(p);
      EXPECT_LE((H - H.transpose()).norm(), 1e-10) << name;
    }
  }
}

TEST(ELField, FreeParticle) {
  const Lagrangian L = make_lagrangian("free", 2);
  const PhaseTangent X = el_vector_field(L, {vec({0.3, -2.0}), vec({1.5, 0.2}), 0.7});
  EXPECT_EQ(X.dx, vec({1.5, 0.2}));
  EXPECT_LE(X.dv.norm(), 1e-15);
  EXPECT_EQ(X.dt, 1.0);
}

TEST(ELField, HarmonicOscillator) {
  const Lagrangian L = make_lagrangian("oscillator", 2);
  const Vec a = el_acceleration(L, {vec({1.0, 0.0}), vec({0.0, 0.0}), 0.2});
  EXPECT_NEAR(a(0), -1.0, 1e-14);
  EXPECT_NEAR(a(1), 0.0, 1e-14);
}

TEST(ELField, CrossingBranchesAreUnaccelerated) {
  const Lagrangian L = make_lagrangian("example33", 2);
  for (double s : {1.0, -1.0}) {
    const Vec a = el_acceleration(L, {vec({0.4, 0.0}), vec({1.0, s}), 0.4});
    EXPECT_LE(a.norm(), 1e-14);
  }
}

TEST(ELField, MagneticForceIsPerpendicular) {
  const Lagrangian L = make_lagrangian("magnetic", 2, {{"b", {2.0}}});
  const PhasePoint p{vec({0.1, 0.3}), vec({1.0, 0.5}), 0.0};
  const Vec a = el_acceleration(L, p);
  EXPECT_NEAR(a.dot(p.v), 0.0, 1e-14);
  EXPECT_NEAR(a(0), 2.0 * 0.5, 1e-14);
  EXPECT_NEAR(a(1), -2.0 * 1.0, 1e-14);
}

TEST(ELField, SingularHessianIsReported) {
  const Lagrangian L = make_lagrangian("double_well", 2);
  try {
    el_acceleration(L, {vec({0.0, 0.0}), vec({1.0 / std::sqrt(3.0), 0.0}), 0.0});
    FAIL() << "expected a singular Hessian";
  } catch (const SingularHessian& e) {
    EXPECT_GT(e.condition(), kDefaultKappaMax);
  }
  EXPECT_THROW(el_acceleration(L, {vec({0.0, 0.0}), vec({0.59, 0.0}), 0.0}, 10.0), SingularHessian);
  EXPECT_NO_THROW(el_acceleration(L, {vec({0.0, 0.0}), vec({0.59, 0.0}), 0.0}));
}

TEST(ELFlow, ZeroTimeIsIdentity) {
  const Lagrangian L = make_lagrangian("oscillator", 1);
  const PhasePoint p{vec({0.3}), vec({0.2}), 0.1};
  const FlowResult r = el_flow(L, p, 0.0);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.point.x, p.x);
  EXPECT_EQ(r.point.v, p.v);
  EXPECT_EQ(r.point.t, p.t);
}

TEST(ELFlow, QuarterPeriodOfTheOscillator) {
  const Lagrangian L = make_lagrangian("oscillator", 2);
  const FlowResult r = el_flow(L, {vec({1.0, 0.0}), vec({0.0, 0.0}), 0.0}, kPi / 2, 1e-3);
  ASSERT_TRUE(r.ok());
  EXPECT_LE(std::abs(r.point.x(0)), 1e-6);
  EXPECT_LE(std::abs(r.point.v(0) + 1.0), 1e-6);
  EXPECT_NEAR(r.point.t, kPi / 2, 1e-12);
}

TEST(ELFlow, StraightLinesAreExact) {
  const Lagrangian L = make_lagrangian("free", 2);
  const PhasePoint p{vec({0.1, 0.2}), vec({0.7, -1.3}), 0.0};
  const FlowResult r = el_flow(L, p, 2.5, 0.1);
  EXPECT_LE((r.point.x - (p.x + 2.5 * p.v)).norm(), 1e-14);
  EXPECT_EQ(r.point.v, p.v);
}

TEST(ELFlow, EscapeIsAnErrorValue) {
  const Lagrangian L = make_lagrangian("free", 1);
  const Domain box = Domain::box({{0.0, 1.0}}, 10.0);
  const FlowResult r = el_flow(L, {vec({0.5}), vec({1.0}), 0.0}, 2.0, 0.01, &box);
  EXPECT_EQ(r.status, FlowStatus::Escaped);
  EXPECT_NEAR(r.failure_time, 0.51, 1e-9);
  EXPECT_LE(r.point.x(0), 1.0 + 1e-12);
}

TEST(ELFlow, SingularityIsAnErrorValue) {
  const Lagrangian L = make_lagrangian("double_well", 2);
  const FlowResult r = el_flow(L, {vec({0.0, 0.0}), vec({1.0 / std::sqrt(3.0), 0.0}), 0.0}, 1.0);
  EXPECT_EQ(r.status, FlowStatus::SingularHessian);
}

TEST(ELFlow, EnergyErrorShrinksAtFourthOrder) {
  const Lagrangian L = make_lagrangian("mechanical", 1, {{"U", {0.0, 0.0, 0.5, 0.0, 0.5}}});
  const PhasePoint p{vec({1.0}), vec({0.5}), 0.0};
  auto drift = [&](double h) { return std::abs(energy(L, el_flow(L, p, 3.0, h).point) - energy(L, p)); };
  const double e1 = drift(0.1), e2 = drift(0.05);
  EXPECT_LE(e1, 1e-4);
  EXPECT_GT(std::log2(e1 / e2), 3.5);
}

TEST(Energy, KnownValues) {
  EXPECT_NEAR(energy(make_lagrangian("free", 2), {vec({0.0, 0.0}), vec({1.0, 1.0}), 0.0}), 1.0, 1e-15);
  const PhasePoint p{vec({0.5, -1.0}), vec({0.3, 0.4}), 0.0};
  EXPECT_NEAR(energy(make_lagrangian("oscillator", 2), p), 0.5 * 0.25 + 0.5 * 1.25, 1e-15);
  EXPECT_NEAR(energy(make_lagrangian("example33", 2), {vec({0.0, 0.0}), vec({1.0, 1.0}), 0.0}), 0.0, 1e-15);
}

TEST(Invariance, OrbitMeasureIsInvariant) {
  const Lagrangian L = make_lagrangian("oscillator", 1);
  const CurveSamples c = el_curve(L, {vec({1.0}), vec({0.0}), 0.0}, 1.0, 400);
  const AtomicMeasure mu = from_curve(Domain::euclidean(1, 1.0), c);
  EXPECT_LE(invariance_residual(mu, L, make_basis(mu.domain(), ProbeKind::Full, 2, true)).max_normalized, 1e-5);
}

TEST(Invariance, OrbitResidualConvergesUnderRefinement) {
  const Lagrangian L = make_lagrangian("oscillator", 1, {{"k", {3.0}}});
  const TestBasis b = make_basis(Domain::euclidean(1, 1.0), ProbeKind::Full, 2, true);
  auto residual = [&](std::size_t nodes) {
    const CurveSamples c = el_curve(L, {vec({1.0}), vec({0.2}), 0.0}, 1.0, nodes);
    return invariance_residual(from_curve(Domain::euclidean(1, 1.0), c), L, b).max_normalized;
  };
  EXPECT_GT(std::log2(residual(101) / residual(201)), 1.8);
}

TEST(Invariance, CrossingBranchesWitness) {
  const AtomicMeasure mu = crossing_branches_measure(401, QuadratureRule::Simpson);
  Term t;
  t.factors = {Factor::pow(0), Factor::pow(1), Factor::pow(0), Factor::pow(1), Factor::sin(kPi)};
  TestFunction f(ProbeKind::Full, 2, 1.0, {t}, false, "x2 v2 sin(pi t)");
  f.set_boundary_vanishing(true);
  const DefectReport r = invariance_residual(mu, make_lagrangian("example33", 2), single(f));
  EXPECT_NEAR(r.per_probe[0].defect, 2.0 / kPi, 1e-6);
}

TEST(Invariance, ConstantProbeAndErrors) {
  const AtomicMeasure mu = crossing_branches_measure(11, QuadratureRule::Trapezoid);
  Term t;
  t.factors.assign(5, Factor::pow(0));
  TestFunction one(ProbeKind::Full, 2, 1.0, {t}, false, "1");
  const Lagrangian L = make_lagrangian("example33", 2);
  EXPECT_THROW(invariance_residual(mu, L, single(one)), InvalidInput);
  one.set_boundary_vanishing(true);
  EXPECT_EQ(invariance_residual(mu, L, single(one)).per_probe[0].defect, 0.0);
  EXPECT_THROW(invariance_residual(mu, make_lagrangian("free", 1), single(one)), InvalidInput);
  EXPECT_THROW(invariance_residual(mu, L, make_basis(mu.domain(), ProbeKind::Base, 1, true)), InvalidInput);
}

TEST(Invariance, LinearInTheMeasure) {
  const Lagrangian L = make_lagrangian("mechanical", 1, {{"U", {0.0, 0.3, 0.5}}});
  const Domain dom = Domain::euclidean(1, 1.0);
  const AtomicMeasure a = from_curve(dom, el_curve(L, {vec({1.0}), vec({0.0}), 0.0}, 1.0, 51));
  const AtomicMeasure b = from_curve(
      dom, sample_curve(1.0, 51, [](double t) { return vec({t * t}); }, [](double t) { return vec({2 * t}); },
                        [](double) { return vec({2.0}); }));
  const TestBasis basis = make_basis(dom, ProbeKind::Full, 2, true);
  const auto da = invariance_residual(a, L, basis), db = invariance_residual(b, L, basis);
  const auto dc = invariance_residual(convex_combination({{0.25, a}, {0.75, b}}), L, basis);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double e = 0.25 * da.per_probe[k].defect + 0.75 * db.per_probe[k].defect;
    EXPECT_NEAR(dc.per_probe[k].defect, e, 1e-12 * (1 + std::abs(e)));
  }
}

TEST(Invariance, BaseProbesReduceToClosedness) {
  const Lagrangian L = make_lagrangian("oscillator", 2);
  const Domain dom = Domain::euclidean(2, 1.0);
  const AtomicMeasure mu = from_curve(
      dom, sample_curve(1.0, 41, [](double t) { return vec({t, std::sin(t)}); },
                        [](double t) { return vec({1.0, std::cos(t)}); },
                        [](double t) { return vec({0.0, -std::sin(t)}); }));
  TestBasis base = make_basis(dom, ProbeKind::Base, 2, true);
  const DefectReport closed = closedness_residual(mu, base);
  base.kind = ProbeKind::Full;
  const DefectReport inv = invariance_residual(mu, L, base);
  for (std::size_t k = 0; k < base.size(); ++k)
    EXPECT_NEAR(inv.per_probe[k].defect, closed.per_probe[k].defect, 1e-15);
}

TEST(ElCurve, AccelerationsFollowTheField) {
  const Lagrangian L = make_lagrangian("caldirola", 1);
  const CurveSamples c = el_curve(L, {vec({1.0}), vec({0.0}), 0.5}, 1.0, 21);
  EXPECT_NEAR(c.times.front(), 0.5, 1e-15);
  EXPECT_NEAR(c.times.back(), 1.5, 1e-15);
  for (std::size_t k = 0; k < c.size(); ++k)
    EXPECT_LE((c.accelerations[k] - el_acceleration(L, {c.positions[k], c.velocities[k], c.times[k]})).norm(),
              1e-14);
  EXPECT_THROW(el_curve(L, {vec({1.0}), vec({0.0}), 0.0}, 1.0, 1), InvalidInput);
}

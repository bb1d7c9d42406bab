#include "holo/holo.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace holo;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

// Minimum of c^T x over the basic feasible solutions of A x = b, x >= 0.
double vertex_minimum(const LinearProgram& lp) {
  const Eigen::Index n = lp.A.cols();
  Eigen::FullPivLU<Mat> lu(lp.A);
  const Eigen::Index r = lu.rank();
  double best = kInf;
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + r, true);
  do {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j)
      if (pick[static_cast<std::size_t>(j)]) cols.push_back(j);
    Mat B(lp.A.rows(), r);
    for (Eigen::Index k = 0; k < r; ++k) B.col(k) = lp.A.col(cols[static_cast<std::size_t>(k)]);
    Eigen::ColPivHouseholderQR<Mat> qr(B);
    if (qr.rank() < r) continue;
    const Vec xb = qr.solve(lp.b);
    if ((B * xb - lp.b).norm() > 1e-9 * (1 + lp.b.norm())) continue;
    if (xb.minCoeff() < -1e-12) continue;
    double v = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) v += lp.c(cols[static_cast<std::size_t>(k)]) * xb(k);
    best = std::min(best, v);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

Domain circle() { return Domain::torus(1, 1.0).set_time_independent(); }

}  // namespace

TEST(Simplex, MatchesVertexEnumerationOnRandomPrograms) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1, 1), P(0.1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + trial % 3, n = 6 + trial % 4;
    LinearProgram lp{Mat(m, n), Vec(m), Vec(n)};
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) lp.A(i, j) = U(rng);
    lp.A.row(m - 1).setOnes();
    Vec x0(n);
    for (int j = 0; j < n; ++j) x0(j) = P(rng);
    lp.b = lp.A * x0;
    for (int j = 0; j < n; ++j) lp.c(j) = U(rng);
    const LPResult r = solve_lp(lp);
    ASSERT_EQ(r.status, LPStatus::Optimal) << trial;
    EXPECT_NEAR(r.value, vertex_minimum(lp), 1e-9) << trial;
    EXPECT_LE((lp.A * r.x - lp.b).norm(), 1e-9);
    EXPECT_GE(r.x.minCoeff(), -1e-12);
    EXPECT_GE((lp.c - lp.A.transpose() * r.y).minCoeff(), -1e-9);
    EXPECT_LE(std::abs(r.duality_gap), 1e-8 * (1 + std::abs(r.value)));
  }
}

TEST(Simplex, MatchesVertexEnumerationOnAGridProgram) {
  const Lagrangian L = make_lagrangian("double_well", 1, {{"tilt", {0.3}}});
  const LPProblem prob = build_lp(L, Domain::box({{0.0, 1.0}}, 1.0), GridSpec::uniform(1, 3, 3, 4, 2.0), 1);
  const LPResult r = solve_lp(prob.lp);
  ASSERT_EQ(r.status, LPStatus::Optimal);
  EXPECT_NEAR(r.value, vertex_minimum(prob.lp), 1e-9);
}

TEST(Simplex, InfeasibleProgramCarriesAFarkasVector) {
  LinearProgram lp{Mat(2, 3), vec({1.0, 2.0}), vec({1.0, 0.0, -1.0})};
  lp.A << 1, 1, 1, 1, 1, 1;
  const LPResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LPStatus::Infeasible);
  EXPECT_LE((lp.A.transpose() * r.farkas).maxCoeff(), 1e-12);
  EXPECT_GT(lp.b.dot(r.farkas), 0.0);

  LPProblem prob;
  prob.domain = circle();
  prob.basis = make_basis(prob.domain, ProbeKind::Base, 1, true);
  prob.lp = lp;
  try {
    solve_min_action(prob);
    FAIL() << "expected infeasibility";
  } catch (const Infeasible& e) {
    EXPECT_GT(lp.b.dot(e.certificate()), 0.0);
  }
}

TEST(Simplex, TwoTimeCellsCannotBalanceTheBump) {
  const LPProblem prob = build_lp(make_lagrangian("free", 1), Domain::box({{0.0, 1.0}}, 1.0),
                                  GridSpec::uniform(1, 3, 3, 2, 2.0), 1);
  try {
    solve_min_action(prob);
    FAIL() << "expected infeasibility";
  } catch (const Infeasible& e) {
    EXPECT_LE((prob.lp.A.transpose() * e.certificate()).maxCoeff(), 1e-12);
    EXPECT_GT(prob.lp.b.dot(e.certificate()), 1e-3);
  }
}

TEST(Simplex, NegativeRightHandSides) {
  LinearProgram lp{Mat(2, 3), vec({-1.0, 1.0}), vec({2.0, 1.0, 3.0})};
  lp.A << -1, 0, -2, 1, 1, 1;
  const LPResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LPStatus::Optimal);
  EXPECT_NEAR(r.value, vertex_minimum(lp), 1e-12);
  EXPECT_THROW(solve_lp({Mat(2, 3), vec({1.0}), vec({1.0, 1.0, 1.0})}), InvalidInput);
}

// ---------------------------------------------------------------- assembly

TEST(BuildLp, SingleCellIsForcedToUnitMass) {
  const LPProblem prob = build_lp(make_lagrangian("free", 1), circle(), GridSpec::uniform(1, 1, 1, 1, 1.0), 2);
  ASSERT_EQ(prob.cells.size(), 1u);
  const MinActionResult r = solve_min_action(prob);
  ASSERT_EQ(r.measure.size(), 1u);
  EXPECT_NEAR(r.measure[0].weight, 1.0, 1e-15);
  EXPECT_EQ(r.value, 0.0);
}

TEST(BuildLp, ConstraintRowOfTheBumpedCoordinate) {
  const double t0 = 2.0;
  const Domain dom = Domain::box({{0.0, 1.0}}, t0);
  const LPProblem prob = build_lp(make_lagrangian("free", 1), dom, GridSpec::uniform(1, 4, 3, 5, 1.5), 2);
  std::size_t row = prob.basis.size();
  for (std::size_t k = 0; k < prob.basis.size(); ++k)
    if (prob.basis[k].id() == "x0*b(t)") row = k;
  ASSERT_LT(row, prob.basis.size());
  ASSERT_EQ(prob.lp.A.rows(), static_cast<Eigen::Index>(prob.basis.size() + 1));
  for (std::size_t j = 0; j < prob.cells.size(); ++j) {
    const PhasePoint& p = prob.cells[j];
    const double t = p.t, x = p.x(0), v = p.v(0);
    const double expect = (t * (t0 - t) * v + (t0 - 2 * t) * x) / (t0 * t0);
    EXPECT_NEAR(prob.lp.A(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)), expect, 1e-14);
    EXPECT_EQ(prob.lp.A(prob.lp.A.rows() - 1, static_cast<Eigen::Index>(j)), 1.0);
    EXPECT_EQ(prob.lp.c(static_cast<Eigen::Index>(j)), 0.5 * v * v);
  }
  // Symmetric grid: the row sums to zero.
  EXPECT_NEAR(prob.lp.A.row(static_cast<Eigen::Index>(row)).sum(), 0.0, 1e-12);
  EXPECT_NEAR(prob.cell_volume, 0.25 * 1.0 * 0.4, 1e-15);
}

TEST(BuildLp, CellCentresAndCount) {
  GridSpec g = GridSpec::uniform(2, 3, 2, 1, 1.0);
  g.v_bounds[1] = {0.0, 4.0};
  const LPProblem prob = build_lp(make_lagrangian("free", 2), Domain::torus(2, 1.0).set_time_independent(), g, 1);
  EXPECT_EQ(prob.cells.size(), 36u);
  EXPECT_EQ(g.cell_count(), 36u);
  for (const auto& p : prob.cells) {
    EXPECT_TRUE(std::abs(p.v(1) - 1.0) < 1e-15 || std::abs(p.v(1) - 3.0) < 1e-15);
    EXPECT_EQ(p.t, 0.0);
  }
}

TEST(BuildLp, RejectsBadGrids) {
  const Lagrangian L = make_lagrangian("free", 1);
  EXPECT_THROW(build_lp(L, circle(), GridSpec::uniform(1, 0, 3, 1, 1.0), 1), InvalidInput);
  EXPECT_THROW(build_lp(L, circle(), GridSpec::uniform(1, 3, 3, 0, 1.0), 1), InvalidInput);
  EXPECT_THROW(build_lp(L, circle(), GridSpec::uniform(1, 3, 3, 2, 1.0), 1), InvalidInput);
  EXPECT_THROW(build_lp(L, circle(), GridSpec::uniform(2, 3, 3, 1, 1.0), 1), InvalidInput);
  EXPECT_THROW(build_lp(L, Domain::euclidean(1, 1.0), GridSpec::uniform(1, 3, 3, 1, 1.0), 1), InvalidInput);
  EXPECT_THROW(build_lp(L, circle(), GridSpec::uniform(1, 3, 3, 1, 0.0), 1), InvalidInput);
}

// ---------------------------------------------------------------- optima

TEST(MinAction, DoubleWellSitsInTheValley) {
  const Lagrangian L = make_lagrangian("double_well", 1);
  const GridSpec g = GridSpec::uniform(1, 8, 10, 1, 2.0);
  const MinActionResult r = solve_min_action(build_lp(L, circle(), g, 2));
  double best = kInf;
  for (double v : detail::centers(-2.0, 2.0, 10)) best = std::min(best, L({vec({0.0}), vec({v}), 0.0}));
  EXPECT_NEAR(r.value, best, 1e-10);
  EXPECT_LE(r.value, 0.2);
  for (const auto& a : r.measure.atoms()) EXPECT_LE(std::abs(std::abs(a.point.v(0)) - 1.0), 0.2 + 1e-12);
  EXPECT_NEAR(r.measure.mass(), 1.0, 1e-12);
}

TEST(MinAction, KineticValueShrinksWithTheGrid) {
  const Lagrangian L = make_lagrangian("free", 1);
  double prev = kInf;
  for (int nv : {2, 4, 8, 16}) {
    const MinActionResult r = solve_min_action(build_lp(L, circle(), GridSpec::uniform(1, 6, nv, 1, 1.0), 2));
    const double h = 2.0 / nv;
    EXPECT_NEAR(r.value, 0.5 * (h / 2) * (h / 2), 1e-12);
    EXPECT_LT(r.value, prev);
    prev = r.value;
  }
  EXPECT_LE(solve_min_action(build_lp(L, circle(), GridSpec::uniform(1, 6, 9, 1, 1.0), 2)).value, 1e-14);
}

TEST(MinAction, TwoBranchLagrangianReachesZero) {
  GridSpec g = GridSpec::uniform(2, 3, 1, 1, 1.0);
  g.nv = {1, 2};
  g.v_bounds = {{0.5, 1.5}, {-2.0, 2.0}};
  const MinActionResult r =
      solve_min_action(build_lp(make_lagrangian("example33", 2), Domain::torus(2, 1.0).set_time_independent(), g, 2));
  EXPECT_GE(r.value, -1e-12);
  EXPECT_LE(r.value, 1e-12);
}

TEST(MinAction, DegreeMonotonicity) {
  const Lagrangian L = make_lagrangian("double_well", 1, {{"tilt", {0.5}}});
  const Domain dom = Domain::box({{0.0, 1.0}}, 1.0);
  const GridSpec g = GridSpec::uniform(1, 5, 8, 5, 2.0);
  double prev = -kInf;
  for (int d = 1; d <= 3; ++d) {
    const double v = solve_min_action(build_lp(L, dom, g, d)).value;
    EXPECT_GE(v, prev - 1e-9) << d;
    prev = v;
  }
}

TEST(MinAction, NoRandomFeasiblePointBeatsTheOptimum) {
  const Lagrangian L = make_lagrangian("double_well", 1, {{"tilt", {0.5}}});
  const LPProblem prob = build_lp(L, Domain::box({{0.0, 1.0}}, 1.0), GridSpec::uniform(1, 4, 6, 4, 2.0), 2);
  const MinActionResult opt = solve_min_action(prob);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  std::exponential_distribution<double> E(1.0);
  // Feasible vertices reached under random costs, then random mixtures of them.
  std::vector<Vec> vertices;
  for (int k = 0; k < 12; ++k) {
    LinearProgram lp = prob.lp;
    for (Eigen::Index j = 0; j < lp.c.size(); ++j) lp.c(j) = U(rng);
    const LPResult r = solve_lp(lp);
    ASSERT_EQ(r.status, LPStatus::Optimal);
    vertices.push_back(r.x.cwiseMax(0.0));
  }
  for (int trial = 0; trial < 100; ++trial) {
    Vec x = Vec::Zero(prob.lp.A.cols());
    double total = 0.0;
    for (const auto& v : vertices) {
      const double w = E(rng);
      x += w * v;
      total += w;
    }
    x /= total;
    ASSERT_LE((prob.lp.A * x - prob.lp.b).norm(), 1e-8);
    EXPECT_GE(prob.lp.c.dot(x), opt.value - 1e-9);
  }
}

TEST(MinAction, DualCertificateIsTight) {
  const Lagrangian L = make_lagrangian("double_well", 1, {{"tilt", {0.5}}});
  const LPProblem prob = build_lp(L, Domain::box({{0.0, 1.0}}, 1.0), GridSpec::uniform(1, 5, 8, 5, 2.0), 2);
  const MinActionResult r = solve_min_action(prob);
  EXPECT_LE(std::abs(r.duality_gap), 1e-8 * (1 + std::abs(r.value)));
  EXPECT_GE(r.reduced_costs(prob).minCoeff(), -1e-9);
  EXPECT_NEAR(r.certificate_constant, -r.value, 1e-9);
  const CertificateCheck c = minimizable_certificate_check(r.measure, L, r.certificate, r.certificate_constant,
                                                           prob.cells, 1e-8);
  EXPECT_TRUE(c.pass()) << c.worst_gap();
  EXPECT_LE(closedness_residual(r.measure, prob.basis).max_normalized, 1e-9);
}

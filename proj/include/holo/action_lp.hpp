#pragma once

#include "holo/lagrangian.hpp"
#include "holo/measure.hpp"
#include "holo/simplex.hpp"

namespace holo {

/// Tensor grid of cells over (x, v, t). x spans the domain (periods or bounds),
/// v spans v_bounds, t spans [0, t0]. Atoms sit at cell centres.
struct GridSpec {
  std::vector<int> nx;
  std::vector<int> nv;
  int nt = 1;
  std::vector<std::pair<double, double>> v_bounds;

  /// Same counts and velocity box on every axis.
  static GridSpec uniform(int n, int nx, int nv, int nt, double vmax) {
    return {std::vector<int>(static_cast<std::size_t>(n), nx), std::vector<int>(static_cast<std::size_t>(n), nv),
            nt, std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {-vmax, vmax})};
  }

  std::size_t cell_count() const {
    std::size_t c = static_cast<std::size_t>(nt);
    for (int k : nx) c *= static_cast<std::size_t>(k);
    for (int k : nv) c *= static_cast<std::size_t>(k);
    return c;
  }
};

struct LPProblem {
  Domain domain;
  TestBasis basis;
  std::vector<PhasePoint> cells;
  double cell_volume = 0.0;
  LinearProgram lp;  // rows: one per probe, then the mass row
};

namespace detail {

inline std::vector<double> centers(double lo, double hi, int m) {
  std::vector<double> c;
  for (int i = 0; i < m; ++i) c.push_back(lo + (hi - lo) * (i + 0.5) / m);
  return c;
}

}  // namespace detail

/// Discretised action minimisation over closed probability measures: cell weights
/// w >= 0 with sum_j w_j (phi_x . v + phi_t)(centre_j) = 0 for every probe and
/// sum_j w_j = 1, minimising sum_j w_j L(centre_j).
inline LPProblem build_lp(const Lagrangian& L, const Domain& dom, const GridSpec& grid, int degree) {
  dom.validate();
  const int n = dom.n;
  if (L.n() != n) throw InvalidInput("Lagrangian and domain dimensions differ");
  if (static_cast<int>(grid.nx.size()) != n || static_cast<int>(grid.nv.size()) != n ||
      static_cast<int>(grid.v_bounds.size()) != n)
    throw InvalidInput("grid has the wrong dimension");
  if (grid.nt < 1) throw InvalidInput("empty grid");
  for (int k : grid.nx)
    if (k < 1) throw InvalidInput("empty grid");
  for (int k : grid.nv)
    if (k < 1) throw InvalidInput("empty grid");
  if (dom.time_independent && grid.nt != 1) throw InvalidInput("a time-independent grid has one time cell");

  std::vector<std::vector<double>> axes;
  double volume = 1.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double lo = dom.bounds[k].first, hi = dom.bounds[k].second;
    if (dom.periodic[k]) lo = 0.0, hi = dom.period[k];
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidInput("grid needs a bounded domain");
    axes.push_back(detail::centers(lo, hi, grid.nx[k]));
    volume *= (hi - lo) / grid.nx[k];
  }
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto [lo, hi] = grid.v_bounds[k];
    if (!(lo < hi)) throw InvalidInput("velocity bounds must satisfy lo < hi");
    axes.push_back(detail::centers(lo, hi, grid.nv[k]));
    volume *= (hi - lo) / grid.nv[k];
  }
  if (dom.time_independent) {
    axes.push_back({0.0});
  } else {
    axes.push_back(detail::centers(0.0, dom.t0, grid.nt));
    volume *= dom.t0 / grid.nt;
  }

  LPProblem prob;
  prob.domain = dom;
  prob.cell_volume = volume;
  prob.basis = make_basis(dom, ProbeKind::Base, degree, true);
  const std::size_t total = grid.cell_count();
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t c = 0; c < total; ++c) {
    PhasePoint p{Vec(n), Vec(n), 0.0};
    for (int i = 0; i < n; ++i) p.x(i) = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    for (int i = 0; i < n; ++i)
      p.v(i) = axes[static_cast<std::size_t>(n + i)][idx[static_cast<std::size_t>(n + i)]];
    p.t = axes.back()[idx.back()];
    prob.cells.push_back(std::move(p));
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < axes[a].size()) break;
      idx[a] = 0;
    }
  }

  const auto rows = static_cast<Eigen::Index>(prob.basis.size() + 1);
  const auto cols = static_cast<Eigen::Index>(prob.cells.size());
  prob.lp.A.resize(rows, cols);
  prob.lp.b = Vec::Zero(rows);
  prob.lp.b(rows - 1) = 1.0;
  prob.lp.c.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const PhasePoint& p = prob.cells[static_cast<std::size_t>(j)];
    prob.lp.c(j) = L(p);
    for (std::size_t r = 0; r < prob.basis.size(); ++r) {
      const Jet2 jet = prob.basis[r].jet(p);
      prob.lp.A(static_cast<Eigen::Index>(r), j) = jet.grad_x.dot(p.v) + jet.dt;
    }
    prob.lp.A(rows - 1, j) = 1.0;
  }
  return prob;
}

struct MinActionResult {
  AtomicMeasure measure;
  double value = 0.0;
  Vec duals;                 // one per probe row, then the mass row
  double duality_gap = 0.0;
  TestFunction certificate;  // f = sum of probe duals times probes
  double certificate_constant = 0.0;  // c with L + c - df >= 0 on every cell
  int iterations = 0;
  std::vector<PhasePoint> cells;

  /// Reduced costs L + c - df on the cells, in cell order.
  Vec reduced_costs(const LPProblem& prob) const {
    return prob.lp.c - prob.lp.A.transpose() * duals;
  }
};

/// Solves the LP. Infeasible problems raise Infeasible with a Farkas vector.
inline MinActionResult solve_min_action(const LPProblem& prob, const SimplexOptions& opt = {}) {
  const LPResult r = solve_lp(prob.lp, opt);
  if (r.status == LPStatus::Infeasible)
    throw Infeasible("no closed probability measure on this grid satisfies the constraints", r.farkas);
  if (r.status != LPStatus::Optimal) throw Error("simplex stopped: " + to_string(r.status));

  MinActionResult out;
  out.value = r.value;
  out.duals = r.y;
  out.duality_gap = r.duality_gap;
  out.iterations = r.iterations;
  out.cells = prob.cells;
  std::vector<Atom> atoms;
  for (Eigen::Index j = 0; j < r.x.size(); ++j)
    if (r.x(j) > 1e-14) atoms.push_back({prob.cells[static_cast<std::size_t>(j)], r.x(j)});
  out.measure = AtomicMeasure(prob.domain, std::move(atoms));

  const std::size_t P = prob.basis.size();
  TestFunction f = 0.0 * prob.basis[0];
  for (std::size_t k = 0; k < P; ++k) {
    const double y = r.y(static_cast<Eigen::Index>(k));
    if (y != 0.0) f = f + y * prob.basis[k];
  }
  f.set_id("certificate");
  out.certificate = std::move(f);
  out.certificate_constant = -r.y(static_cast<Eigen::Index>(P));
  return out;
}

}  // namespace holo

// Two straight branches through the same base points with opposite vertical
// velocities: closed, zero action, yet not invariant.

#include "holo/holo.hpp"

#include <cstdio>

int main() {
  using namespace holo;
  const AtomicMeasure mu = crossing_branches_measure(401, QuadratureRule::Simpson);
  const Lagrangian L = make_lagrangian("example33", 2);

  const auto closed = closedness_residual(mu, make_basis(mu.domain(), ProbeKind::Base, 3, true));
  const auto inv = invariance_residual(mu, L, make_basis(mu.domain(), ProbeKind::Full, 2, true));
  const auto graph = graph_support_check(mu);

  std::printf("atoms              %zu\n", mu.size());
  std::printf("action             %.3e\n", mu.integrate([&](const PhasePoint& p) { return L(p); }));
  std::printf("closedness         %.3e\n", closed.max_normalized);
  std::printf("invariance         %.3e\n", inv.max_normalized);
  std::printf("support is a graph %s\n", graph.is_graph ? "yes" : "no");
  if (graph.offending)
    std::printf("  fiber at t=%.3f carries %zu velocities\n", graph.offending->t, graph.offending->velocities.size());
  return 0;
}

// Minimise the action of |v|^2/2 over closed probability measures on a grid of
// the circle and print the optimiser together with its dual certificate.

#include "holo/holo.hpp"

#include <cstdio>

int main(int argc, char** argv) {
  using namespace holo;
  const int nx = argc > 1 ? std::atoi(argv[1]) : 16;
  const int nv = argc > 2 ? std::atoi(argv[2]) : 17;
  const int nt = argc > 3 ? std::atoi(argv[3]) : 5;

  const Lagrangian L = make_lagrangian("free", 1);
  const Domain dom = Domain::torus(1, 1.0);
  const LPProblem prob = build_lp(L, dom, GridSpec::uniform(1, nx, nv, nt, 2.0), 2);
  const MinActionResult res = solve_min_action(prob);

  std::printf("cells %zu, probes %zu, pivots %d\n", prob.cells.size(), prob.basis.size(), res.iterations);
  std::printf("value %.3e  duality gap %.3e\n", res.value, res.duality_gap);
  for (const auto& a : res.measure.atoms())
    std::printf("  x=%.4f v=%+.4f t=%.4f  w=%.6f\n", a.point.x(0), a.point.v(0), a.point.t, a.weight);

  const auto cert = minimizable_certificate_check(res.measure, L, res.certificate, res.certificate_constant, res.cells);
  std::printf("certificate: min excess %.3e, support gap %.3e, integral %.3e\n", cert.min_excess, cert.support_gap,
              cert.integral_gap);
  return 0;
}

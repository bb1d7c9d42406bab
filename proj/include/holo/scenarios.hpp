#pragma once

#include "holo/action_lp.hpp"
#include "holo/variations.hpp"

#include <map>
#include <sstream>

namespace holo {

/// Where the expected value of a check comes from: a published value, an
/// independent recomputation, or the construction itself.
enum class Provenance { Literature, Oracle, Construction };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Literature: return "literature";
    case Provenance::Oracle: return "oracle";
    case Provenance::Construction: return "construction";
  }
  return "?";
}

struct Check {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  std::string comparator = "<=";
  bool pass = false;
  Provenance provenance = Provenance::Oracle;
  std::string oracle;  // how the expected value is recomputed
};

struct ScenarioReport {
  std::string scenario;
  std::vector<Check> checks;
  std::map<std::string, std::string> params;
  std::map<std::string, double> values;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  const Check& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw InvalidInput("no check named '" + name + "'");
  }

  void at_most(std::string name, double residual, double threshold, Provenance p, std::string oracle = {}) {
    checks.push_back({std::move(name), residual, threshold, "<=", residual <= threshold, p, std::move(oracle)});
  }
  void above(std::string name, double residual, double threshold, Provenance p, std::string oracle = {}) {
    checks.push_back({std::move(name), residual, threshold, ">", residual > threshold, p, std::move(oracle)});
  }
};

using ScenarioParams = std::map<std::string, std::string>;

namespace detail {

inline double get(const ScenarioParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("parameter '" + key + "' is not a number: " + it->second);
  }
}

inline int get_int(const ScenarioParams& p, const std::string& key, int fallback) {
  const double v = get(p, key, fallback);
  if (v != std::floor(v)) throw InvalidInput("parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

inline std::string get_str(const ScenarioParams& p, const std::string& key, std::string fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void reject_unknown(const ScenarioParams& p, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw InvalidInput("unknown parameter '" + k + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Two crossing branches: a closed minimiser that is not invariant.

/// Half of Lebesgue measure on the branch ((t, 0), (1, 1), t) plus half on ((t, 0), (1, -1), t).
inline AtomicMeasure crossing_branches_measure(std::size_t nodes, QuadratureRule rule) {
  const Domain dom = Domain::box({{0.0, 1.0}, {0.0, 1.0}}, 1.0);
  auto branch = [&](double s) {
    Vec vel(2);
    vel << 1.0, s;
    return sample_curve(
        1.0, nodes,
        [](double t) {
          Vec x(2);
          x << t, 0.0;
          return x;
        },
        [vel](double) { return vel; }, [](double) -> Vec { return Vec::Zero(2); });
  };
  return convex_combination({{0.5, from_curve(dom, branch(1.0), rule)}, {0.5, from_curve(dom, branch(-1.0), rule)}});
}

/// The probe x2 v2 sin(pi t / t0).
inline TestFunction crossing_witness(double t0 = 1.0) {
  Term term;
  term.factors = {Factor::pow(0), Factor::pow(1), Factor::pow(0), Factor::pow(1), Factor::sin(std::numbers::pi / t0)};
  TestFunction f(ProbeKind::Full, 2, t0, {term}, false, "x2*v2*sin(pi t)");
  f.set_boundary_vanishing(true);
  return f;
}

inline ScenarioReport scenario_noninvariant_minimum(const ScenarioParams& params = {}) {
  detail::reject_unknown(params, {"nodes", "degree", "rule"});
  const int nodes = detail::get_int(params, "nodes", 401);
  const int degree = detail::get_int(params, "degree", 3);
  const auto rule = quadrature_from_string(detail::get_str(params, "rule", "simpson"));

  ScenarioReport rep;
  rep.scenario = "noninvariant_minimum";
  rep.params = {{"nodes", std::to_string(nodes)}, {"degree", std::to_string(degree)}, {"rule", to_string(rule)}};
  const AtomicMeasure mu = crossing_branches_measure(static_cast<std::size_t>(nodes), rule);
  const Lagrangian L = make_lagrangian("example33", 2);

  const double action = mu.integrate([&](const PhasePoint& p) { return L(p); });
  rep.at_most("action", std::abs(action), 1e-12, Provenance::Literature);

  const auto closed = closedness_residual(mu, make_basis(mu.domain(), ProbeKind::Base, degree, true));
  rep.at_most("closedness", closed.max_normalized, 1e-6, Provenance::Oracle,
              "x2-parts cancel between branches; the rest integrates d/dt phi(t, 0, t) over [0, 1]");

  TestBasis witness{ProbeKind::Full, degree, true, {crossing_witness()}};
  const double defect = invariance_residual(mu, L, witness).per_probe.front().defect;
  rep.values["invariance_witness_defect"] = defect;
  rep.at_most("invariance_witness", std::abs(defect - 2.0 / std::numbers::pi), 1e-3, Provenance::Oracle,
              "EL field vanishes; the defect is the integral of sin(pi t) over [0, 1] = 2/pi");

  const GraphCheck g = graph_support_check(mu);
  rep.checks.push_back({"graph_support", g.is_graph ? 1.0 : 0.0, 0.0, "is false", !g.is_graph,
                        Provenance::Literature, {}});

  const auto C = estimate_second_derivative(mu, make_basis(mu.domain(), ProbeKind::Full, degree, true));
  rep.above("second_derivative_inconsistent", C.residual->max_normalized, 0.1, Provenance::Oracle,
            "probe x2 v2 b(t) has f_v = 0 on the support and defect mean(b) / max(b) = 2/3");
  return rep;
}

// ---------------------------------------------------------------------------
// Torus densities: closed and critical for the horizontal family, yet not invariant.

/// Raised-cosine density (1 + cos(pi (v - c) / h)) / (2 h) on [c - h, c + h].
struct CosineBump {
  double center = 1.0;
  double half_width = 0.5;

  double operator()(double v) const {
    const double u = (v - center) / half_width;
    if (std::abs(u) >= 1.0) return 0.0;
    return (1.0 + std::cos(std::numbers::pi * u)) / (2.0 * half_width);
  }
  double first_moment() const { return center; }
  double second_moment() const {
    return center * center + half_width * half_width * (1.0 / 3.0 - 2.0 / (std::numbers::pi * std::numbers::pi));
  }
};

inline std::vector<CosineBump> torus_bumps(int k) {
  std::vector<CosineBump> b;
  for (int i = 0; i < k; ++i) b.push_back({1.0 + 0.25 * i, 0.6 + 0.05 * i});
  return b;
}

struct TorusConstruction {
  AtomicMeasure measure;
  std::vector<CosineBump> bumps;
  Vec r, s;          // discrete first and second moments of the bumps
  Vec c;             // amplitudes of the cos(2 pi x) modulation
  double eps = 0.0;
};

/// mu = sum_i a_i(x) rho_i(v) dx dv on the circle with a_i = 1/k + eps c_i cos(2 pi x),
/// c spanning part of the kernel of the moment matrix [r; s].
inline TorusConstruction torus_construction(int k, double eps, int nx, int nv, bool zero_modulation) {
  if (k < 4) throw InvalidInput("the torus construction needs k >= 4");
  if (nx < 2 || nv < 3) throw InvalidInput("torus grid is too coarse");
  const Domain dom = Domain::torus(1, 1.0).set_time_independent();
  TorusConstruction out;
  out.bumps = torus_bumps(k);
  out.eps = eps;
  double vlo = kInf, vhi = -kInf;
  for (const auto& b : out.bumps) vlo = std::min(vlo, b.center - b.half_width), vhi = std::max(vhi, b.center + b.half_width);

  std::vector<double> vs(static_cast<std::size_t>(nv)), wv(vs.size());
  for (int j = 0; j < nv; ++j) vs[static_cast<std::size_t>(j)] = vlo + (vhi - vlo) * j / (nv - 1);
  wv = quadrature_weights(vs, QuadratureRule::Trapezoid);

  Mat rho(k, nv);
  out.r = Vec(k), out.s = Vec(k);
  for (int i = 0; i < k; ++i) {
    double mass = 0.0;
    for (int j = 0; j < nv; ++j) {
      rho(i, j) = out.bumps[static_cast<std::size_t>(i)](vs[static_cast<std::size_t>(j)]);
      mass += wv[static_cast<std::size_t>(j)] * rho(i, j);
    }
    rho.row(i) /= mass;
    double r = 0.0, s = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double w = wv[static_cast<std::size_t>(j)] * rho(i, j), v = vs[static_cast<std::size_t>(j)];
      r += w * v, s += w * v * v;
    }
    out.r(i) = r, out.s(i) = s;
  }

  Mat M(2, k);
  M.row(0) = out.r.transpose();
  M.row(1) = out.s.transpose();
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  out.c = svd.matrixV().col(k - 1);
  if (out.c(0) < 0.0) out.c = -out.c;
  if (zero_modulation) out.c.setZero();
  if (eps * out.c.cwiseAbs().maxCoeff() >= 1.0 / k) throw InvalidInput("eps too large: densities turn negative");

  std::vector<Atom> atoms;
  for (int m = 0; m < nx; ++m) {
    const double x = static_cast<double>(m) / nx;
    for (int j = 0; j < nv; ++j) {
      double w = 0.0;
      for (int i = 0; i < k; ++i) {
        const double a = 1.0 / k + eps * out.c(i) * std::cos(2.0 * std::numbers::pi * x);
        w += a * rho(i, j);
      }
      w *= wv[static_cast<std::size_t>(j)] / nx;
      if (w > 0.0) atoms.push_back({{Vec::Constant(1, x), Vec::Constant(1, vs[static_cast<std::size_t>(j)]), 0.0}, w});
    }
  }
  out.measure = AtomicMeasure(dom, std::move(atoms));
  return out;
}

/// Largest normalised |<eta_beta, L>| over beta in {cos, sin}(2 pi j x), j <= degree, where
/// eta_beta differentiates along the flow of beta on the circle. With with_velocity false the
/// fibre term drops its factor v.
inline double velocity_independent_criticality(const AtomicMeasure& mu, const Lagrangian& L, int degree,
                                               bool with_velocity = true) {
  double worst = 0.0;
  const double mass = mu.mass();
  for (int j = 1; j <= degree; ++j)
    for (int kind = 0; kind < 2; ++kind) {
      const double w = 2.0 * std::numbers::pi * j;
      auto beta = [&](double x) { return kind == 0 ? std::cos(w * x) : std::sin(w * x); };
      auto dbeta = [&](double x) { return kind == 0 ? -w * std::sin(w * x) : w * std::cos(w * x); };
      double s = 0.0, scale = 0.0;
      for (const auto& a : mu.atoms()) {
        const double x = a.point.x(0), v = a.point.v(0);
        const double lx = L.Lx(a.point)(0), lv = L.Lv(a.point)(0);
        const double fib = dbeta(x) * (with_velocity ? v : 1.0) * lv;
        s += a.weight * (beta(x) * lx + fib);
        scale = std::max(scale, std::abs(beta(x) * lx) + std::abs(fib));
      }
      if (scale > 0.0) worst = std::max(worst, std::abs(s) / (mass * scale));
    }
  return worst;
}

inline ScenarioReport scenario_torus_insufficiency(const ScenarioParams& params = {}) {
  detail::reject_unknown(params, {"k", "eps", "nx", "nv", "degree", "zero_modulation"});
  const int k = detail::get_int(params, "k", 4);
  const double eps = detail::get(params, "eps", 0.05);
  const int nx = detail::get_int(params, "nx", 64);
  const int nv = detail::get_int(params, "nv", 801);
  const int degree = detail::get_int(params, "degree", 3);
  const bool zero = detail::get_int(params, "zero_modulation", 0) != 0;

  ScenarioReport rep;
  rep.scenario = "torus_insufficiency";
  rep.params = {{"k", std::to_string(k)}, {"eps", std::to_string(eps)}, {"nx", std::to_string(nx)},
                {"nv", std::to_string(nv)}, {"degree", std::to_string(degree)},
                {"zero_modulation", zero ? "1" : "0"}};
  const TorusConstruction tc = torus_construction(k, eps, nx, nv, zero);
  const AtomicMeasure& mu = tc.measure;
  const Lagrangian L = make_lagrangian("torus_v2", 1);

  double moment_err = 0.0;
  for (int i = 0; i < k; ++i) {
    moment_err = std::max(moment_err, std::abs(tc.r(i) - tc.bumps[static_cast<std::size_t>(i)].first_moment()));
    moment_err = std::max(moment_err, std::abs(tc.s(i) - tc.bumps[static_cast<std::size_t>(i)].second_moment()));
  }
  rep.values["moment_quadrature_error"] = moment_err;
  for (int i = 0; i < k; ++i) rep.values["c" + std::to_string(i)] = tc.c(i);

  const double item_mass = std::abs(mu.mass() - 1.0);
  const double item_closed =
      closedness_residual(mu, make_basis(mu.domain(), ProbeKind::Base, degree, true)).max_normalized;
  const double item_critical = velocity_independent_criticality(mu, L, degree);
  const double item_invariant =
      invariance_residual(mu, L, make_basis(mu.domain(), ProbeKind::Full, degree, true)).max_normalized;
  const double sum = item_mass + item_closed + item_critical;
  rep.values["invariance"] = item_invariant;
  rep.values["horizontal_criticality_without_v"] = velocity_independent_criticality(mu, L, degree, false);

  rep.at_most("probability", item_mass, 1e-6, Provenance::Construction);
  rep.at_most("closedness", item_closed, 1e-6, Provenance::Oracle,
              "sum_i r_i a_i is constant because c is orthogonal to the first moments");
  rep.at_most("horizontal_criticality", item_critical, 1e-6, Provenance::Oracle,
              "sum_i s_i a_i is constant because c is orthogonal to the second moments");
  if (zero) {
    rep.at_most("invariance", item_invariant, 1e-6, Provenance::Oracle, "constant densities are invariant");
  } else {
    rep.above("invariance_gap", item_invariant, 10.0 * sum, Provenance::Literature,
              "third moments of the bumps do not cancel against c");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Discretised minimisation over closed measures and its dual certificate.

inline ScenarioReport scenario_mane(const ScenarioParams& params = {}) {
  detail::reject_unknown(params, {"lagrangian", "n", "nx", "nv", "nt", "vmax", "degree", "allow_nonconvex",
                                  "k", "tilt", "b", "gamma"});
  const std::string tag = detail::get_str(params, "lagrangian", "free");
  const int n = detail::get_int(params, "n", 1);
  const int nx = detail::get_int(params, "nx", 32);
  const int nv = detail::get_int(params, "nv", 33);
  const int nt = detail::get_int(params, "nt", 9);
  const double vmax = detail::get(params, "vmax", 2.0);
  const int degree = detail::get_int(params, "degree", 2);
  const bool allow_nonconvex = detail::get_int(params, "allow_nonconvex", 0) != 0;
  LagrangianParams lp;
  for (const char* key : {"k", "tilt", "b", "gamma"})
    if (params.count(key)) lp[key] = {detail::get(params, key, 0.0)};
  const Lagrangian L = make_lagrangian(tag, n, lp);
  if (!L.fiber_convex() && !allow_nonconvex)
    throw InvalidInput("Lagrangian '" + tag + "' is not fiberwise convex (set allow_nonconvex=1 to proceed)");

  ScenarioReport rep;
  rep.scenario = "mane";
  rep.params = {{"lagrangian", tag}, {"n", std::to_string(n)}, {"nx", std::to_string(nx)},
                {"nv", std::to_string(nv)}, {"nt", std::to_string(nt)}, {"vmax", std::to_string(vmax)},
                {"degree", std::to_string(degree)}};
  const Domain dom = Domain::torus(n, 1.0);
  const LPProblem prob = build_lp(L, dom, GridSpec::uniform(n, nx, nv, nt, vmax), degree);
  const MinActionResult res = solve_min_action(prob);
  rep.values["value"] = res.value;
  rep.values["atoms"] = static_cast<double>(res.measure.size());
  rep.values["iterations"] = res.iterations;

  double lower = kInf;
  for (Eigen::Index j = 0; j < prob.lp.c.size(); ++j) lower = std::min(lower, prob.lp.c(j));
  rep.values["min_cell_lagrangian"] = lower;
  if (tag == "free" || tag == "torus_v2")
    rep.at_most("value", std::abs(res.value), 1e-8, Provenance::Oracle, "rest measures are closed and have zero action");
  rep.at_most("duality_gap", res.duality_gap, 1e-8 * (1.0 + std::abs(res.value)), Provenance::Construction);

  const auto inv = invariance_residual(res.measure, L, make_basis(dom, ProbeKind::Full, degree, true));
  rep.at_most("invariance", inv.max_normalized, 1e-6, Provenance::Literature);

  const auto cert = minimizable_certificate_check(res.measure, L, res.certificate, res.certificate_constant, res.cells);
  rep.at_most("certificate", cert.worst_gap(), 1e-6, Provenance::Construction);

  const GraphCheck g = graph_support_check(res.measure);
  rep.checks.push_back({"graph_support", g.is_graph ? 0.0 : 1.0, 0.0, "is true", g.is_graph,
                        Provenance::Literature, {}});

  const TestBasis full = make_basis(dom, ProbeKind::Full, degree, true);
  const auto C = estimate_second_derivative(res.measure, full);
  rep.at_most("second_derivative", C.residual->max_normalized, 1e-6, Provenance::Construction);
  const auto crit = horizontal_criticality_residual(res.measure, L, C, full);
  rep.at_most("horizontal_criticality", crit.max_normalized, 1e-6, Provenance::Literature);
  return rep;
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residual along sampled curves.

/// max over samples of |d/dt Lv(gamma, gamma', t) - Lx|, the time derivative taken by
/// second-order differences of the sampled momenta.
inline double el_residual(const Lagrangian& L, const CurveSamples& c) {
  const std::size_t m = c.size();
  if (m < 3) throw InvalidInput("EL residual needs at least three samples");
  std::vector<Vec> p(m), f(m);
  for (std::size_t k = 0; k < m; ++k) {
    const PhasePoint q{c.positions[k], c.velocities[k], c.times[k]};
    p[k] = L.Lv(q);
    f[k] = L.Lx(q);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    Vec dp;
    if (k == 0) {
      const double h1 = c.times[1] - c.times[0], h2 = c.times[2] - c.times[1];
      dp = -(2 * h1 + h2) / (h1 * (h1 + h2)) * p[0] + (h1 + h2) / (h1 * h2) * p[1] - h1 / (h2 * (h1 + h2)) * p[2];
    } else if (k + 1 == m) {
      const double h1 = c.times[m - 2] - c.times[m - 3], h2 = c.times[m - 1] - c.times[m - 2];
      dp = h2 / (h1 * (h1 + h2)) * p[m - 3] - (h1 + h2) / (h1 * h2) * p[m - 2] + (2 * h2 + h1) / (h2 * (h1 + h2)) * p[m - 1];
    } else {
      const double h1 = c.times[k] - c.times[k - 1], h2 = c.times[k + 1] - c.times[k];
      dp = -h2 / (h1 * (h1 + h2)) * p[k - 1] + (h2 - h1) / (h1 * h2) * p[k] + h1 / (h2 * (h1 + h2)) * p[k + 1];
    }
    worst = std::max(worst, (dp - f[k]).norm());
  }
  return worst;
}

inline ScenarioReport scenario_appendix_el(const ScenarioParams& params = {}) {
  detail::reject_unknown(params, {"nodes"});
  const int nodes = detail::get_int(params, "nodes", 401);
  ScenarioReport rep;
  rep.scenario = "appendix_el";
  rep.params = {{"nodes", std::to_string(nodes)}};
  const auto m = static_cast<std::size_t>(nodes);

  const Lagrangian osc = make_lagrangian("oscillator", 1);
  const CurveSamples orbit = sample_curve(
      2.0 * std::numbers::pi, m, [](double t) { return Vec::Constant(1, std::cos(t)); },
      [](double t) { return Vec::Constant(1, -std::sin(t)); }, [](double t) { return Vec::Constant(1, -std::cos(t)); });
  rep.at_most("oscillator_orbit", el_residual(osc, orbit), 1e-4, Provenance::Oracle,
              "cos t solves x'' = -x; the residual is the differencing error");

  const Lagrangian free = make_lagrangian("free", 2);
  const CurveSamples line = sample_curve(
      1.0, m,
      [](double t) {
        Vec x(2);
        x << 0.2 + 0.5 * t, -0.3 * t;
        return x;
      },
      [](double) {
        Vec v(2);
        v << 0.5, -0.3;
        return v;
      },
      [](double) -> Vec { return Vec::Zero(2); });
  rep.at_most("straight_line", el_residual(free, line), 1e-12, Provenance::Oracle, "constant momentum");

  const CurveSamples parabola = sample_curve(
      1.0, m,
      [](double t) {
        Vec x(2);
        x << t * t, 0.0;
        return x;
      },
      [](double t) {
        Vec v(2);
        v << 2 * t, 0.0;
        return v;
      },
      [](double) {
        Vec a(2);
        a << 2.0, 0.0;
        return a;
      });
  const double par = el_residual(free, parabola);
  rep.values["parabola_residual"] = par;
  rep.at_most("parabola", std::abs(par - 2.0), 1e-9, Provenance::Oracle, "momentum 2t has derivative 2");
  return rep;
}

inline std::vector<std::string> scenario_names() {
  return {"noninvariant_minimum", "torus_insufficiency", "mane", "appendix_el"};
}

inline ScenarioReport run_scenario(const std::string& name, const ScenarioParams& params = {}) {
  if (name == "noninvariant_minimum") return scenario_noninvariant_minimum(params);
  if (name == "torus_insufficiency") return scenario_torus_insufficiency(params);
  if (name == "mane") return scenario_mane(params);
  if (name == "appendix_el") return scenario_appendix_el(params);
  throw InvalidInput("unknown scenario '" + name + "'");
}

}  // namespace holo

// Command-line front end: scenarios, checks on stored measures, and the discretised
// minimisation.

#include "holo/io.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

using holo::io::json;

std::map<std::string, std::string> parse_pairs(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw holo::InvalidInput("expected key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

holo::LagrangianParams lagrangian_params(const std::vector<std::string>& items) {
  holo::LagrangianParams p;
  for (const auto& [k, v] : parse_pairs(items)) {
    std::vector<double> vals;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw holo::InvalidInput("Lagrangian parameter '" + k + "' is not numeric");
      }
    }
    p[k] = vals;
  }
  return p;
}

int emit(const holo::ScenarioReport& rep, const std::string& out, const std::string& csv, json extra = {}) {
  json j = holo::io::to_json(rep);
  if (!extra.is_null())
    for (auto& [k, v] : extra.items()) j[k] = v;
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    holo::io::write_json_file(out, j);
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw holo::InvalidInput("cannot write " + csv);
    holo::io::write_csv(f, rep);
  }
  for (const auto& c : rep.checks) {
    std::cerr << (c.pass ? "pass  " : "FAIL  ") << c.name << "  " << c.residual << ' ' << c.comparator << ' '
              << c.threshold << '\n';
    if (!c.pass && c.provenance == holo::Provenance::Oracle && !c.oracle.empty())
      std::cerr << "      oracle: " << c.oracle << '\n';
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks for closed and invariant measures of Lagrangian systems"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a named scenario and write its report");
  std::string scenario, out, csv;
  std::vector<std::string> params;
  run->add_option("scenario", scenario, "noninvariant_minimum | torus_insufficiency | mane | appendix_el")->required();
  run->add_option("--param", params, "key=value scenario parameter (repeatable)");
  run->add_option("--out", out, "report JSON path (stdout if omitted)");
  run->add_option("--csv", csv, "also write the checks as CSV");

  // check
  auto* check = app.add_subcommand("check", "Check a property of a stored measure");
  std::string what, measure_path, tag = "free";
  std::vector<std::string> lparams;
  int degree = 2;
  double tolerance = 1e-6;
  check->add_option("property", what, "closedness | invariance | theta1 | theta2 | graph | criticality | lift")
      ->required();
  check->add_option("--measure", measure_path, "measure JSON")->required();
  check->add_option("--lagrangian", tag, "registered Lagrangian");
  check->add_option("--lparam", lparams, "key=value Lagrangian parameter (repeatable; lists comma-separated)");
  check->add_option("--degree", degree, "probe degree");
  check->add_option("--tolerance", tolerance, "pass threshold");
  check->add_option("--out", out, "report JSON path (stdout if omitted)");
  check->add_option("--csv", csv, "also write the checks as CSV");

  // minimize
  auto* minimize = app.add_subcommand("minimize", "Minimise the action over closed measures on a grid");
  std::string grid = "32,33,9", measure_out;
  int n = 1;
  double vmax = 2.0;
  std::string report_out;
  minimize->add_option("--lagrangian", tag, "registered Lagrangian");
  minimize->add_option("--lparam", lparams, "key=value Lagrangian parameter");
  minimize->add_option("--grid", grid, "nx,nv,nt cells per axis");
  minimize->add_option("--degree", degree, "probe degree");
  minimize->add_option("--n", n, "torus dimension");
  minimize->add_option("--vmax", vmax, "velocity box half-width");
  minimize->add_option("--out", measure_out, "output measure JSON")->required();
  minimize->add_option("--report", report_out, "report JSON path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto rep = holo::run_scenario(scenario, parse_pairs(params));
      return emit(rep, out, csv);
    }

    if (*check) {
      const json mj = holo::io::read_json_file(measure_path);
      const holo::AtomicMeasure mu = holo::io::measure_from_json(mj);
      const holo::Domain& dom = mu.domain();
      const holo::Lagrangian L = holo::make_lagrangian(tag, dom.n, lagrangian_params(lparams));
      holo::ScenarioReport rep;
      rep.scenario = "check:" + what;
      rep.params = {{"measure", measure_path}, {"lagrangian", tag}, {"degree", std::to_string(degree)}};
      json extra;
      auto defect_check = [&](const holo::DefectReport& d) {
        rep.at_most(what, d.max_normalized, tolerance, holo::Provenance::Construction);
        extra["defect_report"] = holo::io::to_json(d);
      };
      if (what == "closedness") {
        defect_check(holo::closedness_residual(mu, holo::make_basis(dom, holo::ProbeKind::Base, degree, true), tolerance));
      } else if (what == "invariance") {
        defect_check(holo::invariance_residual(mu, L, holo::make_basis(dom, holo::ProbeKind::Full, degree, true), tolerance));
      } else if (what == "theta1") {
        const double r = holo::theta1_residual(mu, L, holo::make_basis(dom, holo::ProbeKind::Base, degree, false));
        rep.at_most(what, r, tolerance, holo::Provenance::Construction);
      } else if (what == "theta2") {
        rep.at_most(what, holo::theta2_residual(mu, L), tolerance, holo::Provenance::Construction);
      } else if (what == "graph") {
        const auto g = holo::graph_support_check(mu, tolerance);
        rep.checks.push_back({what, g.is_graph ? 0.0 : 1.0, 0.0, "is true", g.is_graph,
                              holo::Provenance::Construction, {}});
        if (g.offending) {
          json vs = json::array();
          for (const auto& v : g.offending->velocities) vs.push_back(holo::io::vec_to_json(v));
          extra["offending_fiber"] = {{"x", holo::io::vec_to_json(g.offending->x)}, {"t", g.offending->t}, {"velocities", vs}};
        }
      } else if (what == "criticality" || what == "lift") {
        const auto full = holo::make_basis(dom, holo::ProbeKind::Full, degree, true);
        holo::SecondDerivativeField C;
        const bool lifted = !mj.at("atoms").empty() && mj.at("atoms")[0].contains("vv");
        if (lifted) {
          const auto lm = holo::io::lifted_from_json(mj);
          C.values = lm.vv;
          if (what == "lift") {
            const auto v = holo::verify_lift(lm, full, tolerance);
            rep.at_most("weak_equation", v.weak_equation.max_normalized, tolerance, holo::Provenance::Construction);
            rep.at_most("velocity_projection", v.velocity_mismatch, tolerance, holo::Provenance::Construction);
            rep.at_most("time_component", v.time_mismatch, tolerance, holo::Provenance::Construction);
            extra["defect_report"] = holo::io::to_json(v.weak_equation);
          }
        } else {
          C = holo::estimate_second_derivative(mu, full);
          if (what == "lift") {
            rep.at_most("weak_equation", C.residual->max_normalized, tolerance, holo::Provenance::Construction);
            extra["defect_report"] = holo::io::to_json(*C.residual);
            extra["lifted_measure"] = holo::io::to_json(holo::lift(mu, C));
          }
        }
        if (what == "criticality") defect_check(holo::horizontal_criticality_residual(mu, L, C, full, tolerance));
      } else {
        throw holo::InvalidInput("unknown property '" + what + "'");
      }
      return emit(rep, out, csv, extra);
    }

    if (*minimize) {
      std::vector<int> counts;
      std::stringstream ss(grid);
      std::string tok;
      while (std::getline(ss, tok, ',')) counts.push_back(std::stoi(tok));
      if (counts.size() != 3) throw holo::InvalidInput("--grid expects nx,nv,nt");
      const holo::Lagrangian L = holo::make_lagrangian(tag, n, lagrangian_params(lparams));
      const holo::Domain dom = holo::Domain::torus(n, 1.0);
      const auto prob = holo::build_lp(L, dom, holo::GridSpec::uniform(n, counts[0], counts[1], counts[2], vmax), degree);
      const auto res = holo::solve_min_action(prob);
      holo::io::write_json_file(measure_out, holo::io::to_json(res.measure));
      holo::ScenarioReport rep;
      rep.scenario = "minimize";
      rep.params = {{"lagrangian", tag}, {"grid", grid}, {"degree", std::to_string(degree)}};
      rep.values = {{"value", res.value}, {"atoms", static_cast<double>(res.measure.size())},
                    {"iterations", static_cast<double>(res.iterations)}};
      rep.at_most("duality_gap", res.duality_gap, 1e-8 * (1.0 + std::abs(res.value)), holo::Provenance::Construction);
      const auto cert =
          holo::minimizable_certificate_check(res.measure, L, res.certificate, res.certificate_constant, res.cells);
      rep.at_most("certificate", cert.worst_gap(), 1e-6, holo::Provenance::Construction);
      json duals = holo::io::vec_to_json(res.duals);
      return emit(rep, report_out, {}, {{"duals", duals}});
    }
  } catch (const holo::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const holo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

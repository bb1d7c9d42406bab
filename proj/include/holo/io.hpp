#pragma once

#include "holo/closed_velocity.hpp"
#include "holo/scenarios.hpp"

#include "json.hpp"

#include <fstream>
#include <ostream>

namespace holo::io {

using json = nlohmann::json;

inline json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Vec vec_from_json(const json& a, int n, const std::string& what) {
  if (!a.is_array() || static_cast<int>(a.size()) != n)
    throw InvalidInput(what + " must be an array of length " + std::to_string(n));
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    if (!a[static_cast<std::size_t>(i)].is_number()) throw InvalidInput(what + " must hold numbers");
    v(i) = a[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

inline json to_json(const Domain& d) {
  json b = json::array();
  for (int i = 0; i < d.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (d.periodic[k])
      b.push_back({0.0, d.period[k]});
    else if (std::isfinite(d.bounds[k].first) && std::isfinite(d.bounds[k].second))
      b.push_back({d.bounds[k].first, d.bounds[k].second});
    else
      b.push_back(nullptr);
  }
  json periodic = json::array();
  for (bool p : d.periodic) periodic.push_back(p);
  return {{"n", d.n}, {"t0", d.t0}, {"periodic", periodic}, {"bounds", b}, {"time_independent", d.time_independent}};
}

inline Domain domain_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("domain must be an object");
  Domain d;
  d.n = j.at("n").get<int>();
  d.t0 = j.at("t0").get<double>();
  if (d.n < 1) throw InvalidInput("domain dimension must be at least 1");
  const auto n = static_cast<std::size_t>(d.n);
  d.periodic.assign(n, false);
  d.period.assign(n, 0.0);
  d.bounds.assign(n, {-kInf, kInf});
  if (j.contains("periodic")) {
    const json& p = j.at("periodic");
    if (p.is_boolean()) {
      d.periodic.assign(n, p.get<bool>());
    } else {
      if (!p.is_array() || p.size() != n) throw InvalidInput("periodic must be a bool or an array of length n");
      for (std::size_t i = 0; i < n; ++i) d.periodic[i] = p[i].get<bool>();
    }
  }
  const json* b = j.contains("bounds") && !j.at("bounds").is_null() ? &j.at("bounds") : nullptr;
  if (b && (!b->is_array() || b->size() != n)) throw InvalidInput("bounds must be an array of length n");
  for (std::size_t i = 0; i < n; ++i) {
    const json* bi = b && !(*b)[i].is_null() ? &(*b)[i] : nullptr;
    if (bi && (!bi->is_array() || bi->size() != 2)) throw InvalidInput("each bound must be [lo, hi]");
    if (d.periodic[i]) {
      const double lo = bi ? (*bi)[0].get<double>() : 0.0;
      const double hi = bi ? (*bi)[1].get<double>() : 1.0;
      d.period[i] = hi - lo;
      d.bounds[i] = {0.0, d.period[i]};
    } else if (bi) {
      d.bounds[i] = {(*bi)[0].get<double>(), (*bi)[1].get<double>()};
    }
  }
  d.time_independent = j.value("time_independent", false);
  d.validate();
  return d;
}

inline json to_json(const AtomicMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms())
    atoms.push_back({{"x", vec_to_json(a.point.x)}, {"v", vec_to_json(a.point.v)}, {"t", a.point.t}, {"w", a.weight}});
  return {{"domain", to_json(mu.domain())}, {"atoms", atoms}};
}

inline AtomicMeasure measure_from_json(const json& j) {
  try {
    const Domain d = domain_from_json(j.at("domain"));
    const json& arr = j.at("atoms");
    if (!arr.is_array()) throw InvalidInput("atoms must be an array");
    std::vector<Atom> atoms;
    for (const auto& a : arr)
      atoms.push_back({{vec_from_json(a.at("x"), d.n, "atom x"), vec_from_json(a.at("v"), d.n, "atom v"),
                        a.at("t").get<double>()},
                       a.at("w").get<double>()});
    return AtomicMeasure(d, std::move(atoms));
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed measure: ") + e.what());
  }
}

inline json to_json(const LiftedMeasure& m) {
  json j = to_json(m.base);
  for (std::size_t k = 0; k < m.size(); ++k) {
    json& a = j["atoms"][k];
    a["vx"] = vec_to_json(m.vx[k]);
    a["vv"] = vec_to_json(m.vv[k]);
    a["vt"] = m.vt[k];
  }
  return j;
}

inline LiftedMeasure lifted_from_json(const json& j) {
  LiftedMeasure m{measure_from_json(j), {}, {}, {}};
  const int n = m.base.domain().n;
  try {
    for (const auto& a : j.at("atoms")) {
      m.vx.push_back(vec_from_json(a.at("vx"), n, "atom vx"));
      m.vv.push_back(vec_from_json(a.at("vv"), n, "atom vv"));
      m.vt.push_back(a.at("vt").get<double>());
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed lifted measure: ") + e.what());
  }
  return m;
}

inline json to_json(const DefectReport& r) {
  json probes = json::array();
  for (const auto& p : r.per_probe) probes.push_back({{"id", p.id}, {"defect", p.defect}, {"normalized", p.normalized}});
  return {{"per_probe", probes}, {"max_normalized", r.max_normalized}, {"basis_degree", r.basis_degree},
          {"tolerance", r.tolerance}};
}

inline DefectReport defect_report_from_json(const json& j) {
  DefectReport r;
  for (const auto& p : j.at("per_probe"))
    r.per_probe.push_back({p.at("id").get<std::string>(), p.at("defect").get<double>(), p.value("normalized", 0.0)});
  r.max_normalized = j.at("max_normalized").get<double>();
  r.basis_degree = j.at("basis_degree").get<int>();
  r.tolerance = j.at("tolerance").get<double>();
  return r;
}

inline json to_json(const Check& c) {
  json j = {{"name", c.name},     {"residual", c.residual},   {"threshold", c.threshold},
            {"comparator", c.comparator}, {"pass", c.pass}, {"provenance", to_string(c.provenance)}};
  if (!c.oracle.empty()) j["oracle"] = c.oracle;
  return j;
}

inline json to_json(const ScenarioReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  json j = {{"scenario", r.scenario}, {"checks", checks}, {"pass", r.all_pass()}};
  if (!r.params.empty()) j["params"] = r.params;
  if (!r.values.empty()) j["values"] = r.values;
  return j;
}

inline void write_csv(std::ostream& os, const ScenarioReport& r) {
  os << "scenario,name,residual,threshold,comparator,pass,provenance\n";
  os.precision(17);
  for (const auto& c : r.checks)
    os << r.scenario << ',' << c.name << ',' << c.residual << ',' << c.threshold << ",\"" << c.comparator << "\","
       << (c.pass ? "true" : "false") << ',' << to_string(c.provenance) << '\n';
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << j.dump(2) << '\n';
}

/// Lagrangian parameters from a JSON object of numbers or number arrays.
inline LagrangianParams lagrangian_params_from_json(const json& j) {
  LagrangianParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw InvalidInput("Lagrangian parameters must be an object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_number())
      p[k] = {v.get<double>()};
    else if (v.is_array())
      p[k] = v.get<std::vector<double>>();
    else
      throw InvalidInput("Lagrangian parameter '" + k + "' must be a number or an array");
  }
  return p;
}

}  // namespace holo::io

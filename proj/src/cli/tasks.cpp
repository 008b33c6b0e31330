#include <algorithm>
#include <cmath>
#include <cstdio>

#include "glag/connections.hpp"
#include "internal.hpp"

namespace glag::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double tolerance(const Scenario& sc, const char* key, double fallback) {
  return sc.tolerances.contains(key) ? sc.tolerances.at(key).get<double>() : fallback;
}

void note_domain(Report& r, const Domain& dom) {
  r.diagnostics["quadrature_nodes"] = dom.nodes().size();
  r.diagnostics["nodes_per_axis"] = dom.quadrature().nodes;
}

std::vector<std::string> coordinate_columns(char prefix, int d) {
  std::vector<std::string> out;
  for (int i = 0; i < d; ++i) out.push_back(coord(prefix, i));
  return out;
}

std::vector<double> as_row(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ---------------------------------------------------------------------------

struct GeodesicSpec {
  Vector p0, v0;
  double t0 = 0.0, t1 = 1.0;
  int steps = 1000;
  bool arclength = false;
};

GeodesicSpec geodesic_spec(const Scenario& sc) {
  const Json& j = sc.section("geodesic");
  if (!j.contains("p0") || !j.contains("v0")) throw ConfigError("geodesic: \"p0\" and \"v0\" are required");
  GeodesicSpec s;
  s.p0 = vector_of(j.at("p0"), "geodesic.p0", sc.m);
  s.v0 = vector_of(j.at("v0"), "geodesic.v0", sc.m);
  s.t0 = number_or(j, "t0", "geodesic", 0.0);
  s.t1 = number_or(j, "t1", "geodesic", 1.0);
  if (j.contains("steps")) s.steps = integer(j.at("steps"), "geodesic.steps");
  if (s.steps < 2) throw ConfigError("geodesic.steps: must be >= 2");
  if (j.contains("arclength")) {
    if (!j.at("arclength").is_boolean()) throw ConfigError("geodesic.arclength: expected a boolean");
    s.arclength = j.at("arclength").get<bool>();
  }
  return s;
}

void report_curve(Report& r, const Curve& c, const ConnectionField& conn, const MetricField& g, int m) {
  r.scalars["residual"] = geodesic_residual(c, conn);
  r.scalars["speed_drift"] = speed_drift(c, g);
  for (int i = 0; i < m; ++i) r.scalars["endpoint." + coord('a', i)] = c.points.back()[i];
  Series s;
  s.columns = {"t"};
  for (const auto& name : coordinate_columns('a', m)) s.columns.push_back(name);
  for (int i = 0; i < m; ++i) s.columns.push_back("d" + coord('a', i));
  for (int k = 0; k < c.size(); ++k) {
    std::vector<double> row{c.t(k)};
    for (int i = 0; i < m; ++i) row.push_back(c.points[k][i]);
    for (int i = 0; i < m; ++i) row.push_back(c.velocities[k][i]);
    s.rows.push_back(std::move(row));
  }
  r.series["trajectory"] = std::move(s);
}

Report task_geodesic(const Scenario& sc, bool gphi) {
  Report r;
  const GeodesicSpec s = geodesic_spec(sc);
  const ConnectionField conn = gphi ? gphi_connection(sc.g, sc.phi) : levi_civita(sc.g);
  Curve c = integrate_geodesic(conn, s.p0, s.v0, s.t0, s.t1, s.steps);
  if (s.arclength) {
    c = reparametrize_by_arclength(c, sc.g);
    r.diagnostics["reparametrized"] = "arclength";
  }
  report_curve(r, c, conn, sc.g, sc.m);
  r.diagnostics["steps"] = s.steps;
  r.diagnostics["method"] = "rk4";
  return r;
}

EnergySetup energy_setup(const Scenario& sc) { return EnergySetup{sc.require_domain(), sc.phi, sc.g, sc.h, sc.p}; }

Report task_energy(const Scenario& sc) {
  Report r;
  const EnergySetup setup = energy_setup(sc);
  r.scalars["energy"] = energy(setup, sc.require_map());
  r.scalars["volume"] = volume(setup.domain, sc.phi);
  note_domain(r, setup.domain);
  return r;
}

std::vector<Expr> variation_field(const Scenario& sc, const Domain& dom) {
  const Json& j = sc.section("variation");
  const double amp = number_or(j, "amplitude", "variation", 1.0);
  if (!j.contains("v") || j.at("v") == "bump") return std::vector<Expr>(sc.n, bump_variation(dom, amp));
  auto v = exprs_of(j.at("v"), "variation.v", sc.n);
  for (auto& e : v) e = Expr(amp) * e;
  return v;
}

Report task_first_variation(const Scenario& sc) {
  Report r;
  const EnergySetup setup = energy_setup(sc);
  const SmoothMap& f = sc.require_map();
  const auto v = variation_field(sc, setup.domain);
  FirstVariationOptions opt;
  opt.eps = number_or(sc.section("variation"), "epsilon", "variation", opt.eps);
  const double fv = first_variation(setup, f, v, opt);
  r.scalars["first_variation"] = fv;
  if (!sc.g.direction_dependent() && !sc.h.direction_dependent()) {
    const double pairing = electrodynamics_el_pairing(sc.g, sc.phi, sc.h, f, v, setup.domain);
    r.scalars["el_pairing"] = pairing;
    r.scalars["relative_difference"] = std::abs(fv - pairing) / std::max(std::abs(pairing), 1e-300);
  }
  r.diagnostics["epsilon"] = opt.eps;
  note_domain(r, setup.domain);
  return r;
}

Report task_el_residual(const Scenario& sc) {
  Report r;
  const Domain& dom = sc.require_domain();
  const SmoothMap& f = sc.require_map();
  Series s;
  s.columns = coordinate_columns('a', sc.m);
  s.columns.push_back("norm");
  for (const auto& c : coordinate_columns('x', sc.n)) s.columns.push_back("el_" + c);
  double sup = 0.0;
  for (const auto& node : dom.nodes()) {
    const Vector el = at_location([&] { return format_point('a', node.point); },
                                  [&] { return electrodynamics_el_residual(sc.g, sc.phi, sc.h, f, node.point); });
    sup = std::max(sup, el.norm());
    auto row = as_row(node.point);
    row.push_back(el.norm());
    for (int i = 0; i < el.size(); ++i) row.push_back(el[i]);
    s.rows.push_back(std::move(row));
  }
  r.scalars["sup_norm"] = sup;
  r.series["el_residual"] = std::move(s);
  note_domain(r, dom);
  return r;
}

Report task_geodesic_transfer(const Scenario& sc) {
  Report r;
  const Json& j = sc.section("transfer");
  if (!j.contains("samples") || !j.at("samples").is_array() || j.at("samples").empty()) {
    throw ConfigError("transfer.samples: expected a non-empty list of {p0, v0, t0, t1}");
  }
  std::vector<GeodesicSample> samples;
  for (std::size_t k = 0; k < j.at("samples").size(); ++k) {
    const std::string path = "transfer.samples[" + std::to_string(k) + "]";
    const Json& sj = j.at("samples")[k];
    expect_keys(sj, path, {"p0", "v0", "t0", "t1"});
    if (!sj.contains("p0") || !sj.contains("v0")) throw ConfigError(path + ": \"p0\" and \"v0\" are required");
    samples.push_back({vector_of(sj.at("p0"), path + ".p0", sc.m), vector_of(sj.at("v0"), path + ".v0", sc.m),
                       number_or(sj, "t0", path, 0.0), number_or(sj, "t1", path, 1.0)});
  }
  int steps = 1000;
  if (j.contains("steps")) steps = integer(j.at("steps"), "transfer.steps");
  if (steps < 2) throw ConfigError("transfer.steps: must be >= 2");
  const TransferReport tr = geodesic_transfer_check(sc.g, sc.phi, sc.h, sc.require_map(), samples, steps);
  r.scalars["max_image_residual"] = tr.max_image_residual;
  r.scalars["max_el_residual"] = tr.max_el_residual;
  Series s{{"sample", "image_residual", "el_residual"}, {}};
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    s.rows.push_back({static_cast<double>(k), tr.samples[k].image_residual, tr.samples[k].el_residual});
  }
  r.series["samples"] = std::move(s);
  r.diagnostics["steps"] = steps;
  if (sc.tolerances.contains("transfer")) {
    const double tol = tolerance(sc, "transfer", 0.0);
    r.diagnostics["tolerance"] = tol;
    if (tr.max_image_residual > tol || tr.max_el_residual > tol) {
      r.status = "tolerance-failure";
      r.detail = "transfer residuals exceed " + fmt(tol);
    }
  }
  return r;
}

Report task_verify_solution(const Scenario& sc) {
  Report r;
  const Domain& dom = sc.require_domain();
  const SmoothMap& f = sc.require_map();
  const double res = system_residual(f, sc.require_rhs(), dom);
  const double tol = tolerance(sc, "residual", 1e-10);
  r.scalars["system_residual"] = res;
  r.diagnostics["tolerance"] = tol;
  note_domain(r, dom);
  const Json& v = sc.section("verify");
  bool level_set = false;
  if (v.contains("level_set")) {
    if (!v.at("level_set").is_boolean()) throw ConfigError("verify.level_set: expected a boolean");
    level_set = v.at("level_set").get<bool>();
  }
  if (res > tol) {
    r.status = "tolerance-failure";
    r.detail = "system residual " + fmt(res) + " exceeds " + fmt(tol);
  }
  if (level_set) {
    Vector x0(sc.m);
    for (int i = 0; i < sc.m; ++i) x0[i] = 0.5 * (dom.lo(i) + dom.hi(i));
    if (v.contains("point")) x0 = vector_of(v.at("point"), "verify.point", sc.m);
    const double dev = level_set_geodesic_deviation(f, x0);
    const double ltol = tolerance(sc, "level_set", 1e-6);
    r.scalars["level_set_deviation"] = dev;
    r.diagnostics["level_set_tolerance"] = ltol;
    if (dev > ltol && r.status == "ok") {
      r.status = "tolerance-failure";
      r.detail = "level-set deviation " + fmt(dev) + " exceeds " + fmt(ltol);
    }
  }
  return r;
}

Report task_lt(const Scenario& sc) {
  Report r;
  const Domain& dom = sc.require_domain();
  const SmoothMap& f = sc.require_map();
  const RhsTensor& t = sc.require_rhs();
  const LtResult lt = lt_functional(f, t, sc.phi, sc.psi, dom);
  r.scalars["lt"] = lt.value;
  r.scalars["half_vol"] = lt.half_volume;
  r.scalars["gap"] = lt.gap();
  r.scalars["proportionality_residual"] = proportionality_residual(f, t, sc.phi, sc.psi, dom);
  note_domain(r, dom);
  if (sc.psi.riemannian()) {
    const double tol = tolerance(sc, "lower_bound", 1e-8);
    r.diagnostics["lower_bound_tolerance"] = tol;
    if (lt.gap() < -tol) {
      r.status = "tolerance-failure";
      r.detail = "L_T falls below half the volume";
    }
  } else {
    r.diagnostics["lower_bound"] = "not asserted for pseudo-Riemannian psi";
  }
  return r;
}

Report task_field(const Scenario& sc) {
  Report r;
  const Json& fj = sc.section("field");
  if (!fj.contains("points") || !fj.at("points").is_array() || fj.at("points").empty()) {
    throw ConfigError("field.points: expected a non-empty list of {x, y}");
  }
  const ConformalGLSpace space(sc.gamma, sc.sigma, sc.kappa);
  const DConnectionCoefficients conn = DConnectionCoefficients::berwald(space);
  const int n = sc.n;
  Series summary;
  summary.columns = coordinate_columns('x', n);
  for (const auto& c : coordinate_columns('y', n)) summary.columns.push_back(c);
  for (const char* c : {"scalar_curvature", "max_F", "max_f", "max_R1", "max_R2", "max_R3", "max_h_lhs",
                        "max_v_lhs", "max_t"}) {
    summary.columns.push_back(c);
  }
  Series em_h, em_v, h_lhs, v_lhs;
  std::vector<std::string> entry_cols{"point"};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) entry_cols.push_back(std::to_string(i + 1) + std::to_string(j + 1));
  }
  em_h.columns = em_v.columns = h_lhs.columns = v_lhs.columns = entry_cols;
  auto flat = [](double index, const Matrix& m) {
    std::vector<double> row{index};
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    }
    return row;
  };
  std::map<std::string, double> worst;
  const Json& pts = fj.at("points");
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::string path = "field.points[" + std::to_string(k) + "]";
    expect_keys(pts[k], path, {"x", "y"});
    if (!pts[k].contains("x") || !pts[k].contains("y")) throw ConfigError(path + ": \"x\" and \"y\" are required");
    const Vector x = vector_of(pts[k].at("x"), path + ".x", n);
    const Vector y = vector_of(pts[k].at("y"), path + ".y", n);
    auto row = as_row(x);
    for (int i = 0; i < n; ++i) row.push_back(y[i]);
    at_location([&] { return format_point('x', x) + " " + format_point('y', y); }, [&] {
      const EmTensors em = em_tensors(space, x, y);
      const MaxwellResiduals mx = maxwell_residuals(space, conn, x, y);
      const EinsteinEquations ein = einstein_equations(space, conn, x, y);
      const Matrix t = t_tensor(space, conn, x, y);
      const Curvature cv = curvature(sc.gamma, x);
      const std::vector<std::pair<const char*, double>> vals{
          {"scalar_curvature", cv.scalar},
          {"max_F", em.h.cwiseAbs().maxCoeff()},
          {"max_f", em.v.cwiseAbs().maxCoeff()},
          {"max_R1", mx.first.max_abs()},
          {"max_R2", mx.second.max_abs()},
          {"max_R3", mx.third.max_abs()},
          {"max_h_lhs", ein.h_lhs.cwiseAbs().maxCoeff()},
          {"max_v_lhs", ein.v_lhs.cwiseAbs().maxCoeff()},
          {"max_t", t.cwiseAbs().maxCoeff()}};
      for (const auto& [name, v] : vals) {
        row.push_back(v);
        if (std::string(name) != "scalar_curvature") worst[name] = std::max(worst[name], v);
      }
      em_h.rows.push_back(flat(static_cast<double>(k), em.h));
      em_v.rows.push_back(flat(static_cast<double>(k), em.v));
      h_lhs.rows.push_back(flat(static_cast<double>(k), ein.h_lhs));
      v_lhs.rows.push_back(flat(static_cast<double>(k), ein.v_lhs));
      return 0;
    });
    summary.rows.push_back(std::move(row));
  }
  for (const auto& [name, v] : worst) r.scalars[name] = v;
  r.series["points"] = std::move(summary);
  r.series["F"] = std::move(em_h);
  r.series["f"] = std::move(em_v);
  r.series["h_lhs"] = std::move(h_lhs);
  r.series["v_lhs"] = std::move(v_lhs);
  r.diagnostics["connection"] = "L = Christoffel symbols of gamma, C = 0";
  r.diagnostics["kappa"] = sc.kappa;
  return r;
}

Report task_sweep(const Scenario& sc) {
  const Json& sw = sc.section("sweep");
  for (const char* key : {"task", "parameter", "output"}) {
    if (!sw.contains(key) || !sw.at(key).is_string()) {
      throw ConfigError(std::string("sweep.") + key + ": required string");
    }
  }
  const std::string inner = sw.at("task").get<std::string>();
  if (inner == "sweep") throw ConfigError("sweep.task: sweeps cannot nest");
  if (std::find(task_names().begin(), task_names().end(), inner) == task_names().end()) {
    throw ConfigError("sweep.task: unknown task '" + inner + "'");
  }
  const std::string param = sw.at("parameter").get<std::string>();
  const std::string output = sw.at("output").get<std::string>();
  std::vector<double> values;
  if (sw.contains("values")) {
    const Vector v = vector_of(sw.at("values"), "sweep.values", -1);
    values.assign(v.data(), v.data() + v.size());
  } else if (sw.contains("range")) {
    const Json& rj = sw.at("range");
    expect_keys(rj, "sweep.range", {"from", "to", "count"});
    if (!rj.contains("from") || !rj.contains("to") || !rj.contains("count")) {
      throw ConfigError("sweep.range: \"from\", \"to\" and \"count\" are required");
    }
    const double a = number(rj.at("from"), "sweep.range.from");
    const double b = number(rj.at("to"), "sweep.range.to");
    const int count = integer(rj.at("count"), "sweep.range.count");
    if (count < 1) throw ConfigError("sweep.range.count: must be >= 1");
    for (int k = 0; k < count; ++k) values.push_back(count == 1 ? a : a + (b - a) * k / (count - 1));
  } else {
    throw ConfigError("sweep: give \"values\" or \"range\"");
  }
  if (values.empty()) throw ConfigError("sweep.values: must not be empty");

  Report r;
  Series s{{param, output}, {}};
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values) {
    Json copy = sc.raw;
    copy.erase("sweep");
    Json num = v;
    apply_override(copy, param + "=" + num.dump());
    const Report inner_report = run_task(inner, parse_scenario(copy));
    if (inner_report.status != "ok") {
      r.status = inner_report.status;
      r.detail = param + "=" + num.dump() + ": " + inner_report.detail;
    }
    const auto it = inner_report.scalars.find(output);
    if (it == inner_report.scalars.end()) {
      throw ConfigError("sweep.output: task '" + inner + "' reports no scalar '" + output + "'");
    }
    s.rows.push_back({v, it->second});
    lo = std::min(lo, it->second);
    hi = std::max(hi, it->second);
  }
  r.scalars["min"] = lo;
  r.scalars["max"] = hi;
  r.scalars["spread"] = hi - lo;
  r.series["sweep"] = std::move(s);
  r.diagnostics["inner_task"] = inner;
  r.diagnostics["parameter"] = param;
  return r;
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"geodesic",          "gphi-geodesic",   "energy", "first-variation",
                                              "el-residual",       "geodesic-transfer", "verify-solution",
                                              "lt",                "field",           "sweep"};
  return names;
}

Report run_task(const std::string& task, const Scenario& sc) {
  Report r;
  if (task == "geodesic") {
    r = task_geodesic(sc, false);
  } else if (task == "gphi-geodesic") {
    r = task_geodesic(sc, true);
  } else if (task == "energy") {
    r = task_energy(sc);
  } else if (task == "first-variation") {
    r = task_first_variation(sc);
  } else if (task == "el-residual") {
    r = task_el_residual(sc);
  } else if (task == "geodesic-transfer") {
    r = task_geodesic_transfer(sc);
  } else if (task == "verify-solution") {
    r = task_verify_solution(sc);
  } else if (task == "lt") {
    r = task_lt(sc);
  } else if (task == "field") {
    r = task_field(sc);
  } else if (task == "sweep") {
    r = task_sweep(sc);
  } else {
    throw ConfigError("unknown task '" + task + "'");
  }
  r.task = task;
  if (sc.preset) r.diagnostics["preset"] = sc.preset->name;
  return r;
}

}  // namespace glag::cli

// Python module glag._core: the main library operations plus the scenario runner.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "glag/cli.hpp"
#include "glag/connections.hpp"
#include "glag/error.hpp"
#include "glag/field_theory.hpp"
#include "glag/harmonic.hpp"
#include "glag/pde_lagrange.hpp"

namespace py = pybind11;
using namespace glag;

namespace {

Env env_from(const std::map<std::string, double>& values) {
  Env env;
  for (const auto& [k, v] : values) env.bind(k, v);
  return env;
}

Space space_from(const std::string& s) {
  if (s == "source") return Space::Source;
  if (s == "target") return Space::Target;
  throw InvalidArgument("space must be 'source' or 'target'");
}

MetricField metric_from(const std::vector<std::vector<std::string>>& entries, const std::string& space,
                        bool pseudo) {
  return MetricField::from_strings(entries, space_from(space),
                                   pseudo ? Signature::PseudoRiemannian : Signature::Riemannian);
}

py::array_t<double> rank3_array(const Rank3& t) {
  const py::ssize_t d = t.dim();
  py::array_t<double> out({d, d, d});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::array_t<double> rank4_array(const Rank4& t) {
  const py::ssize_t d = t.dim();
  py::array_t<double> out({d, d, d, d});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Harmonic maps between generalized Lagrange spaces";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", numerical.ptr());
  py::register_exception<SingularMetric>(m, "SingularMetric", numerical.ptr());
  py::register_exception<DegenerateDenominator>(m, "DegenerateDenominator", numerical.ptr());

  py::class_<Expr>(m, "Expr")
      .def("eval", [](const Expr& e, const std::map<std::string, double>& env) { return e.eval(env_from(env)); },
           py::arg("env") = std::map<std::string, double>{})
      .def("derivative", [](const Expr& e, const std::string& var) { return derivative(e, var); })
      .def("variables", &Expr::variables)
      .def("__str__", [](const Expr& e) { return to_string(e); })
      .def("__repr__", [](const Expr& e) { return "Expr(" + to_string(e) + ")"; });
  m.def("parse", [](const std::string& s) { return parse(s); }, py::arg("source"));

  m.def("metric_at",
        [](const std::vector<std::vector<std::string>>& entries, const Vector& base, std::optional<Vector> fiber,
           const std::string& space, bool pseudo) {
          return metric_at(metric_from(entries, space, pseudo), base, fiber ? &*fiber : nullptr);
        },
        py::arg("entries"), py::arg("base"), py::arg("fiber") = std::nullopt, py::arg("space") = "source",
        py::arg("pseudo") = false);
  m.def("christoffel",
        [](const std::vector<std::vector<std::string>>& entries, const Vector& base, const std::string& space) {
          return rank3_array(christoffel(metric_from(entries, space, false), base));
        },
        py::arg("entries"), py::arg("base"), py::arg("space") = "source");

  m.def("geodesic",
        [](const std::vector<std::vector<std::string>>& g, const Vector& p0, const Vector& v0, double t0, double t1,
           int steps, std::optional<std::vector<std::vector<std::string>>> phi) {
          const MetricField gm = metric_from(g, "source", false);
          const ConnectionField conn = phi ? gphi_connection(gm, metric_from(*phi, "source", false)) : levi_civita(gm);
          const Curve c = integrate_geodesic(conn, p0, v0, t0, t1, steps);
          Matrix pts(c.size(), c.dim());
          for (int k = 0; k < c.size(); ++k) pts.row(k) = c.points[k].transpose();
          return py::make_tuple(pts, geodesic_residual(c, conn));
        },
        py::arg("g"), py::arg("p0"), py::arg("v0"), py::arg("t0") = 0.0, py::arg("t1") = 1.0, py::arg("steps") = 1000,
        py::arg("phi") = std::nullopt,
        "Integrates a g-geodesic (or (g, phi)-geodesic); returns (points, residual).");

  m.def("energy",
        [](const std::vector<std::string>& map, const std::vector<double>& lo, const std::vector<double>& hi,
           std::optional<std::vector<std::vector<std::string>>> g, std::optional<std::vector<std::vector<std::string>>> phi,
           std::optional<std::vector<std::vector<std::string>>> h, int nodes) {
          const int m = static_cast<int>(lo.size());
          const SmoothMap f = SmoothMap::from_strings(m, map);
          const int n = f.target_dim();
          const Domain dom(lo, hi, {}, {std::nullopt, nodes});
          const MetricField phim = phi ? metric_from(*phi, "source", false) : MetricField::identity(m, Space::Source);
          const MetricField gm = g ? metric_from(*g, "source", false) : phim;
          const MetricField hm = h ? metric_from(*h, "target", false) : MetricField::identity(n, Space::Target);
          return energy({dom, phim, gm, hm, ConnectionTensor(m, n)}, f);
        },
        py::arg("map"), py::arg("lo"), py::arg("hi"), py::arg("g") = std::nullopt, py::arg("phi") = std::nullopt,
        py::arg("h") = std::nullopt, py::arg("nodes") = 32,
        "Energy of a map between base-only (Riemannian) metrics on a coordinate box.");

  py::class_<Preset>(m, "Preset")
      .def_readonly("name", &Preset::name)
      .def_readonly("has_energy_form", &Preset::has_energy_form)
      .def("solution", [](const Preset& p) {
        std::vector<std::string> out;
        for (const auto& c : p.solution.components()) out.push_back(to_string(c));
        return out;
      })
      .def("system_residual", [](const Preset& p) { return system_residual(p.solution, p.system.t, p.domain); })
      .def("lt",
           [](const Preset& p) {
             const LtResult r = lt_functional(p.solution, p.system.t, p.system.phi, p.system.psi, p.domain);
             return py::make_tuple(r.value, r.half_volume);
           },
           "Returns (L_T of the bundled solution, half the volume).")
      .def("energy", [](const Preset& p) {
        if (!p.has_energy_form) throw InvalidArgument("preset '" + p.name + "' has no energy form");
        return energy(p.system.energy_setup(p.domain), p.solution);
      });
  m.def("preset_names", &preset_names);
  m.def("make_preset",
        [](const std::string& name, std::vector<double> v, double w, std::vector<double> v2, double w2, double theta,
           int nodes) { return make_preset(name, {std::move(v), w, std::move(v2), w2, theta, nodes}); },
        py::arg("name"), py::kw_only(), py::arg("v") = std::vector<double>{1.0, 2.0}, py::arg("w") = 0.0,
        py::arg("v2") = std::vector<double>{0.0, 1.0}, py::arg("w2") = 2.0, py::arg("theta") = 0.0,
        py::arg("nodes") = 32);

  py::class_<Curvature>(m, "Curvature")
      .def_property_readonly("riemann", [](const Curvature& c) { return rank4_array(c.riemann); })
      .def_readonly("ricci", &Curvature::ricci)
      .def_readonly("scalar", &Curvature::scalar);
  m.def("curvature",
        [](const std::vector<std::vector<std::string>>& gamma, const Vector& x) {
          return curvature(metric_from(gamma, "target", false), x);
        },
        py::arg("gamma"), py::arg("x"));
  m.def("em_tensors",
        [](const std::vector<std::vector<std::string>>& gamma, const std::string& sigma, const Vector& x,
           const Vector& y) {
          const EmTensors e = em_tensors(ConformalGLSpace(metric_from(gamma, "target", false), parse(sigma)), x, y);
          return py::make_tuple(e.h, e.v);
        },
        py::arg("gamma"), py::arg("sigma"), py::arg("x"), py::arg("y"), "Returns (F, f).");

  m.def("task_names", &cli::task_names);
  m.def("run",
        [](const std::string& task, const std::string& scenario_json, const std::vector<std::string>& overrides) {
          const cli::RunResult r = cli::run(task, scenario_json, overrides);
          return py::make_tuple(r.exit_code, r.report, r.error);
        },
        py::arg("task"), py::arg("scenario_json"), py::arg("overrides") = std::vector<std::string>{},
        "Runs one CLI task on a scenario given as JSON text; returns (exit_code, report_json, error).");
}

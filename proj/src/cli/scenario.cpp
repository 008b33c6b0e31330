#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace glag::cli {

namespace {

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string child(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const UnboundVariable& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

const Json& empty_object() {
  static const Json e = Json::object();
  return e;
}

Signature signature_of(const Json& obj, const std::string& path) {
  if (!obj.contains("signature")) return Signature::Riemannian;
  const Json& s = obj.at("signature");
  if (s == "riemannian") return Signature::Riemannian;
  if (s == "pseudo-riemannian") return Signature::PseudoRiemannian;
  throw ConfigError(child(path, "signature") + ": expected \"riemannian\" or \"pseudo-riemannian\"");
}

ExprMatrix expr_matrix(const Json& j, const std::string& path, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(path + ": expected " + std::to_string(dim) + " rows");
  }
  ExprMatrix m;
  for (std::size_t i = 0; i < j.size(); ++i) m.push_back(exprs_of(j[i], child(path, i), dim));
  return m;
}

MetricField metric_of(const Json& j, const std::string& path, Space space, int dim) {
  return with_path(path, [&] {
    if (j.is_string() && j == "identity") return MetricField::identity(dim, space);
    if (j.is_array()) return MetricField::from_exprs(expr_matrix(j, path, dim), space);
    if (j.is_object()) {
      expect_keys(j, path, {"entries", "diagonal", "signature"});
      const Signature sig = signature_of(j, path);
      if (j.contains("entries") == j.contains("diagonal")) {
        throw ConfigError(path + ": give exactly one of \"entries\" and \"diagonal\"");
      }
      if (j.contains("entries")) {
        return MetricField::from_exprs(expr_matrix(j.at("entries"), child(path, "entries"), dim), space, sig);
      }
      return MetricField::diagonal(exprs_of(j.at("diagonal"), child(path, "diagonal"), dim), space)
          .with_signature(sig);
    }
    throw ConfigError(path + ": expected \"identity\", a matrix, or an object with entries/diagonal");
  });
}

Domain domain_of(const Json& j, const std::string& path, int m, const Domain* fallback) {
  expect_keys(j, path, {"lo", "hi", "periodic", "quadrature"});
  QuadratureSpec spec = fallback ? fallback->quadrature() : QuadratureSpec{};
  if (j.contains("quadrature")) {
    const std::string qp = child(path, "quadrature");
    const Json& q = j.at("quadrature");
    expect_keys(q, qp, {"rule", "nodes"});
    if (q.contains("nodes")) spec.nodes = integer(q.at("nodes"), child(qp, "nodes"));
    if (q.contains("rule")) {
      const Json& r = q.at("rule");
      if (r == "gauss-legendre") {
        spec.rule = QuadratureRule::GaussLegendre;
      } else if (r == "trapezoid") {
        spec.rule = QuadratureRule::Trapezoid;
      } else if (r == "default") {
        spec.rule.reset();
      } else {
        throw ConfigError(child(qp, "rule") + ": expected \"gauss-legendre\", \"trapezoid\" or \"default\"");
      }
    }
  }
  return with_path(path, [&] {
    if (!j.contains("lo") && !j.contains("hi") && !j.contains("periodic") && fallback) {
      std::vector<double> lo, hi;
      std::vector<bool> per;
      for (int i = 0; i < fallback->dim(); ++i) {
        lo.push_back(fallback->lo(i));
        hi.push_back(fallback->hi(i));
        per.push_back(fallback->periodic(i));
      }
      return Domain(lo, hi, per, spec);
    }
    if (!j.contains("lo") || !j.contains("hi")) throw ConfigError(path + ": \"lo\" and \"hi\" are required");
    const Vector lo = vector_of(j.at("lo"), child(path, "lo"), m);
    const Vector hi = vector_of(j.at("hi"), child(path, "hi"), m);
    std::vector<bool> per(m, false);
    if (j.contains("periodic")) {
      const Json& p = j.at("periodic");
      if (!p.is_array() || static_cast<int>(p.size()) != m) {
        throw ConfigError(child(path, "periodic") + ": expected " + std::to_string(m) + " booleans");
      }
      for (int i = 0; i < m; ++i) {
        if (!p[i].is_boolean()) throw ConfigError(child(child(path, "periodic"), i) + ": expected a boolean");
        per[i] = p[i].get<bool>();
      }
    }
    return Domain(std::vector<double>(lo.data(), lo.data() + m), std::vector<double>(hi.data(), hi.data() + m),
                  per, spec);
  });
}

ConnectionTensor connection_of(const Json& j, const std::string& path, int m, int n) {
  expect_keys(j, path, {"b", "y"});
  ConnectionTensor p(m, n);
  for (const char* block : {"b", "y"}) {
    if (!j.contains(block)) continue;
    const std::string bp = child(path, block);
    const Json& list = j.at(block);
    if (!list.is_array()) throw ConfigError(bp + ": expected a list of [upper, lower, target, expr]");
    const int upper_dim = block[0] == 'b' ? m : n;
    for (std::size_t e = 0; e < list.size(); ++e) {
      const std::string ep = child(bp, e);
      const Json& item = list[e];
      if (!item.is_array() || item.size() != 4) throw ConfigError(ep + ": expected [upper, lower, target, expr]");
      const int u = integer(item[0], child(ep, 0));
      const int l = integer(item[1], child(ep, 1));
      const int t = integer(item[2], child(ep, 2));
      if (u < 1 || u > upper_dim || l < 1 || l > m || t < 1 || t > n) {
        throw ConfigError(ep + ": index out of range (indices are 1-based)");
      }
      const Expr ex = expr_of(item[3], child(ep, 3));
      with_path(ep, [&] {
        if (block[0] == 'b') {
          p.set_b(u - 1, l - 1, t - 1, ex);
        } else {
          p.set_y(u - 1, l - 1, t - 1, ex);
        }
        return 0;
      });
    }
  }
  return p;
}

PresetParams preset_params(const Json& j, const std::string& path, int nodes) {
  expect_keys(j, path, {"name", "v", "w", "v2", "w2", "theta"});
  PresetParams pp;
  pp.nodes = nodes;
  auto list = [&](const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    const Json& a = j.at(key);
    if (!a.is_array()) throw ConfigError(child(path, key) + ": expected a list of numbers");
    out.clear();
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(a[i], child(child(path, key), i)));
  };
  list("v", pp.v);
  list("v2", pp.v2);
  pp.w = number_or(j, "w", path, pp.w);
  pp.w2 = number_or(j, "w2", path, pp.w2);
  pp.theta = number_or(j, "theta", path, pp.theta);
  return pp;
}

}  // namespace

// ---------------------------------------------------------------------------
// Accessors

void expect_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError((path.empty() ? "scenario" : path) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(child(path, key) + ": unknown key");
    }
  }
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": expected a finite number");
  return v;
}

int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<int>();
}

Vector vector_of(const Json& j, const std::string& path, int size) {
  if (!j.is_array() || (size >= 0 && static_cast<int>(j.size()) != size)) {
    throw ConfigError(path + ": expected a list of " + std::to_string(size) + " numbers");
  }
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = number(j[i], child(path, i));
  return v;
}

Expr expr_of(const Json& j, const std::string& path) {
  if (j.is_number()) return Expr(number(j, path));
  if (!j.is_string()) throw ConfigError(path + ": expected an expression string or a number");
  return with_path(path, [&] { return parse(j.get<std::string>()); });
}

std::vector<Expr> exprs_of(const Json& j, const std::string& path, int size) {
  if (!j.is_array() || (size >= 0 && static_cast<int>(j.size()) != size)) {
    throw ConfigError(path + ": expected a list of " + std::to_string(size) + " expressions");
  }
  std::vector<Expr> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(expr_of(j[i], child(path, i)));
  return out;
}

double number_or(const Json& obj, const char* key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj.at(key), child(path, key)) : fallback;
}

const Json& Scenario::section(const char* key) const { return raw.contains(key) ? raw.at(key) : empty_object(); }

const Domain& Scenario::require_domain() const {
  if (!domain) throw ConfigError("domain: required by this task");
  return *domain;
}

const SmoothMap& Scenario::require_map() const {
  if (!map) throw ConfigError("map: required by this task");
  return *map;
}

const RhsTensor& Scenario::require_rhs() const {
  if (!rhs) throw ConfigError("rhs: required by this task (or use a preset)");
  return *rhs;
}

// ---------------------------------------------------------------------------
// Scenario

Scenario parse_scenario(const Json& j) {
  expect_keys(j, "", {"task", "description", "dims", "domain", "metrics", "map", "connection_tensor", "rhs",
                      "preset", "sigma", "kappa", "geodesic", "variation", "transfer", "field", "verify",
                      "sweep", "tolerances"});
  if (!j.contains("dims")) throw ConfigError("dims: required");
  const Json& dims = j.at("dims");
  expect_keys(dims, "dims", {"m", "n"});
  if (!dims.contains("m") || !dims.contains("n")) throw ConfigError("dims: both \"m\" and \"n\" are required");
  const int m = integer(dims.at("m"), "dims.m");
  const int n = integer(dims.at("n"), "dims.n");
  if (m < 1 || n < 1) throw ConfigError("dims: m and n must be >= 1");
  if (j.contains("task") && !j.at("task").is_string()) throw ConfigError("task: expected a string");
  if (j.contains("description") && !j.at("description").is_string()) {
    throw ConfigError("description: expected a string");
  }

  Scenario sc{j,
              m,
              n,
              std::nullopt,
              std::nullopt,
              MetricField::identity(m, Space::Source),
              MetricField::identity(n, Space::Target),
              MetricField::identity(m, Space::Source),
              MetricField::identity(n, Space::Target),
              MetricField::identity(n, Space::Target),
              std::nullopt,
              ConnectionTensor(m, n),
              std::nullopt,
              Expr(0.0),
              1.0,
              Json::object()};

  int nodes = 32;
  if (j.contains("domain") && j.at("domain").is_object() && j.at("domain").contains("quadrature")) {
    const Json& q = j.at("domain").at("quadrature");
    if (q.is_object() && q.contains("nodes")) nodes = integer(q.at("nodes"), "domain.quadrature.nodes");
  }
  if (nodes < 1) throw ConfigError("domain.quadrature.nodes: must be >= 1");

  if (j.contains("preset")) {
    const Json& pj = j.at("preset");
    if (!pj.is_object() || !pj.contains("name") || !pj.at("name").is_string()) {
      throw ConfigError("preset: expected an object with a \"name\"");
    }
    const std::string name = pj.at("name").get<std::string>();
    if (std::find(preset_names().begin(), preset_names().end(), name) == preset_names().end()) {
      throw ConfigError("preset.name: unknown preset '" + name + "'");
    }
    Preset p = with_path("preset", [&] { return make_preset(name, preset_params(pj, "preset", nodes)); });
    if (p.system.t.m() != m || p.system.t.n() != n) {
      throw ConfigError("dims: preset '" + name + "' has m=" + std::to_string(p.system.t.m()) +
                        ", n=" + std::to_string(p.system.t.n()));
    }
    sc.phi = p.system.phi;
    sc.psi = p.system.psi;
    sc.g = p.system.g;
    sc.h = p.system.h;
    sc.p = p.system.p;
    sc.rhs = p.system.t;
    sc.map = p.solution;
    sc.domain = p.domain;
    sc.preset = std::move(p);
  }

  if (j.contains("domain")) {
    sc.domain = domain_of(j.at("domain"), "domain", m, sc.domain ? &*sc.domain : nullptr);
    if (sc.domain->dim() != m) throw ConfigError("domain: dimension differs from dims.m");
  }

  if (j.contains("metrics")) {
    const Json& mj = j.at("metrics");
    expect_keys(mj, "metrics", {"phi", "psi", "g", "h", "gamma"});
    // g and h default to the (possibly overridden) phi and psi.
    bool g_given = mj.contains("g");
    bool h_given = mj.contains("h");
    if (mj.contains("phi")) {
      sc.phi = metric_of(mj.at("phi"), "metrics.phi", Space::Source, m);
      if (!g_given && !sc.preset) sc.g = sc.phi;
    }
    if (mj.contains("psi")) {
      sc.psi = metric_of(mj.at("psi"), "metrics.psi", Space::Target, n);
      if (!h_given && !sc.preset) sc.h = sc.psi;
    }
    if (g_given) sc.g = metric_of(mj.at("g"), "metrics.g", Space::Source, m);
    if (h_given) sc.h = metric_of(mj.at("h"), "metrics.h", Space::Target, n);
    if (mj.contains("gamma")) sc.gamma = metric_of(mj.at("gamma"), "metrics.gamma", Space::Target, n);
  }

  if (j.contains("map")) {
    const auto comps = exprs_of(j.at("map"), "map", n);
    sc.map = with_path("map", [&] { return SmoothMap(m, comps); });
  }

  if (j.contains("connection_tensor")) sc.p = connection_of(j.at("connection_tensor"), "connection_tensor", m, n);

  if (j.contains("rhs")) {
    const Json& r = j.at("rhs");
    if (!r.is_array() || static_cast<int>(r.size()) != n) throw ConfigError("rhs: expected n rows of m expressions");
    std::vector<std::vector<Expr>> rows;
    for (int i = 0; i < n; ++i) rows.push_back(exprs_of(r[i], "rhs[" + std::to_string(i) + "]", m));
    sc.rhs = with_path("rhs", [&] { return RhsTensor(m, n, rows); });
  }

  if (j.contains("sigma")) sc.sigma = expr_of(j.at("sigma"), "sigma");
  if (j.contains("kappa")) sc.kappa = number(j.at("kappa"), "kappa");

  if (j.contains("tolerances")) {
    expect_keys(j.at("tolerances"), "tolerances", {"residual", "lower_bound", "transfer", "level_set"});
    for (const auto& [k, v] : j.at("tolerances").items()) number(v, "tolerances." + k);
    sc.tolerances = j.at("tolerances");
  }

  // Task sections are validated here so that typos fail regardless of the task.
  if (j.contains("geodesic")) {
    expect_keys(j.at("geodesic"), "geodesic", {"p0", "v0", "t0", "t1", "steps", "arclength"});
  }
  if (j.contains("variation")) expect_keys(j.at("variation"), "variation", {"v", "amplitude", "epsilon"});
  if (j.contains("transfer")) expect_keys(j.at("transfer"), "transfer", {"samples", "steps"});
  if (j.contains("field")) expect_keys(j.at("field"), "field", {"points"});
  if (j.contains("verify")) expect_keys(j.at("verify"), "verify", {"level_set", "point"});
  if (j.contains("sweep")) {
    expect_keys(j.at("sweep"), "sweep", {"task", "parameter", "values", "range", "output"});
  }
  return sc;
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + assignment + ": expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string seg = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (seg.empty()) throw ConfigError("--set " + key + ": empty path segment");
    const bool index = std::all_of(seg.begin(), seg.end(), [](char c) { return c >= '0' && c <= '9'; });
    Json* next = nullptr;
    if (index && cur->is_array()) {
      const auto i = std::stoul(seg);
      if (i >= cur->size()) throw ConfigError("--set " + key + ": index " + seg + " out of range");
      next = &(*cur)[i];
    } else {
      if (cur->is_null()) *cur = Json::object();
      if (!cur->is_object()) throw ConfigError("--set " + key + ": '" + seg + "' is not inside an object");
      next = &(*cur)[seg];
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    cur = next;
    start = dot + 1;
  }
}

}  // namespace glag::cli

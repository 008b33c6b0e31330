#include "glag/pde_lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "glag/connections.hpp"
#include "glag/error.hpp"

namespace glag {

namespace {

Env source_target_env(const Vector& a, const Vector& x) {
  Env env = coordinate_env(Space::Source, a);
  const auto& xn = coord_names('x', static_cast<int>(x.size()));
  for (int i = 0; i < x.size(); ++i) env.bind(xn[i], x[i]);
  return env;
}

void require_names(const Expr& e, const std::vector<std::pair<char, int>>& allowed, const char* what) {
  for (const auto& v : e.variables()) {
    bool ok = false;
    for (const auto& [prefix, d] : allowed) {
      const auto& names = coord_names(prefix, d);
      ok = ok || std::find(names.begin(), names.end(), v) != names.end();
    }
    if (!ok) throw InvalidArgument(std::string(what) + " references unexpected variable '" + v + "'");
  }
}

Expr var(char prefix, int i) { return Expr::variable(coord(prefix, i)); }

Vector eval_vector(const std::vector<Expr>& v, const Env& env) {
  Vector out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i].eval(env);
  return out;
}

// Source-side metrics scale by form(dir)^2 / |form|^2, target-side ones by the
// reciprocal |form|^2 / form(dir)^2. Either way form(dir) ends up in a
// denominator, so evaluation on the excluded hyperplane is a division by zero
// (DomainError) rather than a silently singular matrix.
enum class Orientation { FormOverNorm, NormOverForm };

ExprMatrix conformal(const MetricField& base, const Expr& form_value, const Expr& norm_sq, Orientation o) {
  const int d = base.dim();
  const Expr sq = form_value * form_value;
  ExprMatrix out(d, std::vector<Expr>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out[i][j] = o == Orientation::FormOverNorm ? base.entry(i, j) / (norm_sq / sq) : norm_sq / sq * base.entry(i, j);
    }
  }
  return out;
}

// base * exp(2 ln(|form(dir)| / |form|)), or with the ratio inverted.
ExprMatrix conformal_exponential(const MetricField& base, const Expr& form_value, const Expr& norm_sq,
                                 Orientation o) {
  const Expr ratio = o == Orientation::FormOverNorm ? abs(form_value) / sqrt(norm_sq) : sqrt(norm_sq) / abs(form_value);
  const Expr factor = exp(Expr(2.0) * log(ratio));
  const int d = base.dim();
  ExprMatrix out(d, std::vector<Expr>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out[i][j] = base.entry(i, j) * factor;
  }
  return out;
}

// form(direction) with the direction given by fibre coordinates of `space`.
Expr on_fiber(const std::vector<Expr>& covector, Space space) {
  Expr s(0.0);
  for (std::size_t i = 0; i < covector.size(); ++i) {
    s = s + covector[i] * var(fiber_prefix(space), static_cast<int>(i));
  }
  return s;
}

MetricField conformal_metric(const MetricField& base, const std::vector<Expr>& covector,
                             const Expr& norm_sq, bool exponential_form) {
  const Space space = base.space();
  const Orientation o = space == Space::Source ? Orientation::FormOverNorm : Orientation::NormOverForm;
  const Expr form_value = on_fiber(covector, space);
  ExprMatrix entries = exponential_form ? conformal_exponential(base, form_value, norm_sq, o)
                                        : conformal(base, form_value, norm_sq, o);
  return MetricField(std::move(entries), space, MetricKind::DirectionDependent, base.signature());
}

void require_base_only(const MetricField& m, const char* what) {
  if (m.direction_dependent()) throw InvalidArgument(std::string(what) + " must be base-only");
}

}  // namespace

// ---------------------------------------------------------------------------
// RhsTensor

RhsTensor::RhsTensor(int m, int n, std::vector<std::vector<Expr>> rows) : m_(m), n_(n), rows_(std::move(rows)) {
  if (m < 1 || n < 1) throw InvalidArgument("system dimensions must be >= 1");
  if (static_cast<int>(rows_.size()) != n) throw InvalidArgument("right-hand side needs n rows");
  for (const auto& row : rows_) {
    if (static_cast<int>(row.size()) != m) throw InvalidArgument("right-hand side rows need m entries");
    for (const auto& e : row) require_names(e, {{'a', m}, {'x', n}}, "right-hand side");
  }
}

Matrix RhsTensor::at(const Vector& a, const Vector& x) const {
  const Env env = source_target_env(a, x);
  Matrix out(n_, m_);
  for (int i = 0; i < n_; ++i) {
    for (int al = 0; al < m_; ++al) out(i, al) = rows_[i][al].eval(env);
  }
  return out;
}

RhsTensor RhsTensor::scaled(const Expr& k) const {
  auto rows = rows_;
  for (auto& row : rows) {
    for (auto& e : row) e = k * e;
  }
  return RhsTensor(m_, n_, std::move(rows));
}

// ---------------------------------------------------------------------------
// Residuals and the L_T functional

namespace {

void check_dims(const SmoothMap& f, const RhsTensor& t) {
  if (f.source_dim() != t.m() || f.target_dim() != t.n()) {
    throw InvalidArgument("map and right-hand side dimensions differ");
  }
}

struct SectionPoint {
  Matrix df;
  Matrix t;
  Matrix phi_inv;
  Matrix psi;
};

SectionPoint section_point(const SmoothMap& f, const RhsTensor& t, const MetricField& phi,
                           const MetricField& psi, const Vector& a) {
  SectionPoint sp;
  const Vector x = f.value(a);
  sp.df = f.differential(a);
  sp.t = t.at(a, x);
  sp.phi_inv = inverse_metric_at(phi, a);
  sp.psi = metric_at(psi, x);
  return sp;
}

void check_metrics(const MetricField& phi, const MetricField& psi, int m, int n) {
  require_base_only(phi, "phi");
  require_base_only(psi, "psi");
  if (phi.dim() != m || psi.dim() != n) throw InvalidArgument("metric dimensions differ from the system");
  if (phi.space() != Space::Source || psi.space() != Space::Target) {
    throw InvalidArgument("phi lives on the source and psi on the target");
  }
}

}  // namespace

double system_residual(const SmoothMap& f, const RhsTensor& t, const Domain& dom) {
  check_dims(f, t);
  if (dom.dim() != t.m()) throw InvalidArgument("domain dimension differs from the system");
  double worst = 0.0;
  for (const auto& node : dom.nodes()) {
    const double r = at_location([&] { return format_point('a', node.point); }, [&] {
      return (f.differential(node.point) - t.at(node.point, f.value(node.point))).cwiseAbs().maxCoeff();
    });
    worst = std::max(worst, r);
  }
  return worst;
}

double section_inner(const Matrix& t, const Matrix& s, const Matrix& phi_inv, const Matrix& psi) {
  // (alpha, beta) entry: T^i_alpha psi_ij S^j_beta
  const Matrix inner = t.transpose() * psi * s;
  return (phi_inv.array() * inner.array()).sum();
}

double section_inner(const RhsTensor& t, const RhsTensor& s, const MetricField& phi,
                     const MetricField& psi, const SmoothMap& f, const Vector& a) {
  check_dims(f, t);
  check_dims(f, s);
  check_metrics(phi, psi, t.m(), t.n());
  const Vector x = f.value(a);
  return section_inner(t.at(a, x), s.at(a, x), inverse_metric_at(phi, a), metric_at(psi, x));
}

LtResult lt_functional(const SmoothMap& f, const RhsTensor& t, const MetricField& phi,
                       const MetricField& psi, const Domain& dom) {
  check_dims(f, t);
  check_metrics(phi, psi, t.m(), t.n());
  if (dom.dim() != t.m()) throw InvalidArgument("domain dimension differs from the system");
  LtResult out;
  out.value = 0.5 * integrate(
                        [&](const Vector& a) {
                          const SectionPoint sp = section_point(f, t, phi, psi, a);
                          const double nn = section_inner(sp.df, sp.df, sp.phi_inv, sp.psi);
                          const double tt = section_inner(sp.t, sp.t, sp.phi_inv, sp.psi);
                          const double dt = section_inner(sp.df, sp.t, sp.phi_inv, sp.psi);
                          if (dt == 0.0 || std::abs(dt) <= 1e-13 * std::sqrt(std::abs(nn * tt))) {
                            throw DegenerateDenominator("<df, T> vanishes");
                          }
                          return nn * tt / (dt * dt);
                        },
                        dom, phi);
  out.half_volume = 0.5 * volume(dom, phi);
  return out;
}

double proportionality_residual(const SmoothMap& f, const RhsTensor& t, const MetricField& phi,
                                const MetricField& psi, const Domain& dom) {
  check_dims(f, t);
  check_metrics(phi, psi, t.m(), t.n());
  double worst = 0.0;
  for (const auto& node : dom.nodes()) {
    const double r = at_location([&] { return format_point('a', node.point); }, [&] {
      const SectionPoint sp = section_point(f, t, phi, psi, node.point);
      const double tt = section_inner(sp.t, sp.t, sp.phi_inv, sp.psi);
      if (tt == 0.0) throw DegenerateDenominator("|T|^2 vanishes");
      const double k = section_inner(sp.df, sp.t, sp.phi_inv, sp.psi) / tt;
      return (sp.df - k * sp.t).cwiseAbs().maxCoeff();
    });
    worst = std::max(worst, r);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Symbolic index gymnastics

std::vector<Expr> lower_index(const MetricField& metric, const std::vector<Expr>& v) {
  require_base_only(metric, "metric");
  const int d = metric.dim();
  if (static_cast<int>(v.size()) != d) throw InvalidArgument("vector dimension differs from the metric");
  std::vector<Expr> out(d, Expr(0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out[i] = out[i] + metric.entry(i, j) * v[j];
  }
  return out;
}

std::vector<Expr> raise_index(const MetricField& metric, const std::vector<Expr>& w) {
  require_base_only(metric, "metric");
  const int d = metric.dim();
  if (static_cast<int>(w.size()) != d) throw InvalidArgument("covector dimension differs from the metric");
  const ExprMatrix inv = symbolic_inverse(metric.entries());
  std::vector<Expr> out(d, Expr(0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out[i] = out[i] + inv[i][j] * w[j];
  }
  return out;
}

Expr symbolic_inner(const MetricField& metric, const std::vector<Expr>& u, const std::vector<Expr>& v,
                    bool inverse) {
  require_base_only(metric, "metric");
  const int d = metric.dim();
  if (static_cast<int>(u.size()) != d || static_cast<int>(v.size()) != d) {
    throw InvalidArgument("vector dimension differs from the metric");
  }
  const ExprMatrix m = inverse ? symbolic_inverse(metric.entries()) : metric.entries();
  Expr s(0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) s = s + m[i][j] * u[i] * v[j];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Generalized Lagrange metrics

MetricField build_orbit_metric(const std::vector<Expr>& xi, const MetricField& psi, bool exponential_form) {
  if (psi.space() != Space::Target) throw InvalidArgument("psi must live on the target");
  if (std::all_of(xi.begin(), xi.end(), [](const Expr& e) { return e.is_zero(); })) {
    throw InvalidArgument("vector field is identically zero");
  }
  for (const auto& e : xi) require_names(e, {{'x', psi.dim()}}, "vector field");
  return conformal_metric(psi, lower_index(psi, xi), symbolic_inner(psi, xi, xi), exponential_form);
}

MetricField build_pfaffian_metric(const std::vector<Expr>& a_form, const MetricField& phi,
                                  bool exponential_form) {
  if (phi.space() != Space::Source) throw InvalidArgument("phi must live on the source");
  for (const auto& e : a_form) require_names(e, {{'a', phi.dim()}}, "1-form");
  return conformal_metric(phi, a_form, symbolic_inner(phi, a_form, a_form, true), exponential_form);
}

// ---------------------------------------------------------------------------
// Systems

GLSystem build_orbit_system(const std::vector<Expr>& xi, const MetricField& psi) {
  const int n = psi.dim();
  if (static_cast<int>(xi.size()) != n) throw InvalidArgument("vector field dimension differs from psi");
  std::vector<std::vector<Expr>> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = {xi[i]};
  ConnectionTensor p(1, n);
  for (int k = 0; k < n; ++k) p.set_y(k, 0, k, Expr(1.0));
  const MetricField phi = MetricField::identity(1, Space::Source);
  return GLSystem{RhsTensor(1, n, std::move(rows)), p, phi, psi, phi, build_orbit_metric(xi, psi)};
}

GLSystem build_pfaffian_system(const std::vector<Expr>& a_form, const MetricField& phi) {
  const int m = phi.dim();
  if (static_cast<int>(a_form.size()) != m) throw InvalidArgument("1-form dimension differs from phi");
  ConnectionTensor p(m, 1);
  for (int c = 0; c < m; ++c) p.set_b(c, c, 0, Expr(1.0));
  const MetricField psi = MetricField::identity(1, Space::Target);
  return GLSystem{RhsTensor(m, 1, {a_form}), p, phi, psi, build_pfaffian_metric(a_form, phi), psi};
}

GLSystem build_pseudolinear_system(const std::vector<Expr>& xi, const std::vector<Expr>& a_form,
                                   const MetricField& phi, const MetricField& psi) {
  const int m = phi.dim();
  const int n = psi.dim();
  if (static_cast<int>(xi.size()) != n || static_cast<int>(a_form.size()) != m) {
    throw InvalidArgument("pseudolinear ingredients have the wrong dimensions");
  }
  for (const auto& e : xi) require_names(e, {{'x', n}}, "vector field");
  std::vector<std::vector<Expr>> rows(n, std::vector<Expr>(m));
  for (int k = 0; k < n; ++k) {
    for (int b = 0; b < m; ++b) rows[k][b] = xi[k] * a_form[b];
  }
  const auto xi_low = lower_index(psi, xi);
  ConnectionTensor p(m, n);
  for (int c = 0; c < m; ++c) {
    for (int i = 0; i < n; ++i) p.set_b(c, c, i, xi_low[i]);
  }
  const MetricField h = psi.scaled(symbolic_inner(psi, xi, xi));
  return GLSystem{RhsTensor(m, n, std::move(rows)), p, phi, psi, build_pfaffian_metric(a_form, phi), h};
}

namespace {

void check_gram(const std::vector<std::vector<Expr>>& family, const MetricField& metric, bool inverse,
                const std::vector<Vector>& samples, const char* what) {
  for (const auto& p : samples) {
    const Env env = coordinate_env(metric.space(), p);
    Matrix m = metric.evaluate_raw(env);
    m = 0.5 * (m + m.transpose());
    if (inverse) m = inverse_symmetric(m);
    for (std::size_t r = 0; r < family.size(); ++r) {
      const Vector u = eval_vector(family[r], env);
      for (std::size_t s = r; s < family.size(); ++s) {
        const double expected = r == s ? 1.0 : 0.0;
        const double got = u.dot(m * eval_vector(family[s], env));
        if (std::abs(got - expected) > 1e-8) {
          throw OrthonormalityViolation(std::string(what) + " " + std::to_string(r + 1) + "," +
                                        std::to_string(s + 1) + " have inner product " +
                                        std::to_string(got) + " at " +
                                        format_point(base_prefix(metric.space()), p));
        }
      }
    }
  }
}

void check_unit(const std::vector<Expr>& v, const MetricField& metric, bool inverse,
                const std::vector<Vector>& samples, const char* what) {
  for (const auto& p : samples) {
    const Env env = coordinate_env(metric.space(), p);
    Matrix m = metric.evaluate_raw(env);
    m = 0.5 * (m + m.transpose());
    if (inverse) m = inverse_symmetric(m);
    const Vector u = eval_vector(v, env);
    const double got = u.dot(m * u);
    if (std::abs(got - 1.0) > 1e-8) {
      throw NotUnit(std::string(what) + " has squared norm " + std::to_string(got) + " at " +
                    format_point(base_prefix(metric.space()), p));
    }
  }
}

}  // namespace

GLSystem build_general_system(const GeneralRecipe& recipe) {
  const int m = recipe.phi.dim();
  const int n = recipe.psi.dim();
  const int t = static_cast<int>(recipe.xis.size());
  check_metrics(recipe.phi, recipe.psi, m, n);
  if (t < 1 || static_cast<int>(recipe.forms.size()) != t) {
    throw InvalidArgument("need the same positive number of vector fields and 1-forms");
  }
  if (t > std::min(m, n)) {
    throw InvalidArgument("family size " + std::to_string(t) + " exceeds min(m, n) = " +
                          std::to_string(std::min(m, n)));
  }
  for (int r = 0; r < t; ++r) {
    if (static_cast<int>(recipe.xis[r].size()) != n || static_cast<int>(recipe.forms[r].size()) != m) {
      throw InvalidArgument("family member " + std::to_string(r + 1) + " has the wrong dimension");
    }
    for (const auto& e : recipe.xis[r]) require_names(e, {{'x', n}}, "vector field");
    for (const auto& e : recipe.forms[r]) require_names(e, {{'a', m}}, "1-form");
  }
  if (recipe.source_samples.dim() != m || recipe.target_samples.dim() != n) {
    throw InvalidArgument("sample boxes have the wrong dimensions");
  }
  const bool covector = recipe.variant == GeneralVariant::UnitCovector;
  if (static_cast<int>(recipe.unit.size()) != (covector ? m : n)) {
    throw InvalidArgument(covector ? "B needs m components" : "X needs n components");
  }
  for (const auto& e : recipe.unit) {
    require_names(e, {{covector ? 'a' : 'x', covector ? m : n}}, covector ? "B" : "X");
  }

  const auto src = recipe.source_samples.halton(16);
  const auto tgt = recipe.target_samples.halton(16);
  if (covector) {
    check_gram(recipe.xis, recipe.psi, false, tgt, "vector fields");
    check_unit(recipe.unit, recipe.phi, true, src, "B");
  } else {
    check_gram(recipe.forms, recipe.phi, true, src, "1-forms");
    check_unit(recipe.unit, recipe.psi, false, tgt, "X");
  }

  std::vector<std::vector<Expr>> rows(n, std::vector<Expr>(m, Expr(0.0)));
  for (int i = 0; i < n; ++i) {
    for (int al = 0; al < m; ++al) {
      for (int r = 0; r < t; ++r) rows[i][al] = rows[i][al] + recipe.xis[r][i] * recipe.forms[r][al];
    }
  }
  RhsTensor rhs(m, n, std::move(rows));

  // Sum of squared norms of the family that is not assumed orthonormal.
  Expr norm_sum(0.0);
  for (int r = 0; r < t; ++r) {
    norm_sum = norm_sum + (covector ? symbolic_inner(recipe.phi, recipe.forms[r], recipe.forms[r], true)
                                    : symbolic_inner(recipe.psi, recipe.xis[r], recipe.xis[r]));
  }

  // |T|^2 must reduce to that sum.
  for (int k = 0; k < 16; ++k) {
    const Env env = source_target_env(src[k], tgt[k]);
    const Matrix tm = rhs.at(src[k], tgt[k]);
    const double tt = section_inner(tm, tm, inverse_metric_at(recipe.phi, src[k]), metric_at(recipe.psi, tgt[k]));
    const double expected = norm_sum.eval(env);
    if (std::abs(tt - expected) > 1e-10 * std::max(1.0, std::abs(expected))) {
      throw OrthonormalityViolation("|T|^2 = " + std::to_string(tt) + " differs from " +
                                    std::to_string(expected) + " at " + format_point('a', src[k]) + " " +
                                    format_point('x', tgt[k]));
    }
  }

  std::vector<std::vector<Expr>> xi_low(t);
  for (int r = 0; r < t; ++r) xi_low[r] = lower_index(recipe.psi, recipe.xis[r]);
  ConnectionTensor p(m, n);
  if (covector) {
    const auto b_up = raise_index(recipe.phi, recipe.unit);
    for (int c = 0; c < m; ++c) {
      for (int be = 0; be < m; ++be) {
        for (int i = 0; i < n; ++i) {
          Expr s(0.0);
          for (int r = 0; r < t; ++r) s = s + xi_low[r][i] * recipe.forms[r][be];
          p.set_b(c, be, i, s * b_up[c]);
        }
      }
    }
    const MetricField g = conformal_metric(recipe.phi, recipe.unit, norm_sum, false);
    return GLSystem{std::move(rhs), p, recipe.phi, recipe.psi, g, recipe.psi};
  }
  for (int k = 0; k < n; ++k) {
    for (int be = 0; be < m; ++be) {
      for (int i = 0; i < n; ++i) {
        Expr s(0.0);
        for (int r = 0; r < t; ++r) s = s + xi_low[r][i] * recipe.forms[r][be];
        p.set_y(k, be, i, s * recipe.unit[k]);
      }
    }
  }
  const MetricField h = conformal_metric(recipe.psi, lower_index(recipe.psi, recipe.unit), norm_sum, false);
  return GLSystem{std::move(rhs), p, recipe.phi, recipe.psi, recipe.phi, h};
}

// ---------------------------------------------------------------------------
// Presets

namespace {

Expr affine(const std::vector<double>& v, double w) {
  Expr s(w);
  for (std::size_t i = 0; i < v.size(); ++i) s = s + Expr(v[i]) * var('a', static_cast<int>(i));
  return s;
}

Domain unit_box(int m, int nodes) {
  return Domain(std::vector<double>(m, 0.0), std::vector<double>(m, 1.0), {}, QuadratureSpec{std::nullopt, nodes});
}

Domain circle(int nodes) {
  return Domain({0.0}, {2.0 * std::numbers::pi}, {true}, QuadratureSpec{std::nullopt, nodes});
}

std::vector<Expr> rotation_field() { return {-var('x', 1), var('x', 0)}; }

SmoothMap unit_circle_orbit() {
  const Expr a = var('a', 0);
  return SmoothMap(1, {cos(a), sin(a)});
}

// A = (a2 + 1, a1), solved by f = a1 a2 + a1.
std::vector<Expr> exact_form() { return {var('a', 1) + Expr(1.0), var('a', 0)}; }
SmoothMap exact_form_potential() { return SmoothMap(2, {var('a', 0) * var('a', 1) + var('a', 0)}); }

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"orbit",       "pfaffian",    "pseudolinear-exp",
                                              "pseudolinear-ratio", "general-4.1", "general-4.2"};
  return names;
}

Preset make_preset(const std::string& name, const PresetParams& params) {
  if (name == "orbit") {
    GLSystem sys = build_orbit_system(rotation_field(), MetricField::identity(2, Space::Target));
    return Preset{name, std::move(sys), true, unit_circle_orbit(), circle(params.nodes)};
  }
  if (name == "pfaffian") {
    GLSystem sys = build_pfaffian_system(exact_form(), MetricField::identity(2, Space::Source));
    return Preset{name, std::move(sys), true, exact_form_potential(), unit_box(2, params.nodes)};
  }
  if (name == "pseudolinear-exp") {
    // d f / d a = x v at x = f(a): xi(x) = x on the line, A = v.
    const int m = static_cast<int>(params.v.size());
    if (m < 1) throw InvalidArgument("pseudolinear-exp needs a non-empty v");
    std::vector<Expr> a_form;
    for (double c : params.v) a_form.emplace_back(c);
    GLSystem sys = build_pseudolinear_system({var('x', 0)}, a_form, MetricField::identity(m, Space::Source),
                                             MetricField::identity(1, Space::Target));
    SmoothMap f(m, {exp(affine(params.v, params.w))});
    return Preset{name, std::move(sys), true, std::move(f), unit_box(m, params.nodes)};
  }
  if (name == "pseudolinear-ratio") {
    // f = (<v,a> + w) / (<v',a> + w') solves d f / d a = (v - f v') / (<v',a> + w').
    const int m = static_cast<int>(params.v.size());
    if (m < 1 || params.v2.size() != params.v.size()) {
      throw InvalidArgument("pseudolinear-ratio needs v and v' of equal, non-zero length");
    }
    // <v',a> + w' is affine, so its extremes over the unit box sit at corners.
    double lo = params.w2;
    for (double c : params.v2) lo += std::min(c, 0.0);
    double hi = params.w2;
    for (double c : params.v2) hi += std::max(c, 0.0);
    if (lo <= 0.0 && hi >= 0.0) throw InvalidArgument("the denominator <v',a> + w' vanishes on the unit box");
    const Expr denom = affine(params.v2, params.w2);
    std::vector<std::vector<Expr>> rows(1, std::vector<Expr>(m));
    for (int al = 0; al < m; ++al) {
      rows[0][al] = (Expr(params.v[al]) - var('x', 0) * Expr(params.v2[al])) / denom;
    }
    // T mixes a and x beyond the xi(x) A(a) pattern, so there is no energy form;
    // g and h are just phi and psi.
    const MetricField phi = MetricField::identity(m, Space::Source);
    const MetricField psi = MetricField::identity(1, Space::Target);
    GLSystem sys{RhsTensor(m, 1, std::move(rows)), ConnectionTensor(m, 1), phi, psi, phi, psi};
    SmoothMap f(m, {affine(params.v, params.w) / denom});
    return Preset{name, std::move(sys), false, std::move(f), unit_box(m, params.nodes)};
  }
  if (name == "general-4.1") {
    GeneralRecipe recipe{{{Expr(1.0)}},
                         {exact_form()},
                         GeneralVariant::UnitCovector,
                         {Expr(std::cos(params.theta)), Expr(std::sin(params.theta))},
                         MetricField::identity(2, Space::Source),
                         MetricField::identity(1, Space::Target),
                         unit_box(2, params.nodes),
                         Domain({0.0}, {2.0})};
    return Preset{name, build_general_system(recipe), true, exact_form_potential(), unit_box(2, params.nodes)};
  }
  if (name == "general-4.2") {
    const auto xi = rotation_field();
    const Expr norm = sqrt(var('x', 0) * var('x', 0) + var('x', 1) * var('x', 1));
    const double c = std::cos(params.theta);
    const double s = std::sin(params.theta);
    // X = rotation by theta of xi / |xi|
    std::vector<Expr> unit{(Expr(c) * xi[0] - Expr(s) * xi[1]) / norm, (Expr(s) * xi[0] + Expr(c) * xi[1]) / norm};
    GeneralRecipe recipe{{xi},
                         {{Expr(1.0)}},
                         GeneralVariant::UnitVector,
                         std::move(unit),
                         MetricField::identity(1, Space::Source),
                         MetricField::identity(2, Space::Target),
                         circle(params.nodes),
                         Domain({0.5, 0.5}, {1.5, 1.5})};
    return Preset{name, build_general_system(recipe), true, unit_circle_orbit(), circle(params.nodes)};
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Level sets

double level_set_geodesic_deviation(const SmoothMap& f, const Vector& x0, double t_max, int steps) {
  if (f.target_dim() != 1) throw InvalidArgument("level sets need a scalar map");
  const int m = f.source_dim();
  if (x0.size() != m) throw InvalidArgument("base point dimension differs from the map");
  const Vector grad = f.differential(x0).row(0).transpose();
  if (grad.norm() == 0.0) throw DegenerateDenominator("gradient vanishes", format_point('a', x0));
  // Columns 1.. of the Householder Q span the orthogonal complement of grad.
  const Matrix q = Eigen::HouseholderQR<Matrix>(grad).householderQ() * Matrix::Identity(m, m);
  std::vector<Vector> dirs;
  for (int j = 1; j < m; ++j) dirs.push_back(q.col(j));
  // Mixed directions as well, to probe more than the coordinate frame.
  for (int j = 1; j + 1 < m; ++j) dirs.push_back((q.col(j) + q.col(j + 1)).normalized());
  const double level = f.value(x0)[0];
  const ConnectionField flat = flat_connection(m);
  double worst = 0.0;
  for (const auto& d : dirs) {
    for (double sign : {1.0, -1.0}) {
      const Curve c = integrate_geodesic(flat, x0, sign * d, 0.0, t_max, steps);
      for (const auto& p : c.points) worst = std::max(worst, std::abs(f.value(p)[0] - level));
    }
  }
  return worst;
}

}  // namespace glag

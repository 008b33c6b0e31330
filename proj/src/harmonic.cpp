#include "glag/harmonic.hpp"

#include <cmath>
#include <numbers>

#include "glag/error.hpp"

namespace glag {

// ---------------------------------------------------------------------------
// ConnectionTensor

ConnectionTensor::ConnectionTensor(int m, int n) : m_(m), n_(n) {
  if (m < 1 || n < 1) throw InvalidArgument("connection tensor dimensions must be >= 1");
}

void ConnectionTensor::check(const Expr& e, int m, int n) {
  const auto& an = coord_names('a', m);
  const auto& xn = coord_names('x', n);
  for (const auto& v : e.variables()) {
    if (std::find(an.begin(), an.end(), v) == an.end() &&
        std::find(xn.begin(), xn.end(), v) == xn.end()) {
      throw InvalidArgument("connection tensor component references '" + v +
                            "'; only a- and x-coordinates are allowed");
    }
  }
}

void ConnectionTensor::set_b(int c, int b, int i, Expr e) {
  check(e, m_, n_);
  if (b_.empty()) b_.assign(static_cast<std::size_t>(m_) * m_ * n_, Expr(0.0));
  b_[(static_cast<std::size_t>(c) * m_ + b) * n_ + i] = std::move(e);
}

void ConnectionTensor::set_y(int k, int b, int i, Expr e) {
  check(e, m_, n_);
  if (y_.empty()) y_.assign(static_cast<std::size_t>(n_) * m_ * n_, Expr(0.0));
  y_[(static_cast<std::size_t>(k) * m_ + b) * n_ + i] = std::move(e);
}

const Expr& ConnectionTensor::b(int c, int b, int i) const {
  static const Expr zero(0.0);
  return b_.empty() ? zero : b_[(static_cast<std::size_t>(c) * m_ + b) * n_ + i];
}

const Expr& ConnectionTensor::y(int k, int b, int i) const {
  static const Expr zero(0.0);
  return y_.empty() ? zero : y_[(static_cast<std::size_t>(k) * m_ + b) * n_ + i];
}

void EnergySetup::validate() const {
  if (phi.dim() != m() || g.dim() != m()) throw InvalidArgument("phi and g must match the domain dimension");
  if (phi.direction_dependent()) throw InvalidArgument("phi must be base-only");
  if (phi.space() != Space::Source || g.space() != Space::Source || h.space() != Space::Target) {
    throw InvalidArgument("g and phi live on the source, h on the target");
  }
  if (p.m() != m() || p.n() != n()) throw InvalidArgument("connection tensor dimensions mismatch");
}

// ---------------------------------------------------------------------------
// Directions and energy

namespace {

Env product_env(const Vector& a, const Vector& x) {
  Env env = coordinate_env(Space::Source, a);
  const auto& xn = coord_names('x', static_cast<int>(x.size()));
  for (int i = 0; i < x.size(); ++i) env.bind(xn[i], x[i]);
  return env;
}

struct PointData {
  Vector x;
  Matrix df;  // n x m
  Matrix phi_inv;
  InducedDirections dirs;
};

PointData point_data(const EnergySetup& setup, const SmoothMap& f, const Vector& a,
                     bool need_directions = true) {
  PointData pd;
  pd.x = f.value(a);
  pd.df = f.differential(a);
  pd.phi_inv = inverse_metric_at(setup.phi, a);
  const int m = setup.m();
  const int n = setup.n();
  // w(b, i) = phi^{ab} f^i_a
  const Matrix w = pd.phi_inv * pd.df.transpose();
  pd.dirs.b = Vector::Zero(m);
  pd.dirs.y = Vector::Zero(n);
  if (need_directions && (setup.p.has_b() || setup.p.has_y())) {
    const Env env = product_env(a, pd.x);
    for (int bi = 0; bi < m; ++bi) {
      for (int i = 0; i < n; ++i) {
        if (w(bi, i) == 0.0) continue;
        if (setup.p.has_b()) {
          for (int c = 0; c < m; ++c) pd.dirs.b[c] += w(bi, i) * setup.p.b(c, bi, i).eval(env);
        }
        if (setup.p.has_y()) {
          for (int k = 0; k < n; ++k) pd.dirs.y[k] += w(bi, i) * setup.p.y(k, bi, i).eval(env);
        }
      }
    }
  }
  return pd;
}

}  // namespace

InducedDirections induced_directions(const EnergySetup& setup, const SmoothMap& f, const Vector& a) {
  setup.validate();
  return point_data(setup, f, a).dirs;
}

double energy_density(const EnergySetup& setup, const SmoothMap& f, const Vector& a) {
  // With base-only metrics P never enters, so it is not even evaluated.
  const bool need = setup.g.direction_dependent() || setup.h.direction_dependent();
  const PointData pd = point_data(setup, f, a, need);
  const Matrix ginv = setup.g.direction_dependent() ? inverse_metric_at(setup.g, a, &pd.dirs.b)
                                                    : inverse_metric_at(setup.g, a);
  const Matrix hm = setup.h.direction_dependent() ? metric_at(setup.h, pd.x, &pd.dirs.y)
                                                  : metric_at(setup.h, pd.x);
  // g^{ab} h_ij f^i_a f^j_b
  return (ginv * pd.df.transpose() * hm * pd.df).trace();
}

double energy(const EnergySetup& setup, const SmoothMap& f) {
  setup.validate();
  if (f.source_dim() != setup.m() || f.target_dim() != setup.n()) {
    throw InvalidArgument("map dimensions do not match the energy setup");
  }
  return 0.5 * integrate([&](const Vector& a) { return energy_density(setup, f, a); }, setup.domain,
                         setup.phi);
}

double first_variation(const EnergySetup& setup, const SmoothMap& f, const std::vector<Expr>& v,
                       const FirstVariationOptions& options) {
  if (static_cast<int>(v.size()) != f.target_dim()) throw InvalidArgument("variation dimension mismatch");
  for (const auto& p : setup.domain.boundary_samples()) {
    const Env env = coordinate_env(Space::Source, p);
    for (const auto& vi : v) {
      if (std::abs(vi.eval(env)) > options.boundary_tol) {
        throw InvalidArgument("variation does not vanish on the boundary at " + format_point('a', p));
      }
    }
  }
  auto central = [&](double eps) {
    return (energy(setup, f.perturbed(v, eps)) - energy(setup, f.perturbed(v, -eps))) / (2.0 * eps);
  };
  const double d1 = central(options.eps);
  if (std::abs(d1) >= options.richardson_threshold) return d1;
  const double d2 = central(0.5 * options.eps);
  return d2 + (d2 - d1) / 3.0;
}

// ---------------------------------------------------------------------------
// Closed-form EL residual

Vector electrodynamics_el_residual(const MetricField& g, const MetricField& phi, const MetricField& h,
                                   const SmoothMap& f, const Vector& a) {
  if (g.direction_dependent() || phi.direction_dependent() || h.direction_dependent()) {
    throw InvalidArgument("the closed-form residual needs base-only g, phi and h");
  }
  const int m = g.dim();
  const int n = h.dim();
  if (f.source_dim() != m || f.target_dim() != n) throw InvalidArgument("map dimensions mismatch");
  const Matrix ginv = inverse_metric_at(g, a);
  const Rank3 delta = induced_connection_delta(g, phi, a);
  const Vector x = f.value(a);
  const Rank3 hc = christoffel(h, x);
  const Matrix df = f.differential(a);
  Vector out(n);
  for (int k = 0; k < n; ++k) {
    const Matrix hess = f.hessian(k, a);
    double s = 0.0;
    for (int al = 0; al < m; ++al) {
      for (int be = 0; be < m; ++be) {
        double term = hess(al, be);
        for (int c = 0; c < m; ++c) term -= delta(c, al, be) * df(k, c);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) term += hc(k, i, j) * df(i, al) * df(j, be);
        }
        s += ginv(al, be) * term;
      }
    }
    out[k] = s;
  }
  return out;
}

double electrodynamics_el_pairing(const MetricField& g, const MetricField& phi, const MetricField& h,
                                  const SmoothMap& f, const std::vector<Expr>& v, const Domain& dom) {
  return -integrate(
      [&](const Vector& a) {
        const Vector el = electrodynamics_el_residual(g, phi, h, f, a);
        const Env env = coordinate_env(Space::Source, a);
        Vector vv(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) vv[static_cast<int>(i)] = v[i].eval(env);
        return el.dot(metric_at(h, f.value(a)) * vv);
      },
      dom, phi);
}

TransferReport geodesic_transfer_check(const MetricField& g, const MetricField& phi,
                                       const MetricField& h, const SmoothMap& f,
                                       const std::vector<GeodesicSample>& samples, int steps) {
  TransferReport report;
  const ConnectionField source = gphi_connection(g, phi);
  const ConnectionField target = levi_civita(h);
  for (const auto& s : samples) {
    const Curve c = integrate_geodesic(source, s.p0, s.v0, s.t0, s.t1, steps);
    Curve image;
    image.t0 = c.t0;
    image.dt = c.dt;
    TransferSampleResult r;
    for (int k = 0; k < c.size(); ++k) {
      image.points.push_back(f.value(c.points[k]));
      image.velocities.push_back(f.differential(c.points[k]) * c.velocities[k]);
      r.el_residual =
          std::max(r.el_residual, electrodynamics_el_residual(g, phi, h, f, c.points[k]).norm());
    }
    r.image_residual = geodesic_residual(image, target);
    report.max_image_residual = std::max(report.max_image_residual, r.image_residual);
    report.max_el_residual = std::max(report.max_el_residual, r.el_residual);
    report.samples.push_back(r);
  }
  return report;
}

Expr bump_variation(const Domain& dom, double amplitude) {
  Expr e(amplitude);
  for (int i = 0; i < dom.dim(); ++i) {
    const Expr a = Expr::variable(coord('a', i));
    if (dom.periodic(i)) {
      e = e * sin(a);
    } else {
      const Expr arg = Expr(std::numbers::pi / (dom.hi(i) - dom.lo(i))) * (a - Expr(dom.lo(i)));
      e = e * pow(sin(arg), Expr(2.0));
    }
  }
  return e;
}

}  // namespace glag

#include "glag/connections.hpp"

#include <cmath>

#include "glag/error.hpp"

namespace glag {

namespace {

void require_base_only(const MetricField& g, const char* what) {
  if (g.direction_dependent()) {
    throw InvalidArgument(std::string(what) + " needs a base-only metric");
  }
}

// Gamma from the metric, its inverse and its first derivatives at one point.
Rank3 christoffel_from(const Matrix& ginv, const std::vector<Matrix>& dg) {
  const int d = static_cast<int>(ginv.rows());
  Rank3 out(d);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) {
          s += ginv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        }
        out(k, i, j) = 0.5 * s;
        out(k, j, i) = 0.5 * s;
      }
    }
  }
  return out;
}

}  // namespace

Rank3 christoffel(const MetricField& g, const Vector& base) {
  require_base_only(g, "christoffel");
  const Env env = coordinate_env(g.space(), base);
  const Matrix ginv = inverse_metric_at(g, base);
  std::vector<Matrix> dg;
  for (int l = 0; l < g.dim(); ++l) dg.push_back(g.base_derivative_at(l, env));
  return christoffel_from(ginv, dg);
}

ExprRank3 symbolic_christoffel(const MetricField& g) {
  require_base_only(g, "symbolic_christoffel");
  const int d = g.dim();
  const ExprMatrix ginv = symbolic_inverse(g.entries());
  ExprRank3 out(d, ExprMatrix(d, std::vector<Expr>(d)));
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        Expr s(0.0);
        for (int l = 0; l < d; ++l) {
          const Expr bracket = g.base_derivative(l, j, i) + g.base_derivative(l, i, j) -
                               g.base_derivative(i, j, l);
          s = s + ginv[k][l] * bracket;
        }
        out[k][i][j] = Expr(0.5) * s;
        out[k][j][i] = out[k][i][j];
      }
    }
  }
  return out;
}

Rank3 induced_connection_delta(const MetricField& g, const MetricField& phi, const Vector& base) {
  require_base_only(g, "induced_connection_delta");
  require_base_only(phi, "induced_connection_delta");
  if (g.dim() != phi.dim()) throw InvalidArgument("g and phi have different dimensions");
  const int d = g.dim();
  const Env env = coordinate_env(Space::Source, base);
  const Matrix gm = metric_at(g, base, nullptr, false);
  const Matrix pm = metric_at(phi, base, nullptr, false);
  // Both determinants must be positive for ln(g / phi) to exist.
  log_det_positive(gm);
  log_det_positive(pm);
  const Matrix ginv = inverse_symmetric(gm);
  const Matrix pinv = inverse_symmetric(pm);
  std::vector<Matrix> dg;
  Vector dlog(d);
  for (int l = 0; l < d; ++l) {
    dg.push_back(g.base_derivative_at(l, env));
    const Matrix dp = phi.base_derivative_at(l, env);
    // d ln det m = tr(m^{-1} dm)
    dlog[l] = (ginv * dg.back()).trace() - (pinv * dp).trace();
  }
  Rank3 delta = christoffel_from(ginv, dg);
  for (int a = 0; a < d; ++a) {
    for (int c = 0; c < d; ++c) delta(c, a, c) += 0.5 * dlog[a];
  }
  return delta;
}

Rank3 symmetrized(const Rank3& t) {
  const int d = t.dim();
  Rank3 out(d);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) out(k, i, j) = 0.5 * (t(k, i, j) + t(k, j, i));
    }
  }
  return out;
}

ConnectionField levi_civita(const MetricField& g) {
  require_base_only(g, "levi_civita");
  return [g](const Vector& p) { return christoffel(g, p); };
}

ConnectionField gphi_connection(const MetricField& g, const MetricField& phi) {
  return [g, phi](const Vector& p) { return induced_connection_delta(g, phi, p); };
}

ConnectionField flat_connection(int d) {
  return [d](const Vector&) { return Rank3(d); };
}

Curve Curve::sample(const std::function<Vector(double)>& position,
                    const std::function<Vector(double)>& velocity, double t0, double t1, int steps) {
  if (steps < 2) throw InvalidArgument("curve needs at least 2 steps");
  Curve c;
  c.t0 = t0;
  c.dt = (t1 - t0) / steps;
  for (int k = 0; k <= steps; ++k) {
    const double t = k == steps ? t1 : t0 + k * c.dt;
    c.points.push_back(position(t));
    c.velocities.push_back(velocity(t));
  }
  return c;
}

namespace {

Vector quadratic_form(const Rank3& conn, const Vector& u, const Vector& v) {
  const int d = conn.dim();
  Vector out = Vector::Zero(d);
  for (int k = 0; k < d; ++k) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) s += conn(k, i, j) * u[i] * v[j];
    }
    out[k] = s;
  }
  return out;
}

template <typename Rhs>
Curve rk4(const Rhs& rhs, const Vector& p0, const Vector& v0, double t0, double t1, int steps,
          bool second_order) {
  if (steps < 2) throw InvalidArgument("integration needs at least 2 steps");
  const int d = static_cast<int>(p0.size());
  Curve c;
  c.t0 = t0;
  c.dt = (t1 - t0) / steps;
  const double h = c.dt;
  // State (position, velocity); for first-order flows the velocity slot is
  // only reported, not integrated.
  Vector y(2 * d);
  y << p0, v0;
  auto f = [&](const Vector& s) {
    Vector out(2 * d);
    const Vector p = s.head(d);
    const Vector v = s.tail(d);
    if (second_order) {
      out << v, -rhs(p, v);
    } else {
      const Vector x = rhs(p, v);
      out << x, Vector::Zero(d);
    }
    return out;
  };
  auto record = [&](const Vector& s, double t) {
    if (!s.allFinite()) throw NonFinite("geodesic state is not finite", "t=" + std::to_string(t));
    c.points.push_back(s.head(d));
    c.velocities.push_back(second_order ? Vector(s.tail(d)) : rhs(s.head(d), s.tail(d)));
  };
  record(y, t0);
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    at_location([&] { return "t=" + std::to_string(t); }, [&] {
      const Vector k1 = f(y);
      const Vector k2 = f(y + 0.5 * h * k1);
      const Vector k3 = f(y + 0.5 * h * k2);
      const Vector k4 = f(y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      record(y, t + h);
    });
  }
  return c;
}

}  // namespace

Curve integrate_geodesic(const ConnectionField& conn, const Vector& p0, const Vector& v0, double t0,
                         double t1, int steps) {
  if (p0.size() != v0.size()) throw InvalidArgument("p0 and v0 differ in dimension");
  return rk4([&](const Vector& p, const Vector& v) { return quadratic_form(conn(p), v, v); }, p0, v0,
             t0, t1, steps, true);
}

Curve integrate_flow(const std::vector<Expr>& xi, const Vector& x0, double t0, double t1, int steps) {
  if (static_cast<int>(xi.size()) != x0.size()) throw InvalidArgument("vector field dimension mismatch");
  auto field = [&](const Vector& p, const Vector&) {
    const Env env = coordinate_env(Space::Target, p);
    Vector out(p.size());
    for (int i = 0; i < p.size(); ++i) out[i] = xi[i].eval(env);
    return out;
  };
  return rk4(field, x0, Vector::Zero(x0.size()), t0, t1, steps, false);
}

double geodesic_residual(const Curve& c, const ConnectionField& conn) {
  if (c.size() < 3) throw InvalidArgument("geodesic residual needs at least 3 samples");
  const double h2 = c.dt * c.dt;
  double sup = 0.0;
  for (int k = 1; k + 1 < c.size(); ++k) {
    const Vector acc = (c.points[k + 1] - 2.0 * c.points[k] + c.points[k - 1]) / h2;
    const Vector r = acc + quadratic_form(conn(c.points[k]), c.velocities[k], c.velocities[k]);
    sup = std::max(sup, r.norm());
  }
  return sup;
}

namespace {

// dL/dy and dL/dx for L = 1/2 h_ij(x, y) y^i y^j.
std::pair<Vector, Vector> lagrangian_gradients(const MetricField& h, const Vector& x, const Vector& y) {
  const int n = h.dim();
  const Env env = coordinate_env(h.space(), x, h.direction_dependent() ? &y : nullptr);
  Matrix hm = h.evaluate_raw(env);
  symmetrize_checked(hm);
  Vector p = hm * y;
  Vector q(n);
  for (int l = 0; l < n; ++l) {
    q[l] = 0.5 * y.dot(h.base_derivative_at(l, env) * y);
    if (h.direction_dependent()) p[l] += 0.5 * y.dot(h.fiber_derivative_at(l, env) * y);
  }
  return {p, q};
}

}  // namespace

double gl_geodesic_residual(const Curve& c, const MetricField& h) {
  if (c.size() < 3) throw InvalidArgument("residual needs at least 3 samples");
  if (c.dim() != h.dim()) throw InvalidArgument("curve and metric dimensions differ");
  std::vector<Vector> p(c.size());
  std::vector<Vector> q(c.size());
  for (int k = 0; k < c.size(); ++k) {
    at_location([&] { return "t=" + std::to_string(c.t(k)) + " " + format_point('x', c.points[k]); },
                [&] { std::tie(p[k], q[k]) = lagrangian_gradients(h, c.points[k], c.velocities[k]); });
  }
  double sup = 0.0;
  for (int k = 1; k + 1 < c.size(); ++k) {
    const Vector r = (p[k + 1] - p[k - 1]) / (2.0 * c.dt) - q[k];
    sup = std::max(sup, r.norm());
  }
  return sup;
}

namespace {

double speed(const MetricField& g, const Vector& p, const Vector& v) {
  return std::sqrt(v.dot(metric_at(g, p) * v));
}

// Cubic Hermite basis on [0, 1].
struct Hermite {
  double h00, h10, h01, h11;
  double d00, d10, d01, d11;  // derivatives w.r.t. tau
  explicit Hermite(double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    h00 = 2 * s3 - 3 * s2 + 1;
    h10 = s3 - 2 * s2 + s;
    h01 = -2 * s3 + 3 * s2;
    h11 = s3 - s2;
    d00 = 6 * s2 - 6 * s;
    d10 = 3 * s2 - 4 * s + 1;
    d01 = -6 * s2 + 6 * s;
    d11 = 3 * s2 - 2 * s;
  }
};

}  // namespace

Curve reparametrize_by_arclength(const Curve& c, const MetricField& g) {
  const int n = c.size();
  if (n < 3) throw InvalidArgument("reparametrization needs at least 3 samples");
  const double h = c.dt;
  std::vector<double> sigma(n);
  for (int k = 0; k < n; ++k) sigma[k] = speed(g, c.points[k], c.velocities[k]);
  // d sigma / dt by differences (one-sided at the ends), used to correct the
  // trapezoid increments to fifth order.
  std::vector<double> dsigma(n);
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      dsigma[k] = (-3 * sigma[0] + 4 * sigma[1] - sigma[2]) / (2 * h);
    } else if (k == n - 1) {
      dsigma[k] = (3 * sigma[n - 1] - 4 * sigma[n - 2] + sigma[n - 3]) / (2 * h);
    } else {
      dsigma[k] = (sigma[k + 1] - sigma[k - 1]) / (2 * h);
    }
  }
  std::vector<double> s(n, 0.0);
  for (int k = 0; k + 1 < n; ++k) {
    s[k + 1] = s[k] + 0.5 * h * (sigma[k] + sigma[k + 1]) + h * h / 12.0 * (dsigma[k] - dsigma[k + 1]);
  }
  const double total = s.back();
  const int intervals = n - 1;
  const double ds = total / intervals;

  Curve out;
  out.t0 = 0.0;
  out.dt = ds;
  int k = 0;
  for (int j = 0; j <= intervals; ++j) {
    const double target = j == intervals ? total : j * ds;
    while (k + 1 < intervals && s[k + 1] < target) ++k;
    // Solve s(t) = target on [t_k, t_{k+1}] with the Hermite cubic of s.
    double tau = (s[k + 1] > s[k]) ? (target - s[k]) / (s[k + 1] - s[k]) : 0.0;
    for (int it = 0; it < 50; ++it) {
      const Hermite b(tau);
      const double val = b.h00 * s[k] + b.h10 * h * sigma[k] + b.h01 * s[k + 1] + b.h11 * h * sigma[k + 1];
      const double der = (b.d00 * s[k] + b.d10 * h * sigma[k] + b.d01 * s[k + 1] + b.d11 * h * sigma[k + 1]);
      if (der <= 0) break;
      const double step = (val - target) / der;
      tau -= step;
      if (std::abs(step) < 1e-15) break;
    }
    tau = std::clamp(tau, 0.0, 1.0);
    const Hermite b(tau);
    const Vector p = b.h00 * c.points[k] + b.h10 * h * c.velocities[k] + b.h01 * c.points[k + 1] +
                     b.h11 * h * c.velocities[k + 1];
    const Vector dp = (b.d00 * c.points[k] + b.d10 * h * c.velocities[k] + b.d01 * c.points[k + 1] +
                       b.d11 * h * c.velocities[k + 1]) /
                      h;
    out.points.push_back(p);
    out.velocities.push_back(dp / speed(g, p, dp));
  }
  return out;
}

double speed_drift(const Curve& c, const MetricField& g) {
  if (c.size() == 0) return 0.0;
  auto sq = [&](int k) { return c.velocities[k].dot(metric_at(g, c.points[k]) * c.velocities[k]); };
  const double e0 = sq(0);
  double drift = 0.0;
  for (int k = 1; k < c.size(); ++k) drift = std::max(drift, std::abs(sq(k) - e0));
  return drift;
}

}  // namespace glag

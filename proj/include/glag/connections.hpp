#pragma once

// Christoffel symbols, the log-determinant-corrected connection induced by a
// pair of metrics, RK4 geodesic integration and discrete geodesic residuals.

#include <functional>
#include <vector>

#include "glag/geometry.hpp"

namespace glag {

/// Symbolic cube indexed [k][i][j].
using ExprRank3 = std::vector<ExprMatrix>;

/// Gamma(k, i, j) = 1/2 g^{kl} (d_i g_lj + d_j g_li - d_l g_ij) for a base-only metric.
Rank3 christoffel(const MetricField& g, const Vector& base);

/// The same symbols as expressions, built from the symbolic inverse of g.
ExprRank3 symbolic_christoffel(const MetricField& g);

/// Delta(c, a, b) = G(c, a, b) + 1/2 d_a ln(det g / det phi) delta^c_b, where G
/// are the Christoffel symbols of g. Not symmetric in (a, b).
Rank3 induced_connection_delta(const MetricField& g, const MetricField& phi, const Vector& base);

/// (T(k, i, j) + T(k, j, i)) / 2
Rank3 symmetrized(const Rank3& t);

/// Connection coefficients as a function of the base point, C(k, i, j).
using ConnectionField = std::function<Rank3(const Vector&)>;

ConnectionField levi_civita(const MetricField& g);
ConnectionField gphi_connection(const MetricField& g, const MetricField& phi);
ConnectionField flat_connection(int d);

/// Uniformly sampled curve t_k = t0 + k dt, k = 0..K.
struct Curve {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Vector> points;
  std::vector<Vector> velocities;

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  double t(int k) const { return t0 + k * dt; }

  /// Samples an analytic curve on [t0, t1] with `steps` intervals.
  static Curve sample(const std::function<Vector(double)>& position,
                      const std::function<Vector(double)>& velocity, double t0, double t1,
                      int steps);
};

/// Classical RK4 on (a, a') for a'' = -C(a)(a', a'). Throws NonFinite if the
/// state leaves the finite range.
Curve integrate_geodesic(const ConnectionField& conn, const Vector& p0, const Vector& v0, double t0,
                         double t1, int steps);

/// RK4 for the first-order flow x' = xi(x) of a vector field on the target.
Curve integrate_flow(const std::vector<Expr>& xi, const Vector& x0, double t0, double t1, int steps);

/// sup over interior samples of |a'' + C(a', a')|, with a'' from central
/// second differences and a' from the stored velocities.
double geodesic_residual(const Curve& c, const ConnectionField& conn);

/// Discrete Euler-Lagrange residual of L = 1/2 h_ij(x, x') x'^i x'^j along the
/// curve: d/dt(dL/dx') - dL/dx at interior samples, sup of the Euclidean norm.
double gl_geodesic_residual(const Curve& c, const MetricField& h);

/// Resamples the curve at uniform g-arclength with unit-speed velocities.
Curve reparametrize_by_arclength(const Curve& c, const MetricField& g);

/// max_k |g(v_k, v_k) - g(v_0, v_0)| along the curve.
double speed_drift(const Curve& c, const MetricField& g);

}  // namespace glag

#pragma once

// The conformal generalized Lagrange space g_ij(x, y) = exp(2 sigma(x, y)) gamma_ij(x):
// nonlinear connection, adapted derivatives, electromagnetic tensors, curvature of
// gamma, Maxwell residuals and the two Einstein equations.

#include <functional>
#include <memory>

#include "glag/geometry.hpp"

namespace glag {

class ConformalGLSpace {
 public:
  /// gamma: base-only Riemannian metric on the target (x variables); sigma:
  /// scalar in x and y; kappa: gravific constant.
  ConformalGLSpace(MetricField gamma, Expr sigma, double kappa = 1.0);

  int dim() const;
  const MetricField& gamma() const;
  const Expr& sigma() const;
  double kappa() const;

  /// Symbolic pieces, all in (x, y).
  const Expr& christoffel(int i, int j, int k) const;  // Gamma^i_jk
  const Expr& nonlinear_connection(int i, int j) const;  // N^i_j
  const Expr& sigma_delta(int i) const;                  // delta sigma / delta x^i
  const Expr& sigma_fiber(int a) const;                  // d sigma / d y^a
  const Expr& fundamental(int i, int j) const;           // exp(2 sigma) gamma_ij
  const Expr& em_h(int i, int j) const;                  // F_ij
  const Expr& em_v(int i, int j) const;                  // f_ij

  /// delta E / delta x^i = dE/dx^i - N^j_i dE/dy^j, evaluated.
  double delta_x(const Expr& field, int i, const Vector& x, const Vector& y) const;

  Env env(const Vector& x, const Vector& y) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

/// h- and v-coefficients L^i_jk(x, y) and C^i_jk(x, y), stored as (i, j, k).
struct DConnectionCoefficients {
  std::function<Rank3(const Vector& x, const Vector& y)> h;
  std::function<Rank3(const Vector& x, const Vector& y)> v;

  /// L = Christoffel symbols of gamma, C = 0.
  static DConnectionCoefficients berwald(const ConformalGLSpace& sp);
};

/// N^i_j = Gamma^i_jk(x) y^k.
Matrix nonlinear_connection(const ConformalGLSpace& sp, const Vector& x, const Vector& y);

double delta_x(const ConformalGLSpace& sp, const Expr& field, int i, const Vector& x, const Vector& y);

struct EmTensors {
  Matrix h;  // F_ij
  Matrix v;  // f_ij
};

EmTensors em_tensors(const ConformalGLSpace& sp, const Vector& x, const Vector& y);

struct Curvature {
  Rank4 riemann;  // r^i_jkl stored as (i, j, k, l)
  Matrix ricci;   // r_ij = r^k_ijk
  double scalar = 0.0;
};

/// r^i_jkl = d_k Gamma^i_jl - d_l Gamma^i_jk + Gamma^i_mk Gamma^m_jl - Gamma^i_ml Gamma^m_jk
/// for a base-only metric. Antisymmetry in (k, l) is exact.
Curvature curvature(const MetricField& gamma, const Vector& x);

struct SigmaTensors {
  double h_norm = 0.0;    // gamma^{kl} delta_k sigma delta_l sigma
  double v_norm = 0.0;    // gamma^{ab} d_a sigma d_b sigma
  double h_trace = 0.0;   // gamma^{ij} sigma_ij
  double v_trace = 0.0;   // gamma^{ab} sigma_ab (vertical)
  Matrix h_tensor;        // sigma_ij
  Matrix v_tensor;        // vertical sigma_ab
};

SigmaTensors sigma_tensors(const ConformalGLSpace& sp, const DConnectionCoefficients& conn,
                           const Vector& x, const Vector& y);

/// The tensor by which the h-Einstein equations differ from those of gamma.
Matrix t_tensor(const ConformalGLSpace& sp, const DConnectionCoefficients& conn, const Vector& x,
                const Vector& y);

struct EinsteinEquations {
  Matrix h_lhs;             // r_ij - 1/2 r gamma_ij + t_ij
  Matrix v_lhs;             // (2 - n)(sigma_ab - sigma gamma_ab), vertical
  Matrix energy_momentum_h; // h_lhs / kappa
  Matrix energy_momentum_v; // v_lhs / kappa
};

EinsteinEquations einstein_equations(const ConformalGLSpace& sp, const DConnectionCoefficients& conn,
                                     const Vector& x, const Vector& y);

struct MaxwellResiduals {
  Rank3 first;   // cyclic F_{ij|k} + cyclic g_ip r^h_qjk d_h sigma y^p y^q
  Rank3 second;  // cyclic F_ij|_k + cyclic f_{ij|k}
  Rank3 third;   // cyclic f_ij|_k
};

MaxwellResiduals maxwell_residuals(const ConformalGLSpace& sp, const DConnectionCoefficients& conn,
                                   const Vector& x, const Vector& y);

}  // namespace glag

#pragma once

// Energy of a map between two generalized Lagrange spaces, the directions b
// and y manufactured by the connection tensor P, first variations, and the
// closed-form Euler-Lagrange residual for base-only (electrodynamics) metrics.

#include <optional>
#include <vector>

#include "glag/connections.hpp"
#include "glag/geometry.hpp"

namespace glag {

/// The (1,2)-tensor linking source and target. Block B holds P^c_{b i}(a, x)
/// (c, b source indices, i target index); block Y holds P^k_{b i}(a, x). An
/// absent block is zero.
class ConnectionTensor {
 public:
  ConnectionTensor(int m, int n);

  int m() const { return m_; }
  int n() const { return n_; }
  bool has_b() const { return !b_.empty(); }
  bool has_y() const { return !y_.empty(); }

  /// Entries of block B, indexed (c, b, i).
  void set_b(int c, int b, int i, Expr e);
  /// Entries of block Y, indexed (k, b, i).
  void set_y(int k, int b, int i, Expr e);
  const Expr& b(int c, int b, int i) const;
  const Expr& y(int k, int b, int i) const;

 private:
  static void check(const Expr& e, int m, int n);

  int m_;
  int n_;
  std::vector<Expr> b_;
  std::vector<Expr> y_;
};

struct EnergySetup {
  Domain domain;
  MetricField phi;  // Riemannian, base-only, on the source
  MetricField g;    // on the source, possibly direction-dependent
  MetricField h;    // on the target, possibly direction-dependent
  ConnectionTensor p;

  int m() const { return domain.dim(); }
  int n() const { return h.dim(); }
  void validate() const;
};

struct InducedDirections {
  Vector b;  // m-vector
  Vector y;  // n-vector
};

/// b^c = phi^{ab} f^i_a P^c_{bi}(a, f(a)), y^k = phi^{ab} f^i_a P^k_{bi}(a, f(a)).
InducedDirections induced_directions(const EnergySetup& setup, const SmoothMap& f, const Vector& a);

/// 1/2 of the integral of g^{ab}(a, b) h_ij(f(a), y) f^i_a f^j_b sqrt(phi).
double energy(const EnergySetup& setup, const SmoothMap& f);

/// Energy density (without the 1/2 and the volume factor) at a single point.
double energy_density(const EnergySetup& setup, const SmoothMap& f, const Vector& a);

struct FirstVariationOptions {
  double eps = 1e-5;
  /// Below this magnitude the ε / ε/2 Richardson combination is returned.
  double richardson_threshold = 1e-7;
  double boundary_tol = 1e-9;
};

/// (E(f + εV) - E(f - εV)) / 2ε. V must vanish on non-periodic faces.
double first_variation(const EnergySetup& setup, const SmoothMap& f, const std::vector<Expr>& v,
                       const FirstVariationOptions& options = {});

/// g^{ab}{f^k_ab - Delta^c_ab f^k_c + H^k_ij f^i_a f^j_b} at `a`, where Delta
/// is the (g, phi) connection and H the Christoffel symbols of h.
Vector electrodynamics_el_residual(const MetricField& g, const MetricField& phi, const MetricField& h,
                                   const SmoothMap& f, const Vector& a);

/// -integral of h_ij(f) EL^i V^j sqrt(phi): the first variation predicted by
/// the closed-form residual.
double electrodynamics_el_pairing(const MetricField& g, const MetricField& phi, const MetricField& h,
                                  const SmoothMap& f, const std::vector<Expr>& v, const Domain& dom);

struct GeodesicSample {
  Vector p0;
  Vector v0;
  double t0 = 0.0;
  double t1 = 1.0;
};

struct TransferSampleResult {
  double image_residual = 0.0;  // h-geodesic residual of f(c)
  double el_residual = 0.0;     // sup |EL| along c
};

struct TransferReport {
  std::vector<TransferSampleResult> samples;
  double max_image_residual = 0.0;
  double max_el_residual = 0.0;
};

/// For each sample, integrates the (g, phi)-geodesic, pushes it through f and
/// measures the h-geodesic residual of the image and the EL residual of f
/// along the curve.
TransferReport geodesic_transfer_check(const MetricField& g, const MetricField& phi,
                                       const MetricField& h, const SmoothMap& f,
                                       const std::vector<GeodesicSample>& samples, int steps = 1000);

/// Tensor-product bump prod sin^2(pi (a - lo) / (hi - lo)) on non-periodic
/// axes and sin(a) on periodic ones, scaled by `amplitude`.
Expr bump_variation(const Domain& dom, double amplitude = 1.0);

}  // namespace glag

#pragma once

// First-order systems df = T(a, f(a)), the L_T functional with its lower
// bound 1/2 Vol, and the generalized Lagrange structures built from T.

#include <optional>
#include <string>
#include <vector>

#include "glag/geometry.hpp"
#include "glag/harmonic.hpp"

namespace glag {

/// Right-hand side T^i_a(a, x) of the system d f^i / d a^a = T^i_a(a, f(a)).
class RhsTensor {
 public:
  /// rows[i][a] = T^i_a
  RhsTensor(int m, int n, std::vector<std::vector<Expr>> rows);

  int m() const { return m_; }
  int n() const { return n_; }
  const Expr& component(int i, int alpha) const { return rows_[i][alpha]; }

  /// n x m matrix at (a, x).
  Matrix at(const Vector& a, const Vector& x) const;
  RhsTensor scaled(const Expr& k) const;

 private:
  int m_;
  int n_;
  std::vector<std::vector<Expr>> rows_;
};

/// sup over quadrature nodes of max |f^i_a - T^i_a(a, f(a))|.
double system_residual(const SmoothMap& f, const RhsTensor& t, const Domain& dom);

/// <T, S> = phi^{ab} psi_ij T^i_a S^j_b for evaluated sections (n x m).
double section_inner(const Matrix& t, const Matrix& s, const Matrix& phi_inv, const Matrix& psi);
/// Same, with T and S evaluated at (a, f(a)) and psi at f(a).
double section_inner(const RhsTensor& t, const RhsTensor& s, const MetricField& phi,
                     const MetricField& psi, const SmoothMap& f, const Vector& a);

struct LtResult {
  double value = 0.0;
  double half_volume = 0.0;
  double gap() const { return value - half_volume; }
};

/// 1/2 integral of |df|^2 |T|^2 / <df, T>^2 sqrt(phi). Throws
/// DegenerateDenominator at the first node where <df, T> vanishes.
LtResult lt_functional(const SmoothMap& f, const RhsTensor& t, const MetricField& phi,
                       const MetricField& psi, const Domain& dom);

/// sup over nodes of max |df - K T| with K = <df, T> / |T|^2 fitted pointwise.
double proportionality_residual(const SmoothMap& f, const RhsTensor& t, const MetricField& phi,
                                const MetricField& psi, const Domain& dom);

/// Index-lowered covector psi_ij v^j (symbolic).
std::vector<Expr> lower_index(const MetricField& metric, const std::vector<Expr>& v);
/// Index-raised vector metric^{ij} w_j, using the symbolic inverse.
std::vector<Expr> raise_index(const MetricField& metric, const std::vector<Expr>& w);
/// metric_ij u^i v^j, or with the inverse metric when `inverse` is set.
Expr symbolic_inner(const MetricField& metric, const std::vector<Expr>& u, const std::vector<Expr>& v,
                    bool inverse = false);

/// h_ij(x, y) = |xi|^2_psi / [xi^b(y)]^2 psi_ij(x), undefined where xi^b(y) = 0.
/// `exponential_form` builds psi exp(2 ln(|xi| / |xi^b(y)|)) instead.
MetricField build_orbit_metric(const std::vector<Expr>& xi, const MetricField& psi,
                               bool exponential_form = false);
/// g_ab(a, b) = [A(b)]^2 / |A|^2_phi phi_ab(a), undefined where A(b) = 0.
MetricField build_pfaffian_metric(const std::vector<Expr>& a_form, const MetricField& phi,
                                  bool exponential_form = false);

/// System of first-order PDEs with the generalized Lagrange structure that
/// turns L_T into an energy.
struct GLSystem {
  RhsTensor t;
  ConnectionTensor p;
  MetricField phi;  // source, Riemannian
  MetricField psi;  // target, Riemannian (or pseudo-Riemannian)
  MetricField g;    // source generalized Lagrange metric
  MetricField h;    // target generalized Lagrange metric

  EnergySetup energy_setup(const Domain& dom) const { return {dom, phi, g, h, p}; }
};

/// Orbits x' = xi(x) of a vector field on the target (source is an interval).
GLSystem build_orbit_system(const std::vector<Expr>& xi, const MetricField& psi);
/// df = A for a scalar f on the source.
GLSystem build_pfaffian_system(const std::vector<Expr>& a_form, const MetricField& phi);
/// T^k_b = xi^k(x) A_b(a), with P^c_{bi} = delta^c_b xi_i, h = |xi|^2 psi and
/// g the Pfaffian metric of A.
GLSystem build_pseudolinear_system(const std::vector<Expr>& xi, const std::vector<Expr>& a_form,
                                   const MetricField& phi, const MetricField& psi);

enum class GeneralVariant { UnitCovector, UnitVector };

struct GeneralRecipe {
  std::vector<std::vector<Expr>> xis;    // t vector fields on the target (n components each)
  std::vector<std::vector<Expr>> forms;  // t 1-forms on the source (m components each)
  GeneralVariant variant = GeneralVariant::UnitCovector;
  std::vector<Expr> unit;                // B (m components) or X (n components)
  MetricField phi;
  MetricField psi;
  Domain source_samples;                 // where source-side assumptions are sampled
  Domain target_samples;                 // where target-side assumptions are sampled
};

/// T^i_a = sum_r xi_r^i A^r_a. UnitCovector: xi_r orthonormal, unit B, the
/// metric lives on the source. UnitVector: A^r orthonormal, unit X, the metric
/// lives on the target. Assumptions and the |T|^2 identity are checked at 16
/// Halton points (tolerances 1e-8 and 1e-10).
GLSystem build_general_system(const GeneralRecipe& recipe);

/// A bundled closed-form example: the system, a known solution and a domain.
struct Preset {
  std::string name;
  GLSystem system;
  /// False when only T is meaningful (no energy-form structure).
  bool has_energy_form = true;
  SmoothMap solution;
  Domain domain;
};

struct PresetParams {
  std::vector<double> v{1.0, 2.0};
  double w = 0.0;
  std::vector<double> v2{0.0, 1.0};
  double w2 = 2.0;
  double theta = 0.0;
  int nodes = 32;
};

/// Names: orbit, pfaffian, pseudolinear-exp, pseudolinear-ratio, general-4.1,
/// general-4.2.
Preset make_preset(const std::string& name, const PresetParams& params = {});
const std::vector<std::string>& preset_names();

/// For a scalar map on flat R^m: integrates straight geodesics from x0 along
/// every direction tangent to the level set of f and returns
/// max |f(x(t)) - f(x0)| over |t| <= t_max.
double level_set_geodesic_deviation(const SmoothMap& f, const Vector& x0, double t_max = 0.1,
                                    int steps = 100);

}  // namespace glag

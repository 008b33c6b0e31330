#pragma once

// Metric fields, smooth maps, Lagrangians, coordinate-box domains and
// tensor-product quadrature.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glag/expr.hpp"
#include "glag/tensor.hpp"

namespace glag {

/// Which manifold a field lives on. Source fields use base coordinates a_k and
/// fibre coordinates b_k; target fields use x_k and y_k.
enum class Space { Source, Target };

char base_prefix(Space s);
char fiber_prefix(Space s);

using ExprMatrix = std::vector<std::vector<Expr>>;

/// Names of the d coordinates with the given prefix ("a1", "a2", ...).
const std::vector<std::string>& coord_names(char prefix, int d);

/// Env binding base (and optionally fibre) coordinates of `space`.
Env coordinate_env(Space space, const Vector& base, const Vector* fiber = nullptr);

/// "(a1=0.5, a2=1)"
std::string format_point(char prefix, const Vector& p);

enum class MetricKind { BaseOnly, DirectionDependent };
enum class Signature { Riemannian, PseudoRiemannian };

/// Symmetric-matrix-valued field g_ij(base) or g_ij(base, fibre). Holds the
/// entry expressions and their first partial derivatives in every coordinate.
/// Cheap to copy.
class MetricField {
 public:
  MetricField(ExprMatrix entries, Space space, MetricKind kind,
              Signature signature = Signature::Riemannian);

  static MetricField identity(int d, Space space);
  static MetricField diagonal(const std::vector<Expr>& diag, Space space);
  /// Kind is DirectionDependent iff some entry references a fibre coordinate.
  static MetricField from_exprs(ExprMatrix entries, Space space,
                                Signature signature = Signature::Riemannian);
  static MetricField from_strings(const std::vector<std::vector<std::string>>& entries, Space space,
                                  Signature signature = Signature::Riemannian);

  int dim() const;
  Space space() const;
  MetricKind kind() const;
  bool direction_dependent() const { return kind() == MetricKind::DirectionDependent; }
  Signature signature() const;
  bool riemannian() const { return signature() == Signature::Riemannian; }

  const Expr& entry(int i, int j) const;
  const ExprMatrix& entries() const;
  /// d g_ij / d base^l
  const Expr& base_derivative(int i, int j, int l) const;
  /// d g_ij / d fibre^l (zero expressions for base-only fields)
  const Expr& fiber_derivative(int i, int j, int l) const;

  /// Entry matrix evaluated in `env`, unsymmetrized and unchecked.
  Matrix evaluate_raw(const Env& env) const;
  /// Matrix of d g / d base^l evaluated in `env`.
  Matrix base_derivative_at(int l, const Env& env) const;
  Matrix fiber_derivative_at(int l, const Env& env) const;

  MetricField scaled(const Expr& factor) const;
  MetricField with_signature(Signature s) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

/// Evaluated, symmetrized metric. `fiber` must be supplied iff the field is
/// direction-dependent. Positive definiteness is checked when `check_pd` is
/// set, which defaults to the field's Riemannian flag.
Matrix metric_at(const MetricField& g, const Vector& base, const Vector* fiber = nullptr,
                 std::optional<bool> check_pd = std::nullopt);
Matrix inverse_metric_at(const MetricField& g, const Vector& base, const Vector* fiber = nullptr);

/// Symmetrizes `m` in place, asserting the asymmetry was at most 1e-12
/// (relative to the entry scale).
void symmetrize_checked(Matrix& m);
/// Inverse of a symmetric matrix; SingularMetric when the condition estimate
/// exceeds 1e12.
Matrix inverse_symmetric(const Matrix& m);
/// log det of a positive-definite matrix; SingularMetric if det <= 0.
double log_det_positive(const Matrix& m);

/// f : M -> N given componentwise in source base coordinates.
class SmoothMap {
 public:
  SmoothMap(int source_dim, std::vector<Expr> components);
  static SmoothMap from_strings(int source_dim, const std::vector<std::string>& components);
  /// f^i(a) = sum_alpha C(i, alpha) a^alpha + offset(i)
  static SmoothMap linear(const Matrix& c, const Vector& offset = {});
  static SmoothMap identity(int m);

  int source_dim() const;
  int target_dim() const;
  const Expr& component(int i) const;
  const std::vector<Expr>& components() const;
  const Expr& first_derivative(int i, int alpha) const;
  const Expr& second_derivative(int i, int alpha, int beta) const;

  Vector value(const Vector& a) const;
  /// n x m matrix with entry (i, alpha) = d f^i / d a^alpha.
  Matrix differential(const Vector& a) const;
  /// Hessian of component k, m x m.
  Matrix hessian(int k, const Vector& a) const;

  /// f + eps * v, componentwise.
  SmoothMap perturbed(const std::vector<Expr>& v, double eps) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

Matrix map_differential(const SmoothMap& f, const Vector& a);

/// Scalar Lagrangian L(base, fibre) on the tangent bundle of `space`.
class Lagrangian {
 public:
  Lagrangian(int dim, Expr l, Space space = Space::Source);

  int dim() const;
  Space space() const;
  const Expr& expr() const;
  const Expr& fiber_hessian_entry(int i, int j) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

/// Fibre Hessian of L, halved unless `raw_hessian` is set.
Matrix fundamental_tensor(const Lagrangian& l, const Vector& base, const Vector& fiber,
                          bool raw_hessian = false);

enum class QuadratureRule { Trapezoid, GaussLegendre };

struct QuadratureSpec {
  /// Unset: Gauss-Legendre on non-periodic axes, trapezoid on periodic axes.
  std::optional<QuadratureRule> rule;
  int nodes = 32;
};

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [lo, hi].
Rule1D gauss_legendre(int n, double lo, double hi);
/// Trapezoid rule with n nodes. On a periodic axis the endpoint is dropped and
/// every node gets weight (hi - lo) / n.
Rule1D trapezoid(int n, double lo, double hi, bool periodic);

struct QuadratureNode {
  Vector point;
  double weight;
};

/// Coordinate box standing in for a compact source manifold, optionally
/// periodic per axis.
class Domain {
 public:
  Domain(std::vector<double> lo, std::vector<double> hi, std::vector<bool> periodic = {},
         QuadratureSpec quadrature = {});

  int dim() const;
  double lo(int axis) const;
  double hi(int axis) const;
  bool periodic(int axis) const;
  const QuadratureSpec& quadrature() const;
  QuadratureRule rule(int axis) const;

  /// Tensor-product nodes in a fixed (lexicographic) order.
  const std::vector<QuadratureNode>& nodes() const;

  Domain with_nodes(int n) const;
  Domain with_rule(std::optional<QuadratureRule> rule) const;

  bool contains(const Vector& p, double tol = 0.0) const;
  /// Quadrature nodes projected onto every non-periodic face.
  std::vector<Vector> boundary_samples() const;
  /// Points on the lo/hi faces of each periodic axis, paired.
  std::vector<std::pair<Vector, Vector>> periodic_pairs() const;
  /// First `count` points of the Halton sequence scaled into the box.
  std::vector<Vector> halton(int count) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

using ScalarField = std::function<double(const Vector&)>;

/// Compensated sum with a fixed accumulation order.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Integral of s * sqrt(det(measure)) over the box. Numerical errors raised
/// inside carry the offending node as their location.
double integrate(const ScalarField& s, const Domain& dom, const MetricField& measure);
double integrate(const Expr& s, const Domain& dom, const MetricField& measure);
/// Vol of the box under `measure`.
double volume(const Domain& dom, const MetricField& measure);

/// Whether `field` takes equal values (to `tol`) on paired periodic faces.
bool periodic_consistent(const Domain& dom, const ScalarField& field, double tol = 1e-9);

/// Symbolic determinant and adjugate by cofactor expansion (small d only).
Expr symbolic_det(const ExprMatrix& m);
ExprMatrix symbolic_adjugate(const ExprMatrix& m);
/// Entrywise adj(m) / det(m).
ExprMatrix symbolic_inverse(const ExprMatrix& m);

}  // namespace glag

#include <cmath>
#include <numbers>

#include "glag/error.hpp"
#include "glag/geometry.hpp"

namespace glag {

Rule1D gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs n >= 1");
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  // Newton iteration on P_n from the Chebyshev-like initial guess; roots are
  // symmetric, so only the upper half is solved.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  if (n == 1) {
    rule.nodes[0] = mid;
    rule.weights[0] = hi - lo;
  }
  return rule;
}

Rule1D trapezoid(int n, double lo, double hi, bool periodic) {
  if (n < 2) throw InvalidArgument("trapezoid rule needs n >= 2");
  Rule1D rule;
  if (periodic) {
    const double h = (hi - lo) / n;
    for (int k = 0; k < n; ++k) {
      rule.nodes.push_back(lo + k * h);
      rule.weights.push_back(h);
    }
  } else {
    const double h = (hi - lo) / (n - 1);
    for (int k = 0; k < n; ++k) {
      rule.nodes.push_back(k == n - 1 ? hi : lo + k * h);
      rule.weights.push_back((k == 0 || k == n - 1) ? 0.5 * h : h);
    }
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Domain

struct Domain::Data {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<bool> periodic;
  QuadratureSpec quadrature;
  std::vector<QuadratureNode> nodes;
};

Domain::Domain(std::vector<double> lo, std::vector<double> hi, std::vector<bool> periodic,
               QuadratureSpec quadrature) {
  if (lo.empty() || lo.size() != hi.size()) throw InvalidArgument("domain bounds mismatch");
  if (periodic.empty()) periodic.assign(lo.size(), false);
  if (periodic.size() != lo.size()) throw InvalidArgument("periodic flags mismatch dimension");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw InvalidArgument("domain axis " + std::to_string(i + 1) + " has lo >= hi");
  }
  if (quadrature.nodes < 2) throw InvalidArgument("quadrature needs at least 2 nodes per axis");
  auto data = std::make_shared<Data>();
  data->lo = std::move(lo);
  data->hi = std::move(hi);
  data->periodic = std::move(periodic);
  data->quadrature = quadrature;

  const int d = static_cast<int>(data->lo.size());
  std::vector<Rule1D> rules;
  for (int i = 0; i < d; ++i) {
    const QuadratureRule r = quadrature.rule.value_or(data->periodic[i] ? QuadratureRule::Trapezoid
                                                                        : QuadratureRule::GaussLegendre);
    rules.push_back(r == QuadratureRule::GaussLegendre
                        ? gauss_legendre(quadrature.nodes, data->lo[i], data->hi[i])
                        : trapezoid(quadrature.nodes, data->lo[i], data->hi[i], data->periodic[i]));
  }
  std::vector<int> idx(d, 0);
  for (;;) {
    QuadratureNode node{Vector(d), 1.0};
    for (int i = 0; i < d; ++i) {
      node.point[i] = rules[i].nodes[idx[i]];
      node.weight *= rules[i].weights[idx[i]];
    }
    data->nodes.push_back(std::move(node));
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == static_cast<int>(rules[axis].nodes.size())) {
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  data_ = std::move(data);
}

int Domain::dim() const { return static_cast<int>(data_->lo.size()); }
double Domain::lo(int axis) const { return data_->lo[axis]; }
double Domain::hi(int axis) const { return data_->hi[axis]; }
bool Domain::periodic(int axis) const { return data_->periodic[axis]; }
const QuadratureSpec& Domain::quadrature() const { return data_->quadrature; }
QuadratureRule Domain::rule(int axis) const {
  return data_->quadrature.rule.value_or(periodic(axis) ? QuadratureRule::Trapezoid
                                                        : QuadratureRule::GaussLegendre);
}
const std::vector<QuadratureNode>& Domain::nodes() const { return data_->nodes; }

Domain Domain::with_nodes(int n) const {
  QuadratureSpec q = data_->quadrature;
  q.nodes = n;
  return Domain(data_->lo, data_->hi, data_->periodic, q);
}

Domain Domain::with_rule(std::optional<QuadratureRule> rule) const {
  QuadratureSpec q = data_->quadrature;
  q.rule = rule;
  return Domain(data_->lo, data_->hi, data_->periodic, q);
}

bool Domain::contains(const Vector& p, double tol) const {
  if (p.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (p[i] < lo(i) - tol || p[i] > hi(i) + tol) return false;
  }
  return true;
}

std::vector<Vector> Domain::boundary_samples() const {
  std::vector<Vector> out;
  for (int axis = 0; axis < dim(); ++axis) {
    if (periodic(axis)) continue;
    for (const auto& node : nodes()) {
      for (double face : {lo(axis), hi(axis)}) {
        Vector p = node.point;
        p[axis] = face;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::vector<std::pair<Vector, Vector>> Domain::periodic_pairs() const {
  std::vector<std::pair<Vector, Vector>> out;
  for (int axis = 0; axis < dim(); ++axis) {
    if (!periodic(axis)) continue;
    for (const auto& node : nodes()) {
      Vector a = node.point;
      Vector b = node.point;
      a[axis] = lo(axis);
      b[axis] = hi(axis);
      out.emplace_back(std::move(a), std::move(b));
    }
  }
  return out;
}

std::vector<Vector> Domain::halton(int count) const {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (dim() > static_cast<int>(std::size(kPrimes))) throw InvalidArgument("Halton: dimension too large");
  std::vector<Vector> out;
  for (int k = 1; k <= count; ++k) {
    Vector p(dim());
    for (int i = 0; i < dim(); ++i) {
      double f = 1.0;
      double r = 0.0;
      int idx = k;
      while (idx > 0) {
        f /= kPrimes[i];
        r += f * (idx % kPrimes[i]);
        idx /= kPrimes[i];
      }
      p[i] = lo(i) + r * (hi(i) - lo(i));
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integration

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

double integrate(const ScalarField& s, const Domain& dom, const MetricField& measure) {
  if (measure.direction_dependent()) throw InvalidArgument("integration measure must be base-only");
  if (measure.dim() != dom.dim()) throw InvalidArgument("measure dimension does not match domain");
  CompensatedSum sum;
  for (const auto& node : dom.nodes()) {
    const double term = at_location([&] { return format_point('a', node.point); }, [&] {
      const Matrix phi = metric_at(measure, node.point, nullptr, false);
      const double det = phi.determinant();
      if (!(det > 0)) throw SingularMetric("volume density det <= 0");
      return s(node.point) * std::sqrt(det);
    });
    sum.add(node.weight * term);
  }
  return sum.value();
}

double integrate(const Expr& s, const Domain& dom, const MetricField& measure) {
  return integrate([&](const Vector& a) { return s.eval(coordinate_env(Space::Source, a)); }, dom,
                   measure);
}

double volume(const Domain& dom, const MetricField& measure) {
  return integrate([](const Vector&) { return 1.0; }, dom, measure);
}

bool periodic_consistent(const Domain& dom, const ScalarField& field, double tol) {
  for (const auto& [a, b] : dom.periodic_pairs()) {
    if (std::abs(field(a) - field(b)) > tol) return false;
  }
  return true;
}

}  // namespace glag

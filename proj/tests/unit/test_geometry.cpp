#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "glag/error.hpp"
#include "glag/geometry.hpp"
#include "glag/pde_lagrange.hpp"

using namespace glag;
using std::numbers::pi;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

MetricField polar() { return MetricField::from_strings({{"1", "0"}, {"0", "a1^2"}}, Space::Source); }

}  // namespace

TEST_CASE("metric_at examples") {
  const MetricField flat = MetricField::identity(2, Space::Source);
  CHECK(metric_at(flat, vec({0.3, -2.0})).isApprox(Matrix::Identity(2, 2)));

  const Matrix p = metric_at(polar(), vec({3.0, 0.0}));
  CHECK(p(0, 0) == 1.0);
  CHECK(p(1, 1) == 9.0);
  CHECK(p(0, 1) == 0.0);

  const MetricField pf = build_pfaffian_metric({Expr(1.0), Expr(0.0)}, flat);
  CHECK(pf.direction_dependent());
  const Vector b = vec({2.0, 0.0});
  const Matrix g = metric_at(pf, vec({0.5, 0.5}), &b);
  CHECK((g - 4.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("metric_at enforces fibre presence, symmetry and definiteness") {
  const MetricField pf = build_pfaffian_metric({Expr(1.0), Expr(0.0)}, MetricField::identity(2, Space::Source));
  CHECK_THROWS_AS(metric_at(pf, vec({0.5, 0.5})), InvalidArgument);

  const MetricField skew = MetricField::from_strings({{"1", "a1"}, {"0", "1"}}, Space::Source);
  CHECK_THROWS(metric_at(skew, vec({0.5, 0.0})));

  const MetricField indefinite = MetricField::from_strings({{"1", "0"}, {"0", "-1"}}, Space::Source);
  CHECK_THROWS_AS(metric_at(indefinite, vec({0.0, 0.0})), SingularMetric);
  const MetricField lorentz = indefinite.with_signature(Signature::PseudoRiemannian);
  CHECK(metric_at(lorentz, vec({0.0, 0.0}))(1, 1) == -1.0);
}

TEST_CASE("metric_at output is symmetric and definite at random points") {
  const MetricField g = MetricField::from_strings(
      {{"2 + sin(a1)", "0.3*cos(a1*a2)"}, {"0.3*cos(a2*a1)", "2 + a2^2"}}, Space::Source);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const Matrix m = metric_at(g, vec({u(rng), u(rng)}));
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(m.llt().info() == Eigen::Success);
  }
}

TEST_CASE("inverse_metric_at") {
  const MetricField flat = MetricField::identity(2, Space::Source);
  CHECK(inverse_metric_at(flat, vec({1.0, 1.0})).isApprox(Matrix::Identity(2, 2)));
  const MetricField four = MetricField::diagonal({Expr(4.0), Expr(4.0)}, Space::Source);
  CHECK(inverse_metric_at(four, vec({0.0, 0.0}))(0, 0) == 0.25);

  std::mt19937 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix r(3, 3);
    for (int i = 0; i < 9; ++i) r(i) = n(rng);
    const Matrix spd = r * r.transpose() + 0.5 * Matrix::Identity(3, 3);
    ExprMatrix entries(3, std::vector<Expr>(3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) entries[i][j] = Expr(spd(i, j));
    const MetricField g(entries, Space::Target, MetricKind::BaseOnly);
    const Matrix inv = inverse_metric_at(g, Vector::Zero(3));
    CHECK((inv * spd - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  const MetricField singular = MetricField::from_strings({{"1", "1"}, {"1", "1"}}, Space::Source)
                                   .with_signature(Signature::PseudoRiemannian);
  CHECK_THROWS_AS(inverse_metric_at(singular, vec({0.0, 0.0})), SingularMetric);
}

TEST_CASE("map_differential examples") {
  Matrix c(2, 2);
  c << 1.0, -2.0, 0.5, 3.0;
  const SmoothMap lin = SmoothMap::linear(c);
  CHECK(map_differential(lin, vec({0.7, -0.1})).isApprox(c));

  const SmoothMap e = SmoothMap::from_strings(2, {"exp(a1 + 2*a2)"});
  const Matrix d = map_differential(e, vec({0.0, 0.0}));
  CHECK(d(0, 0) == 1.0);
  CHECK(d(0, 1) == 2.0);

  const SmoothMap sq = SmoothMap::from_strings(1, {"a1^2"});
  CHECK(map_differential(sq, vec({3.0}))(0, 0) == doctest::Approx(6.0));
  CHECK_THROWS(SmoothMap::from_strings(1, {"x1"}));
}

TEST_CASE("fundamental_tensor uses half the fibre Hessian") {
  const Lagrangian electro(2, parse("b1^2 + b2^2 + a1*b1 + 2*a2*b2 + sin(a1)"));
  const Matrix g = fundamental_tensor(electro, vec({0.3, 0.4}), vec({-1.0, 2.0}));
  CHECK(g.isApprox(Matrix::Identity(2, 2)));
  CHECK(fundamental_tensor(electro, vec({0.3, 0.4}), vec({-1.0, 2.0}), true)
            .isApprox(2.0 * Matrix::Identity(2, 2)));

  const Lagrangian single(1, parse("b1^2"));
  CHECK(fundamental_tensor(single, vec({0.0}), vec({5.0}))(0, 0) == doctest::Approx(1.0));

  const Lagrangian polar_l(2, parse("b1^2 + a1^2*b2^2"));
  const Matrix p = fundamental_tensor(polar_l, vec({2.0, 0.0}), vec({0.1, 0.2}));
  CHECK(p(0, 0) == doctest::Approx(1.0));
  CHECK(p(1, 1) == doctest::Approx(4.0));
  CHECK(p(0, 1) == 0.0);
}

TEST_CASE("fundamental tensor of a fibre-quadratic Lagrangian is the metric itself") {
  const MetricField g = MetricField::from_strings(
      {{"2 + sin(a1)", "0.3*a2"}, {"0.3*a2", "1 + a1^2"}}, Space::Source);
  Expr l;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) l = l + g.entry(i, j) * Expr::variable(coord('b', i)) * Expr::variable(coord('b', j));
  const Lagrangian lag(2, l);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vector a = vec({u(rng), u(rng)});
    const Vector b = vec({u(rng), u(rng)});
    CHECK((fundamental_tensor(lag, a, b) - metric_at(g, a)).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("integrate examples") {
  const Domain square({0.0, 0.0}, {1.0, 1.0});
  CHECK(volume(square, MetricField::identity(2, Space::Source)) == doctest::Approx(1.0).epsilon(1e-14));

  const Domain circle({0.0}, {2.0 * pi}, {true});
  const MetricField one = MetricField::identity(1, Space::Source);
  CHECK(volume(circle, one) == doctest::Approx(2.0 * pi).epsilon(1e-14));
  CHECK(integrate(parse("sin(a1)^2"), circle, one) == doctest::Approx(pi).epsilon(1e-13));
  CHECK(integrate(parse("sin(a1)^2"), Domain({0.0}, {2.0 * pi}), one) == doctest::Approx(pi).epsilon(1e-13));

  const MetricField bad = MetricField::from_strings({{"a1 - 0.5"}}, Space::Source)
                              .with_signature(Signature::PseudoRiemannian);
  CHECK_THROWS_AS(integrate(parse("1"), Domain({0.0}, {1.0}), bad), SingularMetric);
}

TEST_CASE("integrate is linear") {
  const Domain dom({0.0, -1.0}, {1.0, 2.0});
  const MetricField phi = MetricField::from_strings({{"1 + a1^2", "0"}, {"0", "2"}}, Space::Source);
  const Expr s = parse("exp(a1)*cos(a2)");
  const Expr r = parse("a1*a2^3 - 1");
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double is = integrate(s, dom, phi), ir = integrate(r, dom, phi);
  for (int k = 0; k < 10; ++k) {
    const double al = u(rng), be = u(rng);
    const double combined = integrate(Expr(al) * s + Expr(be) * r, dom, phi);
    const double scale = 1.0 + std::abs(al * is) + std::abs(be * ir);
    CHECK(std::abs(combined - al * is - be * ir) <= 1e-12 * scale);
  }
}

TEST_CASE("quadrature refinement follows the rule order") {
  const MetricField one = MetricField::identity(1, Space::Source);
  const Expr s = parse("exp(a1)");
  const double exact = std::exp(1.0) - 1.0;
  QuadratureSpec trap{QuadratureRule::Trapezoid, 17};
  const Domain coarse({0.0}, {1.0}, {}, trap);
  const double e1 = std::abs(integrate(s, coarse, one) - exact);
  const double e2 = std::abs(integrate(s, coarse.with_nodes(33), one) - exact);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));

  // Periodic trapezoid converges spectrally.
  const Expr periodic = parse("exp(cos(a1))");
  const Domain circle({0.0}, {2.0 * pi}, {true}, {std::nullopt, 8});
  const double p8 = integrate(periodic, circle, one);
  const double p16 = integrate(periodic, circle.with_nodes(16), one);
  const double p32 = integrate(periodic, circle.with_nodes(32), one);
  CHECK(std::abs(p16 - p32) < 1e-3 * std::abs(p8 - p16));

  const double gl = integrate(s, Domain({0.0}, {1.0}), one);
  CHECK(gl == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("quadrature rules and domain helpers") {
  const Rule1D gl = gauss_legendre(5, -1.0, 1.0);
  double w = 0.0, x4 = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    w += gl.weights[i];
    x4 += gl.weights[i] * std::pow(gl.nodes[i], 8);
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(x4 == doctest::Approx(2.0 / 9.0).epsilon(1e-14));

  const Rule1D per = trapezoid(4, 0.0, 1.0, true);
  CHECK(per.nodes.size() == 4);
  CHECK(per.weights[0] == 0.25);

  CHECK_THROWS_AS(Domain({1.0}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(Domain({0.0}, {1.0}, {}, {std::nullopt, 1}), InvalidArgument);

  const Domain box({0.0, 0.0}, {1.0, 2.0}, {false, true});
  CHECK(box.rule(0) == QuadratureRule::GaussLegendre);
  CHECK(box.rule(1) == QuadratureRule::Trapezoid);
  for (const auto& p : box.halton(16)) CHECK(box.contains(p));
  CHECK(periodic_consistent(box, [](const Vector& a) { return std::cos(pi * a(1)); }));
  CHECK_FALSE(periodic_consistent(box, [](const Vector& a) { return a(1); }));
}

TEST_CASE("repeated integration is bitwise deterministic") {
  const Domain dom({0.0, 0.0}, {1.0, 1.0});
  const MetricField phi = MetricField::from_strings({{"1 + a1", "0"}, {"0", "1 + a2"}}, Space::Source);
  const Expr s = parse("sin(3*a1)*exp(a2)");
  const double first = integrate(s, dom, phi);
  for (int k = 0; k < 5; ++k) CHECK(integrate(s, dom, phi) == first);
}

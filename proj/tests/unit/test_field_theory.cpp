#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "glag/field_theory.hpp"

using namespace glag;
using std::numbers::pi;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

MetricField sphere() { return MetricField::from_strings({{"1", "0"}, {"0", "sin(x1)^2"}}, Space::Target); }
MetricField flat(int n) { return MetricField::identity(n, Space::Target); }
MetricField curved3() {
  return MetricField::from_strings(
      {{"1 + x2^2", "0.2*x3", "0"}, {"0.2*x3", "exp(x1)", "0.1"}, {"0", "0.1", "2 + sin(x1*x2)"}}, Space::Target);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("nonlinear connection") {
  const ConformalGLSpace fl(flat(2), Expr(0.0));
  CHECK(max_abs(nonlinear_connection(fl, vec({0.3, 0.2}), vec({1.0, 2.0}))) == 0.0);

  const ConformalGLSpace sp(sphere(), Expr(0.0));
  const Matrix n = nonlinear_connection(sp, vec({pi / 4, 0.0}), vec({0.0, 1.0}));
  CHECK(n(0, 1) == doctest::Approx(-0.5));
  CHECK(n(1, 0) == doctest::Approx(1.0));
  CHECK(n(0, 0) == 0.0);
  CHECK(n(1, 1) == 0.0);
  CHECK(max_abs(nonlinear_connection(sp, vec({pi / 4, 0.0}), vec({0.0, 0.0}))) == 0.0);
}

TEST_CASE("adapted derivative") {
  const Expr sigma = parse("x1^2*x2");
  const ConformalGLSpace fl(flat(2), sigma);
  CHECK(delta_x(fl, sigma, 0, vec({1.5, 2.0}), vec({3.0, 4.0})) == doctest::Approx(6.0));
  CHECK(delta_x(fl, parse("y1"), 0, vec({1.5, 2.0}), vec({3.0, 4.0})) == 0.0);

  const ConformalGLSpace sp(sphere(), Expr(0.0));
  const Vector x = vec({pi / 4, 0.0}), y = vec({0.0, 1.0});
  const Matrix n = nonlinear_connection(sp, x, y);
  for (int i = 0; i < 2; ++i) CHECK(delta_x(sp, parse("y1"), i, x, y) == doctest::Approx(-n(0, i)));
}

TEST_CASE("electromagnetic tensors") {
  const ConformalGLSpace zero(sphere(), Expr(0.0));
  const EmTensors z = em_tensors(zero, vec({1.0, 0.5}), vec({0.3, -0.7}));
  CHECK(max_abs(z.h) == 0.0);
  CHECK(max_abs(z.v) == 0.0);

  const ConformalGLSpace base(curved3(), parse("sin(x1)*x3 + x2^2"));
  CHECK(max_abs(em_tensors(base, vec({0.2, 0.4, 0.6}), vec({1.0, -1.0, 0.5})).v) == 0.0);

  const ConformalGLSpace lin(flat(2), parse("x1"));
  const double x1 = 0.3;
  const EmTensors e = em_tensors(lin, vec({x1, -0.2}), vec({0.0, 1.0}));
  CHECK(e.h(0, 1) == doctest::Approx(-std::exp(2 * x1)).epsilon(1e-14));
  CHECK(e.h(1, 0) == doctest::Approx(std::exp(2 * x1)).epsilon(1e-14));
}

TEST_CASE("electromagnetic tensors are antisymmetric") {
  const ConformalGLSpace sp(curved3(), parse("0.3*x1*y2 + sin(x3)*y1^2 + 0.1*y3*x2"));
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const EmTensors e = em_tensors(sp, vec({u(rng), u(rng), u(rng)}), vec({u(rng), u(rng), u(rng)}));
    CHECK(max_abs(e.h + e.h.transpose()) <= 1e-14);
    CHECK(max_abs(e.v + e.v.transpose()) <= 1e-14);
  }
}

TEST_CASE("curvature") {
  CHECK(curvature(flat(3), vec({0.1, 0.2, 0.3})).riemann.max_abs() == 0.0);

  const Curvature s = curvature(sphere(), vec({0.9, 0.3}));
  CHECK(std::abs(std::abs(s.scalar) - 2.0) <= 1e-8);
  CHECK(s.scalar == doctest::Approx(-2.0).epsilon(1e-10));

  const MetricField product =
      MetricField::from_strings({{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "sin(x2)^2"}}, Space::Target);
  const Curvature p = curvature(product, vec({0.4, 1.1, 0.2}));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          if (i == 0 || j == 0 || k == 0 || l == 0) CHECK(p.riemann(i, j, k, l) == 0.0);
        }
  CHECK(std::abs(p.riemann(1, 2, 1, 2)) > 0.1);
}

TEST_CASE("curvature symmetries") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int trial = 0; trial < 20; ++trial) {
    const Curvature c = curvature(curved3(), vec({u(rng), u(rng), u(rng)}));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            CHECK(c.riemann(i, j, k, l) == -c.riemann(i, j, l, k));
            const double cyclic = c.riemann(i, j, k, l) + c.riemann(i, k, l, j) + c.riemann(i, l, j, k);
            CHECK(std::abs(cyclic) <= 1e-8);
          }
  }
}

TEST_CASE("sigma tensors") {
  const Vector x = vec({0.3, -0.4, 0.8}), y = vec({0.5, 1.0, -0.2});

  const ConformalGLSpace zero(curved3(), Expr(0.0));
  const SigmaTensors z = sigma_tensors(zero, DConnectionCoefficients::berwald(zero), x, y);
  CHECK(z.h_norm == 0.0);
  CHECK(z.v_norm == 0.0);
  CHECK(max_abs(z.h_tensor) == 0.0);
  CHECK(max_abs(z.v_tensor) == 0.0);

  const ConformalGLSpace constant(curved3(), Expr(1.7));
  const SigmaTensors c = sigma_tensors(constant, DConnectionCoefficients::berwald(constant), x, y);
  CHECK(c.h_norm == 0.0);
  CHECK(max_abs(c.h_tensor) == 0.0);
  CHECK(max_abs(c.v_tensor) == 0.0);

  // sigma = x1^2 + x1 x2 + sin(x3) on flat space.
  const ConformalGLSpace sp(flat(3), parse("x1^2 + x1*x2 + sin(x3)"));
  const SigmaTensors s = sigma_tensors(sp, DConnectionCoefficients::berwald(sp), x, y);
  const Vector grad = vec({2 * x(0) + x(1), x(0), std::cos(x(2))});
  Matrix hess = Matrix::Zero(3, 3);
  hess(0, 0) = 2.0;
  hess(0, 1) = hess(1, 0) = 1.0;
  hess(2, 2) = -std::sin(x(2));
  const double hn = grad.squaredNorm();
  const Matrix expected = hess + grad * grad.transpose() - 0.5 * hn * Matrix::Identity(3, 3);
  CHECK(s.h_norm == doctest::Approx(hn).epsilon(1e-14));
  CHECK(max_abs(s.h_tensor - expected) <= 1e-13);
  CHECK(s.h_trace == doctest::Approx(expected.trace()).epsilon(1e-13));
  CHECK(s.v_norm == 0.0);
  CHECK(max_abs(s.v_tensor) == 0.0);
}

TEST_CASE("t tensor") {
  const Vector x = vec({0.3, -0.4, 0.8}), y = vec({0.5, 1.0, -0.2});
  const ConformalGLSpace zero(curved3(), Expr(0.0));
  CHECK(max_abs(t_tensor(zero, DConnectionCoefficients::berwald(zero), x, y)) == 0.0);

  const ConformalGLSpace sp(flat(3), parse("x1^2 + x1*x2 + sin(x3)"));
  const auto conn = DConnectionCoefficients::berwald(sp);
  const SigmaTensors s = sigma_tensors(sp, conn, x, y);
  const Matrix expected = (3.0 - 2.0) * (s.h_trace * Matrix::Identity(3, 3) - s.h_tensor);
  CHECK(max_abs(t_tensor(sp, conn, x, y) - expected) <= 1e-13);

  const ConformalGLSpace two(flat(2), parse("x1*y2 + y1^2*x2"));
  CHECK(max_abs(t_tensor(two, DConnectionCoefficients::berwald(two), vec({0.2, 0.7}), vec({1.0, -0.5}))) <= 1e-15);
}

TEST_CASE("Einstein equations") {
  const Vector x = vec({0.3, -0.4, 0.8}), y = vec({0.5, 1.0, -0.2});
  const ConformalGLSpace zero(curved3(), Expr(0.0), 2.0);
  const EinsteinEquations e = einstein_equations(zero, DConnectionCoefficients::berwald(zero), x, y);
  const Curvature c = curvature(curved3(), x);
  const Matrix classical = c.ricci - 0.5 * c.scalar * metric_at(curved3(), x);
  CHECK(max_abs(e.h_lhs - classical) <= 1e-12);
  CHECK(max_abs(e.v_lhs) == 0.0);
  CHECK(max_abs(e.energy_momentum_h - e.h_lhs / 2.0) <= 1e-15);

  const ConformalGLSpace sp(sphere(), Expr(0.0));
  const EinsteinEquations s = einstein_equations(sp, DConnectionCoefficients::berwald(sp), vec({1.2, 0.1}),
                                                 vec({0.3, 0.4}));
  CHECK(max_abs(s.h_lhs) <= 1e-8);

  const ConformalGLSpace fiber(sphere(), parse("y1*y2 + y2^3"));
  CHECK(max_abs(einstein_equations(fiber, DConnectionCoefficients::berwald(fiber), vec({1.2, 0.1}),
                                   vec({0.3, 0.4}))
                    .v_lhs) == 0.0);
}

TEST_CASE("Maxwell residuals") {
  const Vector x = vec({0.3, -0.4, 0.8}), y = vec({0.5, 1.0, -0.2});
  const ConformalGLSpace zero(curved3(), Expr(0.0));
  const MaxwellResiduals z = maxwell_residuals(zero, DConnectionCoefficients::berwald(zero), x, y);
  CHECK(z.first.max_abs() == 0.0);
  CHECK(z.second.max_abs() == 0.0);
  CHECK(z.third.max_abs() == 0.0);

  const ConformalGLSpace base(curved3(), parse("sin(x1)*x3 + x2^2"));
  const MaxwellResiduals b = maxwell_residuals(base, DConnectionCoefficients::berwald(base), x, y);
  CHECK(b.third.max_abs() == 0.0);

  const ConformalGLSpace fl(flat(3), parse("sin(x1)*x3 + x2^2"));
  CHECK(maxwell_residuals(fl, DConnectionCoefficients::berwald(fl), x, y).first.max_abs() <= 1e-8);
}

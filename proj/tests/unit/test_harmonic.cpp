#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "glag/error.hpp"
#include "glag/harmonic.hpp"
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

EnergySetup flat_setup(int m, int n, const Domain& dom) {
  return {dom, MetricField::identity(m, Space::Source), MetricField::identity(m, Space::Source),
          MetricField::identity(n, Space::Target), ConnectionTensor(m, n)};
}

ConnectionTensor random_tensor(std::mt19937& rng, int m, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ConnectionTensor p(m, n);
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < n; ++i) {
        p.set_b(c, b, i, Expr(u(rng)) * sin(Expr::variable("a1") + Expr(u(rng)) * Expr::variable("x1")));
      }
  for (int k = 0; k < n; ++k)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < n; ++i) p.set_y(k, b, i, Expr(u(rng)) + Expr(u(rng)) * Expr::variable("a2"));
  return p;
}

}  // namespace

TEST_CASE("connection tensor entries may not depend on fibre variables") {
  ConnectionTensor p(2, 2);
  CHECK_THROWS_AS(p.set_b(0, 0, 0, parse("b1")), InvalidArgument);
  CHECK_THROWS_AS(p.set_y(0, 0, 0, parse("y2")), InvalidArgument);
  p.set_y(0, 0, 0, parse("a1*x2"));
  CHECK(p.has_y());
  CHECK_FALSE(p.has_b());
}

TEST_CASE("induced directions") {
  // Curve case: P^k_{1i} = delta^k_i gives y = x'.
  ConnectionTensor p(1, 2);
  p.set_y(0, 0, 0, Expr(1.0));
  p.set_y(1, 0, 1, Expr(1.0));
  EnergySetup setup = flat_setup(1, 2, Domain({0.0}, {1.0}));
  setup.p = p;
  const SmoothMap curve = SmoothMap::from_strings(1, {"cos(a1)", "sin(a1)"});
  const InducedDirections dirs = induced_directions(setup, curve, vec({0.4}));
  CHECK(dirs.y(0) == doctest::Approx(-std::sin(0.4)));
  CHECK(dirs.y(1) == doctest::Approx(std::cos(0.4)));
  CHECK(dirs.b(0) == 0.0);

  const EnergySetup zero = flat_setup(1, 2, Domain({0.0}, {1.0}));
  const InducedDirections none = induced_directions(zero, curve, vec({0.4}));
  CHECK(none.b.norm() == 0.0);
  CHECK(none.y.norm() == 0.0);
}

TEST_CASE("induced direction b of the unit-covector general construction") {
  PresetParams params;
  params.theta = 0.7;
  const Preset pre = make_preset("general-4.1", params);
  const EnergySetup setup = pre.system.energy_setup(pre.domain);
  for (const Vector& a : pre.domain.halton(8)) {
    const InducedDirections d = induced_directions(setup, pre.solution, a);
    // Single orthonormal field, |A|^2 = (a2 + 1)^2 + a1^2.
    const double norm2 = (a(1) + 1.0) * (a(1) + 1.0) + a(0) * a(0);
    CHECK(d.b(0) == doctest::Approx(std::cos(0.7) * norm2).epsilon(1e-12));
    CHECK(d.b(1) == doctest::Approx(std::sin(0.7) * norm2).epsilon(1e-12));
  }
}

TEST_CASE("energy of linear maps is the Dirichlet energy") {
  Matrix c(3, 2);
  c << 1.0, 2.0, -0.5, 0.25, 3.0, -1.0;
  const EnergySetup setup = flat_setup(2, 3, Domain({0.0, 0.0}, {1.0, 1.0}));
  CHECK(energy(setup, SmoothMap::linear(c, vec({1.0, 2.0, 3.0}))) ==
        doctest::Approx(0.5 * c.squaredNorm()).epsilon(1e-12));

  // Curve case: straight line x(t) = t v.
  Matrix v(3, 1);
  v << 1.0, -2.0, 0.5;
  const EnergySetup curve = flat_setup(1, 3, Domain({0.0}, {1.0}));
  CHECK(energy(curve, SmoothMap::linear(v)) == doctest::Approx(0.5 * v.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("energy of a Pfaffian solution is half the volume") {
  const Preset pre = make_preset("pfaffian");
  CHECK(energy(pre.system.energy_setup(pre.domain), pre.solution) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("energy with base-only metrics ignores the connection tensor") {
  const Domain dom({0.0, 0.0}, {1.0, 1.0});
  EnergySetup setup{dom, MetricField::from_strings({{"1 + a1^2", "0"}, {"0", "2"}}, Space::Source),
                    MetricField::from_strings({{"2", "0.5"}, {"0.5", "1 + a2"}}, Space::Source),
                    MetricField::from_strings({{"1 + x2^2", "0"}, {"0", "exp(x1)"}}, Space::Target),
                    ConnectionTensor(2, 2)};
  const SmoothMap f = SmoothMap::from_strings(2, {"sin(a1) + a2", "a1*a2"});
  const double reference = energy(setup, f);
  std::mt19937 rng(17);
  for (int k = 0; k < 10; ++k) {
    setup.p = random_tensor(rng, 2, 2);
    CHECK(energy(setup, f) == reference);
  }
}

TEST_CASE("energy is homogeneous of degree one in h") {
  const Domain dom({0.0, 0.0}, {1.0, 1.0});
  EnergySetup setup = flat_setup(2, 2, dom);
  setup.h = MetricField::from_strings({{"1 + x1^2", "0.1"}, {"0.1", "2"}}, Space::Target);
  const SmoothMap f = SmoothMap::from_strings(2, {"a1^2", "a2 - a1"});
  const double e = energy(setup, f);
  setup.h = setup.h.scaled(Expr(3.0));
  CHECK(std::abs(energy(setup, f) - 3.0 * e) <= 1e-14 * std::abs(e) * 3.0);
}

TEST_CASE("energy reports the node where a generalized metric is undefined") {
  const Preset pre = make_preset("orbit");
  EnergySetup setup = pre.system.energy_setup(pre.domain);
  // A radial map has x' orthogonal to the rotation field.
  const SmoothMap radial = SmoothMap::from_strings(1, {"1 + a1", "0"});
  try {
    energy(setup, radial);
    FAIL("expected a domain error");
  } catch (const NumericalError& e) {
    CHECK(e.has_location());
    CHECK(std::string(e.location()).find("a1=") != std::string::npos);
  }
}

TEST_CASE("first variation examples") {
  const Domain dom({0.0, 0.0}, {1.0, 1.0});
  const EnergySetup flat = flat_setup(2, 2, dom);
  Matrix c(2, 2);
  c << 1.0, 2.0, 3.0, 4.0;
  const Expr bump = bump_variation(dom);
  CHECK(std::abs(first_variation(flat, SmoothMap::linear(c), {bump, Expr(2.0) * bump})) <= 1e-6);

  const Preset pre = make_preset("pfaffian");
  const Expr pb = bump_variation(pre.domain);
  CHECK(std::abs(first_variation(pre.system.energy_setup(pre.domain), pre.solution, {pb})) <= 1e-5);

  const Domain line({0.0}, {1.0});
  const EnergySetup one = flat_setup(1, 1, line);
  CHECK(std::abs(first_variation(one, SmoothMap::from_strings(1, {"a1^3"}), {bump_variation(line)})) > 1e-3);

  CHECK_THROWS_AS(first_variation(one, SmoothMap::from_strings(1, {"a1"}), {parse("1")}), InvalidArgument);
}

TEST_CASE("electrodynamics residual examples") {
  const MetricField flat = MetricField::identity(2, Space::Source);
  Matrix c(2, 2);
  c << 1.0, 2.0, 3.0, 4.0;
  CHECK(electrodynamics_el_residual(flat, flat, MetricField::identity(2, Space::Target), SmoothMap::linear(c),
                                    vec({0.3, 0.6}))
            .norm() == 0.0);

  const MetricField g = MetricField::from_strings({{"1 + a1^2", "0"}, {"0", "exp(a2)"}}, Space::Source);
  const MetricField h = MetricField::from_strings({{"1 + x1^2", "0"}, {"0", "exp(x2)"}}, Space::Target);
  CHECK(electrodynamics_el_residual(g, g, h, SmoothMap::identity(2), vec({0.4, -0.3})).norm() <= 1e-10);

  const MetricField one = MetricField::identity(1, Space::Source);
  const Vector r = electrodynamics_el_residual(one, one, MetricField::identity(1, Space::Target),
                                               SmoothMap::from_strings(1, {"a1^3"}), vec({1.0}));
  CHECK(r(0) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("first variation agrees with the closed-form pairing") {
  const Domain dom({0.0, 0.0}, {1.0, 1.0}, {}, {std::nullopt, 24});
  const MetricField phi = MetricField::from_strings({{"1 + 0.5*a1", "0"}, {"0", "1"}}, Space::Source);
  const MetricField g = MetricField::from_strings({{"2 + sin(a2)", "0.2"}, {"0.2", "1 + a1^2"}}, Space::Source);
  const MetricField h = MetricField::from_strings({{"1 + x2^2", "0"}, {"0", "exp(0.5*x1)"}}, Space::Target);
  const SmoothMap f = SmoothMap::from_strings(2, {"a1 + 0.3*a2^2", "sin(a1*a2)"});
  const Expr bump = bump_variation(dom);
  const std::vector<Expr> v{bump * parse("1 + a1"), bump * parse("cos(a2)")};
  const EnergySetup setup{dom, phi, g, h, ConnectionTensor(2, 2)};
  const double fv = first_variation(setup, f, v);
  const double pairing = electrodynamics_el_pairing(g, phi, h, f, v, dom);
  CHECK(std::abs(fv - pairing) <= 1e-3 * std::abs(pairing));
}

TEST_CASE("geodesic transfer harness") {
  const MetricField one = MetricField::identity(1, Space::Source);
  const MetricField one_t = MetricField::identity(1, Space::Target);
  const std::vector<GeodesicSample> line{{vec({0.0}), vec({1.0}), 0.0, 1.0}};
  const TransferReport sq = geodesic_transfer_check(one, one, one_t, SmoothMap::from_strings(1, {"a1^2"}), line);
  CHECK(sq.max_image_residual == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(sq.max_el_residual == doctest::Approx(2.0).epsilon(1e-12));

  const MetricField sph = MetricField::from_strings({{"1", "0"}, {"0", "sin(a1)^2"}}, Space::Source);
  const MetricField sph_t = MetricField::from_strings({{"1", "0"}, {"0", "sin(x1)^2"}}, Space::Target);
  const std::vector<GeodesicSample> samples{{vec({1.0, 0.0}), vec({0.3, 0.8}), 0.0, 1.0},
                                            {vec({1.4, 2.0}), vec({-0.5, 0.1}), 0.0, 1.0}};
  const TransferReport id = geodesic_transfer_check(sph, sph, sph_t, SmoothMap::identity(2), samples);
  CHECK(id.max_image_residual <= 1e-5);
  CHECK(id.max_el_residual <= 1e-5);

  const double th = 0.8;
  Matrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const MetricField flat = MetricField::identity(2, Space::Source);
  const TransferReport iso = geodesic_transfer_check(flat, flat, MetricField::identity(2, Space::Target),
                                                     SmoothMap::linear(rot, vec({1.0, -1.0})), samples, 100);
  CHECK(iso.max_image_residual <= 1e-10);
  CHECK(iso.max_el_residual <= 1e-10);
}

TEST_CASE("bump variation vanishes on the boundary") {
  const Domain dom({0.0, -1.0}, {1.0, 1.0});
  const Expr b = bump_variation(dom, 2.0);
  for (const Vector& p : dom.boundary_samples()) CHECK(std::abs(b.eval(coordinate_env(Space::Source, p))) <= 1e-15);
  const Domain circle({0.0}, {2.0 * pi}, {true});
  CHECK(bump_variation(circle).eval({{"a1", pi / 2}}) == doctest::Approx(1.0));
}

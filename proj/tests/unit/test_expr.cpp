#include <cmath>
#include <cstring>

#include "doctest.h"
#include "glag/error.hpp"
#include "glag/expr.hpp"
#include "support/random_expr.hpp"

using namespace glag;
using Kind = Expr::Kind;

TEST_CASE("parse builds the precedence-forced tree") {
  const Expr e = parse("a1 + 2*a2");
  REQUIRE(e.kind() == Kind::Add);
  CHECK(e.lhs().kind() == Kind::Variable);
  CHECK(e.lhs().name() == "a1");
  REQUIRE(e.rhs().kind() == Kind::Mul);
  CHECK(e.rhs().lhs().value() == 2.0);
  CHECK(e.rhs().rhs().name() == "a2");

  const Expr p = parse("exp(x1)^2");
  REQUIRE(p.kind() == Kind::Pow);
  CHECK(p.lhs().kind() == Kind::Call);
  CHECK(p.lhs().func() == Func::Exp);
  CHECK(p.rhs().value() == 2.0);
}

TEST_CASE("power binds tighter than unary minus and associates to the right") {
  CHECK(parse("-2^2").eval({}) == -4.0);
  CHECK(parse("2^3^2").eval({}) == 512.0);
  CHECK(parse("2^-1").eval({}) == 0.5);
  CHECK(parse("8 - 2 - 1").eval({}) == 5.0);
  CHECK(parse("8 / 2 / 2").eval({}) == 2.0);
  CHECK(parse(" 1.5e1 +\t2 ").eval({}) == 17.0);
}

TEST_CASE("malformed input reports the byte offset") {
  try {
    parse("1 + * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse("sin(x1"), ParseError);
  CHECK_THROWS_AS(parse("foo(x1)"), ParseError);
  CHECK_THROWS_AS(parse("1 2"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("eval examples and errors") {
  CHECK(parse("a1*a1").eval({{"a1", 3.0}}) == 9.0);
  CHECK(parse("exp(0)").eval({}) == 1.0);
  CHECK_THROWS_AS(parse("log(x1)").eval({{"x1", -1.0}}), DomainError);
  CHECK_THROWS_AS(parse("sqrt(x1)").eval({{"x1", -1.0}}), DomainError);
  CHECK_THROWS_AS(parse("1/x1").eval({{"x1", 0.0}}), DomainError);
  CHECK_THROWS_AS(parse("x1^a1").eval({{"x1", -1.0}, {"a1", 0.5}}), DomainError);
  CHECK_THROWS_AS(parse("a1 + a2").eval({{"a1", 1.0}}), UnboundVariable);
  CHECK(parse("(-2)^3").eval({}) == -8.0);
}

TEST_CASE("Env identifiers are unique") {
  Env env;
  env.bind("a1", 1.0);
  CHECK_THROWS_AS(env.bind("a1", 2.0), InvalidArgument);
  env.set("a1", 2.0);
  CHECK(*env.find("a1") == 2.0);
}

TEST_CASE("derivative examples") {
  CHECK(derivative(parse("a1^2"), "a1").eval({{"a1", 3.0}}) == doctest::Approx(6.0));
  CHECK(derivative(parse("sin(x1)"), "x1").eval({{"x1", 0.0}}) == 1.0);

  const Expr e = parse("exp(a1+2*a2)");
  const Expr mixed = derivative(derivative(e, "a1"), "a2");
  const Env origin{{"a1", 0.0}, {"a2", 0.0}};
  CHECK(mixed.eval(origin) == doctest::Approx(2.0).epsilon(1e-12));
  const double fd = testing::central_difference(derivative(e, "a1"), "a2", origin);
  CHECK(std::abs(mixed.eval(origin) - fd) / 2.0 <= 1e-6);
}

TEST_CASE("derivative of a constant expression is exactly zero") {
  for (const char* src : {"3", "exp(2)*sin(1)", "-(4^0.5)/7", "tanh(1) + abs(-2)"}) {
    const Expr d = derivative(parse(src), "a1");
    CHECK(d.eval({}) == 0.0);
    CHECK(derivative(parse(src), "x1").is_constant());
  }
}

TEST_CASE("symbolic derivatives match central differences on random expressions") {
  testing::RandomExpr gen(7, {"a1", "a2", "x1"});
  for (int trial = 0; trial < 200; ++trial) {
    const Expr e = gen.generate();
    const Env env = gen.point();
    for (const auto& v : gen.vars()) {
      CHECK(testing::autodiff_error(e, v, env) <= 1e-6);
    }
  }
}

TEST_CASE("print and parse round-trip with bitwise-equal evaluation") {
  testing::RandomExpr gen(11, {"a1", "b1", "x2"});
  for (int trial = 0; trial < 50; ++trial) {
    const Expr e = gen.generate();
    const Expr back = parse(to_string(e));
    for (int k = 0; k < 100; ++k) {
      const Env env = gen.point();
      const double u = e.eval(env), w = back.eval(env);
      CHECK(std::memcmp(&u, &w, sizeof u) == 0);
    }
  }
}

TEST_CASE("substitute and variables") {
  const Expr e = parse("a1*x1 + x1");
  CHECK(e.variables() == std::set<std::string>{"a1", "x1"});
  const Expr s = substitute(e, "x1", parse("a2 + 1"));
  CHECK(s.variables() == std::set<std::string>{"a1", "a2"});
  CHECK(s.eval({{"a1", 2.0}, {"a2", 3.0}}) == 12.0);
  CHECK(coord('a', 0) == "a1");
  CHECK(coord('y', 2) == "y3");
}

#pragma once

// Random smooth test expressions and finite-difference oracles shared by the
// unit suites and the acceptance runner.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "glag/expr.hpp"

namespace glag::testing {

/// Random polynomial/exponential/trigonometric expression in `vars`. Every
/// operation stays inside its domain for arguments in [-1, 1].
class RandomExpr {
 public:
  RandomExpr(std::uint32_t seed, std::vector<std::string> vars) : rng_(seed), vars_(std::move(vars)) {}

  Expr generate(int depth = 4) {
    if (depth == 0 || coin(0.25)) return leaf();
    switch (pick(9)) {
      case 0: return generate(depth - 1) + generate(depth - 1);
      case 1: return generate(depth - 1) - generate(depth - 1);
      case 2: return generate(depth - 1) * generate(depth - 1);
      case 3: return generate(depth - 1) / (Expr(2.0) + sin(generate(depth - 1)));
      case 4: return pow(generate(depth - 1), Expr(static_cast<double>(1 + pick(3))));
      case 5: return exp(Expr(0.5) * tanh(generate(depth - 1)));
      case 6: return sin(generate(depth - 1));
      case 7: return cos(generate(depth - 1));
      default: return sqrt(Expr(1.0) + pow(generate(depth - 1), Expr(2.0)));
    }
  }

  Env point(double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Env env;
    for (const auto& v : vars_) env.bind(v, u(rng_));
    return env;
  }

  const std::vector<std::string>& vars() const { return vars_; }
  std::mt19937& rng() { return rng_; }

 private:
  Expr leaf() {
    if (coin(0.6)) return Expr::variable(vars_[pick(static_cast<int>(vars_.size()))]);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return Expr(std::round(u(rng_) * 100.0) / 100.0);
  }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::mt19937 rng_;
  std::vector<std::string> vars_;
};

/// Central difference of `e` in `var` at `env` with step h.
inline double central_difference(const Expr& e, const std::string& var, const Env& env,
                                 double h = 1e-5) {
  Env plus = env, minus = env;
  const double x = *env.find(var);
  plus.set(var, x + h);
  minus.set(var, x - h);
  return (e.eval(plus) - e.eval(minus)) / (2.0 * h);
}

/// |exact - fd| / (1 + |exact|), the autodiff agreement measure.
inline double autodiff_error(const Expr& e, const std::string& var, const Env& env) {
  const double exact = derivative(e, var).eval(env);
  return std::abs(exact - central_difference(e, var, env)) / (1.0 + std::abs(exact));
}

}  // namespace glag::testing

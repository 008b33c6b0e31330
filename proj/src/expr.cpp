#include "glag/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "glag/error.hpp"

namespace glag {

// ---------------------------------------------------------------------------
// Env

Env::Env(std::initializer_list<std::pair<std::string, double>> bindings) {
  for (const auto& [name, value] : bindings) bind(name, value);
}

Env& Env::bind(std::string name, double value) {
  if (contains(name)) throw InvalidArgument("identifier '" + name + "' bound twice");
  bindings_.emplace_back(std::move(name), value);
  return *this;
}

Env& Env::set(std::string_view name, double value) {
  for (auto& [n, v] : bindings_) {
    if (n == name) {
      v = value;
      return *this;
    }
  }
  bindings_.emplace_back(std::string(name), value);
  return *this;
}

const double* Env::find(std::string_view name) const {
  for (const auto& [n, v] : bindings_) {
    if (n == name) return &v;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Functions

namespace {

constexpr std::array<std::pair<Func, std::string_view>, 7> kFuncs{{
    {Func::Exp, "exp"},
    {Func::Log, "log"},
    {Func::Sin, "sin"},
    {Func::Cos, "cos"},
    {Func::Sqrt, "sqrt"},
    {Func::Tanh, "tanh"},
    {Func::Abs, "abs"},
}};

}  // namespace

std::string_view func_name(Func f) {
  for (const auto& [func, name] : kFuncs) {
    if (func == f) return name;
  }
  return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
  for (const auto& [func, n] : kFuncs) {
    if (n == name) return func;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Nodes

struct Expr::Node {
  Kind kind = Kind::Number;
  double value = 0.0;
  std::string name;
  Func func = Func::Exp;
  Expr lhs{std::shared_ptr<const Node>{}};
  Expr rhs{std::shared_ptr<const Node>{}};
  bool constant = true;
  std::size_t count = 1;
};

namespace {

std::shared_ptr<Expr::Node> new_node(Expr::Kind kind) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  return n;
}

}  // namespace

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  auto n = new_node(Kind::Number);
  n->value = value;
  node_ = std::move(n);
}

Expr Expr::number(double value) { return Expr(value); }

Expr Expr::variable(std::string name) {
  auto n = new_node(Kind::Variable);
  n->name = std::move(name);
  n->constant = false;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::call(Func f, Expr arg) {
  if (arg.kind() == Kind::Number) {
    // Fold only where the result is defined; otherwise keep the call so the
    // domain error surfaces at evaluation.
    const double v = arg.value();
    switch (f) {
      case Func::Exp: return Expr(std::exp(v));
      case Func::Sin: return Expr(std::sin(v));
      case Func::Cos: return Expr(std::cos(v));
      case Func::Tanh: return Expr(std::tanh(v));
      case Func::Abs: return Expr(std::fabs(v));
      case Func::Log:
        if (v > 0) return Expr(std::log(v));
        break;
      case Func::Sqrt:
        if (v >= 0) return Expr(std::sqrt(v));
        break;
    }
  }
  return make_unary(Kind::Call, arg, f);
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Func Expr::func() const { return node_->func; }
const Expr& Expr::lhs() const { return node_->lhs; }
const Expr& Expr::rhs() const { return node_->rhs; }
bool Expr::is_constant() const { return node_->constant; }
std::size_t Expr::node_count() const { return node_->count; }

Expr Expr::make_binary(Kind kind, const Expr& l, const Expr& r) {
  auto n = new_node(kind);
  n->lhs = l;
  n->rhs = r;
  n->constant = l.is_constant() && r.is_constant();
  n->count = 1 + l.node_count() + r.node_count();
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::make_unary(Kind kind, const Expr& operand, Func f) {
  auto n = new_node(kind);
  n->func = f;
  n->lhs = operand;
  n->constant = operand.is_constant();
  n->count = 1 + operand.node_count();
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr operator-(const Expr& e) {
  if (e.kind() == Expr::Kind::Number) return Expr(-e.value());
  if (e.kind() == Expr::Kind::Negate) return e.lhs();
  return Expr::make_unary(Expr::Kind::Negate, e);
}

Expr operator+(const Expr& l, const Expr& r) {
  if (l.kind() == Expr::Kind::Number && r.kind() == Expr::Kind::Number) {
    return Expr(l.value() + r.value());
  }
  if (l.is_zero()) return r;
  if (r.is_zero()) return l;
  return Expr::make_binary(Expr::Kind::Add, l, r);
}

Expr operator-(const Expr& l, const Expr& r) {
  if (l.kind() == Expr::Kind::Number && r.kind() == Expr::Kind::Number) {
    return Expr(l.value() - r.value());
  }
  if (r.is_zero()) return l;
  if (l.is_zero()) return -r;
  return Expr::make_binary(Expr::Kind::Sub, l, r);
}

Expr operator*(const Expr& l, const Expr& r) {
  if (l.kind() == Expr::Kind::Number && r.kind() == Expr::Kind::Number) {
    return Expr(l.value() * r.value());
  }
  if (l.is_zero() || r.is_zero()) return Expr(0.0);
  if (l.is_one()) return r;
  if (r.is_one()) return l;
  return Expr::make_binary(Expr::Kind::Mul, l, r);
}

Expr operator/(const Expr& l, const Expr& r) {
  if (l.kind() == Expr::Kind::Number && r.kind() == Expr::Kind::Number && r.value() != 0.0) {
    return Expr(l.value() / r.value());
  }
  if (r.is_one()) return l;
  if (l.is_zero() && !r.is_zero()) return Expr(0.0);
  return Expr::make_binary(Expr::Kind::Div, l, r);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr(1.0);
  if (exponent.is_one()) return base;
  return Expr::make_binary(Expr::Kind::Pow, base, exponent);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_pow(double base, double exponent, bool constant_exponent) {
  if (base > 0) return std::pow(base, exponent);
  if (!constant_exponent) {
    throw DomainError("power with variable exponent needs a positive base (base = " +
                      std::to_string(base) + ")");
  }
  if (base == 0) {
    if (exponent < 0) throw DomainError("division by zero in 0^" + std::to_string(exponent));
    return std::pow(base, exponent);
  }
  if (exponent != std::trunc(exponent)) {
    throw DomainError("non-integer power of negative base " + std::to_string(base));
  }
  return std::pow(base, exponent);
}

}  // namespace

double Expr::eval(const Env& env) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Number:
      return n.value;
    case Kind::Variable: {
      const double* v = env.find(n.name);
      if (v == nullptr) throw UnboundVariable(n.name);
      return *v;
    }
    case Kind::Negate:
      return -n.lhs.eval(env);
    case Kind::Add:
      return n.lhs.eval(env) + n.rhs.eval(env);
    case Kind::Sub:
      return n.lhs.eval(env) - n.rhs.eval(env);
    case Kind::Mul:
      return n.lhs.eval(env) * n.rhs.eval(env);
    case Kind::Div: {
      const double num = n.lhs.eval(env);
      const double den = n.rhs.eval(env);
      if (den == 0.0) throw DomainError("division by zero");
      return num / den;
    }
    case Kind::Pow:
      return eval_pow(n.lhs.eval(env), n.rhs.eval(env), n.rhs.is_constant());
    case Kind::Call: {
      const double x = n.lhs.eval(env);
      switch (n.func) {
        case Func::Exp: return std::exp(x);
        case Func::Log:
          if (!(x > 0)) throw DomainError("log of non-positive value " + std::to_string(x));
          return std::log(x);
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Sqrt:
          if (x < 0) throw DomainError("sqrt of negative value " + std::to_string(x));
          return std::sqrt(x);
        case Func::Tanh: return std::tanh(x);
        case Func::Abs: return std::fabs(x);
      }
    }
  }
  return 0.0;
}

double eval(const Expr& e, const Env& env) { return e.eval(env); }

namespace {

void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (e.is_constant()) return;
  switch (e.kind()) {
    case Expr::Kind::Number: return;
    case Expr::Kind::Variable: out.insert(e.name()); return;
    case Expr::Kind::Negate:
    case Expr::Kind::Call: collect_variables(e.lhs(), out); return;
    default:
      collect_variables(e.lhs(), out);
      collect_variables(e.rhs(), out);
  }
}

}  // namespace

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  collect_variables(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr derivative(const Expr& e, std::string_view var) {
  using K = Expr::Kind;
  if (e.is_constant()) return Expr(0.0);
  switch (e.kind()) {
    case K::Number:
      return Expr(0.0);
    case K::Variable:
      return Expr(e.name() == var ? 1.0 : 0.0);
    case K::Negate:
      return -derivative(e.lhs(), var);
    case K::Add:
      return derivative(e.lhs(), var) + derivative(e.rhs(), var);
    case K::Sub:
      return derivative(e.lhs(), var) - derivative(e.rhs(), var);
    case K::Mul: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      return derivative(u, var) * v + u * derivative(v, var);
    }
    case K::Div: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      const Expr du = derivative(u, var);
      const Expr dv = derivative(v, var);
      if (dv.is_zero()) return du / v;
      return (du * v - u * dv) / pow(v, Expr(2.0));
    }
    case K::Pow: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      const Expr du = derivative(u, var);
      if (v.is_constant()) {
        return v * pow(u, v - Expr(1.0)) * du;
      }
      const Expr dv = derivative(v, var);
      return e * (dv * log(u) + v * du / u);
    }
    case K::Call: {
      const Expr& u = e.lhs();
      const Expr du = derivative(u, var);
      if (du.is_zero()) return Expr(0.0);
      switch (e.func()) {
        case Func::Exp: return e * du;
        case Func::Log: return du / u;
        case Func::Sin: return cos(u) * du;
        case Func::Cos: return -(sin(u) * du);
        case Func::Sqrt: return du / (Expr(2.0) * e);
        case Func::Tanh: return (Expr(1.0) - pow(e, Expr(2.0))) * du;
        case Func::Abs: return u / e * du;
      }
    }
  }
  return Expr(0.0);
}

Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
  using K = Expr::Kind;
  if (e.is_constant()) return e;
  switch (e.kind()) {
    case K::Number: return e;
    case K::Variable: return e.name() == var ? replacement : e;
    case K::Negate: return -substitute(e.lhs(), var, replacement);
    case K::Call: return Expr::call(e.func(), substitute(e.lhs(), var, replacement));
    case K::Add: return substitute(e.lhs(), var, replacement) + substitute(e.rhs(), var, replacement);
    case K::Sub: return substitute(e.lhs(), var, replacement) - substitute(e.rhs(), var, replacement);
    case K::Mul: return substitute(e.lhs(), var, replacement) * substitute(e.rhs(), var, replacement);
    case K::Div: return substitute(e.lhs(), var, replacement) / substitute(e.rhs(), var, replacement);
    case K::Pow: return pow(substitute(e.lhs(), var, replacement), substitute(e.rhs(), var, replacement));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print(const Expr& e, std::string& out) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.value());
      if (e.value() < 0 || std::signbit(e.value())) {
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case K::Variable:
      out += e.name();
      return;
    case K::Negate:
      out += "(-";
      print(e.lhs(), out);
      out += ')';
      return;
    case K::Call:
      out += func_name(e.func());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
    default: {
      const char op = e.kind() == K::Add   ? '+'
                      : e.kind() == K::Sub ? '-'
                      : e.kind() == K::Mul ? '*'
                      : e.kind() == K::Div ? '/'
                                           : '^';
      out += '(';
      print(e.lhs(), out);
      out += op;
      print(e.rhs(), out);
      out += ')';
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string coord(char prefix, int index) { return prefix + std::to_string(index + 1); }

// ---------------------------------------------------------------------------
// Parsing

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const { throw ParseError(pos_, expected); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) {
        e = binary(Expr::Kind::Add, e, parse_term());
      } else if (accept('-')) {
        e = binary(Expr::Kind::Sub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = binary(Expr::Kind::Mul, e, parse_unary());
      } else if (accept('/')) {
        e = binary(Expr::Kind::Div, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return negate(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return binary(Expr::Kind::Pow, base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("number, identifier or '('");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      if (!accept(')')) fail("')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view ident = src_.substr(start, pos_ - start);
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        const auto f = func_from_name(ident);
        if (!f) {
          pos_ = start;
          fail("known function (exp, log, sin, cos, sqrt, tanh, abs)");
        }
        ++pos_;
        Expr arg = parse_expr();
        if (!accept(')')) fail("')'");
        return call(*f, arg);
      }
      return Expr::variable(std::string(ident));
    }
    fail("number, identifier or '('");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) {
      pos_ = start;
      fail("number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" is 2 followed by identifier e
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail("representable number");
    }
    return Expr::number(value);
  }

  static Expr binary(Expr::Kind kind, const Expr& l, const Expr& r) {
    return Expr::make_binary(kind, l, r);
  }
  static Expr negate(const Expr& e) { return Expr::make_unary(Expr::Kind::Negate, e); }
  static Expr call(Func f, const Expr& arg) { return Expr::make_unary(Expr::Kind::Call, arg, f); }

  std::string_view src_;
  std::size_t pos_ = 0;
};

Expr parse(std::string_view source) { return ExprParser(source).parse_all(); }

}  // namespace glag

#pragma once

// Scalar expression language used to describe metrics, maps, vector fields,
// 1-forms and conformal factors. Expressions are immutable trees with shared
// subtrees; differentiation is symbolic and exact.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace glag {

/// Ordered set of variable bindings. Identifiers are unique.
class Env {
 public:
  Env() = default;
  Env(std::initializer_list<std::pair<std::string, double>> bindings);

  /// Adds a new binding; throws InvalidArgument if `name` is already bound.
  Env& bind(std::string name, double value);
  /// Adds or overwrites a binding.
  Env& set(std::string_view name, double value);

  const double* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::size_t size() const { return bindings_.size(); }
  const std::vector<std::pair<std::string, double>>& bindings() const { return bindings_; }

 private:
  std::vector<std::pair<std::string, double>> bindings_;
};

enum class Func { Exp, Log, Sin, Cos, Sqrt, Tanh, Abs };

std::string_view func_name(Func f);
std::optional<Func> func_from_name(std::string_view name);

class Expr {
 public:
  enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

  /// The constant 0.
  Expr();
  Expr(double value);  // NOLINT(google-explicit-constructor): literals read naturally

  static Expr number(double value);
  static Expr variable(std::string name);
  static Expr call(Func f, Expr arg);

  Kind kind() const;
  double value() const;              // Number only
  const std::string& name() const;   // Variable only
  Func func() const;                 // Call only
  const Expr& lhs() const;           // binary ops; operand of Negate/Call
  const Expr& rhs() const;           // binary ops

  /// True when the tree references no variables.
  bool is_constant() const;
  bool is_zero() const { return kind() == Kind::Number && value() == 0.0; }
  bool is_one() const { return kind() == Kind::Number && value() == 1.0; }

  double eval(const Env& env) const;
  std::set<std::string> variables() const;
  std::size_t node_count() const;

  /// Same node (pointer identity), used for cheap sharing checks.
  bool same_node(const Expr& other) const { return node_ == other.node_; }

  friend Expr operator-(const Expr& e);
  friend Expr operator+(const Expr& l, const Expr& r);
  friend Expr operator-(const Expr& l, const Expr& r);
  friend Expr operator*(const Expr& l, const Expr& r);
  friend Expr operator/(const Expr& l, const Expr& r);
  friend Expr pow(const Expr& base, const Expr& exponent);

  struct Node;

 private:
  friend class ExprParser;

  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make_binary(Kind kind, const Expr& l, const Expr& r);
  static Expr make_unary(Kind kind, const Expr& operand, Func f = Func::Exp);

  std::shared_ptr<const Node> node_;
};

inline Expr exp(const Expr& e) { return Expr::call(Func::Exp, e); }
inline Expr log(const Expr& e) { return Expr::call(Func::Log, e); }
inline Expr sin(const Expr& e) { return Expr::call(Func::Sin, e); }
inline Expr cos(const Expr& e) { return Expr::call(Func::Cos, e); }
inline Expr sqrt(const Expr& e) { return Expr::call(Func::Sqrt, e); }
inline Expr tanh(const Expr& e) { return Expr::call(Func::Tanh, e); }
inline Expr abs(const Expr& e) { return Expr::call(Func::Abs, e); }

/// Parses `source` under the grammar
///   expr  := term (('+'|'-') term)*
///   term  := unary (('*'|'/') unary)*
///   unary := '-' unary | power
///   power := atom ('^' unary)?
///   atom  := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
/// `^` binds tighter than unary minus and is right-associative.
Expr parse(std::string_view source);

double eval(const Expr& e, const Env& env);

/// Exact partial derivative with respect to `var`. Constant folding keeps the
/// result small but no further simplification is attempted.
Expr derivative(const Expr& e, std::string_view var);

/// Replaces every occurrence of variable `var` by `replacement`.
Expr substitute(const Expr& e, std::string_view var, const Expr& replacement);

/// Fully parenthesized text that parses back to an expression with identical
/// evaluation (numbers printed with 17 significant digits).
std::string to_string(const Expr& e);

/// Coordinate names follow a fixed convention: a1..am on the source base,
/// b1..bm on its fibre, x1..xn on the target base, y1..yn on its fibre, and t
/// for a curve parameter. Indices here are zero-based.
std::string coord(char prefix, int index);

}  // namespace glag

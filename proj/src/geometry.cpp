#include "glag/geometry.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "glag/error.hpp"

namespace glag {

char base_prefix(Space s) { return s == Space::Source ? 'a' : 'x'; }
char fiber_prefix(Space s) { return s == Space::Source ? 'b' : 'y'; }

const std::vector<std::string>& coord_names(char prefix, int d) {
  static std::mutex mutex;
  static std::map<std::pair<char, int>, std::vector<std::string>> cache;
  std::lock_guard lock(mutex);
  auto& names = cache[{prefix, d}];
  if (names.empty()) {
    for (int i = 0; i < d; ++i) names.push_back(coord(prefix, i));
  }
  return names;
}

Env coordinate_env(Space space, const Vector& base, const Vector* fiber) {
  Env env;
  const auto& bn = coord_names(base_prefix(space), static_cast<int>(base.size()));
  for (int i = 0; i < base.size(); ++i) env.bind(bn[i], base[i]);
  if (fiber != nullptr) {
    const auto& fn = coord_names(fiber_prefix(space), static_cast<int>(fiber->size()));
    for (int i = 0; i < fiber->size(); ++i) env.bind(fn[i], (*fiber)[i]);
  }
  return env;
}

std::string format_point(char prefix, const Vector& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (int i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << prefix << (i + 1) << '=' << p[i];
  }
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------------------
// MetricField

struct MetricField::Data {
  int d = 0;
  Space space = Space::Source;
  MetricKind kind = MetricKind::BaseOnly;
  Signature signature = Signature::Riemannian;
  ExprMatrix entries;
  // [l][i][j]
  std::vector<ExprMatrix> base_derivs;
  std::vector<ExprMatrix> fiber_derivs;
};

namespace {

void check_variables(const Expr& e, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& v : e.variables()) {
    if (!allowed.count(v)) {
      throw InvalidArgument(what + " references '" + v + "', which is not one of its coordinates");
    }
  }
}

std::set<std::string> allowed_names(char p1, int d, std::optional<char> p2 = std::nullopt,
                                    int d2 = 0) {
  std::set<std::string> out;
  for (const auto& n : coord_names(p1, d)) out.insert(n);
  if (p2) {
    for (const auto& n : coord_names(*p2, d2)) out.insert(n);
  }
  return out;
}

}  // namespace

MetricField::MetricField(ExprMatrix entries, Space space, MetricKind kind, Signature signature) {
  auto data = std::make_shared<Data>();
  data->d = static_cast<int>(entries.size());
  if (data->d == 0) throw InvalidArgument("metric must have dimension >= 1");
  for (const auto& row : entries) {
    if (static_cast<int>(row.size()) != data->d) throw InvalidArgument("metric matrix is not square");
  }
  data->space = space;
  data->kind = kind;
  data->signature = signature;
  const int d = data->d;
  const auto allowed = kind == MetricKind::DirectionDependent
                           ? allowed_names(base_prefix(space), d, fiber_prefix(space), d)
                           : allowed_names(base_prefix(space), d);
  for (const auto& row : entries) {
    for (const auto& e : row) check_variables(e, allowed, "metric entry");
  }
  data->entries = std::move(entries);

  auto derivs = [&](char prefix) {
    std::vector<ExprMatrix> out(d, ExprMatrix(d, std::vector<Expr>(d)));
    const auto& names = coord_names(prefix, d);
    for (int l = 0; l < d; ++l) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) out[l][i][j] = derivative(data->entries[i][j], names[l]);
      }
    }
    return out;
  };
  data->base_derivs = derivs(base_prefix(space));
  if (kind == MetricKind::DirectionDependent) {
    data->fiber_derivs = derivs(fiber_prefix(space));
  } else {
    data->fiber_derivs.assign(d, ExprMatrix(d, std::vector<Expr>(d)));
  }
  data_ = std::move(data);
}

MetricField MetricField::identity(int d, Space space) {
  return diagonal(std::vector<Expr>(d, Expr(1.0)), space);
}

MetricField MetricField::diagonal(const std::vector<Expr>& diag, Space space) {
  const int d = static_cast<int>(diag.size());
  ExprMatrix m(d, std::vector<Expr>(d));
  for (int i = 0; i < d; ++i) m[i][i] = diag[i];
  return from_exprs(std::move(m), space);
}

MetricField MetricField::from_exprs(ExprMatrix entries, Space space, Signature signature) {
  const std::string fp(1, fiber_prefix(space));
  bool fiber = false;
  for (const auto& row : entries) {
    for (const auto& e : row) {
      for (const auto& v : e.variables()) {
        if (v.rfind(fp, 0) == 0) fiber = true;
      }
    }
  }
  return MetricField(std::move(entries), space,
                     fiber ? MetricKind::DirectionDependent : MetricKind::BaseOnly, signature);
}

MetricField MetricField::from_strings(const std::vector<std::vector<std::string>>& entries,
                                      Space space, Signature signature) {
  ExprMatrix m;
  for (const auto& row : entries) {
    std::vector<Expr> r;
    for (const auto& s : row) r.push_back(parse(s));
    m.push_back(std::move(r));
  }
  return from_exprs(std::move(m), space, signature);
}

int MetricField::dim() const { return data_->d; }
Space MetricField::space() const { return data_->space; }
MetricKind MetricField::kind() const { return data_->kind; }
Signature MetricField::signature() const { return data_->signature; }
const Expr& MetricField::entry(int i, int j) const { return data_->entries[i][j]; }
const ExprMatrix& MetricField::entries() const { return data_->entries; }
const Expr& MetricField::base_derivative(int i, int j, int l) const {
  return data_->base_derivs[l][i][j];
}
const Expr& MetricField::fiber_derivative(int i, int j, int l) const {
  return data_->fiber_derivs[l][i][j];
}

namespace {

Matrix evaluate_matrix(const ExprMatrix& m, const Env& env) {
  const int d = static_cast<int>(m.size());
  Matrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out(i, j) = m[i][j].eval(env);
  }
  return out;
}

}  // namespace

Matrix MetricField::evaluate_raw(const Env& env) const { return evaluate_matrix(data_->entries, env); }

Matrix MetricField::base_derivative_at(int l, const Env& env) const {
  Matrix m = evaluate_matrix(data_->base_derivs[l], env);
  return 0.5 * (m + m.transpose());
}

Matrix MetricField::fiber_derivative_at(int l, const Env& env) const {
  Matrix m = evaluate_matrix(data_->fiber_derivs[l], env);
  return 0.5 * (m + m.transpose());
}

MetricField MetricField::scaled(const Expr& factor) const {
  ExprMatrix m = data_->entries;
  for (auto& row : m) {
    for (auto& e : row) e = factor * e;
  }
  const std::string fp(1, fiber_prefix(space()));
  bool fiber = direction_dependent();
  for (const auto& v : factor.variables()) {
    if (v.rfind(fp, 0) == 0) fiber = true;
  }
  return MetricField(std::move(m), space(),
                     fiber ? MetricKind::DirectionDependent : MetricKind::BaseOnly, signature());
}

MetricField MetricField::with_signature(Signature s) const {
  return MetricField(data_->entries, space(), kind(), s);
}

void symmetrize_checked(Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12 * scale)) {
    throw DomainError("metric is not symmetric (deviation " + std::to_string(asym) + ")");
  }
  m = 0.5 * (m + m.transpose());
}

Matrix metric_at(const MetricField& g, const Vector& base, const Vector* fiber,
                 std::optional<bool> check_pd) {
  if (base.size() != g.dim()) throw InvalidArgument("metric_at: base point has wrong dimension");
  if (g.direction_dependent() != (fiber != nullptr)) {
    throw InvalidArgument(g.direction_dependent()
                              ? "metric_at: direction-dependent metric needs a fibre point"
                              : "metric_at: base-only metric takes no fibre point");
  }
  if (fiber != nullptr && fiber->size() != g.dim()) {
    throw InvalidArgument("metric_at: fibre point has wrong dimension");
  }
  Matrix m = g.evaluate_raw(coordinate_env(g.space(), base, fiber));
  if (!m.allFinite()) throw NonFinite("metric has non-finite entries");
  symmetrize_checked(m);
  if (check_pd.value_or(g.riemannian())) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw SingularMetric("metric is not positive definite");
  }
  return m;
}

Matrix inverse_symmetric(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0) || hi / lo > 1e12) throw SingularMetric("metric is singular or ill-conditioned");
  Matrix inv = m.fullPivLu().inverse();
  return 0.5 * (inv + inv.transpose());
}

Matrix inverse_metric_at(const MetricField& g, const Vector& base, const Vector* fiber) {
  return inverse_symmetric(metric_at(g, base, fiber, false));
}

double log_det_positive(const Matrix& m) {
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw SingularMetric("factorization failed");
  const Vector d = ldlt.vectorD();
  double s = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0)) throw SingularMetric("determinant is not positive");
    s += std::log(d[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// SmoothMap

struct SmoothMap::Data {
  int m = 0;
  std::vector<Expr> components;
  std::vector<std::vector<Expr>> first;                // [i][alpha]
  std::vector<std::vector<std::vector<Expr>>> second;  // [i][alpha][beta]
};

SmoothMap::SmoothMap(int source_dim, std::vector<Expr> components) {
  if (source_dim < 1) throw InvalidArgument("map source dimension must be >= 1");
  if (components.empty()) throw InvalidArgument("map needs at least one component");
  auto data = std::make_shared<Data>();
  data->m = source_dim;
  const auto allowed = allowed_names('a', source_dim);
  for (const auto& c : components) check_variables(c, allowed, "map component");
  data->components = std::move(components);
  const auto& names = coord_names('a', source_dim);
  const int n = static_cast<int>(data->components.size());
  data->first.resize(n);
  data->second.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < source_dim; ++a) {
      data->first[i].push_back(derivative(data->components[i], names[a]));
    }
    data->second[i].resize(source_dim);
    for (int a = 0; a < source_dim; ++a) {
      for (int b = 0; b < source_dim; ++b) {
        data->second[i][a].push_back(derivative(data->first[i][a], names[b]));
      }
    }
  }
  data_ = std::move(data);
}

SmoothMap SmoothMap::from_strings(int source_dim, const std::vector<std::string>& components) {
  std::vector<Expr> c;
  for (const auto& s : components) c.push_back(parse(s));
  return SmoothMap(source_dim, std::move(c));
}

SmoothMap SmoothMap::linear(const Matrix& c, const Vector& offset) {
  const int n = static_cast<int>(c.rows());
  const int m = static_cast<int>(c.cols());
  const auto& names = coord_names('a', m);
  std::vector<Expr> comps;
  for (int i = 0; i < n; ++i) {
    Expr e = offset.size() == n ? Expr(offset[i]) : Expr(0.0);
    for (int a = 0; a < m; ++a) e = e + Expr(c(i, a)) * Expr::variable(names[a]);
    comps.push_back(e);
  }
  return SmoothMap(m, std::move(comps));
}

SmoothMap SmoothMap::identity(int m) { return linear(Matrix::Identity(m, m)); }

int SmoothMap::source_dim() const { return data_->m; }
int SmoothMap::target_dim() const { return static_cast<int>(data_->components.size()); }
const Expr& SmoothMap::component(int i) const { return data_->components[i]; }
const std::vector<Expr>& SmoothMap::components() const { return data_->components; }
const Expr& SmoothMap::first_derivative(int i, int alpha) const { return data_->first[i][alpha]; }
const Expr& SmoothMap::second_derivative(int i, int alpha, int beta) const {
  return data_->second[i][alpha][beta];
}

Vector SmoothMap::value(const Vector& a) const {
  const Env env = coordinate_env(Space::Source, a);
  Vector out(target_dim());
  for (int i = 0; i < target_dim(); ++i) out[i] = data_->components[i].eval(env);
  return out;
}

Matrix SmoothMap::differential(const Vector& a) const {
  const Env env = coordinate_env(Space::Source, a);
  Matrix out(target_dim(), source_dim());
  for (int i = 0; i < target_dim(); ++i) {
    for (int al = 0; al < source_dim(); ++al) out(i, al) = data_->first[i][al].eval(env);
  }
  return out;
}

Matrix SmoothMap::hessian(int k, const Vector& a) const {
  const Env env = coordinate_env(Space::Source, a);
  Matrix out(source_dim(), source_dim());
  for (int al = 0; al < source_dim(); ++al) {
    for (int be = 0; be < source_dim(); ++be) out(al, be) = data_->second[k][al][be].eval(env);
  }
  return out;
}

SmoothMap SmoothMap::perturbed(const std::vector<Expr>& v, double eps) const {
  if (static_cast<int>(v.size()) != target_dim()) {
    throw InvalidArgument("variation has " + std::to_string(v.size()) + " components, map has " +
                          std::to_string(target_dim()));
  }
  std::vector<Expr> comps;
  for (int i = 0; i < target_dim(); ++i) comps.push_back(data_->components[i] + Expr(eps) * v[i]);
  return SmoothMap(source_dim(), std::move(comps));
}

Matrix map_differential(const SmoothMap& f, const Vector& a) { return f.differential(a); }

// ---------------------------------------------------------------------------
// Lagrangian

struct Lagrangian::Data {
  int d = 0;
  Space space = Space::Source;
  Expr l;
  ExprMatrix hessian;
};

Lagrangian::Lagrangian(int dim, Expr l, Space space) {
  auto data = std::make_shared<Data>();
  data->d = dim;
  data->space = space;
  check_variables(l, allowed_names(base_prefix(space), dim, fiber_prefix(space), dim), "Lagrangian");
  data->l = std::move(l);
  const auto& names = coord_names(fiber_prefix(space), dim);
  data->hessian.assign(dim, std::vector<Expr>(dim));
  for (int i = 0; i < dim; ++i) {
    const Expr di = derivative(data->l, names[i]);
    for (int j = 0; j < dim; ++j) data->hessian[i][j] = derivative(di, names[j]);
  }
  data_ = std::move(data);
}

int Lagrangian::dim() const { return data_->d; }
Space Lagrangian::space() const { return data_->space; }
const Expr& Lagrangian::expr() const { return data_->l; }
const Expr& Lagrangian::fiber_hessian_entry(int i, int j) const { return data_->hessian[i][j]; }

Matrix fundamental_tensor(const Lagrangian& l, const Vector& base, const Vector& fiber,
                          bool raw_hessian) {
  const Env env = coordinate_env(l.space(), base, &fiber);
  Matrix h = evaluate_matrix(
      [&] {
        ExprMatrix m(l.dim(), std::vector<Expr>(l.dim()));
        for (int i = 0; i < l.dim(); ++i) {
          for (int j = 0; j < l.dim(); ++j) m[i][j] = l.fiber_hessian_entry(i, j);
        }
        return m;
      }(),
      env);
  h = 0.5 * (h + h.transpose());
  return raw_hessian ? h : Matrix(0.5 * h);
}

// ---------------------------------------------------------------------------
// Symbolic linear algebra

namespace {

ExprMatrix minor_of(const ExprMatrix& m, int row, int col) {
  ExprMatrix out;
  for (int i = 0; i < static_cast<int>(m.size()); ++i) {
    if (i == row) continue;
    std::vector<Expr> r;
    for (int j = 0; j < static_cast<int>(m.size()); ++j) {
      if (j != col) r.push_back(m[i][j]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Expr symbolic_det(const ExprMatrix& m) {
  const int d = static_cast<int>(m.size());
  if (d == 0) return Expr(1.0);
  if (d == 1) return m[0][0];
  if (d == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  Expr det(0.0);
  for (int j = 0; j < d; ++j) {
    if (m[0][j].is_zero()) continue;
    const Expr term = m[0][j] * symbolic_det(minor_of(m, 0, j));
    det = (j % 2 == 0) ? det + term : det - term;
  }
  return det;
}

ExprMatrix symbolic_adjugate(const ExprMatrix& m) {
  const int d = static_cast<int>(m.size());
  ExprMatrix adj(d, std::vector<Expr>(d));
  if (d == 1) {
    adj[0][0] = Expr(1.0);
    return adj;
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Expr c = symbolic_det(minor_of(m, j, i));
      adj[i][j] = ((i + j) % 2 == 0) ? c : -c;
    }
  }
  return adj;
}

ExprMatrix symbolic_inverse(const ExprMatrix& m) {
  const Expr det = symbolic_det(m);
  ExprMatrix inv = symbolic_adjugate(m);
  for (auto& row : inv) {
    for (auto& e : row) e = e / det;
  }
  return inv;
}

}  // namespace glag

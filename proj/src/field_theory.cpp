#include "glag/field_theory.hpp"

#include <algorithm>
#include <cmath>

#include "glag/connections.hpp"
#include "glag/error.hpp"

namespace glag {

namespace {

using Expr2 = std::vector<std::vector<Expr>>;
using Expr3 = std::vector<Expr2>;

Expr2 square(int n) { return Expr2(n, std::vector<Expr>(n, Expr(0.0))); }

Expr yv(int i) { return Expr::variable(coord('y', i)); }

// T_ijk + T_jki + T_kij
Rank3 cyclic(const Rank3& t) {
  const int n = t.dim();
  Rank3 out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) out(i, j, k) = t(i, j, k) + t(j, k, i) + t(k, i, j);
    }
  }
  return out;
}

Rank3 zero_coefficients(int n) { return Rank3(n); }

void check_point(int n, const Vector& x, const Vector& y) {
  if (x.size() != n || y.size() != n) throw InvalidArgument("point dimension differs from the space");
}

}  // namespace

struct ConformalGLSpace::Data {
  MetricField gamma;
  Expr sigma;
  double kappa;
  int n;
  ExprRank3 chr;       // [i][j][k] = Gamma^i_jk
  Expr2 nonlinear;     // N^i_j
  std::vector<Expr> sig_delta;
  std::vector<Expr> sig_fiber;
  Expr2 fundamental;
  Expr2 em_h;
  Expr2 em_v;

  Data(MetricField g, Expr s, double k) : gamma(std::move(g)), sigma(std::move(s)), kappa(k), n(gamma.dim()) {}
};

ConformalGLSpace::ConformalGLSpace(MetricField gamma, Expr sigma, double kappa) {
  if (gamma.space() != Space::Target) throw InvalidArgument("gamma must use x coordinates");
  if (gamma.direction_dependent()) throw InvalidArgument("gamma must be base-only");
  if (!(kappa != 0.0 && std::isfinite(kappa))) throw InvalidArgument("gravific constant must be finite and non-zero");
  const int n = gamma.dim();
  const auto& xn = coord_names('x', n);
  const auto& yn = coord_names('y', n);
  for (const auto& v : sigma.variables()) {
    if (std::find(xn.begin(), xn.end(), v) == xn.end() && std::find(yn.begin(), yn.end(), v) == yn.end()) {
      throw InvalidArgument("sigma references unexpected variable '" + v + "'");
    }
  }
  auto d = std::make_shared<Data>(std::move(gamma), std::move(sigma), kappa);
  d->chr = symbolic_christoffel(d->gamma);
  d->nonlinear = square(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) d->nonlinear[i][j] = d->nonlinear[i][j] + d->chr[i][j][k] * yv(k);
    }
  }
  d->sig_fiber.resize(n);
  d->sig_delta.resize(n);
  for (int a = 0; a < n; ++a) d->sig_fiber[a] = derivative(d->sigma, yn[a]);
  for (int i = 0; i < n; ++i) {
    Expr s = derivative(d->sigma, xn[i]);
    for (int j = 0; j < n; ++j) s = s - d->nonlinear[j][i] * d->sig_fiber[j];
    d->sig_delta[i] = s;
  }
  const Expr conf = exp(Expr(2.0) * d->sigma);
  d->fundamental = square(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d->fundamental[i][j] = conf * d->gamma.entry(i, j);
  }
  d->em_h = square(n);
  d->em_v = square(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int p = 0; p < n; ++p) {
        d->em_h[i][j] = d->em_h[i][j] + (d->fundamental[i][p] * d->sig_delta[j] -
                                          d->fundamental[j][p] * d->sig_delta[i]) * yv(p);
        d->em_v[i][j] = d->em_v[i][j] + (d->fundamental[i][p] * d->sig_fiber[j] -
                                          d->fundamental[j][p] * d->sig_fiber[i]) * yv(p);
      }
    }
  }
  data_ = std::move(d);
}

int ConformalGLSpace::dim() const { return data_->n; }
const MetricField& ConformalGLSpace::gamma() const { return data_->gamma; }
const Expr& ConformalGLSpace::sigma() const { return data_->sigma; }
double ConformalGLSpace::kappa() const { return data_->kappa; }
const Expr& ConformalGLSpace::christoffel(int i, int j, int k) const { return data_->chr[i][j][k]; }
const Expr& ConformalGLSpace::nonlinear_connection(int i, int j) const { return data_->nonlinear[i][j]; }
const Expr& ConformalGLSpace::sigma_delta(int i) const { return data_->sig_delta[i]; }
const Expr& ConformalGLSpace::sigma_fiber(int a) const { return data_->sig_fiber[a]; }
const Expr& ConformalGLSpace::fundamental(int i, int j) const { return data_->fundamental[i][j]; }
const Expr& ConformalGLSpace::em_h(int i, int j) const { return data_->em_h[i][j]; }
const Expr& ConformalGLSpace::em_v(int i, int j) const { return data_->em_v[i][j]; }

Env ConformalGLSpace::env(const Vector& x, const Vector& y) const {
  check_point(dim(), x, y);
  return coordinate_env(Space::Target, x, &y);
}

double ConformalGLSpace::delta_x(const Expr& field, int i, const Vector& x, const Vector& y) const {
  const int n = dim();
  if (i < 0 || i >= n) throw InvalidArgument("coordinate index out of range");
  const Env e = env(x, y);
  double s = derivative(field, coord('x', i)).eval(e);
  for (int j = 0; j < n; ++j) {
    const Expr dy = derivative(field, coord('y', j));
    if (dy.is_zero()) continue;
    s -= data_->nonlinear[j][i].eval(e) * dy.eval(e);
  }
  return s;
}

DConnectionCoefficients DConnectionCoefficients::berwald(const ConformalGLSpace& sp) {
  const MetricField gamma = sp.gamma();
  const int n = sp.dim();
  return {[gamma](const Vector& x, const Vector&) { return glag::christoffel(gamma, x); },
          [n](const Vector&, const Vector&) { return zero_coefficients(n); }};
}

Matrix nonlinear_connection(const ConformalGLSpace& sp, const Vector& x, const Vector& y) {
  check_point(sp.dim(), x, y);
  const Rank3 g = christoffel(sp.gamma(), x);
  const int n = sp.dim();
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) out(i, j) += g(i, j, k) * y[k];
    }
  }
  return out;
}

double delta_x(const ConformalGLSpace& sp, const Expr& field, int i, const Vector& x, const Vector& y) {
  return sp.delta_x(field, i, x, y);
}

EmTensors em_tensors(const ConformalGLSpace& sp, const Vector& x, const Vector& y) {
  const int n = sp.dim();
  const Env e = sp.env(x, y);
  Matrix g(n, n);
  Vector sd(n), sf(n);
  for (int i = 0; i < n; ++i) {
    sd[i] = sp.sigma_delta(i).eval(e);
    sf[i] = sp.sigma_fiber(i).eval(e);
    for (int j = 0; j < n; ++j) g(i, j) = sp.fundamental(i, j).eval(e);
  }
  // Build from (g y)_i so that antisymmetry holds bit for bit.
  const Vector gy = g * y;
  EmTensors out{Matrix(n, n), Matrix(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.h(i, j) = gy[i] * sd[j] - gy[j] * sd[i];
      out.v(i, j) = gy[i] * sf[j] - gy[j] * sf[i];
    }
  }
  return out;
}

Curvature curvature(const MetricField& gamma, const Vector& x) {
  if (gamma.direction_dependent()) throw InvalidArgument("curvature needs a base-only metric");
  const int n = gamma.dim();
  if (x.size() != n) throw InvalidArgument("point dimension differs from the metric");
  const Space space = gamma.space();
  const char bp = base_prefix(space);
  const Env env = coordinate_env(space, x);
  const Matrix g = metric_at(gamma, x, nullptr, false);
  const Matrix ginv = inverse_symmetric(g);
  std::vector<Matrix> dg(n), ddg(static_cast<std::size_t>(n) * n);
  for (int l = 0; l < n; ++l) dg[l] = gamma.base_derivative_at(l, env);
  for (int l = 0; l < n; ++l) {
    for (int k = 0; k < n; ++k) {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = derivative(gamma.base_derivative(i, j, l), coord(bp, k)).eval(env);
      }
      ddg[static_cast<std::size_t>(l) * n + k] = 0.5 * (m + m.transpose());
    }
  }
  auto d2 = [&](int l, int k) -> const Matrix& { return ddg[static_cast<std::size_t>(l) * n + k]; };

  // First-kind symbols and their k-derivatives.
  Rank3 first(n);  // (p, j, l)
  Rank4 dfirst(n); // (p, j, l, k)
  for (int p = 0; p < n; ++p) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        first(p, j, l) = 0.5 * (dg[j](p, l) + dg[l](p, j) - dg[p](j, l));
        for (int k = 0; k < n; ++k) {
          dfirst(p, j, l, k) = 0.5 * (d2(j, k)(p, l) + d2(l, k)(p, j) - d2(p, k)(j, l));
        }
      }
    }
  }
  Rank3 chr(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        double s = 0.0;
        for (int p = 0; p < n; ++p) s += ginv(i, p) * first(p, j, l);
        chr(i, j, l) = s;
      }
    }
  }
  // d_k g^{-1} = -g^{-1} (d_k g) g^{-1}
  std::vector<Matrix> dginv(n);
  for (int k = 0; k < n; ++k) dginv[k] = -ginv * dg[k] * ginv;
  Rank4 dchr(n);  // (i, j, l, k) = d_k Gamma^i_jl
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int p = 0; p < n; ++p) s += dginv[k](i, p) * first(p, j, l) + ginv(i, p) * dfirst(p, j, l, k);
          dchr(i, j, l, k) = s;
        }
      }
    }
  }

  Curvature out;
  out.riemann = Rank4(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          // (k, l) part minus the same expression with k and l swapped.
          double kl = dchr(i, j, l, k);
          double lk = dchr(i, j, k, l);
          for (int m = 0; m < n; ++m) {
            kl += chr(i, m, k) * chr(m, j, l);
            lk += chr(i, m, l) * chr(m, j, k);
          }
          out.riemann(i, j, k, l) = kl - lk;
        }
      }
    }
  }
  out.ricci = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) out.ricci(i, j) += out.riemann(k, i, j, k);
    }
  }
  out.scalar = (ginv.array() * out.ricci.array()).sum();
  return out;
}

namespace {

struct PointState {
  int n;
  Env env;
  Matrix gamma, gamma_inv;
  Matrix nl;  // N^i_j
  Rank3 l, c;
  Vector sd, sf;
};

PointState point_state(const ConformalGLSpace& sp, const DConnectionCoefficients& conn, const Vector& x,
                       const Vector& y) {
  PointState s{sp.dim(), sp.env(x, y), {}, {}, {}, {}, {}, {}, {}};
  s.gamma = metric_at(sp.gamma(), x);
  s.gamma_inv = inverse_symmetric(s.gamma);
  s.nl = nonlinear_connection(sp, x, y);
  s.l = conn.h(x, y);
  s.c = conn.v(x, y);
  if (s.l.dim() != s.n || s.c.dim() != s.n) throw InvalidArgument("connection coefficients have the wrong dimension");
  s.sd = Vector(s.n);
  s.sf = Vector(s.n);
  for (int i = 0; i < s.n; ++i) {
    s.sd[i] = sp.sigma_delta(i).eval(s.env);
    s.sf[i] = sp.sigma_fiber(i).eval(s.env);
  }
  return s;
}

// Evaluated d M_ij / d x^k - N^l_k d M_ij / d y^l as (i, j, k).
Rank3 adapted_derivative(const PointState& s, const Expr3& dx, const Expr3& dy) {
  const int n = s.n;
  Rank3 out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double v = dx[i][j][k].eval(s.env);
        for (int l = 0; l < n; ++l) {
          if (!dy[i][j][l].is_zero()) v -= s.nl(l, k) * dy[i][j][l].eval(s.env);
        }
        out(i, j, k) = v;
      }
    }
  }
  return out;
}

Rank3 vertical_derivative(const PointState& s, const Expr3& dy) {
  const int n = s.n;
  Rank3 out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) out(i, j, k) = dy[i][j][k].eval(s.env);
    }
  }
  return out;
}

// D_k M_ij - C^m_ik M_mj - C^m_jk M_im, with D the supplied raw derivative.
Rank3 covariant_2(const Rank3& raw, const Matrix& m, const Rank3& coeff) {
  const int n = static_cast<int>(m.rows());
  Rank3 out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double v = raw(i, j, k);
        for (int p = 0; p < n; ++p) v -= coeff(p, i, k) * m(p, j) + coeff(p, j, k) * m(i, p);
        out(i, j, k) = v;
      }
    }
  }
  return out;
}

}  // namespace

SigmaTensors sigma_tensors(const ConformalGLSpace& sp, const DConnectionCoefficients& conn,
                           const Vector& x, const Vector& y) {
  const PointState s = point_state(sp, conn, x, y);
  const int n = s.n;
  SigmaTensors out;
  out.h_norm = s.sd.dot(s.gamma_inv * s.sd);
  out.v_norm = s.sf.dot(s.gamma_inv * s.sf);
  out.h_tensor = Matrix(n, n);
  out.v_tensor = Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double hd = sp.sigma_delta(i).is_zero() ? 0.0 : delta_x(sp, sp.sigma_delta(i), j, x, y);
      double vd = sp.sigma_fiber(i).is_zero() ? 0.0 : derivative(sp.sigma_fiber(i), coord('y', j)).eval(s.env);
      for (int m = 0; m < n; ++m) {
        hd -= s.l(m, i, j) * s.sd[m];
        vd -= s.c(m, i, j) * s.sf[m];
      }
      out.h_tensor(i, j) = hd + s.sd[i] * s.sd[j] - 0.5 * s.gamma(i, j) * out.h_norm;
      out.v_tensor(i, j) = vd + s.sf[i] * s.sf[j] - 0.5 * s.gamma(i, j) * out.v_norm;
    }
  }
  out.h_trace = (s.gamma_inv.array() * out.h_tensor.array()).sum();
  out.v_trace = (s.gamma_inv.array() * out.v_tensor.array()).sum();
  return out;
}

namespace {

Matrix t_tensor_from(const PointState& s, const SigmaTensors& st, const Curvature& cv, const Vector& y) {
  const int n = s.n;
  Matrix t(n, n);
  // gamma^{tp} d_p sigma
  const Vector sf_up = s.gamma_inv * s.sf;
  const double ricci_term = y.dot(cv.ricci * sf_up);  // r_st y^s gamma^{tp} d_p sigma
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = (n - 2) * (s.gamma(i, j) * st.h_trace - st.h_tensor(i, j));
      v += s.gamma(i, j) * ricci_term;
      double rt = 0.0;  // r^a_tja y^t
      for (int tt = 0; tt < n; ++tt) rt += cv.ricci(tt, j) * y[tt];
      v += s.sf[i] * rt;
      double last = 0.0;  // gamma_is gamma^{ap} d_p sigma r^s_tja y^t
      for (int ss = 0; ss < n; ++ss) {
        for (int a = 0; a < n; ++a) {
          for (int tt = 0; tt < n; ++tt) last += s.gamma(i, ss) * sf_up[a] * cv.riemann(ss, tt, j, a) * y[tt];
        }
      }
      t(i, j) = v - last;
    }
  }
  return t;
}

}  // namespace

Matrix t_tensor(const ConformalGLSpace& sp, const DConnectionCoefficients& conn, const Vector& x,
                const Vector& y) {
  const PointState s = point_state(sp, conn, x, y);
  return t_tensor_from(s, sigma_tensors(sp, conn, x, y), curvature(sp.gamma(), x), y);
}

EinsteinEquations einstein_equations(const ConformalGLSpace& sp, const DConnectionCoefficients& conn,
                                     const Vector& x, const Vector& y) {
  const PointState s = point_state(sp, conn, x, y);
  const SigmaTensors st = sigma_tensors(sp, conn, x, y);
  const Curvature cv = curvature(sp.gamma(), x);
  const Matrix t = t_tensor_from(s, st, cv, y);
  EinsteinEquations out;
  out.h_lhs = cv.ricci - 0.5 * cv.scalar * s.gamma + t;
  out.v_lhs = (2.0 - s.n) * (st.v_tensor - st.v_trace * s.gamma);
  out.energy_momentum_h = out.h_lhs / sp.kappa();
  out.energy_momentum_v = out.v_lhs / sp.kappa();
  return out;
}

MaxwellResiduals maxwell_residuals(const ConformalGLSpace& sp, const DConnectionCoefficients& conn,
                                   const Vector& x, const Vector& y) {
  const PointState s = point_state(sp, conn, x, y);
  const int n = s.n;
  const EmTensors em = em_tensors(sp, x, y);
  Expr3 fhx(n, square(n)), fhy(n, square(n)), fvx(n, square(n)), fvy(n, square(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        fhx[i][j][k] = derivative(sp.em_h(i, j), coord('x', k));
        fhy[i][j][k] = derivative(sp.em_h(i, j), coord('y', k));
        fvx[i][j][k] = derivative(sp.em_v(i, j), coord('x', k));
        fvy[i][j][k] = derivative(sp.em_v(i, j), coord('y', k));
      }
    }
  }
  const Rank3 fh_h = covariant_2(adapted_derivative(s, fhx, fhy), em.h, s.l);  // F_{ij|k}
  const Rank3 fh_v = covariant_2(vertical_derivative(s, fhy), em.h, s.c);      // F_ij|_k
  const Rank3 fv_h = covariant_2(adapted_derivative(s, fvx, fvy), em.v, s.l);  // f_{ij|k}
  const Rank3 fv_v = covariant_2(vertical_derivative(s, fvy), em.v, s.c);      // f_ij|_k

  const Curvature cv = curvature(sp.gamma(), x);
  const double conf = std::exp(2.0 * sp.sigma().eval(s.env));
  const Vector gy = conf * (s.gamma * y);  // g_ip y^p
  Rank3 curv(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int h = 0; h < n; ++h) {
          for (int q = 0; q < n; ++q) v += cv.riemann(h, q, j, k) * s.sf[h] * y[q];
        }
        curv(i, j, k) = gy[i] * v;
      }
    }
  }

  MaxwellResiduals out;
  const Rank3 c1 = cyclic(fh_h);
  const Rank3 c2 = cyclic(curv);
  const Rank3 c3 = cyclic(fh_v);
  const Rank3 c4 = cyclic(fv_h);
  out.first = Rank3(n);
  out.second = Rank3(n);
  out.third = cyclic(fv_v);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        out.first(i, j, k) = c1(i, j, k) + c2(i, j, k);
        out.second(i, j, k) = c3(i, j, k) + c4(i, j, k);
      }
    }
  }
  return out;
}

}  // namespace glag

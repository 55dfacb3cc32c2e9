#pragma once

// Truncated multivariate Taylor arithmetic (order 3, up to 3 variables) and a
// small forward-mode dual number. Used to evaluate closed-form scalar fields
// (mappings, manufactured solutions, Fourier features) together with their
// exact spatial derivatives.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace gcpinn {

inline constexpr int kMaxDim = 3;

/// Forward-mode dual number carrying P directional derivatives.
template <int P>
struct Dual {
  double v = 0.0;
  std::array<double, P> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants

  static Dual seed(double value, int direction) {
    Dual r(value);
    r.d[direction] = 1.0;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int p = 0; p < P; ++p) d[p] += o.d[p];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int p = 0; p < P; ++p) d[p] -= o.d[p];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int p = 0; p < P; ++p) d[p] = d[p] * o.v + v * o.d[p];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    for (int p = 0; p < P; ++p) d[p] = (d[p] - v * inv * o.d[p]) * inv;
    v *= inv;
    return *this;
  }
};

template <int P> Dual<P> operator+(Dual<P> a, const Dual<P>& b) { return a += b; }
template <int P> Dual<P> operator-(Dual<P> a, const Dual<P>& b) { return a -= b; }
template <int P> Dual<P> operator*(Dual<P> a, const Dual<P>& b) { return a *= b; }
template <int P> Dual<P> operator/(Dual<P> a, const Dual<P>& b) { return a /= b; }
template <int P> Dual<P> operator+(Dual<P> a, double b) { a.v += b; return a; }
template <int P> Dual<P> operator+(double b, Dual<P> a) { a.v += b; return a; }
template <int P> Dual<P> operator-(Dual<P> a, double b) { a.v -= b; return a; }
template <int P> Dual<P> operator-(double b, const Dual<P>& a) { return Dual<P>(b) - a; }
template <int P> Dual<P> operator*(Dual<P> a, double b) {
  a.v *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
template <int P> Dual<P> operator*(double b, Dual<P> a) { return a * b; }
template <int P> Dual<P> operator/(Dual<P> a, double b) { return a * (1.0 / b); }
template <int P> Dual<P> operator/(double b, const Dual<P>& a) { return Dual<P>(b) / a; }
template <int P> Dual<P> operator-(Dual<P> a) { return a * -1.0; }
template <int P> bool operator<(const Dual<P>& a, const Dual<P>& b) { return a.v < b.v; }

namespace detail {
template <int P>
Dual<P> chain(const Dual<P>& x, double f, double df) {
  Dual<P> r(f);
  for (int p = 0; p < P; ++p) r.d[p] = df * x.d[p];
  return r;
}
}  // namespace detail

template <int P> Dual<P> sin(const Dual<P>& x) { return detail::chain(x, std::sin(x.v), std::cos(x.v)); }
template <int P> Dual<P> cos(const Dual<P>& x) { return detail::chain(x, std::cos(x.v), -std::sin(x.v)); }
template <int P> Dual<P> exp(const Dual<P>& x) {
  const double e = std::exp(x.v);
  return detail::chain(x, e, e);
}
template <int P> Dual<P> log(const Dual<P>& x) { return detail::chain(x, std::log(x.v), 1.0 / x.v); }
template <int P> Dual<P> log1p(const Dual<P>& x) { return detail::chain(x, std::log1p(x.v), 1.0 / (1.0 + x.v)); }
template <int P> Dual<P> tanh(const Dual<P>& x) {
  const double t = std::tanh(x.v);
  return detail::chain(x, t, 1.0 - t * t);
}
template <int P> Dual<P> sqrt(const Dual<P>& x) {
  const double r = std::sqrt(x.v);
  return detail::chain(x, r, 0.5 / r);
}
template <int P> Dual<P> atan(const Dual<P>& x) {
  return detail::chain(x, std::atan(x.v), 1.0 / (1.0 + x.v * x.v));
}

inline double value_of(double x) { return x; }
template <int P> double value_of(const Dual<P>& x) { return x.v; }

/// Value, gradient, Hessian and third-derivative tensor of a scalar in n <= 3
/// variables. Higher tensors are stored in full (symmetric) form.
template <class S>
struct Taylor {
  int n = 1;
  S v{};
  S g[kMaxDim]{};
  S h[kMaxDim][kMaxDim]{};
  S t[kMaxDim][kMaxDim][kMaxDim]{};

  static Taylor constant(int dim, const S& c) {
    Taylor r;
    r.n = dim;
    r.v = c;
    return r;
  }
  static Taylor variable(int dim, const S& value, int axis) {
    Taylor r = constant(dim, value);
    r.g[axis] = S(1.0);
    return r;
  }

  Taylor& operator+=(const Taylor& o) {
    v += o.v;
    for (int i = 0; i < n; ++i) {
      g[i] += o.g[i];
      for (int j = 0; j < n; ++j) {
        h[i][j] += o.h[i][j];
        for (int k = 0; k < n; ++k) t[i][j][k] += o.t[i][j][k];
      }
    }
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    v -= o.v;
    for (int i = 0; i < n; ++i) {
      g[i] -= o.g[i];
      for (int j = 0; j < n; ++j) {
        h[i][j] -= o.h[i][j];
        for (int k = 0; k < n; ++k) t[i][j][k] -= o.t[i][j][k];
      }
    }
    return *this;
  }
  Taylor& operator*=(const S& c) {
    v *= c;
    for (int i = 0; i < n; ++i) {
      g[i] *= c;
      for (int j = 0; j < n; ++j) {
        h[i][j] *= c;
        for (int k = 0; k < n; ++k) t[i][j][k] *= c;
      }
    }
    return *this;
  }
  Taylor& operator+=(const S& c) {
    v += c;
    return *this;
  }
};

template <class S>
Taylor<S> operator+(Taylor<S> a, const Taylor<S>& b) { return a += b; }
template <class S>
Taylor<S> operator-(Taylor<S> a, const Taylor<S>& b) { return a -= b; }
template <class S>
Taylor<S> operator-(Taylor<S> a) { return a *= S(-1.0); }
template <class S>
  requires(!std::is_same_v<S, double>)
Taylor<S> operator*(Taylor<S> a, const S& c) { return a *= c; }
template <class S>
  requires(!std::is_same_v<S, double>)
Taylor<S> operator*(const S& c, Taylor<S> a) { return a *= c; }
template <class S>
Taylor<S> operator*(Taylor<S> a, double c) { return a *= S(c); }
template <class S>
Taylor<S> operator*(double c, Taylor<S> a) { return a *= S(c); }
template <class S>
  requires(!std::is_same_v<S, double>)
Taylor<S> operator+(Taylor<S> a, const S& c) { return a += c; }
template <class S>
  requires(!std::is_same_v<S, double>)
Taylor<S> operator-(Taylor<S> a, const S& c) { return a += -c; }
template <class S>
Taylor<S> operator+(Taylor<S> a, double c) { return a += S(c); }
template <class S>
Taylor<S> operator+(double c, Taylor<S> a) { return a += S(c); }
template <class S>
Taylor<S> operator-(Taylor<S> a, double c) { return a += S(-c); }
template <class S>
Taylor<S> operator-(double c, const Taylor<S>& a) { return (-a) + c; }

template <class S>
Taylor<S> operator*(const Taylor<S>& a, const Taylor<S>& b) {
  const int n = a.n;
  Taylor<S> r = Taylor<S>::constant(n, a.v * b.v);
  for (int i = 0; i < n; ++i) {
    r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int j = 0; j < n; ++j) {
      r.h[i][j] = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i][j];
      for (int k = 0; k < n; ++k) {
        r.t[i][j][k] = a.t[i][j][k] * b.v + a.h[i][j] * b.g[k] + a.h[i][k] * b.g[j] +
                       a.h[j][k] * b.g[i] + a.g[i] * b.h[j][k] + a.g[j] * b.h[i][k] +
                       a.g[k] * b.h[i][j] + a.v * b.t[i][j][k];
      }
    }
  }
  return r;
}

/// y = f(z) given f and its first three derivatives at z.v (Faa di Bruno).
template <class S>
Taylor<S> compose(const Taylor<S>& z, const S& f0, const S& f1, const S& f2, const S& f3) {
  const int n = z.n;
  Taylor<S> y = Taylor<S>::constant(n, f0);
  for (int i = 0; i < n; ++i) {
    y.g[i] = f1 * z.g[i];
    for (int j = 0; j < n; ++j) {
      y.h[i][j] = f2 * z.g[i] * z.g[j] + f1 * z.h[i][j];
      for (int k = 0; k < n; ++k) {
        y.t[i][j][k] = f3 * z.g[i] * z.g[j] * z.g[k] +
                       f2 * (z.h[i][j] * z.g[k] + z.h[i][k] * z.g[j] + z.h[j][k] * z.g[i]) +
                       f1 * z.t[i][j][k];
      }
    }
  }
  return y;
}

template <class S>
Taylor<S> reciprocal(const Taylor<S>& z) {
  const S r = S(1.0) / z.v;
  const S r2 = r * r;
  return compose(z, r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2);
}

template <class S>
Taylor<S> operator/(const Taylor<S>& a, const Taylor<S>& b) { return a * reciprocal(b); }
template <class S>
Taylor<S> operator/(const Taylor<S>& a, double c) { return a * (1.0 / c); }
template <class S>
Taylor<S> operator/(double c, const Taylor<S>& a) { return reciprocal(a) * c; }

template <class S>
Taylor<S> sin(const Taylor<S>& z) {
  using std::cos;
  using std::sin;
  const S s = sin(z.v), c = cos(z.v);
  return compose(z, s, c, -s, -c);
}
template <class S>
Taylor<S> cos(const Taylor<S>& z) {
  using std::cos;
  using std::sin;
  const S s = sin(z.v), c = cos(z.v);
  return compose(z, c, -s, -c, s);
}
template <class S>
Taylor<S> exp(const Taylor<S>& z) {
  using std::exp;
  const S e = exp(z.v);
  return compose(z, e, e, e, e);
}
template <class S>
Taylor<S> log(const Taylor<S>& z) {
  using std::log;
  const S r = S(1.0) / z.v;
  return compose(z, log(z.v), r, -r * r, 2.0 * r * r * r);
}
/// log(1 + z)
template <class S>
Taylor<S> log1p(const Taylor<S>& z) {
  using std::log1p;
  const S r = S(1.0) / (z.v + 1.0);
  return compose(z, log1p(z.v), r, -r * r, 2.0 * r * r * r);
}
template <class S>
Taylor<S> tanh(const Taylor<S>& z) {
  using std::tanh;
  const S th = tanh(z.v);
  const S s1 = 1.0 - th * th;
  return compose(z, th, s1, -2.0 * th * s1, s1 * (6.0 * th * th - 2.0));
}
template <class S>
Taylor<S> sigmoid(const Taylor<S>& z) {
  using std::exp;
  const S s = S(1.0) / (exp(-z.v) + 1.0);
  const S s1 = s * (1.0 - s);
  return compose(z, s, s1, s1 * (1.0 - 2.0 * s), s1 * (1.0 - 6.0 * s + 6.0 * s * s));
}
template <class S>
Taylor<S> sqrt(const Taylor<S>& z) {
  using std::sqrt;
  const S r = sqrt(z.v);
  const S ir = S(1.0) / r;
  const S ir3 = ir * ir * ir;
  return compose(z, r, 0.5 * ir, -0.25 * ir3, 0.375 * ir3 * ir * ir);
}
template <class S>
Taylor<S> atan(const Taylor<S>& z) {
  using std::atan;
  const S q = S(1.0) / (z.v * z.v + 1.0);
  return compose(z, atan(z.v), q, -2.0 * z.v * q * q, (6.0 * z.v * z.v - 2.0) * q * q * q);
}
/// Sign-aware absolute value; derivatives follow the branch of z.v.
template <class S>
Taylor<S> abs(const Taylor<S>& z) {
  return value_of(z.v) < 0.0 ? -z : z;
}

}  // namespace gcpinn

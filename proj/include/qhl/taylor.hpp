// Truncated bivariate Taylor series ("jets") with total-degree truncation.
//
// A Taylor<N> holds the coefficients c_{ij} of x^i y^j for i + j <= N of a
// smooth function expanded around a point. Arithmetic and elementary
// functions act on the series exactly up to degree N, which gives analytic
// partial derivatives of composite expressions without finite differences.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace qhl {

template <int N>
class Taylor {
  static_assert(N >= 0, "Taylor order must be non-negative");

 public:
  static constexpr int kOrder = N;
  static constexpr int kSize = (N + 1) * (N + 2) / 2;

  static constexpr int index(int i, int j) {
    const int d = i + j;
    return d * (d + 1) / 2 + j;
  }

  Taylor() = default;
  explicit Taylor(double value) { c_[0] = value; }

  static Taylor constant(double value) { return Taylor(value); }

  /// Seed for the first coordinate at x0.
  static Taylor x(double x0) {
    Taylor t(x0);
    if constexpr (N >= 1) t.c_[index(1, 0)] = 1.0;
    return t;
  }

  /// Seed for the second coordinate at y0.
  static Taylor y(double y0) {
    Taylor t(y0);
    if constexpr (N >= 1) t.c_[index(0, 1)] = 1.0;
    return t;
  }

  double value() const { return c_[0]; }
  double coeff(int i, int j) const { return c_[index(i, j)]; }
  double& coeff(int i, int j) { return c_[index(i, j)]; }

  /// Partial derivative d^{i+j} / dx^i dy^j at the expansion point.
  double partial(int i, int j) const { return c_[index(i, j)] * factorial(i) * factorial(j); }

  Taylor<(N > 0 ? N - 1 : 0)> dx() const {
    Taylor<(N > 0 ? N - 1 : 0)> out;
    for (int d = 0; d + 1 <= N; ++d)
      for (int j = 0; j <= d; ++j) {
        const int i = d - j;
        out.coeff(i, j) = (i + 1) * coeff(i + 1, j);
      }
    return out;
  }

  Taylor<(N > 0 ? N - 1 : 0)> dy() const {
    Taylor<(N > 0 ? N - 1 : 0)> out;
    for (int d = 0; d + 1 <= N; ++d)
      for (int j = 0; j <= d; ++j) {
        const int i = d - j;
        out.coeff(i, j) = (j + 1) * coeff(i, j + 1);
      }
    return out;
  }

  /// Euclidean Laplacian d_xx + d_yy.
  Taylor<(N > 1 ? N - 2 : 0)> laplacian() const {
    Taylor<(N > 1 ? N - 2 : 0)> out;
    for (int d = 0; d + 2 <= N; ++d)
      for (int j = 0; j <= d; ++j) {
        const int i = d - j;
        out.coeff(i, j) = (i + 2) * (i + 1) * coeff(i + 2, j) + (j + 2) * (j + 1) * coeff(i, j + 2);
      }
    return out;
  }

  template <int M>
  Taylor<M> truncate() const {
    static_assert(M <= N, "cannot raise the order of a truncated series");
    Taylor<M> out;
    for (int k = 0; k < Taylor<M>::kSize; ++k) out.raw()[k] = c_[k];
    return out;
  }

  std::array<double, kSize>& raw() { return c_; }
  const std::array<double, kSize>& raw() const { return c_; }

  Taylor& operator+=(const Taylor& o) {
    for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Taylor& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Taylor& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Taylor& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator+(Taylor a, double s) { return a += s; }
  friend Taylor operator+(double s, Taylor a) { return a += s; }
  friend Taylor operator-(Taylor a, double s) { return a -= s; }
  friend Taylor operator-(double s, const Taylor& a) { return -a + s; }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator/(Taylor a, double s) { return a *= (1.0 / s); }
  friend Taylor operator-(Taylor a) { return a *= -1.0; }

  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor out;
    for (int da = 0; da <= N; ++da)
      for (int ja = 0; ja <= da; ++ja) {
        const double ca = a.c_[index(da - ja, ja)];
        if (ca == 0.0) continue;
        for (int db = 0; db + da <= N; ++db)
          for (int jb = 0; jb <= db; ++jb)
            out.c_[index(da - ja + db - jb, ja + jb)] += ca * b.c_[index(db - jb, jb)];
      }
    return out;
  }

  friend Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }
  friend Taylor operator/(double s, const Taylor& b) { return reciprocal(b) * s; }

  /// f(a) given f^{(m)}(a0) / m! for m = 0..N, where a0 = a.value().
  static Taylor compose(const Taylor& a, const std::array<double, N + 1>& scaled_derivs) {
    Taylor shift = a;
    shift.c_[0] = 0.0;
    Taylor out(scaled_derivs[0]);
    Taylor power(1.0);
    for (int m = 1; m <= N; ++m) {
      power = power * shift;
      Taylor term = power;
      out += term *= scaled_derivs[m];
    }
    return out;
  }

  friend Taylor reciprocal(const Taylor& a) {
    const double a0 = a.value();
    std::array<double, N + 1> d{};
    double p = 1.0 / a0;
    for (int m = 0; m <= N; ++m) {
      d[m] = (m % 2 == 0 ? 1.0 : -1.0) * p;
      p /= a0;
    }
    return compose(a, d);
  }

  friend Taylor exp(const Taylor& a) {
    const double e = std::exp(a.value());
    std::array<double, N + 1> d{};
    double f = 1.0;
    for (int m = 0; m <= N; ++m) {
      if (m > 0) f *= m;
      d[m] = e / f;
    }
    return compose(a, d);
  }

  friend Taylor log(const Taylor& a) {
    const double a0 = a.value();
    std::array<double, N + 1> d{};
    d[0] = std::log(a0);
    double p = 1.0;
    for (int m = 1; m <= N; ++m) {
      p /= a0;
      d[m] = (m % 2 == 1 ? 1.0 : -1.0) * p / m;
    }
    return compose(a, d);
  }

  friend Taylor sin(const Taylor& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    std::array<double, N + 1> d{};
    const double cyc[4] = {s, c, -s, -c};
    double f = 1.0;
    for (int m = 0; m <= N; ++m) {
      if (m > 0) f *= m;
      d[m] = cyc[m % 4] / f;
    }
    return compose(a, d);
  }

  friend Taylor cos(const Taylor& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    std::array<double, N + 1> d{};
    const double cyc[4] = {c, -s, -c, s};
    double f = 1.0;
    for (int m = 0; m <= N; ++m) {
      if (m > 0) f *= m;
      d[m] = cyc[m % 4] / f;
    }
    return compose(a, d);
  }

  /// a^alpha for real alpha; requires a.value() > 0 unless alpha is a small integer.
  friend Taylor pow(const Taylor& a, double alpha) {
    const double a0 = a.value();
    std::array<double, N + 1> d{};
    double falling = 1.0;
    double f = 1.0;
    for (int m = 0; m <= N; ++m) {
      if (m > 0) {
        falling *= (alpha - (m - 1));
        f *= m;
      }
      d[m] = falling * std::pow(a0, alpha - m) / f;
    }
    return compose(a, d);
  }

  friend Taylor sqrt(const Taylor& a) { return pow(a, 0.5); }

 private:
  static constexpr double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  }

  std::array<double, kSize> c_{};
};

}  // namespace qhl

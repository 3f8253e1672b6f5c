// Real spherical harmonics evaluated on jets of the ambient coordinates.
#pragma once

#include <cmath>
#include <vector>

#include "qhl/taylor.hpp"

namespace qhl {

/// Position of Y_{l,m} in the flat ordering used below.
constexpr int harmonic_index(int l, int m) { return l * l + l + m; }

/// Normalization of the real harmonic Y_{l,m}, orthonormal on the unit sphere of area 4 pi.
inline double harmonic_norm(int l, int m) {
  const int am = m < 0 ? -m : m;
  const double ratio = std::exp(std::lgamma(l - am + 1.0) - std::lgamma(l + am + 1.0));
  const double n = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * ratio);
  return am == 0 ? n : n * std::sqrt(2.0);
}

/// All real harmonics Y_{l,m}, 0 <= l <= lmax, as functions of (X, Y, Z) on the
/// unit sphere. m > 0 selects the cosine type, m < 0 the sine type.
///
/// Uses P_l^m(Z) (1 - Z^2)^{-m/2} e^{i m phi} = Q_l^m(Z) (X + iY)^m, so every
/// harmonic is a polynomial in the ambient coordinates and no square roots of
/// the jets are needed.
template <int N>
std::vector<Taylor<N>> real_harmonics(int lmax, const Taylor<N>& X, const Taylor<N>& Y,
                                      const Taylor<N>& Z) {
  std::vector<Taylor<N>> out(static_cast<std::size_t>((lmax + 1) * (lmax + 1)));
  Taylor<N> re(1.0), im(0.0);  // real and imaginary parts of (X + iY)^m
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) {
      Taylor<N> re_next = re * X - im * Y;
      im = re * Y + im * X;
      re = re_next;
    }
    double dfact = 1.0;
    for (int i = 1; i <= 2 * m - 1; i += 2) dfact *= i;
    Taylor<N> q_prev2;
    Taylor<N> q_prev(dfact);
    for (int l = m; l <= lmax; ++l) {
      Taylor<N> q;
      if (l == m) {
        q = q_prev;
      } else if (l == m + 1) {
        q = Z * q_prev * (2.0 * m + 1.0);
        q_prev2 = q_prev;
        q_prev = q;
      } else {
        q = (Z * q_prev * (2.0 * l - 1.0) - q_prev2 * (l + m - 1.0)) * (1.0 / (l - m));
        q_prev2 = q_prev;
        q_prev = q;
      }
      if (m == 0) {
        out[harmonic_index(l, 0)] = q * harmonic_norm(l, 0);
      } else {
        out[harmonic_index(l, m)] = q * re * harmonic_norm(l, m);
        out[harmonic_index(l, -m)] = q * im * harmonic_norm(l, -m);
      }
    }
  }
  return out;
}

}  // namespace qhl

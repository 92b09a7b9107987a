#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cohgram/error.hpp"

// Complex FFT, self-contained: iterative radix-2 for power-of-two sizes,
// Bluestein's chirp-z for everything else (the analytic signal needs
// full-length transforms of arbitrary N).

namespace cohgram::fft {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

inline void transform_pow2(std::vector<cdouble>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const cdouble wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cdouble u = a[i + k];
        const cdouble v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein: expresses an arbitrary-length DFT as a circular convolution
// carried out with power-of-two FFTs.
inline void transform_bluestein(std::vector<cdouble>& a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = next_pow2(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;

  // chirp w[k] = exp(sign * i*pi*k^2/n); k^2 taken mod 2n to keep the
  // argument small before the trig call
  std::vector<cdouble> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    const double ang = sign * kPi * static_cast<double>(k2) / static_cast<double>(n);
    w[k] = cdouble(std::cos(ang), std::sin(ang));
  }

  std::vector<cdouble> x(m, cdouble(0.0, 0.0));
  std::vector<cdouble> y(m, cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * w[k];
  y[0] = std::conj(w[0]);
  for (std::size_t k = 1; k < n; ++k) {
    y[k] = std::conj(w[k]);
    y[m - k] = std::conj(w[k]);
  }

  transform_pow2(x, false);
  transform_pow2(y, false);
  for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
  transform_pow2(x, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * inv_m * w[k];
}

}  // namespace detail

// In-place DFT. `inverse` applies the conventional 1/n scaling.
inline void transform(std::vector<cdouble>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (n == 0) return;
  if (is_pow2(n)) {
    detail::transform_pow2(a, inverse);
  } else {
    detail::transform_bluestein(a, inverse);
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= inv_n;
  }
}

inline std::vector<cdouble> forward(const std::vector<double>& x) {
  std::vector<cdouble> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = cdouble(x[i], 0.0);
  transform(a, false);
  return a;
}

}  // namespace cohgram::fft

#pragma once

// Reference computations written independently of the library code paths.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double bernoulli_poly(int n, double x) {
  switch (n) {
    case 2: return x * x - x + 1.0 / 6.0;
    case 4: return x * x * x * x - 2.0 * x * x * x + x * x - 1.0 / 30.0;
    case 6: return std::pow(x, 6) - 3.0 * std::pow(x, 5) + 2.5 * std::pow(x, 4) - 0.5 * x * x + 1.0 / 42.0;
  }
  throw std::invalid_argument("bernoulli_poly: unsupported degree");
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// 1 + 2 sum_{k>=1} cos(2 pi k t) / k^(2s) in closed form.
inline double periodic_kernel_untruncated(int s, double t) {
  const double frac = t - std::floor(t);
  const double series = std::pow(-1.0, s - 1) * std::pow(2.0 * std::numbers::pi, 2 * s) *
                        bernoulli_poly(2 * s, frac) / (2.0 * factorial(2 * s));
  return 1.0 + 2.0 * series;
}

/// Truncated kernel by plain summation in increasing k.
inline double periodic_kernel_sum(int s, int k_max, double x, double y) {
  double sum = 1.0;
  for (int k = 1; k <= k_max; ++k) sum += 2.0 * std::cos(2.0 * std::numbers::pi * k * (x - y)) / std::pow(k, 2.0 * s);
  return sum;
}

/// Tail bound 2 sum_{k > k_max} k^(-2s) by summing far enough.
inline double periodic_tail(int s, int k_max) {
  double t = 0.0;
  for (int k = 2000000; k > k_max; --k) t += 1.0 / std::pow(k, 2.0 * s);
  return 2.0 * t;
}

using Dense = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Dense a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Dense dense_inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

/// Closed-form OLS slope of ln y on ln x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle

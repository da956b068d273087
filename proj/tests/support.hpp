#pragma once

#include <cmath>
#include <random>
#include <span>

#include "qmet/matrix.hpp"

namespace qmet::testing {

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = g(rng);
  return a;
}

/// A^T A + eps I with Gaussian A.
inline SymMatrix random_spd(std::size_t n, std::mt19937_64& rng, double eps = 0.1) {
  const Matrix a = gaussian_matrix(n, n, rng);
  Matrix m = a.transpose() * a;
  for (std::size_t i = 0; i < n; ++i) m(i, i) += eps;
  return SymMatrix(m);
}

inline AntisymMatrix random_antisym(std::size_t n, std::mt19937_64& rng) {
  return AntisymMatrix(gaussian_matrix(n, n, rng));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Laplace expansion along the first row.
inline double cofactor_det(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 1) return m(0, 0);
  double det = 0;
  for (std::size_t c = 0; c < n; ++c) {
    Matrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, k = 0; j < n; ++j)
        if (j != c) minor(i - 1, k++) = m(i, j);
    det += (c % 2 ? -1.0 : 1.0) * m(0, c) * cofactor_det(minor);
  }
  return det;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix gauss_jordan_inverse(Matrix a) {
  const std::size_t n = a.rows();
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(c, j), a(p, j));
      std::swap(inv(c, j), inv(p, j));
    }
    const double piv = a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) /= piv;
      inv(c, j) /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

/// A_j = [Q^-1_{j..n}]_11 of the reordered matrix, by direct inversion.
inline Vector inverse_step_terms(const SymMatrix& Q, std::span<const std::size_t> order) {
  const std::size_t n = order.size();
  Vector a(n);
  for (std::size_t j = 0; j < n; ++j) {
    Matrix block(n - j, n - j);
    for (std::size_t r = j; r < n; ++r)
      for (std::size_t c = j; c < n; ++c) block(r - j, c - j) = Q(order[r], order[c]);
    a[j] = gauss_jordan_inverse(block)(0, 0);
  }
  return a;
}

/// min over the probability simplex of sum_j c_j / gamma_j, by repeated
/// golden-section searches over the split of each pair gamma_i + gamma_j.
inline double simplex_minimum(const Vector& c) {
  const std::size_t n = c.size();
  Vector g(n, 1.0 / static_cast<double>(n));
  auto total = [&] {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += c[j] / g[j];
    return s;
  };
  if (n == 1) return total();
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double prev = total();
  for (int sweep = 0; sweep < 2000; ++sweep) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double m = g[i] + g[j];
        auto f = [&](double x) { return c[i] / x + c[j] / (m - x); };
        double lo = 0, hi = m;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 200 && hi - lo > 1e-16 * m; ++it) {
          if (f1 < f2) {
            hi = x2, x2 = x1, f2 = f1;
            x1 = hi - phi * (hi - lo), f1 = f(x1);
          } else {
            lo = x1, x1 = x2, f1 = f2;
            x2 = lo + phi * (hi - lo), f2 = f(x2);
          }
        }
        g[i] = (lo + hi) / 2;
        g[j] = m - g[i];
      }
    const double cur = total();
    if (prev - cur <= 1e-15 * cur) return cur;
    prev = cur;
  }
  return total();
}

}  // namespace qmet::testing

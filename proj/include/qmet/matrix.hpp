#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace qmet {

using cplx = std::complex<double>;
using Vector = std::vector<double>;
using CVector = std::vector<cplx>;

/// Dense row-major matrix. Sizes here are tiny (n <= 20, d <= 3), so this is
/// a plain value type with no expression templates or blocking.
template <typename T>
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Dense(std::initializer_list<std::initializer_list<T>> rows);

  static Dense identity(std::size_t n);
  static Dense diagonal(std::span<const T> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  Dense transpose() const;
  /// Conjugate transpose (plain transpose for real matrices).
  Dense adjoint() const;
  T trace() const;

  Dense& operator+=(const Dense& o);
  Dense& operator-=(const Dense& o);
  Dense& operator*=(T s);

  bool operator==(const Dense&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = Dense<double>;
using CMatrix = Dense<cplx>;

template <typename T>
Dense<T> operator+(Dense<T> a, const Dense<T>& b) {
  return a += b;
}
template <typename T>
Dense<T> operator-(Dense<T> a, const Dense<T>& b) {
  return a -= b;
}
template <typename T>
Dense<T> operator*(Dense<T> a, T s) {
  return a *= s;
}
template <typename T>
Dense<T> operator*(T s, Dense<T> a) {
  return a *= s;
}
template <typename T>
Dense<T> operator*(const Dense<T>& a, const Dense<T>& b);
template <typename T>
std::vector<T> operator*(const Dense<T>& a, std::span<const T> x);

CMatrix to_complex(const Matrix& m);
Matrix real_part(const CMatrix& m);
Matrix imag_part(const CMatrix& m);
double frobenius_norm(const Matrix& m);
double frobenius_norm(const CMatrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Real symmetric matrix; symmetrized as (m + m^T)/2 on construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : SymMatrix(Matrix(rows)) {}

  static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }
  static SymMatrix diagonal(std::span<const double> diag) {
    return SymMatrix(Matrix::diagonal(diag));
  }

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& dense() const noexcept { return m_; }
  double trace() const { return m_.trace(); }
  double max_diagonal() const;

 private:
  Matrix m_;
};

/// Real antisymmetric matrix; built as (m - m^T)/2, so the diagonal is zero.
class AntisymMatrix {
 public:
  AntisymMatrix() = default;
  explicit AntisymMatrix(Matrix m);
  static AntisymMatrix zero(std::size_t n) { return AntisymMatrix(Matrix(n, n)); }
  /// n = 2 convenience: U(0,1) = u12, U(1,0) = -u12.
  static AntisymMatrix from_upper(std::size_t n, std::span<const double> upper);

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& dense() const noexcept { return m_; }

 private:
  Matrix m_;
};

/// Complex Hermitian matrix; built as (m + m^dagger)/2.
class HermMatrix {
 public:
  HermMatrix() = default;
  explicit HermMatrix(CMatrix m);
  static HermMatrix outer(std::span<const cplx> v);

  std::size_t dim() const noexcept { return m_.rows(); }
  cplx operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const CMatrix& dense() const noexcept { return m_; }

 private:
  CMatrix m_;
};

/// Cholesky factor: lower triangular with strictly positive diagonal.
class LowerTriangular {
 public:
  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& dense() const noexcept { return m_; }

 private:
  friend std::optional<LowerTriangular> try_cholesky(const SymMatrix&);
  explicit LowerTriangular(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Relative Cholesky pivot tolerance; the absolute cut-off is this times the
/// largest diagonal entry of the factored matrix.
inline constexpr double kPivotRelTol = 1e-12;

double pivot_tolerance(const SymMatrix& m);

std::optional<LowerTriangular> try_cholesky(const SymMatrix& m);
/// Throws NotPositiveDefinite when a pivot falls below pivot_tolerance(m).
LowerTriangular cholesky(const SymMatrix& m);

/// 1-based j: drops the first j-1 rows and columns.
SymMatrix trailing_submatrix(const SymMatrix& m, std::size_t j);
/// Rows/columns selected (and reordered) by 0-based indices.
SymMatrix principal_submatrix(const SymMatrix& m, std::span<const std::size_t> idx);

/// Cholesky-based for SPD input, LU with partial pivoting otherwise.
double determinant(const SymMatrix& m);
double determinant(const Matrix& m);

SymMatrix inverse(const SymMatrix& m);
Matrix inverse(const LowerTriangular& l);
/// Solves (L L^T) x = b.
Vector cholesky_solve(const LowerTriangular& l, std::span<const double> b);

struct SymEigen {
  Vector values;  // ascending
  Matrix vectors;  // columns
};
struct HermEigen {
  Vector values;  // ascending
  CMatrix vectors;  // columns
};

SymEigen symmetric_eigen(const SymMatrix& m);
HermEigen hermitian_eigen(const HermMatrix& m);

/// Largest |eigenvalue|.
double spectral_norm(const HermMatrix& m);
double spectral_norm(const SymMatrix& m);
/// Largest singular value.
double spectral_norm(const Matrix& m);
double spectral_norm(const CMatrix& m);

/// Sum of singular values, Tr sqrt(A^dagger A).
double nuclear_norm(const Matrix& m);
double nuclear_norm(const CMatrix& m);

/// Principal square root of a positive semidefinite matrix.
SymMatrix sqrt_psd(const SymMatrix& m);

}  // namespace qmet

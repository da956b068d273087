#include "qmet/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmet/errors.hpp"

namespace qmet {

namespace {

double conj_of(double x) { return x; }
cplx conj_of(cplx x) { return std::conj(x); }
double real_of(double x) { return x; }
double real_of(cplx x) { return x.real(); }

}  // namespace

template <typename T>
Dense<T>::Dense(std::initializer_list<std::initializer_list<T>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorKind::Validation, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

template <typename T>
Dense<T> Dense<T>::identity(std::size_t n) {
  Dense m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
  return m;
}

template <typename T>
Dense<T> Dense<T>::diagonal(std::span<const T> diag) {
  Dense m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

template <typename T>
Dense<T> Dense<T>::transpose() const {
  Dense t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

template <typename T>
Dense<T> Dense<T>::adjoint() const {
  Dense t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = conj_of((*this)(i, j));
  return t;
}

template <typename T>
T Dense<T>::trace() const {
  T s{};
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

template <typename T>
Dense<T>& Dense<T>::operator+=(const Dense& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::Validation, "shape mismatch in +");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

template <typename T>
Dense<T>& Dense<T>::operator-=(const Dense& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::Validation, "shape mismatch in -");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

template <typename T>
Dense<T>& Dense<T>::operator*=(T s) {
  for (auto& x : data_) x *= s;
  return *this;
}

template <typename T>
Dense<T> operator*(const Dense<T>& a, const Dense<T>& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::Validation, "shape mismatch in *");
  Dense<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <typename T>
std::vector<T> operator*(const Dense<T>& a, std::span<const T> x) {
  if (a.cols() != x.size()) throw Error(ErrorKind::Validation, "shape mismatch in matvec");
  std::vector<T> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

template class Dense<double>;
template class Dense<cplx>;
template Matrix operator*(const Matrix&, const Matrix&);
template CMatrix operator*(const CMatrix&, const CMatrix&);
template Vector operator*(const Matrix&, std::span<const double>);
template CVector operator*(const CMatrix&, std::span<const cplx>);

CMatrix to_complex(const Matrix& m) {
  CMatrix c(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.data().size(); ++k) c.data()[k] = m.data()[k];
  return c;
}

Matrix real_part(const CMatrix& m) {
  Matrix r(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.data().size(); ++k) r.data()[k] = m.data()[k].real();
  return r;
}

Matrix imag_part(const CMatrix& m) {
  Matrix r(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.data().size(); ++k) r.data()[k] = m.data()[k].imag();
  return r;
}

double frobenius_norm(const Matrix& m) {
  double s = 0;
  for (double x : m.data()) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const CMatrix& m) {
  double s = 0;
  for (cplx x : m.data()) s += std::norm(x);
  return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::Validation, "shape mismatch");
  double d = 0;
  for (std::size_t k = 0; k < a.data().size(); ++k) d = std::max(d, std::abs(a.data()[k] - b.data()[k]));
  return d;
}

SymMatrix::SymMatrix(Matrix m) {
  if (!m.square() || m.rows() == 0) throw Error(ErrorKind::Validation, "SymMatrix needs a non-empty square matrix");
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = s;
      m(j, i) = s;
    }
  m_ = std::move(m);
}

double SymMatrix::max_diagonal() const {
  double d = m_(0, 0);
  for (std::size_t i = 1; i < dim(); ++i) d = std::max(d, m_(i, i));
  return d;
}

AntisymMatrix::AntisymMatrix(Matrix m) {
  if (!m.square() || m.rows() == 0) throw Error(ErrorKind::Validation, "AntisymMatrix needs a non-empty square matrix");
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = 0.5 * (m(i, j) - m(j, i));
      m(i, j) = a;
      m(j, i) = -a;
    }
  }
  m_ = std::move(m);
}

AntisymMatrix AntisymMatrix::from_upper(std::size_t n, std::span<const double> upper) {
  if (upper.size() != n * (n - 1) / 2) throw Error(ErrorKind::Validation, "wrong number of upper entries");
  Matrix m(n, n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = upper[k];
      m(j, i) = -upper[k];
      ++k;
    }
  return AntisymMatrix(std::move(m));
}

HermMatrix::HermMatrix(CMatrix m) {
  if (!m.square() || m.rows() == 0) throw Error(ErrorKind::Validation, "HermMatrix needs a non-empty square matrix");
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx h = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = h;
      m(j, i) = std::conj(h);
    }
  }
  m_ = std::move(m);
}

HermMatrix HermMatrix::outer(std::span<const cplx> v) {
  CMatrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return HermMatrix(std::move(m));
}

double pivot_tolerance(const SymMatrix& m) { return kPivotRelTol * std::max(m.max_diagonal(), 0.0); }

std::optional<LowerTriangular> try_cholesky(const SymMatrix& m) {
  const std::size_t n = m.dim();
  const double tol = pivot_tolerance(m);
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tol)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return LowerTriangular(std::move(l));
}

LowerTriangular cholesky(const SymMatrix& m) {
  auto l = try_cholesky(m);
  if (!l) throw Error(ErrorKind::NotPositiveDefinite, "Cholesky pivot below tolerance");
  return *std::move(l);
}

SymMatrix trailing_submatrix(const SymMatrix& m, std::size_t j) {
  if (j < 1 || j > m.dim()) throw Error(ErrorKind::IndexOutOfRange, "trailing index " + std::to_string(j));
  std::vector<std::size_t> idx(m.dim() - j + 1);
  std::iota(idx.begin(), idx.end(), j - 1);
  return principal_submatrix(m, idx);
}

SymMatrix principal_submatrix(const SymMatrix& m, std::span<const std::size_t> idx) {
  Matrix s(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    if (idx[a] >= m.dim()) throw Error(ErrorKind::IndexOutOfRange, "submatrix index " + std::to_string(idx[a]));
    for (std::size_t b = 0; b < idx.size(); ++b) s(a, b) = m(idx[a], idx[b]);
  }
  return SymMatrix(std::move(s));
}

double determinant(const Matrix& m) {
  if (!m.square()) throw Error(ErrorKind::Validation, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  Matrix a = m;
  double det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0) return 0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

double determinant(const SymMatrix& m) {
  if (auto l = try_cholesky(m)) {
    double p = 1;
    for (std::size_t j = 0; j < m.dim(); ++j) p *= (*l)(j, j);
    return p * p;
  }
  return determinant(m.dense());
}

Matrix inverse(const LowerTriangular& l) {
  const std::size_t n = l.dim();
  Matrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    inv(c, c) = 1.0 / l(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      double s = 0;
      for (std::size_t k = c; k < i; ++k) s -= l(i, k) * inv(k, c);
      inv(i, c) = s / l(i, i);
    }
  }
  return inv;
}

Vector cholesky_solve(const LowerTriangular& l, std::span<const double> b) {
  const std::size_t n = l.dim();
  if (b.size() != n) throw Error(ErrorKind::Validation, "rhs size mismatch");
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
    y[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= l(k, i) * y[k];
    y[i] /= l(i, i);
  }
  return y;
}

SymMatrix inverse(const SymMatrix& m) {
  const Matrix linv = inverse(cholesky(m));
  return SymMatrix(linv.transpose() * linv);
}

namespace {

template <typename T>
T unit_phase(T x) {
  const double a = std::abs(x);
  return a == 0 ? T{1} : x / a;
}

// Cyclic Jacobi for real symmetric (T = double) and Hermitian (T = cplx)
// matrices. Each rotation first removes the phase of the pivot entry, then
// applies the real 2x2 Jacobi rotation.
template <typename T>
std::pair<Vector, Dense<T>> jacobi(Dense<T> a) {
  const std::size_t n = a.rows();
  Dense<T> v = Dense<T>::identity(n);
  double total = 0;
  for (T x : a.data()) total += std::norm(x);
  const double stop = 1e-30 * total;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off <= stop || off == 0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const T apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0) continue;
        const double app = real_of(a(p, p));
        const double aqq = real_of(a(q, q));
        const double tau = (aqq - app) / (2 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t);
        const double s = t * c;
        const T ph = conj_of(unit_phase(apq));
        // G = diag(1, ph) * [[c, s], [-s, c]]
        const T gpp = c, gpq = s, gqp = -s * ph, gqq = c * ph;
        for (std::size_t k = 0; k < n; ++k) {
          const T akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
          const T vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const T apk = a(p, k), aqk = a(q, k);
          a(p, k) = conj_of(gpp) * apk + conj_of(gqp) * aqk;
          a(q, k) = conj_of(gpq) * apk + conj_of(gqq) * aqk;
        }
        a(p, q) = T{};
        a(q, p) = T{};
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return real_of(a(x, x)) < real_of(a(y, y)); });
  Vector values(n);
  Dense<T> vectors(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    values[c] = real_of(a(order[c], order[c]));
    for (std::size_t r = 0; r < n; ++r) vectors(r, c) = v(r, order[c]);
  }
  return {std::move(values), std::move(vectors)};
}

// Jordan-Wielandt embedding [[0, A], [A^dagger, 0]]; its eigenvalues are the
// singular values of A with both signs, resolved to absolute accuracy.
HermEigen jordan_wielandt(const CMatrix& a) {
  const std::size_t r = a.rows(), c = a.cols();
  CMatrix h(r + c, r + c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      h(i, r + j) = a(i, j);
      h(r + j, i) = std::conj(a(i, j));
    }
  return hermitian_eigen(HermMatrix(std::move(h)));
}

}  // namespace

SymEigen symmetric_eigen(const SymMatrix& m) {
  auto [values, vectors] = jacobi<double>(m.dense());
  return {std::move(values), std::move(vectors)};
}

HermEigen hermitian_eigen(const HermMatrix& m) {
  auto [values, vectors] = jacobi<cplx>(m.dense());
  return {std::move(values), std::move(vectors)};
}

double spectral_norm(const HermMatrix& m) {
  const auto e = hermitian_eigen(m);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

double spectral_norm(const SymMatrix& m) {
  const auto e = symmetric_eigen(m);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

double spectral_norm(const CMatrix& m) { return std::max(0.0, jordan_wielandt(m).values.back()); }

double spectral_norm(const Matrix& m) { return spectral_norm(to_complex(m)); }

double nuclear_norm(const CMatrix& m) {
  const auto e = jordan_wielandt(m);
  double s = 0;
  for (double x : e.values) s += std::abs(x);
  return 0.5 * s;
}

double nuclear_norm(const Matrix& m) { return nuclear_norm(to_complex(m)); }

SymMatrix sqrt_psd(const SymMatrix& m) {
  const auto e = symmetric_eigen(m);
  const std::size_t n = m.dim();
  Matrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt(std::max(0.0, e.values[k]));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) += s * e.vectors(i, k) * e.vectors(j, k);
  }
  return SymMatrix(std::move(r));
}

}  // namespace qmet

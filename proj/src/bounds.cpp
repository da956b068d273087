#include "qmet/bounds.hpp"

#include <cmath>
#include <limits>

#include "qmet/errors.hpp"
#include "qmet/stepwise.hpp"

namespace qmet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LowerTriangular qfim_factor(const SymMatrix& Q) {
  auto l = try_cholesky(Q);
  if (!l) throw Error(ErrorKind::SingularQfim, "QFIM is not positive definite");
  return *std::move(l);
}

SymMatrix qfim_inverse(const SymMatrix& Q) {
  const Matrix linv = inverse(qfim_factor(Q));
  return SymMatrix(linv.transpose() * linv);
}

void check_dims(const SymMatrix& Q, const AntisymMatrix& U) {
  if (Q.dim() != U.dim()) throw Error(ErrorKind::Validation, "Q and U dimensions differ");
}

void check_dims(const SymMatrix& Q, const WeightMatrix& W) {
  if (Q.dim() != W.dim()) throw Error(ErrorKind::Validation, "Q and W dimensions differ");
}

Matrix sqrt_weight(const WeightMatrix& W) {
  if (W.is_diagonal()) {
    Vector d = W.diag();
    for (double& x : d) x = std::sqrt(x);
    return Matrix::diagonal(d);
  }
  return sqrt_psd(W.matrix()).dense();
}

}  // namespace

WeightMatrix WeightMatrix::identity(std::size_t n) { return WeightMatrix(SymMatrix::identity(n), true); }

WeightMatrix WeightMatrix::diagonal(std::span<const double> omega) {
  if (omega.empty()) throw Error(ErrorKind::Validation, "weight matrix needs at least one entry");
  for (double w : omega)
    if (!(w > 0) || !std::isfinite(w)) throw Error(ErrorKind::Validation, "weights must be positive and finite");
  return WeightMatrix(SymMatrix::diagonal(omega), true);
}

WeightMatrix WeightMatrix::full(const SymMatrix& w) {
  if (!try_cholesky(w)) throw Error(ErrorKind::Validation, "weight matrix must be positive definite");
  bool diag = true;
  for (std::size_t i = 0; i < w.dim(); ++i)
    for (std::size_t j = 0; j < w.dim(); ++j)
      if (i != j && w(i, j) != 0) diag = false;
  return WeightMatrix(w, diag);
}

Vector WeightMatrix::diag() const {
  Vector d(dim());
  for (std::size_t i = 0; i < dim(); ++i) d[i] = w_(i, i);
  return d;
}

WeightMatrix WeightMatrix::scaled(double c) const {
  if (!(c > 0)) throw Error(ErrorKind::Validation, "weight scale must be positive");
  return WeightMatrix(SymMatrix(w_.dense() * c), diagonal_);
}

double c_sld(const SymMatrix& Q, const WeightMatrix& W) {
  check_dims(Q, W);
  return (W.matrix().dense() * qfim_inverse(Q).dense()).trace();
}

double quantumness_R(const SymMatrix& Q, const AntisymMatrix& U) {
  check_dims(Q, U);
  // i Q^-1 U is similar to the Hermitian i L^-1 U L^-T
  const Matrix linv = inverse(qfim_factor(Q));
  const Matrix m = linv * U.dense() * linv.transpose();
  CMatrix h(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) h(i, j) = cplx{0, m(i, j)};
  return spectral_norm(HermMatrix(std::move(h)));
}

double quantumness_R2(const SymMatrix& Q, const AntisymMatrix& U) {
  check_dims(Q, U);
  if (Q.dim() != 2) throw Error(ErrorKind::Validation, "R2 needs two parameters");
  qfim_factor(Q);
  return std::sqrt(U(0, 1) * U(0, 1) / determinant(Q));
}

double quantumness_R3(const SymMatrix& Q, const AntisymMatrix& U) {
  check_dims(Q, U);
  if (Q.dim() != 3) throw Error(ErrorKind::Validation, "R3 needs three parameters");
  qfim_factor(Q);
  const Vector u{U(1, 2), -U(0, 2), U(0, 1)};
  const Vector qu = Q.dense() * std::span<const double>(u);
  const double uqu = u[0] * qu[0] + u[1] * qu[1] + u[2] * qu[2];
  return std::sqrt(uqu / determinant(Q));
}

double quantumness_T(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W) {
  check_dims(Q, U);
  check_dims(Q, W);
  const Matrix qinv = qfim_inverse(Q).dense();
  const Matrix sw = sqrt_weight(W);
  const Matrix m = sw * qinv * U.dense() * qinv * sw;
  return nuclear_norm(m) / (W.matrix().dense() * qinv).trace();
}

double quantumness_T2(const SymMatrix& Q, const AntisymMatrix& U, double omega) {
  check_dims(Q, U);
  if (Q.dim() != 2) throw Error(ErrorKind::Validation, "T2 needs two parameters");
  qfim_factor(Q);
  return 2 * std::sqrt(omega * U(0, 1) * U(0, 1)) / (Q(1, 1) + omega * Q(0, 0));
}

double t3_paper(const SymMatrix& Q, const AntisymMatrix& U, double omega1, double omega2) {
  check_dims(Q, U);
  if (Q.dim() != 3) throw Error(ErrorKind::Validation, "T3 needs three parameters");
  qfim_factor(Q);
  const Vector u{U(1, 2), -U(0, 2), U(0, 1)};
  const Vector qu = Q.dense() * std::span<const double>(u);
  const double wt[3] = {omega1 * omega2, omega2, omega1};
  double acc = 0;
  for (int i = 0; i < 3; ++i) acc += qu[i] * wt[i] * qu[i];
  return 2 * std::sqrt(acc) / determinant(Q);
}

double c_t(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W) {
  return (1 + quantumness_T(Q, U, W)) * c_sld(Q, W);
}

double c_r(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W) {
  return (1 + quantumness_R(Q, U)) * c_sld(Q, W);
}

double c_holevo_qubit_pure(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W) {
  check_dims(Q, U);
  check_dims(Q, W);
  if (Q.dim() != 2) throw Error(ErrorKind::NotApplicable, "closed-form Holevo bound needs two parameters");
  qfim_factor(Q);
  const double det_q = determinant(Q);
  const double det_u = U(0, 1) * U(0, 1);
  if (std::abs(det_q - det_u) > 1e-8 * std::max(det_q, det_u))
    throw Error(ErrorKind::NotApplicable, "det Q != det U: not a pure two-parameter qubit model");
  const double det_w = determinant(W.matrix());
  return c_sld(Q, W) + 2 * std::sqrt(det_w / det_q);
}

double sloppiness(const SymMatrix& Q) {
  if (!try_cholesky(Q)) return kInf;
  return 1 / determinant(Q);
}

ThresholdVerdict threshold_csep_vs(BoundKind target, const SymMatrix& Q, const AntisymMatrix& U) {
  check_dims(Q, U);
  if (Q.dim() != 2) throw Error(ErrorKind::Validation, "threshold conditions are two-parameter");
  qfim_factor(Q);
  const auto W = WeightMatrix::identity(2);
  const double q11 = Q(0, 0), q22 = Q(1, 1), q12 = Q(0, 1);
  const double u = std::abs(U(0, 1));

  ThresholdVerdict v;
  v.s = sloppiness(Q);
  const std::size_t order[] = {0, 1};
  v.csep_12 = csep_ordered(Q, Ordering(order), W).value;

  switch (target) {
    case BoundKind::sld: {
      v.target = c_sld(Q, W);
      const double root = 1 + std::sqrt(1 + q11 / q22);
      v.threshold_value = root * root / (q11 * q11);
      v.diagnostic_threshold = q12 == 0 ? kInf : 4 * q22 * q22 / (q12 * q12 * q12 * q12);
      v.diagnostic_predicate = v.s >= *v.diagnostic_threshold * (1 - kThresholdRelTol);
      break;
    }
    case BoundKind::t: {
      v.target = c_t(Q, U, W);
      const double den = q12 * q12 + 2 * q22 * u;
      v.threshold_value = den == 0 ? kInf : 4 * q22 * q22 / (den * den);
      break;
    }
    case BoundKind::r: {
      v.target = c_r(Q, U, W);
      // a y^2 + b y + c >= 0 in y = sqrt(s)
      const double k = q12 * q12 + q22 * q22;
      const double a = u * k, b = q12 * q12, c = u - 2 * q22;
      if (c >= 0) {
        v.threshold_value = 0;
      } else if (a == 0) {
        v.threshold_value = b == 0 ? kInf : (c / b) * (c / b);
      } else {
        const double delta = b * b - 4 * a * c;
        const double num = std::sqrt(delta) - b;
        v.threshold_value = num * num / (4 * a * a);
      }
      break;
    }
  }
  v.predicate_holds = v.s >= v.threshold_value * (1 - kThresholdRelTol);
  v.direct_comparison = v.csep_12 <= v.target * (1 + kThresholdRelTol);
  return v;
}

bool BoundReport::chain_holds(double rel_tol) const {
  const double slack = rel_tol * c_s;
  return c_s <= c_t + slack && c_t <= c_r + slack && c_r <= 2 * c_s + slack;
}

BoundReport bound_report(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W) {
  BoundReport r;
  r.weight = W;
  r.c_s = c_sld(Q, W);
  r.quantumness_R = quantumness_R(Q, U);
  r.quantumness_T = quantumness_T(Q, U, W);
  r.c_t = (1 + r.quantumness_T) * r.c_s;
  r.c_r = (1 + r.quantumness_R) * r.c_s;
  r.sloppiness = sloppiness(Q);
  return r;
}

}  // namespace qmet

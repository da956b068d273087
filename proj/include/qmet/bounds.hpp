#pragma once

#include <optional>
#include <span>

#include "qmet/matrix.hpp"

namespace qmet {

/// Positive-definite cost matrix. Diagonal in every closed form; a full
/// matrix is accepted by c_sld and the general quantumness definitions.
class WeightMatrix {
 public:
  static WeightMatrix identity(std::size_t n);
  /// Throws Validation unless every entry is > 0.
  static WeightMatrix diagonal(std::span<const double> omega);
  /// Throws Validation unless positive definite.
  static WeightMatrix full(const SymMatrix& w);

  std::size_t dim() const noexcept { return w_.dim(); }
  bool is_diagonal() const noexcept { return diagonal_; }
  const SymMatrix& matrix() const noexcept { return w_; }
  /// Diagonal entries (the full weights only when is_diagonal()).
  Vector diag() const;
  WeightMatrix scaled(double c) const;

 private:
  WeightMatrix(SymMatrix w, bool diagonal) : w_(std::move(w)), diagonal_(diagonal) {}
  SymMatrix w_;
  bool diagonal_ = true;
};

/// Tr[W Q^-1]. All bounds here are per probe (M = 1).
double c_sld(const SymMatrix& Q, const WeightMatrix& W);

/// || i Q^-1 U ||_inf, the largest eigenvalue of i Q^-1 U.
double quantumness_R(const SymMatrix& Q, const AntisymMatrix& U);
/// sqrt(det U / det Q), n = 2.
double quantumness_R2(const SymMatrix& Q, const AntisymMatrix& U);
/// sqrt(u^T Q u / det Q), u = (U23, -U13, U12), n = 3.
double quantumness_R3(const SymMatrix& Q, const AntisymMatrix& U);

/// || sqrt(W) Q^-1 U Q^-1 sqrt(W) ||_1 / Tr[W Q^-1].
double quantumness_T(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W);
/// 2 sqrt(omega det U) / (Q22 + omega Q11) for W = diag(1, omega).
double quantumness_T2(const SymMatrix& Q, const AntisymMatrix& U, double omega);
/// The published three-parameter expression 2 sqrt(u^T Q W~ Q u) / det Q for
/// W = diag(1, w1, w2), W~ = diag(w1 w2, w2, w1). It equals the nuclear norm
/// in the numerator of quantumness_T, i.e. it is not divided by Tr[W Q^-1].
double t3_paper(const SymMatrix& Q, const AntisymMatrix& U, double omega1, double omega2);

double c_t(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W);
double c_r(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W);

/// Tr[W Q^-1] + 2 sqrt(det[W Q^-1]). Throws NotApplicable unless n = 2 and
/// det Q = U12^2 within 1e-8 relative error (pure two-parameter qubit model).
double c_holevo_qubit_pure(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W);

/// 1 / det Q; +infinity when det Q falls below the pivot tolerance.
double sloppiness(const SymMatrix& Q);

enum class BoundKind { sld, t, r };

/// Outcome of comparing the 1->2 stepwise bound with one joint bound in a
/// two-parameter model, W = I.
struct ThresholdVerdict {
  bool predicate_holds = false;    // s >= threshold_value
  double threshold_value = 0;      // threshold on s
  bool direct_comparison = false;  // C_sep^{1->2} <= target
  double s = 0;
  double csep_12 = 0;
  double target = 0;
  /// Sloppiness-free form of the SLD threshold, 4 Q22^2 / Q12^4 (inf when
  /// Q12 = 0). Set for BoundKind::sld only.
  std::optional<double> diagnostic_threshold;
  std::optional<bool> diagnostic_predicate;

  bool consistent() const noexcept { return predicate_holds == direct_comparison; }
};

/// Relative slack applied to both sides of the threshold comparisons.
inline constexpr double kThresholdRelTol = 1e-9;

ThresholdVerdict threshold_csep_vs(BoundKind target, const SymMatrix& Q, const AntisymMatrix& U);

struct BoundReport {
  double c_s = 0;
  double c_t = 0;
  double c_r = 0;
  std::optional<double> c_h;
  double sloppiness = 0;
  double quantumness_R = 0;
  double quantumness_T = 0;
  WeightMatrix weight = WeightMatrix::identity(1);

  /// c_s <= c_t <= c_r <= 2 c_s within rel_tol.
  bool chain_holds(double rel_tol = 1e-9) const;
};

BoundReport bound_report(const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W);

}  // namespace qmet

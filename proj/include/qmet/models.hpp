#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qmet/matrix.hpp"

namespace qmet {

using Vec3 = std::array<double, 3>;

/// Unit-norm state vector. Construction through `normalized` or
/// `from_interleaved` is the only way to get one.
class PureState {
 public:
  static PureState normalized(CVector amplitudes);
  /// Real/imaginary interleaved amplitudes (re0, im0, re1, im1, ...).
  static PureState from_interleaved(std::span<const double> values);

  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }
  HermMatrix density() const { return HermMatrix::outer(amps_); }

 private:
  explicit PureState(CVector a) : amps_(std::move(a)) {}
  CVector amps_;
};

cplx inner(std::span<const cplx> a, std::span<const cplx> b);  // <a|b>
/// <psi|op|psi>
cplx expectation(const CMatrix& op, std::span<const cplx> psi);

enum class DerivativeMode { analytic, central_difference };

/// Parametric pure-state family lambda -> |psi_lambda>. In analytic mode
/// `derivative_fn` supplies d|psi>/d lambda_mu; otherwise derivatives are
/// phase-aligned central differences with step step_scale * max(1, |lambda|).
struct PureStateModel {
  std::size_t hilbert_dim = 0;
  std::size_t param_count = 0;
  std::function<PureState(std::span<const double>)> state_fn;
  std::function<std::vector<CVector>(std::span<const double>)> derivative_fn;
  DerivativeMode mode = DerivativeMode::central_difference;
  double step_scale = 1e-5;
};

/// State and its first derivatives at one parameter point.
struct StateJet {
  CVector psi;
  std::vector<CVector> dpsi;
};

StateJet state_jet(const PureStateModel& model, std::span<const double> point);

/// QFIM and mean Uhlmann curvature at one parameter point.
struct ModelEvaluation {
  SymMatrix Q;
  AntisymMatrix U;

  /// True when Q has an eigenvalue below the Cholesky pivot tolerance.
  bool degenerate() const;
  /// Throws DegenerateModel when degenerate().
  void require_nondegenerate() const;
};

/// Q = 4 Re(<d psi|d psi> - <d psi|psi><psi|d psi>), U = 4 Im(same).
ModelEvaluation eval_from_jet(const StateJet& jet);
ModelEvaluation eval_generic(const PureStateModel& model, std::span<const double> point);

// ---------------------------------------------------------------------------
// SU(2) encodings H = B n . J, evolved for time t: |psi> = exp(-i t H)|psi_0>.
// Parameter order is (B, theta) or (B, theta, phi).

/// Spin-j generators (Jx, Jy, Jz) for d = 2j + 1 in {2, 3}; basis ordered
/// from m = +j down to m = -j.
std::array<CMatrix, 3> spin_operators(std::size_t d);
CMatrix spin_along(std::size_t d, const Vec3& n);
/// exp(-i angle J_n) for a unit vector n.
CMatrix su2_rotation(std::size_t d, const Vec3& n, double angle);

struct GeometryVectors {
  Vec3 n_theta;  // field direction
  Vec3 n1;       // theta-generator direction
  Vec3 n2;       // n_theta x n1 (two parameters) or phi-generator direction (three)
};

GeometryVectors geometry2(double B, double theta, double t);
GeometryVectors geometry3(double B, double theta, double phi, double t);

class QubitProbe {
 public:
  /// Throws Validation unless |r| = 1 within 1e-12.
  static QubitProbe from_bloch(const Vec3& r);
  const Vec3& bloch() const noexcept { return r_; }
  PureState state() const;

 private:
  explicit QubitProbe(const Vec3& r) : r_(r) {}
  Vec3 r_;
};

Vec3 bloch_vector(const PureState& qubit);

/// Closed-form two-parameter qubit model; U(B, theta) = -D_thetaB.
ModelEvaluation eval_qubit2(double B, double theta, double t, const QubitProbe& probe);
/// Closed-form two-parameter qutrit model from spin-1 expectations.
ModelEvaluation eval_qutrit2(double B, double theta, double t, const PureState& probe);
/// Closed-form three-parameter qutrit QFIM; U comes from the generic formula
/// with analytic derivatives.
ModelEvaluation eval_qutrit3(double B, double theta, double phi, double t, const PureState& probe);

/// Model over (B, theta) [param_count 2, phi fixed at 0] or (B, theta, phi).
PureStateModel su2_model(std::size_t d, std::size_t param_count, double t, const PureState& probe,
                         DerivativeMode mode = DerivativeMode::analytic);

// ---------------------------------------------------------------------------
// Operator bases.

/// {Gamma_1/sqrt2, ..., Gamma_8/sqrt2, I/sqrt3}, orthonormal under Tr[b_i b_j].
const std::array<HermMatrix, 9>& gell_mann_basis();
/// Orthonormal Hermitian basis of dimension d^2 with I/sqrt(d) last; equals
/// gell_mann_basis() for d = 3.
std::vector<HermMatrix> generalized_gell_mann_basis(std::size_t d);

/// r_i = Tr[rho b_i] in the normalized Gell-Mann basis.
std::array<double, 9> qutrit_coherence(const PureState& probe);
/// [v]_i = Tr[op b_i] (real for Hermitian op).
std::array<double, 9> trace_vector(const CMatrix& op);

}  // namespace qmet

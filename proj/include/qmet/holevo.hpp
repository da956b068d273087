#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qmet/bounds.hpp"
#include "qmet/matrix.hpp"
#include "qmet/models.hpp"

namespace qmet {

inline constexpr double kSdpTol = 1e-6;         // absolute duality gap for "converged"
inline constexpr double kConstraintTol = 1e-8;  // unbiasedness residual
inline constexpr int kMaxSdpIterations = 500;   // Newton steps

/// Locally unbiased observables X_mu = sum_k coeffs[mu * d^2 + k] basis[k].
struct UnbiasedFamily {
  std::vector<HermMatrix> X;
  std::vector<HermMatrix> basis;
  Vector coeffs;
};

enum class SolverStatus { converged, max_iter, infeasible };

std::string_view status_name(SolverStatus s);

struct HolevoSolution {
  double value = 0;  // Tr[W Re Z] + ||sqrt(W) Im Z sqrt(W)||_1 at X_opt
  UnbiasedFamily X_opt;
  SymMatrix V_opt;
  SolverStatus status = SolverStatus::infeasible;
  double gap = 0;  // duality gap bound m / t of the barrier path
  double constraint_residual = 0;
  CMatrix Z;  // Z_{mu nu} = Tr[rho X_mu X_nu]
  int iterations = 0;
};

/// Holevo bound min_X Tr[W Re Z] + ||sqrt(W) Im Z sqrt(W)||_1, solved as
/// min Tr[W V] subject to [[V, R^dagger], [R, I]] >= 0 with Z = R^dagger R,
/// R_mu = vec(X_mu S), rho = S S^dagger. Throws Infeasible when the
/// unbiasedness constraints have no solution and Validation on malformed input.
/// Reaching kMaxSdpIterations returns status max_iter with the last iterate.
HolevoSolution holevo_bound(const HermMatrix& rho, std::span<const HermMatrix> drho, const WeightMatrix& W);

struct DensityJet {
  HermMatrix rho;
  std::vector<HermMatrix> drho;
};

/// rho = |psi><psi|, d rho = |d psi><psi| + |psi><d psi|.
DensityJet density_jet(const StateJet& jet);

/// c_sld - tol <= value <= (1 + T) c_sld + tol with tol = kSdpTol * max(1, c_sld).
bool verify_sandwich(const HolevoSolution& sol, const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W);
bool verify_sandwich(double value, const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W);

nlohmann::json to_json(const HolevoSolution& sol);

}  // namespace qmet

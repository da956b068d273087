#include "qmet/holevo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmet/errors.hpp"

namespace qmet {

namespace {

constexpr double kRankRelTol = 1e-12;
constexpr double kBarrierGrowth = 8;
constexpr double kInnerGapRel = 1e-9;
constexpr double kNewtonDecrement = 1e-6;

// Tr[A B] for Hermitian A, B (real).
double trace_product(const CMatrix& a, const CMatrix& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += (a(i, j) * b(j, i)).real();
  return s;
}

// Hermitian H = A + iB  ->  [[A, -B], [B, A]].
Matrix realify(const CMatrix& h) {
  const std::size_t n = h.rows();
  Matrix r(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = h(i, j).real(), b = h(i, j).imag();
      r(i, j) = a;
      r(i + n, j + n) = a;
      r(i, j + n) = -b;
      r(i + n, j) = b;
    }
  return r;
}

// Pseudo-inverse data of a real matrix through the eigen-decomposition of A^T A.
struct LeastSquares {
  Matrix pinv;       // cols x rows
  Matrix nullspace;  // cols x q, orthonormal columns
};

LeastSquares least_squares(const Matrix& a) {
  const SymEigen e = symmetric_eigen(SymMatrix(a.transpose() * a));
  const std::size_t k = a.cols();
  const double top = e.values.empty() ? 0 : std::max(0.0, e.values.back());
  std::vector<std::size_t> range, null;
  for (std::size_t i = 0; i < k; ++i) (e.values[i] > kRankRelTol * top && top > 0 ? range : null).push_back(i);
  LeastSquares ls{Matrix(k, a.rows()), Matrix(k, null.size())};
  for (std::size_t c = 0; c < null.size(); ++c)
    for (std::size_t r = 0; r < k; ++r) ls.nullspace(r, c) = e.vectors(r, null[c]);
  // pinv = sum_i v_i v_i^T A^T / lambda_i
  for (std::size_t i : range) {
    Vector av(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < k; ++c) av[r] += a(r, c) * e.vectors(c, i);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < a.rows(); ++c) ls.pinv(r, c) += e.vectors(r, i) * av[c] / e.values[i];
  }
  return ls;
}

double log_det(const LowerTriangular& l) {
  double s = 0;
  for (std::size_t i = 0; i < l.dim(); ++i) s += std::log(l(i, i));
  return 2 * s;
}

// Factor of the LMI matrix; empty outside the interior.
std::optional<LowerTriangular> barrier_factor(const Matrix& f) { return try_cholesky(SymMatrix(f)); }

void validate(const HermMatrix& rho, std::span<const HermMatrix> drho, const WeightMatrix& W) {
  const std::size_t d = rho.dim();
  if (d < 2) throw Error(ErrorKind::Validation, "rho must be at least 2x2");
  if (drho.empty()) throw Error(ErrorKind::Validation, "need at least one parameter");
  if (W.dim() != drho.size()) throw Error(ErrorKind::Validation, "weight matrix dimension mismatch");
  if (std::abs(rho.dense().trace().real() - 1) > kConstraintTol)
    throw Error(ErrorKind::Validation, "rho must have unit trace");
  if (hermitian_eigen(rho).values.front() < -kConstraintTol)
    throw Error(ErrorKind::Validation, "rho must be positive semidefinite");
  for (const auto& dr : drho) {
    if (dr.dim() != d) throw Error(ErrorKind::Validation, "d rho dimension mismatch");
    if (std::abs(dr.dense().trace()) > kConstraintTol)
      throw Error(ErrorKind::Validation, "d rho must be traceless");
  }
}

}  // namespace

std::string_view status_name(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iter: return "max_iter";
    case SolverStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

HolevoSolution holevo_bound(const HermMatrix& rho, std::span<const HermMatrix> drho, const WeightMatrix& W) {
  validate(rho, drho, W);
  const std::size_t d = rho.dim(), n = drho.size();
  const std::vector<HermMatrix> basis = generalized_gell_mann_basis(d);
  const std::size_t K = basis.size();

  // Unbiasedness for one X_mu: Tr[d_nu rho X] = delta_{mu nu}, Tr[rho X] = 0.
  Matrix a(n + 1, K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t nu = 0; nu < n; ++nu) a(nu, k) = trace_product(drho[nu].dense(), basis[k].dense());
    a(n, k) = trace_product(rho.dense(), basis[k].dense());
  }
  const LeastSquares ls = least_squares(a);
  std::vector<Vector> c0(n, Vector(K, 0.0));
  for (std::size_t mu = 0; mu < n; ++mu) {
    for (std::size_t k = 0; k < K; ++k) c0[mu][k] = ls.pinv(k, mu);
    double res = 0;
    for (std::size_t r = 0; r <= n; ++r) {
      double s = -(r == mu ? 1.0 : 0.0);
      for (std::size_t k = 0; k < K; ++k) s += a(r, k) * c0[mu][k];
      res = std::max(res, std::abs(s));
    }
    if (res > kConstraintTol) throw Error(ErrorKind::Infeasible, "model is not locally identifiable");
  }

  // rho = S S^dagger over the support of rho.
  const HermEigen re = hermitian_eigen(rho);
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < d; ++i)
    if (re.values[i] > kRankRelTol * re.values.back()) support.push_back(i);
  const std::size_t rank = support.size(), dr = d * rank;
  CMatrix S(d, rank);
  for (std::size_t c = 0; c < rank; ++c)
    for (std::size_t r = 0; r < d; ++r) S(r, c) = re.vectors(r, support[c]) * std::sqrt(re.values[support[c]]);

  // P: column k is vec(b_k S).
  CMatrix P(dr, K);
  for (std::size_t k = 0; k < K; ++k) {
    const CMatrix bs = basis[k].dense() * S;
    for (std::size_t i = 0; i < dr; ++i) P(i, k) = bs.data()[i];
  }

  // Null directions mapped into R; keep an orthonormal set of those that move R.
  const std::size_t q = ls.nullspace.cols();
  const CMatrix pn = P * to_complex(ls.nullspace);
  Matrix gram(q, q);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) {
      cplx s = 0;
      for (std::size_t r = 0; r < dr; ++r) s += std::conj(pn(r, i)) * pn(r, j);
      gram(i, j) = s.real();
    }
  std::vector<Vector> coeff_dirs;  // K-vectors
  std::vector<CVector> r_dirs;     // dr-vectors
  if (q > 0) {
    const SymEigen ge = symmetric_eigen(SymMatrix(gram));
    // nullspace columns are orthonormal, so ||P||_F^2 bounds every Gram eigenvalue
    const double top = std::pow(frobenius_norm(P), 2);
    for (std::size_t i = 0; i < q; ++i) {
      if (!(ge.values[i] > kRankRelTol * top)) continue;
      const double inv = 1 / std::sqrt(ge.values[i]);
      Vector cd(K, 0.0);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < q; ++j) cd[k] += ls.nullspace(k, j) * ge.vectors(j, i) * inv;
      CVector rd(dr, 0.0);
      for (std::size_t r = 0; r < dr; ++r)
        for (std::size_t k = 0; k < K; ++k) rd[r] += P(r, k) * cd[k];
      coeff_dirs.push_back(std::move(cd));
      r_dirs.push_back(std::move(rd));
    }
  }
  const std::size_t qz = r_dirs.size();

  // Unit-trace weight keeps the barrier scale independent of W.
  const double w_scale = W.matrix().trace() / static_cast<double>(n);
  const Matrix w = W.matrix().dense() * (1 / w_scale);

  // Variables: upper triangle of V, then qz coordinates per mu.
  const std::size_t nv = n * (n + 1) / 2;
  const std::size_t p = nv + n * qz;
  const std::size_t N = n + dr;
  const std::size_t m = 2 * N;

  auto lmi = [&](const CMatrix& v, const CMatrix& r, bool with_identity) {
    CMatrix h(N, N);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h(i, j) = v(i, j);
    for (std::size_t i = 0; i < dr; ++i) {
      for (std::size_t mu = 0; mu < n; ++mu) {
        h(n + i, mu) = r(i, mu);
        h(mu, n + i) = std::conj(r(i, mu));
      }
      if (with_identity) h(n + i, n + i) = 1;
    }
    return realify(h);
  };

  CMatrix r0(dr, n);
  for (std::size_t mu = 0; mu < n; ++mu)
    for (std::size_t i = 0; i < dr; ++i)
      for (std::size_t k = 0; k < K; ++k) r0(i, mu) += P(i, k) * c0[mu][k];
  const Matrix f0 = lmi(CMatrix(n, n), r0, true);

  std::vector<Matrix> fi;
  Vector cost(p, 0.0);
  fi.reserve(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      CMatrix e(n, n);
      e(i, j) = e(j, i) = 1;
      cost[fi.size()] = i == j ? w(i, i) : 2 * w(i, j);
      fi.push_back(lmi(e, CMatrix(dr, n), false));
    }
  for (std::size_t mu = 0; mu < n; ++mu)
    for (std::size_t z = 0; z < qz; ++z) {
      CMatrix r(dr, n);
      for (std::size_t i = 0; i < dr; ++i) r(i, mu) = r_dirs[z][i];
      fi.push_back(lmi(CMatrix(n, n), r, false));
    }

  auto assemble = [&](const Vector& x) {
    Matrix f = f0;
    for (std::size_t i = 0; i < p; ++i)
      if (x[i] != 0) f += fi[i] * x[i];
    return f;
  };
  auto objective = [&](const Vector& x) {
    double s = 0;
    for (std::size_t i = 0; i < p; ++i) s += cost[i] * x[i];
    return s;
  };

  // Strictly feasible start: V = (||R0||_F^2 + 1) I dominates R0^dagger R0.
  Vector x(p, 0.0);
  {
    const double shift = std::pow(frobenius_norm(r0), 2) + 1;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j, ++idx)
        if (i == j) x[idx] = shift;
  }

  double t = 1;
  int iterations = 0;
  // m / t bounds the gap only at centered points, so the report uses the last one
  Vector x_centered = x;
  double t_centered = 0;
  std::vector<Matrix> kmat(p);
  while (iterations < kMaxSdpIterations) {
    const auto l = barrier_factor(assemble(x));
    if (!l) break;
    const Matrix linv = inverse(*l);
    const Matrix linv_t = linv.transpose();
    Vector g(p);
    for (std::size_t i = 0; i < p; ++i) {
      kmat[i] = linv * fi[i] * linv_t;
      g[i] = t * cost[i] - kmat[i].trace();
    }
    Matrix h(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j) {
        double s = 0;
        const auto ki = kmat[i].data(), kj = kmat[j].data();
        for (std::size_t e = 0; e < ki.size(); ++e) s += ki[e] * kj[e];
        h(i, j) = h(j, i) = s;
      }
    std::optional<LowerTriangular> hl = try_cholesky(SymMatrix(h));
    for (double reg = 1e-14; !hl && reg < 1; reg *= 100) {
      Matrix hr = h;
      for (std::size_t i = 0; i < p; ++i) hr(i, i) += reg * std::max(1.0, h(i, i));
      hl = try_cholesky(SymMatrix(hr));
    }
    if (!hl) break;
    Vector step = cholesky_solve(*hl, g);
    double decrement = 0;
    for (std::size_t i = 0; i < p; ++i) {
      step[i] = -step[i];
      decrement -= g[i] * step[i];
    }
    ++iterations;

    bool centered = decrement / 2 <= kNewtonDecrement;
    if (!centered) {
      // change of the barrier function, formed without subtracting t * objective values
      const double ld_now = log_det(*l);
      const double slope = t * objective(step);
      double alpha = 1;
      bool moved = false;
      while (alpha > 1e-12) {
        Vector trial(p);
        for (std::size_t i = 0; i < p; ++i) trial[i] = x[i] + alpha * step[i];
        if (const auto lt = barrier_factor(assemble(trial))) {
          const double change = alpha * slope - (log_det(*lt) - ld_now);
          if (change <= -0.25 * alpha * decrement) {
            x = std::move(trial);
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      // no progress possible at this t: treat as centered
      if (!moved) centered = true;
    }
    if (centered) {
      x_centered = x;
      t_centered = t;
      if (static_cast<double>(m) / t <= kInnerGapRel * std::max(1.0, std::abs(objective(x)))) break;
      t *= kBarrierGrowth;
    }
  }
  x = x_centered;

  // Recover X and Z at the final iterate.
  HolevoSolution sol;
  sol.iterations = iterations;
  sol.X_opt.basis = basis;
  sol.X_opt.coeffs.assign(n * K, 0.0);
  CMatrix rfin(dr, n);
  for (std::size_t mu = 0; mu < n; ++mu) {
    for (std::size_t k = 0; k < K; ++k) {
      double c = c0[mu][k];
      for (std::size_t z = 0; z < qz; ++z) c += x[nv + mu * qz + z] * coeff_dirs[z][k];
      sol.X_opt.coeffs[mu * K + k] = c;
    }
    CMatrix xm(d, d);
    for (std::size_t k = 0; k < K; ++k) xm += basis[k].dense() * cplx{sol.X_opt.coeffs[mu * K + k]};
    sol.X_opt.X.emplace_back(std::move(xm));
    for (std::size_t i = 0; i < dr; ++i)
      for (std::size_t k = 0; k < K; ++k) rfin(i, mu) += P(i, k) * sol.X_opt.coeffs[mu * K + k];
  }
  sol.Z = rfin.adjoint() * rfin;

  double residual = 0;
  for (std::size_t mu = 0; mu < n; ++mu) {
    for (std::size_t nu = 0; nu < n; ++nu)
      residual = std::max(residual, std::abs(trace_product(drho[nu].dense(), sol.X_opt.X[mu].dense()) -
                                             (mu == nu ? 1.0 : 0.0)));
    residual = std::max(residual, std::abs(trace_product(rho.dense(), sol.X_opt.X[mu].dense())));
  }
  sol.constraint_residual = residual;

  Matrix v(n, n);
  {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j, ++idx) v(i, j) = v(j, i) = x[idx] * w_scale;
  }
  sol.V_opt = SymMatrix(v);

  const Matrix sw = sqrt_psd(W.matrix()).dense();
  const Matrix wz = W.matrix().dense() * real_part(sol.Z);
  sol.value = wz.trace() + nuclear_norm(Matrix(sw * imag_part(sol.Z) * sw));
  sol.gap = t_centered > 0 ? static_cast<double>(m) / t_centered * w_scale : std::numeric_limits<double>::infinity();
  sol.status = sol.gap <= kSdpTol ? SolverStatus::converged : SolverStatus::max_iter;
  return sol;
}

DensityJet density_jet(const StateJet& jet) {
  const std::size_t d = jet.psi.size();
  DensityJet out{HermMatrix::outer(jet.psi), {}};
  for (const CVector& dpsi : jet.dpsi) {
    CMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) m(i, j) = dpsi[i] * std::conj(jet.psi[j]) + jet.psi[i] * std::conj(dpsi[j]);
    out.drho.emplace_back(std::move(m));
  }
  return out;
}

bool verify_sandwich(double value, const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W) {
  const double cs = c_sld(Q, W);
  const double tol = kSdpTol * std::max(1.0, cs);
  return cs - tol <= value && value <= (1 + quantumness_T(Q, U, W)) * cs + tol;
}

bool verify_sandwich(const HolevoSolution& sol, const SymMatrix& Q, const AntisymMatrix& U, const WeightMatrix& W) {
  return verify_sandwich(sol.value, Q, U, W);
}

nlohmann::json to_json(const HolevoSolution& sol) {
  return {{"value", sol.value}, {"status", status_name(sol.status)}, {"gap", sol.gap}};
}

}  // namespace qmet

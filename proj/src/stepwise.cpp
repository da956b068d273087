#include "qmet/stepwise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "qmet/errors.hpp"

namespace qmet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_spd(const SymMatrix& Q) {
  if (!try_cholesky(Q)) throw Error(ErrorKind::SingularQfim, "QFIM is not positive definite");
}

Vector diagonal_weights(const WeightMatrix& W, std::size_t n) {
  if (W.dim() != n) throw Error(ErrorKind::Validation, "weight matrix dimension mismatch");
  if (!W.is_diagonal()) throw Error(ErrorKind::Validation, "stepwise bounds need a diagonal weight matrix");
  return W.diag();
}

// Step terms A_j from trailing determinant ratios; empty when any trailing
// block is numerically singular.
std::optional<Vector> step_terms(const SymMatrix& P, double pivot_tol) {
  const std::size_t n = P.dim();
  Vector dets(n + 1, 1.0);
  for (std::size_t j = n; j-- > 0;) dets[j] = determinant(trailing_submatrix(P, j + 1));
  Vector a(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(dets[j] > 0)) return std::nullopt;
    a[j] = dets[j + 1] / dets[j];
    // 1 / A_j is the squared Cholesky pivot of the trailing block
    if (!(a[j] > 0) || !(1 / a[j] > pivot_tol)) return std::nullopt;
  }
  return a;
}

std::optional<StepwiseResult> try_csep(const SymMatrix& Q, const Ordering& order, const Vector& w) {
  const SymMatrix P = principal_submatrix(Q, order.indices());
  auto a = step_terms(P, pivot_tolerance(Q));
  if (!a) return std::nullopt;
  StepwiseResult r{.value = 0, .gammas = Vector(a->size()), .ordering = order, .step_terms = *a};
  double total = 0;
  for (std::size_t j = 0; j < a->size(); ++j) {
    r.gammas[j] = std::sqrt(w[order[j]] * (*a)[j]);
    total += r.gammas[j];
  }
  for (double& g : r.gammas) g /= total;
  r.value = total * total;
  return r;
}

}  // namespace

Ordering::Ordering(std::span<const std::size_t> zero_based) : idx_(zero_based.begin(), zero_based.end()) {
  if (idx_.empty()) throw Error(ErrorKind::Validation, "ordering must be non-empty");
  std::vector<bool> seen(idx_.size(), false);
  for (std::size_t i : idx_) {
    if (i >= idx_.size() || seen[i]) throw Error(ErrorKind::Validation, "ordering is not a permutation");
    seen[i] = true;
  }
}

Ordering Ordering::identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return Ordering(v);
}

Ordering Ordering::reversed(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.rbegin(), v.rend(), 0);
  return Ordering(v);
}

Ordering Ordering::from_one_based(std::span<const int> one_based) {
  std::vector<std::size_t> v;
  for (int k : one_based) {
    if (k < 1) throw Error(ErrorKind::Validation, "orderings are 1-based");
    v.push_back(static_cast<std::size_t>(k - 1));
  }
  return Ordering(v);
}

std::vector<int> Ordering::one_based() const {
  std::vector<int> v;
  for (std::size_t i : idx_) v.push_back(static_cast<int>(i) + 1);
  return v;
}

std::string Ordering::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < idx_.size(); ++k) {
    if (k) s += '>';
    s += std::to_string(idx_[k] + 1);
  }
  return s;
}

StepwiseResult csep_ordered(const SymMatrix& Q, const Ordering& order, const WeightMatrix& W) {
  if (order.size() != Q.dim()) throw Error(ErrorKind::Validation, "ordering length differs from QFIM size");
  const Vector w = diagonal_weights(W, Q.dim());
  require_spd(Q);
  auto r = try_csep(Q, order, w);
  if (!r) throw Error(ErrorKind::SingularQfim, "trailing block singular for ordering " + order.to_string());
  return *std::move(r);
}

StepwiseResult csep_ordered(const SymMatrix& Q, const Ordering& order) {
  return csep_ordered(Q, order, WeightMatrix::identity(Q.dim()));
}

double csep_cholesky(const SymMatrix& Q) {
  auto l = try_cholesky(Q);
  if (!l) throw Error(ErrorKind::SingularQfim, "QFIM is not positive definite");
  double s = 0;
  for (std::size_t j = 0; j < Q.dim(); ++j) s += 1 / (*l)(j, j);
  return s * s;
}

Brackets brackets(const SymMatrix& Q) {
  require_spd(Q);
  const double n = static_cast<double>(Q.dim());
  return {.harmonic_lower = n * n * n / Q.trace(),
          .geometric_lower = n * n * std::pow(determinant(Q), -1 / n),
          .upper = n * inverse(Q).trace()};
}

StepwiseResult best_order_bruteforce(const SymMatrix& Q, const WeightMatrix& W) {
  const std::size_t n = Q.dim();
  if (n > kMaxBruteForceParams)
    throw Error(ErrorKind::TooManyParameters, "brute force limited to " + std::to_string(kMaxBruteForceParams));
  const Vector w = diagonal_weights(W, n);
  require_spd(Q);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<StepwiseResult> best;
  do {
    auto r = try_csep(Q, Ordering(perm), w);
    if (r && (!best || r->value < best->value * (1 - kOrderTieRelTol))) best = std::move(r);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (!best) throw Error(ErrorKind::SingularQfim, "no ordering has a non-singular trailing sequence");
  return *std::move(best);
}

StepwiseResult best_order_bruteforce(const SymMatrix& Q) {
  return best_order_bruteforce(Q, WeightMatrix::identity(Q.dim()));
}

DpOutcome best_order_dp_tables(const SymMatrix& Q, const WeightMatrix& W) {
  const std::size_t n = Q.dim();
  if (n > kMaxDpParams)
    throw Error(ErrorKind::TooManyParameters, "DP limited to " + std::to_string(kMaxDpParams));
  const Vector w = diagonal_weights(W, n);
  require_spd(Q);
  const double pivot_tol = pivot_tolerance(Q);
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;

  DpTables t;
  t.cost.assign(std::size_t{full} + 1, kInf);
  t.choice.assign(std::size_t{full} + 1, -1);
  t.cost[0] = 0;

  // subsets grouped by population count
  std::vector<std::vector<std::uint32_t>> layers(n + 1);
  for (std::uint32_t m = 0; m <= full; ++m) layers[std::popcount(m)].push_back(m);

  std::vector<std::size_t> members;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::uint32_t base : layers[k]) {
      if (!std::isfinite(t.cost[base])) continue;
      members.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (base >> i & 1u) members.push_back(i);
      // one factorization of Q_II serves every index added to this subset
      std::optional<LowerTriangular> factor;
      if (!members.empty()) {
        factor = try_cholesky(principal_submatrix(Q, members));
        if (!factor) continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (base >> j & 1u) continue;
        ++t.expansions;
        double schur = Q(j, j);
        if (factor) {
          Vector q_ij(members.size());
          for (std::size_t a = 0; a < members.size(); ++a) q_ij[a] = Q(members[a], j);
          const Vector x = cholesky_solve(*factor, q_ij);
          for (std::size_t a = 0; a < members.size(); ++a) schur -= q_ij[a] * x[a];
        }
        if (!(schur > pivot_tol)) continue;
        const double cand = t.cost[base] + std::sqrt(w[j] / schur);
        const std::uint32_t s = base | (std::uint32_t{1} << j);
        const double cur = t.cost[s];
        const bool better = cand < cur * (1 - kOrderTieRelTol);
        const bool tie_smaller = cand <= cur * (1 + kOrderTieRelTol) && static_cast<int>(j) < t.choice[s];
        if (!std::isfinite(cur) || better) {
          t.cost[s] = cand;
          t.choice[s] = static_cast<std::int8_t>(j);
        } else if (tie_smaller) {
          t.choice[s] = static_cast<std::int8_t>(j);
        }
      }
    }
  }
  if (!std::isfinite(t.cost[full]))
    throw Error(ErrorKind::SingularQfim, "no ordering has a non-singular trailing sequence");

  // Walking back from the full set yields the last-added index first, which
  // is the reversed addition order, i.e. the estimation order.
  std::vector<std::size_t> seq;
  for (std::uint32_t m = full; m != 0; m ^= std::uint32_t{1} << t.choice[m])
    seq.push_back(static_cast<std::size_t>(t.choice[m]));
  auto r = try_csep(Q, Ordering(seq), w);
  if (!r) throw Error(ErrorKind::SingularQfim, "optimal ordering has a singular trailing block");
  r->value = t.cost[full] * t.cost[full];
  return {*std::move(r), std::move(t)};
}

StepwiseResult best_order_dp(const SymMatrix& Q, const WeightMatrix& W) {
  return best_order_dp_tables(Q, W).best;
}

StepwiseResult best_order_dp(const SymMatrix& Q) { return best_order_dp(Q, WeightMatrix::identity(Q.dim())); }

nlohmann::json to_json(const StepwiseResult& r) {
  return {{"value", r.value},
          {"gammas", r.gammas},
          {"ordering", r.ordering.one_based()},
          {"step_terms", r.step_terms}};
}

}  // namespace qmet

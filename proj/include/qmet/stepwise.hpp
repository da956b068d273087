#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmet/bounds.hpp"
#include "qmet/matrix.hpp"

namespace qmet {

/// Estimation sequence; element 0 is estimated first. Stored 0-based,
/// printed and parsed 1-based.
class Ordering {
 public:
  /// Throws Validation unless `zero_based` is a permutation of 0..n-1.
  explicit Ordering(std::span<const std::size_t> zero_based);
  static Ordering identity(std::size_t n);
  static Ordering reversed(std::size_t n);
  static Ordering from_one_based(std::span<const int> one_based);

  std::size_t size() const noexcept { return idx_.size(); }
  std::size_t operator[](std::size_t i) const { return idx_[i]; }
  const std::vector<std::size_t>& indices() const noexcept { return idx_; }
  std::vector<int> one_based() const;
  /// "3>1>2"
  std::string to_string() const;

  auto operator<=>(const Ordering&) const = default;

 private:
  std::vector<std::size_t> idx_;
};

/// Optimal stepwise allocation for one ordering.
struct StepwiseResult {
  double value = 0;
  Vector gammas;      // resource fractions, sum to 1
  Ordering ordering = Ordering::identity(1);
  Vector step_terms;  // A_j = [Q^-1_{j..n}]_11 on the permuted QFIM
};

/// C_sep for the given order; W must be diagonal. Throws SingularQfim when a
/// trailing block is not positive definite.
StepwiseResult csep_ordered(const SymMatrix& Q, const Ordering& order, const WeightMatrix& W);
StepwiseResult csep_ordered(const SymMatrix& Q, const Ordering& order);

/// (Tr L^-1)^2 with Q = L L^T; the bound for the reversed order n -> 1.
double csep_cholesky(const SymMatrix& Q);

struct Brackets {
  double harmonic_lower = 0;   // n^3 / Tr Q
  double geometric_lower = 0;  // n^2 det(Q)^(-1/n)
  double upper = 0;            // n Tr Q^-1
};

Brackets brackets(const SymMatrix& Q);

inline constexpr std::size_t kMaxBruteForceParams = 8;
inline constexpr std::size_t kMaxDpParams = 20;
/// Values within this relative distance count as ties; ties go to the
/// lexicographically smallest ordering.
inline constexpr double kOrderTieRelTol = 1e-12;

StepwiseResult best_order_bruteforce(const SymMatrix& Q, const WeightMatrix& W);
StepwiseResult best_order_bruteforce(const SymMatrix& Q);

/// Memo tables over subsets encoded as n-bit masks.
struct DpTables {
  std::vector<double> cost;         // optimal sum of sqrt(w_j) / L_jj for the subset
  std::vector<std::int8_t> choice;  // index added last (-1 for the empty set)
  std::size_t expansions = 0;       // (subset, added index) pairs evaluated
};

struct DpOutcome {
  StepwiseResult best;
  DpTables tables;
};

/// Held-Karp style search: cost(S) = min_j cost(S \ j) + sqrt(w_j) / sqrt(schur_j),
/// schur_j = q_jj - q_jI Q_II^-1 q_Ij with I = S \ j.
DpOutcome best_order_dp_tables(const SymMatrix& Q, const WeightMatrix& W);
StepwiseResult best_order_dp(const SymMatrix& Q, const WeightMatrix& W);
StepwiseResult best_order_dp(const SymMatrix& Q);

/// {value, gammas, ordering (1-based), step_terms}
nlohmann::json to_json(const StepwiseResult& r);

}  // namespace qmet

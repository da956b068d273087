#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qmet/errors.hpp"
#include "qmet/stepwise.hpp"
#include "support.hpp"

using namespace qmet;
using qmet::testing::random_spd;
using qmet::testing::rel_err;

namespace {

const SymMatrix kQ{{4, 2}, {2, 5}};

Ordering one_based(std::initializer_list<int> v) { return Ordering::from_one_based(std::vector<int>(v)); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::Validation;
}

std::vector<std::size_t> random_perm(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("orderings") {
  const auto o = one_based({3, 1, 2});
  CHECK(o.to_string() == "3>1>2");
  CHECK(o.one_based() == std::vector<int>{3, 1, 2});
  CHECK(o[0] == 2);
  CHECK(Ordering::reversed(3).to_string() == "3>2>1");
  CHECK(kind_of([] { one_based({1, 1}); }) == ErrorKind::Validation);
  CHECK(kind_of([] { one_based({0, 1}); }) == ErrorKind::Validation);
  CHECK(kind_of([] { one_based({1, 3}); }) == ErrorKind::Validation);
}

TEST_CASE("stepwise bound for a fixed order") {
  SUBCASE("identity saturates") {
    const auto r = csep_ordered(SymMatrix::identity(2), Ordering::identity(2));
    CHECK(r.value == doctest::Approx(4));
    CHECK(r.gammas[0] == doctest::Approx(0.5));
    CHECK(r.gammas[1] == doctest::Approx(0.5));
  }
  SUBCASE("estimating the second parameter first") {
    const auto r = csep_ordered(kQ, one_based({2, 1}));
    CHECK(r.value == doctest::Approx(1));
    CHECK(r.gammas[0] == doctest::Approx(0.5));
    CHECK(r.gammas[1] == doctest::Approx(0.5));
    const std::size_t ord[] = {1, 0};
    CHECK(r.value == doctest::Approx(qmet::testing::simplex_minimum(qmet::testing::inverse_step_terms(kQ, ord))));
  }
  SUBCASE("natural order costs more") {
    const auto r = csep_ordered(kQ, one_based({1, 2}));
    const double ref = std::pow(std::sqrt(5.0 / 16) + std::sqrt(1.0 / 5), 2);
    CHECK(r.value == doctest::Approx(ref).epsilon(1e-14));
    CHECK(r.value == doctest::Approx(1.0125).epsilon(1e-14));
    CHECK(r.gammas[0] == doctest::Approx(5.0 / 9).epsilon(1e-12));
    CHECK(r.gammas[1] == doctest::Approx(4.0 / 9).epsilon(1e-12));
    const std::size_t ord[] = {0, 1};
    CHECK(r.value == doctest::Approx(qmet::testing::simplex_minimum(qmet::testing::inverse_step_terms(kQ, ord))));
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { csep_ordered(SymMatrix{{1, 2}, {2, 1}}, Ordering::identity(2)); }) == ErrorKind::SingularQfim);
    CHECK(kind_of([] { csep_ordered(kQ, Ordering::identity(3)); }) == ErrorKind::Validation);
    const auto full = WeightMatrix::full(SymMatrix{{2, 0.5}, {0.5, 1}});
    CHECK(kind_of([&] { csep_ordered(kQ, Ordering::identity(2), full); }) == ErrorKind::Validation);
  }
}

TEST_CASE("allocation is optimal and the step terms telescope") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + k % 4;
    const auto Q = random_spd(n, rng);
    const auto perm = random_perm(n, rng);
    const auto r = csep_ordered(Q, Ordering(perm));
    REQUIRE(std::accumulate(r.gammas.begin(), r.gammas.end(), 0.0) == doctest::Approx(1).epsilon(1e-12));
    double root = 0;
    for (double a : r.step_terms) root += std::sqrt(a);
    REQUIRE(rel_err(r.value, root * root) < 1e-10);
    const Vector direct = qmet::testing::inverse_step_terms(Q, perm);
    for (std::size_t j = 0; j < n; ++j) REQUIRE(rel_err(r.step_terms[j], direct[j]) < 1e-10);
    for (int trial = 0; trial < 100; ++trial) {
      Vector g(n);
      double s = 0;
      for (double& x : g) s += (x = u(rng));
      double f = 0;
      for (std::size_t j = 0; j < n; ++j) f += r.step_terms[j] / (g[j] / s);
      REQUIRE(f >= r.value * (1 - 1e-12));
    }
    double at_opt = 0;
    for (std::size_t j = 0; j < n; ++j) at_opt += r.step_terms[j] / r.gammas[j];
    REQUIRE(rel_err(at_opt, r.value) < 1e-10);
  }
}

TEST_CASE("weighted stepwise bound") {
  const double w[] = {2, 0.5};
  const auto W = WeightMatrix::diagonal(w);
  const auto r = csep_ordered(kQ, one_based({2, 1}), W);
  // reordered matrix [[5,2],[2,4]]: A = (1/4, 1/4); weights follow the parameters
  const std::size_t ord[] = {1, 0};
  const Vector a = qmet::testing::inverse_step_terms(kQ, ord);
  CHECK(qmet::testing::simplex_minimum({0.5 * a[0], 2 * a[1]}) == doctest::Approx(r.value).epsilon(1e-10));
  const double ref = std::pow(std::sqrt(0.5 * 0.25) + std::sqrt(2 * 0.25), 2);
  CHECK(r.value == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("Cholesky form") {
  CHECK(csep_cholesky(kQ) == doctest::Approx(1));
  CHECK(csep_cholesky(SymMatrix::identity(5)) == doctest::Approx(25));
  CHECK(kind_of([] { csep_cholesky(SymMatrix{{1, 2}, {2, 1}}); }) == ErrorKind::SingularQfim);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto Q = random_spd(1 + k % 6, rng);
    REQUIRE(rel_err(csep_cholesky(Q), csep_ordered(Q, Ordering::reversed(Q.dim())).value) < 1e-10);
  }
}

TEST_CASE("order-independent brackets") {
  const auto b2 = brackets(SymMatrix::identity(2));
  CHECK(b2.harmonic_lower == doctest::Approx(4));
  CHECK(b2.geometric_lower == doctest::Approx(4));
  CHECK(b2.upper == doctest::Approx(4));
  const auto b3 = brackets(SymMatrix(Matrix::identity(3) * 3.0));
  CHECK(b3.harmonic_lower == doctest::Approx(3));
  CHECK(b3.geometric_lower == doctest::Approx(3));
  CHECK(b3.upper == doctest::Approx(3));
  const auto bd = brackets(SymMatrix{{1, 0}, {0, 4}});
  CHECK(bd.harmonic_lower == doctest::Approx(1.6));
  CHECK(bd.geometric_lower == doctest::Approx(2));
  CHECK(bd.upper == doctest::Approx(2.5));
  const double c = csep_ordered(SymMatrix{{1, 0}, {0, 4}}, Ordering::identity(2)).value;
  CHECK(c == doctest::Approx(2.25));
  CHECK(bd.geometric_lower < c);
  CHECK(c < bd.upper);

  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 2 + k % 4;
    const auto Q = random_spd(n, rng);
    const auto b = brackets(Q);
    REQUIRE(b.harmonic_lower <= b.geometric_lower * (1 + 1e-9));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      const double v = csep_ordered(Q, Ordering(perm)).value;
      REQUIRE(b.geometric_lower <= v * (1 + 1e-9));
      REQUIRE(v <= b.upper * (1 + 1e-9));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("brute-force ordering search") {
  const auto r = best_order_bruteforce(kQ);
  CHECK(r.ordering == one_based({2, 1}));
  CHECK(r.value == doctest::Approx(1));
  const double diag[] = {1, 3, 2, 5};
  const auto d = best_order_bruteforce(SymMatrix::diagonal(diag));
  CHECK(d.ordering == Ordering::identity(4));
  const auto i3 = best_order_bruteforce(SymMatrix::identity(3));
  CHECK(i3.value == doctest::Approx(9));
  CHECK(i3.ordering == Ordering::identity(3));
  CHECK(kind_of([] { best_order_bruteforce(SymMatrix::identity(9)); }) == ErrorKind::TooManyParameters);

  std::vector<std::size_t> perm(4);
  std::iota(perm.begin(), perm.end(), 0);
  const double ref = csep_ordered(SymMatrix::diagonal(diag), Ordering(perm)).value;
  do {
    CHECK(rel_err(csep_ordered(SymMatrix::diagonal(diag), Ordering(perm)).value, ref) < 1e-12);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("dynamic-programming ordering search") {
  SUBCASE("small examples") {
    const auto r = best_order_dp(kQ);
    CHECK(r.ordering == one_based({2, 1}));
    CHECK(r.value == doctest::Approx(1));
    const auto one = best_order_dp_tables(SymMatrix{{4}}, WeightMatrix::identity(1));
    CHECK(one.best.value == doctest::Approx(0.25));
    CHECK(one.tables.cost[1] == doctest::Approx(0.5));
    CHECK(one.tables.cost[0] == 0);
    const double diag[] = {1, 3, 2, 5};
    CHECK(best_order_dp(SymMatrix::diagonal(diag)).ordering == Ordering::identity(4));
  }
  SUBCASE("guards") {
    CHECK(kind_of([] { best_order_dp(SymMatrix::identity(21)); }) == ErrorKind::TooManyParameters);
    CHECK(kind_of([] { best_order_dp(SymMatrix{{1, 2}, {2, 1}}); }) == ErrorKind::SingularQfim);
  }
  SUBCASE("matches brute force, tables are consistent") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.2, 3);
    for (int k = 0; k < 250; ++k) {
      const std::size_t n = 2 + k % 5;
      const auto Q = random_spd(n, rng);
      const auto dp = best_order_dp_tables(Q, WeightMatrix::identity(n));
      const auto bf = best_order_bruteforce(Q);
      REQUIRE(rel_err(dp.best.value, bf.value) < 1e-9);
      REQUIRE(rel_err(csep_ordered(Q, dp.best.ordering).value, bf.value) < 1e-9);
      REQUIRE(dp.tables.expansions == n * (std::size_t{1} << (n - 1)));
      const auto& cost = dp.tables.cost;
      for (std::size_t m = 1; m < cost.size(); ++m)
        for (std::size_t j = 0; j < n; ++j)
          if (m >> j & 1u) REQUIRE(cost[m ^ (std::size_t{1} << j)] <= cost[m]);

      Vector w(n);
      for (double& x : w) x = u(rng);
      const auto W = WeightMatrix::diagonal(w);
      REQUIRE(rel_err(best_order_dp(Q, W).value, best_order_bruteforce(Q, W).value) < 1e-9);
    }
  }
  SUBCASE("larger instance runs") {
    std::mt19937_64 rng(5);
    const auto Q = random_spd(12, rng);
    const auto r = best_order_dp(Q);
    CHECK(rel_err(r.value, csep_ordered(Q, r.ordering).value) < 1e-9);
    CHECK(r.value <= csep_cholesky(Q) * (1 + 1e-12));
  }
}

TEST_CASE("json form") {
  const auto j = to_json(best_order_dp(kQ));
  CHECK(j["value"].get<double>() == doctest::Approx(1));
  CHECK(j["ordering"] == nlohmann::json::array({2, 1}));
  CHECK(j["gammas"].size() == 2);
  CHECK(j["step_terms"].size() == 2);
}

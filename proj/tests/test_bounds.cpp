#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qmet/bounds.hpp"
#include "qmet/errors.hpp"
#include "qmet/models.hpp"
#include "support.hpp"

using namespace qmet;
using qmet::testing::gauss_jordan_inverse;
using qmet::testing::random_spd;
using qmet::testing::rel_err;
using std::numbers::pi;

namespace {

const SymMatrix kQ{{1, 0}, {0, 4}};

AntisymMatrix u12(double v) { return AntisymMatrix(Matrix{{0, v}, {-v, 0}}); }

/// Largest |eigenvalue| of i A for real A = Q^-1 U: the eigenvalues of i A
/// are the square roots of the eigenvalues of -A^2, which are real here.
double r_oracle(const SymMatrix& Q, const AntisymMatrix& U) {
  const Matrix a = gauss_jordan_inverse(Q.dense()) * U.dense();
  const Matrix m = a * a * -1.0;
  // power iteration on the similar symmetric matrix Q^-1/2 (-A^2) Q^1/2
  const SymMatrix h = sqrt_psd(Q);
  const SymMatrix sym(h.dense() * m * gauss_jordan_inverse(h.dense()));
  const auto e = symmetric_eigen(sym);
  return std::sqrt(std::max(0.0, e.values.back()));
}

/// Nuclear norm via eigenvalues of A^T A.
double nuclear_oracle(const Matrix& a) {
  const auto e = symmetric_eigen(SymMatrix(a.transpose() * a));
  double s = 0;
  for (double l : e.values) s += std::sqrt(std::max(0.0, l));
  return s;
}

PureState random_state(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector a(d);
  for (auto& z : a) z = {g(rng), g(rng)};
  return PureState::normalized(a);
}

}  // namespace

TEST_CASE("SLD bound") {
  const auto I2 = WeightMatrix::identity(2);
  CHECK(c_sld(kQ, I2) == doctest::Approx(1.25));
  CHECK(c_sld(SymMatrix::identity(4), WeightMatrix::identity(4)) == doctest::Approx(4));
  // optimal qutrit QFIM diag(4 t^2, 16 sin^2(Bt/2))
  for (double B : {0.5, 1.3, pi}) {
    const double t = 0.8, s = std::sin(B * t / 2);
    const double ref = (4 / (t * t) + 1 / (s * s)) / 16;
    CHECK(c_sld(SymMatrix{{4 * t * t, 0}, {0, 16 * s * s}}, I2) == doctest::Approx(ref));
  }
  const double w[] = {2, 3};
  CHECK(c_sld(kQ, WeightMatrix::diagonal(w)) == doctest::Approx(2 + 0.75));
  CHECK_THROWS_AS(c_sld(SymMatrix{{1, 1}, {1, 1}}, I2), Error);
  CHECK_THROWS_AS(WeightMatrix::diagonal(std::array{1.0, 0.0}), Error);
}

TEST_CASE("quantumness R") {
  CHECK(quantumness_R(kQ, u12(2)) == doctest::Approx(1));
  CHECK(quantumness_R(kQ, AntisymMatrix::zero(2)) == 0);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = 2 + k % 2;
    const auto Q = random_spd(n, rng);
    const auto U = qmet::testing::random_antisym(n, rng);
    const double r = quantumness_R(Q, U);
    REQUIRE(rel_err(r, r_oracle(Q, U)) < 1e-9);
    if (n == 2)
      REQUIRE(rel_err(r, quantumness_R2(Q, U)) < 1e-9);
    else
      REQUIRE(rel_err(r, quantumness_R3(Q, U)) < 1e-9);
  }
}

TEST_CASE("quantumness T") {
  const auto I2 = WeightMatrix::identity(2);
  CHECK(quantumness_T(kQ, u12(2), I2) == doctest::Approx(0.8));
  CHECK(quantumness_T2(kQ, u12(2), 1) == doctest::Approx(0.8));
  CHECK(quantumness_T(kQ, AntisymMatrix::zero(2), I2) == 0);

  SUBCASE("qubit probe alpha = beta = 0") {
    for (double B : {0.7, pi, 4.0}) {
      for (double t : {0.5, 1.0, 1.7}) {
        const auto g = geometry2(B, 0, t);
        const auto e = eval_qubit2(B, 0, t, QubitProbe::from_bloch(g.n2));
        const double ref = 4 * t * std::abs(std::sin(B * t / 2)) / (2 * (1 - std::cos(B * t)) + t * t);
        CHECK(quantumness_T(e.Q, e.U, I2) == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
  SUBCASE("two-parameter closed form matches the definition") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.1, 3);
    for (int k = 0; k < 10000; ++k) {
      const auto Q = random_spd(2, rng);
      const auto U = qmet::testing::random_antisym(2, rng);
      const double omega = u(rng);
      const double w[] = {1, omega};
      const double t = quantumness_T(Q, U, WeightMatrix::diagonal(w));
      REQUIRE(rel_err(t, quantumness_T2(Q, U, omega)) < 1e-9);
      const Matrix qi = gauss_jordan_inverse(Q.dense());
      const Matrix sw = Matrix::diagonal(std::array{1.0, std::sqrt(omega)});
      const double def = nuclear_oracle(sw * qi * U.dense() * qi * sw) / (qi(0, 0) + omega * qi(1, 1));
      REQUIRE(rel_err(t, def) < 1e-9);
    }
  }
  SUBCASE("published three-parameter form is the undivided numerator") {
    const double axial = 1.0;
    const AntisymMatrix U(Matrix{{0, axial, 0}, {-axial, 0, 0}, {0, 0, 0}});
    const auto I3 = SymMatrix::identity(3);
    CHECK(t3_paper(I3, U, 1, 1) == doctest::Approx(2));
    CHECK(quantumness_T(I3, U, WeightMatrix::identity(3)) == doctest::Approx(2.0 / 3));
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
      const auto Q = random_spd(3, rng);
      const auto Ur = qmet::testing::random_antisym(3, rng);
      const double w1 = 0.5 + k % 3, w2 = 1.5;
      const double w[] = {1, w1, w2};
      const auto W = WeightMatrix::diagonal(w);
      CHECK(rel_err(t3_paper(Q, Ur, w1, w2), quantumness_T(Q, Ur, W) * c_sld(Q, W)) < 1e-9);
    }
  }
}

TEST_CASE("derived bounds") {
  const auto I2 = WeightMatrix::identity(2);
  CHECK(c_t(kQ, u12(2), I2) == doctest::Approx(2.25));
  CHECK(c_r(kQ, u12(2), I2) == doctest::Approx(2.5));
  CHECK(c_t(kQ, AntisymMatrix::zero(2), I2) == doctest::Approx(1.25));
  CHECK(c_r(kQ, AntisymMatrix::zero(2), I2) == doctest::Approx(1.25));
  const auto g = geometry2(1.1, 0.2, 0.9);
  Vec3 r{0.3 * g.n_theta[0] + 0.5 * g.n1[0], 0.3 * g.n_theta[1] + 0.5 * g.n1[1], 0.3 * g.n_theta[2] + 0.5 * g.n1[2]};
  const double gam = std::sqrt(1 - 0.09 - 0.25);
  for (int i = 0; i < 3; ++i) r[i] += gam * g.n2[i];
  const auto e = eval_qubit2(1.1, 0.2, 0.9, QubitProbe::from_bloch(r));
  CHECK(c_r(e.Q, e.U, I2) == doctest::Approx(2 * c_sld(e.Q, I2)).epsilon(1e-12));
}

TEST_CASE("closed-form qubit Holevo bound") {
  const auto I2 = WeightMatrix::identity(2);
  CHECK(c_holevo_qubit_pure(kQ, u12(2), I2) == doctest::Approx(2.25));
  for (double c : {0.5, 2.0, 7.0})
    CHECK(c_holevo_qubit_pure(SymMatrix{{c, 0}, {0, c}}, u12(c), I2) == doctest::Approx(4 / c));
  CHECK_THROWS_AS(c_holevo_qubit_pure(kQ, u12(1), I2), Error);
  CHECK_THROWS_AS(c_holevo_qubit_pure(SymMatrix::identity(3), AntisymMatrix::zero(3), WeightMatrix::identity(3)),
                  Error);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const double B = 2 * pi * u(rng), t = 0.1 + 1.9 * u(rng);
    const auto g = geometry2(B, 0, t);
    const double a = 2 * pi * u(rng), rad = std::sqrt(u(rng));
    const double alpha = rad * std::cos(a), beta = rad * std::sin(a), gam = std::sqrt(1 - rad * rad);
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = alpha * g.n_theta[i] + beta * g.n1[i] + gam * g.n2[i];
    const auto e = eval_qubit2(B, 0, t, QubitProbe::from_bloch(r));
    if (determinant(e.Q) < 1e-8) continue;
    const double omega = 0.2 + 3 * u(rng);
    const double w[] = {1, omega};
    const auto W = WeightMatrix::diagonal(w);
    CHECK(rel_err(c_holevo_qubit_pure(e.Q, e.U, W), c_t(e.Q, e.U, W)) < 1e-9);
  }
}

TEST_CASE("sloppiness") {
  CHECK(sloppiness(kQ) == doctest::Approx(0.25));
  CHECK(sloppiness(SymMatrix::identity(3)) == doctest::Approx(1));
  CHECK(sloppiness(SymMatrix{{1, 1}, {1, 1}}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("threshold predicates") {
  SUBCASE("diagonal QFIM versus C_T holds with equality") {
    const auto v = threshold_csep_vs(BoundKind::t, kQ, u12(2));
    CHECK(v.s == doctest::Approx(0.25));
    CHECK(v.threshold_value == doctest::Approx(0.25));
    CHECK(v.predicate_holds);
    CHECK(v.csep_12 == doctest::Approx(2.25));
    CHECK(v.target == doctest::Approx(2.25));
    CHECK(v.direct_comparison);
  }
  SUBCASE("diagonal QFIM versus C_S fails") {
    const auto v = threshold_csep_vs(BoundKind::sld, kQ, u12(2));
    CHECK_FALSE(v.direct_comparison);
    CHECK(v.csep_12 == doctest::Approx(2.25));
    CHECK(v.target == doctest::Approx(1.25));
    CHECK_FALSE(v.predicate_holds);
    CHECK(*v.diagnostic_threshold == std::numeric_limits<double>::infinity());
    CHECK_FALSE(*v.diagnostic_predicate);
  }
  SUBCASE("2 Q22 = |U12| makes the C_R condition unconditional") {
    // q11 q22 - q12^2 = U12^2 with U12 = 2 q22
    const SymMatrix Q{{4.25, 0.5}, {0.5, 1}};
    const auto v = threshold_csep_vs(BoundKind::r, Q, u12(2));
    CHECK(v.threshold_value == 0);
    CHECK(v.predicate_holds);
    CHECK(v.consistent());
  }
  SUBCASE("non-qubit input shapes") {
    CHECK_THROWS_AS(threshold_csep_vs(BoundKind::t, SymMatrix::identity(3), AntisymMatrix::zero(3)), Error);
  }
}

TEST_CASE("bound chain on random pure qutrit models") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int k = 0; k < 500; ++k) {
    const auto e = eval_qutrit3(1, pi / 7, pi / 5, 1, random_state(3, rng));
    if (e.degenerate()) continue;
    const auto rep = bound_report(e.Q, e.U, WeightMatrix::identity(3));
    CHECK(rep.chain_holds(1e-9));
    CHECK(rep.quantumness_T <= rep.quantumness_R + 1e-9);
    CHECK(rep.quantumness_R <= 1 + 1e-9);
    ++checked;
  }
  CHECK(checked > 400);
}

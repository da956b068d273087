#include "qmet/models.hpp"

#include <algorithm>
#include <cmath>

#include "qmet/errors.hpp"

namespace qmet {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt3 = 1.73205080756887729353;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm_of(std::span<const cplx> v) {
  double s = 0;
  for (cplx x : v) s += std::norm(x);
  return std::sqrt(s);
}

CVector apply(const CMatrix& m, std::span<const cplx> v) { return m * v; }

double variance(const CMatrix& a, std::span<const cplx> psi) {
  const double m = expectation(a, psi).real();
  return expectation(a * a, psi).real() - m * m;
}

// <{A, B}> - 2 <A><B>
double covariance2(const CMatrix& a, const CMatrix& b, std::span<const cplx> psi) {
  return expectation(a * b + b * a, psi).real() -
         2 * expectation(a, psi).real() * expectation(b, psi).real();
}

}  // namespace

PureState PureState::normalized(CVector amplitudes) {
  const double nrm = norm_of(amplitudes);
  if (amplitudes.empty() || !(nrm > 0) || !std::isfinite(nrm))
    throw Error(ErrorKind::Validation, "state vector must be non-zero and finite");
  for (auto& a : amplitudes) a /= nrm;
  return PureState(std::move(amplitudes));
}

PureState PureState::from_interleaved(std::span<const double> values) {
  if (values.size() % 2 != 0 || values.empty())
    throw Error(ErrorKind::Validation, "interleaved amplitudes need an even, non-zero count");
  CVector a(values.size() / 2);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = {values[2 * i], values[2 * i + 1]};
  return normalized(std::move(a));
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

cplx expectation(const CMatrix& op, std::span<const cplx> psi) { return inner(psi, apply(op, psi)); }

StateJet state_jet(const PureStateModel& model, std::span<const double> point) {
  if (point.size() != model.param_count)
    throw Error(ErrorKind::Validation, "parameter point has wrong dimension");
  StateJet jet;
  const PureState center = model.state_fn(point);
  jet.psi.assign(center.amplitudes().begin(), center.amplitudes().end());
  if (model.mode == DerivativeMode::analytic) {
    if (!model.derivative_fn) throw Error(ErrorKind::Validation, "analytic mode without derivative_fn");
    jet.dpsi = model.derivative_fn(point);
    return jet;
  }
  std::vector<double> x(point.begin(), point.end());
  for (std::size_t k = 0; k < model.param_count; ++k) {
    const double h = model.step_scale * std::max(1.0, std::abs(point[k]));
    x[k] = point[k] + h;
    const PureState plus = model.state_fn(x);
    x[k] = point[k] - h;
    const PureState minus = model.state_fn(x);
    x[k] = point[k];
    // rotate so <psi|psi(lambda +- h)> is real positive
    auto aligned = [&](const PureState& s) {
      const cplx ov = inner(jet.psi, s.amplitudes());
      const cplx ph = std::abs(ov) > 0 ? std::conj(ov) / std::abs(ov) : cplx{1};
      CVector v(s.amplitudes().begin(), s.amplitudes().end());
      for (auto& a : v) a *= ph;
      return v;
    };
    const CVector p = aligned(plus), m = aligned(minus);
    CVector d(p.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (p[i] - m[i]) / (2 * h);
    jet.dpsi.push_back(std::move(d));
  }
  return jet;
}

bool ModelEvaluation::degenerate() const {
  const auto e = symmetric_eigen(Q);
  return e.values.front() <= pivot_tolerance(Q);
}

void ModelEvaluation::require_nondegenerate() const {
  if (degenerate()) throw Error(ErrorKind::DegenerateModel, "QFIM is singular at this point");
}

ModelEvaluation eval_from_jet(const StateJet& jet) {
  const std::size_t n = jet.dpsi.size();
  if (n == 0) throw Error(ErrorKind::Validation, "model has no parameters");
  std::vector<cplx> proj(n);
  for (std::size_t m = 0; m < n; ++m) proj[m] = inner(jet.dpsi[m], jet.psi);
  Matrix q(n, n), u(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t v = 0; v < n; ++v) {
      const cplx z = inner(jet.dpsi[m], jet.dpsi[v]) - proj[m] * std::conj(proj[v]);
      q(m, v) = 4 * z.real();
      u(m, v) = 4 * z.imag();
    }
  return {SymMatrix(std::move(q)), AntisymMatrix(std::move(u))};
}

ModelEvaluation eval_generic(const PureStateModel& model, std::span<const double> point) {
  return eval_from_jet(state_jet(model, point));
}

std::array<CMatrix, 3> spin_operators(std::size_t d) {
  const cplx i{0, 1};
  if (d == 2) {
    return {CMatrix{{0, 0.5}, {0.5, 0}}, CMatrix{{0, -0.5 * i}, {0.5 * i, 0}},
            CMatrix{{0.5, 0}, {0, -0.5}}};
  }
  if (d == 3) {
    const double a = 1 / kSqrt2;
    return {CMatrix{{0, a, 0}, {a, 0, a}, {0, a, 0}},
            CMatrix{{0, -a * i, 0}, {a * i, 0, -a * i}, {0, a * i, 0}},
            CMatrix{{1, 0, 0}, {0, 0, 0}, {0, 0, -1}}};
  }
  throw Error(ErrorKind::Validation, "spin operators implemented for d = 2, 3 only");
}

CMatrix spin_along(std::size_t d, const Vec3& n) {
  const auto j = spin_operators(d);
  return j[0] * cplx{n[0]} + j[1] * cplx{n[1]} + j[2] * cplx{n[2]};
}

CMatrix su2_rotation(std::size_t d, const Vec3& n, double angle) {
  const CMatrix jn = spin_along(d, n);
  const cplx i{0, 1};
  if (d == 2) {
    // J_n^2 = I/4
    return CMatrix::identity(2) * cplx{std::cos(angle / 2)} + jn * (-2.0 * i * std::sin(angle / 2));
  }
  // spin 1: J_n^3 = J_n
  return CMatrix::identity(3) + jn * (-i * std::sin(angle)) + (jn * jn) * cplx{std::cos(angle) - 1};
}

GeometryVectors geometry2(double B, double theta, double t) {
  const double s = std::sin(B * t / 2), c = std::cos(B * t / 2);
  GeometryVectors g;
  g.n_theta = {std::cos(theta), 0, std::sin(theta)};
  g.n1 = {c * std::sin(theta), -s, -c * std::cos(theta)};
  g.n2 = cross(g.n_theta, g.n1);
  return g;
}

GeometryVectors geometry3(double B, double theta, double phi, double t) {
  const double s = std::sin(B * t / 2), c = std::cos(B * t / 2);
  const double st = std::sin(theta), ct = std::cos(theta), sp = std::sin(phi), cp = std::cos(phi);
  GeometryVectors g;
  g.n_theta = {ct * cp, ct * sp, st};
  g.n1 = {s * sp + c * st * cp, -s * cp + c * st * sp, -c * ct};
  g.n2 = {c * sp - s * st * cp, -c * cp - s * st * sp, s * ct};
  return g;
}

QubitProbe QubitProbe::from_bloch(const Vec3& r) {
  const double nrm = std::sqrt(dot(r, r));
  if (!(std::abs(nrm - 1) <= 1e-12))
    throw Error(ErrorKind::Validation, "qubit probe Bloch vector must have unit norm");
  return QubitProbe(r);
}

PureState QubitProbe::state() const {
  const double polar = std::acos(std::clamp(r_[2], -1.0, 1.0));
  const double azim = std::atan2(r_[1], r_[0]);
  return PureState::normalized({cplx{std::cos(polar / 2)}, std::polar(std::sin(polar / 2), azim)});
}

Vec3 bloch_vector(const PureState& qubit) {
  if (qubit.dim() != 2) throw Error(ErrorKind::Validation, "Bloch vector needs a qubit state");
  const auto j = spin_operators(2);
  const auto a = qubit.amplitudes();
  return {2 * expectation(j[0], a).real(), 2 * expectation(j[1], a).real(),
          2 * expectation(j[2], a).real()};
}

ModelEvaluation eval_qubit2(double B, double theta, double t, const QubitProbe& probe) {
  const auto g = geometry2(B, theta, t);
  const double s = std::sin(B * t / 2);
  const double alpha = dot(g.n_theta, probe.bloch());
  const double beta = dot(g.n1, probe.bloch());
  const double gamma = dot(g.n2, probe.bloch());
  const double d_theta_b = 2 * t * s * gamma;
  Matrix q{{t * t * (1 - alpha * alpha), 2 * t * s * alpha * beta},
           {2 * t * s * alpha * beta, 4 * s * s * (1 - beta * beta)}};
  Matrix u{{0, -d_theta_b}, {d_theta_b, 0}};
  return {SymMatrix(std::move(q)), AntisymMatrix(std::move(u))};
}

ModelEvaluation eval_qutrit2(double B, double theta, double t, const PureState& probe) {
  if (probe.dim() != 3) throw Error(ErrorKind::Validation, "qutrit model needs a 3-dimensional probe");
  const auto g = geometry2(B, theta, t);
  const double s = std::sin(B * t / 2);
  const auto psi = probe.amplitudes();
  const CMatrix jb = spin_along(3, g.n_theta), j1 = spin_along(3, g.n1), j2 = spin_along(3, g.n2);
  const double qbb = 4 * t * t * variance(jb, psi);
  const double qtt = 16 * s * s * variance(j1, psi);
  const double qbt = -4 * t * s * covariance2(j1, jb, psi);
  const double d_theta_b = 4 * t * s * expectation(j2, psi).real();
  Matrix q{{qbb, qbt}, {qbt, qtt}};
  Matrix u{{0, -d_theta_b}, {d_theta_b, 0}};
  return {SymMatrix(std::move(q)), AntisymMatrix(std::move(u))};
}

ModelEvaluation eval_qutrit3(double B, double theta, double phi, double t, const PureState& probe) {
  if (probe.dim() != 3) throw Error(ErrorKind::Validation, "qutrit model needs a 3-dimensional probe");
  const auto g = geometry3(B, theta, phi, t);
  const double s = std::sin(B * t / 2), ct = std::cos(theta);
  const auto psi = probe.amplitudes();
  const CMatrix jb = spin_along(3, g.n_theta), j1 = spin_along(3, g.n1), j2 = spin_along(3, g.n2);
  Matrix q(3, 3);
  q(0, 0) = 4 * t * t * variance(jb, psi);
  q(1, 1) = 16 * s * s * variance(j1, psi);
  q(2, 2) = 16 * s * s * ct * ct * variance(j2, psi);
  q(0, 1) = q(1, 0) = -4 * t * s * covariance2(j1, jb, psi);
  q(0, 2) = q(2, 0) = -4 * t * s * ct * covariance2(j2, jb, psi);
  q(1, 2) = q(2, 1) = 8 * s * s * ct * covariance2(j1, j2, psi);

  const auto model = su2_model(3, 3, t, probe, DerivativeMode::analytic);
  const double point[] = {B, theta, phi};
  ModelEvaluation generic = eval_generic(model, point);
  return {SymMatrix(std::move(q)), std::move(generic.U)};
}

PureStateModel su2_model(std::size_t d, std::size_t param_count, double t, const PureState& probe,
                         DerivativeMode mode) {
  if (probe.dim() != d) throw Error(ErrorKind::Validation, "probe dimension does not match model");
  if (param_count != 2 && param_count != 3)
    throw Error(ErrorKind::Validation, "SU(2) models have 2 or 3 parameters");
  if (!(t > 0)) throw Error(ErrorKind::Validation, "evolution time t must be positive");
  const CVector psi0(probe.amplitudes().begin(), probe.amplitudes().end());
  auto angles = [param_count](std::span<const double> p) {
    return std::array<double, 3>{p[0], p[1], param_count == 3 ? p[2] : 0.0};
  };
  PureStateModel m;
  m.hilbert_dim = d;
  m.param_count = param_count;
  m.mode = mode;
  m.state_fn = [=](std::span<const double> p) {
    const auto [B, theta, phi] = angles(p);
    const auto g = geometry3(B, theta, phi, t);
    return PureState::normalized(su2_rotation(d, g.n_theta, B * t) * std::span<const cplx>(psi0));
  };
  // d psi / d lambda = -i R G_lambda psi0 with initial-frame generators
  // G_B = t J_ntheta, G_theta = -2 sin(Bt/2) J_n1, G_phi = -2 sin(Bt/2) cos(theta) J_n2.
  m.derivative_fn = [=](std::span<const double> p) {
    const auto [B, theta, phi] = angles(p);
    const auto g = geometry3(B, theta, phi, t);
    const double s = std::sin(B * t / 2);
    const CMatrix rot = su2_rotation(d, g.n_theta, B * t);
    std::vector<CMatrix> gens{spin_along(d, g.n_theta) * cplx{t}, spin_along(d, g.n1) * cplx{-2 * s}};
    if (param_count == 3) gens.push_back(spin_along(d, g.n2) * cplx{-2 * s * std::cos(theta)});
    std::vector<CVector> out;
    for (const auto& gen : gens) out.push_back((rot * gen) * cplx{0, -1} * std::span<const cplx>(psi0));
    return out;
  };
  return m;
}

const std::array<HermMatrix, 9>& gell_mann_basis() {
  static const std::array<HermMatrix, 9> basis = [] {
    const cplx i{0, 1};
    const double a = 1 / kSqrt2;
    const double b = 1 / (kSqrt2 * kSqrt3);
    const double c = 1 / kSqrt3;
    return std::array<HermMatrix, 9>{
        HermMatrix(CMatrix{{0, a, 0}, {a, 0, 0}, {0, 0, 0}}),
        HermMatrix(CMatrix{{0, -a * i, 0}, {a * i, 0, 0}, {0, 0, 0}}),
        HermMatrix(CMatrix{{a, 0, 0}, {0, -a, 0}, {0, 0, 0}}),
        HermMatrix(CMatrix{{0, 0, a}, {0, 0, 0}, {a, 0, 0}}),
        HermMatrix(CMatrix{{0, 0, -a * i}, {0, 0, 0}, {a * i, 0, 0}}),
        HermMatrix(CMatrix{{0, 0, 0}, {0, 0, a}, {0, a, 0}}),
        HermMatrix(CMatrix{{0, 0, 0}, {0, 0, -a * i}, {0, a * i, 0}}),
        HermMatrix(CMatrix{{b, 0, 0}, {0, b, 0}, {0, 0, -2 * b}}),
        HermMatrix(CMatrix{{c, 0, 0}, {0, c, 0}, {0, 0, c}}),
    };
  }();
  return basis;
}

std::vector<HermMatrix> generalized_gell_mann_basis(std::size_t d) {
  if (d == 3) {
    const auto& gm = gell_mann_basis();
    return {gm.begin(), gm.end()};
  }
  if (d < 1) throw Error(ErrorKind::Validation, "basis dimension must be positive");
  const cplx i{0, 1};
  const double a = 1 / kSqrt2;
  std::vector<HermMatrix> basis;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j + 1; k < d; ++k) {
      CMatrix sym(d, d), asym(d, d);
      sym(j, k) = sym(k, j) = a;
      asym(j, k) = -a * i;
      asym(k, j) = a * i;
      basis.emplace_back(std::move(sym));
      basis.emplace_back(std::move(asym));
    }
  for (std::size_t l = 1; l < d; ++l) {
    CMatrix diag(d, d);
    const double f = 1 / std::sqrt(double(l * (l + 1)));
    for (std::size_t j = 0; j < l; ++j) diag(j, j) = f;
    diag(l, l) = -double(l) * f;
    basis.emplace_back(std::move(diag));
  }
  basis.emplace_back(CMatrix::identity(d) * cplx{1 / std::sqrt(double(d))});
  return basis;
}

std::array<double, 9> qutrit_coherence(const PureState& probe) {
  if (probe.dim() != 3) throw Error(ErrorKind::Validation, "coherence vector needs a qutrit state");
  std::array<double, 9> r{};
  const auto& gm = gell_mann_basis();
  for (std::size_t k = 0; k < 9; ++k) r[k] = expectation(gm[k].dense(), probe.amplitudes()).real();
  return r;
}

std::array<double, 9> trace_vector(const CMatrix& op) {
  if (op.rows() != 3 || op.cols() != 3) throw Error(ErrorKind::Validation, "trace vector needs a 3x3 operator");
  std::array<double, 9> v{};
  const auto& gm = gell_mann_basis();
  for (std::size_t k = 0; k < 9; ++k) v[k] = (op * gm[k].dense()).trace().real();
  return v;
}

}  // namespace qmet

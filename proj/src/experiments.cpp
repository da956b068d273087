#include "qmet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include "qmet/errors.hpp"

namespace qmet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename F>
void parallel_for(std::size_t count, F&& body) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
}

double vec_dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// --- Nelder-Mead ----------------------------------------------------------

struct Simplex {
  std::vector<Vector> x;
  Vector f;
};

// Initial simplex: start plus step along each row of `dirs`.
template <typename F>
std::pair<Vector, double> nelder_mead(F&& f, const Vector& start, const Matrix& dirs, double step,
                                      std::size_t max_evals, std::size_t& evals) {
  const std::size_t n = start.size();
  Simplex s;
  s.x.push_back(start);
  for (std::size_t i = 0; i < n; ++i) {
    Vector v = start;
    for (std::size_t k = 0; k < n; ++k) v[k] += step * dirs(i, k);
    s.x.push_back(std::move(v));
  }
  for (const auto& v : s.x) {
    s.f.push_back(f(v));
    ++evals;
  }
  std::vector<std::size_t> order(n + 1);
  std::size_t used = 0;
  while (used < max_evals) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    double size = 0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(s.x[i][k] - s.x[best][k]));
    const double spread = s.f[worst] - s.f[best];
    if (std::isfinite(s.f[worst]) && spread <= 1e-15 * std::max(1.0, std::abs(s.f[best])) && size <= 1e-10) break;
    if (size <= 1e-14) break;

    Vector centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += s.x[i][k] / static_cast<double>(n);
    auto along = [&](double c) {
      Vector v(n);
      for (std::size_t k = 0; k < n; ++k) v[k] = centroid[k] + c * (s.x[worst][k] - centroid[k]);
      return v;
    };
    auto eval = [&](const Vector& v) {
      ++used;
      ++evals;
      return f(v);
    };
    Vector xr = along(-1);
    const double fr = eval(xr);
    if (fr < s.f[best]) {
      Vector xe = along(-2);
      const double fe = eval(xe);
      if (fe < fr) {
        s.x[worst] = std::move(xe);
        s.f[worst] = fe;
      } else {
        s.x[worst] = std::move(xr);
        s.f[worst] = fr;
      }
      continue;
    }
    if (fr < s.f[second]) {
      s.x[worst] = std::move(xr);
      s.f[worst] = fr;
      continue;
    }
    const bool outside = fr < s.f[worst];
    Vector xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : s.f[worst])) {
      s.x[worst] = std::move(xc);
      s.f[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) s.x[i][k] = s.x[best][k] + 0.5 * (s.x[i][k] - s.x[best][k]);
      s.f[i] = eval(s.x[i]);
    }
  }
  const auto it = std::min_element(s.f.begin(), s.f.end());
  return {s.x[static_cast<std::size_t>(it - s.f.begin())], *it};
}

PureState chart_state(std::span<const double> x) {
  const cplx e1 = std::polar(1.0, x[2]), e2 = std::polar(1.0, x[3]);
  return PureState::normalized(
      {cplx{std::cos(x[0])}, std::sin(x[0]) * std::cos(x[1]) * e1, std::sin(x[0]) * std::sin(x[1]) * e2});
}

Vector chart_coords(const PureState& p) {
  return {std::acos(std::min(1.0, std::abs(p[0]))), std::atan2(std::abs(p[2]), std::abs(p[1])),
          std::arg(p[1]) - std::arg(p[0]), std::arg(p[2]) - std::arg(p[0])};
}

// Rows form a random orthonormal basis (Gram-Schmidt on Gaussian rows).
Matrix random_frame(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) m(i, k) = normal(rng);
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0;
      for (std::size_t k = 0; k < n; ++k) d += m(i, k) * m(j, k);
      for (std::size_t k = 0; k < n; ++k) m(i, k) -= d * m(j, k);
    }
    double norm = 0;
    for (std::size_t k = 0; k < n; ++k) norm += m(i, k) * m(i, k);
    for (std::size_t k = 0; k < n; ++k) m(i, k) /= std::sqrt(norm);
  }
  return m;
}

}  // namespace

PureState haar_pure_state(std::size_t d, std::mt19937_64& rng) {
  if (d < 2) throw Error(ErrorKind::Validation, "Haar sampling needs d >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector a(d);
  for (auto& z : a) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = {re, im};
  }
  return PureState::normalized(std::move(a));
}

std::size_t worker_count() {
  if (const char* env = std::getenv("QMET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string_view flag_name(RowFlag f) {
  switch (f) {
    case RowFlag::ok: return "ok";
    case RowFlag::singular_qfim: return "singular_qfim";
    case RowFlag::sdp_max_iter: return "sdp_max_iter";
    case RowFlag::sdp_infeasible: return "sdp_infeasible";
  }
  return "unknown";
}

std::vector<ModelParams> draw_param_sets(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> b(0.5, 2.0);
  std::uniform_real_distribution<double> th(-std::numbers::pi / 3, std::numbers::pi / 3);
  std::uniform_real_distribution<double> ph(0.0, 2 * std::numbers::pi);
  std::vector<ModelParams> sets;
  for (std::size_t i = 0; i < count; ++i) {
    ModelParams p;
    p.B = b(rng);
    p.theta = th(rng);
    p.phi = ph(rng);
    p.t = 1;
    sets.push_back(p);
  }
  return sets;
}

ScatterRow scatter_row(const ScatterTask& task) {
  const ModelParams& p = task.params;
  ScatterRow row;
  row.index = task.index;
  row.params = p;
  row.probe.assign(task.probe.amplitudes().begin(), task.probe.amplitudes().end());
  row.c_h = kNaN;
  row.c_sep_min = kNaN;

  const ModelEvaluation ev = eval_qutrit3(p.B, p.theta, p.phi, p.t, task.probe);
  try {
    const StepwiseResult best = best_order_dp(ev.Q);
    row.c_sep_min = best.value;
    row.best_ordering = best.ordering;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularQfim) throw;
    row.flag = RowFlag::singular_qfim;
    return row;
  }

  const PureStateModel model = su2_model(3, 3, p.t, task.probe);
  const double point[3] = {p.B, p.theta, p.phi};
  const DensityJet dj = density_jet(state_jet(model, point));
  try {
    const HolevoSolution sol = holevo_bound(dj.rho, dj.drho, WeightMatrix::identity(3));
    row.c_h = sol.value;
    row.c_h_status = sol.status;
    if (sol.status != SolverStatus::converged) row.flag = RowFlag::sdp_max_iter;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible) throw;
    row.c_h_status = SolverStatus::infeasible;
    row.flag = RowFlag::sdp_infeasible;
  }
  return row;
}

std::vector<ScatterRow> scatter_rows(std::span<const ScatterTask> tasks) {
  std::vector<ScatterRow> rows(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) { rows[i] = scatter_row(tasks[i]); });
  return rows;
}

ScatterSummary summarize(std::span<const ScatterRow> rows) {
  ScatterSummary s;
  s.rows = rows.size();
  std::vector<const ScatterRow*> used;
  for (const auto& r : rows) {
    if (r.flag != RowFlag::ok) {
      ++s.flagged;
      continue;
    }
    used.push_back(&r);
    if (r.c_sep_min < r.c_h) ++s.csep_below_ch;
    if (r.c_h < r.c_sep_min) ++s.ch_below_csep;
  }
  if (used.empty()) return s;
  s.fraction_csep_below = static_cast<double>(s.csep_below_ch) / static_cast<double>(used.size());
  std::stable_sort(used.begin(), used.end(), [](const ScatterRow* a, const ScatterRow* b) { return a->c_h < b->c_h; });
  s.low_decile_rows = std::max<std::size_t>(1, used.size() / 10);
  for (std::size_t i = 0; i < s.low_decile_rows; ++i)
    if (used[i]->c_h < used[i]->c_sep_min) ++s.low_decile_ch_below;
  s.low_decile_fraction = static_cast<double>(s.low_decile_ch_below) / static_cast<double>(s.low_decile_rows);
  return s;
}

ScatterResult run_fig1_scatter(const ScatterConfig& cfg) {
  if (cfg.n_states < 1) throw Error(ErrorKind::Validation, "n_states must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  ScatterResult out;
  out.param_sets = cfg.multi_params ? draw_param_sets(cfg.param_sets, rng) : std::vector<ModelParams>{cfg.params};
  for (const auto& p : out.param_sets)
    if (std::abs(std::cos(p.theta)) < 1e-12) throw Error(ErrorKind::Validation, "cos(theta) must be non-zero");
  std::vector<ScatterTask> tasks;
  for (const auto& p : out.param_sets)
    for (std::size_t k = 0; k < cfg.n_states; ++k) tasks.push_back({tasks.size(), p, haar_pure_state(3, rng)});
  out.rows = scatter_rows(tasks);
  out.summary = summarize(out.rows);
  return out;
}

ProbeOptResult optimize_qutrit_probe(const ProbeOptConfig& cfg) {
  if (cfg.restarts < 1) throw Error(ErrorKind::Validation, "restarts must be at least 1");
  const auto W = WeightMatrix::identity(2);
  auto objective = [&](std::span<const double> x) {
    const ModelEvaluation ev = eval_qutrit2(cfg.B, cfg.theta, cfg.t, chart_state(x));
    if (!try_cholesky(ev.Q)) return kInf;
    return c_sld(ev.Q, W) + cfg.penalty * frobenius_norm(ev.U.dense());
  };

  std::mt19937_64 rng(cfg.seed);
  std::size_t evals = 0;
  Vector best_x;
  double best_f = kInf;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Vector x = chart_coords(haar_pure_state(3, rng));
    ++evals;
    if (!std::isfinite(objective(x))) continue;
    auto [nx, nf] = nelder_mead(objective, x, Matrix::identity(4), 0.3, 4000, evals);
    if (nf < best_f) {
      best_f = nf;
      best_x = std::move(nx);
    }
  }
  // The penalty kink stalls a single simplex; fresh simplices with random
  // orientation and size around the incumbent keep it moving.
  std::uniform_real_distribution<double> log_step(std::log(1e-5), std::log(0.1));
  for (int polish = 0, idle = 0; std::isfinite(best_f) && polish < 2000 && idle < 20; ++polish) {
    const Matrix frame = random_frame(4, rng);
    auto [nx, nf] = nelder_mead(objective, best_x, frame, std::exp(log_step(rng)), 4000, evals);
    idle = nf < best_f * (1 - 1e-14) ? 0 : idle + 1;
    best_x = std::move(nx);
    best_f = nf;
  }
  if (!std::isfinite(best_f))
    throw Error(ErrorKind::NoConvergence, "no restart reached a non-singular QFIM");

  ProbeOptResult res{.probe = chart_state(best_x)};
  res.objective = best_f;
  res.evaluations = evals;
  const ModelEvaluation ev = eval_qutrit2(cfg.B, cfg.theta, cfg.t, res.probe);
  res.c_sld = c_sld(ev.Q, W);
  res.residual_U = frobenius_norm(ev.U.dense());
  const double s = std::sin(cfg.B * cfg.t / 2);
  const Matrix target{{4 * cfg.t * cfg.t, 0}, {0, 16 * s * s}};
  res.qfim_deviation = frobenius_norm(ev.Q.dense() - target);

  const auto g = geometry2(cfg.B, cfg.theta, cfg.t);
  const auto psi = res.probe.amplitudes();
  const CMatrix jb = spin_along(3, g.n_theta), j1 = spin_along(3, g.n1), j2 = spin_along(3, g.n2);
  const CMatrix anti = j1 * jb + jb * j1;
  for (const CMatrix* op : {&jb, &j1, &anti, &j2})
    res.orthogonality = std::max(res.orthogonality, std::abs(expectation(*op, psi)));
  res.j2_theta = expectation(jb * jb, psi).real();
  res.j2_one = expectation(j1 * j1, psi).real();
  res.converged = res.residual_U <= kProbeResidualUTol && res.qfim_deviation <= kProbeQfimTol;
  return res;
}

SweepRow qubit_sweep_row(double alpha, double beta, double B, double t) {
  const auto g = geometry2(B, 0.0, t);
  const double gamma = std::sqrt(std::max(0.0, 1 - alpha * alpha - beta * beta));
  Vec3 r;
  for (int k = 0; k < 3; ++k) r[k] = alpha * g.n_theta[k] + beta * g.n1[k] + gamma * g.n2[k];
  const double norm = std::sqrt(vec_dot(r, r));
  for (double& x : r) x /= norm;
  const ModelEvaluation ev = eval_qubit2(B, 0.0, t, QubitProbe::from_bloch(r));
  const auto W = WeightMatrix::identity(2);
  SweepRow row{.alpha = alpha, .beta = beta, .B = B, .t = t};
  row.c_s = c_sld(ev.Q, W);
  row.c_t = c_t(ev.Q, ev.U, W);
  row.c_h = c_holevo_qubit_pure(ev.Q, ev.U, W);
  row.c_sep_12 = csep_ordered(ev.Q, Ordering::identity(2), W).value;
  row.c_sep_21 = csep_ordered(ev.Q, Ordering::reversed(2), W).value;
  row.R = quantumness_R(ev.Q, ev.U);
  return row;
}

SweepResult run_qubit_sweep(const SweepConfig& cfg) {
  if (cfg.n_samples < 1) throw Error(ErrorKind::Validation, "n_samples must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  std::uniform_real_distribution<double> time(0.0, 1.0);
  SweepResult out;
  double margin_sum = 0;
  out.summary.max_margin = -kInf;
  out.summary.min_margin = kInf;
  while (out.rows.size() < cfg.n_samples) {
    double a, b;
    do {
      a = unit(rng);
      b = unit(rng);
    } while (a * a + b * b > 1);
    const double B = angle(rng);
    const double t = 2 * (1 - time(rng));
    SweepRow row;
    try {
      row = qubit_sweep_row(a, b, B, t);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularQfim && e.kind() != ErrorKind::NotApplicable) throw;
      ++out.summary.skipped_singular;
      continue;
    }
    const double margin = std::min(row.c_sep_12, row.c_sep_21) - row.c_h;
    if (margin > kSweepSlack * std::max(1.0, row.c_h)) ++out.summary.violations;
    if (std::abs(row.R - 1) > kSweepSlack) ++out.summary.r_violations;
    out.summary.max_margin = std::max(out.summary.max_margin, margin);
    out.summary.min_margin = std::min(out.summary.min_margin, margin);
    margin_sum += margin;
    out.rows.push_back(row);
  }
  out.summary.rows = out.rows.size();
  out.summary.mean_margin = margin_sum / static_cast<double>(out.rows.size());
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void write_header(std::ostream& os, std::span<const std::pair<std::string, std::string>> header) {
  for (const auto& [k, v] : header) os << "# " << k << '=' << v << '\n';
}

}  // namespace

void write_scatter_csv(std::ostream& os, std::span<const ScatterRow> rows,
                       std::span<const std::pair<std::string, std::string>> header) {
  write_header(os, header);
  os << "index,B,theta,phi,t,re0,im0,re1,im1,re2,im2,c_h,c_h_status,c_sep_min,best_ordering,flag\n";
  for (const auto& r : rows) {
    os << r.index << ',' << format_double(r.params.B) << ',' << format_double(r.params.theta) << ','
       << format_double(r.params.phi) << ',' << format_double(r.params.t);
    for (const cplx& z : r.probe) os << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    os << ',' << format_double(r.c_h) << ',' << (r.c_h_status ? status_name(*r.c_h_status) : "none") << ','
       << format_double(r.c_sep_min) << ',' << (r.best_ordering ? r.best_ordering->to_string() : "") << ','
       << flag_name(r.flag) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows,
                     std::span<const std::pair<std::string, std::string>> header) {
  write_header(os, header);
  os << "alpha,beta,B,t,c_s,c_t,c_h,c_sep_12,c_sep_21,R\n";
  for (const auto& r : rows)
    os << format_double(r.alpha) << ',' << format_double(r.beta) << ',' << format_double(r.B) << ','
       << format_double(r.t) << ',' << format_double(r.c_s) << ',' << format_double(r.c_t) << ','
       << format_double(r.c_h) << ',' << format_double(r.c_sep_12) << ',' << format_double(r.c_sep_21) << ','
       << format_double(r.R) << '\n';
}

}  // namespace qmet

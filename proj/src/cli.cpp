#include "qmet/cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmet/bounds.hpp"
#include "qmet/config.hpp"
#include "qmet/errors.hpp"
#include "qmet/experiments.hpp"
#include "qmet/holevo.hpp"
#include "qmet/models.hpp"
#include "qmet/stepwise.hpp"

namespace qmet {

namespace {

using nlohmann::json;

constexpr double kSymmetryTol = 1e-12;
constexpr double kChainTol = 1e-9;

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json interleaved(std::span<const cplx> amps) {
  json out = json::array();
  for (const cplx& z : amps) {
    out.push_back(z.real());
    out.push_back(z.imag());
  }
  return out;
}

struct ModelInput {
  std::string name;
  SymMatrix Q;
  AntisymMatrix U;
  std::optional<DensityJet> jet;
};

Error invalid(const std::string& field, const std::string& what) {
  return Error(ErrorKind::Validation, field + ": " + what);
}

Matrix square_matrix(const RunConfig& cfg, const std::string& key) {
  Matrix m = cfg.matrix(key);
  if (!m.square()) throw invalid(key, "matrix must be square");
  return m;
}

double max_abs(const Matrix& m) {
  double s = 0;
  for (double x : m.data()) s = std::max(s, std::abs(x));
  return s;
}

PureState probe_state(const RunConfig& cfg, std::size_t d) {
  const Vector v = cfg.numbers("probe");
  if (v.size() != 2 * d) throw invalid("probe", "expected " + std::to_string(2 * d) + " interleaved re,im values");
  return PureState::from_interleaved(v);
}

ModelInput load_model(const RunConfig& cfg) {
  ModelInput in;
  in.name = cfg.text("model");
  if (in.name == "matrix") {
    const Matrix q = square_matrix(cfg, "q");
    if (max_abs(q - q.transpose()) > kSymmetryTol * std::max(1.0, max_abs(q)))
      throw invalid("q", "matrix must be symmetric");
    in.Q = SymMatrix(q);
    if (cfg.has("u")) {
      const Matrix u = square_matrix(cfg, "u");
      if (u.rows() != q.rows()) throw invalid("u", "dimension differs from q");
      if (max_abs(u + u.transpose()) > kSymmetryTol * std::max(1.0, max_abs(u)))
        throw invalid("u", "matrix must be antisymmetric");
      in.U = AntisymMatrix(u);
    } else {
      in.U = AntisymMatrix::zero(q.rows());
    }
    return in;
  }

  const double B = cfg.number("B"), theta = cfg.number("theta"), t = cfg.number("t");
  if (in.name == "qubit2") {
    QubitProbe probe = cfg.has("bloch") ? [&] {
      const Vector r = cfg.numbers("bloch");
      if (r.size() != 3) throw invalid("bloch", "expected 3 components");
      return QubitProbe::from_bloch({r[0], r[1], r[2]});
    }()
                                        : QubitProbe::from_bloch(bloch_vector(probe_state(cfg, 2)));
    const ModelEvaluation ev = eval_qubit2(B, theta, t, probe);
    in.Q = ev.Q;
    in.U = ev.U;
    const double point[2] = {B, theta};
    in.jet = density_jet(state_jet(su2_model(2, 2, t, probe.state()), point));
    return in;
  }
  if (in.name == "qutrit2") {
    const PureState probe = probe_state(cfg, 3);
    const ModelEvaluation ev = eval_qutrit2(B, theta, t, probe);
    in.Q = ev.Q;
    in.U = ev.U;
    const double point[2] = {B, theta};
    in.jet = density_jet(state_jet(su2_model(3, 2, t, probe), point));
    return in;
  }
  if (in.name == "qutrit3") {
    const double phi = cfg.number("phi");
    const PureState probe = probe_state(cfg, 3);
    const ModelEvaluation ev = eval_qutrit3(B, theta, phi, t, probe);
    in.Q = ev.Q;
    in.U = ev.U;
    const double point[3] = {B, theta, phi};
    in.jet = density_jet(state_jet(su2_model(3, 3, t, probe), point));
    return in;
  }
  throw invalid("model", "expected qubit2, qutrit2, qutrit3 or matrix");
}

WeightMatrix load_weight(const RunConfig& cfg, std::size_t n) {
  if (!cfg.has("weight")) return WeightMatrix::identity(n);
  const Vector w = cfg.numbers("weight");
  if (w.size() != n) throw invalid("weight", "expected " + std::to_string(n) + " diagonal entries");
  for (double x : w)
    if (!(x > 0)) throw invalid("weight", "entries must be positive");
  return WeightMatrix::diagonal(w);
}

json cmd_qfim(const RunConfig& cfg) {
  const ModelInput in = load_model(cfg);
  return {{"Q", to_json(in.Q.dense())}, {"U", to_json(in.U.dense())}, {"invertible", try_cholesky(in.Q).has_value()}};
}

json cmd_bounds(const RunConfig& cfg) {
  const ModelInput in = load_model(cfg);
  const WeightMatrix W = load_weight(cfg, in.Q.dim());
  BoundReport rep = bound_report(in.Q, in.U, W);
  json out;
  std::optional<HolevoSolution> sdp;
  if (in.name == "qubit2") {
    rep.c_h = c_holevo_qubit_pure(in.Q, in.U, W);
  } else if (in.name == "matrix") {
    try {
      rep.c_h = c_holevo_qubit_pure(in.Q, in.U, W);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotApplicable) throw;
    }
  } else {
    sdp = holevo_bound(in.jet->rho, in.jet->drho, W);
    rep.c_h = sdp->value;
  }
  if (!rep.chain_holds(kChainTol))
    throw Error(ErrorKind::ChainViolation, "C_S <= C_T <= C_R <= 2 C_S does not hold");
  if (rep.c_h) {
    const double tol = sdp ? kSdpTol * std::max(1.0, rep.c_s) : kChainTol * rep.c_s;
    if (*rep.c_h < rep.c_s - tol || *rep.c_h > rep.c_t + tol)
      throw Error(ErrorKind::ChainViolation, "C_S <= C_H <= C_T does not hold");
  }
  out["c_s"] = rep.c_s;
  out["c_t"] = rep.c_t;
  out["c_r"] = rep.c_r;
  out["c_h"] = rep.c_h ? json(*rep.c_h) : json(nullptr);
  if (sdp) out["c_h_status"] = status_name(sdp->status);
  out["R"] = rep.quantumness_R;
  out["T"] = rep.quantumness_T;
  out["sloppiness"] = rep.sloppiness;
  return out;
}

json cmd_csep(const RunConfig& cfg) {
  const ModelInput in = load_model(cfg);
  const WeightMatrix W = load_weight(cfg, in.Q.dim());
  Ordering order = Ordering::identity(in.Q.dim());
  if (cfg.has("ordering")) {
    const std::vector<int> o = cfg.integers("ordering");
    if (o.size() != in.Q.dim()) throw invalid("ordering", "expected " + std::to_string(in.Q.dim()) + " indices");
    for (int k : o)
      if (k < 1 || k > static_cast<int>(in.Q.dim())) throw invalid("ordering", "indices are 1-based");
    try {
      order = Ordering::from_one_based(o);
    } catch (const Error&) {
      throw invalid("ordering", "must be a permutation");
    }
  }
  return to_json(csep_ordered(in.Q, order, W));
}

json cmd_order(const RunConfig& cfg) {
  const ModelInput in = load_model(cfg);
  const WeightMatrix W = load_weight(cfg, in.Q.dim());
  const std::string method = cfg.has("method") ? cfg.text("method") : "dp";
  json out;
  if (method == "dp") {
    const DpOutcome dp = best_order_dp_tables(in.Q, W);
    out = to_json(dp.best);
    out["expansions"] = dp.tables.expansions;
  } else if (method == "bruteforce") {
    out = to_json(best_order_bruteforce(in.Q, W));
  } else {
    throw invalid("method", "expected dp or bruteforce");
  }
  out["method"] = method;
  return out;
}

json cmd_holevo(const RunConfig& cfg) {
  const ModelInput in = load_model(cfg);
  if (!in.jet) throw invalid("model", "holevo needs a physical model");
  const WeightMatrix W = load_weight(cfg, in.Q.dim());
  const HolevoSolution sol = holevo_bound(in.jet->rho, in.jet->drho, W);
  json out = to_json(sol);
  out["iterations"] = sol.iterations;
  out["constraint_residual"] = sol.constraint_residual;
  if (try_cholesky(in.Q)) {
    out["c_s"] = c_sld(in.Q, W);
    out["sandwich"] = verify_sandwich(sol, in.Q, in.U, W);
  }
  if (sol.status != SolverStatus::converged) {
    out["error"] = error_name(ErrorKind::MaxIterations);
    out["message"] = "solver stopped before reaching the gap tolerance";
  }
  return out;
}

// Sweep commands write defaults back so the echoed configuration replays exactly.
void default_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (!cfg.has(key)) cfg.set(key, value);
}

std::vector<std::pair<std::string, std::string>> header(const RunConfig& cfg) {
  return {cfg.entries().begin(), cfg.entries().end()};
}

void write_file(const std::string& path, const auto& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw invalid("output", "cannot open '" + path + "' for writing");
  writer(os);
  if (!os) throw invalid("output", "write to '" + path + "' failed");
}

json cmd_scatter(RunConfig& cfg) {
  const ModelParams fig1;
  default_entry(cfg, "B", format_double(fig1.B));
  default_entry(cfg, "theta", format_double(fig1.theta));
  default_entry(cfg, "phi", format_double(fig1.phi));
  default_entry(cfg, "t", format_double(fig1.t));
  default_entry(cfg, "n_states", "2000");
  default_entry(cfg, "seed", "42");
  default_entry(cfg, "multi_params", "false");
  default_entry(cfg, "output", "scatter.csv");
  ScatterConfig sc;
  sc.params = {cfg.number("B"), cfg.number("theta"), cfg.number("phi"), cfg.number("t")};
  sc.n_states = cfg.unsigned_or("n_states", 2000);
  if (sc.n_states < 1) throw invalid("n_states", "must be at least 1");
  if (std::abs(std::cos(sc.params.theta)) < 1e-12) throw invalid("theta", "cos(theta) must be non-zero");
  sc.seed = cfg.unsigned_or("seed", 42);
  sc.multi_params = cfg.flag_or("multi_params", false);
  const ScatterResult res = run_fig1_scatter(sc);
  const std::string path = cfg.text("output");
  write_file(path, [&](std::ostream& os) { write_scatter_csv(os, res.rows, header(cfg)); });
  const ScatterSummary& s = res.summary;
  return {{"output", path},
          {"rows", s.rows},
          {"flagged", s.flagged},
          {"csep_below_ch", s.csep_below_ch},
          {"ch_below_csep", s.ch_below_csep},
          {"fraction_csep_below_ch", s.fraction_csep_below},
          {"low_decile_rows", s.low_decile_rows},
          {"low_decile_fraction_ch_below", s.low_decile_fraction}};
}

json cmd_probe_opt(RunConfig& cfg) {
  const ProbeOptConfig defaults;
  default_entry(cfg, "B", format_double(defaults.B));
  default_entry(cfg, "theta", format_double(defaults.theta));
  default_entry(cfg, "t", format_double(defaults.t));
  default_entry(cfg, "seed", "42");
  default_entry(cfg, "restarts", "32");
  ProbeOptConfig pc;
  pc.B = cfg.number("B");
  pc.theta = cfg.number("theta");
  pc.t = cfg.number("t");
  pc.seed = cfg.unsigned_or("seed", 42);
  pc.restarts = cfg.unsigned_or("restarts", 32);
  if (pc.restarts < 1) throw invalid("restarts", "must be at least 1");
  const ProbeOptResult r = optimize_qutrit_probe(pc);
  const double s = std::sin(pc.B * pc.t / 2);
  json out{{"probe", interleaved(r.probe.amplitudes())},
           {"c_s", r.c_sld},
           {"c_s_expected", (4 / (pc.t * pc.t) + 1 / (s * s)) / 16},
           {"residual_U", r.residual_U},
           {"qfim_deviation", r.qfim_deviation},
           {"orthogonality", r.orthogonality},
           {"j2_theta", r.j2_theta},
           {"j2_one", r.j2_one},
           {"converged", r.converged},
           {"evaluations", r.evaluations}};
  if (!r.converged) {
    out["error"] = error_name(ErrorKind::NoConvergence);
    out["message"] = "residual tolerances not met";
  }
  return out;
}

json cmd_qubit_sweep(RunConfig& cfg) {
  default_entry(cfg, "n_samples", "100000");
  default_entry(cfg, "seed", "42");
  default_entry(cfg, "output", "qubit_sweep.csv");
  SweepConfig sc;
  sc.n_samples = cfg.unsigned_or("n_samples", 100000);
  if (sc.n_samples < 1) throw invalid("n_samples", "must be at least 1");
  sc.seed = cfg.unsigned_or("seed", 42);
  const SweepResult res = run_qubit_sweep(sc);
  const std::string path = cfg.text("output");
  write_file(path, [&](std::ostream& os) { write_sweep_csv(os, res.rows, header(cfg)); });
  const SweepSummary& s = res.summary;
  return {{"output", path},
          {"rows", s.rows},
          {"skipped_singular", s.skipped_singular},
          {"violations", s.violations},
          {"r_violations", s.r_violations},
          {"max_margin", s.max_margin},
          {"min_margin", s.min_margin},
          {"mean_margin", s.mean_margin}};
}

bool is_input_error(ErrorKind k) {
  return k == ErrorKind::Validation || k == ErrorKind::ConfigParse || k == ErrorKind::UnknownKey;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiparameter quantum estimation bounds"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"qfim", "QFIM and Uhlmann curvature of a model"},
      {"bounds", "SLD, T, R and Holevo bounds"},
      {"csep", "stepwise bound for one ordering"},
      {"order", "optimal estimation ordering"},
      {"holevo", "numerical Holevo bound"},
      {"scatter", "C_H versus min-order C_sep for Haar qutrit probes (CSV)"},
      {"probe-opt", "optimal qutrit probe for the two-parameter model"},
      {"qubit-sweep", "stepwise versus joint bounds on random qubit models (CSV)"}};

  std::string config_path;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, std::vector<CLI::Option*>> flag_options;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "flat key=value file; flags override its entries");
    for (const std::string& key : known_config_keys()) {
      if (key == "command") continue;
      flag_options[key].push_back(sub->add_option("--" + key, flag_values[key]));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    RunConfig overrides;
    for (const auto& [key, opts] : flag_options)
      for (const CLI::Option* opt : opts)
        if (opt->count() > 0) overrides.set(key, flag_values[key]);
    cfg.merge(overrides);
    cfg.set("command", command);

    json result;
    if (command == "qfim") result = cmd_qfim(cfg);
    else if (command == "bounds") result = cmd_bounds(cfg);
    else if (command == "csep") result = cmd_csep(cfg);
    else if (command == "order") result = cmd_order(cfg);
    else if (command == "holevo") result = cmd_holevo(cfg);
    else if (command == "scatter") result = cmd_scatter(cfg);
    else if (command == "probe-opt") result = cmd_probe_opt(cfg);
    else result = cmd_qubit_sweep(cfg);
    result["config"] = cfg.entries();
    out << result.dump(2) << '\n';
    if (result.contains("error")) {
      err << result["error"].get<std::string>() << ": " << result["message"].get<std::string>() << '\n';
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    out << json{{"error", std::string(e.name())}, {"message", e.what()}}.dump(2) << '\n';
    err << e.what() << '\n';
    return is_input_error(e.kind()) ? 2 : 1;
  }
}

}  // namespace qmet

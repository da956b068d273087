#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmet/holevo.hpp"
#include "qmet/models.hpp"
#include "qmet/stepwise.hpp"

namespace qmet {

/// d independent standard complex Gaussian amplitudes, normalized.
PureState haar_pure_state(std::size_t d, std::mt19937_64& rng);

/// Worker count: QMET_THREADS when set and positive, else hardware concurrency.
std::size_t worker_count();

struct ModelParams {
  double B = 1;
  double theta = std::numbers::pi / 7;
  double phi = std::numbers::pi / 5;
  double t = 1;
};

// ---------------------------------------------------------------------------
// C_H versus min-order C_sep for Haar qutrit probes in the three-parameter model.

enum class RowFlag { ok, singular_qfim, sdp_max_iter, sdp_infeasible };

std::string_view flag_name(RowFlag f);

struct ScatterRow {
  std::size_t index = 0;
  ModelParams params;
  CVector probe;
  double c_h = 0;
  std::optional<SolverStatus> c_h_status;
  double c_sep_min = 0;
  std::optional<Ordering> best_ordering;
  RowFlag flag = RowFlag::ok;
};

struct ScatterTask {
  std::size_t index = 0;
  ModelParams params;
  PureState probe;
};

struct ScatterSummary {
  std::size_t rows = 0;  // flagged rows included
  std::size_t flagged = 0;
  std::size_t csep_below_ch = 0;  // c_sep_min < c_h
  std::size_t ch_below_csep = 0;  // c_h < c_sep_min
  double fraction_csep_below = 0;
  std::size_t low_decile_rows = 0;
  std::size_t low_decile_ch_below = 0;
  double low_decile_fraction = 0;  // share of the lowest-c_h decile with c_h < c_sep_min
};

struct ScatterConfig {
  ModelParams params;
  std::size_t n_states = 2000;
  std::uint64_t seed = 42;
  bool multi_params = false;
  std::size_t param_sets = 10;
};

struct ScatterResult {
  std::vector<ModelParams> param_sets;
  std::vector<ScatterRow> rows;
  ScatterSummary summary;
};

/// B in [0.5, 2], theta in [-pi/3, pi/3], phi in [0, 2 pi), t = 1.
std::vector<ModelParams> draw_param_sets(std::size_t count, std::mt19937_64& rng);

/// One row; failures become flags, never exceptions.
ScatterRow scatter_row(const ScatterTask& task);
/// Rows in task order; evaluated on worker_count() threads.
std::vector<ScatterRow> scatter_rows(std::span<const ScatterTask> tasks);
/// Flagged rows are excluded.
ScatterSummary summarize(std::span<const ScatterRow> rows);

/// All samples are drawn up front from one seeded stream: the parameter sets
/// (multi mode) followed by n_states probes per set.
ScatterResult run_fig1_scatter(const ScatterConfig& cfg);

// ---------------------------------------------------------------------------
// Probe optimization in the two-parameter qutrit model.

struct ProbeOptConfig {
  double B = std::numbers::pi;
  double theta = std::numbers::pi / 4;
  double t = 1;
  std::uint64_t seed = 42;
  std::size_t restarts = 32;
  double penalty = 1e3;
};

inline constexpr double kProbeResidualUTol = 1e-6;
inline constexpr double kProbeQfimTol = 1e-4;

struct ProbeOptResult {
  PureState probe;
  double objective = 0;
  double c_sld = 0;
  double residual_U = 0;      // ||U||_F
  double qfim_deviation = 0;  // ||Q - diag(4 t^2, 16 sin^2(Bt/2))||_F
  double orthogonality = 0;   // max |<J>| over J_ntheta, J_n1, {J_n1, J_ntheta}, J_n2
  double j2_theta = 0;        // <J_ntheta^2>
  double j2_one = 0;          // <J_n1^2>
  bool converged = false;     // both residual tolerances met
  std::size_t evaluations = 0;
};

/// Multi-start Nelder-Mead over the chart
/// (cos a, sin a cos b e^{iu}, sin a sin b e^{iv}) minimizing c_sld + penalty ||U||_F.
/// Throws NoConvergence when no restart reaches a non-singular QFIM.
ProbeOptResult optimize_qutrit_probe(const ProbeOptConfig& cfg);

// ---------------------------------------------------------------------------
// Pure-qubit sweep of stepwise versus joint bounds.

struct SweepRow {
  double alpha = 0, beta = 0, B = 0, t = 0;
  double c_s = 0, c_t = 0, c_h = 0, c_sep_12 = 0, c_sep_21 = 0, R = 0;
};

struct SweepConfig {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 42;
};

inline constexpr double kSweepSlack = 1e-9;

struct SweepSummary {
  std::size_t rows = 0;
  std::size_t skipped_singular = 0;
  std::size_t violations = 0;    // min-order C_sep > C_H beyond slack
  std::size_t r_violations = 0;  // |R - 1| > slack
  double max_margin = 0;         // max of C_sep_min - C_H
  double min_margin = 0;
  double mean_margin = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

/// Pure two-parameter qubit with Bloch vector alpha n_theta + beta n1 + sqrt(1 - alpha^2 - beta^2) n2.
SweepRow qubit_sweep_row(double alpha, double beta, double B, double t);

/// (alpha, beta) uniform on the unit disk, B uniform in [0, 2 pi), t uniform in (0, 2].
/// Samples with a singular QFIM are redrawn and counted.
SweepResult run_qubit_sweep(const SweepConfig& cfg);

// ---------------------------------------------------------------------------
// CSV output: 17 significant digits, leading '#' lines carry the configuration.

std::string format_double(double x);

void write_scatter_csv(std::ostream& os, std::span<const ScatterRow> rows,
                       std::span<const std::pair<std::string, std::string>> header);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows,
                     std::span<const std::pair<std::string, std::string>> header);

}  // namespace qmet
